//! `bmqc`: construct, certify, expand and simulate Block-MDS QC-LDPC codes.

use std::collections::BTreeMap;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use bmqc::blockmds::{self, theorem2_check, theorem3_applicable, DEFAULT_SEARCH_BUDGET};
use bmqc::qcldpc::girth;
use bmqc::sim::{self, SimConfig};
use bmqc::{load_code, save_code, FieldSpec, QcCode};
use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(
    name = "bmqc",
    version,
    about = "Block-MDS QC-LDPC codes for subset-codeword reconciliation",
    after_help = "Exit codes: 0 success or verified, 1 verification or search failure, 2 usage or input error."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Search a girth-constrained power matrix, apply Vandermonde scaling
    /// and certify the result.
    Construct {
        #[arg(long)]
        gamma: usize,
        #[arg(long)]
        kappa: usize,
        #[arg(long)]
        z: usize,
        #[arg(long, default_value_t = 8)]
        q: u32,
        /// Target girth (6, 8, 10 or 12).
        #[arg(long, default_value_t = 10)]
        girth: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Maximum number of candidate shift evaluations.
        #[arg(long, default_value_t = DEFAULT_SEARCH_BUDGET)]
        budget: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Report girth and the Block-MDS certificate of a code file.
    Verify {
        file: PathBuf,
        /// Also check every block submatrix by rank.
        #[arg(long)]
        exact: bool,
        /// Print the certificate as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Dump the expanded parity-check matrix.
    Expand {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Coords)]
        format: Format,
    },
    /// Check the preconditions of the Vandermonde construction.
    Theorem3Check {
        #[arg(long, default_value_t = 8)]
        q: u64,
        #[arg(long)]
        z: u64,
        #[arg(long)]
        gamma: usize,
        #[arg(long)]
        kappa: usize,
    },
    /// Run a Monte Carlo sweep and write the CSV.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Override the trial count of the config.
        #[arg(long)]
        trials: Option<u64>,
        /// Override the worker count of the config.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Print code, p, FC SKR and MSC SKR from simulation CSVs.
    SkrTable {
        #[arg(required = true)]
        csv: Vec<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    /// One `row col coeff` triple per line.
    Coords,
    /// `M N` header, then one line per row of `col:coeff` entries.
    #[value(alias = "alist-like")]
    Alist,
}

enum Failure {
    Usage(String),
    Failed(String),
}

type Outcome = Result<(), Failure>;

fn usage(e: impl ToString) -> Failure {
    Failure::Usage(e.to_string())
}

fn failed(e: impl ToString) -> Failure {
    Failure::Failed(e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Construct { gamma, kappa, z, q, girth, seed, budget, out } => {
            construct(gamma, kappa, z, q, girth, seed, budget, &out)
        }
        Command::Verify { file, exact, json } => verify(&file, exact, json),
        Command::Expand { file, format } => expand(&file, format),
        Command::Theorem3Check { q, z, gamma, kappa } => theorem3(q, z, gamma, kappa),
        Command::Simulate { config, out, trials, workers } => simulate(&config, &out, trials, workers),
        Command::SkrTable { csv } => skr_table(&csv),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Failed(msg)) => {
            if !msg.is_empty() {
                eprintln!("error: {msg}");
            }
            ExitCode::from(EXIT_FAIL)
        }
    }
}

fn load(file: &PathBuf) -> Result<QcCode, Failure> {
    load_code(file).map_err(usage)
}

#[allow(clippy::too_many_arguments)]
fn construct(
    gamma: usize,
    kappa: usize,
    z: usize,
    q: u32,
    target: usize,
    seed: u64,
    budget: u64,
    out: &PathBuf,
) -> Outcome {
    let field = FieldSpec::with_order(q).map_err(usage)?;
    let report = theorem3_applicable(q as u64, z as u64, gamma, kappa);
    if !report.applicable {
        return Err(usage(format!("construction not applicable: {}", report.reasons.join("; "))));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    eprintln!("searching (gamma={gamma}, kappa={kappa}, z={z}, girth>={target}, seed={seed})");
    let code =
        blockmds::construct_block_mds(&field, gamma, kappa, z, target, &mut rng, budget).map_err(|e| match e {
            blockmds::BlockMdsError::BadTargetGirth(_) | blockmds::BlockMdsError::GirthTooSmall { .. } => usage(e),
            _ => failed(e),
        })?;
    save_code(&code, out).map_err(failed)?;
    let cert = theorem2_check(&code).map_err(failed)?;
    println!("wrote {}", out.display());
    println!("N={} M={} rate={}/{}", code.n(), code.m(), code.design_rate_fraction().0, code.design_rate_fraction().1);
    println!("girth: {}", girth(code.power()));
    println!("{cert}");
    Ok(())
}

fn verify(file: &PathBuf, exact: bool, json: bool) -> Outcome {
    let code = load(file)?;
    let cert = theorem2_check(&code).map_err(usage)?;
    let g = girth(code.power());
    let exact_ok = exact.then(|| {
        eprintln!("running rank checks");
        blockmds::exact_check_detail(&code)
    });
    if json {
        println!("{}", cert.to_json());
    } else {
        println!("code: gamma={} kappa={} z={} q={}", code.gamma(), code.kappa(), code.z(), code.field().q());
        println!("girth: {g}");
        println!("{cert}");
        if let Some(detail) = &exact_ok {
            for (b, ok) in detail {
                println!("  rank check {b}: {}", if *ok { "full" } else { "deficient" });
            }
            let all = detail.iter().all(|(_, ok)| *ok);
            println!("Exact Block-MDS: {}", if all { "yes" } else { "no" });
        }
    }
    let exact_pass = exact_ok.map_or(true, |d| d.iter().all(|(_, ok)| *ok));
    if cert.verdict && exact_pass {
        Ok(())
    } else {
        Err(failed(""))
    }
}

fn expand(file: &PathBuf, format: Format) -> Outcome {
    let code = load(file)?;
    let h = code.expand();
    let stdout = io::stdout();
    let mut w = BufWriter::new(stdout.lock());
    let res: io::Result<()> = (|| {
        match format {
            Format::Coords => {
                for (r, c, v) in h.triples() {
                    writeln!(w, "{r} {c} {v}")?;
                }
            }
            Format::Alist => {
                writeln!(w, "{} {}", h.n_rows(), h.n_cols())?;
                for r in 0..h.n_rows() {
                    let line: Vec<String> = h.row(r).iter().map(|(c, v)| format!("{c}:{v}")).collect();
                    writeln!(w, "{}", line.join(" "))?;
                }
            }
        }
        w.flush()
    })();
    res.map_err(failed)
}

fn theorem3(q: u64, z: u64, gamma: usize, kappa: usize) -> Outcome {
    let report = theorem3_applicable(q, z, gamma, kappa);
    if report.applicable {
        println!("applicable: yes");
        Ok(())
    } else {
        println!("applicable: no");
        for r in &report.reasons {
            println!("  {r}");
        }
        Err(failed(""))
    }
}

fn simulate(config: &PathBuf, out: &PathBuf, trials: Option<u64>, workers: Option<usize>) -> Outcome {
    let mut cfg = SimConfig::load(config).map_err(usage)?;
    if let Some(t) = trials {
        cfg.trials = t;
    }
    if let Some(w) = workers {
        cfg.workers = w;
    }
    cfg.validate().map_err(usage)?;
    let file = std::fs::File::create(out).map_err(|e| usage(format!("cannot write {}: {e}", out.display())))?;
    let rows = sim::sweep_with(&cfg, |r| {
        eprintln!(
            "{} p={} trials={} fer_fc={:.4} fer_msc={:.4} iters={:.2}",
            r.code, r.p, r.trials, r.fer_fc, r.fer_msc, r.mean_iters
        );
    })
    .map_err(failed)?;
    let mut w = BufWriter::new(file);
    sim::write_csv(&rows, &mut w).and_then(|_| w.flush()).map_err(failed)?;
    let violations: u64 = rows.iter().map(|r| r.dominance_violations).sum();
    if violations > 0 {
        return Err(failed(format!("{violations} trials decoded the full word but not the selected subset")));
    }
    print!("{}", sim::skr_summary(&rows));
    Ok(())
}

fn skr_table(paths: &[PathBuf]) -> Outcome {
    let mut rows: BTreeMap<(String, String), (f64, f64)> = BTreeMap::new();
    for path in paths {
        let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        let mut lines = text.lines();
        let header: Vec<&str> = lines.next().unwrap_or("").split(',').collect();
        let col = |name: &str| {
            header
                .iter()
                .position(|h| *h == name)
                .ok_or_else(|| usage(format!("{}: missing column {name}", path.display())))
        };
        let (ci, pi, fi, mi) = (col("code")?, col("p")?, col("skr_fc")?, col("skr_msc")?);
        for (k, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let cells: Vec<&str> = line.split(',').collect();
            let cell = |i: usize| -> Result<f64, Failure> {
                let s = cells.get(i).copied().unwrap_or("");
                s.trim().parse().map_err(|_| {
                    usage(format!("{} line {}: column {} is not a number: {s:?}", path.display(), k + 2, header[i]))
                })
            };
            let key =
                (cells.get(ci).copied().unwrap_or("").to_string(), cells.get(pi).copied().unwrap_or("").to_string());
            let value = (cell(fi)?, cell(mi)?);
            if rows.insert(key.clone(), value).is_some() {
                eprintln!("warning: duplicate row for {} p={}, keeping the last", key.0, key.1);
            }
        }
    }
    if rows.is_empty() {
        return Err(usage("no rows"));
    }
    println!("{:<6} {:>8} {:>10} {:>10}", "code", "p", "FC SKR", "MSC SKR");
    for ((code, p), (fc, msc)) in &rows {
        println!("{code:<6} {p:>8} {fc:>10.4} {msc:>10.4}");
    }
    Ok(())
}
