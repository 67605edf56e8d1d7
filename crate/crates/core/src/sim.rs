//! Monte Carlo estimation of reconciliation failure rates and secret key
//! rates, with CSV output.
//!
//! Every trial draws from its own ChaCha stream seeded from
//! `(base seed, trial index)`, and per-point statistics are plain sums over
//! trials, so results do not depend on how trials are scheduled.

use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use thiserror::Error;

use crate::blockmds::BlockSubset;
use crate::channel::{ChannelError, ChannelModel};
use crate::codefile::{load_code, CodeFileError};
use crate::decoder::{DecoderConfig, DecoderError, Reconciler, TrialOutcome};
use crate::qcldpc::QcCode;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("success probability {0} is outside [0, 1]")]
    BadProbability(f64),
    #[error("invalid simulation config: {0}")]
    BadConfig(String),
    #[error("cannot read config {path}: {source}")]
    ConfigIo { path: String, source: io::Error },
    #[error("malformed config: {0}")]
    ConfigJson(#[from] serde_json::Error),
    #[error(transparent)]
    Code(#[from] CodeFileError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Decoder(#[from] DecoderError),
    #[error("cannot write {path}: {source}")]
    Output { path: String, source: io::Error },
}

pub type Result<T> = std::result::Result<T, SimError>;

/// Exact CSV header written by [`write_csv`].
pub const CSV_HEADER: &str = "code,p,trials,fc_failures,msc_failures,undetected,fer_fc,fer_fc_lo,fer_fc_hi,fer_msc,fer_msc_lo,fer_msc_hi,skr_fc,skr_msc,mean_iters";

/// Final key bits per raw symbol when reconciliation succeeds:
/// `((N - M) / N) * log2 q`. The same factor applies to the full-codeword
/// and subset decoders; only the success probability differs.
pub fn key_bits_per_symbol(code: &QcCode) -> f64 {
    let (n, m) = (code.n() as f64, code.m() as f64);
    (n - m) / n * (code.field().q() as f64).log2()
}

/// Secret key rate for a given reconciliation success probability.
pub fn skr(success_prob: f64, code: &QcCode) -> Result<f64> {
    if !(0.0..=1.0).contains(&success_prob) {
        return Err(SimError::BadProbability(success_prob));
    }
    Ok(success_prob * key_bits_per_symbol(code))
}

/// 95% Wilson score interval for `k` successes in `n` trials.
pub fn wilson_interval(k: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    const Z: f64 = 1.959_963_984_540_054;
    let n = n as f64;
    let p = k as f64 / n;
    let z2 = Z * Z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = Z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Seed of trial `trial` under base seed `seed` (SplitMix64 of the pair).
pub fn trial_seed(seed: u64, trial: u64) -> u64 {
    let mut x = seed ^ trial.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Aggregated statistics for one (code, p) point.
#[derive(Clone, Debug, PartialEq)]
pub struct PointResult {
    pub code: String,
    pub p: f64,
    pub trials: u64,
    pub fc_failures: u64,
    pub msc_failures: u64,
    pub undetected: u64,
    pub fer_fc: f64,
    pub fer_fc_ci: (f64, f64),
    pub fer_msc: f64,
    pub fer_msc_ci: (f64, f64),
    pub skr_fc: f64,
    pub skr_msc: f64,
    pub mean_iters: f64,
    /// Trials where the full word decoded but the selected subset did not.
    pub dominance_violations: u64,
    /// Failures of the subset decoder per excluded block set, when recorded.
    pub subset_failures: Option<Vec<(BlockSubset, u64)>>,
    /// Trials where at least one block set decoded.
    pub any_subset_successes: Option<u64>,
}

#[derive(Default)]
struct Tally {
    trials: u64,
    fc_failures: u64,
    msc_failures: u64,
    undetected: u64,
    iterations: u64,
    violations: u64,
    subset_failures: Vec<u64>,
    any_subset: u64,
}

impl Tally {
    fn add(&mut self, t: &TrialOutcome) {
        self.trials += 1;
        self.fc_failures += u64::from(!t.fc_success);
        self.msc_failures += u64::from(!t.msc_success);
        self.undetected += u64::from(t.undetected);
        self.iterations += t.iterations as u64;
        self.violations += u64::from(!t.is_consistent());
        if let Some(per) = &t.per_subset_success {
            if self.subset_failures.is_empty() {
                self.subset_failures = vec![0; per.len()];
            }
            for (f, (_, ok)) in self.subset_failures.iter_mut().zip(per) {
                *f += u64::from(!ok);
            }
            self.any_subset += u64::from(per.iter().any(|(_, ok)| *ok));
        }
    }

    #[cfg(feature = "parallel")]
    fn merge(mut self, other: Tally) -> Tally {
        self.trials += other.trials;
        self.fc_failures += other.fc_failures;
        self.msc_failures += other.msc_failures;
        self.undetected += other.undetected;
        self.iterations += other.iterations;
        self.violations += other.violations;
        self.any_subset += other.any_subset;
        if self.subset_failures.is_empty() {
            self.subset_failures = other.subset_failures;
        } else {
            for (a, b) in self.subset_failures.iter_mut().zip(other.subset_failures) {
                *a += b;
            }
        }
        self
    }
}

/// Knobs shared by every point of a run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointOptions {
    pub trials: u64,
    pub seed: u64,
    pub decoder: DecoderConfig,
    /// Worker threads; 0 uses the global pool.
    pub workers: usize,
    pub record_subsets: bool,
}

impl Default for PointOptions {
    fn default() -> Self {
        PointOptions { trials: 10_000, seed: 1, decoder: DecoderConfig::default(), workers: 0, record_subsets: false }
    }
}

/// Runs `opts.trials` independent reconciliation trials at transition
/// probability `p`.
pub fn run_point(label: &str, code: &QcCode, p: f64, opts: &PointOptions) -> Result<PointResult> {
    if opts.trials == 0 {
        return Err(SimError::BadConfig("trials must be at least 1".into()));
    }
    let model = ChannelModel::new(code.field().q(), p)?;
    opts.decoder.validate()?;
    let tally = run_trials(code, &model, opts)?;
    Ok(summarize(label, code, p, &tally))
}

fn one_trial(rec: &mut Reconciler, model: &ChannelModel, opts: &PointOptions, t: u64) -> TrialOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(opts.seed, t));
    rec.run_trial(model, &mut rng, opts.record_subsets)
}

#[cfg(feature = "parallel")]
fn run_trials(code: &QcCode, model: &ChannelModel, opts: &PointOptions) -> Result<Tally> {
    use rayon::prelude::*;

    let work = || {
        (0..opts.trials)
            .into_par_iter()
            .map_init(
                || Reconciler::new(code, opts.decoder).expect("decoder config validated"),
                |rec, t| {
                    let mut tally = Tally::default();
                    tally.add(&one_trial(rec, model, opts, t));
                    tally
                },
            )
            .reduce(Tally::default, Tally::merge)
    };
    if opts.workers == 0 {
        Ok(work())
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.workers)
            .build()
            .map_err(|e| SimError::BadConfig(e.to_string()))?;
        Ok(pool.install(work))
    }
}

#[cfg(not(feature = "parallel"))]
fn run_trials(code: &QcCode, model: &ChannelModel, opts: &PointOptions) -> Result<Tally> {
    let mut rec = Reconciler::new(code, opts.decoder)?;
    let mut tally = Tally::default();
    for t in 0..opts.trials {
        tally.add(&one_trial(&mut rec, model, opts, t));
    }
    Ok(tally)
}

fn summarize(label: &str, code: &QcCode, p: f64, t: &Tally) -> PointResult {
    let n = t.trials as f64;
    let fer_fc = t.fc_failures as f64 / n;
    let fer_msc = t.msc_failures as f64 / n;
    let bits = key_bits_per_symbol(code);
    let subset_failures = (!t.subset_failures.is_empty())
        .then(|| BlockSubset::all(code.gamma(), code.kappa()).zip(t.subset_failures.iter().copied()).collect());
    PointResult {
        code: label.to_string(),
        p,
        trials: t.trials,
        fc_failures: t.fc_failures,
        msc_failures: t.msc_failures,
        undetected: t.undetected,
        fer_fc,
        fer_fc_ci: wilson_interval(t.fc_failures, t.trials),
        fer_msc,
        fer_msc_ci: wilson_interval(t.msc_failures, t.trials),
        skr_fc: (1.0 - fer_fc) * bits,
        skr_msc: (1.0 - fer_msc) * bits,
        mean_iters: t.iterations as f64 / n,
        dominance_violations: t.violations,
        any_subset_successes: subset_failures.as_ref().map(|_| t.any_subset),
        subset_failures,
    }
}

/// One code and the transition probabilities to simulate it at.
#[derive(Clone, Debug, PartialEq, Deserialize)]
pub struct RunSpec {
    #[serde(default)]
    pub label: Option<String>,
    pub code: PathBuf,
    pub p_values: Vec<f64>,
}

/// Contents of a `.cfg` file. Either a single `code` + `p_values` pair at
/// the top level, or a list of `runs`.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    #[serde(default)]
    pub label: Option<String>,
    #[serde(default)]
    pub code: Option<PathBuf>,
    #[serde(default)]
    pub p_values: Option<Vec<f64>>,
    #[serde(default)]
    pub runs: Vec<RunSpec>,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_iterations")]
    pub max_iterations: usize,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default)]
    pub workers: usize,
    #[serde(default)]
    pub record_subsets: bool,
}

fn default_trials() -> u64 {
    10_000
}

fn default_seed() -> u64 {
    1
}

fn default_iterations() -> usize {
    100
}

fn default_epsilon() -> f64 {
    1e-12
}

impl SimConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: SimConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config and resolves relative code paths against its directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|source| SimError::ConfigIo { path: path.display().to_string(), source })?;
        let mut cfg = Self::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        if let Some(code) = &mut cfg.code {
            if code.is_relative() {
                *code = base.join(&*code);
            }
        }
        for run in &mut cfg.runs {
            if run.code.is_relative() {
                run.code = base.join(&run.code);
            }
        }
        Ok(cfg)
    }

    /// All runs, with the top-level shorthand folded in.
    pub fn all_runs(&self) -> Vec<RunSpec> {
        let mut runs = Vec::new();
        if let Some(code) = &self.code {
            runs.push(RunSpec {
                label: self.label.clone(),
                code: code.clone(),
                p_values: self.p_values.clone().unwrap_or_default(),
            });
        }
        runs.extend(self.runs.iter().cloned());
        runs
    }

    pub fn point_options(&self) -> PointOptions {
        PointOptions {
            trials: self.trials,
            seed: self.seed,
            decoder: DecoderConfig { max_iterations: self.max_iterations, epsilon: self.epsilon, early_stop: true },
            workers: self.workers,
            record_subsets: self.record_subsets,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.code.is_none() && self.p_values.is_some() {
            return Err(SimError::BadConfig("p_values given without code".into()));
        }
        let runs = self.all_runs();
        if runs.is_empty() {
            return Err(SimError::BadConfig("no code to simulate".into()));
        }
        if self.trials == 0 {
            return Err(SimError::BadConfig("trials must be at least 1".into()));
        }
        for run in &runs {
            if run.p_values.is_empty() {
                return Err(SimError::BadConfig(format!("empty p list for {}", run.code.display())));
            }
            for (k, &p) in run.p_values.iter().enumerate() {
                if !(0.0..1.0).contains(&p) {
                    return Err(SimError::BadConfig(format!("p = {p} outside [0, 1)")));
                }
                if run.p_values[..k].contains(&p) {
                    return Err(SimError::BadConfig(format!("duplicate p = {p}")));
                }
            }
        }
        self.point_options().decoder.validate()?;
        Ok(())
    }
}

fn run_label(run: &RunSpec) -> String {
    run.label.clone().unwrap_or_else(|| {
        run.code.file_stem().map(|s| s.to_string_lossy().to_uppercase()).unwrap_or_else(|| "code".into())
    })
}

/// Simulates every run and point of `config`, reporting each finished
/// point to `progress`.
pub fn sweep_with<F: FnMut(&PointResult)>(config: &SimConfig, mut progress: F) -> Result<Vec<PointResult>> {
    config.validate()?;
    let opts = config.point_options();
    let mut rows = Vec::new();
    for run in config.all_runs() {
        let code = load_code(&run.code)?;
        let label = run_label(&run);
        for &p in &run.p_values {
            let row = run_point(&label, &code, p, &opts)?;
            progress(&row);
            rows.push(row);
        }
    }
    Ok(rows)
}

/// Simulates `config` and writes the CSV to `out`.
pub fn sweep(config: &SimConfig, out: impl AsRef<Path>) -> Result<Vec<PointResult>> {
    let out = out.as_ref();
    // fail on an unwritable path before spending time simulating
    let file =
        std::fs::File::create(out).map_err(|source| SimError::Output { path: out.display().to_string(), source })?;
    let rows = sweep_with(config, |_| {})?;
    let mut w = io::BufWriter::new(file);
    write_csv(&rows, &mut w)
        .and_then(|_| w.flush())
        .map_err(|source| SimError::Output { path: out.display().to_string(), source })?;
    Ok(rows)
}

pub fn csv_line(r: &PointResult) -> String {
    format!(
        "{},{},{},{},{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.3}",
        r.code,
        r.p,
        r.trials,
        r.fc_failures,
        r.msc_failures,
        r.undetected,
        r.fer_fc,
        r.fer_fc_ci.0,
        r.fer_fc_ci.1,
        r.fer_msc,
        r.fer_msc_ci.0,
        r.fer_msc_ci.1,
        r.skr_fc,
        r.skr_msc,
        r.mean_iters
    )
}

pub fn write_csv<W: Write>(rows: &[PointResult], w: &mut W) -> io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(w, "{}", csv_line(r))?;
    }
    Ok(())
}

/// Fixed-width SKR table: code, p, FC SKR, MSC SKR.
pub fn skr_summary(rows: &[PointResult]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:<6} {:>8} {:>10} {:>10}", "code", "p", "FC SKR", "MSC SKR");
    for r in rows {
        let _ = writeln!(s, "{:<6} {:>8} {:>10.4} {:>10.4}", r.code, r.p, r.skr_fc, r.skr_msc);
    }
    s
}
