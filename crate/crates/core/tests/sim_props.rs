use std::path::PathBuf;

use bmqc::decoder::DecoderConfig;
use bmqc::shipped_code;
use bmqc::sim::{run_point, skr, sweep, write_csv, PointOptions, SimConfig, CSV_HEADER};

fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data")
}

fn opts(trials: u64, seed: u64, workers: usize) -> PointOptions {
    PointOptions {
        trials,
        seed,
        decoder: DecoderConfig { max_iterations: 10, ..DecoderConfig::default() },
        workers,
        record_subsets: false,
    }
}

#[test]
fn noiseless_point_never_fails() {
    let c2 = shipped_code("C2").unwrap();
    let r = run_point("C2", &c2, 0.0, &opts(20, 1, 0)).unwrap();
    assert_eq!((r.fc_failures, r.msc_failures, r.undetected), (0, 0, 0));
    assert_eq!(r.mean_iters, 0.0);
    assert!((r.skr_fc - 1.2).abs() < 1e-12);
}

#[test]
fn results_do_not_depend_on_worker_count() {
    let c1 = shipped_code("C1").unwrap();
    let base = run_point("C1", &c1, 0.27, &opts(48, 5, 1)).unwrap();
    for workers in [0, 2, 3] {
        assert_eq!(run_point("C1", &c1, 0.27, &opts(48, 5, workers)).unwrap(), base);
    }
    assert!(base.msc_failures <= base.fc_failures);
    assert_eq!(base.dominance_violations, 0);
}

#[test]
fn subset_failures_bound_msc() {
    let c1 = shipped_code("C1").unwrap();
    let mut o = opts(40, 3, 0);
    o.record_subsets = true;
    let r = run_point("C1", &c1, 0.27, &o).unwrap();
    let per = r.subset_failures.as_ref().unwrap();
    assert_eq!(per.len(), 4);
    // every fixed subset fails no more often than the full word
    assert!(per.iter().all(|(_, f)| *f <= r.fc_failures));
    // the best subset in hindsight is at least as good as the chosen one
    assert!(r.trials - r.any_subset_successes.unwrap() <= r.msc_failures);
}

#[test]
fn skr_is_linear_and_bounded() {
    for label in ["C1", "C2", "C3"] {
        let code = shipped_code(label).unwrap();
        let bound = (1.0 - code.gamma() as f64 / code.kappa() as f64) * 3.0;
        let s1 = skr(1.0, &code).unwrap();
        assert!((s1 - bound).abs() < 1e-12);
        for k in 0..=10 {
            let p = k as f64 / 10.0;
            assert!((skr(p, &code).unwrap() - p * s1).abs() < 1e-12);
        }
    }
}

#[test]
fn sweep_writes_csv_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let codes = data_dir().join("codes");
    let cfg_text = format!(
        r#"{{"code": "{}", "label": "C1", "p_values": [0.29, 0.26, 0.23], "trials": 120, "seed": 4, "max_iterations": 10}}"#,
        codes.join("c1.json").display()
    );
    let cfg_path = dir.path().join("run.cfg");
    std::fs::write(&cfg_path, cfg_text).unwrap();
    let cfg = SimConfig::load(&cfg_path).unwrap();
    let out_a = dir.path().join("a.csv");
    let out_b = dir.path().join("b.csv");
    let rows = sweep(&cfg, &out_a).unwrap();
    let mut cfg_b = cfg.clone();
    cfg_b.workers = 2;
    sweep(&cfg_b, &out_b).unwrap();
    let a = std::fs::read(&out_a).unwrap();
    assert_eq!(a, std::fs::read(&out_b).unwrap());
    let text = String::from_utf8(a).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(CSV_HEADER));
    assert_eq!(lines.count(), 3);
    // lower p never fails noticeably more often
    for w in rows.windows(2) {
        assert!(w[1].fer_fc <= w[0].fer_fc_ci.1, "{} vs {}", w[1].fer_fc, w[0].fer_fc);
    }
    let mut buf = Vec::new();
    write_csv(&rows, &mut buf).unwrap();
    assert_eq!(buf, text.as_bytes());
}

#[test]
fn shipped_configs_resolve() {
    for name in ["fig1_c1.cfg", "fig1_c2.cfg", "fig1_c3.cfg", "table2.cfg"] {
        let cfg = SimConfig::load(data_dir().join("configs").join(name)).unwrap();
        for run in cfg.all_runs() {
            assert!(run.code.exists(), "{}", run.code.display());
            assert!(!run.p_values.is_empty());
        }
        assert_eq!(cfg.max_iterations, 10);
    }
    let t2 = SimConfig::load(data_dir().join("configs/table2.cfg")).unwrap();
    let points: Vec<(Option<String>, Vec<f64>)> = t2.all_runs().into_iter().map(|r| (r.label, r.p_values)).collect();
    assert_eq!(
        points,
        vec![(Some("C1".into()), vec![0.275]), (Some("C2".into()), vec![0.2]), (Some("C3".into()), vec![0.28]),]
    );
}

#[test]
fn bad_inputs_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.cfg");
    std::fs::write(&path, r#"{"code": "missing.json", "p_values": [0.1], "trials": 5}"#).unwrap();
    let cfg = SimConfig::load(&path).unwrap();
    assert!(sweep(&cfg, dir.path().join("o.csv")).is_err());
    assert!(SimConfig::load(dir.path().join("nope.cfg")).is_err());

    let good = SimConfig::load(data_dir().join("configs/fig1_c1.cfg")).unwrap();
    assert!(sweep(&good, dir.path().join("no/such/dir/o.csv")).is_err());
    assert!(SimConfig::parse(r#"{"code": "c.json", "p_values": []}"#).is_err());
}
