//! Simulates one shipped code at one transition probability.
//!
//! cargo run --release -p bmqc --example point -- C1 0.275 200 [max_iterations]

use std::time::Instant;

use bmqc::shipped_code;
use bmqc::sim::{run_point, PointOptions};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let label = args.first().map_or("C1", String::as_str);
    let p: f64 = args.get(1).map_or(0.275, |s| s.parse().expect("p"));
    let trials: u64 = args.get(2).map_or(200, |s| s.parse().expect("trials"));
    let mut opts = PointOptions { trials, ..PointOptions::default() };
    if let Some(it) = args.get(3) {
        opts.decoder.max_iterations = it.parse().expect("max_iterations");
    }
    let code = shipped_code(label).expect("unknown code label");
    let start = Instant::now();
    let r = run_point(label, &code, p, &opts).expect("simulation");
    println!(
        "{label} p={p} trials={trials} fer_fc={:.4} fer_msc={:.4} skr_fc={:.4} skr_msc={:.4} iters={:.1} ({:.1?})",
        r.fer_fc,
        r.fer_msc,
        r.skr_fc,
        r.skr_msc,
        r.mean_iters,
        start.elapsed()
    );
}
