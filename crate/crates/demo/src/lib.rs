//! WebAssembly bindings for the browser demo in `www/`. Every export takes
//! plain values and returns a JSON string.

use bmqc::blockmds::{construct_block_mds, theorem2_check, theorem3_applicable};
use bmqc::codefile::CodeFile;
use bmqc::decoder::DecoderConfig;
use bmqc::qcldpc::girth;
use bmqc::sim::{run_point, PointOptions};
use bmqc::{parse_code, shipped_code, FieldSpec, QcCode};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

fn code_summary(code: &QcCode) -> Value {
    let (a, b) = code.design_rate_fraction();
    json!({
        "gamma": code.gamma(),
        "kappa": code.kappa(),
        "z": code.z(),
        "q": code.field().q(),
        "n": code.n(),
        "m": code.m(),
        "rate": format!("{a}/{b}"),
        "girth": girth(code.power()).to_string(),
    })
}

/// Code file text of a shipped code ("C1", "C2" or "C3").
pub fn shipped(label: &str) -> Result<String, String> {
    shipped_code(label).map(|c| CodeFile::from_code(&c).to_json()).ok_or_else(|| format!("unknown code {label}"))
}

/// Girth and Block-MDS certificate of a code file.
pub fn certify_json(code_text: &str) -> Result<String, String> {
    let code = parse_code(code_text).map_err(|e| e.to_string())?;
    let cert = theorem2_check(&code).map_err(|e| e.to_string())?;
    let cert_value: Value = serde_json::from_str(&cert.to_json()).map_err(|e| e.to_string())?;
    Ok(json!({ "code": code_summary(&code), "certificate": cert_value }).to_string())
}

/// Searches and certifies a new code; returns the code file and summary.
pub fn construct_json(gamma: usize, kappa: usize, z: usize, girth_target: usize, seed: u64) -> Result<String, String> {
    let field = FieldSpec::gf8();
    let report = theorem3_applicable(8, z as u64, gamma, kappa);
    if !report.applicable {
        return Err(report.reasons.join("; "));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let code =
        construct_block_mds(&field, gamma, kappa, z, girth_target, &mut rng, 200_000).map_err(|e| e.to_string())?;
    Ok(json!({ "code": code_summary(&code), "file": CodeFile::from_code(&code).to_json() }).to_string())
}

/// FC and MSC failure rates and key rates at one transition probability.
pub fn simulate_json(code_text: &str, p: f64, trials: u64, seed: u64, max_iterations: usize) -> Result<String, String> {
    let code = parse_code(code_text).map_err(|e| e.to_string())?;
    let opts = PointOptions {
        trials,
        seed,
        decoder: DecoderConfig { max_iterations, ..DecoderConfig::default() },
        workers: 0,
        record_subsets: false,
    };
    let r = run_point("code", &code, p, &opts).map_err(|e| e.to_string())?;
    Ok(json!({
        "p": r.p,
        "trials": r.trials,
        "fer_fc": r.fer_fc,
        "fer_fc_ci": [r.fer_fc_ci.0, r.fer_fc_ci.1],
        "fer_msc": r.fer_msc,
        "fer_msc_ci": [r.fer_msc_ci.0, r.fer_msc_ci.1],
        "skr_fc": r.skr_fc,
        "skr_msc": r.skr_msc,
        "mean_iters": r.mean_iters,
    })
    .to_string())
}

#[wasm_bindgen(js_name = shippedCode)]
pub fn shipped_code_js(label: &str) -> Result<String, JsError> {
    shipped(label).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn certify(code_text: &str) -> Result<String, JsError> {
    certify_json(code_text).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn construct(gamma: usize, kappa: usize, z: usize, girth_target: usize, seed: u32) -> Result<String, JsError> {
    construct_json(gamma, kappa, z, girth_target, seed as u64).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = simulatePoint)]
pub fn simulate_point(code_text: &str, p: f64, trials: u32, seed: u32, max_iterations: u32) -> Result<String, JsError> {
    simulate_json(code_text, p, trials as u64, seed as u64, max_iterations as usize).map_err(|e| JsError::new(&e))
}
