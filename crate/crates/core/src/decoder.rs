//! Non-binary sum-product decoding of a syndrome with side information, and
//! the full-codeword / subset-codeword success logic built on its beliefs.
//!
//! Bob knows `y` and the syndrome `z = H x` and wants `x`. Each check row
//! `i` constrains `sum_j h_ij x_j = z_i`. Messages are probability vectors
//! over GF(2^m). Because field addition is XOR, the distribution of a sum of
//! independent symbols is an XOR-convolution, which the Walsh-Hadamard
//! transform turns into a pointwise product.

use rand::Rng;
use thiserror::Error;

use crate::blockmds::{complement_set, BlockSubset};
use crate::channel::{self, ChannelModel, PosteriorMatrix};
use crate::gf::{FieldElem, FieldSpec};
use crate::qcldpc::{QcCode, SparseParityCheck};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DecoderError {
    #[error("{what}: got {got}, expected {expected}")]
    DimensionMismatch { what: &'static str, got: usize, expected: usize },
    #[error("prior row {row} is not a probability vector")]
    NonStochasticPrior { row: usize },
    #[error("invalid decoder configuration: {0}")]
    BadConfig(String),
}

pub type Result<T> = std::result::Result<T, DecoderError>;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecoderConfig {
    pub max_iterations: usize,
    /// Floor applied to variable-to-check message entries.
    pub epsilon: f64,
    /// Stop as soon as the hard decision reproduces the syndrome.
    pub early_stop: bool,
}

impl Default for DecoderConfig {
    fn default() -> Self {
        DecoderConfig { max_iterations: 100, epsilon: 1e-12, early_stop: true }
    }
}

impl DecoderConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(DecoderError::BadConfig("max_iterations must be at least 1".into()));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1e-3) {
            return Err(DecoderError::BadConfig(format!("epsilon {} not in (0, 1e-3)", self.epsilon)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecodeOutput {
    pub beliefs: PosteriorMatrix,
    pub hard: Vec<FieldElem>,
    /// The hard decision satisfies the syndrome.
    pub converged: bool,
    pub iterations: usize,
}

/// In-place unnormalized Walsh-Hadamard transform; `v.len()` is a power of two.
fn hadamard(v: &mut [f64]) {
    let n = v.len();
    let mut h = 1;
    while h < n {
        for start in (0..n).step_by(2 * h) {
            for k in start..start + h {
                let (a, b) = (v[k], v[k + h]);
                v[k] = a + b;
                v[k + h] = a - b;
            }
        }
        h *= 2;
    }
}

fn normalize(v: &mut [f64]) {
    let s: f64 = v.iter().sum();
    if s > 0.0 && s.is_finite() {
        v.iter_mut().for_each(|x| *x /= s);
    } else {
        let u = 1.0 / v.len() as f64;
        v.iter_mut().for_each(|x| *x = u);
    }
}

/// Flooding sum-product decoder bound to one parity-check matrix. Message
/// buffers are reused across calls to [`BpDecoder::decode`].
pub struct BpDecoder {
    h: SparseParityCheck,
    cfg: DecoderConfig,
    q: usize,
    check_ptr: Vec<usize>,
    edge_var: Vec<usize>,
    edge_coef: Vec<FieldElem>,
    var_edges: Vec<Vec<usize>>,
    /// `mul[c * q + a] = c * a`.
    mul: Vec<u8>,
    v2c: Vec<f64>,
    c2v: Vec<f64>,
    spectra: Vec<f64>,
    suffix: Vec<f64>,
    prefix: Vec<f64>,
}

impl BpDecoder {
    pub fn new(h: &SparseParityCheck, cfg: DecoderConfig) -> Result<Self> {
        cfg.validate()?;
        let field: &FieldSpec = h.field();
        let q = field.q() as usize;
        let mut check_ptr = Vec::with_capacity(h.n_rows() + 1);
        let mut edge_var = Vec::with_capacity(h.nnz());
        let mut edge_coef = Vec::with_capacity(h.nnz());
        let mut var_edges = vec![Vec::new(); h.n_cols()];
        check_ptr.push(0);
        for row in h.rows() {
            for &(c, v) in row {
                var_edges[c as usize].push(edge_var.len());
                edge_var.push(c as usize);
                edge_coef.push(v);
            }
            check_ptr.push(edge_var.len());
        }
        let mut mul = vec![0u8; q * q];
        for c in 0..q {
            for a in 0..q {
                mul[c * q + a] = field.mul(c as u8, a as u8);
            }
        }
        let max_deg = h.rows().iter().map(Vec::len).max().unwrap_or(0);
        let e = edge_var.len();
        Ok(BpDecoder {
            h: h.clone(),
            cfg,
            q,
            check_ptr,
            edge_var,
            edge_coef,
            var_edges,
            mul,
            v2c: vec![0.0; e * q],
            c2v: vec![0.0; e * q],
            spectra: vec![0.0; max_deg * q],
            suffix: vec![0.0; max_deg * q],
            prefix: vec![0.0; q],
        })
    }

    pub fn config(&self) -> &DecoderConfig {
        &self.cfg
    }

    pub fn parity_check(&self) -> &SparseParityCheck {
        &self.h
    }

    fn check_inputs(&self, syndrome: &[FieldElem], priors: &PosteriorMatrix) -> Result<()> {
        if syndrome.len() != self.h.n_rows() {
            return Err(DecoderError::DimensionMismatch {
                what: "syndrome length",
                got: syndrome.len(),
                expected: self.h.n_rows(),
            });
        }
        if let Some(&s) = syndrome.iter().find(|&&s| s as usize >= self.q) {
            return Err(DecoderError::DimensionMismatch { what: "syndrome symbol", got: s as usize, expected: self.q });
        }
        if priors.len() != self.h.n_cols() {
            return Err(DecoderError::DimensionMismatch {
                what: "prior rows",
                got: priors.len(),
                expected: self.h.n_cols(),
            });
        }
        if priors.q() != self.q {
            return Err(DecoderError::DimensionMismatch { what: "alphabet size", got: priors.q(), expected: self.q });
        }
        for (row, r) in priors.rows().enumerate() {
            let ok = r.iter().all(|v| v.is_finite() && *v >= 0.0) && (r.iter().sum::<f64>() - 1.0).abs() <= 1e-9;
            if !ok {
                return Err(DecoderError::NonStochasticPrior { row });
            }
        }
        Ok(())
    }

    pub fn decode(&mut self, syndrome: &[FieldElem], priors: &PosteriorMatrix) -> Result<DecodeOutput> {
        self.check_inputs(syndrome, priors)?;
        let q = self.q;
        let hard = priors.hard_decision();
        if self.cfg.early_stop && self.h.satisfies(&hard, syndrome) {
            return Ok(DecodeOutput { beliefs: priors.clone(), hard, converged: true, iterations: 0 });
        }
        for (e, &v) in self.edge_var.iter().enumerate() {
            self.v2c[e * q..(e + 1) * q].copy_from_slice(priors.row(v));
        }
        let mut beliefs = priors.clone();
        let mut hard = hard;
        let mut converged = false;
        let mut iterations = 0;
        for it in 1..=self.cfg.max_iterations {
            iterations = it;
            self.update_checks(syndrome);
            self.update_variables(priors, &mut beliefs);
            hard = beliefs.hard_decision();
            if self.h.satisfies(&hard, syndrome) {
                converged = true;
                if self.cfg.early_stop {
                    break;
                }
            } else {
                converged = false;
            }
        }
        Ok(DecodeOutput { beliefs, hard, converged, iterations })
    }

    fn update_checks(&mut self, syndrome: &[FieldElem]) {
        let q = self.q;
        let inv_q = 1.0 / q as f64;
        for (i, &zi) in syndrome.iter().enumerate() {
            let (start, end) = (self.check_ptr[i], self.check_ptr[i + 1]);
            let d = end - start;
            if d == 0 {
                continue;
            }
            // spectrum of h * x for every incoming edge
            for k in 0..d {
                let e = start + k;
                let coef = self.edge_coef[e] as usize;
                let spec = &mut self.spectra[k * q..(k + 1) * q];
                let msg = &self.v2c[e * q..(e + 1) * q];
                for a in 0..q {
                    spec[self.mul[coef * q + a] as usize] = msg[a];
                }
                hadamard(spec);
            }
            // outgoing message k uses the product of all other spectra
            let suffix = &mut self.suffix;
            suffix[(d - 1) * q..d * q].iter_mut().for_each(|v| *v = 1.0);
            for k in (0..d.saturating_sub(1)).rev() {
                for a in 0..q {
                    suffix[k * q + a] = suffix[(k + 1) * q + a] * self.spectra[(k + 1) * q + a];
                }
            }
            self.prefix.iter_mut().for_each(|v| *v = 1.0);
            let mut buf = [0.0f64; 256];
            let buf = &mut buf[..q];
            for k in 0..d {
                let e = start + k;
                let coef = self.edge_coef[e] as usize;
                for a in 0..q {
                    buf[a] = self.prefix[a] * self.suffix[k * q + a];
                }
                hadamard(buf);
                // Pr(h_k x_k = c) = Pr(sum of the others = c + z_i)
                let out = &mut self.c2v[e * q..(e + 1) * q];
                for a in 0..q {
                    let c = self.mul[coef * q + a] ^ zi;
                    out[a] = (buf[c as usize] * inv_q).max(0.0);
                }
                normalize(out);
                for a in 0..q {
                    self.prefix[a] *= self.spectra[k * q + a];
                }
            }
        }
    }

    fn update_variables(&mut self, priors: &PosteriorMatrix, beliefs: &mut PosteriorMatrix) {
        let q = self.q;
        let eps = self.cfg.epsilon;
        for (j, edges) in self.var_edges.iter().enumerate() {
            let prior = priors.row(j);
            for &e in edges {
                let out = &mut self.v2c[e * q..(e + 1) * q];
                out.copy_from_slice(prior);
                for &f in edges {
                    if f != e {
                        let msg = &self.c2v[f * q..(f + 1) * q];
                        out.iter_mut().zip(msg).for_each(|(o, m)| *o *= m);
                    }
                }
                normalize(out);
                out.iter_mut().for_each(|v| *v = v.max(eps));
                normalize(out);
            }
            let b = beliefs.row_mut(j);
            b.copy_from_slice(prior);
            for &f in edges {
                let msg = &self.c2v[f * q..(f + 1) * q];
                b.iter_mut().zip(msg).for_each(|(o, m)| *o *= m);
            }
            normalize(b);
        }
    }
}

/// One-shot decode with a fresh decoder.
pub fn decode_bp(
    h: &SparseParityCheck,
    syndrome: &[FieldElem],
    priors: &PosteriorMatrix,
    cfg: DecoderConfig,
) -> Result<DecodeOutput> {
    BpDecoder::new(h, cfg)?.decode(syndrome, priors)
}

/// Full-codeword success: the estimate equals the truth everywhere.
pub fn fc_evaluate(hard: &[FieldElem], truth: &[FieldElem]) -> bool {
    hard == truth
}

/// Subset success: the estimate equals the truth on every kept index.
pub fn sc_evaluate(hard: &[FieldElem], truth: &[FieldElem], kept: &[usize]) -> bool {
    kept.iter().all(|&i| hard[i] == truth[i])
}

/// Weakest symbol confidence in a block: the minimum over the block's
/// symbols of their largest belief entry. `block` is 0-based.
pub fn block_reliability(beliefs: &PosteriorMatrix, block: usize, z: usize) -> f64 {
    (block * z..(block + 1) * z)
        .map(|i| beliefs.row(i).iter().copied().fold(f64::NEG_INFINITY, f64::max))
        .fold(f64::INFINITY, f64::min)
}

/// Excludes the `gamma` least reliable blocks (lower index first on ties)
/// and returns the kept column indices with the excluded subset.
pub fn msc_select(beliefs: &PosteriorMatrix, gamma: usize, kappa: usize, z: usize) -> (Vec<usize>, BlockSubset) {
    let mut scored: Vec<(f64, usize)> = (0..kappa).map(|b| (block_reliability(beliefs, b, z), b)).collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut excluded: Vec<usize> = scored[..gamma].iter().map(|s| s.1).collect();
    excluded.sort_unstable();
    let subset = BlockSubset::new(excluded, gamma, kappa).expect("gamma distinct blocks below kappa");
    (complement_set(&subset, kappa, z), subset)
}

/// What happened in one reconciliation attempt.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialOutcome {
    pub converged: bool,
    pub iterations: usize,
    pub fc_success: bool,
    /// Hard decision met the syndrome but differs from Alice's key.
    pub undetected: bool,
    pub msc_excluded: BlockSubset,
    pub msc_success: bool,
    /// Success of the subset decoder for every excluded block set.
    pub per_subset_success: Option<Vec<(BlockSubset, bool)>>,
}

impl TrialOutcome {
    /// `fc_success` implies `msc_success` and every per-subset success.
    pub fn is_consistent(&self) -> bool {
        !self.fc_success
            || (self.msc_success && self.per_subset_success.as_ref().map_or(true, |v| v.iter().all(|(_, ok)| *ok)))
    }
}

/// A code with its expanded matrix and a reusable decoder.
pub struct Reconciler {
    code: QcCode,
    decoder: BpDecoder,
}

impl Reconciler {
    pub fn new(code: &QcCode, cfg: DecoderConfig) -> Result<Self> {
        let h = code.expand();
        Ok(Reconciler { code: code.clone(), decoder: BpDecoder::new(&h, cfg)? })
    }

    pub fn code(&self) -> &QcCode {
        &self.code
    }

    /// Key generation, channel, syndrome at Alice, decoding at Bob, then the
    /// full and subset success tests.
    pub fn run_trial<R: Rng + ?Sized>(
        &mut self,
        model: &ChannelModel,
        rng: &mut R,
        record_subsets: bool,
    ) -> TrialOutcome {
        let n = self.code.n();
        let x = channel::gen_key(n, model.q(), rng);
        let y = channel::transmit(&x, model, rng);
        let syn = self.decoder.parity_check().syndrome(&x).expect("key symbols are in range");
        let priors = channel::posteriors(&y, model).expect("received symbols are in range");
        let out = self.decoder.decode(&syn, &priors).expect("decoder inputs are consistent");
        self.evaluate(&x, &out, record_subsets)
    }

    pub fn evaluate(&self, truth: &[FieldElem], out: &DecodeOutput, record_subsets: bool) -> TrialOutcome {
        let (gamma, kappa, z) = (self.code.gamma(), self.code.kappa(), self.code.z());
        let fc_success = fc_evaluate(&out.hard, truth);
        let (kept, excluded) = msc_select(&out.beliefs, gamma, kappa, z);
        let msc_success = sc_evaluate(&out.hard, truth, &kept);
        let per_subset_success = record_subsets.then(|| {
            BlockSubset::all(gamma, kappa)
                .map(|b| {
                    let ok = sc_evaluate(&out.hard, truth, &complement_set(&b, kappa, z));
                    (b, ok)
                })
                .collect()
        });
        TrialOutcome {
            converged: out.converged,
            iterations: out.iterations,
            fc_success,
            undetected: out.converged && !fc_success,
            msc_excluded: excluded,
            msc_success,
            per_subset_success,
        }
    }
}

/// One trial with a freshly built decoder.
pub fn run_trial<R: Rng + ?Sized>(
    code: &QcCode,
    model: &ChannelModel,
    cfg: DecoderConfig,
    rng: &mut R,
    record_subsets: bool,
) -> Result<TrialOutcome> {
    Ok(Reconciler::new(code, cfg)?.run_trial(model, rng, record_subsets))
}
