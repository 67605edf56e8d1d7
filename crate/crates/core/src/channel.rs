//! Raw-key generation and the q-ary symmetric channel between the two
//! parties' keys.

use rand::Rng;
use thiserror::Error;

use crate::gf::FieldElem;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("transition probability {0} is outside [0, 1)")]
    BadProbability(f64),
    #[error("alphabet size {0} is outside 2..=256")]
    BadAlphabet(u32),
    #[error("symbol {value} at position {pos} is outside the alphabet")]
    SymbolOutOfRange { pos: usize, value: FieldElem },
}

/// q-ary symmetric channel: a symbol survives with probability `1 - p` and
/// otherwise becomes one of the other `q - 1` symbols uniformly.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelModel {
    q: u32,
    p: f64,
}

impl ChannelModel {
    pub fn new(q: u32, p: f64) -> Result<Self, ChannelError> {
        if !(2..=256).contains(&q) {
            return Err(ChannelError::BadAlphabet(q));
        }
        if !(0.0..1.0).contains(&p) {
            return Err(ChannelError::BadProbability(p));
        }
        Ok(ChannelModel { q, p })
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Probability of each specific wrong symbol, `p / (q - 1)`.
    pub fn off_diagonal(&self) -> f64 {
        self.p / (self.q - 1) as f64
    }
}

/// Alice's and Bob's raw keys.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KeyPair {
    pub x: Vec<FieldElem>,
    pub y: Vec<FieldElem>,
}

impl KeyPair {
    pub fn generate<R: Rng + ?Sized>(n: usize, model: &ChannelModel, rng: &mut R) -> Self {
        let x = gen_key(n, model.q, rng);
        let y = transmit(&x, model, rng);
        KeyPair { x, y }
    }

    pub fn mismatches(&self) -> usize {
        self.x.iter().zip(&self.y).filter(|(a, b)| a != b).count()
    }
}

/// `n` independent uniform symbols from `0..q`.
pub fn gen_key<R: Rng + ?Sized>(n: usize, q: u32, rng: &mut R) -> Vec<FieldElem> {
    (0..n).map(|_| rng.gen_range(0..q) as FieldElem).collect()
}

/// Passes `x` through the channel.
pub fn transmit<R: Rng + ?Sized>(x: &[FieldElem], model: &ChannelModel, rng: &mut R) -> Vec<FieldElem> {
    let q = model.q;
    x.iter()
        .map(|&s| {
            if model.p > 0.0 && rng.gen_bool(model.p) {
                let offset = rng.gen_range(1..q);
                ((s as u32 + offset) % q) as FieldElem
            } else {
                s
            }
        })
        .collect()
}

/// Per-symbol probability vectors, stored row-major as `n x q`.
#[derive(Clone, Debug, PartialEq)]
pub struct PosteriorMatrix {
    q: usize,
    data: Vec<f64>,
}

impl PosteriorMatrix {
    pub fn from_flat(q: usize, data: Vec<f64>) -> Self {
        assert!(q > 0 && data.len() % q == 0, "data is not a whole number of rows");
        PosteriorMatrix { q, data }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let q = rows.first().map_or(1, Vec::len);
        assert!(rows.iter().all(|r| r.len() == q), "ragged posterior rows");
        PosteriorMatrix { q, data: rows.concat() }
    }

    /// Point masses on the given symbols.
    pub fn point_masses(q: usize, symbols: &[FieldElem]) -> Self {
        let mut data = vec![0.0; q * symbols.len()];
        for (i, &s) in symbols.iter().enumerate() {
            data[i * q + s as usize] = 1.0;
        }
        PosteriorMatrix { q, data }
    }

    pub fn uniform(q: usize, n: usize) -> Self {
        PosteriorMatrix { q, data: vec![1.0 / q as f64; q * n] }
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.q
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.q..(i + 1) * self.q]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.q..(i + 1) * self.q]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.q)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    /// Index of the largest entry per row; the lowest index wins ties.
    pub fn hard_decision(&self) -> Vec<FieldElem> {
        self.rows()
            .map(|r| {
                let mut best = 0;
                for (a, &v) in r.iter().enumerate().skip(1) {
                    if v > r[best] {
                        best = a;
                    }
                }
                best as FieldElem
            })
            .collect()
    }

    /// Largest deviation of a row sum from one, or `None` if any entry is
    /// negative or not finite.
    pub fn max_row_deviation(&self) -> Option<f64> {
        let mut worst = 0.0f64;
        for r in self.rows() {
            if r.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return None;
            }
            worst = worst.max((r.iter().sum::<f64>() - 1.0).abs());
        }
        Some(worst)
    }
}

/// Decoder prior: `1 - p` on the received symbol and `p / (q - 1)` on each
/// of the others.
pub fn posteriors(y: &[FieldElem], model: &ChannelModel) -> Result<PosteriorMatrix, ChannelError> {
    let q = model.q as usize;
    let off = model.off_diagonal();
    let mut data = vec![off; q * y.len()];
    for (i, &s) in y.iter().enumerate() {
        if s as usize >= q {
            return Err(ChannelError::SymbolOutOfRange { pos: i, value: s });
        }
        data[i * q + s as usize] = 1.0 - model.p;
    }
    Ok(PosteriorMatrix { q, data })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Upper 0.1% point of the chi-square distribution with 7 degrees of
    /// freedom.
    const CHI2_7_999: f64 = 24.322;

    fn chi_square(counts: &[usize]) -> f64 {
        let total: usize = counts.iter().sum();
        let expected = total as f64 / counts.len() as f64;
        counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum()
    }

    #[test]
    fn model_validation() {
        assert!(ChannelModel::new(8, 1.0).is_err());
        assert!(ChannelModel::new(8, -0.1).is_err());
        assert!(ChannelModel::new(1, 0.1).is_err());
        assert!(ChannelModel::new(8, 0.0).is_ok());
    }

    #[test]
    fn binary_keys_are_balanced() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = gen_key(100_000, 2, &mut rng);
        let mean = x.iter().map(|&v| v as f64).sum::<f64>() / x.len() as f64;
        assert!((mean - 0.5).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn keys_are_reproducible() {
        let a = gen_key(64, 8, &mut ChaCha8Rng::seed_from_u64(11));
        let b = gen_key(64, 8, &mut ChaCha8Rng::seed_from_u64(11));
        assert_eq!(a, b);
    }

    #[test]
    fn octal_keys_pass_chi_square() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut counts = [0usize; 8];
        for s in gen_key(100_000, 8, &mut rng) {
            counts[s as usize] += 1;
        }
        assert!(chi_square(&counts) < CHI2_7_999);
    }

    #[test]
    fn noiseless_channel_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = gen_key(1000, 8, &mut rng);
        let m = ChannelModel::new(8, 0.0).unwrap();
        assert_eq!(transmit(&x, &m, &mut rng), x);
    }

    #[test]
    fn mismatch_rate_and_error_symbols() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let m = ChannelModel::new(8, 0.275).unwrap();
        let keys = KeyPair::generate(1_000_000, &m, &mut rng);
        let rate = keys.mismatches() as f64 / 1e6;
        assert!((rate - 0.275).abs() < 0.002, "rate {rate}");
        // conditioned on an error, the 7 wrong symbols are uniform
        let mut counts = [0usize; 7];
        for (&a, &b) in keys.x.iter().zip(&keys.y) {
            if a != b {
                counts[((b as usize + 8 - a as usize) % 8) - 1] += 1;
            }
        }
        // 6 degrees of freedom, 0.1% point
        assert!(chi_square(&counts) < 22.458);
    }

    #[test]
    fn posterior_rows() {
        let m = ChannelModel::new(8, 0.275).unwrap();
        let post = posteriors(&[3, 0], &m).unwrap();
        let row = post.row(0);
        assert!((row[3] - 0.725).abs() < 1e-15);
        assert!((row[0] - 0.275 / 7.0).abs() < 1e-15);
        assert!((row[0] - 0.039_285_714_285_714_28).abs() < 1e-15);
        assert!(post.max_row_deviation().unwrap() < 1e-12);

        let m0 = ChannelModel::new(8, 0.0).unwrap();
        assert_eq!(posteriors(&[5], &m0).unwrap(), PosteriorMatrix::point_masses(8, &[5]));

        let mu = ChannelModel::new(8, 7.0 / 8.0).unwrap();
        let u = posteriors(&[2], &mu).unwrap();
        assert!(u.row(0).iter().all(|&v| (v - 0.125).abs() < 1e-15));

        assert!(posteriors(&[8], &m).is_err());
    }

    #[test]
    fn posteriors_commute_with_relabeling() {
        let m = ChannelModel::new(8, 0.3).unwrap();
        let perm = [3u8, 7, 0, 5, 1, 6, 2, 4];
        let y = [0u8, 1, 2, 3, 4, 5, 6, 7];
        let a = posteriors(&y, &m).unwrap();
        let py: Vec<u8> = y.iter().map(|&s| perm[s as usize]).collect();
        let b = posteriors(&py, &m).unwrap();
        for i in 0..y.len() {
            for s in 0..8 {
                assert_eq!(a.row(i)[s], b.row(i)[perm[s] as usize]);
            }
        }
    }

    #[test]
    fn true_key_is_more_likely_than_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let m = ChannelModel::new(8, 0.25).unwrap();
        let keys = KeyPair::generate(10_000, &m, &mut rng);
        let post = posteriors(&keys.y, &m).unwrap();
        let other = gen_key(10_000, 8, &mut rng);
        let ll = |v: &[u8]| -> f64 { v.iter().enumerate().map(|(i, &s)| post.row(i)[s as usize].ln()).sum() };
        assert!(ll(&keys.x) > ll(&other));
    }
}
