//! Block-MDS certification and construction.
//!
//! A QC-LDPC code is Block-MDS when, for every choice of `gamma` block
//! columns, the `gamma*z x gamma*z` submatrix of H they select is full rank.
//! Those submatrices are block matrices over the commutative ring of z x z
//! circulants, so each is nonsingular iff the circulant obtained as its
//! ring determinant is nonsingular, iff the associated polynomial of that
//! circulant is coprime to x^z - 1.
//!
//! [`theorem2_check`] evaluates that test in the common case where the
//! Leibniz terms of the ring determinant land on distinct powers of x.
//! [`exact_check`] is the rank-based ground truth.

use std::fmt;

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::gf::{self, FieldSpec, Poly};
use crate::linalg::rank_fq;
use crate::qcldpc::{self, has_zero_sum_walk, PowerMatrix, QcCode, QcError, ScalingMatrix};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BlockMdsError {
    #[error("block subset {blocks:?} is not a sorted set of {gamma} distinct blocks below {kappa}")]
    BadSubset { blocks: Vec<usize>, gamma: usize, kappa: usize },
    #[error("permutation sums for blocks {0} collide mod z")]
    OverlappingSums(BlockSubset),
    #[error("gamma = {0} is too large for permutation enumeration (max 5)")]
    GammaTooLarge(usize),
    #[error("Vandermonde scaling needs 1 <= gamma <= kappa <= q - 1, got gamma={gamma}, kappa={kappa}, q={q}")]
    VandermondeShape { gamma: usize, kappa: usize, q: u32 },
    #[error("target girth {0} is not one of 6, 8, 10, 12")]
    BadTargetGirth(usize),
    #[error("target girth {girth} is below 2*gamma + 2 = {needed}")]
    GirthTooSmall { girth: usize, needed: usize },
    #[error("construction preconditions fail: {}", .0.join("; "))]
    NotApplicable(Vec<String>),
    #[error("no power matrix found within {evaluations} candidate evaluations")]
    SearchFailed { evaluations: u64 },
    #[error("constructed code failed its Block-MDS certificate")]
    CertificateFailed,
    #[error(transparent)]
    Code(#[from] QcError),
}

pub type Result<T> = std::result::Result<T, BlockMdsError>;

/// A sorted set of `gamma` block-column indices (0-based; displayed 1-based).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BlockSubset(Vec<usize>);

impl BlockSubset {
    pub fn new(blocks: Vec<usize>, gamma: usize, kappa: usize) -> Result<Self> {
        let ok = blocks.len() == gamma
            && blocks.windows(2).all(|w| w[0] < w[1])
            && blocks.last().map_or(true, |&b| b < kappa);
        if ok {
            Ok(BlockSubset(blocks))
        } else {
            Err(BlockMdsError::BadSubset { blocks, gamma, kappa })
        }
    }

    /// From 1-based block labels, as they are usually written.
    pub fn from_one_based(labels: &[usize], gamma: usize, kappa: usize) -> Result<Self> {
        if labels.contains(&0) {
            return Err(BlockMdsError::BadSubset { blocks: labels.to_vec(), gamma, kappa });
        }
        Self::new(labels.iter().map(|b| b - 1).collect(), gamma, kappa)
    }

    /// Every gamma-subset of `0..kappa` in lexicographic order.
    pub fn all(gamma: usize, kappa: usize) -> impl Iterator<Item = BlockSubset> {
        (0..kappa).combinations(gamma).map(BlockSubset)
    }

    pub fn blocks(&self) -> &[usize] {
        &self.0
    }

    pub fn contains(&self, block: usize) -> bool {
        self.0.binary_search(&block).is_ok()
    }
}

impl fmt::Display for BlockSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.0.iter().map(|b| (b + 1).to_string()).join(","))
    }
}

impl Serialize for BlockSubset {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let labels: Vec<usize> = self.0.iter().map(|b| b + 1).collect();
        labels.serialize(s)
    }
}

/// Column indices covered by the blocks of `subset`, ascending.
pub fn sample_set(subset: &BlockSubset, z: usize) -> Vec<usize> {
    subset.0.iter().flat_map(|&b| b * z..(b + 1) * z).collect()
}

/// Columns outside the blocks of `subset`, ascending.
pub fn complement_set(subset: &BlockSubset, kappa: usize, z: usize) -> Vec<usize> {
    (0..kappa).filter(|b| !subset.contains(*b)).flat_map(|b| b * z..(b + 1) * z).collect()
}

/// Exponent `sum_i p[sigma(i)][tau(i)] mod z` and coefficient
/// `prod_i s[sigma(i)][tau(i)]` of every Leibniz term. Signs vanish in
/// characteristic 2.
fn leibniz_terms(code: &QcCode, tau: &BlockSubset) -> Vec<(usize, u8)> {
    let gamma = code.gamma();
    let field = code.field();
    let (p, s) = (code.power(), code.scaling());
    (0..gamma)
        .permutations(gamma)
        .map(|sigma| {
            let mut exp = 0usize;
            let mut coeff = 1u8;
            for (i, &row) in sigma.iter().enumerate() {
                let col = tau.0[i];
                exp += p.get(row, col) as usize;
                coeff = field.mul(coeff, s.get(row, col));
            }
            (exp % code.z(), coeff)
        })
        .collect()
}

fn sums_distinct(terms: &[(usize, u8)]) -> bool {
    terms.iter().map(|t| t.0).all_unique()
}

/// Associated polynomial of the ring determinant of the blocks in `tau`,
/// assuming all Leibniz terms land on distinct exponents.
pub fn f_tau(code: &QcCode, tau: &BlockSubset) -> Result<Poly> {
    BlockSubset::new(tau.0.clone(), code.gamma(), code.kappa())?;
    let terms = leibniz_terms(code, tau);
    if !sums_distinct(&terms) {
        return Err(BlockMdsError::OverlappingSums(tau.clone()));
    }
    let mut coeffs = vec![0u8; code.z()];
    for (e, c) in terms {
        coeffs[e] = c;
    }
    Ok(Poly::new(coeffs))
}

/// Per-subset outcome of the sufficient-condition test.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TauCertificate {
    pub tau: BlockSubset,
    pub distinct_sums: bool,
    #[serde(skip)]
    pub poly: Option<Poly>,
    pub degree: Option<usize>,
    pub weight: Option<usize>,
    pub gcd_one: bool,
}

impl TauCertificate {
    pub fn passed(&self) -> bool {
        self.distinct_sums && self.gcd_one
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BlockMdsCertificate {
    pub gamma: usize,
    pub kappa: usize,
    pub z: usize,
    pub subsets: Vec<TauCertificate>,
    pub verdict: bool,
}

impl BlockMdsCertificate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }
}

impl fmt::Display for BlockMdsCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "subsets certified: {}", self.subsets.len())?;
        for t in &self.subsets {
            let deg = t.degree.map_or("-".to_string(), |d| d.to_string());
            writeln!(
                f,
                "  tau={:<12} distinct_sums={:<5} deg f={:<4} gcd(f, x^z-1)=1: {}",
                t.tau.to_string(),
                t.distinct_sums,
                deg,
                t.gcd_one
            )?;
        }
        write!(f, "Block-MDS: {}", if self.verdict { "yes" } else { "no" })
    }
}

/// Checks the distinct-exponent and coprimality conditions for every
/// gamma-subset of block columns. A true verdict proves the code Block-MDS.
pub fn theorem2_check(code: &QcCode) -> Result<BlockMdsCertificate> {
    let (gamma, kappa, z) = (code.gamma(), code.kappa(), code.z());
    if gamma > 5 {
        return Err(BlockMdsError::GammaTooLarge(gamma));
    }
    let field = code.field();
    let modulus = Poly::x_pow_minus_one(z);
    let subsets: Vec<TauCertificate> = BlockSubset::all(gamma, kappa)
        .map(|tau| {
            let distinct = sums_distinct(&leibniz_terms(code, &tau));
            let poly = if distinct { f_tau(code, &tau).ok() } else { None };
            let gcd_one = match &poly {
                Some(p) if !p.is_zero() => gf::poly_gcd(field, p, &modulus).map(|g| g.is_one()).unwrap_or(false),
                _ => false,
            };
            TauCertificate {
                degree: poly.as_ref().and_then(Poly::degree),
                weight: poly.as_ref().map(Poly::weight),
                tau,
                distinct_sums: distinct,
                poly,
                gcd_one,
            }
        })
        .collect();
    let verdict = subsets.iter().all(TauCertificate::passed);
    Ok(BlockMdsCertificate { gamma, kappa, z, subsets, verdict })
}

/// Ground truth: every block-column submatrix has rank gamma*z. Cost is
/// cubic in gamma*z per subset.
pub fn exact_check(code: &QcCode) -> bool {
    exact_check_detail(code).iter().all(|(_, ok)| *ok)
}

/// Rank verdict per gamma-subset.
pub fn exact_check_detail(code: &QcCode) -> Vec<(BlockSubset, bool)> {
    let h = code.expand();
    let full = code.gamma() * code.z();
    BlockSubset::all(code.gamma(), code.kappa())
        .map(|b| {
            let sub = qcldpc::column_submatrix(&h, &sample_set(&b, code.z())).expect("sample set is within range");
            let ok = rank_fq(code.field(), &sub) == full;
            (b, ok)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Theorem3Report {
    pub applicable: bool,
    pub reasons: Vec<String>,
}

/// Conditions under which a Vandermonde scaling makes any girth-(2*gamma+2)
/// power matrix Block-MDS: z an odd prime, 1 + x + ... + x^(z-1)
/// irreducible over GF(q) (equivalently ord_z(q) = z - 1), gamma! < z and
/// kappa <= q - 1.
pub fn theorem3_applicable(q: u64, z: u64, gamma: usize, kappa: usize) -> Theorem3Report {
    let mut reasons = Vec::new();
    let prime = gf::is_prime(z);
    if !prime {
        reasons.push(format!("z = {z} is not prime"));
    } else if z == 2 {
        reasons.push("z = 2 is not an odd prime".to_string());
    }
    if prime && z > 2 {
        match gf::mult_order(q, z) {
            Ok(t) if t == z - 1 => {}
            Ok(t) => reasons.push(format!(
                "order of {q} mod {z} is {t}, not {}; 1 + x + ... + x^{} is reducible over GF({q})",
                z - 1,
                z - 1
            )),
            Err(e) => reasons.push(e.to_string()),
        }
    }
    let fact = (1..=gamma as u64).try_fold(1u64, |acc, k| acc.checked_mul(k));
    if fact.map_or(true, |f| f >= z) {
        reasons.push(match fact {
            Some(f) => format!("gamma! = {f} is not below z = {z}"),
            None => format!("gamma! overflows and is not below z = {z}"),
        });
    }
    if kappa as u64 > q.saturating_sub(1) {
        reasons.push(format!("kappa = {kappa} exceeds q - 1 = {}", q.saturating_sub(1)));
    }
    if gamma == 0 || gamma > kappa {
        reasons.push(format!("need 1 <= gamma <= kappa, got gamma = {gamma}, kappa = {kappa}"));
    }
    Theorem3Report { applicable: reasons.is_empty(), reasons }
}

/// `s[i][j] = a_j^i` with generators `a_j` encoded as the integers 1..=kappa.
pub fn vandermonde_scaling(field: &FieldSpec, gamma: usize, kappa: usize) -> Result<ScalingMatrix> {
    if gamma == 0 || gamma > kappa || kappa as u64 > field.q() as u64 - 1 {
        return Err(BlockMdsError::VandermondeShape { gamma, kappa, q: field.q() });
    }
    let rows: Vec<Vec<u32>> =
        (0..gamma).map(|i| (1..=kappa).map(|a| field.pow(a as u8, i as u64) as u32).collect()).collect();
    Ok(ScalingMatrix::new(field, &rows)?)
}

/// Random search for a power matrix with zero first row and column whose
/// lifted graph has girth at least `target_girth`.
///
/// Interior entries are filled column by column, each trying candidate
/// shifts in random order and keeping the first that creates no short
/// cycle with the entries already placed. A dead end restarts the fill.
/// Every candidate test counts against `budget`.
pub fn search_power_matrix<R: Rng + ?Sized>(
    gamma: usize,
    kappa: usize,
    z: usize,
    target_girth: usize,
    rng: &mut R,
    budget: u64,
) -> Result<PowerMatrix> {
    if ![6, 8, 10, 12].contains(&target_girth) {
        return Err(BlockMdsError::BadTargetGirth(target_girth));
    }
    if z < 2 {
        return Err(QcError::LiftingTooSmall(z).into());
    }
    if gamma == 0 || gamma > kappa {
        return Err(QcError::BadShape { gamma, kappa }.into());
    }
    let g = target_girth / 2 - 1;
    let mut evaluations = 0u64;
    let mut candidates: Vec<u32> = (1..z as u32).collect();
    loop {
        let mut grid: Vec<Option<u32>> =
            (0..gamma * kappa).map(|idx| if idx / kappa == 0 || idx % kappa == 0 { Some(0) } else { None }).collect();
        let mut stuck = false;
        'cells: for j in 1..kappa {
            for i in 1..gamma {
                candidates.shuffle(rng);
                let mut placed = false;
                for &v in &candidates {
                    if evaluations >= budget {
                        return Err(BlockMdsError::SearchFailed { evaluations });
                    }
                    evaluations += 1;
                    grid[i * kappa + j] = Some(v);
                    let entry = |a: usize, b: usize| grid[a * kappa + b];
                    if (2..=g).all(|m| !has_zero_sum_walk(gamma, kappa, z, m, &entry)) {
                        placed = true;
                        break;
                    }
                }
                if !placed {
                    stuck = true;
                    break 'cells;
                }
            }
        }
        if !stuck {
            let rows: Vec<Vec<u32>> =
                grid.chunks(kappa).map(|r| r.iter().map(|v| v.expect("all cells filled")).collect()).collect();
            return Ok(PowerMatrix::new(z, &rows)?);
        }
        if evaluations >= budget {
            return Err(BlockMdsError::SearchFailed { evaluations });
        }
    }
}

/// Default candidate budget for [`search_power_matrix`].
pub const DEFAULT_SEARCH_BUDGET: u64 = 1_000_000;

/// Searches a high-girth power matrix, pairs it with a Vandermonde scaling
/// and certifies the result.
pub fn construct_block_mds<R: Rng + ?Sized>(
    field: &FieldSpec,
    gamma: usize,
    kappa: usize,
    z: usize,
    target_girth: usize,
    rng: &mut R,
    budget: u64,
) -> Result<QcCode> {
    let report = theorem3_applicable(field.q() as u64, z as u64, gamma, kappa);
    if !report.applicable {
        return Err(BlockMdsError::NotApplicable(report.reasons));
    }
    if ![6, 8, 10, 12].contains(&target_girth) {
        return Err(BlockMdsError::BadTargetGirth(target_girth));
    }
    if target_girth < 2 * gamma + 2 {
        return Err(BlockMdsError::GirthTooSmall { girth: target_girth, needed: 2 * gamma + 2 });
    }
    let power = search_power_matrix(gamma, kappa, z, target_girth, rng, budget)?;
    let scaling = vandermonde_scaling(field, gamma, kappa)?;
    let code = QcCode::new(field.clone(), power, scaling)?;
    if !theorem2_check(&code)?.verdict {
        return Err(BlockMdsError::CertificateFailed);
    }
    Ok(code)
}
