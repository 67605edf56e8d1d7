//! Independent oracles shared by the integration tests. Field arithmetic
//! here is plain shift-and-add so it does not lean on the library tables.

#![allow(dead_code)]

use std::collections::VecDeque;

use bmqc::channel::PosteriorMatrix;
use bmqc::{FieldSpec, PowerMatrix, QcCode, ScalingMatrix, SparseParityCheck};
use rand::Rng;

/// Carry-less multiply of `a` and `b` reduced by the field's polynomial.
pub fn slow_mul(field: &FieldSpec, a: u8, b: u8) -> u8 {
    let m = field.m();
    let poly = field.reduction_poly();
    let (mut a, mut b, mut r) = (a as u32, b as u32, 0u32);
    while b != 0 {
        if b & 1 == 1 {
            r ^= a;
        }
        b >>= 1;
        a <<= 1;
        if (a >> m) & 1 == 1 {
            a ^= poly;
        }
    }
    r as u8
}

pub fn slow_inv(field: &FieldSpec, a: u8) -> u8 {
    (1..field.q()).map(|b| b as u8).find(|&b| slow_mul(field, a, b) == 1).expect("nonzero element")
}

pub fn random_code<R: Rng>(rng: &mut R, q: u32, gamma: usize, kappa: usize, z: usize) -> QcCode {
    let field = FieldSpec::with_order(q).unwrap();
    let p: Vec<Vec<u32>> = (0..gamma).map(|_| (0..kappa).map(|_| rng.gen_range(0..z as u32)).collect()).collect();
    let s: Vec<Vec<u32>> = (0..gamma).map(|_| (0..kappa).map(|_| rng.gen_range(1..q)).collect()).collect();
    let pm = PowerMatrix::new(z, &p).unwrap();
    let sm = ScalingMatrix::new(&field, &s).unwrap();
    QcCode::new(field, pm, sm).unwrap()
}

/// Length of the shortest cycle of the Tanner graph, by breadth-first
/// search from every node.
pub fn bfs_girth(h: &SparseParityCheck) -> Option<usize> {
    let n = h.n_cols();
    let total = n + h.n_rows();
    let mut adj = vec![Vec::new(); total];
    for (r, c, _) in h.triples() {
        adj[c].push(n + r);
        adj[n + r].push(c);
    }
    let mut best: Option<usize> = None;
    for src in 0..total {
        let mut dist = vec![usize::MAX; total];
        let mut parent = vec![usize::MAX; total];
        dist[src] = 0;
        let mut queue = VecDeque::from([src]);
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    parent[v] = u;
                    queue.push_back(v);
                } else if parent[u] != v {
                    let len = dist[u] + dist[v] + 1;
                    best = Some(best.map_or(len, |b| b.min(len)));
                }
            }
        }
    }
    best
}

/// Element of GF(q)[x] / (x^z - 1) as its `z` coefficients.
pub type RingElem = Vec<u8>;

fn ring_mul(field: &FieldSpec, a: &[u8], b: &[u8]) -> RingElem {
    let z = a.len();
    let mut out = vec![0u8; z];
    for (i, &ai) in a.iter().enumerate().filter(|(_, v)| **v != 0) {
        for (j, &bj) in b.iter().enumerate().filter(|(_, v)| **v != 0) {
            out[(i + j) % z] ^= slow_mul(field, ai, bj);
        }
    }
    out
}

fn ring_det_rec(field: &FieldSpec, m: &[Vec<RingElem>]) -> RingElem {
    if m.len() == 1 {
        return m[0][0].clone();
    }
    let z = m[0][0].len();
    let mut acc = vec![0u8; z];
    for col in 0..m.len() {
        let minor: Vec<Vec<RingElem>> = m[1..]
            .iter()
            .map(|row| row.iter().enumerate().filter(|(c, _)| *c != col).map(|(_, e)| e.clone()).collect())
            .collect();
        // characteristic 2: cofactor signs vanish
        let term = ring_mul(field, &m[0][col], &ring_det_rec(field, &minor));
        for (a, t) in acc.iter_mut().zip(term) {
            *a ^= t;
        }
    }
    acc
}

/// Determinant of the `gamma x gamma` block matrix `s_ij x^(p_ij)` over the
/// circulant ring, for the given block columns, by cofactor expansion.
pub fn ring_det(code: &QcCode, blocks: &[usize]) -> RingElem {
    let z = code.z();
    let m: Vec<Vec<RingElem>> = (0..code.gamma())
        .map(|i| {
            blocks
                .iter()
                .map(|&j| {
                    let mut e = vec![0u8; z];
                    e[code.power().get(i, j) as usize] = code.scaling().get(i, j);
                    e
                })
                .collect()
        })
        .collect();
    ring_det_rec(code.field(), &m)
}

/// Rank over GF(q) of a dense matrix, by elimination with the slow field.
pub fn slow_rank(field: &FieldSpec, mut m: Vec<Vec<u8>>) -> usize {
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..m.len()).find(|&r| m[r][c] != 0) else { continue };
        m.swap(rank, p);
        let inv = slow_inv(field, m[rank][c]);
        let pivot: Vec<u8> = m[rank].iter().map(|&v| slow_mul(field, v, inv)).collect();
        for r in 0..m.len() {
            if r != rank && m[r][c] != 0 {
                let f = m[r][c];
                for (x, &pv) in m[r].iter_mut().zip(&pivot) {
                    *x ^= slow_mul(field, f, pv);
                }
            }
        }
        m[rank] = pivot;
        rank += 1;
    }
    rank
}

/// Whether `a` is invertible in the circulant ring: its multiplication map
/// has full rank.
pub fn ring_is_unit(field: &FieldSpec, a: &[u8]) -> bool {
    let z = a.len();
    let m: Vec<Vec<u8>> = (0..z).map(|k| (0..z).map(|c| a[(c + z - k) % z]).collect()).collect();
    slow_rank(field, m) == z
}

/// Syndrome straight from P and S: row `i*z + r` sums
/// `s_ij * x[j*z + (r - p_ij) mod z]` over block columns.
pub fn syndrome_from_base(code: &QcCode, x: &[u8]) -> Vec<u8> {
    let z = code.z();
    let mut out = vec![0u8; code.m()];
    for i in 0..code.gamma() {
        for r in 0..z {
            let mut acc = 0u8;
            for j in 0..code.kappa() {
                let p = code.power().get(i, j) as usize;
                acc ^= slow_mul(code.field(), code.scaling().get(i, j), x[j * z + (r + z - p) % z]);
            }
            out[i * z + r] = acc;
        }
    }
    out
}

/// A parity-check matrix whose Tanner graph is a forest: every check joins
/// variables from distinct components.
pub fn random_tree_check<R: Rng>(rng: &mut R, field: &FieldSpec, n: usize) -> SparseParityCheck {
    let q = field.q();
    let mut comp: Vec<usize> = (0..n).collect();
    fn find(c: &mut [usize], mut i: usize) -> usize {
        while c[i] != i {
            c[i] = c[c[i]];
            i = c[i];
        }
        i
    }
    let mut rows = Vec::new();
    let n_checks = rng.gen_range(1..=n.max(2) - 1);
    for _ in 0..n_checks {
        let deg = rng.gen_range(1..=3usize.min(n));
        let mut picked: Vec<usize> = Vec::new();
        let mut roots: Vec<usize> = Vec::new();
        for _ in 0..20 {
            if picked.len() == deg {
                break;
            }
            let v = rng.gen_range(0..n);
            let r = find(&mut comp, v);
            if !roots.contains(&r) {
                roots.push(r);
                picked.push(v);
            }
        }
        for &r in &roots[1..] {
            comp[r] = roots[0];
        }
        rows.push(picked.into_iter().map(|v| (v as u32, rng.gen_range(1..q) as u8)).collect());
    }
    SparseParityCheck::from_rows(field.clone(), n, rows).unwrap()
}

pub fn random_priors<R: Rng>(rng: &mut R, n: usize, q: usize) -> PosteriorMatrix {
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let r: Vec<f64> = (0..q).map(|_| rng.gen_range(0.05..1.0)).collect();
            let s: f64 = r.iter().sum();
            r.into_iter().map(|v| v / s).collect()
        })
        .collect();
    PosteriorMatrix::from_rows(&rows)
}

fn slow_syndrome(h: &SparseParityCheck, x: &[u8]) -> Vec<u8> {
    (0..h.n_rows())
        .map(|r| h.row(r).iter().fold(0u8, |acc, &(c, v)| acc ^ slow_mul(h.field(), v, x[c as usize])))
        .collect()
}

/// Exact marginals of `prod_i priors[i][x_i]` restricted to `H x = s`, by
/// enumerating all `q^N` words.
pub fn brute_posteriors(h: &SparseParityCheck, syndrome: &[u8], priors: &PosteriorMatrix) -> Vec<Vec<f64>> {
    let q = priors.q();
    let n = h.n_cols();
    let total = q.pow(n as u32);
    let mut marg = vec![vec![0.0; q]; n];
    let mut x = vec![0u8; n];
    for idx in 0..total {
        let mut k = idx;
        for xi in x.iter_mut() {
            *xi = (k % q) as u8;
            k /= q;
        }
        if slow_syndrome(h, &x) != syndrome {
            continue;
        }
        let w: f64 = x.iter().enumerate().map(|(i, &s)| priors.row(i)[s as usize]).product();
        for (i, &s) in x.iter().enumerate() {
            marg[i][s as usize] += w;
        }
    }
    for row in &mut marg {
        let s: f64 = row.iter().sum();
        row.iter_mut().for_each(|v| *v /= s);
    }
    marg
}
