mod common;

use bmqc::blockmds::BlockSubset;
use bmqc::channel::{gen_key, posteriors, transmit, ChannelModel, PosteriorMatrix};
use bmqc::decoder::{block_reliability, decode_bp, msc_select, DecodeOutput, DecoderConfig, Reconciler};
use bmqc::{shipped_code, FieldSpec, PowerMatrix, QcCode, ScalingMatrix, SparseParityCheck};
use common::{brute_posteriors, random_priors, random_tree_check, slow_mul};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn full_run(iterations: usize) -> DecoderConfig {
    DecoderConfig { max_iterations: iterations, epsilon: 1e-12, early_stop: false }
}

#[test]
fn beliefs_are_exact_on_trees() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let mut checked = 0;
    for &(q, max_n) in &[(2u32, 12usize), (4, 6), (8, 4)] {
        let field = FieldSpec::with_order(q).unwrap();
        for _ in 0..40 {
            let n = rng.gen_range(2..=max_n);
            let h = random_tree_check(&mut rng, &field, n);
            let x: Vec<u8> = (0..n).map(|_| rng.gen_range(0..q) as u8).collect();
            let s = h.syndrome(&x).unwrap();
            let priors = random_priors(&mut rng, n, q as usize);
            let out = decode_bp(&h, &s, &priors, full_run(2 * n + 2)).unwrap();
            let exact = brute_posteriors(&h, &s, &priors);
            for (i, row) in exact.iter().enumerate() {
                for (a, &v) in row.iter().enumerate() {
                    let got = out.beliefs.row(i)[a];
                    assert!((got - v).abs() < 1e-6, "q={q} n={n} var {i} symbol {a}: {got} vs {v}");
                }
            }
            checked += 1;
        }
    }
    assert_eq!(checked, 120);
}

#[test]
fn beliefs_stay_stochastic_every_iteration() {
    let code = shipped_code("C1").unwrap();
    let h = code.expand();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let model = ChannelModel::new(8, 0.33).unwrap();
    let x = gen_key(code.n(), 8, &mut rng);
    let y = transmit(&x, &model, &mut rng);
    let priors = posteriors(&y, &model).unwrap();
    let s = h.syndrome(&x).unwrap();
    for k in 1..=12 {
        let out = decode_bp(&h, &s, &priors, full_run(k)).unwrap();
        assert!(out.beliefs.max_row_deviation().unwrap() < 1e-9, "iteration {k}");
    }
}

fn small_code() -> QcCode {
    let f = FieldSpec::gf8();
    let p = PowerMatrix::new(5, &[vec![0, 0, 0, 0], vec![0, 1, 2, 4]]).unwrap();
    let s = ScalingMatrix::new(&f, &[vec![1, 1, 1, 1], vec![1, 2, 3, 4]]).unwrap();
    QcCode::new(f, p, s).unwrap()
}

fn max_diff(a: &PosteriorMatrix, b: &PosteriorMatrix, map: impl Fn(usize, usize) -> usize) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..a.len() {
        for s in 0..a.q() {
            worst = worst.max((a.row(i)[s] - b.row(i)[map(i, s)]).abs());
        }
    }
    worst
}

#[test]
fn decoder_commutes_with_frobenius() {
    let code = small_code();
    let field = code.field().clone();
    let h = code.expand();
    let frob = |a: u8| slow_mul(&field, a, a);
    let rows: Vec<Vec<(u32, u8)>> =
        (0..h.n_rows()).map(|r| h.row(r).iter().map(|&(c, v)| (c, frob(v))).collect()).collect();
    let h2 = SparseParityCheck::from_rows(field.clone(), h.n_cols(), rows).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..20 {
        let priors = random_priors(&mut rng, code.n(), 8);
        let s: Vec<u8> = (0..h.n_rows()).map(|_| rng.gen_range(0..8)).collect();
        let mut flat = vec![0.0; priors.as_flat().len()];
        for i in 0..priors.len() {
            for a in 0..8u8 {
                flat[i * 8 + frob(a) as usize] = priors.row(i)[a as usize];
            }
        }
        let priors2 = PosteriorMatrix::from_flat(8, flat);
        let s2: Vec<u8> = s.iter().map(|&v| frob(v)).collect();
        let a = decode_bp(&h, &s, &priors, full_run(15)).unwrap();
        let b = decode_bp(&h2, &s2, &priors2, full_run(15)).unwrap();
        assert!(max_diff(&a.beliefs, &b.beliefs, |_, s| frob(s as u8) as usize) < 1e-9);
    }
}

#[test]
fn decoder_commutes_with_translation() {
    let code = small_code();
    let h = code.expand();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..20 {
        let priors = random_priors(&mut rng, code.n(), 8);
        let s: Vec<u8> = (0..h.n_rows()).map(|_| rng.gen_range(0..8)).collect();
        let c: Vec<u8> = (0..code.n()).map(|_| rng.gen_range(0..8)).collect();
        let mut flat = vec![0.0; priors.as_flat().len()];
        for i in 0..priors.len() {
            for a in 0..8u8 {
                flat[i * 8 + (a ^ c[i]) as usize] = priors.row(i)[a as usize];
            }
        }
        let priors2 = PosteriorMatrix::from_flat(8, flat);
        let hc = h.syndrome(&c).unwrap();
        let s2: Vec<u8> = s.iter().zip(&hc).map(|(a, b)| a ^ b).collect();
        let a = decode_bp(&h, &s, &priors, full_run(15)).unwrap();
        let b = decode_bp(&h, &s2, &priors2, full_run(15)).unwrap();
        assert!(max_diff(&a.beliefs, &b.beliefs, |i, s| s ^ c[i] as usize) < 1e-9);
    }
}

#[test]
fn msc_selection_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..300 {
        let gamma = rng.gen_range(1..=3);
        let kappa = rng.gen_range(gamma + 1..=5);
        let z = rng.gen_range(1..=4);
        // coarse values so ties happen
        let rows: Vec<Vec<f64>> = (0..kappa * z)
            .map(|_| {
                let top = rng.gen_range(1..=4) as f64 / 8.0 + 0.5;
                vec![top, 1.0 - top]
            })
            .collect();
        let beliefs = PosteriorMatrix::from_rows(&rows);
        let rel: Vec<f64> = (0..kappa).map(|b| block_reliability(&beliefs, b, z)).collect();
        let winners: Vec<BlockSubset> = BlockSubset::all(gamma, kappa)
            .filter(|b| {
                let excluded = b.blocks();
                let kept: Vec<usize> = (0..kappa).filter(|j| !excluded.contains(j)).collect();
                excluded.iter().all(|&e| kept.iter().all(|&k| (rel[e], e) < (rel[k], k)))
            })
            .collect();
        assert_eq!(winners.len(), 1);
        let (kept, chosen) = msc_select(&beliefs, gamma, kappa, z);
        assert_eq!(chosen, winners[0]);
        let expect: Vec<usize> = (0..kappa).filter(|j| !chosen.contains(*j)).flat_map(|j| j * z..(j + 1) * z).collect();
        assert_eq!(kept, expect);
    }
}

#[test]
fn dominance_holds_trial_by_trial() {
    let code = shipped_code("C1").unwrap();
    let cfg = DecoderConfig { max_iterations: 10, ..DecoderConfig::default() };
    let mut rec = Reconciler::new(&code, cfg).unwrap();
    let model = ChannelModel::new(8, 0.27).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let (mut fc, mut msc) = (0, 0);
    for _ in 0..60 {
        let t = rec.run_trial(&model, &mut rng, true);
        assert!(t.is_consistent());
        let per = t.per_subset_success.as_ref().unwrap();
        assert_eq!(per.len(), 4);
        if t.fc_success {
            assert!(t.msc_success && per.iter().all(|(_, ok)| *ok));
        }
        fc += usize::from(t.fc_success);
        msc += usize::from(t.msc_success);
    }
    assert!(msc >= fc);
}

/// gamma = 1, kappa = 2, z = 3 code over GF(8).
fn tiny_code() -> QcCode {
    let f = FieldSpec::gf8();
    let p = PowerMatrix::new(3, &[vec![0, 1]]).unwrap();
    let s = ScalingMatrix::new(&f, &[vec![1, 5]]).unwrap();
    QcCode::new(f, p, s).unwrap()
}

#[test]
fn wrong_coset_word_is_an_undetected_error() {
    let code = tiny_code();
    let h = code.expand();
    // smallest nonzero codeword by enumeration
    let c = (1..8usize.pow(6))
        .map(|mut k| {
            (0..6)
                .map(|_| {
                    let v = (k % 8) as u8;
                    k /= 8;
                    v
                })
                .collect::<Vec<u8>>()
        })
        .find(|w| h.syndrome(w).unwrap().iter().all(|&v| v == 0))
        .unwrap();
    let truth = vec![3u8, 1, 4, 1, 5, 2];
    let hard: Vec<u8> = truth.iter().zip(&c).map(|(a, b)| a ^ b).collect();
    assert_eq!(h.syndrome(&hard).unwrap(), h.syndrome(&truth).unwrap());
    let out = DecodeOutput { beliefs: PosteriorMatrix::point_masses(8, &hard), hard, converged: true, iterations: 1 };
    let rec = Reconciler::new(&code, DecoderConfig::default()).unwrap();
    let t = rec.evaluate(&truth, &out, false);
    assert!(!t.fc_success && t.undetected);
}

#[test]
fn errors_inside_excluded_block_keep_msc_success() {
    let code = tiny_code();
    let truth = vec![3u8, 1, 4, 1, 5, 2];
    let mut hard = truth.clone();
    hard[1] ^= 6;
    // block 0 is the less reliable one
    let rows: Vec<Vec<f64>> = (0..6)
        .map(|i| {
            let mut r = vec![0.0; 8];
            let top = if i < 3 { 0.6 } else { 0.95 };
            r[hard[i] as usize] = top;
            r[(hard[i] as usize + 1) % 8] = 1.0 - top;
            r
        })
        .collect();
    let out = DecodeOutput { beliefs: PosteriorMatrix::from_rows(&rows), hard, converged: false, iterations: 100 };
    let rec = Reconciler::new(&code, DecoderConfig::default()).unwrap();
    let t = rec.evaluate(&truth, &out, true);
    assert!(!t.fc_success && t.msc_success);
    assert_eq!(t.msc_excluded, BlockSubset::from_one_based(&[1], 1, 2).unwrap());
    assert!(t.is_consistent());
}
