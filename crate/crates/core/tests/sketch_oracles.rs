mod common;

use common::*;
use proptest::prelude::*;
use sketchlearn::datasets::synth_lowrank;
use sketchlearn::linalg::{svd_dense, truncate};
use sketchlearn::rng::stream;
use sketchlearn::sketch::{build_w, draw_cols, draw_samples, sketch, sketch_rows, SampleDraw};
use sketchlearn::{modfkv, DenseMatrix, Error, SegTreeMatrix, SketchConfig, Strategy};

fn tree(x: &DenseMatrix) -> SegTreeMatrix {
    SegTreeMatrix::build(x).unwrap()
}

fn rel_err(approx: &DenseMatrix, x: &DenseMatrix) -> f64 {
    approx.sub(x).unwrap().frobenius_norm() / x.frobenius_norm()
}

#[test]
fn uniform_probabilities() {
    let x = random_matrix(10, 20, 1);
    let d = draw_samples(&x, &SketchConfig::new(3, 7, Strategy::Uniform, 0)).unwrap();
    assert!(d.row_prob.iter().all(|&p| p == 0.1));
    assert!(d.col_prob.iter().all(|&p| p == 0.05));
}

#[test]
fn w_matches_scalar_formula() {
    let x = random_matrix(8, 8, 2);
    let t = tree(&x);
    let d = draw_samples(&t, &SketchConfig::new(2, 5, Strategy::Norm, 3)).unwrap();
    let w = build_w(&t, &d).unwrap();
    let fro: f64 = x.as_slice().iter().map(|v| v * v).sum();
    let p = 5.0;
    for a in 0..5 {
        let i = d.row_idx[a];
        let ri: f64 = x.row(i).iter().map(|v| v * v).sum();
        let f = ri / fro;
        assert_eq!(d.row_prob[a], f);
        for b in 0..5 {
            let j = d.col_idx[b];
            let g: f64 = d
                .row_idx
                .iter()
                .map(|&k| x.get(k, j).powi(2) / x.row(k).iter().map(|v| v * v).sum::<f64>())
                .sum::<f64>()
                / p;
            let want = x.get(i, j) / (p * (f * g).sqrt());
            assert!((w.get(a, b) - want).abs() <= 1e-12 * want.abs().max(1.0));
        }
    }
}

#[test]
fn zero_probability_rejected() {
    let x = DenseMatrix::identity(2);
    let d = SampleDraw {
        row_idx: vec![0],
        row_prob: vec![0.0],
        col_idx: vec![0],
        col_prob: vec![1.0],
    };
    assert!(matches!(build_w(&x, &d), Err(Error::ZeroProbability)));
}

#[test]
fn sketch_is_unbiased() {
    // positive entries keep every entry of XᵀX away from zero, so the
    // entrywise relative error is meaningful
    let x = DenseMatrix::from_vec(12, 18, random_matrix(12, 18, 5).as_slice().iter().map(|v| v.abs()).collect()).unwrap();
    let t = tree(&x);
    let xtx = x.t_matmul(&x).unwrap();
    let mut acc = vec![0.0; 18 * 18];
    let draws = 2000;
    for seed in 0..draws {
        let d = draw_samples(&t, &SketchConfig::new(1, 6, Strategy::Norm, seed)).unwrap();
        let s = sketch_rows(&t, &d).unwrap();
        for (a, b) in acc.iter_mut().zip(s.t_matmul(&s).unwrap().as_slice()) {
            *a += b;
        }
    }
    let worst = acc
        .iter()
        .zip(xtx.as_slice())
        .map(|(a, e)| (a / draws as f64 - e).abs() / e.abs())
        .fold(0.0, f64::max);
    assert!(worst <= 0.05, "{worst}");
}

#[test]
fn column_mixture_law() {
    let x = random_matrix(16, 16, 6);
    let t = tree(&x);
    let mut r = stream(11, 0);
    let rows: Vec<usize> = (0..8).map(|_| t.sample_row(&mut r).unwrap()).collect();
    let cols = draw_cols(&t, Strategy::Norm, &rows, 100_000, &mut r).unwrap();
    let mut counts = vec![0usize; 16];
    for j in cols {
        counts[j] += 1;
    }
    let law: Vec<f64> = (0..16)
        .map(|j| {
            rows.iter()
                .map(|&i| x.get(i, j).powi(2) / x.row(i).iter().map(|v| v * v).sum::<f64>())
                .sum::<f64>()
                / rows.len() as f64
        })
        .collect();
    assert!(total_variation(&frequencies(&counts), &law) <= 0.02);
}

#[test]
fn rank_one_closed_form() {
    let u: Vec<f64> = {
        let v = random_matrix(1, 6, 7).into_vec();
        let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        v.iter().map(|a| a / n).collect()
    };
    let v: Vec<f64> = {
        let w = random_matrix(1, 4, 8).into_vec();
        let n = w.iter().map(|a| a * a).sum::<f64>().sqrt();
        w.iter().map(|a| a / n).collect()
    };
    let rows: Vec<Vec<f64>> = u.iter().map(|ui| v.iter().map(|vj| 5.0 * ui * vj).collect()).collect();
    let x = DenseMatrix::from_rows(&rows).unwrap();
    let t = tree(&x);
    for p in [1, 3, 10] {
        let f = modfkv(&t, &SketchConfig::new(1, p, Strategy::Norm, p as u64)).unwrap();
        assert!((f.sigma()[0] - 5.0).abs() < 1e-6, "{}", f.sigma()[0]);
        let sgn_v = f.v().get(0, 0).signum() * v[0].signum();
        let sgn_u = f.u().get(0, 0).signum() * u[0].signum();
        for j in 0..4 {
            assert!((f.v().get(j, 0) - sgn_v * v[j]).abs() < 1e-6);
        }
        for i in 0..6 {
            assert!((f.u().get(i, 0) - sgn_u * u[i]).abs() < 1e-6);
        }
    }
}

#[test]
fn rank_three_recovery_median() {
    let x = random_rank(40, 60, 3, 9);
    let t = tree(&x);
    let errs: Vec<f64> = (0..20)
        .map(|s| rel_err(&modfkv(&t, &SketchConfig::new(3, 30, Strategy::Norm, s)).unwrap().to_dense(), &x))
        .collect();
    assert!(median(errs) <= 0.05);
}

#[test]
fn error_shrinks_with_samples() {
    let mut r = stream(1, 6);
    let x = synth_lowrank(80, 120, 5, 0.05, &mut r).unwrap();
    let best = truncate(&svd_dense(&x).unwrap(), 5).unwrap().to_dense();
    let t = tree(&x);
    let med: Vec<f64> = [10, 20, 40]
        .iter()
        .map(|&p| {
            median(
                (0..20)
                    .map(|s| rel_err(&modfkv(&t, &SketchConfig::new(5, p, Strategy::Norm, s)).unwrap().to_dense(), &best))
                    .collect(),
            )
        })
        .collect();
    assert!(med[0] >= med[1] && med[1] >= med[2], "{med:?}");
}

#[test]
fn lifted_vectors_near_unit_without_orthonormalization() {
    let mut r = stream(2, 6);
    let x = synth_lowrank(100, 80, 4, 0.0, &mut r).unwrap();
    let t = tree(&x);
    let mut devs = Vec::new();
    for s in 0..20 {
        let mut cfg = SketchConfig::new(4, 40, Strategy::Norm, s);
        cfg.orthonormalize = false;
        let f = modfkv(&t, &cfg).unwrap();
        for k in 0..4 {
            let n: f64 = (0..80).map(|j| f.v().get(j, k).powi(2)).sum::<f64>().sqrt();
            devs.push((n - 1.0).abs());
        }
    }
    assert!(median(devs) <= 0.15);
}

#[test]
fn constant_matrix_strategies_share_laws() {
    let x = DenseMatrix::from_vec(6, 9, (0..54).map(|i| if i % 2 == 0 { 2.0 } else { -2.0 }).collect()).unwrap();
    let t = tree(&x);
    let d = draw_samples(&t, &SketchConfig::new(2, 5, Strategy::Norm, 0)).unwrap();
    assert!(d.row_prob.iter().all(|&p| (p - 1.0 / 6.0).abs() < 1e-15));
    assert!(d.col_prob.iter().all(|&p| (p - 1.0 / 9.0).abs() < 1e-15));
}

#[test]
fn seed_gives_identical_output() {
    let x = random_matrix(20, 30, 12);
    let t = tree(&x);
    let cfg = SketchConfig::new(4, 12, Strategy::Norm, 99);
    let a = sketch(&t, &cfg).unwrap();
    let b = sketch(&t, &cfg).unwrap();
    assert_eq!(a.draw, b.draw);
    assert_eq!(a.factors, b.factors);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn draws_are_valid(seed in 0u64..10_000, p in 1usize..20, uniform in any::<bool>()) {
        let x = random_matrix(11, 13, seed);
        let t = tree(&x);
        let strategy = if uniform { Strategy::Uniform } else { Strategy::Norm };
        let d = draw_samples(&t, &SketchConfig::new(1, p, strategy, seed)).unwrap();
        prop_assert_eq!(d.len(), p);
        prop_assert!(d.row_idx.iter().all(|&i| i < 11));
        prop_assert!(d.col_idx.iter().all(|&j| j < 13));
        prop_assert!(d.row_prob.iter().chain(&d.col_prob).all(|&q| q > 0.0 && q <= 1.0));
    }

    #[test]
    fn exact_rank_inputs_are_recovered(seed in 0u64..1000) {
        let x = random_rank(15, 12, 2, seed);
        let t = tree(&x);
        let f = modfkv(&t, &SketchConfig::new(2, 12, Strategy::Norm, seed)).unwrap();
        prop_assert!(rel_err(&f.to_dense(), &x) < 1e-6);
    }
}
