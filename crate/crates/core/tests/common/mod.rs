//! Independent reference computations used by the integration tests.
//! Nothing here calls into the library's numerical routines.
#![allow(dead_code)]

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sketchlearn::DenseMatrix;

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

pub fn random_matrix(m: usize, n: usize, seed: u64) -> DenseMatrix {
    let mut r = rng(seed);
    let data = (0..m * n).map(|_| r.gen_range(-1.0..1.0)).collect();
    DenseMatrix::from_vec(m, n, data).unwrap()
}

/// Product of `m x r` and `r x n` random factors.
pub fn random_rank(m: usize, n: usize, r: usize, seed: u64) -> DenseMatrix {
    let a = to_rows(&random_matrix(m, r, seed));
    let b = to_rows(&random_matrix(r, n, seed + 1));
    let out = naive_matmul(&a, &b);
    DenseMatrix::from_rows(&out).unwrap()
}

pub fn to_rows(a: &DenseMatrix) -> Vec<Vec<f64>> {
    (0..a.rows()).map(|i| a.row(i).to_vec()).collect()
}

pub fn naive_matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let (m, k, n) = (a.len(), b.len(), b[0].len());
    let mut c = vec![vec![0.0; n]; m];
    for i in 0..m {
        for j in 0..n {
            let mut s = 0.0;
            for l in 0..k {
                s += a[i][l] * b[l][j];
            }
            c[i][j] = s;
        }
    }
    c
}

pub fn naive_transpose(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    (0..a[0].len()).map(|j| a.iter().map(|r| r[j]).collect()).collect()
}

/// Eigenvalues of a symmetric matrix by cyclic two-sided Jacobi rotations,
/// sorted descending.
pub fn sym_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        let diag: f64 = (0..n).map(|i| a[i][i] * a[i][i]).sum();
        if off <= 1e-30 * diag.max(1e-300) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(|x, y| y.total_cmp(x));
    ev
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
pub fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = a.len();
    for c in 0..n {
        let piv = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        a.swap(c, piv);
        b.swap(c, piv);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for k in c..n {
                a[r][k] -= f * a[c][k];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x
}

/// Least-squares `argmin ‖A x - y‖` through the normal equations
/// (full column rank assumed).
pub fn lstsq_normal(a: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let at = naive_transpose(a);
    let ata = naive_matmul(&at, a);
    let aty: Vec<f64> = at.iter().map(|r| r.iter().zip(y).map(|(p, q)| p * q).sum()).collect();
    solve(ata, aty)
}

pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

pub fn frequencies(counts: &[usize]) -> Vec<f64> {
    let total: usize = counts.iter().sum();
    counts.iter().map(|&c| c as f64 / total as f64).collect()
}

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub fn max_abs_diff(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// MNIST directory from `SKETCHLEARN_DATA_DIR`, else the sandbox default.
pub fn mnist_dir() -> Option<PathBuf> {
    let cand = std::env::var_os("SKETCHLEARN_DATA_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("/root/data/mnist"));
    sketchlearn::datasets::MnistFiles::locate(&cand).ok().map(|_| cand)
}

/// Largest relative gap between analytic and central-difference gradients
/// of the squared loss on a random instance with every pre-activation at
/// least `1e-3` away from the ReLU kink.
pub fn gradient_check(seed: u64) -> f64 {
    use sketchlearn::elm::{gradients, squared_loss, Dataset, ElmModel, FeatureMap};

    let mut r = rng(seed);
    let (d, m, l, n) = (3 + (seed % 3) as usize, 4 + (seed % 4) as usize, 3, 6);
    let (fm, ds, w) = loop {
        let a = random_matrix(m, d, r.gen());
        let b: Vec<f64> = (0..m).map(|_| r.gen_range(-0.5..0.5)).collect();
        let x = DenseMatrix::from_vec(n, d, (0..n * d).map(|_| r.gen_range(0.0..1.0)).collect()).unwrap();
        let labels: Vec<usize> = (0..n).map(|_| r.gen_range(0..l)).collect();
        let fm = FeatureMap::new(&a, b.clone()).unwrap();
        let margin_ok = (0..n).all(|s| {
            (0..m).all(|i| {
                let z: f64 = b[i] + (0..d).map(|k| a.get(i, k) * x.get(s, k)).sum::<f64>();
                z.abs() >= 1e-3
            })
        });
        if margin_ok {
            break (fm, Dataset::new(x, labels, l).unwrap(), random_matrix(m, l, r.gen()));
        }
    };
    let model = ElmModel::new(fm.clone(), w.clone()).unwrap();
    let g = gradients(&model, &ds).unwrap();
    let ga = g.a();

    let h = 1e-6;
    let loss_with = |a: &DenseMatrix, b: &[f64]| {
        let m2 = ElmModel::new(FeatureMap::new(a, b.to_vec()).unwrap(), w.clone()).unwrap();
        squared_loss(&m2, &ds).unwrap()
    };
    let rel = |an: f64, fd: f64| (an - fd).abs() / an.abs().max(fd.abs()).max(1e-10);
    let a0 = fm.weights();
    let b0 = fm.biases().to_vec();
    let mut worst: f64 = 0.0;
    for i in 0..m {
        for k in 0..d {
            let mut ap = to_rows(&a0);
            let mut am = ap.clone();
            ap[i][k] += h;
            am[i][k] -= h;
            let fd = (loss_with(&DenseMatrix::from_rows(&ap).unwrap(), &b0)
                - loss_with(&DenseMatrix::from_rows(&am).unwrap(), &b0))
                / (2.0 * h);
            worst = worst.max(rel(ga.get(i, k), fd));
        }
        let (mut bp, mut bm) = (b0.clone(), b0.clone());
        bp[i] += h;
        bm[i] -= h;
        let fd = (loss_with(&a0, &bp) - loss_with(&a0, &bm)) / (2.0 * h);
        worst = worst.max(rel(g.b[i], fd));
    }
    worst
}
