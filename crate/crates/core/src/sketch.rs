//! Sampled low-rank SVD (modified FKV).
//!
//! Rows are drawn with probability `f_i = |X(i,:)|^2 / |X|_F^2`, columns from
//! the mixture `g_j = (1/P) Σ_p X(i_p,j)^2 / |X(i_p,:)|^2`, the `P x P` matrix
//! `W(p,q) = X(i_p,j_q) / (P sqrt(f_{i_p} g_{j_q}))` is decomposed exactly and
//! its row-side singular vectors are lifted back through the rescaled sampled
//! rows `S(p,:) = X(i_p,:) / sqrt(P f_{i_p})`:
//!
//! ```text
//! v_i = Sᵀ w_i / sigma_i        u_i = X v_i / sigma_i
//! ```
//!
//! The uniform strategy keeps every formula and substitutes `f = 1/m`,
//! `g = 1/n`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, svd_dense, DenseMatrix, LowRankFactors, SvdResult, DEFAULT_RCOND};
use crate::rng::{self, streams};
use crate::segtree::SegTreeMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// Squared-norm importance sampling through the segment tree.
    #[serde(alias = "norm", alias = "normweighted")]
    Norm,
    /// Flat `1/m`, `1/n` laws.
    Uniform,
}

impl Strategy {
    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Norm => "norm",
            Strategy::Uniform => "uniform",
        }
    }
}

impl std::str::FromStr for Strategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "norm" | "normweighted" | "frobenius" => Ok(Strategy::Norm),
            "uniform" => Ok(Strategy::Uniform),
            other => Err(Error::InvalidParameter(format!("unknown strategy {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SketchConfig {
    /// target rank `K`
    pub rank: usize,
    /// sample count `P`
    pub samples: usize,
    pub strategy: Strategy,
    pub seed: u64,
    /// relative floor on the singular values of `W`
    pub rcond: f64,
    /// Gram-Schmidt the lifted right vectors before forming the left ones.
    pub orthonormalize: bool,
}

impl SketchConfig {
    pub fn new(rank: usize, samples: usize, strategy: Strategy, seed: u64) -> Self {
        Self {
            rank,
            samples,
            strategy,
            seed,
            rcond: DEFAULT_RCOND,
            orthonormalize: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rank == 0 || self.samples == 0 || self.rank > self.samples {
            return Err(Error::InvalidParameter(format!(
                "need 1 <= K <= P, got K={} P={}",
                self.rank, self.samples
            )));
        }
        if !(0.0..1.0).contains(&self.rcond) {
            return Err(Error::InvalidParameter(format!("rcond {} outside [0, 1)", self.rcond)));
        }
        Ok(())
    }
}

/// Matrix access needed by the sketch. Norm-weighted sampling additionally
/// needs the segment tree.
pub trait SketchSource {
    fn matrix(&self) -> &DenseMatrix;
    fn norm_tree(&self) -> Option<&SegTreeMatrix>;
}

impl SketchSource for SegTreeMatrix {
    fn matrix(&self) -> &DenseMatrix {
        SegTreeMatrix::matrix(self)
    }
    fn norm_tree(&self) -> Option<&SegTreeMatrix> {
        Some(self)
    }
}

impl SketchSource for DenseMatrix {
    fn matrix(&self) -> &DenseMatrix {
        self
    }
    fn norm_tree(&self) -> Option<&SegTreeMatrix> {
        None
    }
}

/// Sampled indices and the probabilities they were drawn with.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleDraw {
    pub row_idx: Vec<usize>,
    pub row_prob: Vec<f64>,
    pub col_idx: Vec<usize>,
    pub col_prob: Vec<f64>,
}

impl SampleDraw {
    pub fn len(&self) -> usize {
        self.row_idx.len()
    }

    pub fn is_empty(&self) -> bool {
        self.row_idx.is_empty()
    }
}

fn tree_for<S: SketchSource + ?Sized>(src: &S, strategy: Strategy) -> Result<Option<&SegTreeMatrix>> {
    match strategy {
        Strategy::Norm => src.norm_tree().map(Some).ok_or(Error::MissingSegmentTree),
        Strategy::Uniform => Ok(None),
    }
}

/// Draws `count` row indices with their probabilities.
pub fn draw_rows<S: SketchSource + ?Sized, R: Rng + ?Sized>(
    src: &S,
    strategy: Strategy,
    count: usize,
    rng: &mut R,
) -> Result<(Vec<usize>, Vec<f64>)> {
    let m = src.matrix().rows();
    match tree_for(src, strategy)? {
        Some(t) => {
            let total = t.fro_norm_sq();
            let mut idx = Vec::with_capacity(count);
            let mut prob = Vec::with_capacity(count);
            for _ in 0..count {
                let i = t.sample_row(rng)?;
                idx.push(i);
                prob.push(t.row_norm_sq(i)? / total);
            }
            Ok((idx, prob))
        }
        None => {
            let idx = (0..count).map(|_| rng.gen_range(0..m)).collect();
            Ok((idx, vec![1.0 / m as f64; count]))
        }
    }
}

/// Draws `count` column indices. Norm-weighted draws pick one of the sampled
/// rows uniformly and then a column from that row's conditional law, which
/// realizes the mixture `g_j` without materializing it.
pub fn draw_cols<S: SketchSource + ?Sized, R: Rng + ?Sized>(
    src: &S,
    strategy: Strategy,
    rows: &[usize],
    count: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    let n = src.matrix().cols();
    match tree_for(src, strategy)? {
        Some(t) => {
            if rows.is_empty() {
                return Err(Error::ZeroMatrix);
            }
            (0..count)
                .map(|_| {
                    let p = rng.gen_range(0..rows.len());
                    t.sample_col_in_row(rows[p], rng)
                })
                .collect()
        }
        None => Ok((0..count).map(|_| rng.gen_range(0..n)).collect()),
    }
}

/// `g_j` for the sampled rows: `(1/P) Σ_p X(i_p,j)^2 / |X(i_p,:)|^2`.
pub fn column_law(x: &DenseMatrix, rows: &[usize], row_norms_sq: &[f64], j: usize) -> f64 {
    let p = rows.len() as f64;
    rows.iter()
        .zip(row_norms_sq)
        .map(|(&i, &nrm)| {
            let v = x.get(i, j);
            v * v / nrm
        })
        .sum::<f64>()
        / p
}

pub fn draw_samples<S: SketchSource + ?Sized>(src: &S, cfg: &SketchConfig) -> Result<SampleDraw> {
    cfg.validate()?;
    let x = src.matrix();
    if x.is_empty() {
        return Err(Error::EmptyMatrix);
    }
    if cfg.strategy == Strategy::Norm {
        let t = tree_for(src, cfg.strategy)?.expect("norm strategy has a tree");
        if t.fro_norm_sq() <= 0.0 {
            return Err(Error::ZeroMatrix);
        }
    }
    let mut row_rng = rng::stream(cfg.seed, streams::SKETCH_ROWS);
    let mut col_rng = rng::stream(cfg.seed, streams::SKETCH_COLS);
    let (row_idx, row_prob) = draw_rows(src, cfg.strategy, cfg.samples, &mut row_rng)?;
    let col_idx = draw_cols(src, cfg.strategy, &row_idx, cfg.samples, &mut col_rng)?;
    let col_prob = match cfg.strategy {
        Strategy::Norm => {
            let t = src.norm_tree().expect("checked above");
            let norms: Vec<f64> = row_idx
                .iter()
                .map(|&i| t.row_norm_sq(i))
                .collect::<Result<_>>()?;
            col_idx.iter().map(|&j| column_law(x, &row_idx, &norms, j)).collect()
        }
        Strategy::Uniform => vec![1.0 / x.cols() as f64; cfg.samples],
    };
    Ok(SampleDraw {
        row_idx,
        row_prob,
        col_idx,
        col_prob,
    })
}

/// `W(p,q) = X(i_p, j_q) / (P sqrt(f_{i_p} g_{j_q}))`.
pub fn build_w<S: SketchSource + ?Sized>(src: &S, d: &SampleDraw) -> Result<DenseMatrix> {
    check_probs(d)?;
    let x = src.matrix();
    let p = d.len();
    let mut w = DenseMatrix::zeros(p, p);
    for (a, (&i, &f)) in d.row_idx.iter().zip(&d.row_prob).enumerate() {
        let row = x.row(i);
        for (b, (&j, &g)) in d.col_idx.iter().zip(&d.col_prob).enumerate() {
            w.set(a, b, row[j] / (p as f64 * (f * g).sqrt()));
        }
    }
    Ok(w)
}

/// The rescaled sampled rows `S(p,:) = X(i_p,:) / sqrt(P f_{i_p})`.
pub fn sketch_rows<S: SketchSource + ?Sized>(src: &S, d: &SampleDraw) -> Result<DenseMatrix> {
    check_probs(d)?;
    let x = src.matrix();
    let p = d.len() as f64;
    let mut s = x.select_rows(&d.row_idx);
    for (r, &f) in d.row_prob.iter().enumerate() {
        let scale = 1.0 / (p * f).sqrt();
        for v in s.row_mut(r) {
            *v *= scale;
        }
    }
    Ok(s)
}

fn check_probs(d: &SampleDraw) -> Result<()> {
    let ok = |p: &f64| *p > 0.0 && *p <= 1.0 + 1e-12;
    if d.row_prob.iter().all(ok) && d.col_prob.iter().all(ok) {
        Ok(())
    } else {
        Err(Error::ZeroProbability)
    }
}

/// Lifts the decomposition of `W` to rank-`k` factors of `X`.
///
/// With `orthonormalize` set, the lifted right vectors are passed through
/// modified Gram-Schmidt (in singular-value order) before the left vectors
/// are formed. Without it the left vectors inherit any leakage of the right
/// ones onto dominant directions, amplified by `sigma_1 / sigma_i`.
pub fn reconstruct<S: SketchSource + ?Sized>(
    src: &S,
    d: &SampleDraw,
    w_svd: &SvdResult,
    k: usize,
    rcond: f64,
    orthonormalize: bool,
) -> Result<LowRankFactors> {
    if k == 0 {
        return Err(Error::InvalidParameter("rank must be >= 1".into()));
    }
    let x = src.matrix();
    let s = sketch_rows(src, d)?;
    let s1 = w_svd.sigma.first().copied().unwrap_or(0.0);
    let usable = w_svd
        .sigma
        .iter()
        .take_while(|&&v| v > 0.0 && v > rcond * s1)
        .count();
    let want = k.min(usable);
    if want == 0 {
        if x.frobenius_norm_sq() == 0.0 {
            return Err(Error::ZeroMatrix);
        }
        return Err(Error::RankDeficientSketch { requested: k, usable });
    }

    // right vectors as rows: v_i = Sᵀ w_i / sigma_i, w_i the i-th left
    // singular vector of W (indexed by sampled rows)
    let n = x.cols();
    let mut sigma = Vec::with_capacity(want);
    let mut vt: Vec<Vec<f64>> = Vec::with_capacity(want);
    for i in 0..want {
        let si = w_svd.sigma[i];
        let mut v = vec![0.0; n];
        for p in 0..d.len() {
            let c = w_svd.u.get(p, i);
            if c != 0.0 {
                axpy(c / si, s.row(p), &mut v);
            }
        }
        if orthonormalize {
            for prev in &vt {
                let proj = dot(&v, prev);
                axpy(-proj, prev, &mut v);
            }
            let nrm = dot(&v, &v).sqrt();
            if nrm <= 1e-10 {
                // numerically inside the span already found
                continue;
            }
            v.iter_mut().for_each(|e| *e /= nrm);
        }
        sigma.push(si);
        vt.push(v);
    }
    let kk = vt.len();
    if kk == 0 {
        return Err(Error::RankDeficientSketch { requested: k, usable: 0 });
    }

    // u_i = X v_i / sigma_i
    let m = x.rows();
    let mut u = DenseMatrix::zeros(m, kk);
    for r in 0..m {
        let row = x.row(r);
        let out = u.row_mut(r);
        for (i, v) in vt.iter().enumerate() {
            out[i] = dot(row, v) / sigma[i];
        }
    }
    let v = DenseMatrix::from_columns(&vt)?;
    let mut f = LowRankFactors::new(sigma, u, v)?;
    if kk < k {
        f.reduced_from = Some(k);
    }
    Ok(f)
}

/// Everything produced by one sketch run.
#[derive(Debug, Clone)]
pub struct Sketch {
    pub draw: SampleDraw,
    pub factors: LowRankFactors,
}

/// Runs draw, `W`, small SVD and reconstruction, keeping the draw.
pub fn sketch<S: SketchSource + ?Sized>(src: &S, cfg: &SketchConfig) -> Result<Sketch> {
    let draw = draw_samples(src, cfg)?;
    let w = build_w(src, &draw)?;
    let w_svd = svd_dense(&w)?;
    let factors = reconstruct(src, &draw, &w_svd, cfg.rank, cfg.rcond, cfg.orthonormalize)?;
    Ok(Sketch { draw, factors })
}

/// Rank-`K` factors `{sigma_i, u_i, v_i}` of `X` from `P` samples.
pub fn modfkv<S: SketchSource + ?Sized>(src: &S, cfg: &SketchConfig) -> Result<LowRankFactors> {
    sketch(src, cfg).map(|s| s.factors)
}
