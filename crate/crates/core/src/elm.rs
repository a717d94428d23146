//! Extreme learning machine: random ReLU features `phi_i(x) = max(0, a_iᵀx + b_i)`,
//! output weights from a (truncated) pseudo-inverse of the design matrix,
//! argmax prediction, and gradient descent on `a_i, b_i` with the output
//! weights frozen.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{apply_factors_matrix, axpy, dot, DenseMatrix, LowRankFactors};
use crate::rng;
use crate::segtree::SegTreeMatrix;

/// Inputs (one row per example) with integer labels in `[0, classes)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    inputs: DenseMatrix,
    labels: Vec<usize>,
    classes: usize,
}

impl Dataset {
    pub fn new(inputs: DenseMatrix, labels: Vec<usize>, classes: usize) -> Result<Self> {
        if labels.len() != inputs.rows() {
            return Err(Error::DimensionMismatch {
                expected: inputs.rows(),
                got: labels.len(),
            });
        }
        if classes < 2 {
            return Err(Error::InvalidParameter(format!("need at least 2 classes, got {classes}")));
        }
        if let Some(&l) = labels.iter().find(|&&l| l >= classes) {
            return Err(Error::LabelOutOfRange { label: l, classes });
        }
        Ok(Self { inputs, labels, classes })
    }

    pub(crate) fn new_unchecked(inputs: DenseMatrix, labels: Vec<usize>, classes: usize) -> Self {
        Self { inputs, labels, classes }
    }

    pub fn inputs(&self) -> &DenseMatrix {
        &self.inputs
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.inputs.cols()
    }

    pub fn select(&self, idx: &[usize]) -> Self {
        Self {
            inputs: self.inputs.select_rows(idx),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            classes: self.classes,
        }
    }

    /// `n` distinct examples drawn without replacement, kept in original order.
    /// Returns a clone when `n >= len`.
    pub fn subsample(&self, n: usize, seed: u64) -> Self {
        if n >= self.len() {
            return self.clone();
        }
        let mut r = rng::stream(seed, rng::streams::SUBSAMPLE);
        let mut idx = rand::seq::index::sample(&mut r, self.len(), n).into_vec();
        idx.sort_unstable();
        self.select(&idx)
    }
}

/// ReLU random-feature map. Weights are kept transposed (`d x M`) so sparse
/// inputs only touch the rows of their nonzero pixels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMap {
    a_t: DenseMatrix,
    b: Vec<f64>,
}

pub fn init_features<R: Rng + ?Sized>(d: usize, m: usize, rng: &mut R) -> Result<FeatureMap> {
    if d == 0 || m == 0 {
        return Err(Error::InvalidParameter(format!("feature map needs d, M >= 1 (got d={d}, M={m})")));
    }
    // a_i then b_i per node, so a map's prefix does not depend on M
    let mut a = vec![0.0; m * d];
    let mut b = vec![0.0; m];
    for i in 0..m {
        for k in 0..d {
            a[k * m + i] = rng.gen::<f64>();
        }
        b[i] = rng.gen::<f64>();
    }
    Ok(FeatureMap {
        a_t: DenseMatrix::from_raw(d, m, a),
        b,
    })
}

impl FeatureMap {
    /// `a` is `M x d` (row `i` is `a_i`).
    pub fn new(a: &DenseMatrix, b: Vec<f64>) -> Result<Self> {
        if a.rows() != b.len() {
            return Err(Error::DimensionMismatch {
                expected: a.rows(),
                got: b.len(),
            });
        }
        if a.is_empty() {
            return Err(Error::EmptyMatrix);
        }
        if b.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { a_t: a.transpose(), b })
    }

    pub fn nodes(&self) -> usize {
        self.b.len()
    }

    pub fn input_dim(&self) -> usize {
        self.a_t.rows()
    }

    pub fn a(&self, i: usize, k: usize) -> f64 {
        self.a_t.get(k, i)
    }

    /// Weights as `M x d`.
    pub fn weights(&self) -> DenseMatrix {
        self.a_t.transpose()
    }

    pub fn biases(&self) -> &[f64] {
        &self.b
    }

    pub fn featurize(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                got: x.len(),
            });
        }
        let mut out = vec![0.0; self.nodes()];
        self.preactivate(x, &mut out);
        relu(&mut out);
        Ok(out)
    }

    fn preactivate(&self, x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.b);
        for (k, &xk) in x.iter().enumerate() {
            if xk != 0.0 {
                axpy(xk, self.a_t.row(k), out);
            }
        }
    }

    fn step(&mut self, grad: &Gradients, lr: f64) {
        for (w, g) in self.a_t.as_mut_slice().iter_mut().zip(grad.a_t.as_slice()) {
            *w -= lr * g;
        }
        axpy(-lr, &grad.b, &mut self.b);
    }

    fn is_finite(&self) -> bool {
        self.a_t.all_finite() && self.b.iter().all(|v| v.is_finite())
    }
}

fn relu(v: &mut [f64]) {
    for x in v {
        if *x < 0.0 {
            *x = 0.0;
        }
    }
}

fn check_dim(fm: &FeatureMap, ds: &Dataset) -> Result<()> {
    if ds.dim() != fm.input_dim() {
        return Err(Error::DimensionMismatch {
            expected: fm.input_dim(),
            got: ds.dim(),
        });
    }
    if ds.is_empty() {
        return Err(Error::EmptyMatrix);
    }
    Ok(())
}

/// `D x M` design matrix, row `i` = `phi(x_i)ᵀ`.
pub fn design_matrix(fm: &FeatureMap, ds: &Dataset) -> Result<DenseMatrix> {
    check_dim(fm, ds)?;
    let m = fm.nodes();
    let mut data = vec![0.0; ds.len() * m];
    for (i, out) in data.chunks_exact_mut(m).enumerate() {
        fm.preactivate(ds.inputs.row(i), out);
        relu(out);
    }
    Ok(DenseMatrix::from_raw(ds.len(), m, data))
}

/// Design matrix inside a segment tree, each row's tree path refreshed as
/// soon as the row's features are produced.
pub fn build_design(fm: &FeatureMap, ds: &Dataset) -> Result<SegTreeMatrix> {
    check_dim(fm, ds)?;
    let mut tree = SegTreeMatrix::zeros(ds.len(), fm.nodes())?;
    let mut phi = vec![0.0; fm.nodes()];
    for i in 0..ds.len() {
        fm.preactivate(ds.inputs.row(i), &mut phi);
        relu(&mut phi);
        tree.set_row(i, &phi)?;
    }
    Ok(tree)
}

pub fn onehot(labels: &[usize], classes: usize) -> Result<DenseMatrix> {
    let mut y = DenseMatrix::zeros(labels.len(), classes);
    for (i, &l) in labels.iter().enumerate() {
        if l >= classes {
            return Err(Error::LabelOutOfRange { label: l, classes });
        }
        y.set(i, l, 1.0);
    }
    Ok(y)
}

/// Frozen features plus `M x L` output weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElmModel {
    pub features: FeatureMap,
    w: DenseMatrix,
}

/// `W = X⁺ Y` with `X⁺` given as factors mapping `R^D -> R^M`.
pub fn train(fm: FeatureMap, ds: &Dataset, pinv: &LowRankFactors) -> Result<ElmModel> {
    if pinv.in_dim() != ds.len() {
        return Err(Error::DimensionMismatch {
            expected: ds.len(),
            got: pinv.in_dim(),
        });
    }
    if pinv.out_dim() != fm.nodes() {
        return Err(Error::DimensionMismatch {
            expected: fm.nodes(),
            got: pinv.out_dim(),
        });
    }
    let y = onehot(&ds.labels, ds.classes)?;
    let w = apply_factors_matrix(pinv, &y)?;
    ElmModel::new(fm, w)
}

impl ElmModel {
    pub fn new(features: FeatureMap, w: DenseMatrix) -> Result<Self> {
        if w.rows() != features.nodes() {
            return Err(Error::DimensionMismatch {
                expected: features.nodes(),
                got: w.rows(),
            });
        }
        if w.cols() < 2 {
            return Err(Error::InvalidParameter("need at least 2 classes".into()));
        }
        if !w.all_finite() {
            return Err(Error::NonFinite);
        }
        Ok(Self { features, w })
    }

    pub fn weights(&self) -> &DenseMatrix {
        &self.w
    }

    pub fn classes(&self) -> usize {
        self.w.cols()
    }

    pub fn scores(&self, x: &[f64]) -> Result<Vec<f64>> {
        let phi = self.features.featurize(x)?;
        Ok(self.scores_of(&phi))
    }

    fn scores_of(&self, phi: &[f64]) -> Vec<f64> {
        let mut s = vec![0.0; self.classes()];
        for (i, &p) in phi.iter().enumerate() {
            if p != 0.0 {
                axpy(p, self.w.row(i), &mut s);
            }
        }
        s
    }

    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        Ok(argmax(&self.scores(x)?))
    }

    pub fn predict_all(&self, ds: &Dataset) -> Result<Vec<usize>> {
        check_dim(&self.features, ds)?;
        let mut phi = vec![0.0; self.features.nodes()];
        Ok((0..ds.len())
            .map(|i| {
                self.features.preactivate(ds.inputs.row(i), &mut phi);
                relu(&mut phi);
                argmax(&self.scores_of(&phi))
            })
            .collect())
    }

    pub fn accuracy(&self, ds: &Dataset) -> Result<f64> {
        let pred = self.predict_all(ds)?;
        let hits = pred.iter().zip(&ds.labels).filter(|(p, l)| p == l).count();
        Ok(hits as f64 / ds.len() as f64)
    }
}

/// First index of the maximum.
pub fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (l, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = l;
        }
    }
    best
}

/// `Σ_i Σ_l (y_i^(l) - w^(l)ᵀ phi(x_i))²`.
pub fn squared_loss(model: &ElmModel, ds: &Dataset) -> Result<f64> {
    check_dim(&model.features, ds)?;
    if ds.classes != model.classes() {
        return Err(Error::DimensionMismatch {
            expected: model.classes(),
            got: ds.classes,
        });
    }
    let mut phi = vec![0.0; model.features.nodes()];
    let mut loss = 0.0;
    for i in 0..ds.len() {
        model.features.preactivate(ds.inputs.row(i), &mut phi);
        relu(&mut phi);
        let s = model.scores_of(&phi);
        for (l, v) in s.iter().enumerate() {
            let y = if l == ds.labels[i] { 1.0 } else { 0.0 };
            loss += (y - v) * (y - v);
        }
    }
    Ok(loss)
}

/// Loss and its gradient with respect to the feature parameters.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub loss: f64,
    a_t: DenseMatrix,
    pub b: Vec<f64>,
}

impl Gradients {
    /// `dL/da_{ik}` as an `M x d` matrix.
    pub fn a(&self) -> DenseMatrix {
        self.a_t.transpose()
    }

    fn scale(&mut self, c: f64) {
        self.a_t.as_mut_slice().iter_mut().for_each(|v| *v *= c);
        self.b.iter_mut().for_each(|v| *v *= c);
    }
}

/// Gradient of [`squared_loss`] with `W` fixed; `d ReLU/dz = 0` at `z <= 0`.
pub fn gradients(model: &ElmModel, ds: &Dataset) -> Result<Gradients> {
    check_dim(&model.features, ds)?;
    let all: Vec<usize> = (0..ds.len()).collect();
    Ok(gradients_on(model, ds, &all))
}

fn gradients_on(model: &ElmModel, ds: &Dataset, rows: &[usize]) -> Gradients {
    let fm = &model.features;
    let (d, m, nl) = (fm.input_dim(), fm.nodes(), model.classes());
    let mut ga = DenseMatrix::zeros(d, m);
    let mut gb = vec![0.0; m];
    let mut z = vec![0.0; m];
    let mut phi = vec![0.0; m];
    let mut g = vec![0.0; m];
    let mut r = vec![0.0; nl];
    let mut loss = 0.0;
    for &i in rows {
        let x = ds.inputs.row(i);
        fm.preactivate(x, &mut z);
        phi.copy_from_slice(&z);
        relu(&mut phi);
        let s = model.scores_of(&phi);
        for (l, (rl, sl)) in r.iter_mut().zip(&s).enumerate() {
            let y = if l == ds.labels[i] { 1.0 } else { 0.0 };
            *rl = y - sl;
            loss += *rl * *rl;
        }
        for (n, gn) in g.iter_mut().enumerate() {
            *gn = if z[n] > 0.0 { -2.0 * dot(model.w.row(n), &r) } else { 0.0 };
        }
        axpy(1.0, &g, &mut gb);
        for (k, &xk) in x.iter().enumerate() {
            if xk != 0.0 {
                axpy(xk, &g, ga.row_mut(k));
            }
        }
    }
    Gradients { loss, a_t: ga, b: gb }
}

/// Gradient-descent settings for [`optimize_features`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    /// `None` means full batch.
    pub batch_size: Option<usize>,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            epochs: 50,
            batch_size: None,
        }
    }
}

/// Per-epoch record of an optimization run.
#[derive(Debug, Clone)]
pub struct OptimizeTrace {
    pub features: FeatureMap,
    /// Training loss before the first epoch and after each accepted epoch.
    pub losses: Vec<f64>,
    /// Epochs whose update was rolled back and retried at half the step.
    pub rejected: usize,
    pub final_learning_rate: f64,
}

/// Epochs raising the loss by more than this factor are rolled back.
pub const LOSS_TOLERANCE: f64 = 1.01;
/// Loss above this multiple of the initial loss aborts with `Diverged`.
pub const DIVERGENCE_FACTOR: f64 = 10.0;

pub fn optimize_features<R: Rng + ?Sized>(
    model: &ElmModel,
    ds: &Dataset,
    opt: &OptimizerConfig,
    rng: &mut R,
) -> Result<FeatureMap> {
    optimize_features_traced(model, ds, opt, rng).map(|t| t.features)
}

/// Gradient descent on `a_i, b_i` with the output weights frozen.
///
/// Mini-batch gradients are rescaled by `D / |B|` so the step size means
/// the same thing for every batch size. After each epoch the full training
/// loss is checked: an increase beyond [`LOSS_TOLERANCE`] rolls the epoch
/// back and halves the step.
pub fn optimize_features_traced<R: Rng + ?Sized>(
    model: &ElmModel,
    ds: &Dataset,
    opt: &OptimizerConfig,
    rng: &mut R,
) -> Result<OptimizeTrace> {
    check_dim(&model.features, ds)?;
    if !(opt.learning_rate >= 0.0 && opt.learning_rate.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "learning rate {} must be finite and >= 0",
            opt.learning_rate
        )));
    }
    let n = ds.len();
    let batch = opt.batch_size.unwrap_or(n).clamp(1, n);
    let mut order: Vec<usize> = (0..n).collect();

    let mut cur = model.clone();
    let mut loss = squared_loss(&cur, ds)?;
    let initial = loss;
    let mut losses = vec![loss];
    let mut lr = opt.learning_rate;
    let mut rejected = 0;
    if lr == 0.0 {
        return Ok(OptimizeTrace {
            features: cur.features,
            losses,
            rejected,
            final_learning_rate: lr,
        });
    }

    for _ in 0..opt.epochs {
        let mut cand = cur.clone();
        if batch < n {
            order.shuffle(rng);
        }
        for chunk in order.chunks(batch) {
            let mut g = gradients_on(&cand, ds, chunk);
            if chunk.len() < n {
                g.scale(n as f64 / chunk.len() as f64);
            }
            cand.features.step(&g, lr);
        }
        let new_loss = if cand.features.is_finite() {
            squared_loss(&cand, ds)?
        } else {
            f64::INFINITY
        };
        if !new_loss.is_finite() || new_loss > DIVERGENCE_FACTOR * initial {
            return Err(Error::Diverged {
                loss: new_loss,
                initial,
            });
        }
        if new_loss > LOSS_TOLERANCE * loss {
            rejected += 1;
            lr *= 0.5;
            continue;
        }
        cur = cand;
        loss = new_loss;
        losses.push(loss);
    }
    Ok(OptimizeTrace {
        features: cur.features,
        losses,
        rejected,
        final_learning_rate: lr,
    })
}

/// On-disk model encodings. Both start with the `ELM1` magic and the
/// dimensions `d, M, L`, followed by `A` (row-major `M x d`), `b` and `W`
/// (row-major `M x L`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelFormat {
    /// Dimensions as little-endian `u64`, values as little-endian `f64`.
    Binary,
    /// Whitespace-separated decimal text, `ELM1 d M L` on the first line.
    Text,
}

pub const MODEL_MAGIC: &[u8; 4] = b"ELM1";

impl ElmModel {
    pub fn save(&self, path: impl AsRef<Path>, format: ModelFormat) -> Result<()> {
        let mut w = BufWriter::new(fs::File::create(path)?);
        self.write_to(&mut w, format)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>, format: ModelFormat) -> Result<Self> {
        Self::read_from(BufReader::new(fs::File::open(path)?), format)
    }

    fn flat_values(&self) -> Vec<f64> {
        let fm = &self.features;
        let mut out = Vec::with_capacity(fm.nodes() * (fm.input_dim() + 1 + self.classes()));
        out.extend(fm.weights().into_vec());
        out.extend_from_slice(&fm.b);
        out.extend_from_slice(self.w.as_slice());
        out
    }

    pub fn write_to<W: Write>(&self, mut out: W, format: ModelFormat) -> Result<()> {
        let dims = [self.features.input_dim(), self.features.nodes(), self.classes()];
        match format {
            ModelFormat::Binary => {
                out.write_all(MODEL_MAGIC)?;
                for d in dims {
                    out.write_all(&(d as u64).to_le_bytes())?;
                }
                for v in self.flat_values() {
                    out.write_all(&v.to_le_bytes())?;
                }
            }
            ModelFormat::Text => {
                writeln!(out, "ELM1 {} {} {}", dims[0], dims[1], dims[2])?;
                for v in self.flat_values() {
                    // `{:?}` prints the shortest string that parses back exactly
                    writeln!(out, "{v:?}")?;
                }
            }
        }
        Ok(())
    }

    pub fn read_from<R: Read>(mut input: R, format: ModelFormat) -> Result<Self> {
        let bad = |msg: &str| Error::BadModelFile(msg.to_string());
        let (dims, values) = match format {
            ModelFormat::Binary => {
                let mut bytes = Vec::new();
                input.read_to_end(&mut bytes)?;
                if bytes.len() < 28 || &bytes[..4] != MODEL_MAGIC {
                    return Err(bad("missing ELM1 header"));
                }
                let mut dims = [0usize; 3];
                for (i, d) in dims.iter_mut().enumerate() {
                    let at = 4 + 8 * i;
                    *d = u64::from_le_bytes(bytes[at..at + 8].try_into().unwrap()) as usize;
                }
                let body = &bytes[28..];
                if body.len() % 8 != 0 {
                    return Err(bad("body is not a whole number of f64 values"));
                }
                let values: Vec<f64> = body
                    .chunks_exact(8)
                    .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                    .collect();
                (dims, values)
            }
            ModelFormat::Text => {
                let mut lines = BufReader::new(input).lines();
                let header = lines.next().ok_or_else(|| bad("empty file"))??;
                let mut parts = header.split_whitespace();
                if parts.next() != Some("ELM1") {
                    return Err(bad("missing ELM1 header"));
                }
                let mut dims = [0usize; 3];
                for d in dims.iter_mut() {
                    *d = parts
                        .next()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| bad("bad dimensions"))?;
                }
                let mut values = Vec::new();
                for line in lines {
                    for tok in line?.split_whitespace() {
                        values.push(tok.parse::<f64>().map_err(|_| bad("bad number"))?);
                    }
                }
                (dims, values)
            }
        };
        let [d, m, l] = dims;
        let want = m
            .checked_mul(d + 1 + l)
            .ok_or_else(|| bad("dimensions overflow"))?;
        if values.len() != want || d == 0 || m == 0 {
            return Err(bad(&format!("expected {want} values, found {}", values.len())));
        }
        let a = DenseMatrix::from_vec(m, d, values[..m * d].to_vec())?;
        let b = values[m * d..m * d + m].to_vec();
        let w = DenseMatrix::from_vec(m, l, values[m * d + m..].to_vec())?;
        Self::new(FeatureMap::new(&a, b)?, w)
    }
}
