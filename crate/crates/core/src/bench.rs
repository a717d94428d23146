//! Experiment sweeps over `(M, K, P, strategy, seed)` with per-stage wall
//! clock timings, and CSV/JSON reports.
//!
//! Every point runs the same pipeline: random features, design matrix
//! (plus segment tree for norm sampling), factorization (exact SVD or the
//! sampled sketch), truncated pseudo-inverse and output weights, then test
//! accuracy. On the synthetic dataset the `accuracy` field carries the
//! relative Frobenius reconstruction error instead.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::datasets::{self, locate_cifar10, load_cifar10, normalize, MnistFiles};
use crate::elm::{self, Dataset, OptimizerConfig};
use crate::error::{Error, Result};
use crate::linalg::{svd_leading, truncate, truncated_pinv, DenseMatrix, LowRankFactors, DEFAULT_RCOND};
use crate::rng::{self, streams};
use crate::segtree::SegTreeMatrix;
use crate::sketch::{self, SampleDraw, SketchConfig, Strategy};

pub const DATA_DIR_ENV: &str = "SKETCHLEARN_DATA_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ExperimentKind {
    SweepNodes,
    SweepRank,
    SweepSamples,
    CompareSampling,
    OptimizedCompare,
    SampledNorms,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        Self::SweepNodes,
        Self::SweepRank,
        Self::SweepSamples,
        Self::CompareSampling,
        Self::OptimizedCompare,
        Self::SampledNorms,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::SweepNodes => "sweepNodes",
            Self::SweepRank => "sweepRank",
            Self::SweepSamples => "sweepSamples",
            Self::CompareSampling => "compareSampling",
            Self::OptimizedCompare => "optimizedCompare",
            Self::SampledNorms => "sampledNorms",
        }
    }

    /// Exact-SVD kinds ignore `P` and the strategy list.
    pub fn uses_exact_svd(self) -> bool {
        matches!(self, Self::SweepNodes | Self::SweepRank)
    }

    fn optimizes(self) -> bool {
        matches!(self, Self::OptimizedCompare | Self::SampledNorms)
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm: String = s.chars().filter(|c| *c != '-' && *c != '_').collect::<String>().to_lowercase();
        Self::ALL
            .into_iter()
            .find(|k| k.as_str().to_lowercase() == norm)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown experiment '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetKind {
    Mnist,
    Cifar10,
    Synthetic,
}

impl DatasetKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Mnist => "mnist",
            Self::Cifar10 => "cifar10",
            Self::Synthetic => "synthetic",
        }
    }
}

impl fmt::Display for DatasetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for DatasetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "").as_str() {
            "mnist" => Ok(Self::Mnist),
            "cifar10" | "cifar" => Ok(Self::Cifar10),
            "synthetic" | "synth" => Ok(Self::Synthetic),
            _ => Err(Error::InvalidParameter(format!("unknown dataset '{s}'"))),
        }
    }
}

/// Exact SVD or one of the sampling strategies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    Exact,
    Sampled(Strategy),
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Exact => "exact",
            Self::Sampled(s) => s.as_str(),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for Method {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Method {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        if s == "exact" {
            return Ok(Self::Exact);
        }
        s.parse::<Strategy>().map(Self::Sampled).map_err(serde::de::Error::custom)
    }
}

/// A sweep: the cross product of the parameter lists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub dataset: DatasetKind,
    pub data_dir: Option<PathBuf>,
    #[serde(rename = "M")]
    pub m: Vec<usize>,
    #[serde(rename = "K")]
    pub k: Vec<usize>,
    #[serde(rename = "P")]
    pub p: Vec<usize>,
    pub strategies: Vec<Strategy>,
    pub seeds: Vec<u64>,
    /// Training examples kept (all when `None`).
    pub subsample: Option<usize>,
    /// Test examples kept (all when `None`).
    pub test_subsample: Option<usize>,
    pub optimizer: OptimizerConfig,
    pub rcond: f64,
    /// Rows of the synthetic matrix (its columns are `M`).
    pub synthetic_rows: usize,
    pub synthetic_rank: usize,
    pub synthetic_noise: f64,
    pub jobs: usize,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            kind: ExperimentKind::CompareSampling,
            dataset: DatasetKind::Mnist,
            data_dir: None,
            m: vec![1000],
            k: vec![10],
            p: vec![100],
            strategies: vec![Strategy::Norm, Strategy::Uniform],
            seeds: vec![0],
            subsample: None,
            test_subsample: None,
            optimizer: OptimizerConfig::default(),
            rcond: DEFAULT_RCOND,
            synthetic_rows: 100,
            synthetic_rank: 5,
            synthetic_noise: 0.0,
            jobs: 1,
        }
    }
}

impl ExperimentSpec {
    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn validate(&self) -> Result<()> {
        let empty = |name: &str| Error::InvalidParameter(format!("parameter list {name} is empty"));
        if self.m.is_empty() {
            return Err(empty("M"));
        }
        if self.k.is_empty() {
            return Err(empty("K"));
        }
        if self.seeds.is_empty() {
            return Err(empty("seeds"));
        }
        if !self.kind.uses_exact_svd() {
            if self.p.is_empty() {
                return Err(empty("P"));
            }
            if self.strategies.is_empty() {
                return Err(empty("strategies"));
            }
        }
        Ok(())
    }

    /// Points in canonical order: `M`, `K`, `P`, method, seed.
    pub fn points(&self) -> Vec<SpecPoint> {
        let (ps, methods): (Vec<usize>, Vec<Method>) = if self.kind.uses_exact_svd() {
            (vec![0], vec![Method::Exact])
        } else {
            let mut s = self.strategies.clone();
            s.sort();
            s.dedup();
            (self.p.clone(), s.into_iter().map(Method::Sampled).collect())
        };
        let mut out = Vec::new();
        for &m in &self.m {
            for &k in &self.k {
                for &p in &ps {
                    for &method in &methods {
                        for &seed in &self.seeds {
                            out.push(SpecPoint { m, k, p, method, seed });
                        }
                    }
                }
            }
        }
        out.sort();
        out.dedup();
        out
    }

    pub fn resolve_data_dir(&self) -> Result<PathBuf> {
        self.data_dir
            .clone()
            .or_else(|| std::env::var_os(DATA_DIR_ENV).map(PathBuf::from))
            .ok_or_else(|| Error::DatasetMissing(PathBuf::from(format!("${DATA_DIR_ENV}"))))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SpecPoint {
    pub m: usize,
    pub k: usize,
    pub p: usize,
    pub method: Method,
    pub seed: u64,
}

/// Wall-clock seconds per stage.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Timings {
    #[serde(rename = "featurize_s")]
    pub featurize_s: f64,
    #[serde(rename = "treeBuild_s")]
    pub tree_build_s: f64,
    #[serde(rename = "factorize_s")]
    pub factorize_s: f64,
    #[serde(rename = "solve_s")]
    pub solve_s: f64,
    /// Feature optimization, only for the optimizing kinds.
    #[serde(rename = "optimize_s")]
    pub optimize_s: f64,
    #[serde(rename = "total_s")]
    pub total_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub kind: ExperimentKind,
    pub dataset: DatasetKind,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "P")]
    pub p: usize,
    pub strategy: Method,
    pub seed: u64,
    /// Test accuracy; relative reconstruction error on synthetic data.
    /// `None` when the point failed.
    pub accuracy: Option<f64>,
    pub timings: Timings,
    #[serde(rename = "sampledColumnNorms", skip_serializing_if = "Option::is_none", default)]
    pub sampled_column_norms: Option<Vec<f64>>,
    /// Rank actually used when the sketch had to drop directions.
    #[serde(rename = "effectiveRank", skip_serializing_if = "Option::is_none", default)]
    pub effective_rank: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

impl RunRecord {
    pub fn point(&self) -> SpecPoint {
        SpecPoint {
            m: self.m,
            k: self.k,
            p: self.p,
            method: self.strategy,
            seed: self.seed,
        }
    }

    pub fn succeeded(&self) -> bool {
        self.error.is_none()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub records: Vec<RunRecord>,
}

impl RunReport {
    pub fn all_succeeded(&self) -> bool {
        self.records.iter().all(RunRecord::succeeded)
    }

    /// Mean accuracy over successful records matching `filter`.
    pub fn mean_accuracy(&self, filter: impl Fn(&RunRecord) -> bool) -> Option<f64> {
        let v: Vec<f64> = self
            .records
            .iter()
            .filter(|r| filter(r))
            .filter_map(|r| r.accuracy)
            .collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    }
}

/// Training and test data shared by every point of a sweep.
#[derive(Debug, Clone)]
pub enum Workload {
    Images { train: Dataset, test: Dataset },
    Synthetic,
}

pub fn load_workload(spec: &ExperimentSpec) -> Result<Workload> {
    let (train, test) = match spec.dataset {
        DatasetKind::Synthetic => return Ok(Workload::Synthetic),
        DatasetKind::Mnist => MnistFiles::locate(spec.resolve_data_dir()?)?.load()?,
        DatasetKind::Cifar10 => {
            let (train, test) = locate_cifar10(spec.resolve_data_dir()?)?;
            (normalize(&load_cifar10(&train)?), normalize(&load_cifar10(&[test])?))
        }
    };
    let train = match spec.subsample {
        Some(n) => train.subsample(n, 0),
        None => train,
    };
    let test = match spec.test_subsample {
        Some(n) => test.subsample(n, 1),
        None => test,
    };
    Ok(Workload::Images { train, test })
}

/// Loads the data and runs every point. Failing points become error
/// records; only a missing dataset or an invalid spec aborts.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<RunReport> {
    spec.validate()?;
    let work = load_workload(spec)?;
    run_on(spec, &work)
}

/// Runs the sweep on already loaded data, up to `spec.jobs` points at a time.
pub fn run_on(spec: &ExperimentSpec, work: &Workload) -> Result<RunReport> {
    spec.validate()?;
    let points = spec.points();
    let jobs = spec.jobs.clamp(1, points.len().max(1));
    let next = AtomicUsize::new(0);
    let done: Mutex<Vec<(usize, RunRecord)>> = Mutex::new(Vec::with_capacity(points.len()));
    std::thread::scope(|s| {
        for _ in 0..jobs {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(&pt) = points.get(i) else { break };
                let rec = run_point(spec, work, pt);
                done.lock().expect("collector poisoned").push((i, rec));
            });
        }
    });
    let mut done = done.into_inner().expect("collector poisoned");
    done.sort_by_key(|(i, _)| *i);
    Ok(RunReport {
        records: done.into_iter().map(|(_, r)| r).collect(),
    })
}

pub fn run_point(spec: &ExperimentSpec, work: &Workload, pt: SpecPoint) -> RunRecord {
    let mut rec = RunRecord {
        kind: spec.kind,
        dataset: spec.dataset,
        m: pt.m,
        k: pt.k,
        p: pt.p,
        strategy: pt.method,
        seed: pt.seed,
        accuracy: None,
        timings: Timings::default(),
        sampled_column_norms: None,
        effective_rank: None,
        error: None,
    };
    let outcome = match work {
        Workload::Images { train, test } => image_point(spec, train, test, pt, &mut rec),
        Workload::Synthetic => synthetic_point(spec, pt, &mut rec),
    };
    match outcome {
        Ok(acc) => rec.accuracy = Some(acc),
        Err(e) => rec.error = Some(e.to_string()),
    }
    rec
}

fn seconds(t: Instant) -> f64 {
    t.elapsed().as_secs_f64()
}

/// Design matrix in the container the method samples from.
enum Design {
    Tree(SegTreeMatrix),
    Dense(DenseMatrix),
}

impl Design {
    fn matrix(&self) -> &DenseMatrix {
        match self {
            Self::Tree(t) => t.matrix(),
            Self::Dense(x) => x,
        }
    }
}

struct Fitted {
    model: elm::ElmModel,
    draw: Option<SampleDraw>,
    design: Design,
    rank: usize,
}

/// Featurize, (tree), factorize, solve. Adds to `t`.
fn fit(
    spec: &ExperimentSpec,
    fm: elm::FeatureMap,
    train: &Dataset,
    pt: SpecPoint,
    salt: u64,
    t: &mut Timings,
) -> Result<Fitted> {
    let clock = Instant::now();
    let x = elm::design_matrix(&fm, train)?;
    t.featurize_s += seconds(clock);

    let design = match pt.method {
        Method::Sampled(Strategy::Norm) => {
            let clock = Instant::now();
            let tree = SegTreeMatrix::from_dense(x)?;
            t.tree_build_s += seconds(clock);
            Design::Tree(tree)
        }
        _ => Design::Dense(x),
    };

    let clock = Instant::now();
    let (factors, draw): (LowRankFactors, Option<SampleDraw>) = match pt.method {
        Method::Exact => (truncate(&svd_leading(design.matrix(), pt.k)?, pt.k)?, None),
        Method::Sampled(strategy) => {
            let mut cfg = SketchConfig::new(pt.k, pt.p, strategy, pt.seed ^ salt);
            cfg.rcond = spec.rcond;
            let sk = match &design {
                Design::Tree(tree) => sketch::sketch(tree, &cfg)?,
                Design::Dense(x) => sketch::sketch(x, &cfg)?,
            };
            (sk.factors, Some(sk.draw))
        }
    };
    t.factorize_s += seconds(clock);

    let clock = Instant::now();
    let pinv = truncated_pinv(&factors, pt.k, spec.rcond)?;
    let rank = pinv.rank();
    let model = elm::train(fm, train, &pinv)?;
    t.solve_s += seconds(clock);
    Ok(Fitted {
        model,
        draw,
        design,
        rank,
    })
}

fn check_rank(pt: SpecPoint, rows: usize, cols: usize) -> Result<()> {
    if pt.k > rows.min(cols) {
        return Err(Error::RankTooLarge { rank: pt.k, rows, cols });
    }
    Ok(())
}

fn image_point(
    spec: &ExperimentSpec,
    train: &Dataset,
    test: &Dataset,
    pt: SpecPoint,
    rec: &mut RunRecord,
) -> Result<f64> {
    check_rank(pt, train.len(), pt.m)?;
    let start = Instant::now();
    let mut t = Timings::default();
    let mut frng = rng::stream(pt.seed, streams::FEATURES);
    let fm = elm::init_features(train.dim(), pt.m, &mut frng)?;
    let mut fitted = fit(spec, fm, train, pt, 0, &mut t)?;

    if spec.kind.optimizes() {
        let clock = Instant::now();
        let mut orng = rng::stream(pt.seed, streams::OPTIMIZER);
        let fm = elm::optimize_features(&fitted.model, train, &spec.optimizer, &mut orng)?;
        t.optimize_s = seconds(clock);
        // retrain on a fresh draw over the optimized design
        fitted = fit(spec, fm, train, pt, 0x5eed, &mut t)?;
    }
    t.total_s = seconds(start);

    if spec.kind == ExperimentKind::SampledNorms {
        rec.sampled_column_norms = fitted.draw.as_ref().map(|d| column_norms(fitted.design.matrix(), &d.col_idx));
    }
    if fitted.rank < pt.k {
        rec.effective_rank = Some(fitted.rank);
    }
    rec.timings = t;
    fitted.model.accuracy(test)
}

fn synthetic_point(spec: &ExperimentSpec, pt: SpecPoint, rec: &mut RunRecord) -> Result<f64> {
    if spec.kind == ExperimentKind::OptimizedCompare {
        return Err(Error::InvalidParameter(
            "optimizedCompare needs an image dataset".into(),
        ));
    }
    check_rank(pt, spec.synthetic_rows, pt.m)?;
    let mut srng = rng::stream(pt.seed, streams::SYNTH);
    let x = datasets::synth_lowrank(
        spec.synthetic_rows,
        pt.m,
        spec.synthetic_rank,
        spec.synthetic_noise,
        &mut srng,
    )?;
    let start = Instant::now();
    let mut t = Timings::default();
    let (approx, draw, design) = match pt.method {
        Method::Exact => {
            let clock = Instant::now();
            let f = truncate(&svd_leading(&x, pt.k)?, pt.k)?;
            t.factorize_s = seconds(clock);
            (f.to_dense(), None, x)
        }
        Method::Sampled(strategy) => {
            let cfg = SketchConfig::new(pt.k, pt.p, strategy, pt.seed);
            let (sk, design) = if strategy == Strategy::Norm {
                let clock = Instant::now();
                let tree = SegTreeMatrix::from_dense(x)?;
                t.tree_build_s = seconds(clock);
                let clock = Instant::now();
                let sk = sketch::sketch(&tree, &cfg)?;
                t.factorize_s = seconds(clock);
                (sk, tree.into_matrix())
            } else {
                let clock = Instant::now();
                let sk = sketch::sketch(&x, &cfg)?;
                t.factorize_s = seconds(clock);
                (sk, x)
            };
            if sk.factors.rank() < pt.k {
                rec.effective_rank = Some(sk.factors.rank());
            }
            (sk.factors.to_dense(), Some(sk.draw), design)
        }
    };
    t.total_s = seconds(start);
    rec.timings = t;
    if spec.kind == ExperimentKind::SampledNorms {
        rec.sampled_column_norms = draw.map(|d| column_norms(&design, &d.col_idx));
    }
    Ok(approx.sub(&design)?.frobenius_norm() / design.frobenius_norm())
}

/// `‖X(:, j)‖` for each listed column.
pub fn column_norms(x: &DenseMatrix, cols: &[usize]) -> Vec<f64> {
    let all = x.col_norms_sq();
    cols.iter().map(|&j| all[j].sqrt()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Json,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            _ => Err(Error::InvalidParameter(format!("unknown format '{s}'"))),
        }
    }
}

pub const CSV_HEADER: [&str; 13] = [
    "kind",
    "dataset",
    "M",
    "K",
    "P",
    "strategy",
    "seed",
    "accuracy",
    "featurize_s",
    "treeBuild_s",
    "factorize_s",
    "solve_s",
    "total_s",
];

/// CSV with the fixed [`CSV_HEADER`] columns (failed points leave
/// `accuracy` empty), or pretty JSON mirroring the records.
pub fn write_report<W: Write>(r: &RunReport, format: ReportFormat, out: W) -> Result<()> {
    match format {
        ReportFormat::Json => serde_json::to_writer_pretty(out, r)?,
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(CSV_HEADER)?;
            for rec in &r.records {
                let t = &rec.timings;
                w.write_record([
                    rec.kind.to_string(),
                    rec.dataset.to_string(),
                    rec.m.to_string(),
                    rec.k.to_string(),
                    rec.p.to_string(),
                    rec.strategy.to_string(),
                    rec.seed.to_string(),
                    rec.accuracy.map(|a| a.to_string()).unwrap_or_default(),
                    t.featurize_s.to_string(),
                    t.tree_build_s.to_string(),
                    t.factorize_s.to_string(),
                    t.solve_s.to_string(),
                    t.total_s.to_string(),
                ])?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

pub fn emit_report(r: &RunReport, format: ReportFormat, path: impl AsRef<Path>) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_report(r, format, &mut f)?;
    f.flush()?;
    Ok(())
}

/// Row of a CSV report read back.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct CsvRow {
    pub kind: String,
    pub dataset: String,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "P")]
    pub p: usize,
    pub strategy: String,
    pub seed: u64,
    pub accuracy: Option<f64>,
    pub featurize_s: f64,
    #[serde(rename = "treeBuild_s")]
    pub tree_build_s: f64,
    pub factorize_s: f64,
    pub solve_s: f64,
    pub total_s: f64,
}

pub fn read_csv_report<R: std::io::Read>(input: R) -> Result<Vec<CsvRow>> {
    let mut r = csv::Reader::from_reader(input);
    let mut rows = Vec::new();
    for row in r.deserialize() {
        rows.push(row?);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synth_spec(kind: ExperimentKind) -> ExperimentSpec {
        ExperimentSpec {
            kind,
            dataset: DatasetKind::Synthetic,
            m: vec![40],
            k: vec![5],
            p: vec![20],
            seeds: vec![1, 2],
            synthetic_rows: 30,
            ..Default::default()
        }
    }

    #[test]
    fn points_are_canonical_and_exact_kinds_collapse() {
        let mut s = synth_spec(ExperimentKind::SweepRank);
        s.p = vec![10, 20];
        let pts = s.points();
        assert_eq!(pts.len(), 2);
        assert!(pts.iter().all(|p| p.method == Method::Exact && p.p == 0));

        s.kind = ExperimentKind::CompareSampling;
        s.strategies = vec![Strategy::Uniform, Strategy::Norm];
        let pts = s.points();
        assert_eq!(pts.len(), 8);
        let mut sorted = pts.clone();
        sorted.sort();
        assert_eq!(pts, sorted);
    }

    #[test]
    fn synthetic_sweep_rank_is_exact() {
        let r = run_experiment(&synth_spec(ExperimentKind::SweepRank)).unwrap();
        assert!(r.all_succeeded());
        for rec in &r.records {
            assert!(rec.accuracy.unwrap() < 1e-8);
        }
    }

    #[test]
    fn jobs_do_not_change_results() {
        let mut s = synth_spec(ExperimentKind::CompareSampling);
        let a = run_experiment(&s).unwrap();
        s.jobs = 3;
        let b = run_experiment(&s).unwrap();
        let acc = |r: &RunReport| r.records.iter().map(|x| (x.point(), x.accuracy)).collect::<Vec<_>>();
        assert_eq!(acc(&a), acc(&b));
    }

    #[test]
    fn failing_point_is_recorded() {
        let mut s = synth_spec(ExperimentKind::CompareSampling);
        s.k = vec![5, 50];
        let r = run_experiment(&s).unwrap();
        assert!(!r.all_succeeded());
        assert!(r.records.iter().any(|x| x.k == 5 && x.succeeded()));
        assert!(r.records.iter().filter(|x| x.k == 50).all(|x| !x.succeeded()));
    }

    #[test]
    fn empty_csv_is_header_only() {
        let mut buf = Vec::new();
        write_report(&RunReport::default(), ReportFormat::Csv, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), format!("{}\n", CSV_HEADER.join(",")));
    }

    #[test]
    fn spec_json_defaults_and_names() {
        let s: ExperimentSpec =
            serde_json::from_str(r#"{"kind":"sweepSamples","dataset":"synthetic","P":[10,20]}"#).unwrap();
        assert_eq!(s.kind, ExperimentKind::SweepSamples);
        assert_eq!(s.p, vec![10, 20]);
        assert_eq!(s.m, vec![1000]);
        assert_eq!("sweep-nodes".parse::<ExperimentKind>().unwrap(), ExperimentKind::SweepNodes);
    }

    #[test]
    fn missing_data_dir() {
        let s = ExperimentSpec {
            data_dir: Some(PathBuf::from("/nonexistent/sketchlearn")),
            ..Default::default()
        };
        assert!(matches!(run_experiment(&s), Err(Error::DatasetMissing(_))));
    }
}
