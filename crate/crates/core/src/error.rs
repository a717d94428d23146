use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is empty")]
    EmptyMatrix,
    #[error("matrix contains a non-finite entry")]
    NonFinite,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("index ({row}, {col}) out of range for {rows}x{cols} matrix")]
    IndexOutOfRange {
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },
    #[error("Jacobi SVD did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error("every singular value fell below the rcond threshold")]
    AllSingularValuesFiltered,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("cannot sample from an all-zero matrix")]
    ZeroMatrix,
    #[error("cannot sample a column from zero row {0}")]
    ZeroRow(usize),
    #[error("sampling probability is zero")]
    ZeroProbability,
    #[error("sketch retained {usable} usable singular values, {requested} requested")]
    RankDeficientSketch { requested: usize, usable: usize },
    #[error("norm-weighted sampling requires a segment-tree store")]
    MissingSegmentTree,

    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },
    #[error("feature optimization diverged: loss {loss} vs initial {initial}")]
    Diverged { loss: f64, initial: f64 },

    #[error("bad magic number {found:#010x} (expected {expected:#010x})")]
    BadMagic { expected: u32, found: u32 },
    #[error("image count {images} does not match label count {labels}")]
    CountMismatch { images: usize, labels: usize },
    #[error("truncated file: {0}")]
    TruncatedFile(String),
    #[error("rank {rank} exceeds min({rows}, {cols})")]
    RankTooLarge { rank: usize, rows: usize, cols: usize },
    #[error("dataset files not found under {0}")]
    DatasetMissing(PathBuf),
    #[error("malformed model file: {0}")]
    BadModelFile(String),

    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
