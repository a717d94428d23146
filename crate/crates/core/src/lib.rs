//! Norm-sampled low-rank SVD over a segment-tree matrix store, and its use
//! for training extreme learning machines through a truncated
//! pseudo-inverse.
//!
//! The pieces, bottom-up:
//!
//! * [`linalg`]: dense matrices, an exact one-sided Jacobi SVD and
//!   truncated pseudo-inverses.
//! * [`segtree`]: a two-level sum tree over squared entries supporting
//!   `O(log)` row and in-row column sampling plus point updates.
//! * [`sketch`]: the sampled SVD (row/column draws, the small `P x P`
//!   matrix, lifting back to full-size factors) with norm-weighted or
//!   uniform sampling.
//! * [`elm`]: random ReLU features, training, prediction and feature
//!   optimization with frozen output weights.
//! * [`datasets`]: MNIST/CIFAR-10 readers and synthetic low-rank matrices.
//! * [`bench`]: the experiment runner and CSV/JSON reports.

pub mod bench;
pub mod datasets;
pub mod elm;
pub mod error;
pub mod linalg;
pub mod rng;
pub mod segtree;
pub mod sketch;

pub use error::{Error, Result};
pub use linalg::{DenseMatrix, LowRankFactors, SvdResult};
pub use segtree::SegTreeMatrix;
pub use sketch::{modfkv, SketchConfig, Strategy};
