//! Verification oracles and benchmark metrics.

mod benchmark;
mod kmeans;
mod synthetic;

pub use benchmark::{
    cluster_purity, similarity_eval, spearman, CategoryBenchmark, SimilarityBenchmark, SimilarityScore, WordVectors,
};
pub use kmeans::{kmeans, KMeansResult};
pub use synthetic::{generate_synthetic, reconstruction_rmse, subsample_slices, SyntheticInstance, SyntheticParams};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("planted parameters produced a non-finite count at ({i}, {j}, {k})")]
    NonFiniteCount { i: usize, j: usize, k: usize },
    #[error("tensor is empty")]
    EmptyTensor,
    #[error("covariate {k} out of range (m = {m})")]
    CovariateOutOfRange { k: usize, m: usize },
    #[error("source slice {0} is empty")]
    EmptySlice(usize),
    #[error("scores are constant")]
    ConstantScores,
    #[error("score lists differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least {needed} items, have {have}")]
    TooFew { needed: usize, have: usize },
    #[error("duplicate benchmark pair ({0}, {1})")]
    DuplicatePair(String, String),
    #[error(transparent)]
    Model(#[from] crate::factorization::ModelError),
    #[error(transparent)]
    Tensor(#[from] crate::corpus::TensorError),
}
