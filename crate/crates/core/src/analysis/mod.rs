//! Read-only analyses of a trained model.

mod analogy;
mod drift;
mod pca;
mod sparsity;
mod specificity;
mod topics;

pub use analogy::{analogy_rank, analogy_report, analogy_score, AnalogyCandidate, CrossCovariateRank};
pub use drift::{difference_profile, drift_ranking, drift_ratio, DriftResult};
pub use pca::{nearest_covariates, pca_2d, symmetric_eigen, CovariateMetric, Pca2d};
pub use sparsity::{sparse_coordinates, sparsity_report, SparsityReport, ZERO_THRESHOLD};
pub use specificity::{specificity, specificity_histogram, SpecificityHistogram};
pub use topics::{top_words_for_dimension, TopWords};

use thiserror::Error;

use crate::factorization::CoverModel;

#[derive(Debug, Error, PartialEq)]
pub enum AnalysisError {
    #[error("covariate index {k} out of range (m = {m})")]
    CovariateOutOfRange { k: usize, m: usize },
    #[error("word index {i} out of range (n = {n})")]
    WordOutOfRange { i: usize, n: usize },
    #[error("dimension {t} out of range (d = {d})")]
    DimensionOutOfRange { t: usize, d: usize },
    #[error("word {word} has a zero embedding under covariate {covariate}")]
    ZeroEmbedding { word: usize, covariate: usize },
    #[error("zero vector: {0}")]
    ZeroVector(String),
    #[error("words {0} and {1} have identical normalized base vectors")]
    IdenticalWords(usize, usize),
    #[error("need at least 2 covariates, model has {0}")]
    TooFewCovariates(usize),
    #[error("need at least 2 points, got {0}")]
    TooFewPoints(usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Which embedding an analysis reads: a covariate-specific one or the base `V`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Weighting {
    Covariate(usize),
    /// Equivalent to an all-ones covariate weight vector.
    Base,
}

impl Weighting {
    fn check(self, model: &CoverModel) -> Result<(), AnalysisError> {
        match self {
            Weighting::Covariate(k) => check_covariate(model, k),
            Weighting::Base => Ok(()),
        }
    }

    /// Embedding of word `i` under this weighting.
    pub fn embed(self, model: &CoverModel, i: usize) -> Vec<f64> {
        let v = model.word_vectors.row(i);
        match self {
            Weighting::Covariate(k) => crate::matrix::hadamard(model.covariate_weights.row(k), v),
            Weighting::Base => v.to_vec(),
        }
    }
}

/// Bin edges and counts; bin `b` covers `[edges[b], edges[b + 1])`.
#[derive(Clone, Debug, PartialEq)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
    /// Values below the first edge or at/above the last.
    pub outside: usize,
}

impl Histogram {
    pub fn new(edges: Vec<f64>) -> Result<Self, AnalysisError> {
        if edges.len() < 2 || edges.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(AnalysisError::InvalidArgument(
                "histogram edges must be at least two strictly increasing values".into(),
            ));
        }
        let bins = edges.len() - 1;
        Ok(Self {
            edges,
            counts: vec![0; bins],
            outside: 0,
        })
    }

    /// Evenly spaced edges over `[low, high]`.
    pub fn uniform(low: f64, high: f64, bins: usize) -> Result<Self, AnalysisError> {
        if bins == 0 {
            return Err(AnalysisError::InvalidArgument("bins must be >= 1".into()));
        }
        let step = (high - low) / bins as f64;
        let mut edges: Vec<f64> = (0..bins).map(|b| low + step * b as f64).collect();
        edges.push(high);
        Self::new(edges)
    }

    pub fn add(&mut self, x: f64) {
        // partition_point gives the number of edges <= x
        let pos = self.edges.partition_point(|&e| e <= x);
        if pos == 0 || pos == self.edges.len() {
            self.outside += 1;
        } else {
            self.counts[pos - 1] += 1;
        }
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum::<usize>() + self.outside
    }
}

fn check_covariate(model: &CoverModel, k: usize) -> Result<(), AnalysisError> {
    if k >= model.m() {
        return Err(AnalysisError::CovariateOutOfRange { k, m: model.m() });
    }
    Ok(())
}

fn check_word(model: &CoverModel, i: usize) -> Result<(), AnalysisError> {
    if i >= model.n() {
        return Err(AnalysisError::WordOutOfRange { i, n: model.n() });
    }
    Ok(())
}

/// `1 - cos(a, b)` computed as half the squared distance between unit vectors,
/// which is exactly zero for parallel inputs.
fn cosine_distance(a_unit: &[f64], b_unit: &[f64]) -> f64 {
    let sq: f64 = a_unit.iter().zip(b_unit).map(|(x, y)| (x - y) * (x - y)).sum();
    sq / 2.0
}
