//! The covariate model, its weighted least-squares objective, and training.
//!
//! Word `i` under covariate `k` is embedded as `c_k ⊙ v_i`; the model predicts
//! `log A[i][j][k]` by `(c_k ⊙ v_i)·(c_k ⊙ v_j) + b[i][k] + b[j][k]`. The loss
//! weights each stored entry by `f(A) = (min(A, x_max) / x_max)^alpha` and sums
//! only over stored (positive) cells. Covariate weights `C` stay non-negative.

mod adam;
mod train;

pub use adam::{adam_step, AdamState};
pub use train::{train, train_from, TrainOutcome};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use thiserror::Error;

use crate::corpus::{CoocTensor, Entry};
use crate::matrix::Matrix;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("covariate index {k} out of range (m = {m})")]
    CovariateOutOfRange { k: usize, m: usize },
    #[error("weight function needs a positive count, got {0}")]
    NonPositiveCount(f64),
    #[error("non-finite gradient in {0}")]
    NonFiniteGradient(&'static str),
    #[error("loss became non-finite at epoch {epoch}")]
    Diverged { epoch: usize },
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("cannot train on an empty tensor")]
    EmptyTensor,
}

/// How covariate weight vectors start out.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CovariateInit {
    /// `scale · |u|` for a uniformly random unit vector `u`.
    AbsUnit { scale: f64 },
    /// `max(0, 1 + spread · z)` per coordinate with `z` standard normal.
    NearOnes { spread: f64 },
}

impl Default for CovariateInit {
    fn default() -> Self {
        CovariateInit::AbsUnit { scale: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub d: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    pub x_max: f64,
    pub alpha: f64,
    pub seed: u64,
    /// GloVe mode: covariate weights fixed at all-ones and never updated.
    pub freeze_covariates: bool,
    /// Sequential gradient accumulation in sorted-entry order.
    pub deterministic: bool,
    pub covariate_init: CovariateInit,
    /// Entry-shuffled minibatches of this size instead of full-batch epochs.
    pub batch_size: Option<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            d: 100,
            learning_rate: 1e-5,
            epochs: 100,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            x_max: 100.0,
            alpha: 0.75,
            seed: 0,
            freeze_covariates: false,
            deterministic: true,
            covariate_init: CovariateInit::default(),
            batch_size: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |msg: String| Err(ModelError::InvalidConfig(msg));
        if self.d == 0 {
            return bad("d must be >= 1".into());
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning_rate must be positive, got {}", self.learning_rate));
        }
        for (name, b) in [("adam_beta1", self.adam_beta1), ("adam_beta2", self.adam_beta2)] {
            if !(b > 0.0 && b < 1.0) {
                return bad(format!("{name} must lie in (0, 1), got {b}"));
            }
        }
        if !(self.adam_eps > 0.0) {
            return bad(format!("adam_eps must be positive, got {}", self.adam_eps));
        }
        if !(self.x_max > 0.0 && self.x_max.is_finite()) {
            return bad(format!("x_max must be positive, got {}", self.x_max));
        }
        if !self.alpha.is_finite() {
            return bad(format!("alpha must be finite, got {}", self.alpha));
        }
        if self.batch_size == Some(0) {
            return bad("batch_size must be >= 1".into());
        }
        match self.covariate_init {
            CovariateInit::AbsUnit { scale } if !(scale >= 0.0 && scale.is_finite()) => {
                bad(format!("covariate init scale must be >= 0, got {scale}"))
            }
            CovariateInit::NearOnes { spread } if !(spread >= 0.0 && spread.is_finite()) => {
                bad(format!("covariate init spread must be >= 0, got {spread}"))
            }
            _ => Ok(()),
        }
    }
}

/// Word vectors `V` (n×d), non-negative covariate weights `C` (m×d), biases `B` (n×m).
#[derive(Clone, Debug, PartialEq)]
pub struct CoverModel {
    pub word_vectors: Matrix,
    pub covariate_weights: Matrix,
    pub biases: Matrix,
}

impl CoverModel {
    pub fn new(word_vectors: Matrix, covariate_weights: Matrix, biases: Matrix) -> Result<Self, ModelError> {
        let (n, d) = word_vectors.shape();
        let (m, dc) = covariate_weights.shape();
        if dc != d {
            return Err(ModelError::DimensionMismatch(format!(
                "word vectors have d={d}, covariate weights d={dc}"
            )));
        }
        if biases.shape() != (n, m) {
            return Err(ModelError::DimensionMismatch(format!(
                "biases are {:?}, expected ({n}, {m})",
                biases.shape()
            )));
        }
        Ok(Self {
            word_vectors,
            covariate_weights,
            biases,
        })
    }

    pub fn n(&self) -> usize {
        self.word_vectors.rows()
    }

    pub fn m(&self) -> usize {
        self.covariate_weights.rows()
    }

    pub fn d(&self) -> usize {
        self.word_vectors.cols()
    }

    pub fn check_tensor(&self, tensor: &CoocTensor) -> Result<(), ModelError> {
        if tensor.n() != self.n() || tensor.m() != self.m() {
            return Err(ModelError::DimensionMismatch(format!(
                "model is n={}, m={} but tensor is n={}, m={}",
                self.n(),
                self.m(),
                tensor.n(),
                tensor.m()
            )));
        }
        Ok(())
    }

    fn check_covariate(&self, k: usize) -> Result<(), ModelError> {
        if k >= self.m() {
            return Err(ModelError::CovariateOutOfRange { k, m: self.m() });
        }
        Ok(())
    }

    /// Model prediction minus `log_a` for one cell.
    fn residual(&self, i: usize, j: usize, k: usize, log_a: f64) -> f64 {
        let c = self.covariate_weights.row(k);
        let vi = self.word_vectors.row(i);
        let vj = self.word_vectors.row(j);
        let inner: f64 = c
            .iter()
            .zip(vi.iter().zip(vj))
            .map(|(ct, (a, b))| (ct * a) * (ct * b))
            .sum();
        inner + self.biases[(i, k)] + self.biases[(j, k)] - log_a
    }
}

/// Covariate-specific embedding: row `i` is `c_k ⊙ v_i`.
pub fn covariate_embedding(model: &CoverModel, k: usize) -> Result<Matrix, ModelError> {
    model.check_covariate(k)?;
    let c = model.covariate_weights.row(k);
    let mut out = model.word_vectors.clone();
    for r in 0..out.rows() {
        for (x, ct) in out.row_mut(r).iter_mut().zip(c) {
            *x *= ct;
        }
    }
    Ok(out)
}

pub fn weight_fn(x: f64, x_max: f64, alpha: f64) -> Result<f64, ModelError> {
    if !(x > 0.0) {
        return Err(ModelError::NonPositiveCount(x));
    }
    Ok(weight_unchecked(x, x_max, alpha))
}

#[inline]
fn weight_unchecked(x: f64, x_max: f64, alpha: f64) -> f64 {
    (x.min(x_max) / x_max).powf(alpha)
}

/// A stored entry with its loss weight and regression target precomputed.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Term {
    pub(crate) i: usize,
    pub(crate) j: usize,
    pub(crate) k: usize,
    pub(crate) weight: f64,
    pub(crate) log_a: f64,
}

pub(crate) fn prepare(entries: &[Entry], config: &TrainConfig) -> Vec<Term> {
    entries
        .iter()
        .map(|e| Term {
            i: e.i as usize,
            j: e.j as usize,
            k: e.k as usize,
            weight: weight_unchecked(e.value, config.x_max, config.alpha),
            log_a: e.value.ln(),
        })
        .collect()
}

fn terms_sum(model: &CoverModel, terms: &[Term]) -> f64 {
    terms
        .iter()
        .map(|t| {
            let r = model.residual(t.i, t.j, t.k, t.log_a);
            t.weight * r * r
        })
        .sum()
}

/// Full objective over sorted terms, summed slice by slice so it equals
/// the sum of per-slice objectives exactly.
pub(crate) fn terms_objective(model: &CoverModel, terms: &[Term]) -> f64 {
    let mut total = 0.0;
    let mut start = 0;
    while start < terms.len() {
        let k = terms[start].k;
        let end = start + terms[start..].iter().take_while(|t| t.k == k).count();
        total += terms_sum(model, &terms[start..end]);
        start = end;
    }
    total
}

pub fn objective(model: &CoverModel, tensor: &CoocTensor, config: &TrainConfig) -> Result<f64, ModelError> {
    model.check_tensor(tensor)?;
    Ok(terms_objective(model, &prepare(tensor.entries(), config)))
}

/// Objective restricted to covariate slice `k`.
pub fn slice_objective(
    model: &CoverModel,
    tensor: &CoocTensor,
    k: usize,
    config: &TrainConfig,
) -> Result<f64, ModelError> {
    model.check_tensor(tensor)?;
    model.check_covariate(k)?;
    Ok(terms_sum(model, &prepare(tensor.slice(k), config)))
}

/// Partial derivatives of the objective, same shapes as the model.
#[derive(Clone, Debug, PartialEq)]
pub struct GradientSet {
    pub word_vectors: Matrix,
    pub covariate_weights: Matrix,
    pub biases: Matrix,
}

impl GradientSet {
    pub fn zeros_like(model: &CoverModel) -> Self {
        Self {
            word_vectors: Matrix::zeros(model.n(), model.d()),
            covariate_weights: Matrix::zeros(model.m(), model.d()),
            biases: Matrix::zeros(model.n(), model.m()),
        }
    }

    fn merge(&mut self, other: &GradientSet) {
        self.word_vectors.add_assign(&other.word_vectors);
        self.covariate_weights.add_assign(&other.covariate_weights);
        self.biases.add_assign(&other.biases);
    }

    /// Name of the first block holding a non-finite value.
    pub fn non_finite_block(&self) -> Option<&'static str> {
        if !self.word_vectors.is_finite() {
            Some("word_vectors")
        } else if !self.covariate_weights.is_finite() {
            Some("covariate_weights")
        } else if !self.biases.is_finite() {
            Some("biases")
        } else {
            None
        }
    }
}

fn accumulate_terms(model: &CoverModel, terms: &[Term], grads: &mut GradientSet) {
    let d = model.d();
    for t in terms {
        let g = 2.0 * t.weight * model.residual(t.i, t.j, t.k, t.log_a);
        grads.biases[(t.i, t.k)] += g;
        grads.biases[(t.j, t.k)] += g;
        let c = model.covariate_weights.row(t.k);
        for s in 0..d {
            let vi = model.word_vectors[(t.i, s)];
            let vj = model.word_vectors[(t.j, s)];
            let c2 = c[s] * c[s];
            grads.word_vectors[(t.i, s)] += g * c2 * vj;
            grads.word_vectors[(t.j, s)] += g * c2 * vi;
            grads.covariate_weights[(t.k, s)] += g * 2.0 * c[s] * vi * vj;
        }
    }
}

/// Gradient over a list of terms.
///
/// Deterministic mode accumulates in term order; otherwise the terms are cut
/// into one contiguous shard per worker and the shards are merged in order.
pub(crate) fn terms_gradients(model: &CoverModel, terms: &[Term], deterministic: bool) -> GradientSet {
    let mut grads = GradientSet::zeros_like(model);
    let shards = rayon::current_num_threads();
    if deterministic || shards <= 1 || terms.len() < 2 * shards {
        accumulate_terms(model, terms, &mut grads);
        return grads;
    }
    let chunk = terms.len().div_ceil(shards);
    let partial: Vec<GradientSet> = terms
        .par_chunks(chunk)
        .map(|part| {
            let mut g = GradientSet::zeros_like(model);
            accumulate_terms(model, part, &mut g);
            g
        })
        .collect();
    for p in &partial {
        grads.merge(p);
    }
    grads
}

pub fn gradients(model: &CoverModel, tensor: &CoocTensor, config: &TrainConfig) -> Result<GradientSet, ModelError> {
    model.check_tensor(tensor)?;
    Ok(terms_gradients(model, &prepare(tensor.entries(), config), config.deterministic))
}

fn random_unit(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
        if let Some(u) = crate::matrix::normalized(&v) {
            return u;
        }
    }
}

/// Random unit word vectors, non-negative covariate weights, zero biases.
pub fn init_model(n: usize, m: usize, d: usize, seed: u64, covariate_init: CovariateInit) -> CoverModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = Matrix::zeros(n, d);
    for i in 0..n {
        v.row_mut(i).copy_from_slice(&random_unit(&mut rng, d));
    }
    let mut c = Matrix::zeros(m, d);
    for k in 0..m {
        let row: Vec<f64> = match covariate_init {
            CovariateInit::AbsUnit { scale } => random_unit(&mut rng, d).iter().map(|x| scale * x.abs()).collect(),
            CovariateInit::NearOnes { spread } => (0..d)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    (1.0 + spread * z).max(0.0)
                })
                .collect(),
        };
        c.row_mut(k).copy_from_slice(&row);
    }
    CoverModel {
        word_vectors: v,
        covariate_weights: c,
        biases: Matrix::zeros(n, m),
    }
}
