use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Normal, StandardNormal};

use super::EvalError;
use crate::corpus::{CoocTensor, Entry};
use crate::factorization::{prepare, CoverModel, TrainConfig};
use crate::matrix::{normalized, Matrix};

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticParams {
    pub n: usize,
    pub m: usize,
    pub d: usize,
    /// Fraction of each covariate weight vector forced to exactly zero.
    pub zero_fraction: f64,
    /// Standard deviation of Gaussian noise added to each log count.
    pub noise_sd: f64,
    pub seed: u64,
    /// Norm of every planted word vector.
    pub dispersion: f64,
    /// Mean of the planted biases; shifts every log count by twice this.
    pub bias_mean: f64,
    /// Standard deviation of the planted biases around `bias_mean`.
    pub bias_scale: f64,
}

impl SyntheticParams {
    pub fn new(n: usize, m: usize, d: usize, zero_fraction: f64, noise_sd: f64, seed: u64) -> Self {
        Self {
            n,
            m,
            d,
            zero_fraction,
            noise_sd,
            seed,
            dispersion: 1.0,
            bias_mean: 1.0,
            bias_scale: 0.25,
        }
    }

    /// Number of zeroed coordinates per covariate row.
    pub fn zeros_per_row(&self) -> usize {
        (self.zero_fraction * self.d as f64).round() as usize
    }

    fn validate(&self) -> Result<(), EvalError> {
        let bad = |s: String| Err(EvalError::InvalidParameter(s));
        if self.n < 2 || self.m < 1 || self.d < 1 {
            return bad(format!("need n >= 2, m >= 1, d >= 1; got n={}, m={}, d={}", self.n, self.m, self.d));
        }
        if !(0.0..1.0).contains(&self.zero_fraction) {
            return bad(format!("zero_fraction must lie in [0, 1), got {}", self.zero_fraction));
        }
        if !(self.noise_sd >= 0.0 && self.noise_sd.is_finite()) {
            return bad(format!("noise_sd must be >= 0, got {}", self.noise_sd));
        }
        if !(self.dispersion > 0.0 && self.dispersion.is_finite()) {
            return bad(format!("dispersion must be > 0, got {}", self.dispersion));
        }
        if !(self.bias_scale >= 0.0 && self.bias_scale.is_finite() && self.bias_mean.is_finite()) {
            return bad("bias mean and scale must be finite, scale >= 0".into());
        }
        Ok(())
    }
}

/// A planted model and the tensor it generates.
#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticInstance {
    pub params: SyntheticParams,
    pub planted: CoverModel,
    pub tensor: CoocTensor,
    /// `(k, t)` coordinates of `C*` forced to zero, sorted.
    pub mask: Vec<(usize, usize)>,
}

/// Plants `V*`, `C*`, `B*` and stores `exp(prediction + noise)` for every
/// `i != j` and every covariate.
pub fn generate_synthetic(params: &SyntheticParams) -> Result<SyntheticInstance, EvalError> {
    params.validate()?;
    let SyntheticParams { n, m, d, .. } = *params;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    let mut v = Matrix::zeros(n, d);
    for i in 0..n {
        let raw: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
        let unit = normalized(&raw).unwrap_or_else(|| {
            let mut e = vec![0.0; d];
            e[0] = 1.0;
            e
        });
        for (x, u) in v.row_mut(i).iter_mut().zip(unit) {
            *x = params.dispersion * u;
        }
    }

    let mut c = Matrix::zeros(m, d);
    let mut mask = Vec::new();
    let zeros = params.zeros_per_row();
    let mut dims: Vec<usize> = (0..d).collect();
    for k in 0..m {
        for x in c.row_mut(k) {
            let z: f64 = StandardNormal.sample(&mut rng);
            *x = z.abs();
        }
        dims.shuffle(&mut rng);
        for &t in &dims[..zeros] {
            c[(k, t)] = 0.0;
            mask.push((k, t));
        }
    }
    mask.sort_unstable();

    let bias = Normal::new(params.bias_mean, params.bias_scale)
        .map_err(|e| EvalError::InvalidParameter(e.to_string()))?;
    let mut b = Matrix::zeros(n, m);
    for x in b.as_mut_slice() {
        *x = bias.sample(&mut rng);
    }
    let planted = CoverModel::new(v, c, b)?;

    let noise = Normal::new(0.0, params.noise_sd).map_err(|e| EvalError::InvalidParameter(e.to_string()))?;
    let mut upper = Vec::with_capacity(n * (n - 1) / 2 * m);
    for k in 0..m {
        let ck = planted.covariate_weights.row(k);
        for i in 0..n {
            for j in i + 1..n {
                let vi = planted.word_vectors.row(i);
                let vj = planted.word_vectors.row(j);
                let inner: f64 = ck.iter().zip(vi.iter().zip(vj)).map(|(c, (a, b))| (c * a) * (c * b)).sum();
                let eps = if params.noise_sd > 0.0 { noise.sample(&mut rng) } else { 0.0 };
                let value = (inner + planted.biases[(i, k)] + planted.biases[(j, k)] + eps).exp();
                if !(value > 0.0 && value.is_finite()) {
                    return Err(EvalError::NonFiniteCount { i, j, k });
                }
                upper.push(Entry::new(i, j, k, value));
            }
        }
    }
    let tensor = CoocTensor::from_upper(n, m, upper)?;
    Ok(SyntheticInstance {
        params: params.clone(),
        planted,
        tensor,
        mask,
    })
}

/// Square root of the `f`-weighted mean squared log-residual over stored entries.
pub fn reconstruction_rmse(model: &CoverModel, tensor: &CoocTensor, config: &TrainConfig) -> Result<f64, EvalError> {
    model.check_tensor(tensor)?;
    if tensor.is_empty() {
        return Err(EvalError::EmptyTensor);
    }
    let terms = prepare(tensor.entries(), config);
    let weight_sum: f64 = terms.iter().map(|t| t.weight).sum();
    let objective = crate::factorization::terms_objective(model, &terms);
    Ok((objective / weight_sum).sqrt())
}

/// Splits one slice into `copies` slices by sampling each rounded count multinomially.
///
/// Counts are rounded to the nearest integer (at least 1) first. Only the
/// `i <= j` representative is split; the mirror cell copies it.
pub fn subsample_slices(tensor: &CoocTensor, source_k: usize, copies: usize, seed: u64) -> Result<CoocTensor, EvalError> {
    if source_k >= tensor.m() {
        return Err(EvalError::CovariateOutOfRange { k: source_k, m: tensor.m() });
    }
    if copies < 2 {
        return Err(EvalError::InvalidParameter(format!("copies must be >= 2, got {copies}")));
    }
    let slice = tensor.slice(source_k);
    if slice.is_empty() {
        return Err(EvalError::EmptySlice(source_k));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut upper = Vec::new();
    for e in slice.iter().filter(|e| e.i <= e.j) {
        let total = e.value.round().max(1.0) as u64;
        let mut remaining = total;
        for c in 0..copies {
            let share = if c + 1 == copies {
                remaining
            } else if remaining == 0 {
                0
            } else {
                let p = 1.0 / (copies - c) as f64;
                Binomial::new(remaining, p)
                    .map_err(|err| EvalError::InvalidParameter(err.to_string()))?
                    .sample(&mut rng)
            };
            remaining -= share;
            if share > 0 {
                upper.push(Entry::new(e.i as usize, e.j as usize, c, share as f64));
            }
        }
    }
    Ok(CoocTensor::from_upper(tensor.n(), copies, upper)?)
}
