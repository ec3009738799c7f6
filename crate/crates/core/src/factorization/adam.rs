use super::{CoverModel, GradientSet, ModelError, TrainConfig};
use crate::matrix::Matrix;

/// First and second moment accumulators for every parameter block.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub step: u64,
    first_v: Matrix,
    second_v: Matrix,
    first_c: Matrix,
    second_c: Matrix,
    first_b: Matrix,
    second_b: Matrix,
}

impl AdamState {
    pub fn new(model: &CoverModel) -> Self {
        let (n, m, d) = (model.n(), model.m(), model.d());
        Self {
            step: 0,
            first_v: Matrix::zeros(n, d),
            second_v: Matrix::zeros(n, d),
            first_c: Matrix::zeros(m, d),
            second_c: Matrix::zeros(m, d),
            first_b: Matrix::zeros(n, m),
            second_b: Matrix::zeros(n, m),
        }
    }
}

struct Rates {
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    correction1: f64,
    correction2: f64,
}

fn update_block(params: &mut Matrix, grads: &Matrix, first: &mut Matrix, second: &mut Matrix, r: &Rates) {
    let it = params
        .as_mut_slice()
        .iter_mut()
        .zip(grads.as_slice())
        .zip(first.as_mut_slice().iter_mut().zip(second.as_mut_slice()));
    for ((p, &g), (m1, m2)) in it {
        *m1 = r.beta1 * *m1 + (1.0 - r.beta1) * g;
        *m2 = r.beta2 * *m2 + (1.0 - r.beta2) * g * g;
        let m_hat = *m1 / r.correction1;
        let v_hat = *m2 / r.correction2;
        *p -= r.lr * m_hat / (v_hat.sqrt() + r.eps);
    }
}

/// One bias-corrected Adam update, then projection of `C` onto `C >= 0`.
///
/// With `freeze_covariates` the covariate block and its moments are left alone.
pub fn adam_step(
    model: &mut CoverModel,
    grads: &GradientSet,
    state: &mut AdamState,
    config: &TrainConfig,
) -> Result<(), ModelError> {
    if grads.word_vectors.shape() != model.word_vectors.shape()
        || grads.covariate_weights.shape() != model.covariate_weights.shape()
        || grads.biases.shape() != model.biases.shape()
    {
        return Err(ModelError::DimensionMismatch("gradient shapes do not match model".into()));
    }
    if let Some(block) = grads.non_finite_block() {
        if !(config.freeze_covariates && block == "covariate_weights") {
            return Err(ModelError::NonFiniteGradient(block));
        }
    }
    state.step += 1;
    let t = state.step as i32;
    let rates = Rates {
        lr: config.learning_rate,
        beta1: config.adam_beta1,
        beta2: config.adam_beta2,
        eps: config.adam_eps,
        correction1: 1.0 - config.adam_beta1.powi(t),
        correction2: 1.0 - config.adam_beta2.powi(t),
    };
    update_block(&mut model.word_vectors, &grads.word_vectors, &mut state.first_v, &mut state.second_v, &rates);
    update_block(&mut model.biases, &grads.biases, &mut state.first_b, &mut state.second_b, &rates);
    if !config.freeze_covariates {
        update_block(
            &mut model.covariate_weights,
            &grads.covariate_weights,
            &mut state.first_c,
            &mut state.second_c,
            &rates,
        );
        for x in model.covariate_weights.as_mut_slice() {
            if *x <= 0.0 {
                *x = 0.0;
            }
        }
    }
    Ok(())
}
