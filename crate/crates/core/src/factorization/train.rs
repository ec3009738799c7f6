use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{
    adam_step, init_model, prepare, terms_gradients, terms_objective, AdamState, CoverModel, ModelError, Term,
    TrainConfig,
};
use crate::corpus::CoocTensor;

#[derive(Clone, Debug, PartialEq)]
pub struct TrainOutcome {
    pub model: CoverModel,
    /// Objective before the first epoch and after each epoch (`epochs + 1` values).
    pub loss_trace: Vec<f64>,
}

impl TrainOutcome {
    pub fn initial_loss(&self) -> f64 {
        self.loss_trace[0]
    }

    pub fn final_loss(&self) -> f64 {
        *self.loss_trace.last().expect("trace always holds the initial loss")
    }
}

/// Initializes from `config.seed` and trains.
///
/// In GloVe mode (`freeze_covariates`) the covariate weights start at all-ones.
pub fn train(tensor: &CoocTensor, config: &TrainConfig) -> Result<TrainOutcome, ModelError> {
    config.validate()?;
    let mut model = init_model(tensor.n(), tensor.m(), config.d, config.seed, config.covariate_init);
    if config.freeze_covariates {
        model.covariate_weights.fill(1.0);
    }
    train_from(model, tensor, config)
}

/// Trains starting from `model` for `config.epochs` epochs.
pub fn train_from(mut model: CoverModel, tensor: &CoocTensor, config: &TrainConfig) -> Result<TrainOutcome, ModelError> {
    config.validate()?;
    model.check_tensor(tensor)?;
    if model.d() != config.d {
        return Err(ModelError::DimensionMismatch(format!(
            "model has d={} but config asks for d={}",
            model.d(),
            config.d
        )));
    }
    if tensor.is_empty() {
        return Err(ModelError::EmptyTensor);
    }
    let terms = prepare(tensor.entries(), config);
    let mut state = AdamState::new(&model);
    let mut trace = Vec::with_capacity(config.epochs + 1);
    let initial = terms_objective(&model, &terms);
    if !initial.is_finite() {
        return Err(ModelError::Diverged { epoch: 0 });
    }
    trace.push(initial);

    let mut shuffler = ChaCha8Rng::seed_from_u64(config.seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut order: Vec<usize> = (0..terms.len()).collect();
    let mut batch: Vec<Term> = Vec::new();

    for epoch in 1..=config.epochs {
        let step = match config.batch_size {
            None => {
                let grads = terms_gradients(&model, &terms, config.deterministic);
                adam_step(&mut model, &grads, &mut state, config)
            }
            Some(size) => {
                order.shuffle(&mut shuffler);
                let mut result = Ok(());
                for chunk in order.chunks(size) {
                    batch.clear();
                    batch.extend(chunk.iter().map(|&p| terms[p]));
                    let grads = terms_gradients(&model, &batch, config.deterministic);
                    result = adam_step(&mut model, &grads, &mut state, config);
                    if result.is_err() {
                        break;
                    }
                }
                result
            }
        };
        step.map_err(|e| match e {
            ModelError::NonFiniteGradient(_) => ModelError::Diverged { epoch },
            other => other,
        })?;
        let loss = terms_objective(&model, &terms);
        if !loss.is_finite() {
            return Err(ModelError::Diverged { epoch });
        }
        trace.push(loss);
    }
    Ok(TrainOutcome { model, loss_trace: trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Entry;
    use crate::factorization::CovariateInit;

    fn small_tensor() -> CoocTensor {
        CoocTensor::from_upper(
            4,
            2,
            vec![
                Entry::new(0, 1, 0, 12.0),
                Entry::new(1, 2, 0, 3.0),
                Entry::new(0, 3, 1, 30.0),
                Entry::new(2, 2, 1, 5.0),
                Entry::new(1, 3, 1, 2.0),
            ],
        )
        .unwrap()
    }

    #[test]
    fn zero_epochs_returns_initial_model() {
        let cfg = TrainConfig { d: 3, epochs: 0, seed: 4, ..Default::default() };
        let out = train(&small_tensor(), &cfg).unwrap();
        assert_eq!(out.model, init_model(4, 2, 3, 4, CovariateInit::default()));
        assert_eq!(out.loss_trace.len(), 1);
    }

    #[test]
    fn training_reduces_loss_and_is_reproducible() {
        let cfg = TrainConfig { d: 3, epochs: 200, learning_rate: 0.05, seed: 11, ..Default::default() };
        let a = train(&small_tensor(), &cfg).unwrap();
        assert!(a.final_loss() < a.initial_loss());
        assert_eq!(a.loss_trace.len(), 201);
        let b = train(&small_tensor(), &cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.model.covariate_weights.as_slice().iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn minibatch_mode_trains() {
        let cfg = TrainConfig {
            d: 3,
            epochs: 100,
            learning_rate: 0.05,
            batch_size: Some(3),
            ..Default::default()
        };
        let out = train(&small_tensor(), &cfg).unwrap();
        assert!(out.final_loss() < out.initial_loss());
    }

    #[test]
    fn empty_tensor_rejected() {
        let cfg = TrainConfig { d: 2, ..Default::default() };
        assert_eq!(train(&CoocTensor::empty(2, 1), &cfg), Err(ModelError::EmptyTensor));
    }

    #[test]
    fn divergence_reports_epoch() {
        let cfg = TrainConfig { d: 2, epochs: 5, learning_rate: 1e300, ..Default::default() };
        match train(&small_tensor(), &cfg) {
            Err(ModelError::Diverged { epoch }) => assert!(epoch >= 1),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn frozen_mode_keeps_ones() {
        let cfg = TrainConfig { d: 2, epochs: 10, learning_rate: 0.01, freeze_covariates: true, ..Default::default() };
        let out = train(&small_tensor(), &cfg).unwrap();
        assert!(out.model.covariate_weights.as_slice().iter().all(|&x| x == 1.0));
    }
}
