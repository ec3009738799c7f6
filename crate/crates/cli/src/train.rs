use std::path::{Path, PathBuf};

use anyhow::{bail, Result};
use clap::Args;

use cover::factorization::{train, TrainConfig};
use cover::io::{read_tensor, read_vocab, write_model, ModelBundle, TensorFormat, BUNDLE_FILES};
use cover::CoocTensor;

use crate::output::Outputs;
use crate::settings::Settings;
use crate::InitKind;

#[derive(Args)]
pub struct TrainArgs {
    /// Tensor file; `.bin` is read as binary, anything else as text (required)
    #[arg(long)]
    tensor: Option<PathBuf>,
    /// Vocabulary file written by build-cooc (required)
    #[arg(long)]
    vocab: Option<PathBuf>,
    /// Output directory for the model bundle (required)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Embedding dimension
    #[arg(long, default_value_t = 100)]
    dim: usize,
    #[arg(long, default_value_t = 1e-5)]
    learning_rate: f64,
    #[arg(long, default_value_t = 100)]
    epochs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Weighting cap
    #[arg(long, default_value_t = 100.0)]
    x_max: f64,
    /// Weighting exponent
    #[arg(long, default_value_t = 0.75)]
    alpha: f64,
    #[arg(long, default_value_t = 0.9)]
    adam_beta1: f64,
    #[arg(long, default_value_t = 0.999)]
    adam_beta2: f64,
    #[arg(long, default_value_t = 1e-8)]
    adam_eps: f64,
    /// Shuffled minibatches of this many entries instead of full-batch epochs
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long, value_enum, default_value_t = InitKind::AbsUnit)]
    covariate_init: InitKind,
    /// Scale (abs-unit) or spread (near-ones) of the covariate initialization
    #[arg(long, default_value_t = 1.0)]
    init_scale: f64,
    /// Freeze covariate weights at all-ones (plain GloVe)
    #[arg(long)]
    glove: bool,
}

pub fn train_config(s: &Settings) -> Result<TrainConfig> {
    let init: InitKind = s.get("covariate_init")?;
    let config = TrainConfig {
        d: s.get("dim")?,
        learning_rate: s.get("learning_rate")?,
        epochs: s.get("epochs")?,
        adam_beta1: s.get("adam_beta1")?,
        adam_beta2: s.get("adam_beta2")?,
        adam_eps: s.get("adam_eps")?,
        x_max: s.get("x_max")?,
        alpha: s.get("alpha")?,
        seed: s.get("seed")?,
        freeze_covariates: s.flag("glove")?,
        deterministic: s.flag("deterministic")?,
        covariate_init: init.with_scale(s.get("init_scale")?),
        batch_size: s.opt("batch_size")?,
    };
    config.validate()?;
    Ok(config)
}

pub fn load_tensor(path: &Path) -> Result<CoocTensor> {
    Ok(read_tensor(path, TensorFormat::from_path(path))?)
}

pub fn run(s: &Settings) -> Result<()> {
    let tensor_path: PathBuf = s.get("tensor")?;
    let vocab_path: PathBuf = s.get("vocab")?;
    let out_dir: PathBuf = s.get("out")?;
    let config = train_config(s)?;
    let tensor = load_tensor(&tensor_path)?;
    let vocab = read_vocab(&vocab_path)?;
    if vocab.len() != tensor.n() || vocab.covariates().len() != tensor.m() {
        bail!(
            "vocabulary has {} words and {} covariates but the tensor is {}×{}×{}",
            vocab.len(),
            vocab.covariates().len(),
            tensor.n(),
            tensor.n(),
            tensor.m()
        );
    }
    let outcome = train(&tensor, &config)?;
    println!("objective: initial {:.6e}, final {:.6e}", outcome.initial_loss(), outcome.final_loss());

    let mut out = Outputs::create(&out_dir)?;
    for f in BUNDLE_FILES {
        out.path(f);
    }
    let bundle = ModelBundle {
        words: vocab.words().to_vec(),
        covariates: vocab.covariates().to_vec(),
        model: outcome.model,
        config,
        loss_trace: outcome.loss_trace,
    };
    write_model(&out_dir, &bundle)?;
    out.commit();
    Ok(())
}
