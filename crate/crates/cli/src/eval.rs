use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, Subcommand};

use cover::analysis::{sparsity_report, Weighting, ZERO_THRESHOLD};
use cover::eval::{
    cluster_purity, generate_synthetic, reconstruction_rmse, similarity_eval, subsample_slices, SyntheticParams,
    WordVectors,
};
use cover::factorization::{train, TrainConfig};
use cover::io::{
    read_category_benchmark, read_model, read_similarity_benchmark, write_csv, write_model, write_synthetic,
    write_tensor, ModelBundle, TensorFormat,
};
use cover::Matrix;

use crate::analyze::covariate;
use crate::output::Outputs;
use crate::settings::Settings;
use crate::train::load_tensor;
use crate::{InitKind, ModelIo};

#[derive(Args)]
pub struct BenchArgs {
    #[command(flatten)]
    io: ModelIo,
    /// Benchmark file (required)
    #[arg(long)]
    bench: Option<PathBuf>,
    /// Score covariate-specific vectors instead of the base vectors
    #[arg(long)]
    covariate: Option<String>,
}

#[derive(Subcommand)]
pub enum EvalCommand {
    /// Spearman correlation with a `word1<TAB>word2<TAB>score` benchmark
    Similarity(BenchArgs),
    /// k-means cluster purity against a `word<TAB>category` benchmark
    Purity {
        #[command(flatten)]
        bench: BenchArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        restarts: usize,
    },
    /// Plant a model, train on its tensor and report recovery
    Synth {
        /// Output directory (required)
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 50)]
        n: usize,
        #[arg(long, default_value_t = 4)]
        m: usize,
        #[arg(long, default_value_t = 8)]
        d: usize,
        /// Fraction of each planted weight vector set to zero
        #[arg(long, default_value_t = 0.2)]
        zero_frac: f64,
        /// Standard deviation of noise on log counts
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        /// Seed of the planted instance
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Seed of the trained model's initialization
        #[arg(long, default_value_t = 17)]
        train_seed: u64,
        #[arg(long, default_value_t = 2000)]
        epochs: usize,
        #[arg(long, default_value_t = 0.05)]
        learning_rate: f64,
        #[arg(long, value_enum, default_value_t = InitKind::NearOnes)]
        covariate_init: InitKind,
        #[arg(long, default_value_t = 0.3)]
        init_scale: f64,
    },
    /// Split one slice into copies with identical statistics and count sparse coordinates
    Nullcontrol {
        /// Tensor file (required)
        #[arg(long)]
        tensor: Option<PathBuf>,
        /// Output directory (required)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Covariate index of the slice to subsample
        #[arg(long, default_value_t = 0)]
        slice: usize,
        #[arg(long, default_value_t = 3)]
        copies: usize,
        #[arg(long, default_value_t = 50)]
        dim: usize,
        #[arg(long, default_value_t = 300)]
        epochs: usize,
        #[arg(long, default_value_t = 0.01)]
        learning_rate: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = InitKind::NearOnes)]
        covariate_init: InitKind,
        #[arg(long, default_value_t = 0.3)]
        init_scale: f64,
        #[arg(long, default_value_t = ZERO_THRESHOLD)]
        threshold: f64,
    },
}

fn embedding(bundle: &ModelBundle, cov: Option<&str>) -> Result<WordVectors> {
    let weighting = match cov {
        Some(c) => Weighting::Covariate(covariate(bundle, c)?),
        None => Weighting::Base,
    };
    let rows: Vec<Vec<f64>> = (0..bundle.model.n()).map(|i| weighting.embed(&bundle.model, i)).collect();
    Ok(WordVectors::new(bundle.words.clone(), Matrix::from_rows(&rows)))
}

fn quick_config(s: &Settings, d: usize, seed: u64) -> Result<TrainConfig> {
    let init: InitKind = s.get("covariate_init")?;
    let config = TrainConfig {
        d,
        learning_rate: s.get("learning_rate")?,
        epochs: s.get("epochs")?,
        seed,
        deterministic: s.flag("deterministic")?,
        covariate_init: init.with_scale(s.get("init_scale")?),
        ..TrainConfig::default()
    };
    config.validate()?;
    Ok(config)
}

pub fn run(cmd: &EvalCommand, s: &Settings) -> Result<()> {
    let out_dir: PathBuf = s.get("out")?;
    match cmd {
        EvalCommand::Similarity(args) => {
            let bundle = read_model(&s.get::<PathBuf>("model")?)?;
            let bench = read_similarity_benchmark(&s.get::<PathBuf>("bench")?)?;
            let score = similarity_eval(&embedding(&bundle, args.covariate.as_deref())?, &bench)?;
            let mut out = Outputs::create(&out_dir)?;
            write_csv(
                &out.path("similarity.csv"),
                &["spearman", "coverage", "covered_pairs"],
                &[vec![score.spearman.to_string(), score.coverage.to_string(), score.covered.to_string()]],
            )?;
            out.commit();
            println!("spearman {} (coverage {}, {} pairs)", score.spearman, score.coverage, score.covered);
        }
        EvalCommand::Purity { bench: args, seed, restarts } => {
            let bundle = read_model(&s.get::<PathBuf>("model")?)?;
            let bench = read_category_benchmark(&s.get::<PathBuf>("bench")?)?;
            let purity = cluster_purity(&embedding(&bundle, args.covariate.as_deref())?, &bench, *seed, *restarts)?;
            let mut out = Outputs::create(&out_dir)?;
            write_csv(&out.path("purity.csv"), &["purity"], &[vec![purity.to_string()]])?;
            out.commit();
            println!("purity {purity}");
        }
        EvalCommand::Synth { n, m, d, zero_frac, noise, seed, train_seed, .. } => {
            let inst = generate_synthetic(&SyntheticParams::new(*n, *m, *d, *zero_frac, *noise, *seed))?;
            let config = quick_config(s, *d, *train_seed)?;
            let outcome = train(&inst.tensor, &config)?;
            let rmse = reconstruction_rmse(&outcome.model, &inst.tensor, &config)?;
            let report = sparsity_report(&outcome.model, ZERO_THRESHOLD)?;
            let recovered = inst
                .mask
                .iter()
                .filter(|&&(k, t)| report.sparse_sets[k].contains(&t))
                .count();
            let found: usize = report.counts.iter().sum();

            let mut out = Outputs::create(&out_dir)?;
            write_synthetic(&out.path("synthetic"), &inst)?;
            let bundle = ModelBundle {
                words: (0..*n).map(|i| format!("w{i}")).collect(),
                covariates: (0..*m).map(|k| format!("c{k}")).collect(),
                model: outcome.model,
                config,
                loss_trace: outcome.loss_trace,
            };
            write_model(&out.path("trained"), &bundle)?;
            write_csv(
                &out.path("synth.csv"),
                &["rmse", "planted_zeros", "recovered_zeros", "trained_zeros"],
                &[vec![rmse.to_string(), inst.mask.len().to_string(), recovered.to_string(), found.to_string()]],
            )?;
            out.commit();
            println!("RMSE {rmse:.6}");
            println!(
                "planted zeros {}, recovered {recovered}, zeros in trained weights {found}",
                inst.mask.len()
            );
        }
        EvalCommand::Nullcontrol { slice, copies, dim, seed, threshold, .. } => {
            let tensor = load_tensor(&s.get::<PathBuf>("tensor")?)?;
            let split = subsample_slices(&tensor, *slice, *copies, *seed)?;
            let config = quick_config(s, *dim, *seed)?;
            let outcome = train(&split, &config)?;
            let report = sparsity_report(&outcome.model, *threshold)?;

            let mut out = Outputs::create(&out_dir)?;
            write_tensor(&split, &out.path("subsampled.txt"), TensorFormat::Text)?;
            let rows: Vec<Vec<String>> = (0..*copies)
                .map(|c| {
                    let dims: Vec<String> = report.sparse_sets[c].iter().map(usize::to_string).collect();
                    vec![c.to_string(), report.counts[c].to_string(), dims.join(";")]
                })
                .collect();
            write_csv(&out.path("nullcontrol.csv"), &["copy", "sparse_count", "sparse_dimensions"], &rows)?;
            out.commit();
            println!(
                "objective: initial {:.6e}, final {:.6e}",
                outcome.initial_loss(),
                outcome.final_loss()
            );
            println!("sparse coordinates per copy: {:?}", report.counts);
        }
    }
    Ok(())
}
