mod analyze;
mod build_cooc;
mod eval;
mod output;
mod settings;
mod train;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{Context, Result};
use clap::{ArgMatches, Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};

use cover::factorization::CovariateInit;
use settings::{read_config, Settings};

#[derive(Parser)]
#[command(name = "cover", version, about = "Covariate-specific word embeddings from co-occurrence tensors")]
struct Cli {
    /// Worker threads; falls back to COVER_THREADS, then all cores
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Accumulate gradients in fixed sequential order
    #[arg(long, global = true)]
    deterministic: bool,
    /// Run config file of `key = value` lines; flags take precedence
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Count co-occurrences in `<input>/<covariate>/<document>` text files
    BuildCooc(build_cooc::BuildArgs),
    /// Fit word vectors, covariate weights and biases to a tensor
    Train(train::TrainArgs),
    /// Inspect a trained model bundle
    #[command(subcommand)]
    Analyze(analyze::AnalyzeCommand),
    /// Score embeddings against benchmarks and synthetic ground truth
    #[command(subcommand)]
    Eval(eval::EvalCommand),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum InitKind {
    /// |random unit vector| times --init-scale
    AbsUnit,
    /// 1 + --init-scale * N(0, 1), clipped at 0
    NearOnes,
}

impl FromStr for InitKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        <Self as ValueEnum>::from_str(s, true)
    }
}

impl InitKind {
    pub fn with_scale(self, scale: f64) -> CovariateInit {
        match self {
            InitKind::AbsUnit => CovariateInit::AbsUnit { scale },
            InitKind::NearOnes => CovariateInit::NearOnes { spread: scale },
        }
    }
}

/// Model bundle input and output directory shared by the analysis commands.
#[derive(Args)]
pub struct ModelIo {
    /// Trained model bundle directory (required)
    #[arg(long)]
    model: Option<PathBuf>,
    /// Output directory (required)
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Innermost subcommand matches.
fn leaf(matches: &ArgMatches) -> &ArgMatches {
    match matches.subcommand() {
        Some((_, sub)) => leaf(sub),
        None => matches,
    }
}

fn thread_count(s: &Settings) -> Result<Option<usize>> {
    if let Some(t) = s.opt::<usize>("threads")? {
        return Ok(Some(t));
    }
    match std::env::var("COVER_THREADS") {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .with_context(|| format!("COVER_THREADS must be a positive integer, got '{v}'")),
        Err(_) => Ok(None),
    }
}

fn run(matches: &ArgMatches) -> Result<()> {
    let cli = Cli::from_arg_matches(matches)?;
    let file = match &cli.config {
        Some(path) => read_config(path)?,
        None => BTreeMap::new(),
    };
    let s = Settings::new(&file, leaf(matches));
    if let Some(n) = thread_count(&s)? {
        anyhow::ensure!(n >= 1, "thread count must be at least 1");
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    match cli.command {
        Command::BuildCooc(_) => build_cooc::run(&s),
        Command::Train(_) => train::run(&s),
        Command::Analyze(cmd) => analyze::run(&cmd, &s),
        Command::Eval(cmd) => eval::run(&cmd, &s),
    }
}

fn main() -> ExitCode {
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let matches = Cli::command().get_matches();
    match run(&matches) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
