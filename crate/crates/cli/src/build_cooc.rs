use std::path::PathBuf;

use anyhow::Result;
use clap::Args;

use cover::corpus::{build, load_corpus_dir, CorpusConfig};
use cover::io::{write_tensor, write_vocab, TensorFormat};

use crate::output::Outputs;
use crate::settings::Settings;

#[derive(Args)]
pub struct BuildArgs {
    /// Corpus root with one subdirectory per covariate (required)
    #[arg(long)]
    input: Option<PathBuf>,
    /// Output directory for vocab.txt and cooc.txt / cooc.bin (required)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Co-occurrence window in tokens
    #[arg(long, default_value_t = 8)]
    window: usize,
    /// Keep at most this many words after dropping the top ones
    #[arg(long)]
    max_vocab: Option<usize>,
    /// Drop this many most frequent words
    #[arg(long, default_value_t = 0)]
    drop_top: usize,
    /// Drop tensor entries whose weighted count is below this
    #[arg(long, default_value_t = 0.0)]
    min_count: f64,
    /// Write the tensor in the binary format
    #[arg(long)]
    binary: bool,
}

pub fn run(s: &Settings) -> Result<()> {
    let input: PathBuf = s.get("input")?;
    let out_dir: PathBuf = s.get("out")?;
    let config = CorpusConfig {
        window: s.get("window")?,
        drop_top_k: s.get("drop_top")?,
        max_vocab: s.opt("max_vocab")?,
        min_count: s.get("min_count")?,
    };
    config.validate()?;
    let corpus = load_corpus_dir(&input)?;
    let (vocab, tensor) = build(&corpus, &config)?;

    let mut out = Outputs::create(&out_dir)?;
    write_vocab(&vocab, &out.path("vocab.txt"))?;
    let (name, format) = if s.flag("binary")? {
        ("cooc.bin", TensorFormat::Binary)
    } else {
        ("cooc.txt", TensorFormat::Text)
    };
    write_tensor(&tensor, &out.path(name), format)?;
    out.commit();
    println!("n = {}, m = {}, nnz = {}", tensor.n(), tensor.m(), tensor.nnz());
    Ok(())
}
