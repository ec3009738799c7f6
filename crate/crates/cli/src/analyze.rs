use std::path::PathBuf;

use anyhow::{anyhow, bail, Result};
use clap::{Subcommand, ValueEnum};

use cover::analysis::{
    analogy_rank, analogy_report, drift_ranking, nearest_covariates, pca_2d, sparsity_report, specificity_histogram,
    top_words_for_dimension, CovariateMetric, Histogram, Weighting,
};
use cover::io::{read_model, write_csv, write_histogram_csv, ModelBundle};

use crate::output::Outputs;
use crate::settings::Settings;
use crate::ModelIo;

#[derive(Subcommand)]
pub enum AnalyzeCommand {
    /// Near-zero coordinates of every covariate weight vector
    Sparsity {
        #[command(flatten)]
        io: ModelIo,
        /// Magnitude below which a coordinate counts as zero
        #[arg(long, default_value_t = 1e-10)]
        threshold: f64,
    },
    /// Mean pairwise cosine distance between each word's covariate embeddings
    Specificity {
        #[command(flatten)]
        io: ModelIo,
        /// Histogram bins over [0, 2]
        #[arg(long, default_value_t = 20)]
        bins: usize,
        /// Comma-separated words whose mean specificity is reported
        #[arg(long, value_delimiter = ',')]
        markers: Vec<String>,
    },
    /// Words with the largest normalized weight on one dimension
    Topics {
        #[command(flatten)]
        io: ModelIo,
        /// Dimension index (required)
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long, default_value_t = 10)]
        top: usize,
    },
    /// Words moving closest to and furthest from a word under one covariate
    Drift {
        #[command(flatten)]
        io: ModelIo,
        /// Anchor word (required)
        #[arg(long)]
        word: Option<String>,
        /// Covariate name (required)
        #[arg(long)]
        covariate: Option<String>,
        #[arg(long, default_value_t = 10)]
        top: usize,
    },
    /// Rank completions d of a:b :: c:d
    Analogy {
        #[command(flatten)]
        io: ModelIo,
        #[arg(long)]
        a: Option<String>,
        #[arg(long)]
        b: Option<String>,
        #[arg(long)]
        c: Option<String>,
        /// Rank under this covariate only; omit both this and --base for a cross-covariate report
        #[arg(long, conflicts_with = "base")]
        covariate: Option<String>,
        /// Rank under the base embedding
        #[arg(long)]
        base: bool,
        /// Only consider words within this Euclidean distance of c
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long, default_value_t = 10)]
        top: usize,
    },
    /// 2-D principal component projection of the covariate weight vectors
    Pca {
        #[command(flatten)]
        io: ModelIo,
    },
    /// Other covariates ordered by distance of their weight vectors
    Neighbors {
        #[command(flatten)]
        io: ModelIo,
        /// Covariate name (required)
        #[arg(long)]
        covariate: Option<String>,
        #[arg(long, value_enum, default_value_t = Metric::Cosine)]
        metric: Metric,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Metric {
    Cosine,
    Euclidean,
}

pub fn word(bundle: &ModelBundle, w: &str) -> Result<usize> {
    bundle.word_id(w).ok_or_else(|| anyhow!("unknown word '{w}'"))
}

pub fn covariate(bundle: &ModelBundle, c: &str) -> Result<usize> {
    bundle.covariate_id(c).ok_or_else(|| anyhow!("unknown covariate '{c}'"))
}

pub fn run(cmd: &AnalyzeCommand, s: &Settings) -> Result<()> {
    let model_dir: PathBuf = s.get("model")?;
    let out_dir: PathBuf = s.get("out")?;
    let bundle = read_model(&model_dir)?;
    let model = &bundle.model;
    let name = |i: usize| bundle.words[i].clone();
    let cov_name = |k: usize| bundle.covariates[k].clone();
    let mut out = Outputs::create(&out_dir)?;

    match cmd {
        AnalyzeCommand::Sparsity { threshold, .. } => {
            let r = sparsity_report(model, *threshold)?;
            let rows: Vec<Vec<String>> = (0..model.m())
                .map(|k| {
                    let dims: Vec<String> = r.sparse_sets[k].iter().map(usize::to_string).collect();
                    vec![cov_name(k), r.counts[k].to_string(), dims.join(";")]
                })
                .collect();
            write_csv(&out.path("sparsity.csv"), &["covariate", "sparse_count", "sparse_dimensions"], &rows)?;
            write_histogram_csv(&out.path("sparsity_magnitudes.csv"), &r.magnitudes)?;
            println!("mean sparse coordinates per covariate: {}", r.mean_count);
            match r.mean_overlap {
                Some(o) => println!("mean pairwise overlap of sparse sets: {o}"),
                None => println!("mean pairwise overlap of sparse sets: undefined (fewer than 2 covariates)"),
            }
        }
        AnalyzeCommand::Specificity { bins, markers, .. } => {
            let ids = markers.iter().map(|w| word(&bundle, w)).collect::<Result<Vec<_>>>()?;
            let edges = Histogram::uniform(0.0, 2.0, *bins)?.edges;
            let h = specificity_histogram(model, edges, &ids)?;
            let rows: Vec<Vec<String>> = h
                .values
                .iter()
                .enumerate()
                .map(|(i, v)| vec![name(i), v.map_or(String::new(), |x| x.to_string())])
                .collect();
            write_csv(&out.path("specificity.csv"), &["word", "specificity"], &rows)?;
            write_histogram_csv(&out.path("specificity_histogram.csv"), &h.histogram)?;
            let mut ranked: Vec<(usize, f64)> =
                h.values.iter().enumerate().filter_map(|(i, v)| v.map(|x| (i, x))).collect();
            ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            println!("words with undefined specificity: {}", h.degenerate);
            if let Some(m) = h.marker_mean {
                println!("marker mean: {m}");
            }
            for (i, x) in ranked.iter().take(10) {
                println!("{}\t{x:.6}", name(*i));
            }
        }
        AnalyzeCommand::Topics { top, .. } => {
            let dim: usize = s.get("dim")?;
            let t = top_words_for_dimension(model, dim, *top)?;
            let rows: Vec<Vec<String>> = t
                .ranked
                .iter()
                .enumerate()
                .map(|(r, (i, x))| vec![(r + 1).to_string(), name(*i), x.to_string()])
                .collect();
            write_csv(&out.path("topics.csv"), &["rank", "word", "value"], &rows)?;
            for row in &rows {
                println!("{}\t{}\t{}", row[0], row[1], row[2]);
            }
        }
        AnalyzeCommand::Drift { top, .. } => {
            let i = word(&bundle, &s.get::<String>("word")?)?;
            let k = covariate(&bundle, &s.get::<String>("covariate")?)?;
            let d = drift_ranking(model, i, k, *top)?;
            let mut rows = Vec::new();
            for (label, list) in [("closer", &d.closer), ("further", &d.further)] {
                for (r, (j, ratio)) in list.iter().enumerate() {
                    rows.push(vec![label.to_string(), (r + 1).to_string(), name(*j), ratio.to_string()]);
                }
            }
            write_csv(&out.path("drift.csv"), &["direction", "rank", "word", "ratio"], &rows)?;
            for row in &rows {
                println!("{}\t{}\t{}\t{}", row[0], row[1], row[2], row[3]);
            }
            if !d.skipped.is_empty() {
                println!("skipped {} words with undefined ratios", d.skipped.len());
            }
        }
        AnalyzeCommand::Analogy { base, delta, top, .. } => {
            let a = word(&bundle, &s.get::<String>("a")?)?;
            let b = word(&bundle, &s.get::<String>("b")?)?;
            let c = word(&bundle, &s.get::<String>("c")?)?;
            let cov: Option<String> = s.opt("covariate")?;
            let weighting = match (&cov, base) {
                (Some(cname), _) => Some(Weighting::Covariate(covariate(&bundle, cname)?)),
                (None, true) => Some(Weighting::Base),
                (None, false) => None,
            };
            match weighting {
                Some(w) => {
                    let ranked = analogy_rank(model, a, b, c, w, *delta)?;
                    let rows: Vec<Vec<String>> = ranked
                        .iter()
                        .map(|cand| vec![cand.rank.to_string(), name(cand.word), cand.score.to_string()])
                        .collect();
                    write_csv(&out.path("analogy.csv"), &["rank", "word", "score"], &rows)?;
                    for row in rows.iter().take(*top) {
                        println!("{}\t{}\t{}", row[0], row[1], row[2]);
                    }
                }
                None => {
                    if model.m() < 2 {
                        bail!("a cross-covariate analogy report needs at least 2 covariates; pass --covariate or --base");
                    }
                    let report = analogy_report(model, a, b, c, *delta)?;
                    let mut header = vec!["word".to_string()];
                    header.extend(bundle.covariates.iter().map(|c| format!("rank_{c}")));
                    header.push("variance".into());
                    let header: Vec<&str> = header.iter().map(String::as_str).collect();
                    let rows: Vec<Vec<String>> = report
                        .iter()
                        .map(|r| {
                            let mut row = vec![name(r.word)];
                            row.extend(r.ranks.iter().map(usize::to_string));
                            row.push(r.variance.to_string());
                            row
                        })
                        .collect();
                    write_csv(&out.path("analogy.csv"), &header, &rows)?;
                    for row in rows.iter().take(*top) {
                        println!("{}", row.join("\t"));
                    }
                }
            }
        }
        AnalyzeCommand::Pca { .. } => {
            let p = pca_2d(&model.covariate_weights)?;
            let rows: Vec<Vec<String>> = (0..model.m())
                .map(|k| vec![cov_name(k), p.coords[(k, 0)].to_string(), p.coords[(k, 1)].to_string()])
                .collect();
            write_csv(&out.path("pca.csv"), &["covariate", "pc1", "pc2"], &rows)?;
            println!("explained variance: {:.6} {:.6}", p.explained[0], p.explained[1]);
            for row in &rows {
                println!("{}\t{}\t{}", row[0], row[1], row[2]);
            }
        }
        AnalyzeCommand::Neighbors { metric, .. } => {
            let k = covariate(&bundle, &s.get::<String>("covariate")?)?;
            let metric = match metric {
                Metric::Cosine => CovariateMetric::Cosine,
                Metric::Euclidean => CovariateMetric::Euclidean,
            };
            let ranked = nearest_covariates(model, k, metric)?;
            let rows: Vec<Vec<String>> = ranked
                .iter()
                .enumerate()
                .map(|(r, (q, dist))| vec![(r + 1).to_string(), cov_name(*q), dist.to_string()])
                .collect();
            write_csv(&out.path("neighbors.csv"), &["rank", "covariate", "distance"], &rows)?;
            for row in &rows {
                println!("{}\t{}\t{}", row[0], row[1], row[2]);
            }
        }
    }
    out.commit();
    Ok(())
}
