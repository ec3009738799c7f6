use std::collections::{BTreeMap, HashMap};
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{io_error, parse_f64, parse_usize, tensor::write_tensor, CodecError, TensorFormat};
use crate::eval::SyntheticInstance;
use crate::factorization::{CoverModel, CovariateInit, TrainConfig};
use crate::matrix::Matrix;

const FORMAT: &str = "cover-model 1";

/// Files written into a model bundle directory.
pub const BUNDLE_FILES: [&str; 5] = ["meta.txt", "words.txt", "covariates.txt", "biases.txt", "loss.csv"];

/// A trained model with the names and settings needed to interpret it.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelBundle {
    pub words: Vec<String>,
    pub covariates: Vec<String>,
    pub model: CoverModel,
    pub config: TrainConfig,
    pub loss_trace: Vec<f64>,
}

impl ModelBundle {
    pub fn word_id(&self, word: &str) -> Option<usize> {
        self.words.iter().position(|w| w == word)
    }

    pub fn covariate_id(&self, name: &str) -> Option<usize> {
        self.covariates.iter().position(|c| c == name)
    }
}

fn config_pairs(config: &TrainConfig) -> Vec<(&'static str, String)> {
    let init = match config.covariate_init {
        CovariateInit::AbsUnit { scale } => format!("abs-unit {scale}"),
        CovariateInit::NearOnes { spread } => format!("near-ones {spread}"),
    };
    vec![
        ("d", config.d.to_string()),
        ("learning_rate", config.learning_rate.to_string()),
        ("epochs", config.epochs.to_string()),
        ("adam_beta1", config.adam_beta1.to_string()),
        ("adam_beta2", config.adam_beta2.to_string()),
        ("adam_eps", config.adam_eps.to_string()),
        ("x_max", config.x_max.to_string()),
        ("alpha", config.alpha.to_string()),
        ("seed", config.seed.to_string()),
        ("freeze_covariates", config.freeze_covariates.to_string()),
        ("deterministic", config.deterministic.to_string()),
        ("covariate_init", init),
        ("batch_size", config.batch_size.map_or("none".to_string(), |b| b.to_string())),
    ]
}

fn config_from(meta: &BTreeMap<String, String>) -> Result<TrainConfig, CodecError> {
    let get = |k: &str| meta.get(k).ok_or_else(|| CodecError::Metadata(format!("missing key '{k}'")));
    let num = |k: &str| -> Result<f64, CodecError> {
        get(k)?.parse().map_err(|_| CodecError::Metadata(format!("bad value for '{k}'")))
    };
    let int = |k: &str| -> Result<u64, CodecError> {
        get(k)?.parse().map_err(|_| CodecError::Metadata(format!("bad value for '{k}'")))
    };
    let flag = |k: &str| -> Result<bool, CodecError> {
        get(k)?.parse().map_err(|_| CodecError::Metadata(format!("bad value for '{k}'")))
    };
    let init = get("covariate_init")?;
    let covariate_init = match init.split_once(' ') {
        Some(("abs-unit", s)) => CovariateInit::AbsUnit {
            scale: s.parse().map_err(|_| CodecError::Metadata("bad covariate_init".into()))?,
        },
        Some(("near-ones", s)) => CovariateInit::NearOnes {
            spread: s.parse().map_err(|_| CodecError::Metadata("bad covariate_init".into()))?,
        },
        _ => return Err(CodecError::Metadata(format!("bad covariate_init '{init}'"))),
    };
    let batch_size = match get("batch_size")?.as_str() {
        "none" => None,
        s => Some(s.parse().map_err(|_| CodecError::Metadata("bad batch_size".into()))?),
    };
    Ok(TrainConfig {
        d: int("d")? as usize,
        learning_rate: num("learning_rate")?,
        epochs: int("epochs")? as usize,
        adam_beta1: num("adam_beta1")?,
        adam_beta2: num("adam_beta2")?,
        adam_eps: num("adam_eps")?,
        x_max: num("x_max")?,
        alpha: num("alpha")?,
        seed: int("seed")?,
        freeze_covariates: flag("freeze_covariates")?,
        deterministic: flag("deterministic")?,
        covariate_init,
        batch_size,
    })
}

fn check_name(kind: &str, name: &str) -> Result<(), CodecError> {
    if name.is_empty() || name.chars().any(char::is_whitespace) {
        return Err(CodecError::Format(format!("{kind} name '{name}' is empty or contains whitespace")));
    }
    Ok(())
}

fn write_rows(path: &Path, names: &[String], rows: &Matrix) -> Result<(), CodecError> {
    let mut w = BufWriter::new(File::create(path).map_err(io_error(path))?);
    let mut write = || -> std::io::Result<()> {
        for (name, row) in names.iter().zip(rows.iter_rows()) {
            write!(w, "{name}")?;
            for x in row {
                write!(w, " {x}")?;
            }
            writeln!(w)?;
        }
        w.flush()
    };
    write().map_err(io_error(path))
}

/// Writes the bundle into `dir`, creating it if needed.
pub fn write_model(dir: &Path, bundle: &ModelBundle) -> Result<(), CodecError> {
    let model = &bundle.model;
    if bundle.words.len() != model.n() || bundle.covariates.len() != model.m() {
        return Err(CodecError::Metadata(format!(
            "{} words and {} covariates for an n={}, m={} model",
            bundle.words.len(),
            bundle.covariates.len(),
            model.n(),
            model.m()
        )));
    }
    for w in &bundle.words {
        check_name("word", w)?;
    }
    for c in &bundle.covariates {
        check_name("covariate", c)?;
    }
    fs::create_dir_all(dir).map_err(io_error(dir))?;

    let meta_path = dir.join("meta.txt");
    let mut meta = format!("format = {FORMAT}\nn = {}\nm = {}\n", model.n(), model.m());
    for (k, v) in config_pairs(&bundle.config) {
        meta.push_str(&format!("{k} = {v}\n"));
    }
    fs::write(&meta_path, meta).map_err(io_error(&meta_path))?;

    write_rows(&dir.join("words.txt"), &bundle.words, &model.word_vectors)?;
    write_rows(&dir.join("covariates.txt"), &bundle.covariates, &model.covariate_weights)?;

    let bias_path = dir.join("biases.txt");
    let mut w = BufWriter::new(File::create(&bias_path).map_err(io_error(&bias_path))?);
    let mut write_biases = || -> std::io::Result<()> {
        for (i, word) in bundle.words.iter().enumerate() {
            for (k, cov) in bundle.covariates.iter().enumerate() {
                writeln!(w, "{word} {cov} {}", model.biases[(i, k)])?;
            }
        }
        w.flush()
    };
    write_biases().map_err(io_error(&bias_path))?;

    let loss_path = dir.join("loss.csv");
    let mut loss = String::from("epoch,objective\n");
    for (epoch, value) in bundle.loss_trace.iter().enumerate() {
        loss.push_str(&format!("{epoch},{value}\n"));
    }
    fs::write(&loss_path, loss).map_err(io_error(&loss_path))
}

fn read_lines(path: &Path) -> Result<Vec<String>, CodecError> {
    let file = File::open(path).map_err(io_error(path))?;
    BufReader::new(file)
        .lines()
        .collect::<Result<Vec<_>, _>>()
        .map_err(io_error(path))
}

fn read_rows(path: &Path, file: &str, expected_rows: usize, d: usize) -> Result<(Vec<String>, Matrix), CodecError> {
    let mut names = Vec::with_capacity(expected_rows);
    let mut data = Vec::with_capacity(expected_rows * d);
    for (idx, line) in read_lines(path)?.iter().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split(' ');
        let name = parts.next().unwrap_or_default().to_string();
        let values: Vec<&str> = parts.collect();
        if values.len() != d {
            return Err(CodecError::Dimension {
                file: file.into(),
                line: line_no,
                expected: d,
                found: values.len(),
            });
        }
        for v in values {
            data.push(parse_f64(v, file, line_no)?);
        }
        names.push(name);
    }
    if names.len() != expected_rows {
        return Err(CodecError::Metadata(format!(
            "{file} has {} rows, metadata says {expected_rows}",
            names.len()
        )));
    }
    Ok((names, Matrix::from_vec(expected_rows, d, data)))
}

pub fn read_model(dir: &Path) -> Result<ModelBundle, CodecError> {
    let mut meta = BTreeMap::new();
    for (idx, line) in read_lines(&dir.join("meta.txt"))?.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (k, v) = line.split_once(" = ").ok_or_else(|| CodecError::Parse {
            file: "meta.txt".into(),
            line: idx + 1,
            msg: format!("expected 'key = value', found '{line}'"),
        })?;
        meta.insert(k.trim().to_string(), v.trim().to_string());
    }
    if meta.get("format").map(String::as_str) != Some(FORMAT) {
        return Err(CodecError::Format(format!("meta.txt does not declare '{FORMAT}'")));
    }
    let n = parse_usize(meta.get("n").map_or("", String::as_str), "meta.txt", 0)?;
    let m = parse_usize(meta.get("m").map_or("", String::as_str), "meta.txt", 0)?;
    let config = config_from(&meta)?;
    let d = config.d;

    let (words, word_vectors) = read_rows(&dir.join("words.txt"), "words.txt", n, d)?;
    let (covariates, covariate_weights) = read_rows(&dir.join("covariates.txt"), "covariates.txt", m, d)?;
    let word_ids: HashMap<&str, usize> = words.iter().enumerate().map(|(i, w)| (w.as_str(), i)).collect();
    let cov_ids: HashMap<&str, usize> = covariates.iter().enumerate().map(|(k, c)| (c.as_str(), k)).collect();
    if word_ids.len() != n || cov_ids.len() != m {
        return Err(CodecError::Metadata("duplicate word or covariate names".into()));
    }

    let mut biases = Matrix::zeros(n, m);
    let mut seen = vec![false; n * m];
    for (idx, line) in read_lines(&dir.join("biases.txt"))?.iter().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(' ').collect();
        if parts.len() != 3 {
            return Err(CodecError::Dimension {
                file: "biases.txt".into(),
                line: line_no,
                expected: 3,
                found: parts.len(),
            });
        }
        let unknown = |kind, name: &str| CodecError::UnknownName {
            file: "biases.txt".into(),
            line: line_no,
            kind,
            name: name.to_string(),
        };
        let i = *word_ids.get(parts[0]).ok_or_else(|| unknown("word", parts[0]))?;
        let k = *cov_ids.get(parts[1]).ok_or_else(|| unknown("covariate", parts[1]))?;
        if std::mem::replace(&mut seen[i * m + k], true) {
            return Err(CodecError::Parse {
                file: "biases.txt".into(),
                line: line_no,
                msg: format!("bias for ({}, {}) given twice", parts[0], parts[1]),
            });
        }
        biases[(i, k)] = parse_f64(parts[2], "biases.txt", line_no)?;
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(CodecError::Metadata(format!(
            "biases.txt lacks ({}, {})",
            words[missing / m],
            covariates[missing % m]
        )));
    }

    let mut loss_trace = Vec::new();
    let loss_path = dir.join("loss.csv");
    if loss_path.exists() {
        for (idx, line) in read_lines(&loss_path)?.iter().enumerate().skip(1) {
            if line.trim().is_empty() {
                continue;
            }
            let value = line.split_once(',').map_or(line.as_str(), |(_, v)| v);
            loss_trace.push(parse_f64(value, "loss.csv", idx + 1)?);
        }
    }

    let model = CoverModel::new(word_vectors, covariate_weights, biases)
        .map_err(|e| CodecError::Metadata(e.to_string()))?;
    Ok(ModelBundle {
        words,
        covariates,
        model,
        config,
        loss_trace,
    })
}

/// Tensor file, planted model bundle and zero mask for a synthetic instance.
///
/// Words are named `w0, w1, …` and covariates `c0, c1, …`.
pub fn write_synthetic(dir: &Path, instance: &SyntheticInstance) -> Result<(), CodecError> {
    fs::create_dir_all(dir).map_err(io_error(dir))?;
    write_tensor(&instance.tensor, &dir.join("cooc.txt"), TensorFormat::Text)?;
    let bundle = ModelBundle {
        words: (0..instance.params.n).map(|i| format!("w{i}")).collect(),
        covariates: (0..instance.params.m).map(|k| format!("c{k}")).collect(),
        model: instance.planted.clone(),
        config: TrainConfig {
            d: instance.params.d,
            seed: instance.params.seed,
            ..TrainConfig::default()
        },
        loss_trace: Vec::new(),
    };
    write_model(&dir.join("planted"), &bundle)?;
    let rows: Vec<Vec<String>> = instance
        .mask
        .iter()
        .map(|(k, t)| vec![k.to_string(), t.to_string()])
        .collect();
    super::write_csv(&dir.join("mask.csv"), &["covariate", "dimension"], &rows)
}
