//! On-disk formats. Every text format is line-oriented UTF-8 and prints floats
//! with the shortest decimal that parses back to the same bits.

mod bench;
mod model;
mod report;
mod tensor;
mod vocab;

pub use bench::{read_category_benchmark, read_similarity_benchmark};
pub use model::{read_model, write_model, write_synthetic, ModelBundle, BUNDLE_FILES};
pub use report::{write_csv, write_histogram_csv};
pub use tensor::{
    read_tensor, read_tensor_binary, read_tensor_text, write_tensor, write_tensor_binary, write_tensor_text,
    TensorFormat, BINARY_MAGIC, BINARY_VERSION, TEXT_MAGIC,
};
pub use vocab::{read_vocab, write_vocab};

use std::path::Path;

use thiserror::Error;

use crate::corpus::TensorError;

#[derive(Debug, Error)]
pub enum CodecError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("format error: {0}")]
    Format(String),
    #[error("truncated file: {0}")]
    Truncated(String),
    #[error("line {line}: index out of range: {msg}")]
    IndexOutOfRange { line: usize, msg: String },
    #[error("line {line}: value must be positive and finite, got {value}")]
    NonPositiveValue { line: usize, value: f64 },
    #[error("{file} line {line}: expected {expected} values, found {found}")]
    Dimension {
        file: String,
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("{file} line {line}: unknown {kind} '{name}'")]
    UnknownName {
        file: String,
        line: usize,
        kind: &'static str,
        name: String,
    },
    #[error("{file} line {line}: {msg}")]
    Parse { file: String, line: usize, msg: String },
    #[error("metadata: {0}")]
    Metadata(String),
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

pub(crate) fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> CodecError + '_ {
    move |source| CodecError::Io {
        path: path.display().to_string(),
        source,
    }
}

pub(crate) fn parse_f64(s: &str, file: &str, line: usize) -> Result<f64, CodecError> {
    s.parse::<f64>().map_err(|e| CodecError::Parse {
        file: file.to_string(),
        line,
        msg: format!("bad number '{s}': {e}"),
    })
}

pub(crate) fn parse_usize(s: &str, file: &str, line: usize) -> Result<usize, CodecError> {
    s.parse::<usize>().map_err(|e| CodecError::Parse {
        file: file.to_string(),
        line,
        msg: format!("bad integer '{s}': {e}"),
    })
}
