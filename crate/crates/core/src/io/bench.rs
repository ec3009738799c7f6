use std::fs;
use std::path::Path;

use super::{io_error, parse_f64, CodecError};
use crate::eval::{CategoryBenchmark, SimilarityBenchmark};

fn fields<'a>(path: &Path, text: &'a str, arity: usize) -> Result<Vec<(usize, Vec<&'a str>)>, CodecError> {
    let file = path.display().to_string();
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> = line.split('\t').collect();
        if parts.len() != arity {
            return Err(CodecError::Dimension {
                file,
                line: idx + 1,
                expected: arity,
                found: parts.len(),
            });
        }
        out.push((idx + 1, parts));
    }
    Ok(out)
}

/// Lines of `word1<TAB>word2<TAB>score`; blank lines and `#` comments skipped.
pub fn read_similarity_benchmark(path: &Path) -> Result<SimilarityBenchmark, CodecError> {
    let text = fs::read_to_string(path).map_err(io_error(path))?;
    let file = path.display().to_string();
    let mut pairs = Vec::new();
    for (line, p) in fields(path, &text, 3)? {
        pairs.push((p[0].to_lowercase(), p[1].to_lowercase(), parse_f64(p[2].trim(), &file, line)?));
    }
    SimilarityBenchmark::new(pairs).map_err(|e| CodecError::Format(e.to_string()))
}

/// Lines of `word<TAB>category`.
pub fn read_category_benchmark(path: &Path) -> Result<CategoryBenchmark, CodecError> {
    let text = fs::read_to_string(path).map_err(io_error(path))?;
    let labels = fields(path, &text, 2)?
        .into_iter()
        .map(|(_, p)| (p[0].to_lowercase(), p[1].trim().to_string()))
        .collect();
    CategoryBenchmark::new(labels).map_err(|e| CodecError::Format(e.to_string()))
}
