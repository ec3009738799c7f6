use super::{check_word, cosine_distance, AnalysisError, Histogram};
use crate::factorization::CoverModel;
use crate::matrix::normalized;

/// Mean cosine distance between the covariate-specific embeddings of word `i`,
/// over all unordered covariate pairs.
pub fn specificity(model: &CoverModel, i: usize) -> Result<f64, AnalysisError> {
    check_word(model, i)?;
    let m = model.m();
    if m < 2 {
        return Err(AnalysisError::TooFewCovariates(m));
    }
    let v = model.word_vectors.row(i);
    let units = (0..m)
        .map(|k| {
            let e = crate::matrix::hadamard(model.covariate_weights.row(k), v);
            normalized(&e).ok_or(AnalysisError::ZeroEmbedding { word: i, covariate: k })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut total = 0.0;
    let mut pairs = 0usize;
    for a in 0..m {
        for b in a + 1..m {
            total += cosine_distance(&units[a], &units[b]);
            pairs += 1;
        }
    }
    Ok(total / pairs as f64)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpecificityHistogram {
    pub histogram: Histogram,
    /// Per-word specificity; `None` for words with a zero covariate embedding.
    pub values: Vec<Option<f64>>,
    pub degenerate: usize,
    /// Mean over the marker words that have a defined value.
    pub marker_mean: Option<f64>,
}

pub fn specificity_histogram(
    model: &CoverModel,
    edges: Vec<f64>,
    markers: &[usize],
) -> Result<SpecificityHistogram, AnalysisError> {
    if model.m() < 2 {
        return Err(AnalysisError::TooFewCovariates(model.m()));
    }
    for &w in markers {
        check_word(model, w)?;
    }
    let mut histogram = Histogram::new(edges)?;
    let values: Vec<Option<f64>> = (0..model.n()).map(|i| specificity(model, i).ok()).collect();
    let mut degenerate = 0;
    for v in &values {
        match v {
            Some(x) => histogram.add(*x),
            None => degenerate += 1,
        }
    }
    let marked: Vec<f64> = markers.iter().filter_map(|&w| values[w]).collect();
    let marker_mean = (!marked.is_empty()).then(|| marked.iter().sum::<f64>() / marked.len() as f64);
    Ok(SpecificityHistogram {
        histogram,
        values,
        degenerate,
        marker_mean,
    })
}
