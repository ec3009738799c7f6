use super::AnalysisError;
use crate::factorization::CoverModel;
use crate::matrix::norm;

#[derive(Clone, Debug, PartialEq)]
pub struct TopWords {
    pub dimension: usize,
    /// `(word, |v̂_it|)` in descending score, ties by word index.
    pub ranked: Vec<(usize, f64)>,
    /// Words with a zero vector, which have no normalized direction.
    pub skipped: Vec<usize>,
}

/// Words whose unit-normalized vectors are largest in absolute value along `t`.
pub fn top_words_for_dimension(model: &CoverModel, t: usize, top_n: usize) -> Result<TopWords, AnalysisError> {
    let d = model.d();
    if t >= d {
        return Err(AnalysisError::DimensionOutOfRange { t, d });
    }
    let mut ranked = Vec::with_capacity(model.n());
    let mut skipped = Vec::new();
    for (i, v) in model.word_vectors.iter_rows().enumerate() {
        let len = norm(v);
        if len == 0.0 {
            skipped.push(i);
        } else {
            ranked.push((i, (v[t] / len).abs()));
        }
    }
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    ranked.truncate(top_n);
    Ok(TopWords {
        dimension: t,
        ranked,
        skipped,
    })
}
