use super::{check_covariate, check_word, AnalysisError};
use crate::factorization::CoverModel;
use crate::matrix::{euclidean, hadamard, normalized};

/// `‖û_i − û_j‖ / ‖v̂_i − v̂_j‖`, with `v̂` the unit base vectors and `û` the unit
/// covariate-specific vectors `c_k ⊙ v`.
pub fn drift_ratio(model: &CoverModel, i: usize, j: usize, k: usize) -> Result<f64, AnalysisError> {
    check_word(model, i)?;
    check_word(model, j)?;
    check_covariate(model, k)?;
    let base = |w: usize| {
        normalized(model.word_vectors.row(w)).ok_or_else(|| AnalysisError::ZeroVector(format!("word {w}")))
    };
    let specific = |w: usize| {
        normalized(&hadamard(model.covariate_weights.row(k), model.word_vectors.row(w)))
            .ok_or(AnalysisError::ZeroEmbedding { word: w, covariate: k })
    };
    let denom = euclidean(&base(i)?, &base(j)?);
    if denom == 0.0 {
        return Err(AnalysisError::IdenticalWords(i, j));
    }
    Ok(euclidean(&specific(i)?, &specific(j)?) / denom)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DriftResult {
    pub anchor: usize,
    pub covariate: usize,
    /// Smallest ratios first: words pulled toward the anchor under the covariate.
    pub closer: Vec<(usize, f64)>,
    /// Largest ratios first: words pushed away.
    pub further: Vec<(usize, f64)>,
    /// Words for which the ratio is undefined.
    pub skipped: Vec<usize>,
}

pub fn drift_ranking(model: &CoverModel, i: usize, k: usize, top_n: usize) -> Result<DriftResult, AnalysisError> {
    check_word(model, i)?;
    check_covariate(model, k)?;
    let mut ratios = Vec::with_capacity(model.n());
    let mut skipped = Vec::new();
    for j in (0..model.n()).filter(|&j| j != i) {
        match drift_ratio(model, i, j, k) {
            Ok(r) => ratios.push((j, r)),
            Err(_) => skipped.push(j),
        }
    }
    let mut closer = ratios.clone();
    closer.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    closer.truncate(top_n);
    let mut further = ratios;
    further.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    further.truncate(top_n);
    Ok(DriftResult {
        anchor: i,
        covariate: k,
        closer,
        further,
        skipped,
    })
}

/// `|c_kt (v_it − v_jt)|` per dimension: where the covariate keeps or erases
/// the difference between two words.
pub fn difference_profile(model: &CoverModel, i: usize, j: usize, k: usize) -> Result<Vec<f64>, AnalysisError> {
    check_word(model, i)?;
    check_word(model, j)?;
    check_covariate(model, k)?;
    let c = model.covariate_weights.row(k);
    let vi = model.word_vectors.row(i);
    let vj = model.word_vectors.row(j);
    Ok(c.iter().zip(vi.iter().zip(vj)).map(|(ct, (a, b))| (ct * (a - b)).abs()).collect())
}
