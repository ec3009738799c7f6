use super::{check_word, AnalysisError, Weighting};
use crate::factorization::CoverModel;
use crate::matrix::{cosine, euclidean};

fn difference(model: &CoverModel, w: Weighting, x: usize, y: usize) -> Vec<f64> {
    let ex = w.embed(model, x);
    let ey = w.embed(model, y);
    ex.iter().zip(&ey).map(|(a, b)| a - b).collect()
}

/// Cosine between `e_a − e_b` and `e_c − e_d` under the given weighting.
pub fn analogy_score(
    model: &CoverModel,
    a: usize,
    b: usize,
    c: usize,
    d: usize,
    weighting: Weighting,
) -> Result<f64, AnalysisError> {
    for w in [a, b, c, d] {
        check_word(model, w)?;
    }
    weighting.check(model)?;
    let left = difference(model, weighting, a, b);
    let right = difference(model, weighting, c, d);
    cosine(&left, &right).ok_or_else(|| AnalysisError::ZeroVector(format!("difference vector for ({a},{b}) or ({c},{d})")))
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnalogyCandidate {
    pub word: usize,
    pub score: f64,
    /// 1-based.
    pub rank: usize,
}

/// Scores every word `d ∉ {a, b, c}` and ranks by descending score (ties by index).
///
/// With `delta`, only words whose embedding lies within `delta` of `e_c` compete.
/// Candidates whose difference `e_c − e_d` vanishes are left out.
pub fn analogy_rank(
    model: &CoverModel,
    a: usize,
    b: usize,
    c: usize,
    weighting: Weighting,
    delta: Option<f64>,
) -> Result<Vec<AnalogyCandidate>, AnalysisError> {
    for w in [a, b, c] {
        check_word(model, w)?;
    }
    weighting.check(model)?;
    let left = difference(model, weighting, a, b);
    if left.iter().all(|&x| x == 0.0) {
        return Err(AnalysisError::ZeroVector(format!("difference vector for ({a},{b})")));
    }
    let ec = weighting.embed(model, c);
    let mut scored = Vec::with_capacity(model.n());
    for d in (0..model.n()).filter(|d| ![a, b, c].contains(d)) {
        let ed = weighting.embed(model, d);
        if let Some(limit) = delta {
            if !(euclidean(&ec, &ed) < limit) {
                continue;
            }
        }
        let right: Vec<f64> = ec.iter().zip(&ed).map(|(x, y)| x - y).collect();
        if let Some(score) = cosine(&left, &right) {
            scored.push((d, score));
        }
    }
    scored.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));
    Ok(scored
        .into_iter()
        .enumerate()
        .map(|(r, (word, score))| AnalogyCandidate { word, score, rank: r + 1 })
        .collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct CrossCovariateRank {
    pub word: usize,
    /// Rank under each covariate, in covariate order.
    pub ranks: Vec<usize>,
    /// Population variance of `ranks`.
    pub variance: f64,
}

/// Rank of every candidate `d` under each covariate, most variable first.
///
/// Only words ranked under every covariate are reported.
pub fn analogy_report(
    model: &CoverModel,
    a: usize,
    b: usize,
    c: usize,
    delta: Option<f64>,
) -> Result<Vec<CrossCovariateRank>, AnalysisError> {
    let m = model.m();
    let mut ranks: Vec<Vec<Option<usize>>> = vec![vec![None; m]; model.n()];
    for k in 0..m {
        for cand in analogy_rank(model, a, b, c, Weighting::Covariate(k), delta)? {
            ranks[cand.word][k] = Some(cand.rank);
        }
    }
    let mut out: Vec<CrossCovariateRank> = ranks
        .into_iter()
        .enumerate()
        .filter_map(|(word, r)| {
            let r: Option<Vec<usize>> = r.into_iter().collect();
            let r = r.filter(|r| !r.is_empty())?;
            let mean = r.iter().sum::<usize>() as f64 / r.len() as f64;
            let variance = r.iter().map(|&x| (x as f64 - mean).powi(2)).sum::<f64>() / r.len() as f64;
            Some(CrossCovariateRank { word, ranks: r, variance })
        })
        .collect();
    out.sort_by(|x, y| y.variance.total_cmp(&x.variance).then(x.word.cmp(&y.word)));
    Ok(out)
}
