use super::{AnalysisError, Histogram};
use crate::factorization::CoverModel;

/// Magnitudes below this count as exactly zero.
pub const ZERO_THRESHOLD: f64 = 1e-10;

/// Indices `t` with `|c[t]| < threshold`.
pub fn sparse_coordinates(c: &[f64], threshold: f64) -> Vec<usize> {
    c.iter()
        .enumerate()
        .filter(|(_, x)| x.abs() < threshold)
        .map(|(t, _)| t)
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SparsityReport {
    pub threshold: f64,
    /// Sparse coordinate indices per covariate.
    pub sparse_sets: Vec<Vec<usize>>,
    pub counts: Vec<usize>,
    pub mean_count: f64,
    /// Mean `|S_k ∩ S_k'|` over unordered covariate pairs; `None` when `m < 2`.
    pub mean_overlap: Option<f64>,
    /// Histogram of `|c_kt|`; the first bucket `[0, threshold)` is the zero bucket.
    pub magnitudes: Histogram,
}

fn magnitude_edges(threshold: f64, max: f64) -> Vec<f64> {
    let mut edges = vec![0.0, threshold];
    let mut e = threshold;
    while e <= max {
        e *= 10.0;
        edges.push(e);
    }
    edges
}

fn overlap(a: &[usize], b: &[usize]) -> usize {
    // both sorted ascending
    let (mut x, mut y, mut n) = (0, 0, 0);
    while x < a.len() && y < b.len() {
        match a[x].cmp(&b[y]) {
            std::cmp::Ordering::Less => x += 1,
            std::cmp::Ordering::Greater => y += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                x += 1;
                y += 1;
            }
        }
    }
    n
}

pub fn sparsity_report(model: &CoverModel, threshold: f64) -> Result<SparsityReport, AnalysisError> {
    if !(threshold > 0.0) {
        return Err(AnalysisError::InvalidArgument(format!("threshold must be > 0, got {threshold}")));
    }
    let c = &model.covariate_weights;
    let sparse_sets: Vec<Vec<usize>> = c.iter_rows().map(|row| sparse_coordinates(row, threshold)).collect();
    let counts: Vec<usize> = sparse_sets.iter().map(Vec::len).collect();
    let m = counts.len();
    let mean_count = if m == 0 { 0.0 } else { counts.iter().sum::<usize>() as f64 / m as f64 };
    let mean_overlap = (m >= 2).then(|| {
        let mut total = 0usize;
        let mut pairs = 0usize;
        for a in 0..m {
            for b in a + 1..m {
                total += overlap(&sparse_sets[a], &sparse_sets[b]);
                pairs += 1;
            }
        }
        total as f64 / pairs as f64
    });
    let max = c.as_slice().iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    let mut magnitudes = Histogram::new(magnitude_edges(threshold, max))?;
    for x in c.as_slice() {
        magnitudes.add(x.abs());
    }
    Ok(SparsityReport {
        threshold,
        sparse_sets,
        counts,
        mean_count,
        mean_overlap,
        magnitudes,
    })
}
