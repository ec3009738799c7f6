use super::{check_covariate, cosine_distance, AnalysisError};
use crate::factorization::CoverModel;
use crate::matrix::{euclidean, normalized, Matrix};

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in descending order and the matching unit eigenvectors
/// as the columns of the second matrix.
pub fn symmetric_eigen(a: &Matrix) -> (Vec<f64>, Matrix) {
    let n = a.rows();
    assert_eq!(n, a.cols(), "matrix must be square");
    let mut a = a.clone();
    let mut v = Matrix::zeros(n, n);
    for i in 0..n {
        v[(i, i)] = 1.0;
    }
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|p| (0..n).filter(move |&q| q != p).map(move |q| (p, q)))
            .map(|(p, q)| a[(p, q)] * a[(p, q)])
            .sum();
        let scale: f64 = a.as_slice().iter().map(|x| x * x).sum();
        if off <= 1e-30 * scale || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[(y, y)].total_cmp(&a[(x, x)]).then(x.cmp(&y)));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        for r in 0..n {
            vectors[(r, col)] = v[(r, src)];
        }
    }
    (values, vectors)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Pca2d {
    /// m×2 projected coordinates.
    pub coords: Matrix,
    /// 2×d principal directions; a zero row marks a component with no variance.
    pub components: Matrix,
    /// Fraction of total variance captured by each component.
    pub explained: [f64; 2],
}

/// Projects mean-centered rows onto their top two principal directions.
///
/// Each direction is signed so that its largest-magnitude entry is positive.
pub fn pca_2d(points: &Matrix) -> Result<Pca2d, AnalysisError> {
    let (m, d) = points.shape();
    if m < 2 {
        return Err(AnalysisError::TooFewPoints(m));
    }
    let mut centered = points.clone();
    for t in 0..d {
        let mean = (0..m).map(|r| points[(r, t)]).sum::<f64>() / m as f64;
        for r in 0..m {
            centered[(r, t)] -= mean;
        }
    }
    let total: f64 = centered.as_slice().iter().map(|x| x * x).sum();

    // Work in whichever of the Gram (m×m) or scatter (d×d) matrices is smaller.
    let mut components = Matrix::zeros(2, d);
    let mut variances = [0.0; 2];
    if m <= d {
        let mut gram = Matrix::zeros(m, m);
        for a in 0..m {
            for b in 0..m {
                gram[(a, b)] = crate::matrix::dot(centered.row(a), centered.row(b));
            }
        }
        let (values, vectors) = symmetric_eigen(&gram);
        for c in 0..2.min(m) {
            let mut dir = vec![0.0; d];
            for r in 0..m {
                for (t, x) in dir.iter_mut().enumerate() {
                    *x += vectors[(r, c)] * centered[(r, t)];
                }
            }
            if values[c] > 1e-12 * total {
                if let Some(unit) = normalized(&dir) {
                    components.row_mut(c).copy_from_slice(&unit);
                    variances[c] = values[c];
                }
            }
        }
    } else {
        let mut scatter = Matrix::zeros(d, d);
        for r in 0..m {
            let row = centered.row(r);
            for a in 0..d {
                for b in 0..d {
                    scatter[(a, b)] += row[a] * row[b];
                }
            }
        }
        let (values, vectors) = symmetric_eigen(&scatter);
        for c in 0..2.min(d) {
            if values[c] > 1e-12 * total {
                for t in 0..d {
                    components[(c, t)] = vectors[(t, c)];
                }
                variances[c] = values[c];
            }
        }
    }
    for c in 0..2 {
        let row = components.row_mut(c);
        let lead = row
            .iter()
            .enumerate()
            .fold((0, 0.0f64), |best, (t, x)| if x.abs() > best.1 { (t, x.abs()) } else { best })
            .0;
        if row[lead] < 0.0 {
            row.iter_mut().for_each(|x| *x = -*x);
        }
    }
    let mut coords = Matrix::zeros(m, 2);
    for r in 0..m {
        for c in 0..2 {
            coords[(r, c)] = crate::matrix::dot(centered.row(r), components.row(c));
        }
    }
    let explained = if total > 0.0 {
        [variances[0] / total, variances[1] / total]
    } else {
        [0.0, 0.0]
    };
    Ok(Pca2d {
        coords,
        components,
        explained,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CovariateMetric {
    /// `1 − cos` between weight vectors.
    Cosine,
    Euclidean,
}

/// Other covariates ordered by ascending distance of their weight vectors to `c_k`.
pub fn nearest_covariates(
    model: &CoverModel,
    k: usize,
    metric: CovariateMetric,
) -> Result<Vec<(usize, f64)>, AnalysisError> {
    check_covariate(model, k)?;
    let m = model.m();
    if m < 2 {
        return Err(AnalysisError::TooFewCovariates(m));
    }
    let c = &model.covariate_weights;
    let unit = |q: usize| normalized(c.row(q)).ok_or_else(|| AnalysisError::ZeroVector(format!("covariate {q}")));
    let mut out = Vec::with_capacity(m - 1);
    match metric {
        CovariateMetric::Cosine => {
            let anchor = unit(k)?;
            for q in (0..m).filter(|&q| q != k) {
                out.push((q, cosine_distance(&anchor, &unit(q)?)));
            }
        }
        CovariateMetric::Euclidean => {
            for q in (0..m).filter(|&q| q != k) {
                out.push((q, euclidean(c.row(k), c.row(q))));
            }
        }
    }
    out.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    Ok(out)
}
