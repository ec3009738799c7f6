use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::EvalError;

#[derive(Clone, Debug, PartialEq)]
pub struct KMeansResult {
    pub assignments: Vec<usize>,
    pub centers: Vec<Vec<f64>>,
    /// Within-cluster sum of squared distances.
    pub sse: f64,
    /// Restart that produced this result.
    pub restart: usize,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Index of the nearest center, lowest index on ties.
fn nearest(point: &[f64], centers: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, center) in centers.iter().enumerate() {
        let d = sq_dist(point, center);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn plus_plus_seeds(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut centers = vec![points[rng.random_range(0..points.len())].clone()];
    let mut dist: Vec<f64> = points.iter().map(|p| sq_dist(p, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = dist.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            dist.iter()
                .position(|&d| {
                    acc += d;
                    acc > target
                })
                .unwrap_or(points.len() - 1)
        } else {
            rng.random_range(0..points.len())
        };
        centers.push(points[pick].clone());
        for (d, p) in dist.iter_mut().zip(points) {
            *d = d.min(sq_dist(p, centers.last().unwrap()));
        }
    }
    centers
}

fn lloyd(points: &[Vec<f64>], mut centers: Vec<Vec<f64>>, max_iter: usize) -> (Vec<usize>, Vec<Vec<f64>>, f64) {
    let dim = points[0].len();
    let mut assignments = vec![usize::MAX; points.len()];
    for _ in 0..max_iter {
        let mut changed = false;
        for (a, p) in assignments.iter_mut().zip(points) {
            let (c, _) = nearest(p, &centers);
            if *a != c {
                *a = c;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut sums = vec![vec![0.0; dim]; centers.len()];
        let mut counts = vec![0usize; centers.len()];
        for (&a, p) in assignments.iter().zip(points) {
            counts[a] += 1;
            for (s, x) in sums[a].iter_mut().zip(p) {
                *s += x;
            }
        }
        for ((center, sum), &count) in centers.iter_mut().zip(sums).zip(&counts) {
            // an empty cluster keeps its previous center
            if count > 0 {
                *center = sum.into_iter().map(|s| s / count as f64).collect();
            }
        }
    }
    let sse = assignments.iter().zip(points).map(|(&a, p)| sq_dist(p, &centers[a])).sum();
    (assignments, centers, sse)
}

/// k-means with k-means++ seeding; keeps the restart with the lowest SSE
/// (earliest restart on ties). Restart `r` draws from stream `r` of `seed`.
pub fn kmeans(points: &[Vec<f64>], k: usize, seed: u64, restarts: usize, max_iter: usize) -> Result<KMeansResult, EvalError> {
    if k == 0 || restarts == 0 {
        return Err(EvalError::InvalidParameter("k and restarts must be >= 1".into()));
    }
    if points.len() < k {
        return Err(EvalError::TooFew { needed: k, have: points.len() });
    }
    let runs: Vec<KMeansResult> = (0..restarts)
        .into_par_iter()
        .map(|restart| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(restart as u64);
            let seeds = plus_plus_seeds(points, k, &mut rng);
            let (assignments, centers, sse) = lloyd(points, seeds, max_iter);
            KMeansResult {
                assignments,
                centers,
                sse,
                restart,
            }
        })
        .collect();
    Ok(runs
        .into_iter()
        .reduce(|best, r| if r.sse < best.sse { r } else { best })
        .expect("restarts >= 1"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separates_far_blobs() {
        let pts: Vec<Vec<f64>> = vec![
            vec![0.0, 0.0],
            vec![0.1, 0.0],
            vec![0.0, 0.1],
            vec![10.0, 10.0],
            vec![10.1, 10.0],
            vec![10.0, 10.1],
        ];
        let r = kmeans(&pts, 2, 3, 5, 300).unwrap();
        assert_eq!(r.assignments[0], r.assignments[1]);
        assert_eq!(r.assignments[0], r.assignments[2]);
        assert_eq!(r.assignments[3], r.assignments[5]);
        assert_ne!(r.assignments[0], r.assignments[3]);
        assert!(r.sse < 0.1);
    }

    #[test]
    fn identical_points_share_one_cluster() {
        let pts = vec![vec![1.0, 1.0]; 4];
        let r = kmeans(&pts, 2, 0, 3, 300).unwrap();
        assert!(r.assignments.iter().all(|&a| a == 0));
        assert_eq!(r.sse, 0.0);
    }

    #[test]
    fn needs_enough_points() {
        assert!(kmeans(&[vec![0.0]], 2, 0, 1, 10).is_err());
    }
}
