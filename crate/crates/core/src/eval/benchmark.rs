use std::collections::{BTreeMap, HashMap, HashSet};

use super::{kmeans, EvalError};
use crate::matrix::{cosine, Matrix};

/// Word → vector lookup for benchmark evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct WordVectors {
    words: Vec<String>,
    index: HashMap<String, usize>,
    vectors: Matrix,
}

impl WordVectors {
    /// Row `i` of `vectors` belongs to `words[i]`. Panics on a length mismatch.
    pub fn new(words: Vec<String>, vectors: Matrix) -> Self {
        assert_eq!(words.len(), vectors.rows(), "one vector per word");
        let index = words.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
        Self { words, index, vectors }
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.index.get(word).map(|&i| self.vectors.row(i))
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn vectors(&self) -> &Matrix {
        &self.vectors
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimilarityBenchmark {
    pairs: Vec<(String, String, f64)>,
}

impl SimilarityBenchmark {
    /// Rejects non-finite scores and repeated pairs in either order.
    pub fn new(pairs: Vec<(String, String, f64)>) -> Result<Self, EvalError> {
        let mut seen = HashSet::new();
        for (a, b, s) in &pairs {
            if !s.is_finite() {
                return Err(EvalError::InvalidParameter(format!("score for ({a}, {b}) is not finite")));
            }
            let key = if a <= b { (a, b) } else { (b, a) };
            if !seen.insert(key) {
                return Err(EvalError::DuplicatePair(a.clone(), b.clone()));
            }
        }
        Ok(Self { pairs })
    }

    pub fn pairs(&self) -> &[(String, String, f64)] {
        &self.pairs
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CategoryBenchmark {
    labels: Vec<(String, String)>,
}

impl CategoryBenchmark {
    /// Needs at least two categories; a word may carry only one label.
    pub fn new(labels: Vec<(String, String)>) -> Result<Self, EvalError> {
        let mut words = HashSet::new();
        for (w, _) in &labels {
            if !words.insert(w) {
                return Err(EvalError::InvalidParameter(format!("word '{w}' labeled twice")));
            }
        }
        let categories: HashSet<&String> = labels.iter().map(|(_, c)| c).collect();
        if categories.len() < 2 {
            return Err(EvalError::TooFew { needed: 2, have: categories.len() });
        }
        Ok(Self { labels })
    }

    pub fn labels(&self) -> &[(String, String)] {
        &self.labels
    }

    pub fn category_count(&self) -> usize {
        self.labels.iter().map(|(_, c)| c).collect::<HashSet<_>>().len()
    }
}

/// 1-based ranks, ties sharing their average rank.
fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && xs[order[end]] == xs[order[start]] {
            end += 1;
        }
        // positions start..end share the mean of ranks start+1..=end
        let rank = (start + end + 1) as f64 / 2.0;
        for &o in &order[start..end] {
            ranks[o] = rank;
        }
        start = end;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(pred: &[f64], gold: &[f64]) -> Result<f64, EvalError> {
    if pred.len() != gold.len() {
        return Err(EvalError::LengthMismatch(pred.len(), gold.len()));
    }
    if pred.len() < 2 {
        return Err(EvalError::TooFew { needed: 2, have: pred.len() });
    }
    if pred.iter().chain(gold).any(|x| !x.is_finite()) {
        return Err(EvalError::InvalidParameter("scores must be finite".into()));
    }
    pearson(&average_ranks(pred), &average_ranks(gold)).ok_or(EvalError::ConstantScores)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimilarityScore {
    pub spearman: f64,
    /// Fraction of benchmark pairs with both words present.
    pub coverage: f64,
    pub covered: usize,
}

/// Spearman correlation between embedding cosine similarity and gold scores.
pub fn similarity_eval(embedding: &WordVectors, bench: &SimilarityBenchmark) -> Result<SimilarityScore, EvalError> {
    let mut pred = Vec::new();
    let mut gold = Vec::new();
    for (a, b, score) in bench.pairs() {
        let sim = match (embedding.get(a), embedding.get(b)) {
            (Some(x), Some(y)) => cosine(x, y),
            _ => None,
        };
        if let Some(sim) = sim {
            pred.push(sim);
            gold.push(*score);
        }
    }
    if pred.len() < 2 {
        return Err(EvalError::TooFew { needed: 2, have: pred.len() });
    }
    Ok(SimilarityScore {
        spearman: spearman(&pred, &gold)?,
        coverage: pred.len() as f64 / bench.pairs().len() as f64,
        covered: pred.len(),
    })
}

/// Purity of a k-means clustering of the covered words, with k the number of
/// benchmark categories.
pub fn cluster_purity(
    embedding: &WordVectors,
    bench: &CategoryBenchmark,
    seed: u64,
    restarts: usize,
) -> Result<f64, EvalError> {
    let k = bench.category_count();
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for (w, cat) in bench.labels() {
        if let Some(v) = embedding.get(w) {
            points.push(v.to_vec());
            labels.push(cat.as_str());
        }
    }
    if points.len() < k {
        return Err(EvalError::TooFew { needed: k, have: points.len() });
    }
    let result = kmeans(&points, k, seed, restarts, 300)?;
    let mut tallies: Vec<BTreeMap<&str, usize>> = vec![BTreeMap::new(); k];
    for (&cluster, label) in result.assignments.iter().zip(&labels) {
        *tallies[cluster].entry(label).or_insert(0) += 1;
    }
    let majority: usize = tallies.iter().map(|t| t.values().copied().max().unwrap_or(0)).sum();
    Ok(majority as f64 / points.len() as f64)
}
