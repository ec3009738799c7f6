//! Corpus ingestion: tokenization, vocabulary, and the weighted co-occurrence tensor.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("vocabulary is empty after filtering")]
    EmptyVocabulary,
    #[error("no covariates found")]
    NoCovariates,
    #[error("corpus has no tokens")]
    NoTokens,
    #[error("unknown covariate '{0}'")]
    UnknownCovariate(String),
    #[error("invalid corpus config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Error, PartialEq)]
pub enum TensorError {
    #[error("entry ({i}, {j}, {k}) out of range for n={n}, m={m}")]
    OutOfRange {
        i: usize,
        j: usize,
        k: usize,
        n: usize,
        m: usize,
    },
    #[error("entry ({i}, {j}, {k}) has non-positive or non-finite value {value}")]
    BadValue { i: usize, j: usize, k: usize, value: f64 },
    #[error("entry ({i}, {j}, {k}) stored twice")]
    Duplicate { i: usize, j: usize, k: usize },
    #[error("entry ({i}, {j}, {k}) has no bit-identical mirror ({j}, {i}, {k})")]
    Asymmetric { i: usize, j: usize, k: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct CorpusConfig {
    /// Maximum token distance counted as co-occurring.
    pub window: usize,
    /// Number of most frequent words removed from the vocabulary.
    pub drop_top_k: usize,
    /// Vocabulary cap applied after dropping; `None` keeps everything.
    pub max_vocab: Option<usize>,
    /// Tensor entries with weighted value below this are pruned.
    pub min_count: f64,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        Self {
            window: 8,
            drop_top_k: 0,
            max_vocab: None,
            min_count: 0.0,
        }
    }
}

impl CorpusConfig {
    pub fn validate(&self) -> Result<(), CorpusError> {
        if self.window < 1 {
            return Err(CorpusError::InvalidConfig("window must be >= 1".into()));
        }
        if !(self.min_count >= 0.0) || !self.min_count.is_finite() {
            return Err(CorpusError::InvalidConfig(format!(
                "min_count must be a finite value >= 0, got {}",
                self.min_count
            )));
        }
        if self.max_vocab == Some(0) {
            return Err(CorpusError::InvalidConfig("max_vocab must be >= 1".into()));
        }
        Ok(())
    }
}

/// Documents belonging to one covariate value.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CovariateDocs {
    pub name: String,
    pub docs: Vec<Vec<String>>,
}

impl CovariateDocs {
    pub fn new(name: impl Into<String>, docs: Vec<Vec<String>>) -> Self {
        Self {
            name: name.into(),
            docs,
        }
    }
}

/// Lowercases and splits on anything that is not a letter or an apostrophe.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !(c.is_alphabetic() || c == '\''))
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Vocabulary {
    words: Vec<String>,
    counts: Vec<u64>,
    covariates: Vec<String>,
    word_index: HashMap<String, usize>,
    covariate_index: HashMap<String, usize>,
}

impl Vocabulary {
    /// Builds a vocabulary from already-ordered parts.
    ///
    /// Rejects duplicate words or covariates, zero counts, and word orderings
    /// that violate the descending-count, then lexicographic, rule.
    pub fn new(
        words: Vec<String>,
        counts: Vec<u64>,
        covariates: Vec<String>,
    ) -> Result<Self, String> {
        if words.len() != counts.len() {
            return Err(format!(
                "{} words but {} counts",
                words.len(),
                counts.len()
            ));
        }
        let mut word_index = HashMap::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            if counts[i] == 0 {
                return Err(format!("word '{w}' has count 0"));
            }
            if word_index.insert(w.clone(), i).is_some() {
                return Err(format!("duplicate word '{w}'"));
            }
            if i > 0 {
                let prev = (std::cmp::Reverse(counts[i - 1]), &words[i - 1]);
                let cur = (std::cmp::Reverse(counts[i]), &words[i]);
                if prev > cur {
                    return Err(format!("word '{w}' is out of count order"));
                }
            }
        }
        let mut covariate_index = HashMap::with_capacity(covariates.len());
        for (k, c) in covariates.iter().enumerate() {
            if covariate_index.insert(c.clone(), k).is_some() {
                return Err(format!("duplicate covariate '{c}'"));
            }
        }
        Ok(Self {
            words,
            counts,
            covariates,
            word_index,
            covariate_index,
        })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn covariates(&self) -> &[String] {
        &self.covariates
    }

    pub fn word_id(&self, word: &str) -> Option<usize> {
        self.word_index.get(word).copied()
    }

    pub fn covariate_id(&self, name: &str) -> Option<usize> {
        self.covariate_index.get(name).copied()
    }
}

/// Counts words over every covariate and applies the drop/cap rules.
pub fn build_vocab(corpus: &[CovariateDocs], config: &CorpusConfig) -> Result<Vocabulary, CorpusError> {
    config.validate()?;
    if corpus.is_empty() {
        return Err(CorpusError::NoCovariates);
    }
    let mut counts: HashMap<&str, u64> = HashMap::new();
    for tok in corpus.iter().flat_map(|c| c.docs.iter().flatten()) {
        *counts.entry(tok.as_str()).or_insert(0) += 1;
    }
    if counts.is_empty() {
        return Err(CorpusError::NoTokens);
    }
    let mut ranked: Vec<(&str, u64)> = counts.into_iter().collect();
    ranked.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let kept = ranked
        .into_iter()
        .skip(config.drop_top_k)
        .take(config.max_vocab.unwrap_or(usize::MAX));
    let (words, counts): (Vec<String>, Vec<u64>) = kept.map(|(w, c)| (w.to_string(), c)).unzip();
    if words.is_empty() {
        return Err(CorpusError::EmptyVocabulary);
    }
    let covariates = corpus.iter().map(|c| c.name.clone()).collect();
    Vocabulary::new(words, counts, covariates).map_err(CorpusError::InvalidConfig)
}

/// One stored cell of the tensor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Entry {
    pub i: u32,
    pub j: u32,
    pub k: u32,
    pub value: f64,
}

impl Entry {
    pub fn new(i: usize, j: usize, k: usize, value: f64) -> Self {
        Self {
            i: i as u32,
            j: j as u32,
            k: k as u32,
            value,
        }
    }

    fn key(&self) -> (u32, u32, u32) {
        (self.k, self.i, self.j)
    }
}

/// Sparse symmetric order-3 tensor of positive weighted counts.
///
/// Entries are kept sorted by `(k, i, j)`; both `(i, j, k)` and `(j, i, k)` are
/// stored and always hold bit-identical values.
#[derive(Clone, Debug, PartialEq)]
pub struct CoocTensor {
    n: usize,
    m: usize,
    entries: Vec<Entry>,
    /// `slice_start[k]..slice_start[k + 1]` indexes the entries of slice `k`.
    slice_start: Vec<usize>,
}

impl CoocTensor {
    pub fn empty(n: usize, m: usize) -> Self {
        Self {
            n,
            m,
            entries: Vec::new(),
            slice_start: vec![0; m + 1],
        }
    }

    /// Validates and sorts a full (both orderings present) entry list.
    pub fn from_entries(n: usize, m: usize, mut entries: Vec<Entry>) -> Result<Self, TensorError> {
        for e in &entries {
            let (i, j, k) = (e.i as usize, e.j as usize, e.k as usize);
            if i >= n || j >= n || k >= m {
                return Err(TensorError::OutOfRange { i, j, k, n, m });
            }
            if !(e.value > 0.0) || !e.value.is_finite() {
                return Err(TensorError::BadValue { i, j, k, value: e.value });
            }
        }
        entries.sort_unstable_by_key(Entry::key);
        for w in entries.windows(2) {
            if w[0].key() == w[1].key() {
                let e = w[0];
                return Err(TensorError::Duplicate {
                    i: e.i as usize,
                    j: e.j as usize,
                    k: e.k as usize,
                });
            }
        }
        let tensor = Self::from_sorted_unchecked(n, m, entries);
        for e in &tensor.entries {
            if e.i != e.j && tensor.get(e.j as usize, e.i as usize, e.k as usize).to_bits() != e.value.to_bits() {
                return Err(TensorError::Asymmetric {
                    i: e.i as usize,
                    j: e.j as usize,
                    k: e.k as usize,
                });
            }
        }
        Ok(tensor)
    }

    /// Builds from `(i <= j)` representatives, mirroring off-diagonal cells.
    pub fn from_upper(n: usize, m: usize, upper: Vec<Entry>) -> Result<Self, TensorError> {
        let mut all = Vec::with_capacity(upper.len() * 2);
        for e in upper {
            all.push(e);
            if e.i != e.j {
                all.push(Entry { i: e.j, j: e.i, ..e });
            }
        }
        Self::from_entries(n, m, all)
    }

    fn from_sorted_unchecked(n: usize, m: usize, entries: Vec<Entry>) -> Self {
        let mut slice_start = vec![0; m + 1];
        for e in &entries {
            slice_start[e.k as usize + 1] += 1;
        }
        for k in 0..m {
            slice_start[k + 1] += slice_start[k];
        }
        Self {
            n,
            m,
            entries,
            slice_start,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// All entries in `(k, i, j)` order.
    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    /// Entries of covariate slice `k`, in `(i, j)` order.
    pub fn slice(&self, k: usize) -> &[Entry] {
        &self.entries[self.slice_start[k]..self.slice_start[k + 1]]
    }

    /// Stored value, or 0 for an absent cell.
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        if k >= self.m {
            return 0.0;
        }
        let key = (i as u32, j as u32);
        self.slice(k)
            .binary_search_by_key(&key, |e| (e.i, e.j))
            .map_or(0.0, |pos| self.slice(k)[pos].value)
    }

    /// Sum of every stored value.
    pub fn total(&self) -> f64 {
        self.entries.iter().map(|e| e.value).sum()
    }
}

fn accumulate_slice(docs: &[Vec<String>], vocab: &Vocabulary, window: usize, k: usize) -> Vec<Entry> {
    let mut cells: HashMap<(u32, u32), f64> = HashMap::new();
    for doc in docs {
        let ids: Vec<Option<u32>> = doc.iter().map(|t| vocab.word_id(t).map(|i| i as u32)).collect();
        for (p, left) in ids.iter().enumerate() {
            let Some(a) = *left else { continue };
            let end = (p + window).min(ids.len().saturating_sub(1));
            for q in p + 1..=end {
                let Some(b) = ids[q] else { continue };
                let w = 1.0 / (q - p) as f64;
                *cells.entry((a, b)).or_insert(0.0) += w;
                *cells.entry((b, a)).or_insert(0.0) += w;
            }
        }
    }
    let mut out: Vec<Entry> = cells
        .into_iter()
        .map(|((i, j), value)| Entry { i, j, k: k as u32, value })
        .collect();
    out.sort_unstable_by_key(|e| (e.i, e.j));
    out
}

/// Inverse-distance weighted co-occurrence counts within each document.
///
/// A pair at distance `d <= window` adds `1/d` to both `(i, j, k)` and `(j, i, k)`.
/// Out-of-vocabulary tokens hold their position but contribute nothing.
pub fn accumulate_cooccurrence(
    corpus: &[CovariateDocs],
    vocab: &Vocabulary,
    config: &CorpusConfig,
) -> Result<CoocTensor, CorpusError> {
    config.validate()?;
    if vocab.is_empty() {
        return Err(CorpusError::EmptyVocabulary);
    }
    let mut slots = Vec::with_capacity(corpus.len());
    for c in corpus {
        let k = vocab
            .covariate_id(&c.name)
            .ok_or_else(|| CorpusError::UnknownCovariate(c.name.clone()))?;
        slots.push((k, &c.docs));
    }
    // Slices are independent, so per-slice parallelism does not affect values.
    let per_slice: Vec<Vec<Entry>> = slots
        .par_iter()
        .map(|(k, docs)| accumulate_slice(docs, vocab, config.window, *k))
        .collect();
    let distinct: std::collections::HashSet<usize> = slots.iter().map(|s| s.0).collect();
    let mut entries: Vec<Entry> = if distinct.len() == slots.len() {
        per_slice.into_iter().flatten().collect()
    } else {
        // The same covariate appeared twice: merge in input order.
        let mut merged: HashMap<(u32, u32, u32), f64> = HashMap::new();
        for e in per_slice.into_iter().flatten() {
            *merged.entry((e.k, e.i, e.j)).or_insert(0.0) += e.value;
        }
        merged
            .into_iter()
            .map(|((k, i, j), value)| Entry { i, j, k, value })
            .collect()
    };
    entries.sort_unstable_by_key(Entry::key);
    Ok(CoocTensor::from_sorted_unchecked(vocab.len(), vocab.covariates().len(), entries))
}

/// Drops entries whose weighted value is below `min_count`.
pub fn prune_tensor(tensor: &CoocTensor, min_count: f64) -> CoocTensor {
    let kept: Vec<Entry> = tensor.entries.iter().copied().filter(|e| e.value >= min_count).collect();
    CoocTensor::from_sorted_unchecked(tensor.n, tensor.m, kept)
}

/// Vocabulary plus pruned tensor in one pass over the corpus.
pub fn build(corpus: &[CovariateDocs], config: &CorpusConfig) -> Result<(Vocabulary, CoocTensor), CorpusError> {
    let vocab = build_vocab(corpus, config)?;
    let tensor = accumulate_cooccurrence(corpus, &vocab, config)?;
    Ok((vocab, prune_tensor(&tensor, config.min_count)))
}

/// Reads `<root>/<covariate>/<document>` text files, one document per file.
///
/// Covariates and documents are ordered by file name.
pub fn load_corpus_dir(root: &Path) -> Result<Vec<CovariateDocs>, CorpusError> {
    let io_err = |path: &Path| {
        let path = path.display().to_string();
        move |source| CorpusError::Io { path, source }
    };
    let mut covariate_dirs: Vec<_> = fs::read_dir(root)
        .map_err(io_err(root))?
        .filter_map(Result::ok)
        .map(|e| e.path())
        .filter(|p| p.is_dir())
        .collect();
    covariate_dirs.sort();
    if covariate_dirs.is_empty() {
        return Err(CorpusError::NoCovariates);
    }
    let mut corpus = Vec::with_capacity(covariate_dirs.len());
    for dir in covariate_dirs {
        let name = dir
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let mut files: Vec<_> = fs::read_dir(&dir)
            .map_err(io_err(&dir))?
            .filter_map(Result::ok)
            .map(|e| e.path())
            .filter(|p| p.is_file())
            .collect();
        files.sort();
        let mut docs = Vec::with_capacity(files.len());
        for f in files {
            let text = fs::read_to_string(&f).map_err(io_err(&f))?;
            docs.push(tokenize(&text));
        }
        corpus.push(CovariateDocs::new(name, docs));
    }
    Ok(corpus)
}
