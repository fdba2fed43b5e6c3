//! Surface-level features: TF-IDF n-grams, lexicon-category proportions, and
//! linguistic scalars.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::text;

/// A sparse feature vector; entries sorted by index, no explicit zeros.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseVector {
    pub dim: usize,
    pub entries: Vec<(usize, f64)>,
}

impl SparseVector {
    pub fn zero(dim: usize) -> Self {
        SparseVector { dim, entries: vec![] }
    }

    pub fn from_dense(v: &[f64]) -> Self {
        SparseVector {
            dim: v.len(),
            entries: v
                .iter()
                .enumerate()
                .filter(|(_, x)| **x != 0.0)
                .map(|(i, x)| (i, *x))
                .collect(),
        }
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.dim];
        for &(i, x) in &self.entries {
            v[i] = x;
        }
        v
    }

    pub fn l2_norm(&self) -> f64 {
        self.entries.iter().map(|(_, x)| x * x).sum::<f64>().sqrt()
    }

    pub fn dot(&self, dense: &[f64]) -> f64 {
        self.entries.iter().map(|&(i, x)| x * dense[i]).sum()
    }

    /// Concatenate a dense block after the sparse block.
    pub fn append_dense(&self, dense: &[f64]) -> SparseVector {
        let mut entries = self.entries.clone();
        for (j, &x) in dense.iter().enumerate() {
            if x != 0.0 {
                entries.push((self.dim + j, x));
            }
        }
        SparseVector {
            dim: self.dim + dense.len(),
            entries,
        }
    }
}

/// Fitted TF-IDF vocabulary with smoothed idf weights.
///
/// idf(t) = ln((1+N)/(1+df(t))) + 1; vocabulary order is lexicographic.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TfidfModel {
    pub ngram_range: (usize, usize),
    pub vocab: Vec<String>,
    index: HashMap<String, usize>,
    pub idf: Vec<f64>,
}

/// Extract the n-grams of a text for the given range, in reading order.
pub fn ngrams(tokens: &[String], range: (usize, usize)) -> Vec<String> {
    let mut out = Vec::new();
    for n in range.0..=range.1 {
        if n == 0 || tokens.len() < n {
            continue;
        }
        for w in tokens.windows(n) {
            out.push(w.join(" "));
        }
    }
    out
}

/// Fit TF-IDF on the training corpus only.
pub fn tfidf_fit(train: &Corpus, ngram_range: (usize, usize)) -> Result<TfidfModel> {
    tfidf_fit_texts(&train.texts().map(str::to_string).collect::<Vec<_>>(), ngram_range)
}

/// Fit TF-IDF on raw documents (used by tests and non-corpus callers).
pub fn tfidf_fit_texts(docs: &[String], ngram_range: (usize, usize)) -> Result<TfidfModel> {
    if docs.is_empty() {
        return Err(Error::Argument("cannot fit TF-IDF on an empty corpus".into()));
    }
    if ngram_range.0 == 0 || ngram_range.0 > ngram_range.1 {
        return Err(Error::Argument(format!("bad ngram range {ngram_range:?}")));
    }
    let n_docs = docs.len();
    let mut df: BTreeMap<String, usize> = BTreeMap::new();
    for doc in docs {
        let tokens = text::tokenize(doc);
        let mut seen: Vec<String> = ngrams(&tokens, ngram_range);
        seen.sort();
        seen.dedup();
        for g in seen {
            *df.entry(g).or_insert(0) += 1;
        }
    }
    let mut vocab = Vec::with_capacity(df.len());
    let mut idf = Vec::with_capacity(df.len());
    let mut index = HashMap::with_capacity(df.len());
    for (term, count) in df {
        // BTreeMap iteration gives lexicographic vocabulary order.
        idf.push(((1 + n_docs) as f64 / (1 + count) as f64).ln() + 1.0);
        index.insert(term.clone(), vocab.len());
        vocab.push(term);
    }
    Ok(TfidfModel {
        ngram_range,
        vocab,
        index,
        idf,
    })
}

impl TfidfModel {
    pub fn dim(&self) -> usize {
        self.vocab.len()
    }

    /// Raw-count tf, idf weighting, then L2 normalization. N-grams outside
    /// the fitted vocabulary are dropped.
    pub fn transform(&self, doc: &str) -> SparseVector {
        let tokens = text::tokenize(doc);
        let mut counts: BTreeMap<usize, f64> = BTreeMap::new();
        for g in ngrams(&tokens, self.ngram_range) {
            if let Some(&i) = self.index.get(&g) {
                *counts.entry(i).or_insert(0.0) += 1.0;
            }
        }
        let mut entries: Vec<(usize, f64)> = counts
            .into_iter()
            .map(|(i, tf)| (i, tf * self.idf[i]))
            .collect();
        let norm = entries.iter().map(|(_, x)| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            for e in &mut entries {
                e.1 /= norm;
            }
        }
        SparseVector {
            dim: self.dim(),
            entries,
        }
    }
}

/// One lexicon category: exact words plus stem prefixes.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct LexiconCategory {
    pub words: Vec<String>,
    pub prefixes: Vec<String>,
}

impl LexiconCategory {
    fn matches(&self, token: &str) -> bool {
        self.words.iter().any(|w| w == token) || self.prefixes.iter().any(|p| token.starts_with(p.as_str()))
    }
}

/// Dictionary of word categories; entries ending in `*` are prefixes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Lexicon {
    /// (name, category) pairs sorted by name; the sort fixes the feature order.
    pub categories: Vec<(String, LexiconCategory)>,
}

impl Lexicon {
    /// Load from JSON: {"category": ["word", "prefix*", ...], ...}.
    pub fn load(path: &Path) -> Result<Self> {
        let raw = fs::read_to_string(path).map_err(|e| Error::file(path.display().to_string(), e))?;
        let map: BTreeMap<String, Vec<String>> = serde_json::from_str(&raw)
            .map_err(|e| Error::format(0, format!("bad lexicon file: {e}")))?;
        Ok(Self::from_entries(map))
    }

    pub fn from_entries(map: BTreeMap<String, Vec<String>>) -> Self {
        let categories = map
            .into_iter()
            .map(|(name, entries)| {
                let mut cat = LexiconCategory::default();
                for e in entries {
                    let e = e.to_lowercase();
                    if let Some(stem) = e.strip_suffix('*') {
                        cat.prefixes.push(stem.to_string());
                    } else {
                        cat.words.push(e);
                    }
                }
                (name, cat)
            })
            .collect();
        Lexicon { categories }
    }

    pub fn dim(&self) -> usize {
        self.categories.len()
    }

    pub fn category_names(&self) -> Vec<&str> {
        self.categories.iter().map(|(n, _)| n.as_str()).collect()
    }
}

/// Per-category matched-token proportions: value(cat) = matches / token count.
pub fn lexicon_features(doc: &str, lexicon: &Lexicon) -> Vec<f64> {
    let tokens = text::tokenize(doc);
    if tokens.is_empty() {
        return vec![0.0; lexicon.dim()];
    }
    let n = tokens.len() as f64;
    lexicon
        .categories
        .iter()
        .map(|(_, cat)| tokens.iter().filter(|t| cat.matches(t)).count() as f64 / n)
        .collect()
}

/// Fixed-order linguistic scalars:
/// [word_count, char_count, punct_count, complexity, sentiment].
///
/// Complexity is Flesch reading ease with heuristic vowel-group syllable
/// counting; sentiment is (positive - negative lexicon hits) / tokens.
pub fn linguistic_features(doc: &str) -> Vec<f64> {
    if doc.trim().is_empty() {
        return vec![0.0; 5];
    }
    let word_count = text::whitespace_token_count(doc) as f64;
    let char_count = doc.chars().count() as f64;
    let punct_count = doc.chars().filter(|c| c.is_ascii_punctuation()).count() as f64;
    let complexity = text::flesch_reading_ease(doc);
    let sentiment = text::sentiment_score(doc);
    vec![word_count, char_count, punct_count, complexity, sentiment]
}

/// Train-set standardization parameters for dense feature blocks.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ZScaler {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl ZScaler {
    pub fn fit(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map(|r| r.len()).ok_or_else(|| {
            Error::Argument("cannot fit a scaler on zero rows".into())
        })?;
        let n = rows.len() as f64;
        let mut mean = vec![0.0; dim];
        for r in rows {
            for (m, x) in mean.iter_mut().zip(r) {
                *m += x;
            }
        }
        for m in &mut mean {
            *m /= n;
        }
        let mut var = vec![0.0; dim];
        for r in rows {
            for ((v, x), m) in var.iter_mut().zip(r).zip(&mean) {
                *v += (x - m) * (x - m);
            }
        }
        let std = var.into_iter().map(|v| (v / n).sqrt()).collect();
        Ok(ZScaler { mean, std })
    }

    /// Standardize one row; zero-variance dims map to 0.
    pub fn transform(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(&self.mean)
            .zip(&self.std)
            .map(|((x, m), s)| if *s > 0.0 { (x - m) / s } else { 0.0 })
            .collect()
    }
}

/// Write feature rows to the documented sparse triplet format:
/// header "rows cols", then one "row col value" line per non-zero.
pub fn save_triplets(path: &Path, rows: &[SparseVector]) -> Result<()> {
    let cols = rows.first().map_or(0, |r| r.dim);
    let mut out = String::new();
    out.push_str(&format!("{} {}\n", rows.len(), cols));
    for (r, vec) in rows.iter().enumerate() {
        for &(c, v) in &vec.entries {
            out.push_str(&format!("{r} {c} {v:.17e}\n"));
        }
    }
    let mut f = fs::File::create(path).map_err(|e| Error::file(path.display().to_string(), e))?;
    f.write_all(out.as_bytes())
        .map_err(|e| Error::file(path.display().to_string(), e))
}

/// Read a sparse triplet file written by [`save_triplets`].
pub fn load_triplets(path: &Path) -> Result<Vec<SparseVector>> {
    let raw = fs::read_to_string(path).map_err(|e| Error::file(path.display().to_string(), e))?;
    let mut lines = raw.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::format(1, "missing triplet header"))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| Error::format(1, "bad header")))
        .collect::<Result<_>>()?;
    if dims.len() != 2 {
        return Err(Error::format(1, "header must be 'rows cols'"));
    }
    let mut rows = vec![SparseVector::zero(dims[1]); dims[0]];
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(Error::format(i + 1, "expected 'row col value'"));
        }
        let r: usize = parts[0].parse().map_err(|_| Error::format(i + 1, "bad row"))?;
        let c: usize = parts[1].parse().map_err(|_| Error::format(i + 1, "bad col"))?;
        let v: f64 = parts[2].parse().map_err(|_| Error::format(i + 1, "bad value"))?;
        if r >= dims[0] || c >= dims[1] {
            return Err(Error::format(i + 1, "index out of bounds"));
        }
        rows[r].entries.push((c, v));
    }
    Ok(rows)
}
