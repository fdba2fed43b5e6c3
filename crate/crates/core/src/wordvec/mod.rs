//! Word embeddings: pretrained-table loading, domain skip-gram training, and
//! sentence-sequence aggregation; plus the shallow fully connected classifier.

mod fcn;
mod skipgram;

pub use fcn::{fcn_classify, softmax, Fcn, FcnConfig};
pub use skipgram::{sgns_pair_loss, sgns_pair_grad, train_skipgram, train_skipgram_sentences, SkipGramConfig};

use std::collections::HashMap;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// A token-to-vector table with a fixed dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    tokens: Vec<String>,
    index: HashMap<String, usize>,
    vectors: Vec<Vec<f64>>,
}

impl EmbeddingTable {
    pub fn new(dim: usize) -> Self {
        EmbeddingTable {
            dim,
            tokens: Vec::new(),
            index: HashMap::new(),
            vectors: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.index.get(token).map(|&i| self.vectors[i].as_slice())
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    /// Insert or overwrite a vector; the last occurrence wins.
    pub fn insert(&mut self, token: &str, vector: Vec<f64>) -> Result<()> {
        if vector.len() != self.dim {
            return Err(Error::Argument(format!(
                "vector for {token:?} has length {}, table dimension is {}",
                vector.len(),
                self.dim
            )));
        }
        match self.index.get(token) {
            Some(&i) => self.vectors[i] = vector,
            None => {
                self.index.insert(token.to_string(), self.tokens.len());
                self.tokens.push(token.to_string());
                self.vectors.push(vector);
            }
        }
        Ok(())
    }

    /// Cosine similarity between two tokens' vectors, if both are present.
    pub fn cosine(&self, a: &str, b: &str) -> Option<f64> {
        let va = self.get(a)?;
        let vb = self.get(b)?;
        let dot: f64 = va.iter().zip(vb).map(|(x, y)| x * y).sum();
        let na: f64 = va.iter().map(|x| x * x).sum::<f64>().sqrt();
        let nb: f64 = vb.iter().map(|x| x * x).sum::<f64>().sqrt();
        if na == 0.0 || nb == 0.0 {
            return Some(0.0);
        }
        Some(dot / (na * nb))
    }

    /// Write in textual word2vec format: header "count dim", then one
    /// "token v1 .. vd" line per token.
    pub fn save_word2vec_text(&self, path: &Path) -> Result<()> {
        let f = fs::File::create(path).map_err(|e| Error::file(path.display().to_string(), e))?;
        let mut w = BufWriter::new(f);
        let io_err = |e| Error::file(path.display().to_string(), e);
        writeln!(w, "{} {}", self.len(), self.dim).map_err(io_err)?;
        for (token, vec) in self.tokens.iter().zip(&self.vectors) {
            write!(w, "{token}").map_err(io_err)?;
            for x in vec {
                write!(w, " {x:.17e}").map_err(io_err)?;
            }
            writeln!(w).map_err(io_err)?;
        }
        w.flush().map_err(io_err)
    }
}

/// Load a textual word2vec file (header "count dim", then token + floats).
///
/// Rows whose float count disagrees with the header dimension raise a
/// FormatError naming the line; duplicate tokens keep the last occurrence
/// with a logged warning.
pub fn load_pretrained(path: &Path) -> Result<EmbeddingTable> {
    let f = fs::File::open(path).map_err(|e| Error::file(path.display().to_string(), e))?;
    let reader = BufReader::new(f);
    let mut lines = reader.lines().enumerate();

    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::format(1, "missing word2vec header"))?
        .1
        .map_err(|e| Error::file(path.display().to_string(), e))
        .map(|l| (0usize, l))?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 2 {
        return Err(Error::format(1, "header must be 'count dim'"));
    }
    let count: usize = parts[0]
        .parse()
        .map_err(|_| Error::format(1, "bad token count in header"))?;
    let dim: usize = parts[1]
        .parse()
        .map_err(|_| Error::format(1, "bad dimension in header"))?;

    let mut table = EmbeddingTable::new(dim);
    for (i, line) in lines {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::file(path.display().to_string(), e))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut it = line.split_whitespace();
        let token = it.next().ok_or_else(|| Error::format(line_no, "empty row"))?;
        let values: Vec<f64> = it
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| Error::format(line_no, format!("bad float {t:?}")))
            })
            .collect::<Result<_>>()?;
        if values.len() != dim {
            return Err(Error::format(
                line_no,
                format!("row has {} floats, header dimension is {dim}", values.len()),
            ));
        }
        if table.contains(token) {
            log::warn!("duplicate token {token:?} at line {line_no}; last occurrence wins");
        }
        table.insert(token, values)?;
    }
    if table.len() != count {
        log::warn!(
            "header declared {count} tokens, file contained {}",
            table.len()
        );
    }
    Ok(table)
}

/// How token sequences collapse to a fixed-length vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AggregationMode {
    /// First `max_len` token vectors concatenated in order, zero rows for
    /// padding and for unknown tokens; sequences longer than `max_len` are
    /// trimmed from the end.
    ConcatPad,
    /// Mean of the known-token vectors (unknown tokens skipped).
    Mean,
}

/// Collapse a token sequence to a fixed-length vector.
pub fn aggregate_sequence(
    tokens: &[String],
    table: &EmbeddingTable,
    max_len: usize,
    mode: AggregationMode,
) -> Vec<f64> {
    assert!(max_len >= 1, "max_len must be at least 1");
    let dim = table.dim();
    match mode {
        AggregationMode::ConcatPad => {
            let mut out = vec![0.0; max_len * dim];
            for (slot, token) in tokens.iter().take(max_len).enumerate() {
                if let Some(v) = table.get(token) {
                    out[slot * dim..(slot + 1) * dim].copy_from_slice(v);
                }
            }
            out
        }
        AggregationMode::Mean => {
            let mut out = vec![0.0; dim];
            let mut known = 0usize;
            for token in tokens {
                if let Some(v) = table.get(token) {
                    known += 1;
                    for (o, x) in out.iter_mut().zip(v) {
                        *o += x;
                    }
                }
            }
            if known > 0 {
                for o in &mut out {
                    *o /= known as f64;
                }
            }
            out
        }
    }
}
