//! Ontology embeddings: skip-gram over walk sentences, entity vectors with a
//! label-word fallback, and sentence encoding by greedy longest label match.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::text;
use crate::wordvec::{train_skipgram_sentences, EmbeddingTable, SkipGramConfig};

use super::Ontology;

/// Entity vectors plus the surface-token index used to encode sentences.
#[derive(Debug, Clone, PartialEq)]
pub struct OntologyEmbedding {
    pub dim: usize,
    /// IRI → vector, insertion-ordered by ontology individual order.
    iris: Vec<String>,
    vectors: Vec<Vec<f64>>,
    /// Lowercased label phrase → IRIs carrying that label.
    pub token_index: BTreeMap<String, Vec<String>>,
    max_phrase_tokens: usize,
}

impl OntologyEmbedding {
    pub fn get(&self, iri: &str) -> Option<&[f64]> {
        self.iris
            .iter()
            .position(|i| i == iri)
            .map(|i| self.vectors[i].as_slice())
    }

    pub fn len(&self) -> usize {
        self.iris.len()
    }

    pub fn is_empty(&self) -> bool {
        self.iris.is_empty()
    }

    /// Persist as a word2vec-format text file (token = IRI) plus a JSON
    /// token index (`<stem>.vec.txt`, `<stem>.index.json`).
    pub fn save(&self, stem: &Path) -> Result<()> {
        let mut table = EmbeddingTable::new(self.dim);
        for (iri, vec) in self.iris.iter().zip(&self.vectors) {
            table.insert(iri, vec.clone())?;
        }
        let vec_path = stem.with_extension("vec.txt");
        table.save_word2vec_text(&vec_path)?;
        let idx_path = stem.with_extension("index.json");
        let json = serde_json::to_string_pretty(&self.token_index).expect("index serializes");
        fs::write(&idx_path, json).map_err(|e| Error::file(idx_path.display().to_string(), e))
    }

    pub fn load(stem: &Path) -> Result<Self> {
        let vec_path = stem.with_extension("vec.txt");
        let table = crate::wordvec::load_pretrained(&vec_path)?;
        let idx_path = stem.with_extension("index.json");
        let raw = fs::read_to_string(&idx_path).map_err(|e| Error::file(idx_path.display().to_string(), e))?;
        let token_index: BTreeMap<String, Vec<String>> = serde_json::from_str(&raw)
            .map_err(|e| Error::format(0, format!("bad token index: {e}")))?;
        let max_phrase_tokens = token_index
            .keys()
            .map(|k| k.split(' ').count())
            .max()
            .unwrap_or(0);
        let iris: Vec<String> = table.tokens().to_vec();
        let vectors = iris
            .iter()
            .map(|i| table.get(i).expect("own token").to_vec())
            .collect();
        Ok(OntologyEmbedding {
            dim: table.dim(),
            iris,
            vectors,
            token_index,
            max_phrase_tokens,
        })
    }
}

/// Train ontology embeddings with default skip-gram hyperparameters.
pub fn train_ontology_embedding(
    ont: &Ontology,
    walk_corpus: &[Vec<String>],
    dim: usize,
    seed: u64,
) -> Result<OntologyEmbedding> {
    let cfg = SkipGramConfig {
        dim,
        seed,
        ..Default::default()
    };
    train_ontology_embedding_with(ont, walk_corpus, &cfg)
}

/// Train ontology embeddings: skip-gram over the combined structure+lexical
/// walk corpus, entity vector = its IRI-token vector when present, else the
/// mean of its label-word vectors, else zero (logged).
pub fn train_ontology_embedding_with(
    ont: &Ontology,
    walk_corpus: &[Vec<String>],
    cfg: &SkipGramConfig,
) -> Result<OntologyEmbedding> {
    if walk_corpus.is_empty() {
        return Err(Error::Argument("walk corpus is empty".into()));
    }
    let table = train_skipgram_sentences(walk_corpus, cfg)?;
    let dim = table.dim();

    let mut iris = Vec::with_capacity(ont.individuals.len());
    let mut vectors = Vec::with_capacity(ont.individuals.len());
    let mut token_index: BTreeMap<String, Vec<String>> = BTreeMap::new();
    let mut max_phrase_tokens = 0usize;

    for ind in &ont.individuals {
        let vector = if let Some(v) = table.get(&ind.iri) {
            v.to_vec()
        } else {
            let label_tokens = text::tokenize(&ind.label);
            let known: Vec<&[f64]> = label_tokens
                .iter()
                .filter_map(|t| table.get(t))
                .collect();
            if known.is_empty() {
                log::warn!(
                    "{} has neither an IRI token nor known label words; zero vector",
                    ind.iri
                );
                vec![0.0; dim]
            } else {
                let mut mean = vec![0.0; dim];
                for v in &known {
                    for (m, x) in mean.iter_mut().zip(*v) {
                        *m += x;
                    }
                }
                for m in &mut mean {
                    *m /= known.len() as f64;
                }
                mean
            }
        };
        let phrase = text::tokenize(&ind.label).join(" ");
        if !phrase.is_empty() {
            max_phrase_tokens = max_phrase_tokens.max(phrase.split(' ').count());
            token_index.entry(phrase).or_default().push(ind.iri.clone());
        }
        iris.push(ind.iri.clone());
        vectors.push(vector);
    }

    Ok(OntologyEmbedding {
        dim,
        iris,
        vectors,
        token_index,
        max_phrase_tokens,
    })
}

/// Sentence encoding: mean of matched entity vectors plus the match count.
#[derive(Debug, Clone, PartialEq)]
pub struct SentenceEncoding {
    pub vector: Vec<f64>,
    pub matched: usize,
}

/// Greedy longest-match of lowercased token spans against the label index;
/// the sentence vector is the mean of all matched entities' vectors, zero
/// (with matched = 0) when nothing matches.
pub fn encode_sentence(sentence: &str, emb: &OntologyEmbedding) -> SentenceEncoding {
    let tokens = text::tokenize(sentence);
    let mut collected: Vec<&[f64]> = Vec::new();
    let mut matched = 0usize;
    let mut i = 0usize;
    while i < tokens.len() {
        let max_span = emb.max_phrase_tokens.min(tokens.len() - i);
        let mut advanced = false;
        for span in (1..=max_span).rev() {
            let phrase = tokens[i..i + span].join(" ");
            if let Some(iris) = emb.token_index.get(&phrase) {
                for iri in iris {
                    if let Some(v) = emb.get(iri) {
                        collected.push(v);
                    }
                }
                matched += 1;
                i += span;
                advanced = true;
                break;
            }
        }
        if !advanced {
            i += 1;
        }
    }
    let mut vector = vec![0.0; emb.dim];
    if !collected.is_empty() {
        for v in &collected {
            for (o, x) in vector.iter_mut().zip(*v) {
                *o += x;
            }
        }
        for o in &mut vector {
            *o /= collected.len() as f64;
        }
    }
    SentenceEncoding { vector, matched }
}
