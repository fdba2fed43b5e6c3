//! Sentence-level check-worthy claim detection with knowledge-enhanced features.
//!
//! The crate is organized around the stages of a claim-detection experiment:
//!
//! - [`corpus`]: dataset loading, cleaning, stratified splitting, label distributions
//! - [`lexfeat`]: TF-IDF n-grams, lexicon-category features, linguistic scalars
//! - [`wordvec`]: word-embedding tables, skip-gram training, sequence aggregation, FCN
//! - [`kgraph`]: metadata knowledge graph construction and TransE embeddings
//! - [`ontology`]: fact-check record ingestion, ontology construction, walk embeddings
//! - [`model`]: linear baselines, transformer encoder, CLS + ontology fusion head
//! - [`evalviz`]: metrics, model disagreement tables, attention-weight export
//!
//! Batch operations (graph construction, walk generation, batch transforms and
//! encoding) run data-parallel via rayon when the default `parallel` feature is
//! enabled; disabling it falls back to sequential loops with identical output.
//! Trainers are single-threaded and deterministic per seed in both modes.

pub mod corpus;
pub mod error;
pub mod evalviz;
pub mod kgraph;
pub mod lexfeat;
pub mod model;
pub mod ontology;
pub mod par;
pub mod tensorio;
pub mod text;
pub mod wordvec;

pub use error::{Error, Result};
