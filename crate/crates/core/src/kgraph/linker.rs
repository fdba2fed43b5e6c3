//! Entity linking behind a pluggable interface.
//!
//! The shipped backend is an offline gazetteer: longest token-span match
//! against a surface→entity table with a fixed score of 1.0. Networked
//! linkers can implement [`EntityLinker`] without touching graph code.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::text;

/// One linked entity with its score.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkedEntity {
    pub entity: String,
    pub score: f64,
}

/// A linker returns entities scoring at least `threshold`, best first.
pub trait EntityLinker: Sync {
    fn link(&self, text: &str, threshold: f64) -> Result<Vec<LinkedEntity>>;
}

/// Offline longest-match gazetteer; all matches score 1.0.
#[derive(Debug, Clone, Default)]
pub struct GazetteerLinker {
    /// Tokenized surface phrase (space-joined, lowercased) → entity id.
    surfaces: HashMap<String, String>,
    max_phrase_tokens: usize,
}

impl GazetteerLinker {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Load from TSV `surface<TAB>entity_id`.
    pub fn load(path: &Path) -> Result<Self> {
        let raw = fs::read_to_string(path).map_err(|e| Error::file(path.display().to_string(), e))?;
        let mut linker = Self::default();
        for (i, line) in raw.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split('\t').collect();
            if parts.len() != 2 {
                return Err(Error::format(i + 1, "expected surface<TAB>entity_id"));
            }
            linker.add_surface(parts[0], parts[1]);
        }
        Ok(linker)
    }

    pub fn add_surface(&mut self, surface: &str, entity: &str) {
        let key = text::tokenize(surface).join(" ");
        if key.is_empty() {
            return;
        }
        self.max_phrase_tokens = self.max_phrase_tokens.max(key.split(' ').count());
        self.surfaces.insert(key, entity.to_string());
    }

    pub fn len(&self) -> usize {
        self.surfaces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.surfaces.is_empty()
    }
}

impl EntityLinker for GazetteerLinker {
    fn link(&self, sentence: &str, threshold: f64) -> Result<Vec<LinkedEntity>> {
        let tokens = text::tokenize(sentence);
        let mut out = Vec::new();
        let mut i = 0;
        while i < tokens.len() {
            let max_span = self.max_phrase_tokens.min(tokens.len() - i);
            let mut advanced = false;
            for span in (1..=max_span).rev() {
                let phrase = tokens[i..i + span].join(" ");
                if let Some(entity) = self.surfaces.get(&phrase) {
                    out.push(LinkedEntity {
                        entity: entity.clone(),
                        score: 1.0,
                    });
                    i += span;
                    advanced = true;
                    break;
                }
            }
            if !advanced {
                i += 1;
            }
        }
        out.retain(|e| e.score >= threshold);
        out.sort_by(|a, b| b.score.partial_cmp(&a.score).unwrap());
        out.dedup_by(|a, b| a.entity == b.entity);
        Ok(out)
    }
}
