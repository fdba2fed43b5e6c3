//! Fact-check knowledge: record ingestion, OWL-style ontology construction,
//! random-walk corpora and walk-trained ontology embeddings.

mod embed;
mod walks;

pub use embed::{
    encode_sentence, train_ontology_embedding, train_ontology_embedding_with, OntologyEmbedding,
    SentenceEncoding,
};
pub use walks::{generate_walk_corpus, generate_walks_for_node, Projection};

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The fixed schema classes.
pub const CLASSES: [&str; 6] = [
    "Claim",
    "ClaimReview",
    "Entity",
    "WikiCategory",
    "Author",
    "Label",
];

/// Object properties (edges between individuals).
pub const OBJECT_PROPERTIES: [&str; 5] = [
    "hasLabel",
    "reviewedBy",
    "mentionsEntity",
    "inCategory",
    "authoredBy",
];

/// Data properties (edges to literals).
pub const DATA_PROPERTIES: [&str; 2] = ["citesReference", "publishedOn"];

/// One scraped fact-check record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactCheckRecord {
    pub claim_text: String,
    pub normalized_label: String,
    #[serde(default)]
    pub debunk_links: Vec<String>,
    #[serde(default)]
    pub review_body: String,
    #[serde(default)]
    pub review_title: String,
    #[serde(default)]
    pub references: Vec<String>,
    #[serde(default)]
    pub claim_entities: Vec<String>,
    #[serde(default)]
    pub review_entities: Vec<String>,
    #[serde(default)]
    pub wiki_categories: Vec<String>,
    #[serde(default)]
    pub review_author: String,
    #[serde(default)]
    pub publication_date: String,
    #[serde(default)]
    pub language: Option<String>,
}

const NORMALIZED_LABELS: [&str; 4] = ["TRUE", "FALSE", "MIXTURE", "OTHER"];

/// Ingest JSON-lines fact-check records.
///
/// Rows failing the required-field check (empty claim text) or carrying a
/// different language tag than `language` are dropped and counted; rows with
/// unknown normalized labels are coerced to OTHER. Unparseable lines are
/// skipped with a log entry, or raise a FormatError in strict mode.
pub fn ingest_records(path: &Path, language: &str, strict: bool) -> Result<Vec<FactCheckRecord>> {
    let f = fs::File::open(path).map_err(|e| Error::file(path.display().to_string(), e))?;
    let reader = BufReader::new(f);
    let mut records = Vec::new();
    let mut dropped = 0usize;
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::file(path.display().to_string(), e))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut record: FactCheckRecord = match serde_json::from_str(&line) {
            Ok(r) => r,
            Err(e) if strict => {
                return Err(Error::format(i + 1, format!("bad record: {e}")));
            }
            Err(e) => {
                log::warn!("skipping corrupted record at line {}: {e}", i + 1);
                dropped += 1;
                continue;
            }
        };
        if record.claim_text.trim().is_empty() {
            dropped += 1;
            continue;
        }
        if let Some(lang) = &record.language {
            if lang != language {
                dropped += 1;
                continue;
            }
        }
        let upper = record.normalized_label.to_uppercase();
        record.normalized_label = if NORMALIZED_LABELS.contains(&upper.as_str()) {
            upper
        } else {
            log::warn!(
                "record at line {} has label {:?}; coerced to OTHER",
                i + 1,
                record.normalized_label
            );
            "OTHER".to_string()
        };
        records.push(record);
    }
    log::info!(
        "ingested {} records from {} ({dropped} dropped)",
        records.len(),
        path.display()
    );
    Ok(records)
}

/// One named individual with its class memberships and label annotation.
#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub iri: String,
    pub classes: Vec<usize>,
    pub label: String,
}

/// Schema (classes, properties) plus instance assertions built from records.
#[derive(Debug, Clone, PartialEq)]
pub struct Ontology {
    pub classes: Vec<String>,
    pub individuals: Vec<Individual>,
    index: HashMap<String, usize>,
    /// (subject individual, property, object individual)
    pub object_axioms: Vec<(usize, String, usize)>,
    /// (subject individual, property, literal)
    pub data_axioms: Vec<(usize, String, String)>,
}

impl Ontology {
    fn empty() -> Self {
        Ontology {
            classes: CLASSES.iter().map(|c| c.to_string()).collect(),
            individuals: Vec::new(),
            index: HashMap::new(),
            object_axioms: Vec::new(),
            data_axioms: Vec::new(),
        }
    }

    pub fn individual_id(&self, iri: &str) -> Option<usize> {
        self.index.get(iri).copied()
    }

    fn class_id(&self, name: &str) -> usize {
        self.classes.iter().position(|c| c == name).expect("known class")
    }

    /// Intern an individual; the first label wins, class memberships merge.
    fn intern(&mut self, iri: &str, class: &str, label: &str) -> usize {
        let class_id = self.class_id(class);
        if let Some(&i) = self.index.get(iri) {
            if !self.individuals[i].classes.contains(&class_id) {
                self.individuals[i].classes.push(class_id);
            }
            return i;
        }
        let i = self.individuals.len();
        self.index.insert(iri.to_string(), i);
        self.individuals.push(Individual {
            iri: iri.to_string(),
            classes: vec![class_id],
            label: label.to_string(),
        });
        i
    }

    pub fn len(&self) -> usize {
        self.individuals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.individuals.is_empty()
    }

    /// Serialize as the line-based functional triple file: one
    /// `subject predicate object .` per line, declarations first.
    pub fn to_triple_lines(&self) -> String {
        let mut out = String::new();
        for c in &self.classes {
            out.push_str(&format!("ck:{c} a owl:Class .\n"));
        }
        for p in OBJECT_PROPERTIES {
            out.push_str(&format!("ck:{p} a owl:ObjectProperty .\n"));
        }
        for p in DATA_PROPERTIES {
            out.push_str(&format!("ck:{p} a owl:DatatypeProperty .\n"));
        }
        for ind in &self.individuals {
            for &c in &ind.classes {
                out.push_str(&format!("{} a ck:{} .\n", ind.iri, self.classes[c]));
            }
        }
        for (s, p, o) in &self.object_axioms {
            out.push_str(&format!(
                "{} ck:{p} {} .\n",
                self.individuals[*s].iri, self.individuals[*o].iri
            ));
        }
        for (s, p, lit) in &self.data_axioms {
            out.push_str(&format!(
                "{} ck:{p} \"{}\" .\n",
                self.individuals[*s].iri,
                lit.replace('\\', "\\\\").replace('"', "\\\"")
            ));
        }
        out
    }

    /// Write the triple file plus the JSON label map (`<stem>.triples`,
    /// `<stem>.labels.json`).
    pub fn save(&self, stem: &Path) -> Result<()> {
        let triples_path = stem.with_extension("triples");
        let labels_path = stem.with_extension("labels.json");
        fs::write(&triples_path, self.to_triple_lines())
            .map_err(|e| Error::file(triples_path.display().to_string(), e))?;
        let labels: BTreeMap<&str, &str> = self
            .individuals
            .iter()
            .map(|i| (i.iri.as_str(), i.label.as_str()))
            .collect();
        let json = serde_json::to_string_pretty(&labels).expect("labels serialize");
        fs::write(&labels_path, json).map_err(|e| Error::file(labels_path.display().to_string(), e))
    }

    /// Turtle-compatible export: the same triples under a @prefix header.
    pub fn export_turtle(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        out.push_str("@prefix ck: <http://claimlens.local/ontology#> .\n");
        out.push_str("@prefix owl: <http://www.w3.org/2002/07/owl#> .\n\n");
        out.push_str(&self.to_triple_lines());
        let mut f = fs::File::create(path).map_err(|e| Error::file(path.display().to_string(), e))?;
        f.write_all(out.as_bytes())
            .map_err(|e| Error::file(path.display().to_string(), e))
    }
}

fn slug(name: &str) -> String {
    let mut s = String::new();
    for c in name.trim().chars() {
        if c.is_alphanumeric() {
            s.extend(c.to_lowercase());
        } else if !s.ends_with('_') && !s.is_empty() {
            s.push('_');
        }
    }
    s.trim_end_matches('_').to_string()
}

/// Build the ontology: six schema classes, the fixed property set, one Claim
/// individual per record with linked ClaimReview / Entity / WikiCategory /
/// Author / Label individuals, labels from surface text. Entities deduplicate
/// by normalized name. Deterministic in record order.
pub fn build_ontology(records: &[FactCheckRecord]) -> Result<Ontology> {
    if records.is_empty() {
        return Err(Error::Argument("cannot build an ontology from zero records".into()));
    }
    let mut ont = Ontology::empty();
    for (i, rec) in records.iter().enumerate() {
        let claim_iri = format!("ck:claim/{i}");
        let claim = ont.intern(&claim_iri, "Claim", rec.claim_text.trim());

        let label_value = rec.normalized_label.clone();
        let label_ind = ont.intern(
            &format!("ck:label/{label_value}"),
            "Label",
            &label_value.to_lowercase(),
        );
        ont.object_axioms.push((claim, "hasLabel".into(), label_ind));

        let review_label = if rec.review_title.trim().is_empty() {
            rec.claim_text.trim()
        } else {
            rec.review_title.trim()
        };
        let review = ont.intern(&format!("ck:review/{i}"), "ClaimReview", review_label);
        ont.object_axioms.push((claim, "reviewedBy".into(), review));

        for e in &rec.claim_entities {
            if slug(e).is_empty() {
                continue;
            }
            let ind = ont.intern(&format!("ck:entity/{}", slug(e)), "Entity", e.trim());
            ont.object_axioms.push((claim, "mentionsEntity".into(), ind));
        }
        for e in &rec.review_entities {
            if slug(e).is_empty() {
                continue;
            }
            let ind = ont.intern(&format!("ck:entity/{}", slug(e)), "Entity", e.trim());
            ont.object_axioms.push((review, "mentionsEntity".into(), ind));
        }
        for c in &rec.wiki_categories {
            if slug(c).is_empty() {
                continue;
            }
            let ind = ont.intern(&format!("ck:category/{}", slug(c)), "WikiCategory", c.trim());
            ont.object_axioms.push((claim, "inCategory".into(), ind));
        }
        if !slug(&rec.review_author).is_empty() {
            let ind = ont.intern(
                &format!("ck:author/{}", slug(&rec.review_author)),
                "Author",
                rec.review_author.trim(),
            );
            ont.object_axioms.push((review, "authoredBy".into(), ind));
        }
        for url in &rec.references {
            ont.data_axioms.push((review, "citesReference".into(), url.clone()));
        }
        for url in &rec.debunk_links {
            ont.data_axioms.push((claim, "citesReference".into(), url.clone()));
        }
        if !rec.publication_date.trim().is_empty() {
            ont.data_axioms
                .push((claim, "publishedOn".into(), rec.publication_date.trim().to_string()));
        }
    }
    Ok(ont)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn record(claim: &str, label: &str, entities: &[&str]) -> FactCheckRecord {
        FactCheckRecord {
            claim_text: claim.into(),
            normalized_label: label.into(),
            debunk_links: vec![],
            review_body: String::new(),
            review_title: format!("review of {claim}"),
            references: vec![],
            claim_entities: entities.iter().map(|e| e.to_string()).collect(),
            review_entities: vec![],
            wiki_categories: vec![],
            review_author: "Checker".into(),
            publication_date: "2020-01-01".into(),
            language: Some("en".into()),
        }
    }

    #[test]
    fn ingest_drops_missing_claim_text_and_keeps_order() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        for i in 0..5 {
            writeln!(
                f,
                r#"{{"claim_text":"claim number {i}","normalized_label":"FALSE"}}"#
            )
            .unwrap();
        }
        writeln!(f, r#"{{"claim_text":"","normalized_label":"TRUE"}}"#).unwrap();
        let recs = ingest_records(f.path(), "en", false).unwrap();
        assert_eq!(recs.len(), 5);
        assert_eq!(recs[2].claim_text, "claim number 2");
    }

    #[test]
    fn ingest_empty_file_is_empty_list() {
        let f = tempfile::NamedTempFile::new().unwrap();
        assert!(ingest_records(f.path(), "en", false).unwrap().is_empty());
    }

    #[test]
    fn ingest_strict_rejects_bad_lines() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "not json").unwrap();
        assert!(matches!(
            ingest_records(f.path(), "en", true),
            Err(Error::Format { line: 1, .. })
        ));
        assert!(ingest_records(f.path(), "en", false).unwrap().is_empty());
    }

    #[test]
    fn ingest_filters_language() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(
            f,
            r#"{{"claim_text":"english claim","normalized_label":"TRUE","language":"en"}}"#
        )
        .unwrap();
        writeln!(
            f,
            r#"{{"claim_text":"deutsche behauptung","normalized_label":"TRUE","language":"de"}}"#
        )
        .unwrap();
        let recs = ingest_records(f.path(), "en", false).unwrap();
        assert_eq!(recs.len(), 1);
    }

    #[test]
    fn one_record_two_entities_one_claim_two_mentions() {
        let ont = build_ontology(&[record("the claim", "FALSE", &["Alpha", "Beta"])]).unwrap();
        let claims: Vec<_> = ont
            .individuals
            .iter()
            .filter(|i| i.classes.contains(&0))
            .collect();
        assert_eq!(claims.len(), 1);
        let mentions = ont
            .object_axioms
            .iter()
            .filter(|(_, p, _)| p == "mentionsEntity")
            .count();
        assert_eq!(mentions, 2);
    }

    #[test]
    fn shared_entity_is_one_individual() {
        let ont = build_ontology(&[
            record("claim one text", "TRUE", &["Shared Thing"]),
            record("claim two text", "FALSE", &["shared thing"]),
        ])
        .unwrap();
        let entities = ont
            .individuals
            .iter()
            .filter(|i| i.iri.starts_with("ck:entity/"))
            .count();
        assert_eq!(entities, 1);
    }

    #[test]
    fn classes_are_exactly_the_six_schema_classes() {
        let ont = build_ontology(&[record("a claim", "OTHER", &[])]).unwrap();
        assert_eq!(ont.classes, CLASSES.to_vec());
        let ont2 = build_ontology(&[
            record("a claim", "OTHER", &["X"]),
            record("b claim", "TRUE", &["Y"]),
        ])
        .unwrap();
        assert_eq!(ont2.classes, CLASSES.to_vec());
    }

    #[test]
    fn every_individual_has_class_and_label() {
        let ont = build_ontology(&[
            record("claim one text", "TRUE", &["Alpha"]),
            record("claim two text", "MIXTURE", &[]),
        ])
        .unwrap();
        for ind in &ont.individuals {
            assert!(!ind.classes.is_empty(), "{} has no class", ind.iri);
            assert!(!ind.label.is_empty(), "{} has no label", ind.iri);
        }
    }

    #[test]
    fn serialization_is_deterministic() {
        let recs = vec![
            record("claim one text", "TRUE", &["Alpha", "Beta"]),
            record("claim two text", "FALSE", &["Alpha"]),
        ];
        let a = build_ontology(&recs).unwrap();
        let b = build_ontology(&recs).unwrap();
        assert_eq!(a.to_triple_lines(), b.to_triple_lines());

        let dir = tempfile::tempdir().unwrap();
        a.save(&dir.path().join("ont")).unwrap();
        b.save(&dir.path().join("ont2")).unwrap();
        let fa = fs::read(dir.path().join("ont.triples")).unwrap();
        let fb = fs::read(dir.path().join("ont2.triples")).unwrap();
        assert_eq!(fa, fb);
        let la = fs::read(dir.path().join("ont.labels.json")).unwrap();
        let lb = fs::read(dir.path().join("ont2.labels.json")).unwrap();
        assert_eq!(la, lb);
    }

    #[test]
    fn turtle_export_has_prefix_header() {
        let ont = build_ontology(&[record("a claim", "TRUE", &[])]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("ont.ttl");
        ont.export_turtle(&p).unwrap();
        let s = fs::read_to_string(&p).unwrap();
        assert!(s.starts_with("@prefix ck:"));
        assert!(s.contains("ck:claim/0 a ck:Claim ."));
    }
}
