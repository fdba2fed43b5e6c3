//! Dataset loading, cleaning, stratified splitting and label distributions.
//!
//! Two corpora are supported: the three-class check-worthiness corpus
//! (NFS / UFS / CFS labels over debate sentences with speaker metadata,
//! delivered as a delimited export) and the binary factually-verifiable-claim
//! corpus (FVC / non-FVC over news sentences, delivered as JSON-lines).

use std::collections::HashSet;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text;

/// Label scheme of a corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LabelScheme {
    /// Three classes: NFS (non-factual), UFS (unimportant factual),
    /// CFS (check-worthy factual).
    Claimbuster3,
    /// Two classes: FVC (factually verifiable claim) vs NON_FVC.
    Newsclaims2,
}

impl LabelScheme {
    pub fn name(&self) -> &'static str {
        match self {
            LabelScheme::Claimbuster3 => "CLAIMBUSTER3",
            LabelScheme::Newsclaims2 => "NEWSCLAIMS2",
        }
    }

    /// Ordered label values of the scheme.
    pub fn values(&self) -> &'static [&'static str] {
        match self {
            LabelScheme::Claimbuster3 => &["NFS", "UFS", "CFS"],
            LabelScheme::Newsclaims2 => &["FVC", "NON_FVC"],
        }
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.values().iter().position(|v| *v == label)
    }

    pub fn contains(&self, label: &str) -> bool {
        self.index_of(label).is_some()
    }
}

/// One labeled sentence with optional source metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimInstance {
    pub id: String,
    pub text: String,
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub speaker: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub speaker_title: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub speaker_party: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_doc: Option<String>,
}

/// Which split a corpus represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitTag {
    Train,
    Test,
    All,
}

/// An ordered collection of instances under one label scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    pub scheme: LabelScheme,
    pub split_tag: SplitTag,
    pub instances: Vec<ClaimInstance>,
}

impl Corpus {
    /// Build a corpus, validating instance invariants: non-empty text after
    /// whitespace normalization, in-scheme labels, unique ids.
    pub fn new(scheme: LabelScheme, split_tag: SplitTag, instances: Vec<ClaimInstance>) -> Result<Self> {
        let mut seen = HashSet::new();
        for (i, inst) in instances.iter().enumerate() {
            if inst.text.split_whitespace().next().is_none() {
                return Err(Error::schema(i, format!("instance {} has empty text", inst.id)));
            }
            if !scheme.contains(&inst.label) {
                return Err(Error::schema(
                    i,
                    format!("label {:?} not in scheme {}", inst.label, scheme.name()),
                ));
            }
            if !seen.insert(inst.id.clone()) {
                return Err(Error::schema(i, format!("duplicate instance id {:?}", inst.id)));
            }
        }
        Ok(Corpus {
            scheme,
            split_tag,
            instances,
        })
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn texts(&self) -> impl Iterator<Item = &str> {
        self.instances.iter().map(|i| i.text.as_str())
    }

    /// Label index (within the scheme) of every instance.
    pub fn label_indices(&self) -> Vec<usize> {
        self.instances
            .iter()
            .map(|i| self.scheme.index_of(&i.label).expect("validated label"))
            .collect()
    }
}

/// Which part of the check-worthiness export is being loaded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClaimbusterPart {
    Groundtruth,
    Crowdsourced,
}

/// Column names and label-code mapping for the delimited export.
///
/// Published exports vary in encoding, so the mapping from source codes to
/// scheme values is explicit config. The default matches the public export:
/// -1 → NFS, 0 → UFS, 1 → CFS, with literal label names also accepted.
#[derive(Debug, Clone)]
pub struct ClaimbusterColumns {
    pub id: String,
    pub text: String,
    pub label: String,
    pub speaker: Option<String>,
    pub speaker_title: Option<String>,
    pub speaker_party: Option<String>,
    pub label_map: Vec<(String, String)>,
}

impl Default for ClaimbusterColumns {
    fn default() -> Self {
        ClaimbusterColumns {
            id: "Sentence_id".into(),
            text: "Text".into(),
            label: "Verdict".into(),
            speaker: Some("Speaker".into()),
            speaker_title: Some("Speaker_title".into()),
            speaker_party: Some("Speaker_party".into()),
            label_map: vec![
                ("-1".into(), "NFS".into()),
                ("0".into(), "UFS".into()),
                ("1".into(), "CFS".into()),
                ("NFS".into(), "NFS".into()),
                ("UFS".into(), "UFS".into()),
                ("CFS".into(), "CFS".into()),
            ],
        }
    }
}

/// Load the delimited check-worthiness export (comma/tab auto-detected, header
/// row required) with the default column mapping.
pub fn load_claimbuster(path: &Path, part: ClaimbusterPart) -> Result<Corpus> {
    load_claimbuster_with(path, part, &ClaimbusterColumns::default())
}

/// [`load_claimbuster`] with explicit column names and label mapping.
pub fn load_claimbuster_with(
    path: &Path,
    part: ClaimbusterPart,
    cols: &ClaimbusterColumns,
) -> Result<Corpus> {
    let raw = fs::read_to_string(path).map_err(|e| Error::file(path.display().to_string(), e))?;
    let delimiter = sniff_delimiter(&raw);
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .flexible(false)
        .from_reader(raw.as_bytes());

    let headers = reader
        .headers()
        .map_err(|e| Error::schema(0, format!("cannot read header row: {e}")))?
        .clone();
    if headers.is_empty() || raw.trim().is_empty() {
        return Err(Error::schema(0, "export has no rows"));
    }
    let col = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::schema(0, format!("missing column {name:?}")))
    };
    let id_col = col(&cols.id).ok();
    let text_col = col(&cols.text)?;
    let label_col = col(&cols.label)?;
    let speaker_col = cols.speaker.as_deref().and_then(|c| col(c).ok());
    let title_col = cols.speaker_title.as_deref().and_then(|c| col(c).ok());
    let party_col = cols.speaker_party.as_deref().and_then(|c| col(c).ok());

    let part_tag = match part {
        ClaimbusterPart::Groundtruth => "groundtruth",
        ClaimbusterPart::Crowdsourced => "crowdsourced",
    };

    let mut instances = Vec::new();
    for (row_idx, record) in reader.records().enumerate() {
        let row = row_idx + 1; // 1-based, counting the header as row 0
        let record = record.map_err(|e| Error::schema(row, format!("bad row: {e}")))?;
        let get = |i: usize| record.get(i).unwrap_or("").trim().to_string();
        let raw_label = get(label_col);
        let label = cols
            .label_map
            .iter()
            .find(|(code, _)| *code == raw_label)
            .map(|(_, v)| v.clone())
            .ok_or_else(|| Error::schema(row, format!("unknown label code {raw_label:?}")))?;
        let opt = |c: Option<usize>| {
            c.map(|i| get(i)).filter(|s| !s.is_empty())
        };
        instances.push(ClaimInstance {
            id: id_col
                .map(|i| get(i))
                .filter(|s| !s.is_empty())
                .unwrap_or_else(|| format!("{part_tag}-{row}")),
            text: get(text_col),
            label,
            speaker: opt(speaker_col),
            speaker_title: opt(title_col),
            speaker_party: opt(party_col),
            source_doc: None,
        });
    }
    if instances.is_empty() {
        return Err(Error::schema(0, "export has no rows"));
    }
    log::info!("loaded {} {part_tag} instances from {}", instances.len(), path.display());
    Corpus::new(LabelScheme::Claimbuster3, SplitTag::All, instances)
}

fn sniff_delimiter(raw: &str) -> u8 {
    match raw.lines().next() {
        Some(line) if line.contains('\t') => b'\t',
        _ => b',',
    }
}

#[derive(Debug, Deserialize)]
struct NewsclaimsRow {
    id: Option<String>,
    text: String,
    label: serde_json::Value,
    #[serde(default)]
    doc: Option<String>,
}

/// Raw sentence used by the cleaning pass.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSentence {
    pub id: String,
    pub text: String,
    pub label: String,
    pub doc: Option<String>,
}

/// Load the binary claim corpus from JSON-lines ({"id","text","label","doc"})
/// and apply the cleaning protocol: drop case-folded exact duplicates, strip
/// URL tokens (dropping sentences that become empty), remove bracketed
/// citation markers, and drop sentences with fewer than 4 whitespace tokens.
pub fn load_newsclaims(path: &Path) -> Result<Corpus> {
    let file = fs::File::open(path).map_err(|e| Error::file(path.display().to_string(), e))?;
    let reader = BufReader::new(file);
    let mut rows = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::file(path.display().to_string(), e))?;
        if line.trim().is_empty() {
            continue;
        }
        let row: NewsclaimsRow = serde_json::from_str(&line)
            .map_err(|e| Error::format(i + 1, format!("bad JSON record: {e}")))?;
        let label = match &row.label {
            serde_json::Value::String(s) => match s.as_str() {
                "FVC" | "fvc" | "1" => "FVC",
                _ => "NON_FVC",
            },
            serde_json::Value::Number(n) if n.as_i64() == Some(1) => "FVC",
            serde_json::Value::Bool(true) => "FVC",
            _ => "NON_FVC",
        };
        rows.push(RawSentence {
            id: row.id.unwrap_or_else(|| format!("nc-{}", i + 1)),
            text: row.text,
            label: label.to_string(),
            doc: row.doc,
        });
    }
    let total = rows.len();
    let cleaned = clean_sentences(rows);
    log::info!(
        "cleaning kept {} of {} sentences from {}",
        cleaned.len(),
        total,
        path.display()
    );
    let instances = cleaned
        .into_iter()
        .map(|r| ClaimInstance {
            id: r.id,
            text: r.text,
            label: r.label,
            speaker: None,
            speaker_title: None,
            speaker_party: None,
            source_doc: r.doc,
        })
        .collect();
    Corpus::new(LabelScheme::Newsclaims2, SplitTag::All, instances)
}

/// The cleaning pass, exposed separately so idempotence can be tested.
///
/// Order: duplicate removal (case-folded exact text), URL-token stripping
/// (dropping sentences that become empty), citation-marker removal, and the
/// <4-whitespace-token filter. Citation markers are square-bracket groups
/// containing only digits, commas and whitespace (e.g. "[3]", "[1, 2]").
pub fn clean_sentences(rows: Vec<RawSentence>) -> Vec<RawSentence> {
    let citation = regex::Regex::new(r"\[\s*\d+(\s*,\s*\d+)*\s*\]").expect("static regex");
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for mut row in rows {
        let folded = row.text.to_lowercase();
        let folded = folded.split_whitespace().collect::<Vec<_>>().join(" ");
        if folded.is_empty() || !seen.insert(folded) {
            continue;
        }
        let without_urls: Vec<&str> = row
            .text
            .split_whitespace()
            .filter(|t| !text::is_url_token(t))
            .collect();
        if without_urls.is_empty() {
            continue;
        }
        let no_citations = citation.replace_all(&without_urls.join(" "), "").to_string();
        let normalized = no_citations.split_whitespace().collect::<Vec<_>>().join(" ");
        if text::whitespace_token_count(&normalized) < 4 {
            continue;
        }
        row.text = normalized;
        out.push(row);
    }
    out
}

/// Stratified train/test split, deterministic per seed.
///
/// Per label, round(fraction * class size) instances go to the test side; the
/// selection is a seeded shuffle and both sides keep the original corpus
/// order. Returns (train, test).
pub fn split(corpus: &Corpus, test_fraction: f64, seed: u64) -> Result<(Corpus, Corpus)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::Argument(format!(
            "test_fraction must be in (0,1), got {test_fraction}"
        )));
    }
    if corpus.is_empty() {
        return Err(Error::Argument("cannot split an empty corpus".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut test_idx = HashSet::new();
    for label in corpus.scheme.values() {
        let mut class_idx: Vec<usize> = corpus
            .instances
            .iter()
            .enumerate()
            .filter(|(_, inst)| inst.label == *label)
            .map(|(i, _)| i)
            .collect();
        let n_test = (test_fraction * class_idx.len() as f64).round() as usize;
        class_idx.shuffle(&mut rng);
        test_idx.extend(class_idx.into_iter().take(n_test));
    }
    let mut train_instances = Vec::new();
    let mut test_instances = Vec::new();
    for (i, inst) in corpus.instances.iter().enumerate() {
        if test_idx.contains(&i) {
            test_instances.push(inst.clone());
        } else {
            train_instances.push(inst.clone());
        }
    }
    Ok((
        Corpus {
            scheme: corpus.scheme,
            split_tag: SplitTag::Train,
            instances: train_instances,
        },
        Corpus {
            scheme: corpus.scheme,
            split_tag: SplitTag::Test,
            instances: test_instances,
        },
    ))
}

/// Per-label (count, percent) in scheme order; empty for an empty corpus.
pub fn class_distribution(corpus: &Corpus) -> Vec<(String, usize, f64)> {
    if corpus.is_empty() {
        return Vec::new();
    }
    let total = corpus.len() as f64;
    corpus
        .scheme
        .values()
        .iter()
        .map(|label| {
            let count = corpus.instances.iter().filter(|i| i.label == *label).count();
            (label.to_string(), count, 100.0 * count as f64 / total)
        })
        .collect()
}

#[derive(Debug, Serialize, Deserialize)]
struct CorpusHeader {
    scheme: LabelScheme,
    split_tag: SplitTag,
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    meta: serde_json::Value,
}

/// Persist a corpus as JSON-lines: a scheme header record followed by one
/// instance per line. `meta` is embedded in the header (config hash, seed).
pub fn save_jsonl(corpus: &Corpus, path: &Path, meta: serde_json::Value) -> Result<()> {
    let mut out = fs::File::create(path).map_err(|e| Error::file(path.display().to_string(), e))?;
    let header = CorpusHeader {
        scheme: corpus.scheme,
        split_tag: corpus.split_tag,
        meta,
    };
    let mut buf = serde_json::to_string(&header).expect("header serializes");
    buf.push('\n');
    for inst in &corpus.instances {
        buf.push_str(&serde_json::to_string(inst).expect("instance serializes"));
        buf.push('\n');
    }
    out.write_all(buf.as_bytes())
        .map_err(|e| Error::file(path.display().to_string(), e))
}

/// Load a corpus persisted by [`save_jsonl`].
pub fn load_jsonl(path: &Path) -> Result<Corpus> {
    let raw = fs::read_to_string(path).map_err(|e| Error::file(path.display().to_string(), e))?;
    let mut lines = raw.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header_line) = lines
        .next()
        .ok_or_else(|| Error::format(1, "missing corpus header record"))?;
    let header: CorpusHeader = serde_json::from_str(header_line)
        .map_err(|e| Error::format(1, format!("bad header record: {e}")))?;
    let mut instances = Vec::new();
    for (i, line) in lines {
        let inst: ClaimInstance = serde_json::from_str(line)
            .map_err(|e| Error::format(i + 1, format!("bad instance record: {e}")))?;
        instances.push(inst);
    }
    Corpus::new(header.scheme, header.split_tag, instances)
}
