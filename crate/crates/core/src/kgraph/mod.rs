//! Metadata knowledge graph: construction from instance metadata, entity
//! linking, and TransE embeddings of the resulting triples.

mod linker;
mod transe;

pub use linker::{EntityLinker, GazetteerLinker, LinkedEntity};
pub use transe::{
    mean_rank, mean_reciprocal_rank, rank_tail, transe_margin_grad, transe_margin_loss,
    transe_score, transe_train, Norm, TransEConfig, TransEModel,
};

use std::collections::{HashMap, HashSet};
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::corpus::{ClaimInstance, Corpus};
use crate::error::{Error, Result};
use crate::par;
use crate::text;

/// One (head, relation, tail) edge, by vocabulary id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Triple {
    pub head: usize,
    pub relation: usize,
    pub tail: usize,
}

/// Interned name vocabulary preserving first-seen order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Vocab {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocab {
    pub fn intern(&mut self, name: &str) -> usize {
        if let Some(&i) = self.index.get(name) {
            return i;
        }
        let i = self.names.len();
        self.index.insert(name.to_string(), i);
        self.names.push(name.to_string());
        i
    }

    pub fn id(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn name(&self, id: usize) -> Option<&str> {
        self.names.get(id).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }
}

/// Directed labeled graph over interned entity and relation vocabularies.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TripleGraph {
    pub entities: Vocab,
    pub relations: Vocab,
    pub triples: Vec<Triple>,
    triple_set: HashSet<Triple>,
}

impl TripleGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Insert a triple by names; duplicates are ignored.
    pub fn add(&mut self, head: &str, relation: &str, tail: &str) {
        let t = Triple {
            head: self.entities.intern(head),
            relation: self.relations.intern(relation),
            tail: self.entities.intern(tail),
        };
        if self.triple_set.insert(t) {
            self.triples.push(t);
        }
    }

    pub fn contains(&self, t: &Triple) -> bool {
        self.triple_set.contains(t)
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    /// Out-neighbors (relation id, tail id) of an entity.
    pub fn out_edges(&self, head: usize) -> Vec<(usize, usize)> {
        self.triples
            .iter()
            .filter(|t| t.head == head)
            .map(|t| (t.relation, t.tail))
            .collect()
    }

    /// Write triples as TSV `head<TAB>relation<TAB>tail` by name.
    pub fn save_tsv(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        for t in &self.triples {
            out.push_str(self.entities.name(t.head).expect("valid id"));
            out.push('\t');
            out.push_str(self.relations.name(t.relation).expect("valid id"));
            out.push('\t');
            out.push_str(self.entities.name(t.tail).expect("valid id"));
            out.push('\n');
        }
        let mut f = fs::File::create(path).map_err(|e| Error::file(path.display().to_string(), e))?;
        f.write_all(out.as_bytes())
            .map_err(|e| Error::file(path.display().to_string(), e))
    }

    pub fn load_tsv(path: &Path) -> Result<Self> {
        let raw = fs::read_to_string(path).map_err(|e| Error::file(path.display().to_string(), e))?;
        let mut g = TripleGraph::new();
        for (i, line) in raw.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split('\t').collect();
            if parts.len() != 3 {
                return Err(Error::format(i + 1, "expected head<TAB>relation<TAB>tail"));
            }
            g.add(parts[0], parts[1], parts[2]);
        }
        Ok(g)
    }
}

/// Entity node name for a sentence instance.
pub fn sentence_node(id: &str) -> String {
    format!("sent:{id}")
}

fn length_bucket(text: &str) -> &'static str {
    let n = text::whitespace_token_count(text);
    if n <= 10 {
        "le10"
    } else if n <= 25 {
        "11_25"
    } else {
        "gt25"
    }
}

/// Settings for metadata graph construction.
#[derive(Debug, Clone)]
pub struct GraphConfig {
    /// Minimum linker score for a `mentions` edge.
    pub mention_threshold: f64,
}

impl Default for GraphConfig {
    fn default() -> Self {
        GraphConfig {
            mention_threshold: 0.5,
        }
    }
}

/// Triples contributed by one instance (entity/relation names, to be interned
/// during the merge).
fn instance_triples(
    inst: &ClaimInstance,
    linker: &dyn EntityLinker,
    cfg: &GraphConfig,
) -> Vec<(String, &'static str, String)> {
    let node = sentence_node(&inst.id);
    let mut out = Vec::new();
    if let Some(speaker) = &inst.speaker {
        out.push((node.clone(), "hasSpeaker", format!("speaker:{speaker}")));
    }
    if let Some(title) = &inst.speaker_title {
        out.push((node.clone(), "hasSpeakerTitle", format!("title:{title}")));
    }
    if let Some(party) = &inst.speaker_party {
        out.push((node.clone(), "hasParty", format!("party:{party}")));
    }
    out.push((
        node.clone(),
        "hasLengthBucket",
        format!("wordcount:{}", length_bucket(&inst.text)),
    ));
    out.push((
        node.clone(),
        "hasSentimentBucket",
        format!("sentiment:{}", text::sentiment_bucket(&inst.text)),
    ));
    match linker.link(&inst.text, cfg.mention_threshold) {
        Ok(entities) => {
            for e in entities {
                out.push((node.clone(), "mentions", format!("entity:{}", e.entity)));
            }
        }
        Err(e) => {
            log::warn!("linker failed for {}; mentions omitted: {e}", inst.id);
        }
    }
    out
}

/// Build the metadata graph: one sentence node per instance with speaker /
/// title / party edges when present, word-count and sentiment bucket edges
/// always, and `mentions` edges for linked entities above the threshold.
///
/// Per-instance construction runs data-parallel; the deduplicating merge is
/// sequential in corpus order, so the result is deterministic.
pub fn build_metadata_graph(
    corpus: &Corpus,
    linker: &dyn EntityLinker,
    cfg: &GraphConfig,
) -> TripleGraph {
    let per_instance = par::map_collect(&corpus.instances, |inst| instance_triples(inst, linker, cfg));
    let mut graph = TripleGraph::new();
    for triples in per_instance {
        for (h, r, t) in triples {
            graph.add(&h, r, &t);
        }
    }
    graph
}

/// How a sentence's feature vector is derived from the trained graph model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MetadataEncoding {
    /// The trained embedding of the sentence node itself.
    #[default]
    NodeLookup,
    /// Mean of the embeddings of the sentence node's out-neighbors.
    NeighborMean,
}

/// Embedding of an instance's sentence node (or its neighborhood mean).
pub fn encode_metadata(
    instance: &ClaimInstance,
    graph: &TripleGraph,
    model: &TransEModel,
    mode: MetadataEncoding,
) -> Result<Vec<f64>> {
    let node = sentence_node(&instance.id);
    let id = graph
        .entities
        .id(&node)
        .ok_or_else(|| Error::Argument(format!("sentence node {node:?} not in graph")))?;
    match mode {
        MetadataEncoding::NodeLookup => Ok(model.entity_embedding(id)?.to_vec()),
        MetadataEncoding::NeighborMean => {
            let edges = graph.out_edges(id);
            if edges.is_empty() {
                return Ok(model.entity_embedding(id)?.to_vec());
            }
            let k = model.dim();
            let mut mean = vec![0.0; k];
            for (_, tail) in &edges {
                let v = model.entity_embedding(*tail)?;
                for (m, x) in mean.iter_mut().zip(v) {
                    *m += x;
                }
            }
            for m in &mut mean {
                *m /= edges.len() as f64;
            }
            Ok(mean)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{LabelScheme, SplitTag};

    fn inst(id: &str, text: &str, speaker: Option<&str>) -> ClaimInstance {
        ClaimInstance {
            id: id.into(),
            text: text.into(),
            label: "NFS".into(),
            speaker: speaker.map(String::from),
            speaker_title: None,
            speaker_party: None,
            source_doc: None,
        }
    }

    fn corpus(instances: Vec<ClaimInstance>) -> Corpus {
        Corpus::new(LabelScheme::Claimbuster3, SplitTag::All, instances).unwrap()
    }

    #[test]
    fn speaker_only_instance_yields_three_triples() {
        let c = corpus(vec![inst("1", "a plain sentence here", Some("Alice"))]);
        let linker = GazetteerLinker::empty();
        let g = build_metadata_graph(&c, &linker, &GraphConfig::default());
        assert_eq!(g.len(), 3); // hasSpeaker + 2 bucket triples
        assert!(g.relations.id("hasSpeaker").is_some());
        assert!(g.relations.id("hasLengthBucket").is_some());
        assert!(g.relations.id("hasSentimentBucket").is_some());
    }

    #[test]
    fn shared_speaker_is_one_node() {
        let base = corpus(vec![inst("1", "first sentence here now", Some("Alice"))]);
        let both = corpus(vec![
            inst("1", "first sentence here now", Some("Alice")),
            inst("2", "second sentence here now", Some("Alice")),
        ]);
        let linker = GazetteerLinker::empty();
        let g1 = build_metadata_graph(&base, &linker, &GraphConfig::default());
        let g2 = build_metadata_graph(&both, &linker, &GraphConfig::default());
        // Second instance adds its sentence node but reuses speaker + buckets.
        assert_eq!(g2.entities.len(), g1.entities.len() + 1);
    }

    #[test]
    fn linked_entities_become_mentions() {
        let mut linker = GazetteerLinker::empty();
        linker.add_surface("oval office", "OvalOffice");
        let c = corpus(vec![inst("1", "a speech in the Oval Office today", None)]);
        let g = build_metadata_graph(&c, &linker, &GraphConfig::default());
        assert!(g.entities.id("entity:OvalOffice").is_some());
        let mentions = g.relations.id("mentions").unwrap();
        assert_eq!(g.triples.iter().filter(|t| t.relation == mentions).count(), 1);
    }

    #[test]
    fn duplicate_triples_are_dropped() {
        let mut g = TripleGraph::new();
        g.add("a", "r", "b");
        g.add("a", "r", "b");
        assert_eq!(g.len(), 1);
    }

    #[test]
    fn tsv_round_trip() {
        let mut g = TripleGraph::new();
        g.add("sent:1", "hasSpeaker", "speaker:Alice");
        g.add("sent:1", "mentions", "entity:X");
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("triples.tsv");
        g.save_tsv(&path).unwrap();
        let loaded = TripleGraph::load_tsv(&path).unwrap();
        assert_eq!(g, loaded);
    }
}
