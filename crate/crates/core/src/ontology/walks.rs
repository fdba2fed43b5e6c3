//! Random-walk corpus over the ontology projection.
//!
//! The ontology projects to a directed graph whose nodes are the individuals
//! plus the schema classes; edges are object axioms and class memberships
//! (relation token "a"). Each node starts `walks_per_entity` uniform random
//! walks of up to `walk_length` nodes, emitted as IRI token sequences with
//! relation tokens interleaved; every structure sentence is then re-emitted
//! lexically with IRIs replaced by their lowercase label tokens.
//!
//! Walk generation is parallel per start node with per-node seeded RNG
//! streams, so output is deterministic and identical to the sequential path.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::par;
use crate::text;

use super::Ontology;

/// Directed graph view of an ontology used for walking.
pub struct Projection {
    /// Node tokens: individual IRIs first, then class tokens.
    pub node_tokens: Vec<String>,
    /// Lexical token expansion of each node (lowercased label tokens).
    pub node_lexical: Vec<Vec<String>>,
    /// Out-edges per node: (relation token, target node).
    pub out_edges: Vec<Vec<(String, usize)>>,
}

impl Projection {
    pub fn new(ont: &Ontology) -> Self {
        let n_ind = ont.individuals.len();
        let mut node_tokens: Vec<String> = ont.individuals.iter().map(|i| i.iri.clone()).collect();
        let mut node_lexical: Vec<Vec<String>> = ont
            .individuals
            .iter()
            .map(|i| text::tokenize(&i.label))
            .collect();
        for class in &ont.classes {
            node_tokens.push(format!("ck:{class}"));
            node_lexical.push(text::tokenize(class));
        }
        let mut out_edges = vec![Vec::new(); node_tokens.len()];
        for (s, p, o) in &ont.object_axioms {
            out_edges[*s].push((p.to_lowercase(), *o));
        }
        for (i, ind) in ont.individuals.iter().enumerate() {
            for &c in &ind.classes {
                out_edges[i].push(("a".to_string(), n_ind + c));
            }
        }
        Projection {
            node_tokens,
            node_lexical,
            out_edges,
        }
    }

    pub fn node_count(&self) -> usize {
        self.node_tokens.len()
    }
}

fn node_seed(seed: u64, node: usize) -> u64 {
    seed ^ (node as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

/// Structure walks started at one node; deterministic per (seed, node).
pub fn generate_walks_for_node(
    projection: &Projection,
    node: usize,
    walk_length: usize,
    walks_per_entity: usize,
    seed: u64,
) -> Vec<Vec<String>> {
    let mut rng = ChaCha8Rng::seed_from_u64(node_seed(seed, node));
    let mut walks = Vec::with_capacity(walks_per_entity);
    for _ in 0..walks_per_entity {
        let mut sentence = vec![projection.node_tokens[node].clone()];
        let mut current = node;
        for _ in 1..walk_length {
            let edges = &projection.out_edges[current];
            if edges.is_empty() {
                break;
            }
            let (rel, next) = &edges[rng.gen_range(0..edges.len())];
            sentence.push(rel.clone());
            sentence.push(projection.node_tokens[*next].clone());
            current = *next;
        }
        walks.push(sentence);
    }
    walks
}

fn lexicalize(projection: &Projection, sentence: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    for token in sentence {
        match projection.node_tokens.iter().position(|t| t == token) {
            Some(node) => out.extend(projection.node_lexical[node].iter().cloned()),
            None => out.push(token.clone()),
        }
    }
    out
}

/// All structure sentences (entity order) followed by their lexical variants.
pub fn generate_walk_corpus(
    ont: &Ontology,
    walk_length: usize,
    walks_per_entity: usize,
    seed: u64,
) -> Vec<Vec<String>> {
    let projection = Projection::new(ont);
    let nodes: Vec<usize> = (0..projection.node_count()).collect();
    let per_node = par::map_collect(&nodes, |&node| {
        generate_walks_for_node(&projection, node, walk_length, walks_per_entity, seed)
    });
    let structure: Vec<Vec<String>> = per_node.into_iter().flatten().collect();
    let lexical: Vec<Vec<String>> = structure
        .iter()
        .map(|s| lexicalize(&projection, s))
        .filter(|s| !s.is_empty())
        .collect();
    let mut corpus = structure;
    corpus.extend(lexical);
    corpus
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ontology::{build_ontology, FactCheckRecord};

    fn chain_ontology() -> Ontology {
        // claim -> mentionsEntity -> entity; entity is a sink besides its
        // class edge.
        let rec = FactCheckRecord {
            claim_text: "alpha beta gamma".into(),
            normalized_label: "FALSE".into(),
            debunk_links: vec![],
            review_body: String::new(),
            review_title: "review title".into(),
            references: vec![],
            claim_entities: vec!["Oval Office".into()],
            review_entities: vec![],
            wiki_categories: vec![],
            review_author: String::new(),
            publication_date: String::new(),
            language: None,
        };
        build_ontology(&[rec]).unwrap()
    }

    #[test]
    fn isolated_node_walk_is_single_token() {
        let ont = chain_ontology();
        let projection = Projection::new(&ont);
        // Class nodes have no out-edges: their walks are one token long.
        let class_node = projection
            .node_tokens
            .iter()
            .position(|t| t == "ck:Claim")
            .unwrap();
        let walks = generate_walks_for_node(&projection, class_node, 4, 2, 0);
        assert_eq!(walks.len(), 2);
        for w in walks {
            assert_eq!(w, vec!["ck:Claim".to_string()]);
        }
    }

    #[test]
    fn corpus_is_reproducible_per_seed() {
        let ont = chain_ontology();
        let a = generate_walk_corpus(&ont, 3, 2, 7);
        let b = generate_walk_corpus(&ont, 3, 2, 7);
        assert_eq!(a, b);
        let c = generate_walk_corpus(&ont, 3, 2, 8);
        assert_ne!(a, c);
    }

    #[test]
    fn every_node_starts_a_walk() {
        let ont = chain_ontology();
        let projection = Projection::new(&ont);
        let corpus = generate_walk_corpus(&ont, 4, 1, 0);
        for token in &projection.node_tokens {
            assert!(
                corpus.iter().any(|s| s.first() == Some(token)),
                "{token} never starts a walk"
            );
        }
    }

    #[test]
    fn lexical_variant_contains_label_tokens() {
        let ont = chain_ontology();
        let corpus = generate_walk_corpus(&ont, 3, 3, 1);
        // Some lexical sentence must contain the claim's label tokens
        // wherever its IRI appeared in a structure walk.
        assert!(corpus
            .iter()
            .any(|s| s.windows(3).any(|w| w == ["alpha", "beta", "gamma"])));
        // Structure sentences interleave relation tokens.
        assert!(corpus
            .iter()
            .any(|s| s.iter().any(|t| t == "mentionsentity" || t == "haslabel")));
    }

    #[cfg(feature = "parallel")]
    #[test]
    fn parallel_matches_sequential() {
        let ont = chain_ontology();
        let projection = Projection::new(&ont);
        let nodes: Vec<usize> = (0..projection.node_count()).collect();
        let par_out = crate::par::map_collect_par(&nodes, |&n| {
            generate_walks_for_node(&projection, n, 4, 2, 5)
        });
        let seq_out = crate::par::map_collect_seq(&nodes, |&n| {
            generate_walks_for_node(&projection, n, 4, 2, 5)
        });
        assert_eq!(par_out, seq_out);
    }
}
