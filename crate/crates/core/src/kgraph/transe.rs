//! Translational triple embeddings trained with a margin ranking loss.
//!
//! A triple (h, r, t) is scored by the dissimilarity d(h + r, t) under L1 or
//! L2; training minimizes Σ max(0, γ + d(pos) − d(neg)) over corrupted
//! triples, renormalizing entity rows to unit L2 after every update step.

use std::collections::HashMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::tensorio::{self, Matrix};

use super::{Triple, TripleGraph};

/// Distance norm used by the dissimilarity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Norm {
    L1,
    L2,
}

impl Norm {
    pub fn as_str(&self) -> &'static str {
        match self {
            Norm::L1 => "L1",
            Norm::L2 => "L2",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "L1" => Ok(Norm::L1),
            "L2" => Ok(Norm::L2),
            other => Err(Error::Argument(format!("unknown norm {other:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TransEConfig {
    pub k: usize,
    pub margin: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch: usize,
    pub norm: Norm,
    pub seed: u64,
}

impl Default for TransEConfig {
    fn default() -> Self {
        TransEConfig {
            k: 50,
            margin: 1.0,
            learning_rate: 0.01,
            epochs: 100,
            batch: 32,
            norm: Norm::L2,
            seed: 0,
        }
    }
}

/// Entity and relation embedding matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct TransEModel {
    pub entity_emb: Matrix,
    pub relation_emb: Matrix,
    pub norm: Norm,
    pub margin: f64,
}

impl TransEModel {
    pub fn dim(&self) -> usize {
        self.entity_emb.cols
    }

    pub fn entity_embedding(&self, id: usize) -> Result<&[f64]> {
        if id >= self.entity_emb.rows {
            return Err(Error::Argument(format!("unknown entity id {id}")));
        }
        Ok(self.entity_emb.row(id))
    }

    pub fn relation_embedding(&self, id: usize) -> Result<&[f64]> {
        if id >= self.relation_emb.rows {
            return Err(Error::Argument(format!("unknown relation id {id}")));
        }
        Ok(self.relation_emb.row(id))
    }

    /// Persist as a binary tensor checkpoint whose sidecar records the
    /// dimensions, norm, margin and the vocabulary hashes of `graph`.
    pub fn save(&self, stem: &Path, graph: &TripleGraph) -> Result<()> {
        let meta = serde_json::json!({
            "k": self.dim(),
            "norm": self.norm.as_str(),
            "margin": self.margin,
            "entity_vocab_sha256": tensorio::vocab_hash(graph.entities.names()),
            "relation_vocab_sha256": tensorio::vocab_hash(graph.relations.names()),
        });
        tensorio::save_tensors(
            stem,
            &[("entity_emb", &self.entity_emb), ("relation_emb", &self.relation_emb)],
            meta,
        )
    }

    /// Load a checkpoint, verifying it was trained against `graph`'s
    /// vocabularies.
    pub fn load(stem: &Path, graph: &TripleGraph) -> Result<Self> {
        let (tensors, meta) = tensorio::load_tensors(stem)?;
        let mut map: HashMap<String, Matrix> = tensors.into_iter().collect();
        let entity_emb = map
            .remove("entity_emb")
            .ok_or_else(|| Error::format(0, "checkpoint missing entity_emb"))?;
        let relation_emb = map
            .remove("relation_emb")
            .ok_or_else(|| Error::format(0, "checkpoint missing relation_emb"))?;
        let norm = Norm::parse(meta["norm"].as_str().unwrap_or("L2"))?;
        let margin = meta["margin"].as_f64().unwrap_or(1.0);
        let expect_e = tensorio::vocab_hash(graph.entities.names());
        let expect_r = tensorio::vocab_hash(graph.relations.names());
        if meta["entity_vocab_sha256"] != expect_e.as_str()
            || meta["relation_vocab_sha256"] != expect_r.as_str()
        {
            return Err(Error::State(
                "checkpoint vocabulary hashes do not match the graph".into(),
            ));
        }
        Ok(TransEModel {
            entity_emb,
            relation_emb,
            norm,
            margin,
        })
    }
}

fn norm_value(norm: Norm, x: &[f64]) -> f64 {
    match norm {
        Norm::L1 => x.iter().map(|v| v.abs()).sum(),
        Norm::L2 => x.iter().map(|v| v * v).sum::<f64>().sqrt(),
    }
}

/// Gradient of d(x) with respect to x.
fn norm_grad(norm: Norm, x: &[f64]) -> Vec<f64> {
    match norm {
        Norm::L1 => x.iter().map(|v| v.signum()).collect(),
        Norm::L2 => {
            let n = norm_value(Norm::L2, x);
            if n == 0.0 {
                vec![0.0; x.len()]
            } else {
                x.iter().map(|v| v / n).collect()
            }
        }
    }
}

fn translation_residual(model: &TransEModel, t: Triple) -> Vec<f64> {
    let h = model.entity_emb.row(t.head);
    let r = model.relation_emb.row(t.relation);
    let tl = model.entity_emb.row(t.tail);
    h.iter()
        .zip(r)
        .zip(tl)
        .map(|((hv, rv), tv)| hv + rv - tv)
        .collect()
}

/// Dissimilarity d(h + r, t); lower means more plausible.
pub fn transe_score(model: &TransEModel, head: usize, relation: usize, tail: usize) -> Result<f64> {
    if head >= model.entity_emb.rows || tail >= model.entity_emb.rows {
        return Err(Error::Argument(format!("unknown entity id {}", head.max(tail))));
    }
    if relation >= model.relation_emb.rows {
        return Err(Error::Argument(format!("unknown relation id {relation}")));
    }
    Ok(norm_value(
        model.norm,
        &translation_residual(
            model,
            Triple {
                head,
                relation,
                tail,
            },
        ),
    ))
}

/// Hinge term max(0, γ + d(pos) − d(neg)) for one corrupted pair.
pub fn transe_margin_loss(model: &TransEModel, pos: Triple, neg: Triple) -> f64 {
    let d_pos = norm_value(model.norm, &translation_residual(model, pos));
    let d_neg = norm_value(model.norm, &translation_residual(model, neg));
    (model.margin + d_pos - d_neg).max(0.0)
}

/// Analytic gradients of [`transe_margin_loss`], as sparse per-row maps for
/// entities and relations. An inactive hinge yields empty maps.
pub fn transe_margin_grad(
    model: &TransEModel,
    pos: Triple,
    neg: Triple,
) -> (HashMap<usize, Vec<f64>>, HashMap<usize, Vec<f64>>) {
    let mut entity_grads: HashMap<usize, Vec<f64>> = HashMap::new();
    let mut relation_grads: HashMap<usize, Vec<f64>> = HashMap::new();
    let x_pos = translation_residual(model, pos);
    let x_neg = translation_residual(model, neg);
    let activation =
        model.margin + norm_value(model.norm, &x_pos) - norm_value(model.norm, &x_neg);
    if activation <= 0.0 {
        return (entity_grads, relation_grads);
    }
    let k = model.dim();
    let g_pos = norm_grad(model.norm, &x_pos);
    let g_neg = norm_grad(model.norm, &x_neg);
    let add = |map: &mut HashMap<usize, Vec<f64>>, id: usize, g: &[f64], sign: f64| {
        let row = map.entry(id).or_insert_with(|| vec![0.0; k]);
        for (r, v) in row.iter_mut().zip(g) {
            *r += sign * v;
        }
    };
    add(&mut entity_grads, pos.head, &g_pos, 1.0);
    add(&mut entity_grads, pos.tail, &g_pos, -1.0);
    add(&mut relation_grads, pos.relation, &g_pos, 1.0);
    add(&mut entity_grads, neg.head, &g_neg, -1.0);
    add(&mut entity_grads, neg.tail, &g_neg, 1.0);
    add(&mut relation_grads, neg.relation, &g_neg, -1.0);
    (entity_grads, relation_grads)
}

fn renormalize_row(m: &mut Matrix, id: usize) {
    let row = m.row_mut(id);
    let n = row.iter().map(|v| v * v).sum::<f64>().sqrt();
    if n > 0.0 {
        for v in row {
            *v /= n;
        }
    }
}

/// Initialize a model for `graph` without training (uniform ±6/√k, unit-norm
/// entity rows, relations normalized once).
pub fn transe_init(graph: &TripleGraph, cfg: &TransEConfig, rng: &mut ChaCha8Rng) -> TransEModel {
    let k = cfg.k;
    let bound = 6.0 / (k as f64).sqrt();
    let mut fill = |rows: usize| -> Matrix {
        Matrix {
            rows,
            cols: k,
            data: (0..rows * k).map(|_| rng.gen_range(-bound..bound)).collect(),
        }
    };
    let mut entity_emb = fill(graph.entities.len());
    let mut relation_emb = fill(graph.relations.len());
    for i in 0..entity_emb.rows {
        renormalize_row(&mut entity_emb, i);
    }
    for i in 0..relation_emb.rows {
        renormalize_row(&mut relation_emb, i);
    }
    TransEModel {
        entity_emb,
        relation_emb,
        norm: cfg.norm,
        margin: cfg.margin,
    }
}

/// Train translational embeddings on a triple graph.
///
/// Corruption replaces the head or the tail (uniformly) with a random entity,
/// resampling while the corrupted triple exists in the graph. Updates are
/// accumulated per minibatch; touched entity rows are renormalized to unit L2
/// after each batch. Deterministic per seed.
pub fn transe_train(graph: &TripleGraph, cfg: &TransEConfig) -> Result<TransEModel> {
    if graph.is_empty() {
        return Err(Error::Argument("graph has no triples".into()));
    }
    if cfg.k < 2 {
        return Err(Error::Argument(format!("k must be >= 2, got {}", cfg.k)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut model = transe_init(graph, cfg, &mut rng);
    let n_entities = graph.entities.len();
    if n_entities < 2 {
        return Ok(model); // nothing to corrupt against
    }
    let batch = cfg.batch.max(1);

    for _epoch in 0..cfg.epochs {
        let mut order: Vec<usize> = (0..graph.triples.len()).collect();
        use rand::seq::SliceRandom;
        order.shuffle(&mut rng);
        for chunk in order.chunks(batch) {
            let mut entity_updates: HashMap<usize, Vec<f64>> = HashMap::new();
            let mut relation_updates: HashMap<usize, Vec<f64>> = HashMap::new();
            for &ti in chunk {
                let pos = graph.triples[ti];
                let Some(neg) = corrupt(graph, pos, &mut rng) else {
                    continue;
                };
                let (eg, rg) = transe_margin_grad(&model, pos, neg);
                for (id, g) in eg {
                    let row = entity_updates.entry(id).or_insert_with(|| vec![0.0; cfg.k]);
                    for (r, v) in row.iter_mut().zip(g) {
                        *r += v;
                    }
                }
                for (id, g) in rg {
                    let row = relation_updates.entry(id).or_insert_with(|| vec![0.0; cfg.k]);
                    for (r, v) in row.iter_mut().zip(g) {
                        *r += v;
                    }
                }
            }
            let mut touched: Vec<usize> = entity_updates.keys().copied().collect();
            touched.sort_unstable();
            for (id, g) in entity_updates {
                let row = model.entity_emb.row_mut(id);
                for (r, v) in row.iter_mut().zip(g) {
                    *r -= cfg.learning_rate * v;
                }
            }
            for (id, g) in relation_updates {
                let row = model.relation_emb.row_mut(id);
                for (r, v) in row.iter_mut().zip(g) {
                    *r -= cfg.learning_rate * v;
                }
            }
            for id in touched {
                renormalize_row(&mut model.entity_emb, id);
            }
        }
    }
    Ok(model)
}

/// Sample a corrupted triple: head or tail replaced uniformly, resampling
/// while the corrupted triple is itself in the graph.
fn corrupt(graph: &TripleGraph, pos: Triple, rng: &mut ChaCha8Rng) -> Option<Triple> {
    let n = graph.entities.len();
    for _ in 0..200 {
        let corrupt_head: bool = rng.gen();
        let candidate: usize = rng.gen_range(0..n);
        let neg = if corrupt_head {
            Triple {
                head: candidate,
                ..pos
            }
        } else {
            Triple {
                tail: candidate,
                ..pos
            }
        };
        if neg != pos && !graph.contains(&neg) {
            return Some(neg);
        }
    }
    None
}

/// Filtered rank of the true tail among all entities (ties counted
/// pessimistically); candidates forming other true triples are skipped.
pub fn rank_tail(model: &TransEModel, graph: &TripleGraph, triple: Triple) -> Result<usize> {
    let d_true = transe_score(model, triple.head, triple.relation, triple.tail)?;
    let mut rank = 1usize;
    for cand in 0..graph.entities.len() {
        if cand == triple.tail {
            continue;
        }
        let as_triple = Triple {
            tail: cand,
            ..triple
        };
        if graph.contains(&as_triple) {
            continue; // filtered setting
        }
        let d = transe_score(model, triple.head, triple.relation, cand)?;
        if d <= d_true {
            rank += 1;
        }
    }
    Ok(rank)
}

/// Mean filtered tail rank over all training triples.
pub fn mean_rank(model: &TransEModel, graph: &TripleGraph) -> Result<f64> {
    let mut total = 0usize;
    for &t in &graph.triples {
        total += rank_tail(model, graph, t)?;
    }
    Ok(total as f64 / graph.triples.len() as f64)
}

/// Mean filtered reciprocal tail rank over all training triples.
pub fn mean_reciprocal_rank(model: &TransEModel, graph: &TripleGraph) -> Result<f64> {
    let mut total = 0.0;
    for &t in &graph.triples {
        total += 1.0 / rank_tail(model, graph, t)? as f64;
    }
    Ok(total / graph.triples.len() as f64)
}
