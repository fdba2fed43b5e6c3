//! Skip-gram with negative sampling, trained by plain SGD.
//!
//! The pair objective is log σ(u_o·v_c) + Σ_n log σ(−u_n·v_c); the trainer
//! minimizes its negation over (center, context) pairs inside a fixed window,
//! sampling negatives from the unigram^0.75 distribution. Training is
//! single-threaded and bitwise deterministic per seed.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::text;

use super::EmbeddingTable;

#[derive(Debug, Clone)]
pub struct SkipGramConfig {
    pub dim: usize,
    pub window: usize,
    pub negative: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub min_count: usize,
    pub seed: u64,
}

impl Default for SkipGramConfig {
    fn default() -> Self {
        SkipGramConfig {
            dim: 100,
            window: 5,
            negative: 5,
            epochs: 5,
            learning_rate: 0.025,
            min_count: 1,
            seed: 0,
        }
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Numerically stable -ln σ(x).
fn neg_log_sigmoid(x: f64) -> f64 {
    // -ln σ(x) = ln(1 + e^{-x}) = softplus(-x)
    if x > 0.0 {
        (-x).exp().ln_1p()
    } else {
        -x + x.exp().ln_1p()
    }
}

/// Negative-sampling loss for one (center, context, negatives) triple:
/// L = -ln σ(u_o·v_c) - Σ_n ln σ(-u_n·v_c).
pub fn sgns_pair_loss(v_c: &[f64], u_o: &[f64], u_negs: &[Vec<f64>]) -> f64 {
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut loss = neg_log_sigmoid(dot(u_o, v_c));
    for u_n in u_negs {
        loss += neg_log_sigmoid(-dot(u_n, v_c));
    }
    loss
}

/// Analytic gradients of [`sgns_pair_loss`] with respect to v_c, u_o and each
/// negative vector.
pub fn sgns_pair_grad(
    v_c: &[f64],
    u_o: &[f64],
    u_negs: &[Vec<f64>],
) -> (Vec<f64>, Vec<f64>, Vec<Vec<f64>>) {
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let dim = v_c.len();
    let g_pos = sigmoid(dot(u_o, v_c)) - 1.0;
    let mut grad_vc: Vec<f64> = u_o.iter().map(|x| g_pos * x).collect();
    let grad_uo: Vec<f64> = v_c.iter().map(|x| g_pos * x).collect();
    let mut grad_negs = Vec::with_capacity(u_negs.len());
    for u_n in u_negs {
        let g_neg = sigmoid(dot(u_n, v_c));
        for i in 0..dim {
            grad_vc[i] += g_neg * u_n[i];
        }
        grad_negs.push(v_c.iter().map(|x| g_neg * x).collect());
    }
    (grad_vc, grad_uo, grad_negs)
}

/// Train skip-gram embeddings on a corpus (texts run through the shared
/// tokenizer).
pub fn train_skipgram(train: &Corpus, cfg: &SkipGramConfig) -> Result<EmbeddingTable> {
    let sentences: Vec<Vec<String>> = train.texts().map(text::tokenize).collect();
    train_skipgram_sentences(&sentences, cfg)
}

/// Train skip-gram embeddings over pre-tokenized sentences. Also used by the
/// ontology walk embedder, whose tokens are IRIs that must not be re-tokenized.
pub fn train_skipgram_sentences(
    sentences: &[Vec<String>],
    cfg: &SkipGramConfig,
) -> Result<EmbeddingTable> {
    if cfg.dim < 2 {
        return Err(Error::Argument(format!("dim must be >= 2, got {}", cfg.dim)));
    }
    if sentences.iter().all(|s| s.is_empty()) {
        return Err(Error::Argument("cannot train on an empty corpus".into()));
    }

    // Vocabulary: tokens with count >= min_count, lexicographic order.
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for s in sentences {
        for t in s {
            *counts.entry(t.as_str()).or_insert(0) += 1;
        }
    }
    let mut vocab: Vec<(&str, usize)> = counts
        .into_iter()
        .filter(|(_, c)| *c >= cfg.min_count.max(1))
        .collect();
    vocab.sort_by(|a, b| a.0.cmp(b.0));
    if vocab.is_empty() {
        return Err(Error::Argument("min_count leaves an empty vocabulary".into()));
    }
    let index: HashMap<&str, usize> = vocab.iter().enumerate().map(|(i, (t, _))| (*t, i)).collect();
    let n_vocab = vocab.len();

    // Unigram^0.75 cumulative table for negative sampling.
    let weights: Vec<f64> = vocab.iter().map(|(_, c)| (*c as f64).powf(0.75)).collect();
    let total: f64 = weights.iter().sum();
    let mut cdf = Vec::with_capacity(n_vocab);
    let mut acc = 0.0;
    for w in &weights {
        acc += w / total;
        cdf.push(acc);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let dim = cfg.dim;
    let mut input: Vec<Vec<f64>> = (0..n_vocab)
        .map(|_| {
            (0..dim)
                .map(|_| rng.gen_range(-0.5..0.5) / dim as f64)
                .collect()
        })
        .collect();
    let mut output: Vec<Vec<f64>> = vec![vec![0.0; dim]; n_vocab];

    let sample_negative = |rng: &mut ChaCha8Rng| -> usize {
        let x: f64 = rng.gen_range(0.0..1.0);
        cdf.partition_point(|&c| c < x).min(n_vocab - 1)
    };

    let id_sentences: Vec<Vec<usize>> = sentences
        .iter()
        .map(|s| s.iter().filter_map(|t| index.get(t.as_str()).copied()).collect())
        .collect();

    for _epoch in 0..cfg.epochs {
        for sentence in &id_sentences {
            for (center_pos, &center) in sentence.iter().enumerate() {
                let lo = center_pos.saturating_sub(cfg.window);
                let hi = (center_pos + cfg.window).min(sentence.len().saturating_sub(1));
                for ctx_pos in lo..=hi {
                    if ctx_pos == center_pos {
                        continue;
                    }
                    let target = sentence[ctx_pos];
                    let mut negs = Vec::with_capacity(cfg.negative);
                    let mut tries = 0;
                    while negs.len() < cfg.negative && tries < cfg.negative * 20 {
                        tries += 1;
                        let n = sample_negative(&mut rng);
                        if n != target {
                            negs.push(n);
                        }
                    }
                    // v_c = input[center]; u_o = output[target]
                    let neg_vecs: Vec<Vec<f64>> = negs.iter().map(|&n| output[n].clone()).collect();
                    let (g_vc, g_uo, g_negs) =
                        sgns_pair_grad(&input[center], &output[target], &neg_vecs);
                    let lr = cfg.learning_rate;
                    for i in 0..dim {
                        output[target][i] -= lr * g_uo[i];
                    }
                    for (&n, g) in negs.iter().zip(&g_negs) {
                        for i in 0..dim {
                            output[n][i] -= lr * g[i];
                        }
                    }
                    for i in 0..dim {
                        input[center][i] -= lr * g_vc[i];
                    }
                }
            }
        }
    }

    let mut table = EmbeddingTable::new(dim);
    for ((token, _), vec) in vocab.iter().zip(input) {
        table.insert(token, vec)?;
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_sentences() -> Vec<Vec<String>> {
        // {a, b} always co-occur; z only ever appears with q.
        let mut s = Vec::new();
        for _ in 0..30 {
            s.push(vec!["a".to_string(), "b".to_string()]);
            s.push(vec!["z".to_string(), "q".to_string()]);
        }
        s
    }

    #[test]
    fn cooccurring_pair_beats_disjoint_pair() {
        let cfg = SkipGramConfig {
            dim: 16,
            window: 2,
            negative: 5,
            epochs: 30,
            learning_rate: 0.05,
            min_count: 1,
            seed: 3,
        };
        let table = train_skipgram_sentences(&toy_sentences(), &cfg).unwrap();
        let ab = table.cosine("a", "b").unwrap();
        let az = table.cosine("a", "z").unwrap();
        assert!(ab > az, "cos(a,b)={ab} should exceed cos(a,z)={az}");
    }

    #[test]
    fn zero_epochs_returns_initialization() {
        let cfg = SkipGramConfig {
            epochs: 0,
            dim: 8,
            seed: 11,
            ..Default::default()
        };
        let t1 = train_skipgram_sentences(&toy_sentences(), &cfg).unwrap();
        let t2 = train_skipgram_sentences(&toy_sentences(), &cfg).unwrap();
        assert_eq!(t1, t2);
        // Initialization is the seeded uniform input matrix, bounded by 0.5/dim.
        for tok in t1.tokens() {
            assert!(t1.get(tok).unwrap().iter().all(|x| x.abs() <= 0.5 / 8.0));
        }
    }

    #[test]
    fn same_seed_is_bitwise_identical() {
        let cfg = SkipGramConfig {
            dim: 8,
            epochs: 3,
            seed: 42,
            ..Default::default()
        };
        let t1 = train_skipgram_sentences(&toy_sentences(), &cfg).unwrap();
        let t2 = train_skipgram_sentences(&toy_sentences(), &cfg).unwrap();
        assert_eq!(t1, t2);
    }

    #[test]
    fn dim_below_two_is_rejected() {
        let cfg = SkipGramConfig {
            dim: 1,
            ..Default::default()
        };
        assert!(matches!(
            train_skipgram_sentences(&toy_sentences(), &cfg),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn pair_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let dim = 5;
            let rand_vec = |rng: &mut ChaCha8Rng| -> Vec<f64> {
                (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect()
            };
            let v_c = rand_vec(&mut rng);
            let u_o = rand_vec(&mut rng);
            let u_negs: Vec<Vec<f64>> = (0..3).map(|_| rand_vec(&mut rng)).collect();
            let (g_vc, g_uo, g_negs) = sgns_pair_grad(&v_c, &u_o, &u_negs);

            let eps = 1e-6;
            let check = |analytic: f64, f_plus: f64, f_minus: f64| {
                let numeric = (f_plus - f_minus) / (2.0 * eps);
                let denom = analytic.abs().max(numeric.abs()).max(1e-8);
                assert!(
                    ((analytic - numeric) / denom).abs() < 1e-4,
                    "analytic {analytic} vs numeric {numeric}"
                );
            };
            for i in 0..dim {
                let mut vp = v_c.clone();
                vp[i] += eps;
                let mut vm = v_c.clone();
                vm[i] -= eps;
                check(
                    g_vc[i],
                    sgns_pair_loss(&vp, &u_o, &u_negs),
                    sgns_pair_loss(&vm, &u_o, &u_negs),
                );
                let mut up = u_o.clone();
                up[i] += eps;
                let mut um = u_o.clone();
                um[i] -= eps;
                check(
                    g_uo[i],
                    sgns_pair_loss(&v_c, &up, &u_negs),
                    sgns_pair_loss(&v_c, &um, &u_negs),
                );
                for (n, g_n) in g_negs.iter().enumerate() {
                    let mut np = u_negs.clone();
                    np[n][i] += eps;
                    let mut nm = u_negs.clone();
                    nm[n][i] -= eps;
                    check(
                        g_n[i],
                        sgns_pair_loss(&v_c, &u_o, &np),
                        sgns_pair_loss(&v_c, &u_o, &nm),
                    );
                }
            }
        }
    }
}
