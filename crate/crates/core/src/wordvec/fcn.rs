//! Shallow fully connected classifier: input → hidden (ReLU) → softmax.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::tensorio::Matrix;

#[derive(Debug, Clone)]
pub struct FcnConfig {
    pub hidden: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub epochs: usize,
    /// Fraction of rows held out for early stopping; 0 disables it.
    pub validation_fraction: f64,
    pub patience: usize,
    pub seed: u64,
}

impl Default for FcnConfig {
    fn default() -> Self {
        FcnConfig {
            hidden: 500,
            learning_rate: 1e-3,
            momentum: 0.9,
            epochs: 200,
            validation_fraction: 0.1,
            patience: 20,
            seed: 0,
        }
    }
}

/// Trained two-layer network.
#[derive(Debug, Clone)]
pub struct Fcn {
    pub w1: Matrix, // hidden x in
    pub b1: Vec<f64>,
    pub w2: Matrix, // classes x hidden
    pub b2: Vec<f64>,
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|x| (x - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

impl Fcn {
    fn hidden_activations(&self, x: &[f64]) -> Vec<f64> {
        (0..self.w1.rows)
            .map(|h| {
                let z: f64 = self.w1.row(h).iter().zip(x).map(|(w, xi)| w * xi).sum::<f64>()
                    + self.b1[h];
                z.max(0.0)
            })
            .collect()
    }

    /// Class probabilities for one feature row.
    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let h = self.hidden_activations(x);
        let logits: Vec<f64> = (0..self.w2.rows)
            .map(|c| {
                self.w2.row(c).iter().zip(&h).map(|(w, hi)| w * hi).sum::<f64>() + self.b2[c]
            })
            .collect();
        softmax(&logits)
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        let p = self.forward(x);
        p.iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .map(|(i, _)| i)
            .unwrap()
    }
}

/// Train the FCN with full-batch gradient descent + momentum and early
/// stopping on held-out loss, then return it with its predictions on the
/// input rows.
pub fn fcn_classify(
    features: &[Vec<f64>],
    labels: &[usize],
    n_classes: usize,
    cfg: &FcnConfig,
) -> Result<(Fcn, Vec<usize>)> {
    if features.is_empty() || features.len() != labels.len() {
        return Err(Error::Argument(format!(
            "feature/label shape mismatch: {} rows vs {} labels",
            features.len(),
            labels.len()
        )));
    }
    let in_dim = features[0].len();
    if features.iter().any(|r| r.len() != in_dim) {
        return Err(Error::Argument("inconsistent feature dimension".into()));
    }
    if let Some(&bad) = labels.iter().find(|&&y| y >= n_classes) {
        return Err(Error::Argument(format!(
            "label {bad} outside the {n_classes}-class scheme"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let scale = (2.0 / in_dim as f64).sqrt();
    let mut net = Fcn {
        w1: Matrix {
            rows: cfg.hidden,
            cols: in_dim,
            data: (0..cfg.hidden * in_dim)
                .map(|_| rng.gen_range(-scale..scale))
                .collect(),
        },
        b1: vec![0.0; cfg.hidden],
        w2: Matrix {
            rows: n_classes,
            cols: cfg.hidden,
            data: (0..n_classes * cfg.hidden)
                .map(|_| rng.gen_range(-scale..scale))
                .collect(),
        },
        b2: vec![0.0; n_classes],
    };

    // Validation holdout for early stopping (seeded, disjoint from the
    // gradient batch).
    let n = features.len();
    let mut order: Vec<usize> = (0..n).collect();
    use rand::seq::SliceRandom;
    order.shuffle(&mut rng);
    let n_val = ((cfg.validation_fraction * n as f64) as usize).min(n.saturating_sub(1));
    let (val_idx, train_idx) = order.split_at(n_val);

    let mut vel_w1 = vec![0.0; net.w1.data.len()];
    let mut vel_b1 = vec![0.0; cfg.hidden];
    let mut vel_w2 = vec![0.0; net.w2.data.len()];
    let mut vel_b2 = vec![0.0; n_classes];

    let mut best_val = f64::INFINITY;
    let mut best: Option<Fcn> = None;
    let mut since_best = 0usize;

    for _epoch in 0..cfg.epochs {
        // Accumulate full-batch gradients over the training rows.
        let mut g_w1 = vec![0.0; net.w1.data.len()];
        let mut g_b1 = vec![0.0; cfg.hidden];
        let mut g_w2 = vec![0.0; net.w2.data.len()];
        let mut g_b2 = vec![0.0; n_classes];
        let batch = train_idx.len() as f64;
        for &i in train_idx {
            let x = &features[i];
            let h = net.hidden_activations(x);
            let logits: Vec<f64> = (0..n_classes)
                .map(|c| {
                    net.w2.row(c).iter().zip(&h).map(|(w, hi)| w * hi).sum::<f64>() + net.b2[c]
                })
                .collect();
            let p = softmax(&logits);
            // dL/dlogit_c = p_c - 1[y=c], averaged over the batch.
            let mut dlogit = p;
            dlogit[labels[i]] -= 1.0;
            for d in &mut dlogit {
                *d /= batch;
            }
            let mut dh = vec![0.0; cfg.hidden];
            for c in 0..n_classes {
                g_b2[c] += dlogit[c];
                for (j, hj) in h.iter().enumerate() {
                    g_w2[c * cfg.hidden + j] += dlogit[c] * hj;
                    dh[j] += dlogit[c] * net.w2.data[c * cfg.hidden + j];
                }
            }
            for (j, hj) in h.iter().enumerate() {
                if *hj > 0.0 {
                    g_b1[j] += dh[j];
                    for (k, xk) in x.iter().enumerate() {
                        g_w1[j * in_dim + k] += dh[j] * xk;
                    }
                }
            }
        }
        let step = |param: &mut [f64], vel: &mut [f64], grad: &[f64]| {
            for ((p, v), g) in param.iter_mut().zip(vel.iter_mut()).zip(grad) {
                *v = cfg.momentum * *v - cfg.learning_rate * g;
                *p += *v;
            }
        };
        step(&mut net.w1.data, &mut vel_w1, &g_w1);
        step(&mut net.b1, &mut vel_b1, &g_b1);
        step(&mut net.w2.data, &mut vel_w2, &g_w2);
        step(&mut net.b2, &mut vel_b2, &g_b2);

        if !val_idx.is_empty() {
            let mut val_loss = 0.0;
            for &i in val_idx {
                let p = net.forward(&features[i]);
                val_loss -= p[labels[i]].max(1e-12).ln();
            }
            val_loss /= val_idx.len() as f64;
            if val_loss < best_val - 1e-9 {
                best_val = val_loss;
                best = Some(net.clone());
                since_best = 0;
            } else {
                since_best += 1;
                if since_best >= cfg.patience {
                    break;
                }
            }
        }
    }
    if let Some(b) = best {
        net = b;
    }
    let predictions = features.iter().map(|x| net.predict(x)).collect();
    Ok((net, predictions))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blobs(n_per_class: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<usize>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for i in 0..n_per_class {
            let jitter = |rng: &mut ChaCha8Rng| rng.gen_range(-0.3..0.3);
            let _ = i;
            xs.push(vec![2.0 + jitter(&mut rng), 2.0 + jitter(&mut rng)]);
            ys.push(0);
            xs.push(vec![-2.0 + jitter(&mut rng), -2.0 + jitter(&mut rng)]);
            ys.push(1);
        }
        (xs, ys)
    }

    #[test]
    fn separable_toy_reaches_full_train_accuracy() {
        let (xs, ys) = blobs(30, 1);
        let cfg = FcnConfig {
            hidden: 32,
            epochs: 200,
            seed: 5,
            ..Default::default()
        };
        let (_, preds) = fcn_classify(&xs, &ys, 2, &cfg).unwrap();
        let correct = preds.iter().zip(&ys).filter(|(p, y)| p == y).count();
        assert_eq!(correct, ys.len(), "train accuracy should be 1.0");
    }

    #[test]
    fn softmax_rows_sum_to_one() {
        let (xs, ys) = blobs(5, 2);
        let cfg = FcnConfig {
            hidden: 8,
            epochs: 3,
            seed: 5,
            ..Default::default()
        };
        let (net, _) = fcn_classify(&xs, &ys, 2, &cfg).unwrap();
        for x in &xs {
            let p = net.forward(x);
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-6);
            assert!(p.iter().all(|v| *v > 0.0 && *v < 1.0));
        }
    }

    #[test]
    fn default_hidden_width_is_500() {
        assert_eq!(FcnConfig::default().hidden, 500);
    }

    #[test]
    fn out_of_scheme_label_is_rejected() {
        let xs = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        let ys = vec![0, 2];
        assert!(matches!(
            fcn_classify(&xs, &ys, 2, &FcnConfig::default()),
            Err(Error::Argument(_))
        ));
    }
}
