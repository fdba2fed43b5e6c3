//! Linear baselines: L2-regularized hinge (SVM) and logistic regression,
//! one-vs-rest across classes, trained by seeded SGD.

use rand::{seq::SliceRandom, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::lexfeat::{SparseVector, ZScaler};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinearKind {
    SvmHinge,
    LogReg,
}

#[derive(Debug, Clone)]
pub struct LinearConfig {
    pub kind: LinearKind,
    /// Inverse regularization strength: objective is 1/2‖w‖² + C·Σ loss.
    pub c: f64,
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for LinearConfig {
    fn default() -> Self {
        LinearConfig {
            kind: LinearKind::SvmHinge,
            c: 1.0,
            epochs: 50,
            learning_rate: 0.1,
            seed: 0,
        }
    }
}

/// One-vs-rest linear model; one weight row and bias per class. The bias is
/// not regularized, so vanishing C collapses to the majority class.
#[derive(Debug, Clone)]
pub struct LinearModel {
    pub kind: LinearKind,
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
    pub scaler: Option<ZScaler>,
    pub n_classes: usize,
}

impl LinearModel {
    pub fn decision(&self, x: &SparseVector) -> Vec<f64> {
        (0..self.n_classes)
            .map(|c| x.dot(&self.weights[c]) + self.bias[c])
            .collect()
    }

    pub fn predict(&self, x: &SparseVector) -> usize {
        let scores = self.decision(x);
        scores
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .map(|(i, _)| i)
            .unwrap()
    }
}

/// Train a one-vs-rest linear classifier.
///
/// SVM rows minimize 1/2‖w‖² + C·Σ max(0, 1 − y·f(x)); logistic rows minimize
/// 1/2‖w‖² + C·Σ ln(1 + e^{−y·f(x)}). SGD with a 1/(1+t·decay) step schedule,
/// deterministic per seed.
pub fn train_linear(
    x: &[SparseVector],
    y: &[usize],
    n_classes: usize,
    cfg: &LinearConfig,
) -> Result<LinearModel> {
    if x.is_empty() || x.len() != y.len() {
        return Err(Error::Argument(format!(
            "feature/label shape mismatch: {} rows vs {} labels",
            x.len(),
            y.len()
        )));
    }
    let distinct = {
        let mut seen = vec![false; n_classes];
        for &label in y {
            if label >= n_classes {
                return Err(Error::Argument(format!(
                    "label {label} outside {n_classes}-class scheme"
                )));
            }
            seen[label] = true;
        }
        seen.iter().filter(|s| **s).count()
    };
    if distinct < 2 {
        return Err(Error::Argument(
            "training labels must contain at least two classes".into(),
        ));
    }
    let dim = x[0].dim;
    if x.iter().any(|r| r.dim != dim) {
        return Err(Error::Argument("inconsistent feature dimension".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut weights = vec![vec![0.0; dim]; n_classes];
    let mut bias = vec![0.0; n_classes];
    let n = x.len();
    let mut order: Vec<usize> = (0..n).collect();
    let mut t = 0usize;

    for _epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let lr = cfg.learning_rate / (1.0 + 1e-3 * t as f64);
            let xi = &x[i];
            for c in 0..n_classes {
                let target = if y[i] == c { 1.0 } else { -1.0 };
                let score = xi.dot(&weights[c]) + bias[c];
                // Loss-term gradient factor g so that dL/dw = g·x, dL/db = g.
                let g = match cfg.kind {
                    LinearKind::SvmHinge => {
                        if target * score < 1.0 {
                            -target * cfg.c
                        } else {
                            0.0
                        }
                    }
                    LinearKind::LogReg => {
                        // d/ds ln(1+e^{-ts}) = -t·σ(-ts)
                        -target * cfg.c / (1.0 + (target * score).exp())
                    }
                };
                // L2 term: stochastic update scales the regularizer by 1/n.
                let w = &mut weights[c];
                if g != 0.0 {
                    for &(j, v) in &xi.entries {
                        w[j] -= lr * (g * v);
                    }
                    bias[c] -= lr * g;
                }
                let shrink = 1.0 - lr / n as f64;
                if shrink > 0.0 {
                    for wj in w.iter_mut() {
                        *wj *= shrink;
                    }
                }
            }
        }
    }

    Ok(LinearModel {
        kind: cfg.kind,
        weights,
        bias,
        scaler: None,
        n_classes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn separable() -> (Vec<SparseVector>, Vec<usize>) {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for i in 0..20 {
            let wiggle = (i % 5) as f64 * 0.05;
            xs.push(SparseVector::from_dense(&[1.0 + wiggle, 0.0]));
            ys.push(0);
            xs.push(SparseVector::from_dense(&[-1.0 - wiggle, 0.1]));
            ys.push(1);
        }
        (xs, ys)
    }

    #[test]
    fn separable_toy_reaches_full_accuracy_both_kinds() {
        let (xs, ys) = separable();
        for kind in [LinearKind::SvmHinge, LinearKind::LogReg] {
            let cfg = LinearConfig {
                kind,
                c: 1.0,
                epochs: 30,
                learning_rate: 0.5,
                seed: 1,
            };
            let m = train_linear(&xs, &ys, 2, &cfg).unwrap();
            let correct = xs
                .iter()
                .zip(&ys)
                .filter(|(x, y)| m.predict(x) == **y)
                .count();
            assert_eq!(correct, ys.len(), "{kind:?} should separate the toy");
        }
    }

    #[test]
    fn vanishing_c_collapses_to_majority_class() {
        // Class 1 is the majority.
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for i in 0..30 {
            xs.push(SparseVector::from_dense(&[(i % 7) as f64 - 3.0]));
            ys.push(if i < 9 { 0 } else { 1 });
        }
        let cfg = LinearConfig {
            kind: LinearKind::SvmHinge,
            c: 1e-9,
            epochs: 60,
            learning_rate: 0.5,
            seed: 2,
        };
        let m = train_linear(&xs, &ys, 2, &cfg).unwrap();
        assert!(m.weights.iter().flatten().all(|w| w.abs() < 1e-3));
        for x in &xs {
            assert_eq!(m.predict(x), 1);
        }
    }

    #[test]
    fn conflicting_duplicates_cap_accuracy_below_one() {
        let xs = vec![
            SparseVector::from_dense(&[1.0]),
            SparseVector::from_dense(&[1.0]),
        ];
        let ys = vec![0, 1];
        let m = train_linear(&xs, &ys, 2, &LinearConfig::default()).unwrap();
        let correct = xs
            .iter()
            .zip(&ys)
            .filter(|(x, y)| m.predict(x) == **y)
            .count();
        assert!(correct < 2);
    }

    #[test]
    fn single_class_labels_are_rejected() {
        let xs = vec![
            SparseVector::from_dense(&[1.0]),
            SparseVector::from_dense(&[2.0]),
        ];
        assert!(matches!(
            train_linear(&xs, &[0, 0], 2, &LinearConfig::default()),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn three_class_model_has_one_vs_rest_rows() {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for i in 0..12 {
            let c = i % 3;
            let mut v = [0.0; 3];
            v[c] = 2.0;
            xs.push(SparseVector::from_dense(&v));
            ys.push(c);
        }
        let cfg = LinearConfig {
            learning_rate: 0.5,
            epochs: 40,
            ..Default::default()
        };
        let m = train_linear(&xs, &ys, 3, &cfg).unwrap();
        assert_eq!(m.weights.len(), 3);
        assert_eq!(m.bias.len(), 3);
        let correct = xs
            .iter()
            .zip(&ys)
            .filter(|(x, y)| m.predict(x) == **y)
            .count();
        assert_eq!(correct, 12);
    }

    #[test]
    fn training_is_deterministic_per_seed() {
        let (xs, ys) = separable();
        let cfg = LinearConfig::default();
        let a = train_linear(&xs, &ys, 2, &cfg).unwrap();
        let b = train_linear(&xs, &ys, 2, &cfg).unwrap();
        assert_eq!(a.weights, b.weights);
        assert_eq!(a.bias, b.bias);
    }
}
