//! The CLS ⊕ ontology fusion head and its trainers.
//!
//! The fused classifier concatenates the encoder's CLS vector with the
//! sentence's ontology embedding, passes the result through dropout and a
//! single linear layer, and trains with per-class sigmoid binary
//! cross-entropy against one-hot targets (argmax decode). The text-only
//! baseline uses the same encoder with a softmax + cross-entropy head.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::ontology::{encode_sentence, OntologyEmbedding};
use crate::par;
use crate::tensorio::{self, Matrix};

use super::encoder::EncoderHandle;

/// Linear fusion head over the concatenated [cls ‖ onto] vector.
#[derive(Debug, Clone, PartialEq)]
pub struct FusionHead {
    pub w: Matrix, // classes × (cls_dim + onto_dim)
    pub b: Vec<f64>,
    pub cls_dim: usize,
    pub onto_dim: usize,
    pub dropout_rate: f64,
}

impl FusionHead {
    /// Zero-initialized head (the valid epochs=0 checkpoint).
    pub fn new(cls_dim: usize, onto_dim: usize, n_classes: usize, dropout_rate: f64) -> Self {
        FusionHead {
            w: Matrix::zeros(n_classes, cls_dim + onto_dim),
            b: vec![0.0; n_classes],
            cls_dim,
            onto_dim,
            dropout_rate,
        }
    }

    pub fn in_dim(&self) -> usize {
        self.cls_dim + self.onto_dim
    }

    pub fn n_classes(&self) -> usize {
        self.w.rows
    }

    pub fn save(&self, stem: &Path, meta: serde_json::Value) -> Result<()> {
        let b = Matrix {
            rows: 1,
            cols: self.b.len(),
            data: self.b.clone(),
        };
        let mut meta = meta;
        meta["cls_dim"] = self.cls_dim.into();
        meta["onto_dim"] = self.onto_dim.into();
        meta["dropout_rate"] = self.dropout_rate.into();
        tensorio::save_tensors(stem, &[("w", &self.w), ("b", &b)], meta)
    }

    pub fn load(stem: &Path) -> Result<Self> {
        let (tensors, meta) = tensorio::load_tensors(stem)?;
        let mut w = None;
        let mut b = None;
        for (name, m) in tensors {
            match name.as_str() {
                "w" => w = Some(m),
                "b" => b = Some(m.data),
                _ => {}
            }
        }
        let w = w.ok_or_else(|| Error::format(0, "head checkpoint missing w"))?;
        let b = b.ok_or_else(|| Error::format(0, "head checkpoint missing b"))?;
        Ok(FusionHead {
            w,
            b,
            cls_dim: meta["cls_dim"].as_u64().unwrap_or(0) as usize,
            onto_dim: meta["onto_dim"].as_u64().unwrap_or(0) as usize,
            dropout_rate: meta["dropout_rate"].as_f64().unwrap_or(0.0),
        })
    }
}

/// Forward mode: eval is the exact affine map, train applies inverted
/// dropout before the linear layer.
pub enum ForwardMode<'a> {
    Eval,
    Train(&'a mut ChaCha8Rng),
}

/// Logits of the fusion head on one (cls, onto) pair.
pub fn fuse_forward(
    head: &FusionHead,
    cls: &[f64],
    onto: &[f64],
    mode: ForwardMode<'_>,
) -> Result<Vec<f64>> {
    let (z, _mask) = fuse_forward_cached(head, cls, onto, mode)?;
    Ok(logits_of(head, &z))
}

/// Concatenate (applying dropout in train mode) and return the layer input
/// plus the mask used, for the backward pass.
fn fuse_forward_cached(
    head: &FusionHead,
    cls: &[f64],
    onto: &[f64],
    mode: ForwardMode<'_>,
) -> Result<(Vec<f64>, Option<Vec<f64>>)> {
    if cls.len() != head.cls_dim {
        return Err(Error::Argument(format!(
            "cls block has length {}, head expects {}",
            cls.len(),
            head.cls_dim
        )));
    }
    if onto.len() != head.onto_dim {
        return Err(Error::Argument(format!(
            "ontology block has length {}, head expects {}",
            onto.len(),
            head.onto_dim
        )));
    }
    let mut z = Vec::with_capacity(head.in_dim());
    z.extend_from_slice(cls);
    z.extend_from_slice(onto);
    let mask = match mode {
        ForwardMode::Eval => None,
        ForwardMode::Train(rng) => {
            if head.dropout_rate == 0.0 {
                None // bitwise identical to eval
            } else {
                let keep = 1.0 - head.dropout_rate;
                let mask: Vec<f64> = (0..z.len())
                    .map(|_| {
                        if rng.gen_range(0.0..1.0) < keep {
                            1.0 / keep
                        } else {
                            0.0
                        }
                    })
                    .collect();
                for (zi, m) in z.iter_mut().zip(&mask) {
                    *zi *= m;
                }
                Some(mask)
            }
        }
    };
    Ok((z, mask))
}

fn logits_of(head: &FusionHead, z: &[f64]) -> Vec<f64> {
    (0..head.w.rows)
        .map(|c| {
            head.w.row(c).iter().zip(z).map(|(w, x)| w * x).sum::<f64>() + head.b[c]
        })
        .collect()
}

/// Per-class sigmoid binary cross-entropy from raw logits, mean-reduced over
/// all elements. At logits 0 with any targets this is ln 2 per element.
pub fn bce_with_logits(logits: &[f64], targets: &[f64]) -> f64 {
    assert_eq!(logits.len(), targets.len());
    let sum: f64 = logits
        .iter()
        .zip(targets)
        .map(|(&z, &y)| z.max(0.0) - z * y + (-z.abs()).exp().ln_1p())
        .sum();
    sum / logits.len() as f64
}

/// Gradient of [`bce_with_logits`] with respect to the logits.
pub fn bce_with_logits_grad(logits: &[f64], targets: &[f64]) -> Vec<f64> {
    let n = logits.len() as f64;
    logits
        .iter()
        .zip(targets)
        .map(|(&z, &y)| (1.0 / (1.0 + (-z).exp()) - y) / n)
        .collect()
}

pub fn argmax(xs: &[f64]) -> usize {
    xs.iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, _)| i)
        .unwrap()
}

/// Adam state over one flat parameter buffer.
pub struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Adam {
    pub fn new(n: usize, lr: f64) -> Self {
        Adam {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }

    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) {
        self.t += 1;
        let b1t = 1.0 - self.beta1.powi(self.t as i32);
        let b2t = 1.0 - self.beta2.powi(self.t as i32);
        for i in 0..params.len() {
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * grads[i];
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * grads[i] * grads[i];
            let mhat = self.m[i] / b1t;
            let vhat = self.v[i] / b2t;
            params[i] -= self.lr * mhat / (vhat.sqrt() + self.eps);
        }
    }
}

/// Training hyperparameters (Adam; the published defaults are lr 2e-5 and
/// batch 16).
#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch: usize,
    pub epochs: usize,
    pub seed: u64,
    pub dropout_rate: f64,
    /// Update encoder weights during training (default: frozen).
    pub fine_tune_encoder: bool,
    /// L2-normalize ontology vectors before concatenation (default: off).
    pub normalize_onto: bool,
    /// When set, the head is checkpointed after every epoch.
    pub checkpoint_dir: Option<PathBuf>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 2e-5,
            batch: 16,
            epochs: 3,
            seed: 0,
            dropout_rate: 0.1,
            fine_tune_encoder: false,
            normalize_onto: false,
            checkpoint_dir: None,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        if self.learning_rate <= 0.0 {
            return Err(Error::Argument("learning rate must be positive".into()));
        }
        if self.batch == 0 {
            return Err(Error::Argument("batch size must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(Error::Argument("dropout rate must be in [0,1)".into()));
        }
        Ok(())
    }
}

fn onto_vector(text: &str, emb: &OntologyEmbedding, normalize: bool) -> Vec<f64> {
    let mut v = encode_sentence(text, emb).vector;
    if normalize {
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 0.0 {
            for x in &mut v {
                *x /= n;
            }
        }
    }
    v
}

fn one_hot(label: usize, n: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[label] = 1.0;
    v
}

/// Train the fusion head (and optionally fine-tune the encoder) with BCE
/// with logits over one-hot targets.
pub fn train_fusion(
    train: &Corpus,
    encoder: &mut EncoderHandle,
    onto_emb: &OntologyEmbedding,
    cfg: &TrainConfig,
) -> Result<FusionHead> {
    cfg.validate()?;
    if train.is_empty() {
        return Err(Error::Argument("training corpus is empty".into()));
    }
    let n_classes = train.scheme.values().len();
    let labels = train.label_indices();
    let mut head = FusionHead::new(encoder.dim, onto_emb.dim, n_classes, cfg.dropout_rate);

    let texts: Vec<&str> = train.texts().collect();
    let onto_vecs: Vec<Vec<f64>> =
        par::map_collect(&texts, |t| onto_vector(t, onto_emb, cfg.normalize_onto));
    let fine_tune = cfg.fine_tune_encoder && encoder.fine_tunable;
    // Frozen encoder: CLS vectors are constants, compute them once.
    let frozen_cls: Option<Vec<Vec<f64>>> = if fine_tune {
        None
    } else {
        let model = encoder.model()?;
        Some(par::map_collect(&texts, |t| {
            model.encode_cls(t).expect("non-empty corpus text")
        }))
    };

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut head_w_adam = Adam::new(head.w.data.len(), cfg.learning_rate);
    let mut head_b_adam = Adam::new(head.b.len(), cfg.learning_rate);
    let mut encoder_adam = if fine_tune {
        Some(Adam::new(encoder.model()?.param_count(), cfg.learning_rate))
    } else {
        None
    };

    let n = texts.len();
    for epoch in 0..cfg.epochs {
        let mut order: Vec<usize> = (0..n).collect();
        use rand::seq::SliceRandom;
        order.shuffle(&mut rng);
        for chunk in order.chunks(cfg.batch) {
            let mut g_w = vec![0.0; head.w.data.len()];
            let mut g_b = vec![0.0; head.b.len()];
            let mut g_enc = if fine_tune {
                Some(vec![0.0; encoder.model()?.param_count()])
            } else {
                None
            };
            let scale = 1.0 / chunk.len() as f64;
            for &i in chunk {
                let (cls, cache) = match &frozen_cls {
                    Some(c) => (c[i].clone(), None),
                    None => {
                        let cache = encoder.model()?.forward(texts[i])?;
                        (cache.cls(encoder.dim).to_vec(), Some(cache))
                    }
                };
                let (z, mask) = fuse_forward_cached(
                    &head,
                    &cls,
                    &onto_vecs[i],
                    ForwardMode::Train(&mut rng),
                )?;
                let logits = logits_of(&head, &z);
                let targets = one_hot(labels[i], n_classes);
                let d_logits = bce_with_logits_grad(&logits, &targets);
                let mut d_z = vec![0.0; head.in_dim()];
                for c in 0..n_classes {
                    let g = d_logits[c] * scale;
                    g_b[c] += g;
                    for (j, zj) in z.iter().enumerate() {
                        g_w[c * head.in_dim() + j] += g * zj;
                        d_z[j] += g * head.w.data[c * head.in_dim() + j];
                    }
                }
                if let (Some(g_enc), Some(cache)) = (&mut g_enc, cache) {
                    if let Some(mask) = &mask {
                        for (dz, m) in d_z.iter_mut().zip(mask) {
                            *dz *= m;
                        }
                    }
                    let d_cls = &d_z[..head.cls_dim];
                    let grads = encoder.model()?.backward_from_cls(&cache, d_cls);
                    for (a, g) in g_enc.iter_mut().zip(grads) {
                        *a += g;
                    }
                }
            }
            head_w_adam.step(&mut head.w.data, &g_w);
            head_b_adam.step(&mut head.b, &g_b);
            if let (Some(adam), Some(g)) = (&mut encoder_adam, g_enc) {
                adam.step(encoder.model_mut()?.params_mut(), &g);
            }
        }
        if let Some(dir) = &cfg.checkpoint_dir {
            std::fs::create_dir_all(dir)
                .map_err(|e| Error::file(dir.display().to_string(), e))?;
            head.save(
                &dir.join(format!("epoch_{epoch}")),
                serde_json::json!({"seed": cfg.seed, "epoch": epoch}),
            )?;
        }
    }
    Ok(head)
}

/// Text-only baseline: softmax + cross-entropy head on the CLS vector.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineHead {
    pub w: Matrix, // classes × cls_dim
    pub b: Vec<f64>,
}

impl BaselineHead {
    pub fn new(cls_dim: usize, n_classes: usize) -> Self {
        BaselineHead {
            w: Matrix::zeros(n_classes, cls_dim),
            b: vec![0.0; n_classes],
        }
    }

    pub fn logits(&self, cls: &[f64]) -> Vec<f64> {
        (0..self.w.rows)
            .map(|c| self.w.row(c).iter().zip(cls).map(|(w, x)| w * x).sum::<f64>() + self.b[c])
            .collect()
    }

    pub fn save(&self, stem: &Path, meta: serde_json::Value) -> Result<()> {
        let b = Matrix {
            rows: 1,
            cols: self.b.len(),
            data: self.b.clone(),
        };
        tensorio::save_tensors(stem, &[("w", &self.w), ("b", &b)], meta)
    }

    pub fn load(stem: &Path) -> Result<Self> {
        let (tensors, _) = tensorio::load_tensors(stem)?;
        let mut w = None;
        let mut b = None;
        for (name, m) in tensors {
            match name.as_str() {
                "w" => w = Some(m),
                "b" => b = Some(m.data),
                _ => {}
            }
        }
        Ok(BaselineHead {
            w: w.ok_or_else(|| Error::format(0, "head checkpoint missing w"))?,
            b: b.ok_or_else(|| Error::format(0, "head checkpoint missing b"))?,
        })
    }
}

/// Train the text-only baseline head (softmax + cross-entropy).
pub fn train_bert_baseline(
    train: &Corpus,
    encoder: &mut EncoderHandle,
    cfg: &TrainConfig,
) -> Result<BaselineHead> {
    cfg.validate()?;
    if train.is_empty() {
        return Err(Error::Argument("training corpus is empty".into()));
    }
    let n_classes = train.scheme.values().len();
    let labels = train.label_indices();
    let mut head = BaselineHead::new(encoder.dim, n_classes);
    let texts: Vec<&str> = train.texts().collect();
    let fine_tune = cfg.fine_tune_encoder && encoder.fine_tunable;
    let frozen_cls: Option<Vec<Vec<f64>>> = if fine_tune {
        None
    } else {
        let model = encoder.model()?;
        Some(par::map_collect(&texts, |t| {
            model.encode_cls(t).expect("non-empty corpus text")
        }))
    };

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut w_adam = Adam::new(head.w.data.len(), cfg.learning_rate);
    let mut b_adam = Adam::new(head.b.len(), cfg.learning_rate);
    let mut encoder_adam = if fine_tune {
        Some(Adam::new(encoder.model()?.param_count(), cfg.learning_rate))
    } else {
        None
    };

    let dim = encoder.dim;
    let n = texts.len();
    for _epoch in 0..cfg.epochs {
        let mut order: Vec<usize> = (0..n).collect();
        use rand::seq::SliceRandom;
        order.shuffle(&mut rng);
        for chunk in order.chunks(cfg.batch) {
            let mut g_w = vec![0.0; head.w.data.len()];
            let mut g_b = vec![0.0; head.b.len()];
            let mut g_enc = if fine_tune {
                Some(vec![0.0; encoder.model()?.param_count()])
            } else {
                None
            };
            let scale = 1.0 / chunk.len() as f64;
            for &i in chunk {
                let (cls, cache) = match &frozen_cls {
                    Some(c) => (c[i].clone(), None),
                    None => {
                        let cache = encoder.model()?.forward(texts[i])?;
                        (cache.cls(dim).to_vec(), Some(cache))
                    }
                };
                let logits = head.logits(&cls);
                let mut d_logits = crate::wordvec::softmax(&logits);
                d_logits[labels[i]] -= 1.0;
                let mut d_cls = vec![0.0; dim];
                for c in 0..n_classes {
                    let g = d_logits[c] * scale;
                    g_b[c] += g;
                    for (j, xj) in cls.iter().enumerate() {
                        g_w[c * dim + j] += g * xj;
                        d_cls[j] += g * head.w.data[c * dim + j];
                    }
                }
                if let (Some(g_enc), Some(cache)) = (&mut g_enc, cache) {
                    let grads = encoder.model()?.backward_from_cls(&cache, &d_cls);
                    for (a, g) in g_enc.iter_mut().zip(grads) {
                        *a += g;
                    }
                }
            }
            w_adam.step(&mut head.w.data, &g_w);
            b_adam.step(&mut head.b, &g_b);
            if let (Some(adam), Some(g)) = (&mut encoder_adam, g_enc) {
                adam.step(encoder.model_mut()?.params_mut(), &g);
            }
        }
    }
    Ok(head)
}

/// One evaluated instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub id: String,
    pub gold: String,
    pub pred: String,
    pub logits: Vec<f64>,
}

/// Eval-mode fusion predictions over a corpus.
pub fn predict_fusion(
    corpus: &Corpus,
    encoder: &EncoderHandle,
    onto_emb: &OntologyEmbedding,
    head: &FusionHead,
    normalize_onto: bool,
) -> Result<Vec<Prediction>> {
    let model = encoder.model()?;
    let values = corpus.scheme.values();
    let out = par::map_collect(&corpus.instances, |inst| {
        let cls = model.encode_cls(&inst.text)?;
        let onto = onto_vector(&inst.text, onto_emb, normalize_onto);
        let logits = fuse_forward(head, &cls, &onto, ForwardMode::Eval)?;
        Ok(Prediction {
            id: inst.id.clone(),
            gold: inst.label.clone(),
            pred: values[argmax(&logits)].to_string(),
            logits,
        })
    });
    out.into_iter().collect()
}

/// Eval-mode baseline predictions over a corpus.
pub fn predict_baseline(
    corpus: &Corpus,
    encoder: &EncoderHandle,
    head: &BaselineHead,
) -> Result<Vec<Prediction>> {
    let model = encoder.model()?;
    let values = corpus.scheme.values();
    let out = par::map_collect(&corpus.instances, |inst| {
        let cls = model.encode_cls(&inst.text)?;
        let logits = head.logits(&cls);
        Ok(Prediction {
            id: inst.id.clone(),
            gold: inst.label.clone(),
            pred: values[argmax(&logits)].to_string(),
            logits,
        })
    });
    out.into_iter().collect()
}

/// Write predictions as JSON-lines.
pub fn save_predictions(preds: &[Prediction], path: &Path) -> Result<()> {
    let mut out = String::new();
    for p in preds {
        out.push_str(&serde_json::to_string(p).expect("prediction serializes"));
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| Error::file(path.display().to_string(), e))
}

pub fn load_predictions(path: &Path) -> Result<Vec<Prediction>> {
    let raw = std::fs::read_to_string(path).map_err(|e| Error::file(path.display().to_string(), e))?;
    raw.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::format(i + 1, format!("bad prediction: {e}")))
        })
        .collect()
}
