//! Transformer sentence encoder behind a pluggable handle.
//!
//! One implementation serves both shipped backends: a tiny deterministic
//! seeded fixture for tests and desk-scale runs, and checkpoint loading for
//! full-size models converted into the documented tensor format. The encoder
//! is BERT-style (post-layer-norm, GELU feed-forward); the sentence
//! representation is the last hidden state at the CLS position. A full
//! backward pass supports encoder fine-tuning.

use std::collections::HashMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensorio::{self, Matrix};
use crate::text;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncoderConfig {
    pub name: String,
    pub dim: usize,
    pub heads: usize,
    pub layers: usize,
    pub ff_dim: usize,
    /// Maximum text tokens (excluding the CLS slot).
    pub max_tokens: usize,
    pub vocab_size: usize,
}

impl EncoderConfig {
    /// The tiny deterministic test encoder: 2 layers, 16 dims, 2 heads.
    pub fn fixture() -> Self {
        EncoderConfig {
            name: "fixture-2l".into(),
            dim: 16,
            heads: 2,
            layers: 2,
            ff_dim: 32,
            max_tokens: 32,
            vocab_size: 512,
        }
    }
}

const CLS_ID: usize = 0;
const UNK_ID: usize = 1;

fn fnv1a(token: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in token.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Offset/shape of one parameter tensor inside the flat buffer.
#[derive(Debug, Clone, Copy)]
struct Slot {
    off: usize,
    rows: usize,
    cols: usize,
}

impl Slot {
    fn len(&self) -> usize {
        self.rows * self.cols
    }
}

#[derive(Debug, Clone, Copy)]
struct LayerLayout {
    wq: Slot,
    bq: Slot,
    wk: Slot,
    bk: Slot,
    wv: Slot,
    bv: Slot,
    wo: Slot,
    bo: Slot,
    ln1_g: Slot,
    ln1_b: Slot,
    ff_w1: Slot,
    ff_b1: Slot,
    ff_w2: Slot,
    ff_b2: Slot,
    ln2_g: Slot,
    ln2_b: Slot,
}

#[derive(Debug, Clone)]
struct Layout {
    token_emb: Slot,
    pos_emb: Slot,
    layers: Vec<LayerLayout>,
    total: usize,
}

impl Layout {
    fn new(cfg: &EncoderConfig) -> Self {
        let mut off = 0usize;
        let mut slot = |rows: usize, cols: usize| -> Slot {
            let s = Slot { off, rows, cols };
            off += rows * cols;
            s
        };
        let d = cfg.dim;
        let token_emb = slot(cfg.vocab_size, d);
        let pos_emb = slot(cfg.max_tokens + 1, d);
        let mut layers = Vec::with_capacity(cfg.layers);
        for _ in 0..cfg.layers {
            layers.push(LayerLayout {
                wq: slot(d, d),
                bq: slot(d, 1),
                wk: slot(d, d),
                bk: slot(d, 1),
                wv: slot(d, d),
                bv: slot(d, 1),
                wo: slot(d, d),
                bo: slot(d, 1),
                ln1_g: slot(d, 1),
                ln1_b: slot(d, 1),
                ff_w1: slot(cfg.ff_dim, d),
                ff_b1: slot(cfg.ff_dim, 1),
                ff_w2: slot(d, cfg.ff_dim),
                ff_b2: slot(d, 1),
                ln2_g: slot(d, 1),
                ln2_b: slot(d, 1),
            });
        }
        Layout {
            token_emb,
            pos_emb,
            layers,
            total: off,
        }
    }
}

const LN_EPS: f64 = 1e-12;
const GELU_C: f64 = 0.797_884_560_802_865_4; // sqrt(2/pi)
const GELU_A: f64 = 0.044_715;

fn gelu(x: f64) -> f64 {
    0.5 * x * (1.0 + (GELU_C * (x + GELU_A * x * x * x)).tanh())
}

fn gelu_prime(x: f64) -> f64 {
    let u = GELU_C * (x + GELU_A * x * x * x);
    let t = u.tanh();
    0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * GELU_C * (1.0 + 3.0 * GELU_A * x * x)
}

/// y[pos] = W · x[pos] + b for every position; W is out×in row-major.
fn linear_seq(x: &[f64], n: usize, in_dim: usize, w: &[f64], b: &[f64], out_dim: usize) -> Vec<f64> {
    let mut y = vec![0.0; n * out_dim];
    for p in 0..n {
        let xi = &x[p * in_dim..(p + 1) * in_dim];
        let yo = &mut y[p * out_dim..(p + 1) * out_dim];
        for o in 0..out_dim {
            let row = &w[o * in_dim..(o + 1) * in_dim];
            let mut acc = b[o];
            for i in 0..in_dim {
                acc += row[i] * xi[i];
            }
            yo[o] = acc;
        }
    }
    y
}

fn softmax_row(row: &mut [f64]) {
    let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in row.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in row.iter_mut() {
        *v /= sum;
    }
}

/// Per-layer forward intermediates kept for the backward pass.
#[derive(Debug, Clone)]
struct LayerCache {
    x_in: Vec<f64>,
    q: Vec<f64>,
    k: Vec<f64>,
    v: Vec<f64>,
    /// Softmax attention per head, n×n row-major (rows = query position).
    attn: Vec<Vec<f64>>,
    ctx: Vec<f64>,
    ln1_xhat: Vec<f64>,
    ln1_inv_std: Vec<f64>,
    x_mid: Vec<f64>,
    ff_pre: Vec<f64>,
    ff_act: Vec<f64>,
    ln2_xhat: Vec<f64>,
    ln2_inv_std: Vec<f64>,
    x_out: Vec<f64>,
}

/// Full forward state for one sentence.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    ids: Vec<usize>,
    n: usize,
    layers: Vec<LayerCache>,
}

impl ForwardCache {
    pub fn cls(&self, dim: usize) -> &[f64] {
        &self.layers.last().expect("at least one layer").x_out[..dim]
    }

    /// Softmax attention matrices: [layer][head], each n×n row-major with
    /// row = query position (position 0 is CLS).
    pub fn attention(&self) -> Vec<Vec<Matrix>> {
        self.layers
            .iter()
            .map(|l| {
                l.attn
                    .iter()
                    .map(|a| Matrix {
                        rows: self.n,
                        cols: self.n,
                        data: a.clone(),
                    })
                    .collect()
            })
            .collect()
    }

    pub fn seq_len(&self) -> usize {
        self.n
    }
}

/// The encoder itself: a flat parameter buffer plus its layout.
#[derive(Debug, Clone)]
pub struct TransformerEncoder {
    pub cfg: EncoderConfig,
    params: Vec<f64>,
    layout: Layout,
    /// Explicit vocabulary (token → id ≥ 2); hash vocabulary when absent.
    vocab: Option<HashMap<String, usize>>,
}

impl TransformerEncoder {
    /// Deterministic seeded encoder with the fixture architecture.
    pub fn fixture(seed: u64) -> Self {
        Self::seeded(EncoderConfig::fixture(), seed)
    }

    /// Deterministic seeded encoder with an arbitrary architecture.
    pub fn seeded(cfg: EncoderConfig, seed: u64) -> Self {
        assert!(cfg.dim % cfg.heads == 0, "dim must divide into heads");
        let layout = Layout::new(&cfg);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params: Vec<f64> = (0..layout.total).map(|_| rng.gen_range(-0.2..0.2)).collect();
        // Layer norms start at identity (gamma 1, beta 0).
        for layer in &layout.layers {
            for slot in [layer.ln1_g, layer.ln2_g] {
                for v in &mut params[slot.off..slot.off + slot.len()] {
                    *v = 1.0;
                }
            }
            for slot in [layer.ln1_b, layer.ln2_b] {
                for v in &mut params[slot.off..slot.off + slot.len()] {
                    *v = 0.0;
                }
            }
        }
        TransformerEncoder {
            cfg,
            params,
            layout,
            vocab: None,
        }
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    /// Token ids for a text: tokenize, truncate to max_tokens, map through
    /// the vocabulary (stable hash when no explicit vocabulary is set).
    pub fn token_ids(&self, sentence: &str) -> (Vec<String>, Vec<usize>) {
        let mut tokens = text::tokenize(sentence);
        tokens.truncate(self.cfg.max_tokens);
        let ids = tokens
            .iter()
            .map(|t| match &self.vocab {
                Some(v) => v.get(t).copied().unwrap_or(UNK_ID),
                None => 2 + (fnv1a(t) % (self.cfg.vocab_size as u64 - 2)) as usize,
            })
            .collect();
        (tokens, ids)
    }

    fn slot(&self, s: Slot) -> &[f64] {
        &self.params[s.off..s.off + s.len()]
    }

    /// Forward pass keeping every intermediate needed for attention export
    /// and backpropagation.
    pub fn forward(&self, sentence: &str) -> Result<ForwardCache> {
        let (_, token_ids) = self.token_ids(sentence);
        if token_ids.is_empty() {
            return Err(Error::Argument("cannot encode an empty sentence".into()));
        }
        let mut ids = vec![CLS_ID];
        ids.extend(token_ids);
        Ok(self.forward_ids(&ids))
    }

    fn forward_ids(&self, ids: &[usize]) -> ForwardCache {
        let d = self.cfg.dim;
        let n = ids.len();
        let heads = self.cfg.heads;
        let dh = d / heads;
        let scale = 1.0 / (dh as f64).sqrt();

        let token_emb = self.slot(self.layout.token_emb);
        let pos_emb = self.slot(self.layout.pos_emb);
        let mut x = vec![0.0; n * d];
        for (p, &id) in ids.iter().enumerate() {
            for i in 0..d {
                x[p * d + i] = token_emb[id * d + i] + pos_emb[p * d + i];
            }
        }

        let mut layers = Vec::with_capacity(self.cfg.layers);
        for ll in &self.layout.layers {
            let x_in = x.clone();
            let q = linear_seq(&x_in, n, d, self.slot(ll.wq), self.slot(ll.bq), d);
            let k = linear_seq(&x_in, n, d, self.slot(ll.wk), self.slot(ll.bk), d);
            let v = linear_seq(&x_in, n, d, self.slot(ll.wv), self.slot(ll.bv), d);

            let mut attn = Vec::with_capacity(heads);
            let mut ctx = vec![0.0; n * d];
            for h in 0..heads {
                let col = h * dh;
                let mut a = vec![0.0; n * n];
                for i in 0..n {
                    for j in 0..n {
                        let mut s = 0.0;
                        for c in 0..dh {
                            s += q[i * d + col + c] * k[j * d + col + c];
                        }
                        a[i * n + j] = s * scale;
                    }
                    softmax_row(&mut a[i * n..(i + 1) * n]);
                }
                for i in 0..n {
                    for j in 0..n {
                        let w = a[i * n + j];
                        for c in 0..dh {
                            ctx[i * d + col + c] += w * v[j * d + col + c];
                        }
                    }
                }
                attn.push(a);
            }
            let attn_out = linear_seq(&ctx, n, d, self.slot(ll.wo), self.slot(ll.bo), d);

            let mut sum1 = vec![0.0; n * d];
            for i in 0..n * d {
                sum1[i] = x_in[i] + attn_out[i];
            }
            let (x_mid, ln1_xhat, ln1_inv_std) =
                layer_norm_seq(&sum1, n, d, self.slot(ll.ln1_g), self.slot(ll.ln1_b));

            let ff_pre = linear_seq(
                &x_mid,
                n,
                d,
                self.slot(ll.ff_w1),
                self.slot(ll.ff_b1),
                self.cfg.ff_dim,
            );
            let ff_act: Vec<f64> = ff_pre.iter().map(|&v| gelu(v)).collect();
            let ff_out = linear_seq(
                &ff_act,
                n,
                self.cfg.ff_dim,
                self.slot(ll.ff_w2),
                self.slot(ll.ff_b2),
                d,
            );

            let mut sum2 = vec![0.0; n * d];
            for i in 0..n * d {
                sum2[i] = x_mid[i] + ff_out[i];
            }
            let (x_out, ln2_xhat, ln2_inv_std) =
                layer_norm_seq(&sum2, n, d, self.slot(ll.ln2_g), self.slot(ll.ln2_b));

            x = x_out.clone();
            layers.push(LayerCache {
                x_in,
                q,
                k,
                v,
                attn,
                ctx,
                ln1_xhat,
                ln1_inv_std,
                x_mid,
                ff_pre,
                ff_act,
                ln2_xhat,
                ln2_inv_std,
                x_out,
            });
        }
        ForwardCache {
            ids: ids.to_vec(),
            n,
            layers,
        }
    }

    /// Last hidden state at the CLS position.
    pub fn encode_cls(&self, sentence: &str) -> Result<Vec<f64>> {
        Ok(self.forward(sentence)?.cls(self.cfg.dim).to_vec())
    }

    /// Gradient of a scalar loss with respect to every parameter, given the
    /// loss gradient at the CLS output vector.
    pub fn backward_from_cls(&self, cache: &ForwardCache, d_cls: &[f64]) -> Vec<f64> {
        let d = self.cfg.dim;
        let n = cache.n;
        let heads = self.cfg.heads;
        let dh = d / heads;
        let scale = 1.0 / (dh as f64).sqrt();
        let ff = self.cfg.ff_dim;
        let mut grads = vec![0.0; self.layout.total];

        let mut d_x = vec![0.0; n * d];
        d_x[..d].copy_from_slice(d_cls);

        for (ll, lc) in self.layout.layers.iter().zip(&cache.layers).rev() {
            // LayerNorm 2
            let (d_sum2, d_g2, d_b2) = layer_norm_backward(
                &d_x,
                &lc.ln2_xhat,
                &lc.ln2_inv_std,
                self.slot(ll.ln2_g),
                n,
                d,
            );
            accumulate(&mut grads, ll.ln2_g, &d_g2);
            accumulate(&mut grads, ll.ln2_b, &d_b2);

            // Residual: sum2 = x_mid + ff_out
            let mut d_x_mid = d_sum2.clone();
            let d_ff_out = d_sum2;

            // FF second linear
            let (d_ff_act, d_w2, d_b2f) =
                linear_backward(&d_ff_out, &lc.ff_act, n, ff, self.slot(ll.ff_w2), d);
            accumulate(&mut grads, ll.ff_w2, &d_w2);
            accumulate(&mut grads, ll.ff_b2, &d_b2f);

            // GELU
            let d_ff_pre: Vec<f64> = d_ff_act
                .iter()
                .zip(&lc.ff_pre)
                .map(|(g, &x)| g * gelu_prime(x))
                .collect();

            // FF first linear
            let (d_x_mid2, d_w1, d_b1f) =
                linear_backward(&d_ff_pre, &lc.x_mid, n, d, self.slot(ll.ff_w1), ff);
            accumulate(&mut grads, ll.ff_w1, &d_w1);
            accumulate(&mut grads, ll.ff_b1, &d_b1f);
            for i in 0..n * d {
                d_x_mid[i] += d_x_mid2[i];
            }

            // LayerNorm 1
            let (d_sum1, d_g1, d_b1) = layer_norm_backward(
                &d_x_mid,
                &lc.ln1_xhat,
                &lc.ln1_inv_std,
                self.slot(ll.ln1_g),
                n,
                d,
            );
            accumulate(&mut grads, ll.ln1_g, &d_g1);
            accumulate(&mut grads, ll.ln1_b, &d_b1);

            // Residual: sum1 = x_in + attn_out
            let mut d_x_in = d_sum1.clone();
            let d_attn_out = d_sum1;

            // Output projection
            let (mut d_ctx, d_wo, d_bo) =
                linear_backward(&d_attn_out, &lc.ctx, n, d, self.slot(ll.wo), d);
            accumulate(&mut grads, ll.wo, &d_wo);
            accumulate(&mut grads, ll.bo, &d_bo);

            // Attention
            let mut d_q = vec![0.0; n * d];
            let mut d_k = vec![0.0; n * d];
            let mut d_v = vec![0.0; n * d];
            for h in 0..heads {
                let col = h * dh;
                let a = &lc.attn[h];
                // d_v and d_a from ctx = A · V_h
                let mut d_a = vec![0.0; n * n];
                for i in 0..n {
                    for j in 0..n {
                        let mut s = 0.0;
                        for c in 0..dh {
                            s += d_ctx[i * d + col + c] * lc.v[j * d + col + c];
                            d_v[j * d + col + c] += a[i * n + j] * d_ctx[i * d + col + c];
                        }
                        d_a[i * n + j] = s;
                    }
                }
                // Softmax rows
                for i in 0..n {
                    let arow = &a[i * n..(i + 1) * n];
                    let darow = &d_a[i * n..(i + 1) * n];
                    let dot: f64 = arow.iter().zip(darow).map(|(x, y)| x * y).sum();
                    for j in 0..n {
                        let d_score = arow[j] * (darow[j] - dot) * scale;
                        for c in 0..dh {
                            d_q[i * d + col + c] += d_score * lc.k[j * d + col + c];
                            d_k[j * d + col + c] += d_score * lc.q[i * d + col + c];
                        }
                    }
                }
            }
            d_ctx.clear();

            // Q/K/V projections
            let (d_x_q, d_wq, d_bq) = linear_backward(&d_q, &lc.x_in, n, d, self.slot(ll.wq), d);
            accumulate(&mut grads, ll.wq, &d_wq);
            accumulate(&mut grads, ll.bq, &d_bq);
            let (d_x_k, d_wk, d_bk) = linear_backward(&d_k, &lc.x_in, n, d, self.slot(ll.wk), d);
            accumulate(&mut grads, ll.wk, &d_wk);
            accumulate(&mut grads, ll.bk, &d_bk);
            let (d_x_v, d_wv, d_bv) = linear_backward(&d_v, &lc.x_in, n, d, self.slot(ll.wv), d);
            accumulate(&mut grads, ll.wv, &d_wv);
            accumulate(&mut grads, ll.bv, &d_bv);
            for i in 0..n * d {
                d_x_in[i] += d_x_q[i] + d_x_k[i] + d_x_v[i];
            }
            d_x = d_x_in;
        }

        // Embedding tables.
        for (p, &id) in cache.ids.iter().enumerate() {
            for i in 0..d {
                grads[self.layout.token_emb.off + id * d + i] += d_x[p * d + i];
                grads[self.layout.pos_emb.off + p * d + i] += d_x[p * d + i];
            }
        }
        grads
    }

    /// Persist as a single flat tensor plus config (and vocabulary if any).
    pub fn save(&self, stem: &Path) -> Result<()> {
        let m = Matrix {
            rows: 1,
            cols: self.params.len(),
            data: self.params.clone(),
        };
        let meta = serde_json::json!({
            "kind": "transformer-encoder",
            "config": self.cfg,
            "vocab": self.vocab,
        });
        tensorio::save_tensors(stem, &[("params", &m)], meta)
    }

    pub fn load(stem: &Path) -> Result<Self> {
        let (tensors, meta) = tensorio::load_tensors(stem)?;
        let params = tensors
            .into_iter()
            .find(|(n, _)| n == "params")
            .ok_or_else(|| Error::format(0, "encoder checkpoint missing params tensor"))?
            .1
            .data;
        let cfg: EncoderConfig = serde_json::from_value(meta["config"].clone())
            .map_err(|e| Error::format(0, format!("bad encoder config: {e}")))?;
        let vocab: Option<HashMap<String, usize>> = serde_json::from_value(meta["vocab"].clone())
            .map_err(|e| Error::format(0, format!("bad encoder vocab: {e}")))?;
        let layout = Layout::new(&cfg);
        if params.len() != layout.total {
            return Err(Error::format(
                0,
                format!(
                    "encoder checkpoint has {} params, config requires {}",
                    params.len(),
                    layout.total
                ),
            ));
        }
        Ok(TransformerEncoder {
            cfg,
            params,
            layout,
            vocab,
        })
    }
}

fn accumulate(grads: &mut [f64], slot: Slot, g: &[f64]) {
    for (dst, src) in grads[slot.off..slot.off + slot.len()].iter_mut().zip(g) {
        *dst += src;
    }
}

/// Returns (y, xhat, inv_std).
fn layer_norm_seq(
    x: &[f64],
    n: usize,
    d: usize,
    gamma: &[f64],
    beta: &[f64],
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut y = vec![0.0; n * d];
    let mut xhat = vec![0.0; n * d];
    let mut inv_std = vec![0.0; n];
    for p in 0..n {
        let row = &x[p * d..(p + 1) * d];
        let mean = row.iter().sum::<f64>() / d as f64;
        let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / d as f64;
        let is = 1.0 / (var + LN_EPS).sqrt();
        inv_std[p] = is;
        for i in 0..d {
            let xh = (row[i] - mean) * is;
            xhat[p * d + i] = xh;
            y[p * d + i] = gamma[i] * xh + beta[i];
        }
    }
    (y, xhat, inv_std)
}

/// Returns (dx, dgamma, dbeta).
fn layer_norm_backward(
    dy: &[f64],
    xhat: &[f64],
    inv_std: &[f64],
    gamma: &[f64],
    n: usize,
    d: usize,
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut dx = vec![0.0; n * d];
    let mut dgamma = vec![0.0; d];
    let mut dbeta = vec![0.0; d];
    for p in 0..n {
        let dyr = &dy[p * d..(p + 1) * d];
        let xhr = &xhat[p * d..(p + 1) * d];
        let mut mean_dxhat = 0.0;
        let mut mean_dxhat_xhat = 0.0;
        for i in 0..d {
            dgamma[i] += dyr[i] * xhr[i];
            dbeta[i] += dyr[i];
            let dxh = dyr[i] * gamma[i];
            mean_dxhat += dxh;
            mean_dxhat_xhat += dxh * xhr[i];
        }
        mean_dxhat /= d as f64;
        mean_dxhat_xhat /= d as f64;
        for i in 0..d {
            let dxh = dyr[i] * gamma[i];
            dx[p * d + i] = inv_std[p] * (dxh - mean_dxhat - xhr[i] * mean_dxhat_xhat);
        }
    }
    (dx, dgamma, dbeta)
}

/// Backward of `linear_seq`: returns (dx, dW, db).
fn linear_backward(
    dy: &[f64],
    x: &[f64],
    n: usize,
    in_dim: usize,
    w: &[f64],
    out_dim: usize,
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut dx = vec![0.0; n * in_dim];
    let mut dw = vec![0.0; out_dim * in_dim];
    let mut db = vec![0.0; out_dim];
    for p in 0..n {
        let dyr = &dy[p * out_dim..(p + 1) * out_dim];
        let xr = &x[p * in_dim..(p + 1) * in_dim];
        for o in 0..out_dim {
            let g = dyr[o];
            if g == 0.0 {
                continue;
            }
            db[o] += g;
            let wrow = &w[o * in_dim..(o + 1) * in_dim];
            for i in 0..in_dim {
                dw[o * in_dim + i] += g * xr[i];
                dx[p * in_dim + i] += g * wrow[i];
            }
        }
    }
    (dx, dw, db)
}

/// The encoder contract handed to trainers: name plus dimensions, with the
/// backing model loaded or not.
#[derive(Debug, Clone)]
pub struct EncoderHandle {
    pub name: String,
    pub dim: usize,
    pub max_tokens: usize,
    pub fine_tunable: bool,
    model: Option<TransformerEncoder>,
}

impl EncoderHandle {
    /// The deterministic test fixture, loaded and fine-tunable.
    pub fn fixture(seed: u64) -> Self {
        let model = TransformerEncoder::fixture(seed);
        EncoderHandle {
            name: model.cfg.name.clone(),
            dim: model.cfg.dim,
            max_tokens: model.cfg.max_tokens,
            fine_tunable: true,
            model: Some(model),
        }
    }

    pub fn from_model(model: TransformerEncoder, fine_tunable: bool) -> Self {
        EncoderHandle {
            name: model.cfg.name.clone(),
            dim: model.cfg.dim,
            max_tokens: model.cfg.max_tokens,
            fine_tunable,
            model: Some(model),
        }
    }

    pub fn from_checkpoint(stem: &Path, fine_tunable: bool) -> Result<Self> {
        Ok(Self::from_model(TransformerEncoder::load(stem)?, fine_tunable))
    }

    /// A declared-but-unloaded handle; encoding through it is a StateError.
    pub fn unloaded(name: &str, dim: usize, max_tokens: usize) -> Self {
        EncoderHandle {
            name: name.into(),
            dim,
            max_tokens,
            fine_tunable: false,
            model: None,
        }
    }

    pub fn is_loaded(&self) -> bool {
        self.model.is_some()
    }

    pub fn model(&self) -> Result<&TransformerEncoder> {
        self.model
            .as_ref()
            .ok_or_else(|| Error::State(format!("encoder {:?} is not loaded", self.name)))
    }

    pub fn model_mut(&mut self) -> Result<&mut TransformerEncoder> {
        self.model
            .as_mut()
            .ok_or_else(|| Error::State(format!("encoder {:?} is not loaded", self.name)))
    }
}

/// CLS embedding of a sentence through a handle (eval mode, deterministic).
pub fn encode_cls(encoder: &EncoderHandle, sentence: &str) -> Result<Vec<f64>> {
    encoder.model()?.encode_cls(sentence)
}
