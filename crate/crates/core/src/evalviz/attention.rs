//! Token attention weights received from the CLS position.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{EncoderHandle, LinearModel};
use crate::tensorio::Matrix;

/// Per-token weights for one sentence, min-max normalized so the strongest
/// token has weight 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenWeightMap {
    pub sentence_id: String,
    pub tokens: Vec<String>,
    pub weights: Vec<f64>,
}

/// Anything that can expose per-layer attention matrices for a sentence.
pub trait AttentionSource {
    /// Sentence tokens plus attention matrices indexed [layer][head]; each
    /// matrix is (1 + tokens) square with the CLS slot at position 0.
    fn attention_for(&self, sentence: &str) -> Result<(Vec<String>, Vec<Vec<Matrix>>)>;
}

impl AttentionSource for EncoderHandle {
    fn attention_for(&self, sentence: &str) -> Result<(Vec<String>, Vec<Vec<Matrix>>)> {
        let model = self.model()?;
        let (tokens, _) = model.token_ids(sentence);
        let cache = model.forward(sentence)?;
        Ok((tokens, cache.attention()))
    }
}

impl AttentionSource for LinearModel {
    fn attention_for(&self, _sentence: &str) -> Result<(Vec<String>, Vec<Vec<Matrix>>)> {
        Err(Error::Capability(
            "linear models do not expose attention matrices".into(),
        ))
    }
}

/// Token weight = attention received from the CLS position, averaged over all
/// heads of the last four layers (or all layers when fewer), then min-max
/// normalized per sentence. An all-equal profile normalizes to all 1.0.
pub fn attention_weights(
    source: &dyn AttentionSource,
    sentence_id: &str,
    sentence: &str,
) -> Result<TokenWeightMap> {
    let (tokens, layers) = source.attention_for(sentence)?;
    if tokens.is_empty() {
        return Err(Error::Argument("sentence has no tokens".into()));
    }
    let take = layers.len().min(4);
    let selected = &layers[layers.len() - take..];
    let mut weights = vec![0.0; tokens.len()];
    let mut samples = 0usize;
    for layer in selected {
        for head in layer {
            samples += 1;
            // Row 0 is the CLS query; columns 1.. are the text tokens.
            for (j, w) in weights.iter_mut().enumerate() {
                *w += head.row(0)[j + 1];
            }
        }
    }
    for w in &mut weights {
        *w /= samples as f64;
    }
    let min = weights.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = weights.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max - min < 1e-15 {
        weights.iter_mut().for_each(|w| *w = 1.0);
    } else {
        for w in &mut weights {
            *w = (*w - min) / (max - min);
        }
    }
    Ok(TokenWeightMap {
        sentence_id: sentence_id.to_string(),
        tokens,
        weights,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Hand-set attention: every head attends from CLS mostly to one token.
    struct FixtureAttention {
        tokens: Vec<String>,
        favored: usize,
    }

    impl AttentionSource for FixtureAttention {
        fn attention_for(&self, _s: &str) -> Result<(Vec<String>, Vec<Vec<Matrix>>)> {
            let n = self.tokens.len() + 1;
            let mut data = vec![1.0 / n as f64; n * n];
            // CLS row: lopsided toward the favored token.
            for j in 0..n {
                data[j] = 0.1 / (n - 1) as f64;
            }
            data[self.favored + 1] = 0.9;
            let m = Matrix { rows: n, cols: n, data };
            Ok((self.tokens.clone(), vec![vec![m.clone()], vec![m]]))
        }
    }

    #[test]
    fn single_token_sentence_weights_one() {
        let enc = EncoderHandle::fixture(1);
        let map = attention_weights(&enc, "s1", "hello").unwrap();
        assert_eq!(map.tokens, vec!["hello"]);
        assert_eq!(map.weights, vec![1.0]);
    }

    #[test]
    fn uniform_attention_normalizes_to_all_ones() {
        struct Uniform;
        impl AttentionSource for Uniform {
            fn attention_for(&self, _s: &str) -> Result<(Vec<String>, Vec<Vec<Matrix>>)> {
                let n = 4;
                let m = Matrix {
                    rows: n,
                    cols: n,
                    data: vec![1.0 / n as f64; n * n],
                };
                Ok((
                    vec!["a".into(), "b".into(), "c".into()],
                    vec![vec![m]],
                ))
            }
        }
        let map = attention_weights(&Uniform, "s", "a b c").unwrap();
        assert_eq!(map.weights, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn hand_set_attention_peaks_on_favored_token() {
        let src = FixtureAttention {
            tokens: vec!["one".into(), "two".into(), "three".into(), "four".into()],
            favored: 2,
        };
        let map = attention_weights(&src, "s", "one two three four").unwrap();
        assert_eq!(map.weights[2], 1.0);
        for (j, w) in map.weights.iter().enumerate() {
            if j != 2 {
                assert!(*w < 1.0);
            }
        }
    }

    #[test]
    fn normalized_max_is_always_one() {
        let enc = EncoderHandle::fixture(5);
        let map =
            attention_weights(&enc, "s", "the president made a long statement today").unwrap();
        let max = map.weights.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(max, 1.0);
        assert!(map.weights.iter().all(|w| (0.0..=1.0).contains(w)));
        assert_eq!(map.tokens.len(), map.weights.len());
    }

    #[test]
    fn linear_models_report_missing_capability() {
        let m = LinearModel {
            kind: crate::model::LinearKind::SvmHinge,
            weights: vec![vec![0.0]],
            bias: vec![0.0],
            scaler: None,
            n_classes: 1,
        };
        assert!(matches!(
            attention_weights(&m, "s", "text"),
            Err(Error::Capability(_))
        ));
    }

    #[test]
    fn unloaded_encoder_is_state_error() {
        let enc = EncoderHandle::unloaded("bert", 768, 128);
        assert!(matches!(
            attention_weights(&enc, "s", "text"),
            Err(Error::State(_))
        ));
    }
}
