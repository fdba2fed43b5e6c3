//! Classifiers: linear baselines, the transformer encoder contract, and the
//! CLS ⊕ ontology fusion head.

mod encoder;
mod fusion;
mod linear;

pub use encoder::{
    encode_cls, EncoderConfig, EncoderHandle, ForwardCache, TransformerEncoder,
};
pub use fusion::{
    argmax, bce_with_logits, bce_with_logits_grad, fuse_forward, load_predictions,
    predict_baseline, predict_fusion, save_predictions, train_bert_baseline, train_fusion, Adam,
    BaselineHead, ForwardMode, FusionHead, Prediction, TrainConfig,
};
pub use linear::{train_linear, LinearConfig, LinearKind, LinearModel};
