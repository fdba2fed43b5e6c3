//! Metrics, cross-model disagreement tables, and attention-weight export.
//!
//! Metrics are computed in exact rational arithmetic from the confusion
//! counts and rounded to f64 only at the report boundary, with the
//! zero-denominator convention pinned to 0 (recorded per class in the
//! report).

mod attention;
mod html;

pub use attention::{attention_weights, AttentionSource, TokenWeightMap};
pub use html::export_highlight_html;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::corpus::LabelScheme;
use crate::error::{Error, Result};
use crate::model::Prediction;

type R = Ratio<i128>;

fn ratio(n: i128, d: i128) -> R {
    if d == 0 {
        R::from_integer(0)
    } else {
        R::new(n, d)
    }
}

fn to_f64(r: R) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub label: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub labels: Vec<String>,
    /// Rows = gold label, columns = predicted label.
    pub confusion: Vec<Vec<usize>>,
    pub per_class: Vec<ClassMetrics>,
    pub macro_avg: [f64; 3],
    pub weighted_avg: [f64; 3],
    pub accuracy: f64,
    /// Labels whose precision or recall had a zero denominator.
    pub zero_division: Vec<String>,
}

/// Compute the evaluation report from parallel gold/predicted label-index
/// sequences.
pub fn evaluate_indices(gold: &[usize], pred: &[usize], labels: &[String]) -> Result<EvalReport> {
    if gold.len() != pred.len() {
        return Err(Error::Argument(format!(
            "gold has {} labels, predictions have {}",
            gold.len(),
            pred.len()
        )));
    }
    if gold.is_empty() {
        return Err(Error::Argument("cannot evaluate zero instances".into()));
    }
    let c = labels.len();
    if let Some(&bad) = gold.iter().chain(pred).find(|&&i| i >= c) {
        return Err(Error::Argument(format!("label index {bad} out of range")));
    }
    let mut confusion = vec![vec![0usize; c]; c];
    for (&g, &p) in gold.iter().zip(pred) {
        confusion[g][p] += 1;
    }

    let mut per_class = Vec::with_capacity(c);
    let mut zero_division = Vec::new();
    let mut macro_sum = [R::from_integer(0); 3];
    let mut weighted_sum = [R::from_integer(0); 3];
    let total = gold.len() as i128;

    for i in 0..c {
        let tp = confusion[i][i] as i128;
        let fp: i128 = (0..c).filter(|&g| g != i).map(|g| confusion[g][i] as i128).sum();
        let fn_: i128 = (0..c).filter(|&p| p != i).map(|p| confusion[i][p] as i128).sum();
        let support = (tp + fn_) as usize;
        if tp + fp == 0 || tp + fn_ == 0 {
            zero_division.push(labels[i].clone());
        }
        let p = ratio(tp, tp + fp);
        let r = ratio(tp, tp + fn_);
        // 2tp/(2tp+fp+fn) is the harmonic mean of p and r whenever both are
        // defined, and matches the pinned 0 convention when p + r = 0.
        let f1 = ratio(2 * tp, 2 * tp + fp + fn_);
        for (acc, v) in macro_sum.iter_mut().zip([p, r, f1]) {
            *acc += v;
        }
        for (acc, v) in weighted_sum.iter_mut().zip([p, r, f1]) {
            *acc += v * R::from_integer(support as i128);
        }
        per_class.push(ClassMetrics {
            label: labels[i].clone(),
            precision: to_f64(p),
            recall: to_f64(r),
            f1: to_f64(f1),
            support,
        });
    }
    let macro_avg = macro_sum.map(|s| to_f64(s / R::from_integer(c as i128)));
    let weighted_avg = weighted_sum.map(|s| to_f64(s / R::from_integer(total)));
    let trace: i128 = (0..c).map(|i| confusion[i][i] as i128).sum();
    let accuracy = to_f64(ratio(trace, total));

    Ok(EvalReport {
        labels: labels.to_vec(),
        confusion,
        per_class,
        macro_avg,
        weighted_avg,
        accuracy,
        zero_division,
    })
}

/// Evaluate string labels under a scheme.
pub fn evaluate(gold: &[String], pred: &[String], scheme: LabelScheme) -> Result<EvalReport> {
    let labels: Vec<String> = scheme.values().iter().map(|s| s.to_string()).collect();
    let to_idx = |xs: &[String]| -> Result<Vec<usize>> {
        xs.iter()
            .map(|l| {
                scheme
                    .index_of(l)
                    .ok_or_else(|| Error::Argument(format!("label {l:?} not in scheme")))
            })
            .collect()
    };
    evaluate_indices(&to_idx(gold)?, &to_idx(pred)?, &labels)
}

/// Evaluate prediction records.
pub fn evaluate_predictions(preds: &[Prediction], scheme: LabelScheme) -> Result<EvalReport> {
    let gold: Vec<String> = preds.iter().map(|p| p.gold.clone()).collect();
    let pred: Vec<String> = preds.iter().map(|p| p.pred.clone()).collect();
    evaluate(&gold, &pred, scheme)
}

impl EvalReport {
    /// Render the aligned text table in the published row layout:
    /// macro avg / weighted avg rows with a shared accuracy column.
    pub fn format_table(&self, model_name: &str) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:<32} {:>6} {:>6} {:>6} {:>6}\n",
            model_name, "P", "R", "F1", "Acc."
        ));
        out.push_str(&format!(
            "  {:<30} {:>6.2} {:>6.2} {:>6.2} {:>6.2}\n",
            "macro avg", self.macro_avg[0], self.macro_avg[1], self.macro_avg[2], self.accuracy
        ));
        out.push_str(&format!(
            "  {:<30} {:>6.2} {:>6.2} {:>6.2}\n",
            "weighted avg", self.weighted_avg[0], self.weighted_avg[1], self.weighted_avg[2]
        ));
        out
    }
}

/// Per-class counts of instances where exactly one of two models is correct.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisagreementTable {
    pub labels: Vec<String>,
    /// gold = c, model A correct, model B incorrect.
    pub a_correct_b_incorrect: Vec<usize>,
    /// gold = c, model A incorrect, model B correct.
    pub a_incorrect_b_correct: Vec<usize>,
}

/// Count per-class disagreements between two prediction sequences.
pub fn disagreement(
    gold: &[String],
    pred_a: &[String],
    pred_b: &[String],
    scheme: LabelScheme,
) -> Result<DisagreementTable> {
    if gold.len() != pred_a.len() || gold.len() != pred_b.len() {
        return Err(Error::Argument(format!(
            "length mismatch: gold {}, A {}, B {}",
            gold.len(),
            pred_a.len(),
            pred_b.len()
        )));
    }
    let labels: Vec<String> = scheme.values().iter().map(|s| s.to_string()).collect();
    let c = labels.len();
    let mut a_correct_b_incorrect = vec![0usize; c];
    let mut a_incorrect_b_correct = vec![0usize; c];
    for ((g, a), b) in gold.iter().zip(pred_a).zip(pred_b) {
        let Some(gi) = scheme.index_of(g) else {
            return Err(Error::Argument(format!("label {g:?} not in scheme")));
        };
        let a_ok = a == g;
        let b_ok = b == g;
        if a_ok && !b_ok {
            a_correct_b_incorrect[gi] += 1;
        } else if !a_ok && b_ok {
            a_incorrect_b_correct[gi] += 1;
        }
    }
    Ok(DisagreementTable {
        labels,
        a_correct_b_incorrect,
        a_incorrect_b_correct,
    })
}

impl DisagreementTable {
    /// Two-row error-set table, one column per class.
    pub fn format_table(&self, model_a: &str, model_b: &str) -> String {
        let mut out = String::new();
        out.push_str(&format!("{:<44}", "(# of samples in the error set)"));
        for l in &self.labels {
            out.push_str(&format!(" {l:>8}"));
        }
        out.push('\n');
        out.push_str(&format!("{:<44}", format!("{model_a} correct, {model_b} incorrect")));
        for v in &self.a_correct_b_incorrect {
            out.push_str(&format!(" {v:>8}"));
        }
        out.push('\n');
        out.push_str(&format!("{:<44}", format!("{model_a} incorrect, {model_b} correct")));
        for v in &self.a_incorrect_b_correct {
            out.push_str(&format!(" {v:>8}"));
        }
        out.push('\n');
        out
    }
}
