//! Independent brute-force oracles checked against the library
//! implementations: TF-IDF reconstruction and the metric definitions.

use std::collections::BTreeMap;

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use claimlens_core::evalviz::evaluate_indices;
use claimlens_core::lexfeat::{tfidf_fit_texts, SparseVector};
use claimlens_core::text::tokenize;

// ---------------------------------------------------------------------------
// TF-IDF oracle: a from-scratch recomputation of the same pinned formula,
// structured as naive full scans over the corpus.
// ---------------------------------------------------------------------------

fn oracle_ngrams(doc: &str, range: (usize, usize)) -> Vec<String> {
    let toks = tokenize(doc);
    let mut grams = Vec::new();
    for n in range.0..=range.1 {
        if n == 0 || toks.len() < n {
            continue;
        }
        for start in 0..=(toks.len() - n) {
            grams.push(toks[start..start + n].join(" "));
        }
    }
    grams
}

/// Dense oracle vector over the lexicographic vocabulary of `corpus`.
fn oracle_tfidf(corpus: &[String], doc: &str, range: (usize, usize)) -> Vec<f64> {
    // Vocabulary + document frequencies by full scan.
    let mut vocab: Vec<String> = corpus
        .iter()
        .flat_map(|d| oracle_ngrams(d, range))
        .collect();
    vocab.sort();
    vocab.dedup();
    let n_docs = corpus.len() as f64;
    let mut out = vec![0.0; vocab.len()];
    for (i, term) in vocab.iter().enumerate() {
        let df = corpus
            .iter()
            .filter(|d| oracle_ngrams(d, range).contains(term))
            .count() as f64;
        let idf = ((1.0 + n_docs) / (1.0 + df)).ln() + 1.0;
        let tf = oracle_ngrams(doc, range).iter().filter(|g| *g == term).count() as f64;
        out[i] = tf * idf;
    }
    let norm: f64 = out.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        for x in &mut out {
            *x /= norm;
        }
    }
    out
}

#[test]
fn tfidf_reconstructs_oracle_on_random_corpora() {
    let words = ["tax", "rose", "fell", "again", "budget", "deficit", "war"];
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _trial in 0..30 {
        let n_docs = rng.gen_range(2..8);
        let corpus: Vec<String> = (0..n_docs)
            .map(|_| {
                let len = rng.gen_range(1..8);
                (0..len)
                    .map(|_| words[rng.gen_range(0..words.len())])
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .collect();
        let model = tfidf_fit_texts(&corpus, (1, 2)).unwrap();
        for doc in &corpus {
            let got = model.transform(doc).to_dense();
            let want = oracle_tfidf(&corpus, doc, (1, 2));
            assert_eq!(got.len(), want.len());
            for (g, w) in got.iter().zip(&want) {
                assert!((g - w).abs() < 1e-9, "got {g}, oracle {w}");
            }
        }
    }
}

#[test]
fn tfidf_three_document_hand_corpus() {
    // d1 = "taxes rose", d2 = "taxes fell", d3 = "taxes rose again"
    // Lexicographic (1,2)-gram vocabulary:
    //   again, fell, rose, "rose again", taxes, "taxes fell", "taxes rose"
    // idf(t) = ln(4/(1+df)) + 1 with N = 3:
    //   df 1 -> ln 2 + 1;  df 2 -> ln(4/3) + 1;  df 3 -> 1.
    let docs = vec![
        "taxes rose".to_string(),
        "taxes fell".to_string(),
        "taxes rose again".to_string(),
    ];
    let model = tfidf_fit_texts(&docs, (1, 2)).unwrap();
    assert_eq!(
        model.vocab,
        vec!["again", "fell", "rose", "rose again", "taxes", "taxes fell", "taxes rose"]
    );
    let idf1 = 2f64.ln() + 1.0;
    let idf2 = (4f64 / 3.0).ln() + 1.0;
    let idf3 = 1.0;
    let expected_idf = [idf1, idf1, idf2, idf1, idf3, idf1, idf2];
    for (got, want) in model.idf.iter().zip(expected_idf) {
        assert!((got - want).abs() < 1e-12);
    }

    // transform("taxes rose again"): one hit each on
    //   again, rose, "rose again", taxes, "taxes rose".
    let v = model.transform("taxes rose again").to_dense();
    let raw = [idf1, 0.0, idf2, idf1, idf3, 0.0, idf2];
    let norm: f64 = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
    for (got, want) in v.iter().zip(raw.iter().map(|x| x / norm)) {
        assert!((got - want).abs() < 1e-9, "got {got}, hand value {want}");
    }

    // Repeated token: tf("taxes") = 2 in "taxes taxes fell".
    let v = model.transform("taxes taxes fell").to_dense();
    let raw = [0.0, idf1, 0.0, 0.0, 2.0 * idf3, idf1, 0.0];
    let norm: f64 = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
    for (got, want) in v.iter().zip(raw.iter().map(|x| x / norm)) {
        assert!((got - want).abs() < 1e-9);
    }
}

#[test]
fn sparse_vectors_store_no_zeros() {
    let docs = vec!["a b".to_string(), "c d".to_string()];
    let model = tfidf_fit_texts(&docs, (1, 1)).unwrap();
    let v = model.transform("a");
    assert!(v.entries.iter().all(|(_, x)| *x != 0.0));
    let dense = v.to_dense();
    assert_eq!(SparseVector::from_dense(&dense), v);
}

// ---------------------------------------------------------------------------
// Metric oracle: per-definition rational arithmetic over raw counts, with F1
// computed as the harmonic mean of P and R (vs. the library's 2tp identity).
// ---------------------------------------------------------------------------

type Q = Ratio<i128>;

struct OracleMetrics {
    per_class: Vec<(f64, f64, f64, usize)>,
    macro_avg: [f64; 3],
    weighted_avg: [f64; 3],
    accuracy: f64,
}

fn oracle_evaluate(gold: &[usize], pred: &[usize], n_classes: usize) -> OracleMetrics {
    let q = |n: i128, d: i128| if d == 0 { Q::from_integer(0) } else { Q::new(n, d) };
    let f = |x: Q| *x.numer() as f64 / *x.denom() as f64;
    let mut per_class = Vec::new();
    let mut macro_acc = [Q::from_integer(0); 3];
    let mut weighted_acc = [Q::from_integer(0); 3];
    for c in 0..n_classes {
        let mut tp = 0i128;
        let mut fp = 0i128;
        let mut fn_ = 0i128;
        let mut support = 0usize;
        for (&g, &p) in gold.iter().zip(pred) {
            if g == c {
                support += 1;
                if p == c {
                    tp += 1;
                } else {
                    fn_ += 1;
                }
            } else if p == c {
                fp += 1;
            }
        }
        let prec = q(tp, tp + fp);
        let rec = q(tp, tp + fn_);
        let f1 = if prec + rec == Q::from_integer(0) {
            Q::from_integer(0)
        } else {
            Q::from_integer(2) * prec * rec / (prec + rec)
        };
        for (acc, v) in macro_acc.iter_mut().zip([prec, rec, f1]) {
            *acc += v;
        }
        for (acc, v) in weighted_acc.iter_mut().zip([prec, rec, f1]) {
            *acc += v * Q::from_integer(support as i128);
        }
        per_class.push((f(prec), f(rec), f(f1), support));
    }
    let total = gold.len() as i128;
    let correct = gold.iter().zip(pred).filter(|(g, p)| g == p).count() as i128;
    OracleMetrics {
        per_class,
        macro_avg: macro_acc.map(|x| f(x / Q::from_integer(n_classes as i128))),
        weighted_avg: weighted_acc.map(|x| f(x / Q::from_integer(total))),
        accuracy: f(q(correct, total)),
    }
}

#[test]
fn evaluate_matches_rational_oracle_exactly_on_1000_sets() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let labels: Vec<String> = ["NFS", "UFS", "CFS"].iter().map(|s| s.to_string()).collect();
    for _trial in 0..1000 {
        let n = rng.gen_range(1..40);
        let gold: Vec<usize> = (0..n).map(|_| rng.gen_range(0..3)).collect();
        let pred: Vec<usize> = (0..n).map(|_| rng.gen_range(0..3)).collect();
        let rep = evaluate_indices(&gold, &pred, &labels).unwrap();
        let oracle = oracle_evaluate(&gold, &pred, 3);
        for (m, (p, r, f1, support)) in rep.per_class.iter().zip(&oracle.per_class) {
            assert_eq!(m.precision, *p);
            assert_eq!(m.recall, *r);
            assert_eq!(m.f1, *f1);
            assert_eq!(m.support, *support);
        }
        assert_eq!(rep.macro_avg, oracle.macro_avg);
        assert_eq!(rep.weighted_avg, oracle.weighted_avg);
        assert_eq!(rep.accuracy, oracle.accuracy);
        // Confusion sums to the instance count.
        let sum: usize = rep.confusion.iter().flatten().sum();
        assert_eq!(sum, n);
    }
}

#[test]
fn disagreement_sum_counts_exactly_one_correct_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let values = ["NFS", "UFS", "CFS"];
    for _trial in 0..200 {
        let n = rng.gen_range(1..30);
        let pick = |rng: &mut ChaCha8Rng| values[rng.gen_range(0..3)].to_string();
        let gold: Vec<String> = (0..n).map(|_| pick(&mut rng)).collect();
        let a: Vec<String> = (0..n).map(|_| pick(&mut rng)).collect();
        let b: Vec<String> = (0..n).map(|_| pick(&mut rng)).collect();
        let table = claimlens_core::evalviz::disagreement(
            &gold,
            &a,
            &b,
            claimlens_core::corpus::LabelScheme::Claimbuster3,
        )
        .unwrap();
        let table_sum: usize = table
            .a_correct_b_incorrect
            .iter()
            .chain(&table.a_incorrect_b_correct)
            .sum();
        let expected = gold
            .iter()
            .zip(&a)
            .zip(&b)
            .filter(|((g, x), y)| (*g == *x) != (*g == *y))
            .count();
        assert_eq!(table_sum, expected);
        // Per-class counts cannot exceed the class support.
        for (c, label) in values.iter().enumerate() {
            let support = gold.iter().filter(|g| g == label).count();
            assert!(table.a_correct_b_incorrect[c] <= support);
            assert!(table.a_incorrect_b_correct[c] <= support);
        }
    }
}

// ---------------------------------------------------------------------------
// TransE full-model gradient check over random graphs, both norms.
// ---------------------------------------------------------------------------

#[test]
fn transe_gradient_matches_finite_differences_on_random_graphs() {
    use claimlens_core::kgraph::{
        transe_margin_grad, transe_margin_loss, Norm, TripleGraph,
    };

    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let mut checked = 0usize;
    while checked < 25 {
        let norm = if rng.gen::<bool>() { Norm::L1 } else { Norm::L2 };
        let k = rng.gen_range(3..7);
        let mut graph = TripleGraph::new();
        for t in 0..6 {
            let h = rng.gen_range(0..5);
            let tail = rng.gen_range(0..5);
            let r = rng.gen_range(0..2);
            graph.add(&format!("e{h}"), &format!("r{r}"), &format!("e{tail}"));
            let _ = t;
        }
        if graph.entities.len() < 3 {
            continue;
        }
        let n_e = graph.entities.len();
        let n_r = graph.relations.len();
        let mut model = claimlens_core::kgraph::TransEModel {
            entity_emb: claimlens_core::tensorio::Matrix {
                rows: n_e,
                cols: k,
                data: (0..n_e * k).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            },
            relation_emb: claimlens_core::tensorio::Matrix {
                rows: n_r,
                cols: k,
                data: (0..n_r * k).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            },
            norm,
            margin: 1.0,
        };
        let pos = graph.triples[rng.gen_range(0..graph.triples.len())];
        let neg = claimlens_core::kgraph::Triple {
            head: rng.gen_range(0..n_e),
            relation: pos.relation,
            tail: rng.gen_range(0..n_e),
        };
        // Skip hinge-boundary configurations (kink of the max) and inactive
        // hinges (gradient identically zero is trivially correct).
        let act = transe_margin_loss(&model, pos, neg);
        if act < 1e-3 {
            continue;
        }
        let (eg, rg) = transe_margin_grad(&model, pos, neg);
        let eps = 1e-6;
        let mut check = |analytic: f64, is_entity: bool, row: usize, col: usize| {
            let buf = if is_entity {
                &mut model.entity_emb
            } else {
                &mut model.relation_emb
            };
            let idx = row * k + col;
            let orig = buf.data[idx];
            buf.data[idx] = orig + eps;
            let plus = transe_margin_loss(&model, pos, neg);
            let buf = if is_entity {
                &mut model.entity_emb
            } else {
                &mut model.relation_emb
            };
            buf.data[idx] = orig - eps;
            let minus = transe_margin_loss(&model, pos, neg);
            let buf = if is_entity {
                &mut model.entity_emb
            } else {
                &mut model.relation_emb
            };
            buf.data[idx] = orig;
            let numeric = (plus - minus) / (2.0 * eps);
            let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6);
            assert!(
                rel < 1e-4,
                "{norm:?} entity={is_entity} row {row} col {col}: analytic {analytic} numeric {numeric}"
            );
        };
        for e in 0..n_e {
            for c in 0..k {
                let analytic = eg.get(&e).map_or(0.0, |g| g[c]);
                check(analytic, true, e, c);
            }
        }
        for r in 0..n_r {
            for c in 0..k {
                let analytic = rg.get(&r).map_or(0.0, |g| g[c]);
                check(analytic, false, r, c);
            }
        }
        checked += 1;
    }
}

// ---------------------------------------------------------------------------
// Skip-gram behavioral ordering across seeds (small-scale integration run).
// ---------------------------------------------------------------------------

#[test]
fn skipgram_cosine_ordering_holds_across_seeds() {
    use claimlens_core::wordvec::{train_skipgram_sentences, SkipGramConfig};
    let mut sentences = Vec::new();
    for _ in 0..25 {
        sentences.push(vec!["a".to_string(), "b".to_string()]);
        sentences.push(vec!["z".to_string(), "q".to_string()]);
    }
    let mut wins = 0;
    for seed in 0..20 {
        let cfg = SkipGramConfig {
            dim: 12,
            window: 2,
            negative: 4,
            epochs: 25,
            learning_rate: 0.05,
            min_count: 1,
            seed,
        };
        let table = train_skipgram_sentences(&sentences, &cfg).unwrap();
        if table.cosine("a", "b").unwrap() > table.cosine("a", "z").unwrap() {
            wins += 1;
        }
    }
    assert!(wins >= 19, "ordering held in only {wins}/20 seeds");
}

// ---------------------------------------------------------------------------
// Ontology walk determinism at enumeration scale.
// ---------------------------------------------------------------------------

#[test]
fn three_node_chain_walks_enumerate_exactly() {
    use claimlens_core::ontology::{build_ontology, generate_walk_corpus, FactCheckRecord};
    // One record: claim -> reviewedBy -> review plus label/class edges.
    let rec = FactCheckRecord {
        claim_text: "alpha beta".into(),
        normalized_label: "TRUE".into(),
        debunk_links: vec![],
        review_body: String::new(),
        review_title: "gamma delta".into(),
        references: vec![],
        claim_entities: vec![],
        review_entities: vec![],
        wiki_categories: vec![],
        review_author: String::new(),
        publication_date: String::new(),
        language: None,
    };
    let ont = build_ontology(&[rec]).unwrap();
    let a = generate_walk_corpus(&ont, 3, 1, 9);
    let b = generate_walk_corpus(&ont, 3, 1, 9);
    assert_eq!(a, b);
    // Walks must start with each node token exactly walks_per_entity times
    // in the structure half.
    let structure = &a[..a.len() / 2];
    let mut starts: BTreeMap<&str, usize> = BTreeMap::new();
    for s in structure {
        *starts.entry(s[0].as_str()).or_insert(0) += 1;
    }
    for (_, count) in starts {
        assert_eq!(count, 1);
    }
}
