// scratch probe for seed robustness
use claimlens_core::wordvec::{train_skipgram_sentences, SkipGramConfig};

fn run(mk: fn() -> Vec<Vec<String>>, epochs: usize, lr: f64, dim: usize, label: &str) {
    let sentences = mk();
    let mut wins = 0;
    for seed in 0..100 {
        let cfg = SkipGramConfig { dim, window: 2, negative: 5, epochs, learning_rate: lr, min_count: 1, seed };
        let t = train_skipgram_sentences(&sentences, &cfg).unwrap();
        if t.cosine("a", "b").unwrap() > t.cosine("a", "z").unwrap() { wins += 1; }
    }
    println!("{label}: {wins}/100");
}

fn shared_context() -> Vec<Vec<String>> {
    let mut s = Vec::new();
    for _ in 0..25 {
        s.push(vec!["a".into(), "c".into(), "b".into()]);
        s.push(vec!["b".into(), "c".into(), "a".into()]);
        s.push(vec!["z".into(), "q".into()]);
        s.push(vec!["q".into(), "z".into()]);
    }
    s
}

fn direct_only() -> Vec<Vec<String>> {
    let mut s = Vec::new();
    for _ in 0..30 {
        s.push(vec!["a".into(), "b".into()]);
        s.push(vec!["z".into(), "q".into()]);
    }
    s
}

fn main() {
    run(direct_only, 30, 0.05, 16, "direct epochs30 lr.05 d16");
    run(shared_context, 30, 0.05, 12, "shared epochs30 lr.05 d12");
    run(shared_context, 60, 0.05, 12, "shared epochs60 lr.05 d12");
    run(shared_context, 60, 0.1, 12, "shared epochs60 lr.1 d12");
    run(shared_context, 100, 0.1, 12, "shared epochs100 lr.1 d12");
}
