//! Shared text utilities: tokenization, syllable heuristics, sentiment scoring.
//!
//! The tokenizer is deliberately simple and deterministic: lowercase, split on
//! non-alphanumeric characters, keep apostrophes that sit between alphanumerics
//! (so "don't" stays one token).

/// Words counted as positive hits by the built-in sentiment scorer.
const POSITIVE_WORDS: &[&str] = &[
    "good", "great", "best", "better", "right", "strong", "stronger", "success", "successful",
    "win", "winning", "won", "support", "supported", "hope", "hopeful", "proud", "pride",
    "safe", "safer", "secure", "fair", "honest", "true", "truth", "improve", "improved",
    "growth", "grow", "prosperity", "peace", "love", "like", "agree", "benefit", "benefits",
    "help", "helped", "helping", "positive", "progress", "opportunity", "opportunities",
    "freedom", "free", "thank", "thanks", "happy", "glad", "wonderful", "excellent",
];

/// Words counted as negative hits by the built-in sentiment scorer.
const NEGATIVE_WORDS: &[&str] = &[
    "bad", "worse", "worst", "wrong", "weak", "weaker", "fail", "failed", "failure", "lose",
    "losing", "lost", "fear", "afraid", "crisis", "problem", "problems", "threat", "danger",
    "dangerous", "deficit", "debt", "unemployment", "war", "attack", "attacked", "corrupt",
    "corruption", "lie", "lies", "lied", "false", "poverty", "poor", "crime", "criminal",
    "disaster", "terrible", "awful", "hate", "disagree", "against", "hurt", "harm", "damage",
    "decline", "collapse", "broken", "sad", "angry", "negative",
];

/// Lowercase and split on non-alphanumerics, keeping intra-word apostrophes.
pub fn tokenize(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut current = String::new();
    for (i, &c) in chars.iter().enumerate() {
        if c.is_alphanumeric() {
            current.extend(c.to_lowercase());
        } else if (c == '\'' || c == '\u{2019}')
            && i > 0
            && chars[i - 1].is_alphanumeric()
            && chars.get(i + 1).is_some_and(|n| n.is_alphanumeric())
        {
            current.push('\'');
        } else if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

/// Number of whitespace-delimited tokens (used by the <4-token cleaning rule
/// and by word counts).
pub fn whitespace_token_count(text: &str) -> usize {
    text.split_whitespace().count()
}

/// Count of sentence-terminator runs ('.', '!', '?'); at least 1 for non-empty text.
pub fn sentence_count(text: &str) -> usize {
    let mut count = 0;
    let mut in_terminator = false;
    for c in text.chars() {
        if c == '.' || c == '!' || c == '?' {
            if !in_terminator {
                count += 1;
            }
            in_terminator = true;
        } else {
            in_terminator = false;
        }
    }
    count.max(1)
}

/// Heuristic syllable count: number of vowel groups (aeiouy), minimum 1.
pub fn syllable_count(word: &str) -> usize {
    let mut count = 0;
    let mut in_vowel_group = false;
    for c in word.chars() {
        let is_vowel = matches!(
            c.to_ascii_lowercase(),
            'a' | 'e' | 'i' | 'o' | 'u' | 'y'
        );
        if is_vowel && !in_vowel_group {
            count += 1;
        }
        in_vowel_group = is_vowel;
    }
    count.max(1)
}

/// Flesch reading ease: 206.835 - 1.015 * (words/sentences) - 84.6 * (syllables/words).
///
/// Returns 0.0 for text without any tokens.
pub fn flesch_reading_ease(text: &str) -> f64 {
    let tokens = tokenize(text);
    if tokens.is_empty() {
        return 0.0;
    }
    let words = tokens.len() as f64;
    let sentences = sentence_count(text) as f64;
    let syllables: usize = tokens.iter().map(|t| syllable_count(t)).sum();
    206.835 - 1.015 * (words / sentences) - 84.6 * (syllables as f64 / words)
}

/// (positive hits - negative hits) / token count, in [-1, 1]; 0 for empty text.
pub fn sentiment_score(text: &str) -> f64 {
    let tokens = tokenize(text);
    if tokens.is_empty() {
        return 0.0;
    }
    let mut pos = 0i64;
    let mut neg = 0i64;
    for t in &tokens {
        if POSITIVE_WORDS.contains(&t.as_str()) {
            pos += 1;
        }
        if NEGATIVE_WORDS.contains(&t.as_str()) {
            neg += 1;
        }
    }
    (pos - neg) as f64 / tokens.len() as f64
}

/// Sign-based sentiment bucket used for knowledge-graph metadata.
pub fn sentiment_bucket(text: &str) -> &'static str {
    let s = sentiment_score(text);
    if s > 0.0 {
        "pos"
    } else if s < 0.0 {
        "neg"
    } else {
        "neu"
    }
}

/// Whether a whitespace token is a URL under the pinned rule
/// (scheme-prefixed: `http://`, `https://`, or `www.`).
pub fn is_url_token(token: &str) -> bool {
    let t = token.to_ascii_lowercase();
    t.starts_with("http://") || t.starts_with("https://") || t.starts_with("www.")
}
