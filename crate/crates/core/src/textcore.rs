//! Whitespace tokenization, n-gram histograms and sentence splitting.
//!
//! Everything here is word level: a token is a maximal run of non-whitespace
//! characters. Metrics that compare n-grams use [`CasingMode::Lowercase`];
//! edit accounting keeps the original casing.

use std::collections::HashMap;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CasingMode {
    #[default]
    Preserve,
    Lowercase,
}

/// An ordered sequence of whitespace-free, non-empty tokens.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TokenSeq {
    tokens: Vec<String>,
    casing: CasingMode,
}

impl TokenSeq {
    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn casing(&self) -> CasingMode {
        self.casing
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(String::as_str)
    }

    /// Re-joins tokens with single spaces.
    pub fn join(&self) -> String {
        self.tokens.join(" ")
    }
}

pub fn tokenize(text: &str, casing: CasingMode) -> TokenSeq {
    let tokens = text
        .split_whitespace()
        .map(|t| match casing {
            CasingMode::Preserve => t.to_owned(),
            CasingMode::Lowercase => t.to_lowercase(),
        })
        .collect();
    TokenSeq { tokens, casing }
}

/// Number of whitespace-delimited words.
pub fn word_count(text: &str) -> usize {
    text.split_whitespace().count()
}

/// Sliding-window counts of contiguous n-grams of a fixed order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NGramHistogram {
    n: usize,
    counts: HashMap<Vec<String>, usize>,
}

impl NGramHistogram {
    pub fn order(&self) -> usize {
        self.n
    }

    pub fn counts(&self) -> &HashMap<Vec<String>, usize> {
        &self.counts
    }

    pub fn get(&self, gram: &[String]) -> usize {
        self.counts.get(gram).copied().unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }

    /// Largest count of any single n-gram; 0 for an empty histogram.
    pub fn max_count(&self) -> usize {
        self.counts.values().copied().max().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

pub fn ngrams(seq: &TokenSeq, n: usize) -> Result<NGramHistogram> {
    if n < 1 {
        return Err(Error::invalid("n-gram order must be >= 1"));
    }
    let mut counts = HashMap::new();
    for window in seq.tokens.windows(n) {
        *counts.entry(window.to_vec()).or_insert(0) += 1;
    }
    Ok(NGramHistogram { n, counts })
}

/// Splits after `.`, `!` or `?` when followed by whitespace or end of text.
///
/// Pieces are trimmed and empty pieces dropped, so `""` yields no sentences.
pub fn split_sentences(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut chars = text.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        if matches!(c, '.' | '!' | '?') {
            let boundary = match chars.peek() {
                None => true,
                Some((_, next)) => next.is_whitespace(),
            };
            if boundary {
                let end = i + c.len_utf8();
                push_trimmed(&mut out, &text[start..end]);
                start = end;
            }
        }
    }
    push_trimmed(&mut out, &text[start..]);
    out
}

fn push_trimmed(out: &mut Vec<String>, piece: &str) {
    let piece = piece.trim();
    if !piece.is_empty() {
        out.push(piece.to_owned());
    }
}

/// Collapses internal whitespace runs to single spaces and trims the ends.
pub fn normalize_whitespace(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}
