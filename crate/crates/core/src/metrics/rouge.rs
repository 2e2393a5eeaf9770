//! ROUGE-L restricted to updated sentences.
//!
//! A sentence is "updated" when its whitespace-normalized form does not occur
//! among the source's sentences. Updated sentences of prediction and of each
//! reference are concatenated and compared with ROUGE-L F1; the best
//! reference wins.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::textcore::{normalize_whitespace, split_sentences, tokenize, CasingMode};

pub(crate) fn lcs_len<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y { prev[j] + 1 } else { prev[j + 1].max(cur[j]) };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// ROUGE-L F1 between two texts (lowercased word tokens).
///
/// Two empty texts score 1; exactly one empty text scores 0.
pub fn rouge_l_f1(candidate: &str, reference: &str) -> f64 {
    let c = tokenize(candidate, CasingMode::Lowercase);
    let r = tokenize(reference, CasingMode::Lowercase);
    match (c.is_empty(), r.is_empty()) {
        (true, true) => return 1.0,
        (true, false) | (false, true) => return 0.0,
        _ => {}
    }
    let lcs = lcs_len(c.tokens(), r.tokens());
    if lcs == 0 {
        return 0.0;
    }
    let precision = lcs as f64 / c.len() as f64;
    let recall = lcs as f64 / r.len() as f64;
    2.0 * precision * recall / (precision + recall)
}

/// Sentences of `text` that do not appear verbatim in `source`, joined by spaces.
pub fn updated_text(source: &str, text: &str) -> String {
    let known: HashSet<String> = split_sentences(source)
        .iter()
        .map(|s| normalize_whitespace(s))
        .collect();
    split_sentences(text)
        .iter()
        .map(|s| normalize_whitespace(s))
        .filter(|s| !known.contains(s))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn update_rouge<S: AsRef<str>>(source: &str, prediction: &str, references: &[S]) -> Result<f64> {
    if references.is_empty() {
        return Err(Error::invalid("Update-ROUGE needs at least one reference"));
    }
    let pred_updated = updated_text(source, prediction);
    Ok(references
        .iter()
        .map(|r| rouge_l_f1(&pred_updated, &updated_text(source, r.as_ref())))
        .fold(0.0, f64::max))
}
