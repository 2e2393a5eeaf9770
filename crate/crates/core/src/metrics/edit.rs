use crate::error::{Error, Result};
use crate::textcore::TokenSeq;

/// Unit-cost token Levenshtein distance.
pub fn edit_distance(source: &TokenSeq, prediction: &TokenSeq) -> usize {
    levenshtein(source.tokens(), prediction.tokens())
}

pub(crate) fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let substitution = prev[j] + usize::from(x != y);
            cur[j + 1] = substitution.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Edit distance divided by the source length.
pub fn edit_ratio(source: &TokenSeq, prediction: &TokenSeq) -> Result<f64> {
    if source.is_empty() {
        return Err(Error::DegenerateInput("edit ratio needs a non-empty source".into()));
    }
    Ok(edit_distance(source, prediction) as f64 / source.len() as f64)
}

pub fn length_ratio(source: &TokenSeq, prediction: &TokenSeq) -> Result<f64> {
    if source.is_empty() {
        return Err(Error::DegenerateInput("length ratio needs a non-empty source".into()));
    }
    Ok(prediction.len() as f64 / source.len() as f64)
}
