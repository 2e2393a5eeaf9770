//! Automatic rewrite metrics.

mod bleu;
mod edit;
mod loop_penalty;
mod rouge;
mod sari;

pub use bleu::{bleu, corpus_bleu, BleuStats};
pub use edit::{edit_distance, edit_ratio, length_ratio};
pub use loop_penalty::{ngram_loop_reward, NGramPenaltyConfig};
pub use rouge::{rouge_l_f1, update_rouge, updated_text};
pub use sari::{sari, sari_breakdown, SariBreakdown};

use serde::Serialize;

use crate::error::Result;
use crate::textcore::{tokenize, CasingMode};

/// Source-relative and reference-based metrics for one prediction.
///
/// `bleu`, `sari` and `update_rouge` are fractions in [0, 1]; reports scale
/// them by 100.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricReport {
    pub edit_ratio: f64,
    pub length_ratio: f64,
    pub bleu: f64,
    pub sari: f64,
    pub update_rouge: f64,
}

impl MetricReport {
    pub fn compute<S: AsRef<str>>(source: &str, prediction: &str, references: &[S]) -> Result<Self> {
        let src = tokenize(source, CasingMode::Preserve);
        let pred = tokenize(prediction, CasingMode::Preserve);
        Ok(Self {
            edit_ratio: edit_ratio(&src, &pred)?,
            length_ratio: length_ratio(&src, &pred)?,
            bleu: bleu(prediction, references)?,
            sari: sari(source, prediction, references)?,
            update_rouge: update_rouge(source, prediction, references)?,
        })
    }
}
