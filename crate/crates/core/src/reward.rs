//! Heuristic rewrite reward.
//!
//! The scalar is a fixed-order weighted sum of five signals: NLI
//! (source ⇒ prediction), reversed NLI (prediction ⇒ source), length ratio,
//! edit ratio and the n-gram loop penalty. Weights depend on the rewrite task.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{edit_ratio, length_ratio, ngram_loop_reward, NGramPenaltyConfig};
use crate::textcore::{tokenize, CasingMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RewriteTask {
    Formalize,
    Shorten,
    Elaborate,
    Paraphrase,
    Proofread,
}

impl RewriteTask {
    pub const ALL: [RewriteTask; 5] = [
        RewriteTask::Formalize,
        RewriteTask::Shorten,
        RewriteTask::Elaborate,
        RewriteTask::Paraphrase,
        RewriteTask::Proofread,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RewriteTask::Formalize => "formalize",
            RewriteTask::Shorten => "shorten",
            RewriteTask::Elaborate => "elaborate",
            RewriteTask::Paraphrase => "paraphrase",
            RewriteTask::Proofread => "proofread",
        }
    }
}

impl fmt::Display for RewriteTask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RewriteTask {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        RewriteTask::ALL
            .into_iter()
            .find(|t| t.as_str() == lower)
            .ok_or_else(|| Error::invalid(format!("unknown rewrite task `{s}`")))
    }
}

/// Per-task weights of the five reward signals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RewardWeights {
    pub sigma_nli: f64,
    pub sigma_rnli: f64,
    pub sigma_length: f64,
    pub sigma_edit: f64,
    pub sigma_ngram: f64,
}

impl RewardWeights {
    pub const fn new(nli: f64, rnli: f64, length: f64, edit: f64, ngram: f64) -> Self {
        Self {
            sigma_nli: nli,
            sigma_rnli: rnli,
            sigma_length: length,
            sigma_edit: edit,
            sigma_ngram: ngram,
        }
    }

    pub fn as_array(&self) -> [f64; 5] {
        [
            self.sigma_nli,
            self.sigma_rnli,
            self.sigma_length,
            self.sigma_edit,
            self.sigma_ngram,
        ]
    }

    pub fn validate(&self) -> Result<()> {
        if self.as_array().iter().all(|w| w.is_finite()) {
            Ok(())
        } else {
            Err(Error::invalid("reward weights must be finite"))
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let [a, b, c, d, e] = self.as_array().map(|w| w * factor);
        Self::new(a, b, c, d, e)
    }
}

pub fn default_weights(task: RewriteTask) -> RewardWeights {
    match task {
        RewriteTask::Formalize => RewardWeights::new(1.0, 1.0, 0.0, 0.4, 1.0),
        RewriteTask::Shorten => RewardWeights::new(1.0, 0.4, -0.2, 0.4, 1.0),
        RewriteTask::Elaborate => RewardWeights::new(0.4, 1.0, 0.5, 0.4, 1.0),
        RewriteTask::Paraphrase => RewardWeights::new(1.0, 1.0, 0.0, 0.4, 1.0),
        RewriteTask::Proofread => RewardWeights::new(1.0, 1.0, 0.0, 0.0, 1.0),
    }
}

/// Raw reward signals before weighting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardTerms {
    pub nli: f64,
    pub rnli: f64,
    pub length_ratio: f64,
    pub edit_ratio: f64,
    pub ngram_reward: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RewardBreakdown {
    pub nli: f64,
    pub rnli: f64,
    pub length_ratio: f64,
    pub edit_ratio: f64,
    pub ngram_reward: f64,
    pub weights: RewardWeights,
    pub total: f64,
}

impl RewardBreakdown {
    /// Sums the weighted terms left to right, nli first.
    pub fn from_terms(terms: RewardTerms, weights: RewardWeights) -> Self {
        let mut total = weights.sigma_nli * terms.nli;
        total += weights.sigma_rnli * terms.rnli;
        total += weights.sigma_length * terms.length_ratio;
        total += weights.sigma_edit * terms.edit_ratio;
        total += weights.sigma_ngram * terms.ngram_reward;
        Self {
            nli: terms.nli,
            rnli: terms.rnli,
            length_ratio: terms.length_ratio,
            edit_ratio: terms.edit_ratio,
            ngram_reward: terms.ngram_reward,
            weights,
            total,
        }
    }

    pub fn terms(&self) -> RewardTerms {
        RewardTerms {
            nli: self.nli,
            rnli: self.rnli,
            length_ratio: self.length_ratio,
            edit_ratio: self.edit_ratio,
            ngram_reward: self.ngram_reward,
        }
    }
}

/// Entailment probability of `hypothesis` given `premise`, in [0, 1].
pub trait NliScorer: Send + Sync {
    fn score(&self, premise: &str, hypothesis: &str) -> Result<f64>;
}

impl<T: NliScorer + ?Sized> NliScorer for &T {
    fn score(&self, premise: &str, hypothesis: &str) -> Result<f64> {
        (**self).score(premise, hypothesis)
    }
}

impl<T: NliScorer + ?Sized> NliScorer for Box<T> {
    fn score(&self, premise: &str, hypothesis: &str) -> Result<f64> {
        (**self).score(premise, hypothesis)
    }
}

/// Unigram-overlap stand-in for an entailment model.
///
/// Share of distinct lowercased hypothesis tokens that also occur in the
/// premise; an empty hypothesis is trivially entailed.
pub fn stub_nli(premise: &str, hypothesis: &str) -> f64 {
    use std::collections::HashSet;
    let hyp: HashSet<String> = tokenize(hypothesis, CasingMode::Lowercase)
        .tokens()
        .iter()
        .cloned()
        .collect();
    if hyp.is_empty() {
        return 1.0;
    }
    let prem: HashSet<String> = tokenize(premise, CasingMode::Lowercase)
        .tokens()
        .iter()
        .cloned()
        .collect();
    hyp.iter().filter(|t| prem.contains(*t)).count() as f64 / hyp.len() as f64
}

#[derive(Debug, Clone, Copy, Default)]
pub struct StubNli;

impl NliScorer for StubNli {
    fn score(&self, premise: &str, hypothesis: &str) -> Result<f64> {
        Ok(stub_nli(premise, hypothesis))
    }
}

fn checked_score(scorer: &dyn NliScorer, premise: &str, hypothesis: &str) -> Result<f64> {
    let value = scorer.score(premise, hypothesis).map_err(|e| match e {
        Error::ScorerUnavailable(_) => e,
        other => Error::ScorerUnavailable(other.to_string()),
    })?;
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::ScorerUnavailable(format!("NLI score {value} outside [0, 1]")));
    }
    Ok(value)
}

pub fn heuristic_reward(
    task: RewriteTask,
    source: &str,
    prediction: &str,
    scorer: &dyn NliScorer,
    penalty: &NGramPenaltyConfig,
    weights: Option<&RewardWeights>,
) -> Result<RewardBreakdown> {
    let src = tokenize(source, CasingMode::Preserve);
    if src.is_empty() {
        return Err(Error::DegenerateInput("reward needs a non-empty source".into()));
    }
    let pred = tokenize(prediction, CasingMode::Preserve);
    let weights = match weights {
        Some(w) => {
            w.validate()?;
            *w
        }
        None => default_weights(task),
    };
    let terms = RewardTerms {
        nli: checked_score(scorer, source, prediction)?,
        rnli: checked_score(scorer, prediction, source)?,
        length_ratio: length_ratio(&src, &pred)?,
        edit_ratio: edit_ratio(&src, &pred)?,
        ngram_reward: ngram_loop_reward(prediction, penalty),
    };
    Ok(RewardBreakdown::from_terms(terms, weights))
}
