use super::{score_continuation, TextBackend};
use crate::error::Result;
use crate::reward::NliScorer;

/// Entailment scorer backed by a text backend's scoring endpoint.
///
/// Scores a yes/no answer after a premise/hypothesis prompt and returns the
/// normalized probability of "yes".
pub struct BackendNli<B> {
    backend: B,
}

impl<B: TextBackend> BackendNli<B> {
    pub fn new(backend: B) -> Self {
        Self { backend }
    }

    fn prompt(premise: &str, hypothesis: &str) -> String {
        format!("Premise: {premise}\nHypothesis: {hypothesis}\nDoes the premise entail the hypothesis? Answer:")
    }
}

impl<B: TextBackend> NliScorer for BackendNli<B> {
    fn score(&self, premise: &str, hypothesis: &str) -> Result<f64> {
        let prefix = Self::prompt(premise, hypothesis);
        let yes = score_continuation(&self.backend, &prefix, " yes")?;
        let no = score_continuation(&self.backend, &prefix, " no")?;
        if yes == f64::NEG_INFINITY && no == f64::NEG_INFINITY {
            return Ok(0.5);
        }
        Ok(1.0 / (1.0 + (no - yes).exp()))
    }
}
