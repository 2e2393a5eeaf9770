//! Text-generation and scoring backends.
//!
//! [`TextBackend`] is the seam every pipeline talks to. Two implementations
//! ship: [`RemoteBackend`] (JSON over HTTP) and [`MockBackend`] (scripted,
//! deterministic, for tests and offline runs).

mod concurrency;
mod mock;
mod nli;
mod remote;
mod suffix;

pub use concurrency::{map_bounded, InFlightLimiter, Permit};
pub use mock::{MockBackend, MockScript, ScoreRule, ScriptedCandidate};
pub use nli::BackendNli;
pub use remote::{RemoteBackend, RemoteConfig, RetryPolicy};
pub use suffix::{suffix_score, SuffixConfig, SuffixMode, SuffixScore};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GenerationParams {
    pub temperature: f64,
    pub num_samples: usize,
    pub max_tokens: usize,
    pub logprobs: bool,
}

impl Default for GenerationParams {
    fn default() -> Self {
        Self {
            temperature: 0.5,
            num_samples: 8,
            max_tokens: 256,
            logprobs: true,
        }
    }
}

impl GenerationParams {
    pub fn with_samples(&self, num_samples: usize) -> Self {
        Self {
            num_samples,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.temperature.is_finite() && self.temperature >= 0.0) {
            return Err(Error::invalid(format!(
                "temperature must be >= 0, got {}",
                self.temperature
            )));
        }
        if self.num_samples < 1 {
            return Err(Error::invalid("num_samples must be >= 1"));
        }
        if self.max_tokens < 1 {
            return Err(Error::invalid("max_tokens must be >= 1"));
        }
        Ok(())
    }
}

/// A decoded sample with its per-token natural-log probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateResponse {
    pub text: String,
    #[serde(default)]
    pub token_logprobs: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lm_score: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suffix_score: Option<f64>,
}

impl CandidateResponse {
    pub fn new(text: impl Into<String>, token_logprobs: Vec<f64>) -> Self {
        let lm_score = lm_score(&token_logprobs);
        Self {
            text: text.into(),
            token_logprobs,
            lm_score,
            suffix_score: None,
        }
    }
}

/// Mean token log-probability; `None` without tokens.
pub fn lm_score(token_logprobs: &[f64]) -> Option<f64> {
    if token_logprobs.is_empty() {
        None
    } else {
        Some(token_logprobs.iter().sum::<f64>() / token_logprobs.len() as f64)
    }
}

pub trait TextBackend: Send + Sync {
    /// Samples `params.num_samples` continuations of `prompt`.
    fn generate(&self, prompt: &str, params: &GenerationParams) -> Result<Vec<CandidateResponse>>;

    /// Total log-probability of `continuation` after `prefix` under forced decoding.
    fn score_continuation(&self, prefix: &str, continuation: &str) -> Result<f64>;

    /// Whether local heuristics may stand in for unparseable model output.
    fn offline_fallback(&self) -> bool {
        false
    }

    /// Upper bound on useful concurrent calls.
    fn max_in_flight(&self) -> usize {
        1
    }
}

impl<T: TextBackend + ?Sized> TextBackend for &T {
    fn generate(&self, prompt: &str, params: &GenerationParams) -> Result<Vec<CandidateResponse>> {
        (**self).generate(prompt, params)
    }
    fn score_continuation(&self, prefix: &str, continuation: &str) -> Result<f64> {
        (**self).score_continuation(prefix, continuation)
    }
    fn offline_fallback(&self) -> bool {
        (**self).offline_fallback()
    }
    fn max_in_flight(&self) -> usize {
        (**self).max_in_flight()
    }
}

impl<T: TextBackend + ?Sized> TextBackend for std::sync::Arc<T> {
    fn generate(&self, prompt: &str, params: &GenerationParams) -> Result<Vec<CandidateResponse>> {
        (**self).generate(prompt, params)
    }
    fn score_continuation(&self, prefix: &str, continuation: &str) -> Result<f64> {
        (**self).score_continuation(prefix, continuation)
    }
    fn offline_fallback(&self) -> bool {
        (**self).offline_fallback()
    }
    fn max_in_flight(&self) -> usize {
        (**self).max_in_flight()
    }
}

/// Validated generation: checks preconditions, the sample count and fills
/// in LM scores.
pub fn generate(backend: &dyn TextBackend, prompt: &str, params: &GenerationParams) -> Result<Vec<CandidateResponse>> {
    if prompt.is_empty() {
        return Err(Error::invalid("prompt must be non-empty"));
    }
    params.validate()?;
    let mut candidates = backend.generate(prompt, params)?;
    if candidates.len() != params.num_samples {
        return Err(Error::Protocol(format!(
            "expected {} candidates, backend returned {}",
            params.num_samples,
            candidates.len()
        )));
    }
    for c in &mut candidates {
        if c.token_logprobs
            .iter()
            .any(|lp| !lp.is_finite() && *lp != f64::NEG_INFINITY)
        {
            return Err(Error::Protocol("token log-probabilities must be finite or -inf".into()));
        }
        c.lm_score = lm_score(&c.token_logprobs);
    }
    Ok(candidates)
}

pub fn score_continuation(backend: &dyn TextBackend, prefix: &str, continuation: &str) -> Result<f64> {
    if continuation.is_empty() {
        return Err(Error::invalid("continuation must be non-empty"));
    }
    let lp = backend.score_continuation(prefix, continuation)?;
    if lp.is_nan() || lp > 1e-9 {
        return Err(Error::Protocol(format!("log-probability {lp} is not <= 0")));
    }
    Ok(lp.min(0.0))
}

/// FNV-1a, used to derive stable per-prompt seeds.
pub(crate) fn stable_hash(parts: &[&str]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for (i, part) in parts.iter().enumerate() {
        if i > 0 {
            h ^= 0xff;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
        for b in part.bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    }
    h
}
