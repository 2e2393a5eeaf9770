//! Scripted backend.
//!
//! A script maps prompt patterns to candidate lists and (prefix pattern,
//! continuation) pairs to log-probabilities. A pattern matches when it is a
//! substring of the prompt; the longest matching pattern wins, and `"*"`
//! matches anything. Unmatched prompts either echo the last prompt line or
//! fail, depending on `fallback`. Every value that is not scripted is derived
//! from a hash of the request content, so outputs are identical across runs
//! and processes.
//!
//! ```json
//! {
//!   "offline": false,
//!   "fallback": "echo",
//!   "generate": {
//!     "Make the text shorter.": ["Short.", {"text": "Shorter.", "token_logprobs": [-0.1]}]
//!   },
//!   "score": [
//!     {"prefix": "Short.", "continuation": "quality is good", "logprob": -0.1}
//!   ]
//! }
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{stable_hash, CandidateResponse, GenerationParams, TextBackend};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScriptedCandidate {
    Text(String),
    Full {
        text: String,
        #[serde(default)]
        token_logprobs: Option<Vec<f64>>,
    },
}

impl ScriptedCandidate {
    fn text(&self) -> &str {
        match self {
            ScriptedCandidate::Text(t) | ScriptedCandidate::Full { text: t, .. } => t,
        }
    }

    fn logprobs(&self) -> Option<&[f64]> {
        match self {
            ScriptedCandidate::Full {
                token_logprobs: Some(lp),
                ..
            } => Some(lp),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoreRule {
    /// Substring of the scoring prefix; `"*"` for any.
    pub prefix: String,
    /// Exact continuation; `"*"` for any.
    pub continuation: String,
    #[serde(default)]
    pub logprob: Option<f64>,
    #[serde(default)]
    pub token_logprobs: Option<Vec<f64>>,
}

impl ScoreRule {
    fn value(&self) -> Result<f64> {
        match (&self.logprob, &self.token_logprobs) {
            (Some(lp), None) => Ok(*lp),
            (None, Some(lps)) => Ok(lps.iter().sum()),
            _ => Err(Error::Validation(format!(
                "score rule for `{}` needs exactly one of logprob/token_logprobs",
                self.prefix
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Fallback {
    #[default]
    Echo,
    Error,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MockScript {
    /// Enables local heuristic fallbacks (e.g. keyword task classification).
    #[serde(default)]
    pub offline: bool,
    #[serde(default)]
    pub fallback: Fallback,
    #[serde(default)]
    pub generate: BTreeMap<String, Vec<ScriptedCandidate>>,
    #[serde(default)]
    pub score: Vec<ScoreRule>,
}

#[derive(Debug, Clone)]
pub struct MockBackend {
    script: MockScript,
    /// Generation patterns, longest first.
    patterns: Vec<String>,
}

impl MockBackend {
    pub fn new(script: MockScript) -> Result<Self> {
        for rule in &script.score {
            rule.value()?;
        }
        if let Some((pattern, _)) = script.generate.iter().find(|(_, c)| c.is_empty()) {
            return Err(Error::Validation(format!("mock pattern `{pattern}` has no candidates")));
        }
        let mut patterns: Vec<String> = script.generate.keys().cloned().collect();
        patterns.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
        Ok(Self { script, patterns })
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let script: MockScript =
            serde_json::from_str(json).map_err(|e| Error::Validation(format!("mock script: {e}")))?;
        Self::new(script)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    /// An empty script: echoes prompts and hashes scores.
    pub fn echo() -> Self {
        Self::new(MockScript::default()).expect("empty script is valid")
    }

    pub fn script(&self) -> &MockScript {
        &self.script
    }

    fn find_generate(&self, prompt: &str) -> Option<&[ScriptedCandidate]> {
        self.patterns
            .iter()
            .find(|p| p.as_str() == "*" || prompt.contains(p.as_str()))
            .map(|p| self.script.generate[p].as_slice())
    }

    fn find_score(&self, prefix: &str, continuation: &str) -> Option<&ScoreRule> {
        self.script
            .score
            .iter()
            .filter(|r| r.continuation == "*" || r.continuation == continuation)
            .filter(|r| r.prefix == "*" || prefix.contains(&r.prefix))
            // most specific prefix first, then exact continuation over wildcard
            .max_by_key(|r| (r.prefix != "*", r.prefix.len(), r.continuation != "*"))
    }
}

fn pseudo_logprobs(seed: u64, n_tokens: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n_tokens.max(1)).map(|_| rng.gen_range(-4.0..-0.05)).collect()
}

impl TextBackend for MockBackend {
    fn generate(&self, prompt: &str, params: &GenerationParams) -> Result<Vec<CandidateResponse>> {
        match self.find_generate(prompt) {
            Some(scripted) => Ok((0..params.num_samples)
                .map(|i| {
                    let c = &scripted[i % scripted.len()];
                    let lps = match c.logprobs() {
                        Some(lp) => lp.to_vec(),
                        None => pseudo_logprobs(
                            stable_hash(&[prompt, c.text(), &i.to_string()]),
                            c.text().split_whitespace().count(),
                        ),
                    };
                    CandidateResponse::new(c.text(), lps)
                })
                .collect()),
            None if self.script.fallback == Fallback::Error => {
                Err(Error::Protocol("mock script has no entry for prompt".into()))
            }
            None => {
                let line = prompt.lines().rev().find(|l| !l.trim().is_empty()).unwrap_or("").trim();
                Ok((0..params.num_samples)
                    .map(|i| {
                        let lps =
                            pseudo_logprobs(stable_hash(&[prompt, &i.to_string()]), line.split_whitespace().count());
                        CandidateResponse::new(line, lps)
                    })
                    .collect())
            }
        }
    }

    fn score_continuation(&self, prefix: &str, continuation: &str) -> Result<f64> {
        match self.find_score(prefix, continuation) {
            Some(rule) => rule.value(),
            None => Ok(pseudo_logprobs(
                stable_hash(&[prefix, continuation]),
                continuation.split_whitespace().count(),
            )
            .iter()
            .sum()),
        }
    }

    fn offline_fallback(&self) -> bool {
        self.script.offline
    }

    fn max_in_flight(&self) -> usize {
        8
    }
}
