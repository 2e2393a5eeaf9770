//! Self-critique confidence from a label appended after the response.
//!
//! The model scores `prompt + "\n" + response + delimiter` followed by the
//! good and the bad label. In normalized mode the score is
//! `P(good) / (P(good) + P(bad))`; raw mode returns `P(good)` alone.

use serde::{Deserialize, Serialize};

use super::{score_continuation, TextBackend};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SuffixMode {
    #[default]
    Normalized,
    Raw,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SuffixConfig {
    pub delimiter: String,
    pub good_label: String,
    pub bad_label: String,
    pub mode: SuffixMode,
}

impl Default for SuffixConfig {
    fn default() -> Self {
        Self {
            delimiter: "\n---\n".into(),
            good_label: "quality is good".into(),
            bad_label: "quality is bad".into(),
            mode: SuffixMode::Normalized,
        }
    }
}

impl SuffixConfig {
    pub fn validate(&self) -> Result<()> {
        if self.delimiter.is_empty() {
            return Err(Error::invalid("suffix delimiter must be non-empty"));
        }
        if self.good_label.is_empty() || self.bad_label.is_empty() {
            return Err(Error::invalid("suffix labels must be non-empty"));
        }
        if self.good_label == self.bad_label {
            return Err(Error::invalid("good and bad suffix labels must differ"));
        }
        Ok(())
    }

    /// Same config with the good and bad labels exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            good_label: self.bad_label.clone(),
            bad_label: self.good_label.clone(),
            ..self.clone()
        }
    }

    pub fn scoring_prefix(&self, prompt: &str, response: &str) -> String {
        format!("{prompt}\n{response}{}", self.delimiter)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuffixScore {
    pub value: f64,
    /// Both labels had zero probability; `value` is the neutral 0.5.
    pub degenerate: bool,
}

pub fn suffix_score(
    backend: &dyn TextBackend,
    prompt: &str,
    response: &str,
    config: &SuffixConfig,
) -> Result<SuffixScore> {
    if response.is_empty() {
        return Err(Error::invalid("response must be non-empty"));
    }
    config.validate()?;
    let prefix = config.scoring_prefix(prompt, response);
    let log_good = score_continuation(backend, &prefix, &config.good_label)?;
    if config.mode == SuffixMode::Raw {
        return Ok(SuffixScore {
            value: log_good.exp().clamp(0.0, 1.0),
            degenerate: false,
        });
    }
    let log_bad = score_continuation(backend, &prefix, &config.bad_label)?;
    Ok(normalized(log_good, log_bad))
}

/// `g / (g + b)` from log-probabilities, evaluated as a logistic of the
/// difference so that tiny probabilities do not underflow to 0/0.
fn normalized(log_good: f64, log_bad: f64) -> SuffixScore {
    match (log_good == f64::NEG_INFINITY, log_bad == f64::NEG_INFINITY) {
        (true, true) => SuffixScore {
            value: 0.5,
            degenerate: true,
        },
        (true, false) => SuffixScore {
            value: 0.0,
            degenerate: false,
        },
        (false, true) => SuffixScore {
            value: 1.0,
            degenerate: false,
        },
        (false, false) => SuffixScore {
            value: 1.0 / (1.0 + (log_bad - log_good).exp()),
            degenerate: false,
        },
    }
}
