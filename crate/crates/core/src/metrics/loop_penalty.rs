//! N-gram frequency loop detector used as a reward term.
//!
//! Orders are checked in ascending order and the first order whose most
//! frequent n-gram reaches its threshold yields `-penalty`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::textcore::{ngrams, tokenize, CasingMode};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NGramPenaltyConfig {
    /// n-gram order → minimum count that counts as a loop.
    #[serde(deserialize_with = "order_keys")]
    pub thresholds: BTreeMap<usize, usize>,
    pub penalty: f64,
}

/// Accepts map keys written as strings, as TOML and JSON require.
fn order_keys<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<BTreeMap<usize, usize>, D::Error> {
    let raw = BTreeMap::<String, usize>::deserialize(d)?;
    raw.into_iter()
        .map(|(k, v)| {
            k.trim()
                .parse::<usize>()
                .map(|n| (n, v))
                .map_err(|_| serde::de::Error::custom(format!("n-gram order `{k}` is not a positive integer")))
        })
        .collect()
}

impl Default for NGramPenaltyConfig {
    fn default() -> Self {
        Self {
            thresholds: BTreeMap::from([(1, 8), (2, 5), (3, 4), (4, 3)]),
            penalty: 1.0,
        }
    }
}

impl NGramPenaltyConfig {
    pub fn new(thresholds: impl IntoIterator<Item = (usize, usize)>, penalty: f64) -> Result<Self> {
        let config = Self {
            thresholds: thresholds.into_iter().collect(),
            penalty,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.penalty.is_finite() && self.penalty > 0.0) {
            return Err(Error::invalid(format!(
                "loop penalty must be a positive finite number, got {}",
                self.penalty
            )));
        }
        for (&n, &threshold) in &self.thresholds {
            if n < 1 {
                return Err(Error::invalid("n-gram order must be >= 1"));
            }
            if threshold < 2 {
                return Err(Error::invalid(format!(
                    "threshold for order {n} must be >= 2, got {threshold}"
                )));
            }
        }
        Ok(())
    }
}

/// Returns `-config.penalty` when `text` contains a repeated n-gram at or
/// above its threshold, otherwise `0.0`.
pub fn ngram_loop_reward(text: &str, config: &NGramPenaltyConfig) -> f64 {
    let words = tokenize(text, CasingMode::Lowercase);
    for (&n, &threshold) in &config.thresholds {
        let Ok(hist) = ngrams(&words, n) else { continue };
        if hist.max_count() >= threshold {
            return -config.penalty;
        }
    }
    0.0
}
