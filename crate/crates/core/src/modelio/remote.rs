//! JSON-over-HTTP backend client.
//!
//! `POST {endpoint}/generate` with
//! `{"prompt", "num_samples", "temperature", "max_tokens", "logprobs"}` returns
//! `{"candidates": [{"text", "token_logprobs"}]}`; `POST {endpoint}/score`
//! with `{"prefix", "continuation"}` returns `{"logprob"}`.
//!
//! Transport failures (and 502/503/504 from a proxy in front of the model)
//! are retried with exponential backoff; any other HTTP status is a refusal
//! and is returned immediately.

use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{CandidateResponse, GenerationParams, InFlightLimiter, TextBackend};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetryPolicy {
    pub attempts: u32,
    pub initial_backoff: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            attempts: 3,
            initial_backoff: Duration::from_millis(250),
        }
    }
}

impl RetryPolicy {
    /// Delay before retry number `retry` (1-based).
    pub fn backoff(&self, retry: u32) -> Duration {
        self.initial_backoff * 2u32.saturating_pow(retry.saturating_sub(1))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RemoteConfig {
    pub endpoint: String,
    pub auth_token: Option<String>,
    pub max_in_flight: usize,
    pub timeout: Duration,
    pub retry: RetryPolicy,
}

impl RemoteConfig {
    pub fn new(endpoint: impl Into<String>) -> Self {
        Self {
            endpoint: endpoint.into(),
            auth_token: None,
            max_in_flight: 4,
            timeout: Duration::from_secs(60),
            retry: RetryPolicy::default(),
        }
    }
}

#[derive(Serialize)]
struct GenerateRequest<'a> {
    prompt: &'a str,
    num_samples: usize,
    temperature: f64,
    max_tokens: usize,
    logprobs: bool,
}

#[derive(Deserialize)]
struct WireCandidate {
    text: String,
    #[serde(default)]
    token_logprobs: Vec<f64>,
}

#[derive(Deserialize)]
struct GenerateResponse {
    candidates: Vec<WireCandidate>,
}

#[derive(Serialize)]
struct ScoreRequest<'a> {
    prefix: &'a str,
    continuation: &'a str,
}

#[derive(Deserialize)]
struct ScoreResponse {
    logprob: f64,
}

pub struct RemoteBackend {
    config: RemoteConfig,
    agent: ureq::Agent,
    limiter: InFlightLimiter,
}

impl RemoteBackend {
    pub fn new(config: RemoteConfig) -> Result<Self> {
        if !(config.endpoint.starts_with("http://") || config.endpoint.starts_with("https://")) {
            return Err(Error::invalid(format!(
                "endpoint must be an http(s) URL, got `{}`",
                config.endpoint
            )));
        }
        if config.retry.attempts < 1 {
            return Err(Error::invalid("retry attempts must be >= 1"));
        }
        let agent = ureq::AgentBuilder::new().timeout(config.timeout).build();
        let limiter = InFlightLimiter::new(config.max_in_flight);
        Ok(Self { config, agent, limiter })
    }

    pub fn config(&self) -> &RemoteConfig {
        &self.config
    }

    fn url(&self, path: &str) -> String {
        format!("{}/{}", self.config.endpoint.trim_end_matches('/'), path)
    }

    fn post<B: Serialize, R: for<'de> Deserialize<'de>>(&self, path: &str, body: &B) -> Result<R> {
        let url = self.url(path);
        let _permit = self.limiter.acquire();
        let mut last_error = String::new();
        for attempt in 1..=self.config.retry.attempts {
            if attempt > 1 {
                thread::sleep(self.config.retry.backoff(attempt - 1));
            }
            let mut request = self.agent.post(&url).set("Content-Type", "application/json");
            if let Some(token) = &self.config.auth_token {
                request = request.set("Authorization", &format!("Bearer {token}"));
            }
            match request.send_json(body) {
                Ok(response) => {
                    let text = response.into_string().map_err(|e| Error::Protocol(e.to_string()))?;
                    return serde_json::from_str(&text)
                        .map_err(|e| Error::Protocol(format!("malformed reply from {url}: {e}")));
                }
                Err(ureq::Error::Status(code @ (502..=504), _)) => {
                    last_error = format!("HTTP {code} from {url}");
                }
                Err(ureq::Error::Status(code, response)) => {
                    let message = response.into_string().unwrap_or_default();
                    return Err(Error::BackendRejected { status: code, message });
                }
                Err(ureq::Error::Transport(t)) => {
                    last_error = t.to_string();
                }
            }
        }
        Err(Error::BackendUnavailable {
            attempts: self.config.retry.attempts,
            message: last_error,
        })
    }
}

impl TextBackend for RemoteBackend {
    fn generate(&self, prompt: &str, params: &GenerationParams) -> Result<Vec<CandidateResponse>> {
        let request = GenerateRequest {
            prompt,
            num_samples: params.num_samples,
            temperature: params.temperature,
            max_tokens: params.max_tokens,
            logprobs: params.logprobs,
        };
        let response: GenerateResponse = self.post("generate", &request)?;
        Ok(response
            .candidates
            .into_iter()
            .map(|c| CandidateResponse::new(c.text, c.token_logprobs))
            .collect())
    }

    fn score_continuation(&self, prefix: &str, continuation: &str) -> Result<f64> {
        let response: ScoreResponse = self.post("score", &ScoreRequest { prefix, continuation })?;
        Ok(response.logprob)
    }

    fn max_in_flight(&self) -> usize {
        self.limiter.limit()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn backoff_doubles() {
        let p = RetryPolicy::default();
        assert_eq!(p.backoff(1), Duration::from_millis(250));
        assert_eq!(p.backoff(2), Duration::from_millis(500));
    }

    #[test]
    fn rejects_non_http_endpoint() {
        assert!(RemoteBackend::new(RemoteConfig::new("localhost:80")).is_err());
    }
}
