//! Application configuration: TOML file, `REWRITE_*` environment variables
//! and command-line overrides, in increasing precedence.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::cascade::CascadeConfig;
use crate::error::{Error, Result};
use crate::metrics::NGramPenaltyConfig;
use crate::modelio::{
    BackendNli, GenerationParams, MockBackend, RemoteBackend, RemoteConfig, RetryPolicy, SuffixConfig, TextBackend,
};
use crate::reward::{default_weights, NliScorer, RewardWeights, RewriteTask, StubNli};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BackendSettings {
    pub endpoint: Option<String>,
    pub auth_token: Option<String>,
    /// Mock script (JSON); takes priority over `endpoint`.
    pub mock_script: Option<PathBuf>,
    pub max_in_flight: usize,
    pub timeout_secs: u64,
    pub retry_attempts: u32,
    pub retry_backoff_ms: u64,
}

impl Default for BackendSettings {
    fn default() -> Self {
        Self {
            endpoint: None,
            auth_token: None,
            mock_script: None,
            max_in_flight: 4,
            timeout_secs: 60,
            retry_attempts: 3,
            retry_backoff_ms: 250,
        }
    }
}

impl BackendSettings {
    pub fn is_configured(&self) -> bool {
        self.endpoint.is_some() || self.mock_script.is_some()
    }

    fn validate(&self, section: &str) -> Result<()> {
        if self.max_in_flight < 1 {
            return Err(Error::config(format!("{section}.max_in_flight"), "must be >= 1"));
        }
        if self.retry_attempts < 1 {
            return Err(Error::config(format!("{section}.retry_attempts"), "must be >= 1"));
        }
        if self.timeout_secs < 1 {
            return Err(Error::config(format!("{section}.timeout_secs"), "must be >= 1"));
        }
        if let Some(e) = &self.endpoint {
            if !(e.starts_with("http://") || e.starts_with("https://")) {
                return Err(Error::config(
                    format!("{section}.endpoint"),
                    format!("not an http(s) URL: `{e}`"),
                ));
            }
        }
        Ok(())
    }

    pub fn build(&self, section: &str) -> Result<Arc<dyn TextBackend>> {
        if let Some(path) = &self.mock_script {
            return Ok(Arc::new(MockBackend::from_path(path)?));
        }
        let Some(endpoint) = &self.endpoint else {
            return Err(Error::config(
                format!("{section}.endpoint"),
                "no backend configured (set an endpoint or a mock script)",
            ));
        };
        let config = RemoteConfig {
            auth_token: self.auth_token.clone(),
            max_in_flight: self.max_in_flight,
            timeout: Duration::from_secs(self.timeout_secs),
            retry: RetryPolicy {
                attempts: self.retry_attempts,
                initial_backoff: Duration::from_millis(self.retry_backoff_ms),
            },
            ..RemoteConfig::new(endpoint.clone())
        };
        Ok(Arc::new(RemoteBackend::new(config)?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NliMode {
    /// Lexical-overlap stand-in; needs no model.
    #[default]
    Stub,
    /// Yes/no entailment scoring through the judge backend.
    Backend,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RewardSettings {
    pub ngram: NGramPenaltyConfig,
    /// Per-task replacements for the built-in weights.
    pub weights: BTreeMap<RewriteTask, RewardWeights>,
}

impl RewardSettings {
    pub fn weights_for(&self, task: RewriteTask) -> RewardWeights {
        self.weights
            .get(&task)
            .copied()
            .unwrap_or_else(|| default_weights(task))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DatagenSettings {
    /// Judge votes per triple.
    pub k: usize,
    /// Builtin template id or a path to a template file.
    pub template: String,
    /// Continuations sampled per seed.
    pub continuations: usize,
}

impl Default for DatagenSettings {
    fn default() -> Self {
        Self {
            k: 3,
            template: "default".into(),
            continuations: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AppConfig {
    /// On-device model, also used for generation and classification.
    pub backend: BackendSettings,
    /// Large fallback model for the cascade.
    pub server: BackendSettings,
    /// LLM judge.
    pub judge: BackendSettings,
    pub nli: NliMode,
    pub generation: GenerationParams,
    pub reward: RewardSettings,
    pub suffix: SuffixConfig,
    pub cascade: CascadeConfig,
    pub datagen: DatagenSettings,
}

/// Values given on the command line; `None` leaves lower layers untouched.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigOverrides {
    pub endpoint: Option<String>,
    pub auth_token: Option<String>,
    pub mock_script: Option<PathBuf>,
    pub server_endpoint: Option<String>,
    pub server_mock_script: Option<PathBuf>,
    pub judge_endpoint: Option<String>,
    pub judge_mock_script: Option<PathBuf>,
    pub gamma: Option<f64>,
    pub num_samples: Option<usize>,
    pub temperature: Option<f64>,
    pub k: Option<usize>,
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

impl AppConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let key = e.message().split('`').nth(1).unwrap_or("file").to_owned();
            Error::config(key, e.to_string().trim().to_owned())
        })
    }

    fn apply_env(&mut self, env: &HashMap<String, String>) {
        let get = |k: &str| env.get(k).filter(|v| !v.is_empty()).cloned();
        for (prefix, section) in [
            ("REWRITE_", &mut self.backend),
            ("REWRITE_SERVER_", &mut self.server),
            ("REWRITE_JUDGE_", &mut self.judge),
        ] {
            if let Some(v) = get(&format!("{prefix}ENDPOINT")) {
                section.endpoint = Some(v);
            }
            if let Some(v) = get(&format!("{prefix}AUTH_TOKEN")) {
                section.auth_token = Some(v);
            }
            if let Some(v) = get(&format!("{prefix}MOCK_SCRIPT")) {
                section.mock_script = Some(v.into());
            }
        }
    }

    fn apply_overrides(&mut self, o: &ConfigOverrides) {
        set(&mut self.backend.endpoint, o.endpoint.clone().map(Some));
        set(&mut self.backend.auth_token, o.auth_token.clone().map(Some));
        set(&mut self.backend.mock_script, o.mock_script.clone().map(Some));
        set(&mut self.server.endpoint, o.server_endpoint.clone().map(Some));
        set(&mut self.server.mock_script, o.server_mock_script.clone().map(Some));
        set(&mut self.judge.endpoint, o.judge_endpoint.clone().map(Some));
        set(&mut self.judge.mock_script, o.judge_mock_script.clone().map(Some));
        set(&mut self.cascade.gamma, o.gamma);
        if let Some(n) = o.num_samples {
            self.generation.num_samples = n;
            self.cascade.num_samples = n;
        }
        if let Some(t) = o.temperature {
            self.generation.temperature = t;
            self.cascade.temperature = t;
        }
        set(&mut self.datagen.k, o.k);
    }

    pub fn validate(&self) -> Result<()> {
        self.backend.validate("backend")?;
        self.server.validate("server")?;
        self.judge.validate("judge")?;
        let g = &self.generation;
        if !(g.temperature.is_finite() && g.temperature >= 0.0) {
            return Err(Error::config("generation.temperature", "must be a finite number >= 0"));
        }
        if g.num_samples < 1 {
            return Err(Error::config("generation.num_samples", "must be >= 1"));
        }
        if g.max_tokens < 1 {
            return Err(Error::config("generation.max_tokens", "must be >= 1"));
        }
        let c = &self.cascade;
        if !(0.0..=1.0).contains(&c.gamma) {
            return Err(Error::config(
                "cascade.gamma",
                format!("must lie in [0, 1], got {}", c.gamma),
            ));
        }
        if c.num_samples < 1 {
            return Err(Error::config("cascade.num_samples", "must be >= 1"));
        }
        if !(c.temperature.is_finite() && c.temperature >= 0.0) {
            return Err(Error::config("cascade.temperature", "must be a finite number >= 0"));
        }
        self.reward
            .ngram
            .validate()
            .map_err(|e| Error::config("reward.ngram", e.to_string()))?;
        for (task, w) in &self.reward.weights {
            w.validate()
                .map_err(|e| Error::config(format!("reward.weights.{task}"), e.to_string()))?;
        }
        self.suffix
            .validate()
            .map_err(|e| Error::config("suffix", e.to_string()))?;
        if self.datagen.k < 1 {
            return Err(Error::config("datagen.k", "must be >= 1"));
        }
        if self.datagen.continuations < 1 {
            return Err(Error::config("datagen.continuations", "must be >= 1"));
        }
        Ok(())
    }

    /// Server backend, or the main backend when no server is configured.
    pub fn server_backend(&self) -> Result<Arc<dyn TextBackend>> {
        if self.server.is_configured() {
            self.server.build("server")
        } else {
            self.backend.build("backend")
        }
    }

    /// Judge backend, or the main backend when no judge is configured.
    pub fn judge_backend(&self) -> Result<Arc<dyn TextBackend>> {
        if self.judge.is_configured() {
            self.judge.build("judge")
        } else {
            self.backend.build("backend")
        }
    }

    pub fn nli_scorer(&self) -> Result<Box<dyn NliScorer>> {
        match self.nli {
            NliMode::Stub => Ok(Box::new(StubNli)),
            NliMode::Backend => Ok(Box::new(BackendNli::new(self.judge_backend()?))),
        }
    }
}

/// Builds the effective configuration. Precedence: overrides, then `env`,
/// then the file at `path`, then built-in defaults.
pub fn load_config(
    path: Option<&Path>,
    env: &HashMap<String, String>,
    overrides: &ConfigOverrides,
) -> Result<AppConfig> {
    let mut config = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| Error::config("file", format!("cannot read {}: {e}", p.display())))?;
            AppConfig::from_toml(&text)?
        }
        None => AppConfig::default(),
    };
    config.apply_env(env);
    config.apply_overrides(overrides);
    config.validate()?;
    Ok(config)
}

/// `REWRITE_*` variables of the current process.
pub fn process_env() -> HashMap<String, String> {
    std::env::vars().filter(|(k, _)| k.starts_with("REWRITE_")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load(text: &str, env: &[(&str, &str)], o: &ConfigOverrides) -> Result<AppConfig> {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        std::fs::write(&path, text).unwrap();
        let env = env.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        load_config(Some(&path), &env, o)
    }

    #[test]
    fn defaults() {
        let c = load_config(None, &HashMap::new(), &ConfigOverrides::default()).unwrap();
        assert_eq!(
            c.reward.weights_for(RewriteTask::Shorten).as_array(),
            [1.0, 0.4, -0.2, 0.4, 1.0]
        );
        assert_eq!(c.generation.temperature, 0.5);
        assert_eq!(c.generation.num_samples, 8);
        assert_eq!(c.cascade.num_samples, 8);
        assert_eq!(c.datagen.k, 3);
    }

    #[test]
    fn precedence() {
        let file = "[backend]\nendpoint = \"http://file\"\n[cascade]\ngamma = 0.3\n";
        let c = load(file, &[], &ConfigOverrides::default()).unwrap();
        assert_eq!(c.backend.endpoint.as_deref(), Some("http://file"));
        assert_eq!(c.cascade.gamma, 0.3);
        let c = load(file, &[("REWRITE_ENDPOINT", "http://env")], &ConfigOverrides::default()).unwrap();
        assert_eq!(c.backend.endpoint.as_deref(), Some("http://env"));
        let flags = ConfigOverrides {
            endpoint: Some("http://flag".into()),
            gamma: Some(0.9),
            ..Default::default()
        };
        let c = load(file, &[("REWRITE_ENDPOINT", "http://env")], &flags).unwrap();
        assert_eq!(c.backend.endpoint.as_deref(), Some("http://flag"));
        assert_eq!(c.cascade.gamma, 0.9);
    }

    #[test]
    fn out_of_bounds_names_key() {
        let err = load("[cascade]\ngamma = 1.5\n", &[], &ConfigOverrides::default()).unwrap_err();
        assert!(
            matches!(&err, Error::Config { key, .. } if key == "cascade.gamma"),
            "{err}"
        );
        let err = load("[generation]\ntemperature = -1.0\n", &[], &ConfigOverrides::default()).unwrap_err();
        assert!(matches!(&err, Error::Config { key, .. } if key == "generation.temperature"));
    }

    #[test]
    fn unknown_key_rejected() {
        let err = load("[cascade]\ngama = 0.2\n", &[], &ConfigOverrides::default()).unwrap_err();
        assert!(matches!(&err, Error::Config { key, .. } if key == "gama"), "{err}");
    }

    #[test]
    fn weights_and_thresholds_from_file() {
        let file = "[reward.ngram]\npenalty = 2.0\nthresholds = { 1 = 6, 2 = 4 }\n\
                    [reward.weights.shorten]\nsigma_nli = 0.5\nsigma_rnli = 0.5\nsigma_length = -1.0\nsigma_edit = 0.0\nsigma_ngram = 1.0\n";
        let c = load(file, &[], &ConfigOverrides::default()).unwrap();
        assert_eq!(c.reward.ngram.thresholds, BTreeMap::from([(1, 6), (2, 4)]));
        assert_eq!(c.reward.weights_for(RewriteTask::Shorten).sigma_length, -1.0);
        assert_eq!(
            c.reward.weights_for(RewriteTask::Elaborate),
            default_weights(RewriteTask::Elaborate)
        );
        let bad = "[reward.ngram]\npenalty = 1.0\nthresholds = { 1 = 1 }\n";
        let err = load(bad, &[], &ConfigOverrides::default()).unwrap_err();
        assert!(matches!(&err, Error::Config { key, .. } if key == "reward.ngram"));
    }

    #[test]
    fn missing_backend_is_config_error() {
        let c = AppConfig::default();
        assert!(matches!(c.judge_backend(), Err(Error::Config { .. })));
    }
}
