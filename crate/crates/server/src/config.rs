//! Service configuration, read from TOML:
//!
//! ```toml
//! listen = "127.0.0.1:8080"
//! intents = "intents.toml"
//! extractor = "baseline"          # or { endpoint = "http://host:9000", timeout_ms = 10000 }
//! store_dir = "store"
//! rng_seed = 7
//!
//! [[sources]]
//! id = "hr"
//! url = "https://intranet.example/hr.html"
//! language = "fr"
//! ```
//!
//! Relative paths are resolved against the directory holding the file.

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::time::Duration;

use polyqa_core::dialog::{DialogConfig, QaParams, DEFAULT_TAU_INTENT, DEFAULT_THETA_ANSWER};
use polyqa_core::extractor::{DEFAULT_MAX_CANDIDATES, DEFAULT_STRIDE, DEFAULT_WINDOW};
use polyqa_core::ingest::{validate_source_id, FetchConfig, SourceEntry};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parsing config: {0}")]
    Parse(String),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Builtin {
    Baseline,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ExtractorSelection {
    Builtin(Builtin),
    Remote {
        endpoint: String,
        #[serde(default = "default_timeout_ms")]
        timeout_ms: u64,
    },
}

fn default_timeout_ms() -> u64 {
    30_000
}

impl Default for ExtractorSelection {
    fn default() -> Self {
        Self::Builtin(Builtin::Baseline)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServiceConfig {
    #[serde(default = "default_listen")]
    pub listen: SocketAddr,
    pub intents: PathBuf,
    #[serde(default)]
    pub extractor: ExtractorSelection,
    #[serde(default = "default_tau")]
    pub tau_intent: f64,
    #[serde(default = "default_theta")]
    pub theta_answer: f64,
    #[serde(default)]
    pub rng_seed: u64,
    #[serde(default = "default_window")]
    pub window: usize,
    #[serde(default = "default_stride")]
    pub stride: usize,
    #[serde(default = "default_max_candidates")]
    pub max_candidates: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub apology: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clarification: Option<String>,
    /// Snapshots are kept in memory only when unset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub store_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub audit_log: Option<PathBuf>,
    #[serde(default = "default_fetch_timeout_ms")]
    pub fetch_timeout_ms: u64,
    #[serde(default)]
    pub sources: Vec<SourceEntry>,
}

fn default_listen() -> SocketAddr {
    SocketAddr::from(([127, 0, 0, 1], 8080))
}
fn default_tau() -> f64 {
    DEFAULT_TAU_INTENT
}
fn default_theta() -> f64 {
    DEFAULT_THETA_ANSWER
}
fn default_window() -> usize {
    DEFAULT_WINDOW
}
fn default_stride() -> usize {
    DEFAULT_STRIDE
}
fn default_max_candidates() -> usize {
    DEFAULT_MAX_CANDIDATES
}
fn default_fetch_timeout_ms() -> u64 {
    20_000
}

impl ServiceConfig {
    pub fn new(intents: impl Into<PathBuf>) -> Self {
        toml::from_str(&format!("intents = {:?}", intents.into().display().to_string())).expect("defaults parse")
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let config: Self = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.into(), source })?;
        let mut config = Self::parse(&text)?;
        if let Some(base) = path.parent() {
            config.resolve_paths(base);
        }
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.intents);
        self.store_dir.as_mut().map(fix);
        self.audit_log.as_mut().map(fix);
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |m: String| Err(ConfigError::Invalid(m));
        if !(0.0..=1.0).contains(&self.tau_intent) {
            return invalid(format!("tau_intent {} is outside [0, 1]", self.tau_intent));
        }
        if !self.theta_answer.is_finite() {
            return invalid("theta_answer must be finite".into());
        }
        if self.stride == 0 || self.window <= self.stride {
            return invalid(format!("need 0 < stride < window, got window {} stride {}", self.window, self.stride));
        }
        if self.max_candidates == 0 {
            return invalid("max_candidates must be at least 1".into());
        }
        if let ExtractorSelection::Remote { endpoint, timeout_ms } = &self.extractor {
            if !(endpoint.starts_with("http://") || endpoint.starts_with("https://")) {
                return invalid(format!("extractor endpoint {endpoint:?} is not an http(s) url"));
            }
            if *timeout_ms == 0 {
                return invalid("extractor timeout_ms must be positive".into());
            }
        }
        let mut ids = std::collections::BTreeSet::new();
        for s in &self.sources {
            validate_source_id(&s.id).map_err(|e| ConfigError::Invalid(e.to_string()))?;
            if !ids.insert(&s.id) {
                return invalid(format!("duplicate source id {:?}", s.id));
            }
        }
        Ok(())
    }

    pub fn dialog_config(&self) -> DialogConfig {
        let defaults = DialogConfig::default();
        DialogConfig {
            tau_intent: self.tau_intent,
            qa: QaParams {
                window: self.window,
                stride: self.stride,
                max_candidates: self.max_candidates,
                theta_answer: self.theta_answer,
            },
            rng_seed: self.rng_seed,
            apology: self.apology.clone().unwrap_or(defaults.apology),
            clarification: self.clarification.clone().unwrap_or(defaults.clarification),
        }
    }

    pub fn fetch_config(&self) -> FetchConfig {
        FetchConfig { timeout: Duration::from_millis(self.fetch_timeout_ms), ..FetchConfig::default() }
    }
}
