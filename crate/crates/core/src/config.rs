//! Service configuration.
//!
//! The config file is flat `key = value` text; `#` starts a comment line.
//! Every key can be overridden by an environment variable named
//! `SVLINK_` + the key uppercased with `.` replaced by `_`
//! (`backend.endpoint_url` -> `SVLINK_BACKEND_ENDPOINT_URL`).
//!
//! | key | default |
//! |-----|---------|
//! | `corpus_root` | `corpus` |
//! | `snapshot_path` | `index.json` |
//! | `listen_address` | `127.0.0.1:8080` |
//! | `worker_count` | available parallelism |
//! | `cors_origin` | `*` |
//! | `lexicon_dir` | built-in lists |
//! | `summary.target_lang` | each publication's own language |
//! | `backend.endpoint_url` | none |
//! | `backend.timeout_ms` | `5000` |
//! | `backend.max_summary_tokens` | `30` |
//! | `sv.tau_classifier` | `0.5` |
//! | `sv.tau_retrieval` | `0.6` |
//! | `sv.top_k` | `5` |
//! | `sv.min_match_sim` | `0.35` |
//! | `sv.bias` | `-2.0` |
//! | `sv.weight_cue`, `sv.weight_digit`, `sv.weight_length`, `sv.weight_question_mark` | `0.9`, `0.3`, `0.4`, `0.5` |

use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::summarize::BackendConfig;
use crate::svident::SvConfig;
use crate::textproc::Language;

pub const ENV_PREFIX: &str = "SVLINK_";

#[derive(Debug, Clone, PartialEq)]
pub struct ServiceConfig {
    pub corpus_root: PathBuf,
    pub snapshot_path: PathBuf,
    pub listen_address: String,
    pub worker_count: usize,
    pub cors_origin: String,
    pub lexicon_dir: Option<PathBuf>,
    /// Language requested from the abstractive backend; `None` means the
    /// publication's own language.
    pub summary_target_lang: Option<Language>,
    pub backend: BackendConfig,
    pub sv: SvConfig,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            corpus_root: PathBuf::from("corpus"),
            snapshot_path: PathBuf::from("index.json"),
            listen_address: "127.0.0.1:8080".into(),
            worker_count: std::thread::available_parallelism().map_or(1, |n| n.get()),
            cors_origin: "*".into(),
            lexicon_dir: None,
            summary_target_lang: None,
            backend: BackendConfig::default(),
            sv: SvConfig::default(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config file {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("config line {line}: expected key = value")]
    Syntax { line: usize },
    #[error("unknown config key {0:?}")]
    UnknownKey(String),
    #[error("invalid value {value:?} for {key}: {reason}")]
    InvalidValue { key: String, value: String, reason: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

pub const KEYS: &[&str] = &[
    "corpus_root",
    "snapshot_path",
    "listen_address",
    "worker_count",
    "cors_origin",
    "lexicon_dir",
    "summary.target_lang",
    "backend.endpoint_url",
    "backend.timeout_ms",
    "backend.max_summary_tokens",
    "sv.tau_classifier",
    "sv.tau_retrieval",
    "sv.top_k",
    "sv.min_match_sim",
    "sv.bias",
    "sv.weight_cue",
    "sv.weight_digit",
    "sv.weight_length",
    "sv.weight_question_mark",
];

pub fn env_var_name(key: &str) -> String {
    format!("{ENV_PREFIX}{}", key.to_ascii_uppercase().replace('.', "_"))
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e: T::Err| ConfigError::InvalidValue {
        key: key.into(),
        value: value.into(),
        reason: e.to_string(),
    })
}

fn optional(value: &str) -> Option<&str> {
    Some(value).filter(|v| !v.is_empty())
}

impl ServiceConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let value = value.trim();
        match key {
            "corpus_root" => self.corpus_root = value.into(),
            "snapshot_path" => self.snapshot_path = value.into(),
            "listen_address" => self.listen_address = value.into(),
            "worker_count" => self.worker_count = parse(key, value)?,
            "cors_origin" => self.cors_origin = value.into(),
            "lexicon_dir" => self.lexicon_dir = optional(value).map(PathBuf::from),
            "summary.target_lang" => {
                self.summary_target_lang = optional(value).map(|v| parse(key, v)).transpose()?
            }
            "backend.endpoint_url" => self.backend.endpoint_url = optional(value).map(str::to_owned),
            "backend.timeout_ms" => self.backend.timeout_ms = parse(key, value)?,
            "backend.max_summary_tokens" => self.backend.max_summary_tokens = parse(key, value)?,
            "sv.tau_classifier" => self.sv.tau_classifier = parse(key, value)?,
            "sv.tau_retrieval" => self.sv.tau_retrieval = parse(key, value)?,
            "sv.top_k" => self.sv.top_k = parse(key, value)?,
            "sv.min_match_sim" => self.sv.min_match_sim = parse(key, value)?,
            "sv.bias" => self.sv.bias = parse(key, value)?,
            "sv.weight_cue" => self.sv.weights.cue = parse(key, value)?,
            "sv.weight_digit" => self.sv.weights.digit = parse(key, value)?,
            "sv.weight_length" => self.sv.weights.length = parse(key, value)?,
            "sv.weight_question_mark" => self.sv.weights.question_mark = parse(key, value)?,
            other => return Err(ConfigError::UnknownKey(other.into())),
        }
        Ok(())
    }

    /// Applies `key = value` lines.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(ConfigError::Syntax { line: i + 1 })?;
            self.set(key.trim(), value)?;
        }
        Ok(())
    }

    /// Applies every `SVLINK_*` variable that names a known key.
    pub fn apply_env<I, K, V>(&mut self, vars: I) -> Result<(), ConfigError>
    where
        I: IntoIterator<Item = (K, V)>,
        K: AsRef<str>,
        V: AsRef<str>,
    {
        let vars: Vec<(K, V)> = vars.into_iter().collect();
        for key in KEYS {
            let name = env_var_name(key);
            if let Some((_, v)) = vars.iter().find(|(k, _)| k.as_ref() == name) {
                self.set(key, v.as_ref())?;
            }
        }
        Ok(())
    }

    /// Defaults, then the optional file, then the process environment.
    pub fn load(path: Option<&Path>) -> Result<Self, ConfigError> {
        let mut config = Self::default();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
            config.apply_text(&text)?;
        }
        config.apply_env(std::env::vars())?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.corpus_root.as_os_str().is_empty() || self.snapshot_path.as_os_str().is_empty() {
            return Err(ConfigError::Invalid("corpus_root and snapshot_path must be nonempty".into()));
        }
        if self.worker_count == 0 {
            return Err(ConfigError::Invalid("worker_count must be at least 1".into()));
        }
        if self.backend.timeout_ms == 0 {
            return Err(ConfigError::Invalid("backend.timeout_ms must be positive".into()));
        }
        self.sv.validate().map_err(|e| ConfigError::Invalid(e.to_string()))
    }
}
