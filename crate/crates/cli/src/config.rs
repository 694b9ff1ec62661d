//! Optional TOML run configuration. Command-line flags take precedence over
//! it, and it takes precedence over the built-in defaults.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Deserialize;
use tdparse::corpus::Domain;
use tdparse::ranker::{Mode, Variant};

pub const SEED_ENV: &str = "TDPARSE_SEED";
pub const DEFAULT_SEED: u64 = 1;

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub train: Option<PathBuf>,
    pub dev: Option<PathBuf>,
    pub test: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub variant: Option<Variant>,
    pub mode: Option<Mode>,
    pub epochs: Option<usize>,
    pub patience: Option<usize>,
    pub learning_rate: Option<f64>,
    pub domain: Option<Domain>,
    #[serde(default)]
    pub tagger: TaggerSection,
    #[serde(default)]
    pub ranker: RankerSection,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaggerSection {
    pub word_dim: Option<usize>,
    pub pos_dim: Option<usize>,
    pub lstm_dim: Option<usize>,
    pub hidden_dim: Option<usize>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RankerSection {
    pub word_dim: Option<usize>,
    pub type_dim: Option<usize>,
    pub lstm_dim: Option<usize>,
    pub hidden_dim: Option<usize>,
    pub context_margin: Option<usize>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(RunConfig::default());
        };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Flag, then config file, then the seed environment variable, then
    /// the built-in default.
    pub fn seed(&self, flag: Option<u64>) -> Result<u64> {
        if let Some(s) = flag.or(self.seed) {
            return Ok(s);
        }
        match std::env::var(SEED_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .with_context(|| format!("{SEED_ENV}={v} is not an unsigned integer")),
            Err(_) => Ok(DEFAULT_SEED),
        }
    }
}

/// Parses a value through its serde name (kebab-case enums and the like).
pub fn parse_named<T: serde::de::DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string()))
        .map_err(|_| format!("unrecognized value '{s}'"))
}
