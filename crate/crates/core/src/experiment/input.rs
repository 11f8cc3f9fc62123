use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::{ExperimentError, Result};
use crate::paths::{generate, read_path, GeneratorSpec, PricePath};
use crate::strategies::{clairvoyant_strategy, doob_strategy, SimpleStrategy};

/// Where a command gets its price path from.
///
/// ```json
/// {"csv": "path.csv"}
/// {"generator": {"kind": "exp-fractional", "hurst": 0.4, "n_samples": 1025, "seed": 3}}
/// {"values": [1, 0.5, 1.5], "horizon": 1}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PathInput {
    Csv {
        csv: PathBuf,
    },
    Generator {
        generator: GeneratorSpec,
    },
    Values {
        values: Vec<f64>,
        #[serde(default)]
        times: Option<Vec<f64>>,
        #[serde(default = "one")]
        horizon: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl PathInput {
    /// Loads the path; relative CSV paths are resolved against `base`.
    pub fn load(&self, base: &Path) -> Result<PricePath> {
        Ok(match self {
            Self::Csv { csv } => read_path(base.join(csv))?,
            Self::Generator { generator } => generate(generator)?,
            Self::Values { values, times: None, horizon } => PricePath::uniform(values.clone(), *horizon)?,
            Self::Values { values, times: Some(times), horizon } => {
                PricePath::new(times.clone(), values.clone(), *horizon)?
            }
        })
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Self::Generator { generator } => Some(generator.seed),
            _ => None,
        }
    }
}

/// A strategy named in a command config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "strategy", rename_all = "kebab-case")]
pub enum StrategySpec {
    Doob {
        a: f64,
        b: f64,
    },
    /// All-in on the up-moves of the path it is run on.
    Clairvoyant,
    Custom(SimpleStrategy),
}

impl StrategySpec {
    pub fn build(&self, path: &PricePath) -> Result<SimpleStrategy> {
        Ok(match self {
            Self::Doob { a, b } => doob_strategy(*a, *b)?,
            Self::Clairvoyant => clairvoyant_strategy(path)?.0,
            Self::Custom(s) => s.clone(),
        })
    }
}

pub fn load_json<T: DeserializeOwned>(file: &Path) -> Result<T> {
    let text =
        std::fs::read_to_string(file).map_err(|source| ExperimentError::Io { path: file.to_path_buf(), source })?;
    serde_json::from_str(&text).map_err(|e| ExperimentError::Config(format!("{}: {e}", file.display())))
}
