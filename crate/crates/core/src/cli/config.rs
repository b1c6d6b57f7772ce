//! The TOML run configuration. Every key has a command-line counterpart;
//! flags win over the file, the file wins over built-in defaults.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
    pub models: Option<Vec<String>>,
    pub timeout_secs: Option<f64>,
    #[serde(default)]
    pub probe1d: Probe1dFile,
    #[serde(default)]
    pub probe2d: Probe2dFile,
    #[serde(default)]
    pub parity: ParityFile,
    #[serde(default)]
    pub bench: BenchFile,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Probe1dFile {
    pub variants: Option<Vec<String>>,
    pub copies: Option<Vec<usize>>,
    pub ensembles: Option<Vec<usize>>,
    pub grid_lo: Option<f64>,
    pub grid_hi: Option<f64>,
    pub grid_count: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Probe2dFile {
    pub resolution: Option<usize>,
    pub points: Option<usize>,
    pub ensemble_members: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParityFile {
    pub min_dim: Option<usize>,
    pub max_dim: Option<usize>,
    pub regimes: Option<Vec<String>>,
    pub max_folds: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct BenchFile {
    pub csv: Option<PathBuf>,
    pub label_column: Option<String>,
    pub group_column: Option<String>,
    pub delimiter: Option<char>,
    pub no_header: Option<bool>,
    pub idx_train_images: Option<PathBuf>,
    pub idx_train_labels: Option<PathBuf>,
    pub idx_test_images: Option<PathBuf>,
    pub idx_test_labels: Option<PathBuf>,
    pub scheme: Option<String>,
    pub splits: Option<usize>,
    pub train_fraction: Option<f64>,
    pub sizes: Option<Vec<usize>>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }
}
