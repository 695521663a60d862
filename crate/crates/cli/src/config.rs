//! Optional JSON config file. Every key is optional; a flag given on the
//! command line wins over the same key here.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub alpha: Option<f64>,
    pub max_cond: Option<usize>,
    pub outcome: Option<String>,
    pub model: Option<String>,
    pub trees: Option<usize>,
    pub max_depth: Option<usize>,
    pub min_leaf: Option<usize>,
    pub max_features: Option<usize>,
    pub k: Option<usize>,
    pub delta: Option<f64>,
    pub class_of_interest: Option<u8>,
    pub sizes: Option<Vec<usize>>,
    pub reps: Option<usize>,
    pub n: Option<usize>,
    pub scale: Option<f64>,
    pub format: Option<String>,
    pub bind: Option<String>,
    pub port: Option<u16>,
    pub model_dir: Option<PathBuf>,
    pub cors_origins: Option<Vec<String>>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
    }
}
