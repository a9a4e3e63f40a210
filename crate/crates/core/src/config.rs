//! Pipeline configuration: defaults, an optional JSON file, then
//! command-line overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::DEFAULT_TOP_K;
use crate::synth::{GenerationConfig, RowBounds};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub master_seed: u64,
    pub rows_min: usize,
    pub rows_max: usize,
    pub tables_per_relation: usize,
    pub negative_fraction: f64,
    pub top_k: usize,
    /// (train, validation)
    pub split_ratios: (f64, f64),
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            master_seed: 0,
            rows_min: RowBounds::DEFAULT.min,
            rows_max: RowBounds::DEFAULT.max,
            tables_per_relation: 1,
            negative_fraction: 0.0,
            top_k: DEFAULT_TOP_K,
            split_ratios: (0.9, 0.1),
            input: None,
            output: None,
        }
    }
}

impl PipelineConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        self.generation().validate()?;
        if self.top_k < 1 {
            return Err(Error::Config("top_k must be at least 1".into()));
        }
        let (train, valid) = self.split_ratios;
        if !(train > 0.0 && valid >= 0.0 && (train + valid - 1.0).abs() <= 1e-9) {
            return Err(Error::Config(format!(
                "split ratios must be non-negative with positive train share and sum to 1, got ({train}, {valid})"
            )));
        }
        Ok(())
    }

    pub fn bounds(&self) -> Result<RowBounds> {
        RowBounds::new(self.rows_min, self.rows_max)
    }

    pub fn generation(&self) -> GenerationConfig {
        GenerationConfig {
            master_seed: self.master_seed,
            rows_min: self.rows_min,
            rows_max: self.rows_max,
            tables_per_relation: self.tables_per_relation,
            negative_fraction: self.negative_fraction,
        }
    }

    /// Sets the train share; validation gets the remainder.
    pub fn set_train_ratio(&mut self, train: f64) {
        self.split_ratios = (train, 1.0 - train);
    }
}
