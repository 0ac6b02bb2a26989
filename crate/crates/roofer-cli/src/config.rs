//! TOML configuration file with `[optimizer]`, `[noise]` and `[io]`
//! sections. Command-line flags override file values, which override the
//! built-in defaults.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use roofer::harness::NoiseModel;
use roofer::optimizer::OptimizerConfig;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub optimizer: OptimizerSection,
    #[serde(default)]
    pub noise: NoiseSection,
    #[serde(default)]
    pub io: IoSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerSection {
    pub beta: Option<f64>,
    pub memory_pairs: Option<usize>,
    pub max_iterations: Option<usize>,
    pub gradient_tolerance: Option<f64>,
    pub fd_step: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    pub rmse: Option<f64>,
    pub band_probs: Option<[f64; 3]>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IoSection {
    pub out_dir: Option<PathBuf>,
    pub srs_name: Option<String>,
    pub alpha_radius: Option<f64>,
    pub wall_height: Option<f64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<FileConfig, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        toml::from_str(&text).map_err(|e| format!("config {}: {e}", path.display()))
    }
}

/// Fully resolved run settings.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub optimizer: OptimizerConfig,
    pub noise: NoiseModel,
    pub out_dir: PathBuf,
    pub srs_name: Option<String>,
    pub alpha_radius: Option<f64>,
    pub wall_height: f64,
    pub seed: u64,
    pub jobs: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            optimizer: OptimizerConfig::default(),
            noise: NoiseModel::default(),
            out_dir: PathBuf::from("."),
            srs_name: None,
            alpha_radius: None,
            wall_height: 3.0,
            seed: 0,
            jobs: 1,
        }
    }
}

impl RunConfig {
    pub fn apply_file(&mut self, file: &FileConfig) {
        let o = &file.optimizer;
        if let Some(v) = o.beta {
            self.optimizer.beta = v;
        }
        if let Some(v) = o.memory_pairs {
            self.optimizer.memory_pairs = v;
        }
        if let Some(v) = o.max_iterations {
            self.optimizer.max_iterations = v;
        }
        if let Some(v) = o.gradient_tolerance {
            self.optimizer.gradient_tolerance = v;
        }
        if let Some(v) = o.fd_step {
            self.optimizer.fd_step = v;
        }
        if let Some(v) = file.noise.rmse {
            self.noise.rmse = v;
        }
        if let Some(v) = file.noise.band_probs {
            self.noise.band_probs = v;
        }
        if let Some(v) = &file.io.out_dir {
            self.out_dir = v.clone();
        }
        if let Some(v) = &file.io.srs_name {
            self.srs_name = Some(v.clone());
        }
        if let Some(v) = file.io.alpha_radius {
            self.alpha_radius = Some(v);
        }
        if let Some(v) = file.io.wall_height {
            self.wall_height = v;
        }
    }
}
