//! Run configuration: defaults, then the config file, then command-line flags.

use std::path::{Path, PathBuf};

use agler_core::analysis::{DEFAULT_CLUSTER_TOL, DEFAULT_LADDER, DEFAULT_RANK_TOL};
use agler_core::agler::DEFAULT_SAMPLE_SEED;
use agler_core::hardy::DEFAULT_GRID;
use agler_core::shiftop::DEFAULT_DROP_TOL;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const CONFIG_ENV: &str = "AGLER_CONFIG";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub rank_tol: f64,
    pub psd_tol: f64,
    pub drop_tol: f64,
    pub cluster_tol: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub grid_n: usize,
    pub ladder: Vec<usize>,
    pub tolerances: Tolerances,
    pub seed: u64,
    pub output_path: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            grid_n: DEFAULT_GRID,
            ladder: DEFAULT_LADDER.to_vec(),
            tolerances: Tolerances {
                rank_tol: DEFAULT_RANK_TOL,
                psd_tol: 1e-7,
                drop_tol: DEFAULT_DROP_TOL,
                cluster_tol: DEFAULT_CLUSTER_TOL,
            },
            seed: DEFAULT_SAMPLE_SEED,
            output_path: None,
        }
    }
}

/// Config file contents; every field optional.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub grid_n: Option<usize>,
    pub ladder: Option<Vec<usize>>,
    #[serde(default)]
    pub tolerances: PartialTolerances,
    pub seed: Option<u64>,
    pub output_path: Option<PathBuf>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialTolerances {
    pub rank_tol: Option<f64>,
    pub psd_tol: Option<f64>,
    pub drop_tol: Option<f64>,
    pub cluster_tol: Option<f64>,
}

/// Values given on the command line.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub grid_n: Option<usize>,
    pub ladder: Option<Vec<usize>>,
    pub rank_tol: Option<f64>,
    pub seed: Option<u64>,
    pub output_path: Option<PathBuf>,
}

pub fn read_config_file(path: &Path) -> Result<ConfigFile, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e.to_string()))?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse(path.to_path_buf(), e.to_string()))
}

impl RunConfig {
    /// Defaults, overlaid by `file`, overlaid by `flags`.
    pub fn resolve(file: Option<&ConfigFile>, flags: &Overrides) -> Result<Self, CliError> {
        let mut cfg = RunConfig::default();
        if let Some(f) = file {
            if let Some(v) = f.grid_n {
                cfg.grid_n = v;
            }
            if let Some(v) = &f.ladder {
                cfg.ladder = v.clone();
            }
            let t = &f.tolerances;
            if let Some(v) = t.rank_tol {
                cfg.tolerances.rank_tol = v;
            }
            if let Some(v) = t.psd_tol {
                cfg.tolerances.psd_tol = v;
            }
            if let Some(v) = t.drop_tol {
                cfg.tolerances.drop_tol = v;
            }
            if let Some(v) = t.cluster_tol {
                cfg.tolerances.cluster_tol = v;
            }
            if let Some(v) = f.seed {
                cfg.seed = v;
            }
            if let Some(v) = &f.output_path {
                cfg.output_path = Some(v.clone());
            }
        }
        if let Some(v) = flags.grid_n {
            cfg.grid_n = v;
        }
        if let Some(v) = &flags.ladder {
            cfg.ladder = v.clone();
        }
        if let Some(v) = flags.rank_tol {
            cfg.tolerances.rank_tol = v;
        }
        if let Some(v) = flags.seed {
            cfg.seed = v;
        }
        if let Some(v) = &flags.output_path {
            cfg.output_path = Some(v.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.grid_n < 64 || !self.grid_n.is_power_of_two() {
            return Err(CliError::Config(format!("grid {} is not a power of two ≥ 64", self.grid_n)));
        }
        if self.ladder.len() < 3 || self.ladder.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CliError::Config(format!(
                "ladder {:?} must be strictly increasing with at least 3 rungs",
                self.ladder
            )));
        }
        let t = &self.tolerances;
        for (name, v) in [
            ("rank_tol", t.rank_tol),
            ("psd_tol", t.psd_tol),
            ("drop_tol", t.drop_tol),
            ("cluster_tol", t.cluster_tol),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(CliError::Config(format!("{name} = {v} is outside (0, 1)")));
            }
        }
        Ok(())
    }
}
