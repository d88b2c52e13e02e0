use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sn_core::solver::{HartreeConfig, ShootingConfig};

use crate::error::CliError;

/// Everything a run can be configured with. Loaded from `--config` when
/// given, then overridden by flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub out: PathBuf,
    pub jobs: usize,
    pub shooting: ShootingConfig,
    /// Its `shooting` member is ignored; the top-level one is used.
    pub hartree: HartreeConfig,
    /// Extra couplings for a sweep; empty means the single `hartree.zeta`.
    pub zetas: Vec<f64>,
    pub fit_window: Option<(f64, f64)>,
    pub measured_norm: Option<f64>,
    pub plot_r_max: f64,
    pub svg: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            out: PathBuf::from("out"),
            jobs: 1,
            shooting: ShootingConfig::default(),
            hartree: HartreeConfig::default(),
            zetas: Vec::new(),
            fit_window: None,
            measured_norm: None,
            plot_r_max: 40.0,
            svg: false,
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = fs::read_to_string(p)
                    .map_err(|e| CliError::Missing(format!("{}: {e}", p.display())))?;
                serde_json::from_str(&text)
                    .map_err(|e| CliError::Usage(format!("config {}: {e}", p.display())))
            }
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.jobs == 0 {
            return Err(CliError::Usage("jobs must be at least 1".into()));
        }
        if self.plot_r_max.is_nan() || self.plot_r_max <= 0.0 {
            return Err(CliError::Usage("plot_r_max must be positive".into()));
        }
        if let Some((a, b)) = self.fit_window {
            if !(0.0 < a && a < b) {
                return Err(CliError::Usage(format!(
                    "fit window [{a}, {b}] must satisfy 0 < r1 < r2"
                )));
            }
        }
        self.shooting.validate()?;
        Ok(())
    }

    pub fn hartree_config(&self) -> HartreeConfig {
        HartreeConfig {
            shooting: self.shooting,
            ..self.hartree
        }
    }
}
