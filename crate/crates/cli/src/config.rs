use std::path::PathBuf;

use anyhow::{bail, Result};
use beltrami_core::Grid;

/// Validated settings shared by the subcommands.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub tol: f64,
    pub boundary_tol: f64,
    pub max_iter: usize,
    pub probes: Option<PathBuf>,
    pub alpha: f64,
    pub rings: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            boundary_tol: 1e-2,
            max_iter: 500,
            probes: None,
            alpha: 1.0,
            rings: 12,
            seed: 1,
            out: None,
            report: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("tol", self.tol), ("boundary-tol", self.boundary_tol), ("alpha", self.alpha)] {
            if !(v.is_finite() && v > 0.0) {
                bail!("config: --{name} must be positive, got {v}");
            }
        }
        if self.max_iter == 0 {
            bail!("config: --max-iter must be at least 1");
        }
        if self.rings < 4 {
            bail!("config: --rings must be at least 4, got {}", self.rings);
        }
        Ok(())
    }

    /// The FFT plans expect `N` to be a power of two.
    pub fn check_grid(&self, grid: &Grid) -> Result<()> {
        if !grid.n().is_power_of_two() {
            bail!("config: grid size N = {} is not a power of two", grid.n());
        }
        Ok(())
    }
}
