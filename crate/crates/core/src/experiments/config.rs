//! Configuration schema for the sweep driver (TOML on disk).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{Grid, GridFunction};
use crate::meanfield::ExternalPotential;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("n_list must be non-empty and ascending")]
    BadNList,
    #[error("lattice needs at least 4 sites, got {0}")]
    LatticeTooSmall(usize),
    #[error("interaction profile must fit in half the ring")]
    ProfileTooWide,
    #[error("time step and horizon must be positive with dt <= T")]
    BadTimes,
    #[error(transparent)]
    Grid(#[from] crate::grid::GridError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Hartree,
    /// on-site contact proxy; qualitative on a fixed lattice
    GpProxy,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub sites: usize,
    pub spacing: f64,
}

/// Interaction data: `profile` is the ring pair potential by site distance
/// (used by the Hartree regime, scaled 1/N with the relative-coordinate ½
/// on the pair term); `lambda`/`beta` drive the on-site proxy.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InteractionSpec {
    #[serde(default)]
    pub profile: Vec<f64>,
    #[serde(default = "one")]
    pub lambda: f64,
    #[serde(default = "half")]
    pub beta: f64,
}

fn one() -> f64 {
    1.0
}

fn half() -> f64 {
    0.5
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case")]
pub enum Phi0Preset {
    Flat,
    Gaussian { width: f64 },
}

impl Phi0Preset {
    pub fn build(&self, grid: Grid) -> GridFunction {
        match *self {
            Phi0Preset::Flat => {
                let c = 1.0 / grid.length().sqrt();
                grid.sample_real(|_| c)
            }
            Phi0Preset::Gaussian { width } => {
                let x0 = 0.5 * grid.length();
                grid.sample_real(|x| (-(x - x0) * (x - x0) / (4.0 * width * width)).exp())
                    .normalized()
            }
        }
    }
}

fn default_stride() -> usize {
    10
}

fn default_krylov() -> usize {
    20
}

fn default_c() -> f64 {
    1.0
}

fn default_gamma() -> f64 {
    0.1
}

fn default_delta() -> f64 {
    0.1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepConfig {
    pub regime: Regime,
    pub n_list: Vec<usize>,
    pub lattice: LatticeSpec,
    pub interaction: InteractionSpec,
    pub trap: ExternalPotential,
    pub phi0: Phi0Preset,
    pub total_time: f64,
    pub dt: f64,
    #[serde(default = "default_stride")]
    pub sample_stride: usize,
    #[serde(default = "default_krylov")]
    pub krylov_dim: usize,
    #[serde(default = "default_c")]
    pub envelope_c: f64,
    #[serde(default = "default_gamma")]
    pub envelope_gamma: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default)]
    pub seed: u64,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n_list.is_empty() || self.n_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ConfigError::BadNList);
        }
        if self.lattice.sites < 4 {
            return Err(ConfigError::LatticeTooSmall(self.lattice.sites));
        }
        if 2 * self.interaction.profile.len().saturating_sub(1) >= self.lattice.sites {
            return Err(ConfigError::ProfileTooWide);
        }
        if !(self.dt > 0.0 && self.total_time > 0.0 && self.dt <= self.total_time) {
            return Err(ConfigError::BadTimes);
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid, ConfigError> {
        Ok(Grid::new(
            self.lattice.sites,
            self.lattice.sites as f64 * self.lattice.spacing,
        )?)
    }

    /// Ring kernel of the Hartree convolution as a grid function.
    pub fn hartree_kernel(&self, grid: Grid) -> GridFunction {
        let m = self.lattice.sites;
        let prof = &self.interaction.profile;
        let values = (0..m)
            .map(|i| {
                let d = i.min(m - i);
                num_complex::Complex64::new(prof.get(d).copied().unwrap_or(0.0), 0.0)
            })
            .collect();
        GridFunction::new(grid, values).expect("length matches")
    }
}
