//! On-disk configuration: one TOML file with a section per subcommand.

use serde::{Deserialize, Serialize};

use condensate_core::experiments::{InteractionSpec, LatticeSpec, Phi0Preset, Regime, SweepConfig};
use condensate_core::meanfield::{ExternalPotential, KineticKind};
use condensate_core::scattering::RadialPotential;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case")]
pub enum PotentialSpec {
    Barrier { height: f64, radius: f64 },
    Well { depth: f64, radius: f64 },
    Zero,
}

impl PotentialSpec {
    pub fn build(&self) -> RadialPotential {
        match *self {
            PotentialSpec::Barrier { height, radius } => RadialPotential::barrier(height, radius),
            PotentialSpec::Well { depth, radius } => RadialPotential::well(depth, radius),
            PotentialSpec::Zero => RadialPotential::zero(),
        }
    }
}

fn default_big_r() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScatterConfig {
    pub potential: PotentialSpec,
    pub n_list: Vec<f64>,
    pub beta1: Vec<f64>,
    pub beta2: Vec<f64>,
    #[serde(default = "default_big_r")]
    pub big_r: f64,
}

impl Default for ScatterConfig {
    fn default() -> Self {
        ScatterConfig {
            potential: PotentialSpec::Barrier {
                height: 1.0,
                radius: 1.0,
            },
            n_list: vec![100.0, 1000.0, 10000.0],
            beta1: vec![0.25, 2.0 / 7.0],
            beta2: vec![0.5, 1.0],
            big_r: 1.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum KindSpec {
    Free,
    Hartree { profile: Vec<f64> },
    Gp { coupling: f64 },
}

fn default_stride() -> usize {
    10
}

fn default_kinetic() -> KineticKind {
    KineticKind::Spectral
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeanFieldRunConfig {
    pub points: usize,
    pub length: f64,
    pub kind: KindSpec,
    pub trap: ExternalPotential,
    pub phi0: Phi0Preset,
    pub total_time: f64,
    pub dt: f64,
    #[serde(default = "default_stride")]
    pub sample_stride: usize,
    #[serde(default = "default_kinetic")]
    pub kinetic: KineticKind,
}

impl Default for MeanFieldRunConfig {
    fn default() -> Self {
        MeanFieldRunConfig {
            points: 64,
            length: 12.0,
            kind: KindSpec::Gp { coupling: 1.0 },
            trap: ExternalPotential::StaticHarmonic { omega: 1.0 },
            phi0: Phi0Preset::Gaussian { width: 0.8 },
            total_time: 1.0,
            dt: 1e-3,
            sample_stride: 10,
            kinetic: KineticKind::Spectral,
        }
    }
}

fn default_identity_dims() -> Vec<[usize; 2]> {
    let mut dims = Vec::new();
    for n in 2..=4 {
        for m in 3..=5 {
            dims.push([n, m]);
        }
    }
    dims
}

fn default_trials() -> usize {
    20
}

fn default_ineq_trials() -> usize {
    500
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChecksConfig {
    #[serde(default = "default_identity_dims")]
    pub dims: Vec<[usize; 2]>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_ineq_trials")]
    pub inequality_trials: usize,
}

impl Default for ChecksConfig {
    fn default() -> Self {
        ChecksConfig {
            dims: default_identity_dims(),
            trials: default_trials(),
            inequality_trials: default_ineq_trials(),
        }
    }
}

pub fn default_sweep() -> SweepConfig {
    SweepConfig {
        regime: Regime::Hartree,
        n_list: vec![2, 4, 6, 8],
        lattice: LatticeSpec {
            sites: 8,
            spacing: 1.0,
        },
        interaction: InteractionSpec {
            profile: vec![1.0, 0.5],
            lambda: 1.0,
            beta: 0.5,
        },
        trap: ExternalPotential::StaticHarmonic { omega: 1.0 },
        phi0: Phi0Preset::Gaussian { width: 1.0 },
        total_time: 1.0,
        dt: 0.01,
        sample_stride: 10,
        krylov_dim: 20,
        envelope_c: 1.0,
        envelope_gamma: 0.1,
        delta: 0.1,
        seed: 0,
    }
}

/// Top-level file schema; absent sections fall back to defaults.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct FileConfig {
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub scatter: Option<ScatterConfig>,
    #[serde(default)]
    pub meanfield: Option<MeanFieldRunConfig>,
    #[serde(default)]
    pub checks: Option<ChecksConfig>,
}
