//! Matrix-free N-boson Hamiltonian on a periodic M-site lattice:
//!
//!   H(t) = Σ_j (-Δ_j) + 2 Σ_{j<k} v_eff(x_j - x_k) + Σ_j A_t(x_j)
//!
//! with the second-difference kinetic term (diagonal `2/h²` per particle,
//! hopping `-1/h²`). The interaction enters as an ordered double sum over
//! distinct particles, which is why the builder doubles the unordered pair
//! sum; `v_eff` is the scaled pair profile described by [`PairInteraction`].

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

use super::basis::{BasisError, OccupationBasis};
use super::state::SymmetricState;
use crate::meanfield::ExternalPotential;

#[derive(Debug, Error)]
pub enum OperatorError {
    #[error(transparent)]
    Basis(#[from] BasisError),
    #[error("pair support of {0} sites exceeds half the ring ({1} sites)")]
    SupportTooWide(usize, usize),
    #[error("dense form requested for dimension {0} (cap {1})")]
    DenseTooLarge(usize, usize),
}

#[derive(Debug, Clone, Copy)]
pub struct LatticeConfig {
    pub sites: usize,
    pub spacing: f64,
}

impl LatticeConfig {
    pub fn length(&self) -> f64 {
        self.sites as f64 * self.spacing
    }

    pub fn coord(&self, x: usize) -> f64 {
        x as f64 * self.spacing
    }

    /// Minimal periodic site distance.
    pub fn ring_distance(&self, x: usize, y: usize) -> usize {
        let d = x.abs_diff(y);
        d.min(self.sites - d)
    }
}

/// Scaled two-body interaction on the ring.
#[derive(Debug, Clone)]
pub enum PairInteraction {
    None,
    /// v_eff(d) = profile[d] / N — the mean-field scaling where the total
    /// interaction energy per particle stays O(1).
    MeanFieldScaled { profile: Vec<f64>, particles: usize },
    /// On-site contact proxy v_eff = λ N^(β-1) δ_{d,0} / h for the
    /// short-range regimes; qualitative on a fixed lattice.
    OnSiteProxy {
        lambda: f64,
        beta: f64,
        particles: usize,
    },
}

impl PairInteraction {
    /// Effective pair value at site distance `d` (in sites).
    pub fn value(&self, d: usize, lat: &LatticeConfig) -> f64 {
        match self {
            PairInteraction::None => 0.0,
            PairInteraction::MeanFieldScaled { profile, particles } => {
                if d < profile.len() {
                    profile[d] / *particles as f64
                } else {
                    0.0
                }
            }
            PairInteraction::OnSiteProxy {
                lambda,
                beta,
                particles,
            } => {
                if d == 0 {
                    lambda * (*particles as f64).powf(beta - 1.0) / lat.spacing
                } else {
                    0.0
                }
            }
        }
    }

    fn support_sites(&self) -> usize {
        match self {
            PairInteraction::None => 0,
            PairInteraction::MeanFieldScaled { profile, .. } => profile.len().saturating_sub(1),
            PairInteraction::OnSiteProxy { .. } => 0,
        }
    }
}

/// Time-independent parts of H, ready to be frozen at any time.
pub struct HamiltonianBuilder {
    basis: Arc<OccupationBasis>,
    lat: LatticeConfig,
    trap: ExternalPotential,
    /// kinetic diagonal + ordered-pair interaction, per basis state
    static_diag: Arc<Vec<f64>>,
}

impl HamiltonianBuilder {
    pub fn new(
        basis: Arc<OccupationBasis>,
        lat: LatticeConfig,
        pair: &PairInteraction,
        trap: ExternalPotential,
    ) -> Result<Self, OperatorError> {
        if 2 * pair.support_sites() >= lat.sites {
            return Err(OperatorError::SupportTooWide(
                pair.support_sites(),
                lat.sites,
            ));
        }
        let m = lat.sites;
        // pairwise table including the min-image wrap
        let mut vtab = vec![0.0f64; m * m];
        for x in 0..m {
            for y in 0..m {
                vtab[x * m + y] = pair.value(lat.ring_distance(x, y), &lat);
            }
        }
        let hop = 1.0 / (lat.spacing * lat.spacing);
        let n = basis.particles() as f64;
        let mut static_diag = Vec::with_capacity(basis.dim());
        for r in 0..basis.dim() {
            let occ = basis.occupation(r);
            // Σ_{j≠k} v_eff(x_j-x_k) over ordered pairs of distinct particles
            let mut inter = 0.0;
            for x in 0..m {
                let nx = occ[x] as f64;
                if nx == 0.0 {
                    continue;
                }
                for y in 0..m {
                    let ny = occ[y] as f64;
                    if ny == 0.0 {
                        continue;
                    }
                    let pairs = if x == y { nx * (nx - 1.0) } else { nx * ny };
                    inter += vtab[x * m + y] * pairs;
                }
            }
            static_diag.push(2.0 * hop * n + inter);
        }
        Ok(HamiltonianBuilder {
            basis,
            lat,
            trap,
            static_diag: Arc::new(static_diag),
        })
    }

    pub fn basis(&self) -> &Arc<OccupationBasis> {
        &self.basis
    }

    pub fn lattice(&self) -> LatticeConfig {
        self.lat
    }

    /// H frozen at time `t`.
    pub fn at(&self, t: f64) -> RingOperator {
        let m = self.lat.sites;
        let l = self.lat.length();
        let site_pot: Vec<f64> = (0..m)
            .map(|x| self.trap.eval_at(l, self.lat.coord(x), t))
            .collect();
        RingOperator {
            basis: self.basis.clone(),
            hop: 1.0 / (self.lat.spacing * self.lat.spacing),
            static_diag: self.static_diag.clone(),
            site_pot,
        }
    }
}

/// H(t) as a matrix-free Hermitian operator on the occupation basis.
pub struct RingOperator {
    basis: Arc<OccupationBasis>,
    hop: f64,
    static_diag: Arc<Vec<f64>>,
    site_pot: Vec<f64>,
}

impl RingOperator {
    pub fn basis(&self) -> &Arc<OccupationBasis> {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn apply(&self, input: &[Complex64], out: &mut [Complex64]) {
        let m = self.basis.sites();
        let mut occ_buf = vec![0u8; m];
        for z in out.iter_mut() {
            *z = Complex64::new(0.0, 0.0);
        }
        for r in 0..self.basis.dim() {
            let amp = input[r];
            if amp == Complex64::new(0.0, 0.0) {
                continue;
            }
            let occ = self.basis.occupation(r);
            let mut diag = self.static_diag[r];
            for x in 0..m {
                diag += self.site_pot[x] * occ[x] as f64;
            }
            out[r] += diag * amp;
            // hopping: -1/h² (a†_y a_x + h.c.) over nearest neighbours
            for x in 0..m {
                let nx = occ[x];
                if nx == 0 {
                    continue;
                }
                for dir in [1usize, m - 1] {
                    let y = (x + dir) % m;
                    occ_buf.copy_from_slice(occ);
                    occ_buf[x] -= 1;
                    occ_buf[y] += 1;
                    let target = self.basis.rank(&occ_buf);
                    let w = (nx as f64 * (occ[y] as f64 + 1.0)).sqrt();
                    out[target] -= self.hop * w * amp;
                }
            }
        }
    }

    pub fn apply_state(&self, state: &SymmetricState) -> SymmetricState {
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim()];
        self.apply(state.coeffs(), &mut out);
        SymmetricState::new(self.basis.clone(), out)
    }

    /// ⟨Ψ, H Ψ⟩ / N.
    pub fn energy_per_particle(&self, state: &SymmetricState) -> f64 {
        let h_psi = self.apply_state(state);
        state.inner(&h_psi).re / self.basis.particles() as f64
    }

    /// Dense matrix, for small-dimension oracles.
    pub fn to_dense(&self, cap: usize) -> Result<DMatrix<Complex64>, OperatorError> {
        let d = self.dim();
        if d > cap {
            return Err(OperatorError::DenseTooLarge(d, cap));
        }
        let mut mat = DMatrix::zeros(d, d);
        let mut unit = vec![Complex64::new(0.0, 0.0); d];
        let mut col = vec![Complex64::new(0.0, 0.0); d];
        for j in 0..d {
            unit[j] = Complex64::new(1.0, 0.0);
            self.apply(&unit, &mut col);
            for i in 0..d {
                mat[(i, j)] = col[i];
            }
            unit[j] = Complex64::new(0.0, 0.0);
        }
        Ok(mat)
    }
}
