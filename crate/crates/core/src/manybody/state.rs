//! Symmetric N-boson states and the single-site orbital they are built from.

use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;

use super::basis::{multinomial, BasisError, OccupationBasis};
use crate::grid::GridFunction;

#[derive(Debug, thiserror::Error)]
pub enum StateError {
    #[error(transparent)]
    Basis(#[from] BasisError),
    #[error("orbital is not normalized: l2 = {0}")]
    OrbitalNotNormalized(f64),
    #[error("orbital has {0} sites, state has {1}")]
    SiteMismatch(usize, usize),
}

/// One-body lattice orbital stored as a unit vector of site amplitudes
/// (the h-weight of the lattice inner product is already absorbed, i.e.
/// amplitude(x) = sqrt(h) · φ(x)).
#[derive(Debug, Clone)]
pub struct SiteOrbital {
    amps: Vec<Complex64>,
}

impl SiteOrbital {
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self, StateError> {
        let n: f64 = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (n - 1.0).abs() > 1e-9 {
            return Err(StateError::OrbitalNotNormalized(n));
        }
        Ok(SiteOrbital { amps })
    }

    /// From an h-normalized grid function (‖φ‖_h = 1).
    pub fn from_grid(phi: &GridFunction) -> Result<Self, StateError> {
        let h = phi.grid().spacing().sqrt();
        Self::from_amplitudes(phi.values().iter().map(|z| z * h).collect())
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn sites(&self) -> usize {
        self.amps.len()
    }
}

/// N-boson wave function in the occupation basis; unit l2 coefficients.
#[derive(Debug, Clone)]
pub struct SymmetricState {
    pub(crate) basis: Arc<OccupationBasis>,
    pub(crate) coeffs: Vec<Complex64>,
}

impl SymmetricState {
    pub fn new(basis: Arc<OccupationBasis>, coeffs: Vec<Complex64>) -> Self {
        assert_eq!(coeffs.len(), basis.dim());
        SymmetricState { basis, coeffs }
    }

    pub fn basis(&self) -> &Arc<OccupationBasis> {
        &self.basis
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn particles(&self) -> usize {
        self.basis.particles()
    }

    pub fn sites(&self) -> usize {
        self.basis.sites()
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn inner(&self, other: &SymmetricState) -> Complex64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn normalized(&self) -> SymmetricState {
        let n = self.norm();
        SymmetricState {
            basis: self.basis.clone(),
            coeffs: self.coeffs.iter().map(|z| z / n).collect(),
        }
    }

    /// Gaussian random state, unit norm. Deterministic under a seeded rng.
    pub fn random<R: Rng>(basis: Arc<OccupationBasis>, rng: &mut R) -> SymmetricState {
        let coeffs = (0..basis.dim())
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        SymmetricState { basis, coeffs }.normalized()
    }

    /// Cyclic lattice translation: occupation (n_1..n_M) -> (n_M, n_1, ..).
    pub fn translate(&self) -> SymmetricState {
        let m = self.sites();
        let mut out = vec![Complex64::new(0.0, 0.0); self.coeffs.len()];
        let mut shifted = vec![0u8; m];
        for r in 0..self.basis.dim() {
            let occ = self.basis.occupation(r);
            for x in 0..m {
                shifted[(x + 1) % m] = occ[x];
            }
            out[self.basis.rank(&shifted)] = self.coeffs[r];
        }
        SymmetricState {
            basis: self.basis.clone(),
            coeffs: out,
        }
    }
}

/// Condensate initial data: coefficients of φ^{⊗N} in the occupation basis,
/// coeff(n) = sqrt(N!/Π n_i!) · Π amp_i^{n_i}.
pub fn product_state(phi: &SiteOrbital, particles: usize) -> Result<SymmetricState, StateError> {
    let basis = OccupationBasis::new(particles, phi.sites())?;
    let coeffs = (0..basis.dim())
        .map(|r| {
            let occ = basis.occupation(r);
            let mut z = Complex64::new(multinomial(occ).sqrt(), 0.0);
            for (x, &c) in occ.iter().enumerate() {
                for _ in 0..c {
                    z *= phi.amps[x];
                }
            }
            z
        })
        .collect();
    Ok(SymmetricState { basis, coeffs })
}
