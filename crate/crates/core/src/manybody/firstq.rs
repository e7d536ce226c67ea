//! First-quantized dense-tensor backend.
//!
//! A state of N particles on M sites is a full M^N tensor, particle j being
//! digit j of the index (stride M^j). This is the oracle side of the house:
//! projectors onto distinguished coordinates, multiplication operators and
//! partial traces are written out literally, with no symmetry bookkeeping,
//! and everything is kept within a hard memory budget.

use num_complex::Complex64;
use thiserror::Error;

use super::basis::multinomial;
use super::state::{SiteOrbital, SymmetricState};

#[derive(Debug, Error)]
pub enum TensorError {
    #[error("tensor budget exceeded: N={0}, M={1} (caps N≤{2}, M≤{3})")]
    Budget(usize, usize, usize, usize),
}

/// Default caps keeping M^N at most 8^5.
#[derive(Debug, Clone, Copy)]
pub struct TensorBudget {
    pub max_particles: usize,
    pub max_sites: usize,
}

impl Default for TensorBudget {
    fn default() -> Self {
        TensorBudget {
            max_particles: 5,
            max_sites: 8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FirstQuantizedState {
    particles: usize,
    sites: usize,
    pub tensor: Vec<Complex64>,
}

impl FirstQuantizedState {
    pub fn zeros_like(&self) -> FirstQuantizedState {
        FirstQuantizedState {
            particles: self.particles,
            sites: self.sites,
            tensor: vec![Complex64::new(0.0, 0.0); self.tensor.len()],
        }
    }

    pub fn particles(&self) -> usize {
        self.particles
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn norm(&self) -> f64 {
        self.tensor.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn inner(&self, other: &FirstQuantizedState) -> Complex64 {
        self.tensor
            .iter()
            .zip(&other.tensor)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn axpy(&mut self, a: Complex64, x: &FirstQuantizedState) {
        for (yi, xi) in self.tensor.iter_mut().zip(&x.tensor) {
            *yi += a * xi;
        }
    }

    pub fn scale(&mut self, a: Complex64) {
        for z in self.tensor.iter_mut() {
            *z *= a;
        }
    }

    fn stride(&self, particle: usize) -> usize {
        self.sites.pow(particle as u32)
    }

    /// Site index of `particle` inside flattened index `idx`.
    fn digit(&self, idx: usize, particle: usize) -> usize {
        (idx / self.stride(particle)) % self.sites
    }

    /// Projector of `particle` onto the orbital: contract and re-emit.
    pub fn project_p(&self, particle: usize, orbital: &SiteOrbital) -> FirstQuantizedState {
        let u = orbital.amplitudes();
        let m = self.sites;
        let stride = self.stride(particle);
        let mut out = self.zeros_like();
        let block = stride * m;
        for base in (0..self.tensor.len()).step_by(block) {
            for low in 0..stride {
                let start = base + low;
                let mut acc = Complex64::new(0.0, 0.0);
                for x in 0..m {
                    acc += u[x].conj() * self.tensor[start + x * stride];
                }
                for x in 0..m {
                    out.tensor[start + x * stride] = u[x] * acc;
                }
            }
        }
        out
    }

    /// q = 1 - p on `particle`.
    pub fn project_q(&self, particle: usize, orbital: &SiteOrbital) -> FirstQuantizedState {
        let mut out = self.project_p(particle, orbital);
        for (o, s) in out.tensor.iter_mut().zip(&self.tensor) {
            *o = s - *o;
        }
        out
    }

    /// Multiplication by a one-body function w(x_particle).
    pub fn mul_one_body(&self, particle: usize, w: &[Complex64]) -> FirstQuantizedState {
        let mut out = self.clone();
        for (idx, z) in out.tensor.iter_mut().enumerate() {
            *z *= w[self.digit(idx, particle)];
        }
        out
    }

    /// Multiplication by a two-body table v(x_a, x_b).
    pub fn mul_two_body(
        &self,
        pa: usize,
        pb: usize,
        table: &[f64], // sites × sites, row-major
    ) -> FirstQuantizedState {
        let m = self.sites;
        let mut out = self.clone();
        for (idx, z) in out.tensor.iter_mut().enumerate() {
            let xa = self.digit(idx, pa);
            let xb = self.digit(idx, pb);
            *z *= table[xa * m + xb];
        }
        out
    }

    /// Applies a one-body operator (M×M matrix, row-major, acting on site
    /// amplitudes) to the given particle.
    pub fn apply_one_body_matrix(&self, particle: usize, op: &[Complex64]) -> FirstQuantizedState {
        let m = self.sites;
        let stride = self.stride(particle);
        let mut out = self.zeros_like();
        let block = stride * m;
        for base in (0..self.tensor.len()).step_by(block) {
            for low in 0..stride {
                let start = base + low;
                for x in 0..m {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for y in 0..m {
                        acc += op[x * m + y] * self.tensor[start + y * stride];
                    }
                    out.tensor[start + x * stride] = acc;
                }
            }
        }
        out
    }

    /// ‖Ψ - sym(Ψ)‖ where sym averages over all particle permutations.
    pub fn symmetry_residual(&self) -> f64 {
        let sym = self.symmetrized();
        let diff: f64 = self
            .tensor
            .iter()
            .zip(&sym.tensor)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        diff.sqrt()
    }

    /// Projection onto the symmetric subspace (average over permutations,
    /// computed through occupation classes).
    pub fn symmetrized(&self) -> FirstQuantizedState {
        let basis = super::basis::OccupationBasis::with_guard(self.particles, self.sites, u64::MAX)
            .expect("small by construction");
        let mut acc = vec![Complex64::new(0.0, 0.0); basis.dim()];
        let mut occ = vec![0u8; self.sites];
        for (idx, z) in self.tensor.iter().enumerate() {
            occupation_of(self, idx, &mut occ);
            acc[basis.rank(&occ)] += z;
        }
        let mut out = self.zeros_like();
        for (idx, z) in out.tensor.iter_mut().enumerate() {
            occupation_of(self, idx, &mut occ);
            let r = basis.rank(&occ);
            *z = acc[r] / multinomial(basis.occupation(r));
        }
        out
    }

    /// Reduced one-particle matrix in unit site coordinates, trace 1.
    pub fn one_particle_matrix(&self) -> Vec<Complex64> {
        let m = self.sites;
        let stride = 1; // particle 0
        let mut mat = vec![Complex64::new(0.0, 0.0); m * m];
        let block = m; // stride * m for particle 0
        for base in (0..self.tensor.len()).step_by(block) {
            for x in 0..m {
                let zx = self.tensor[base + x * stride];
                for y in 0..m {
                    // kernel convention: mat[x][y] multiplies amplitudes at y
                    mat[x * m + y] += zx * self.tensor[base + y * stride].conj();
                }
            }
        }
        mat
    }
}

fn occupation_of(state: &FirstQuantizedState, idx: usize, occ: &mut [u8]) {
    for o in occ.iter_mut() {
        *o = 0;
    }
    let mut rest = idx;
    for _ in 0..state.particles {
        occ[rest % state.sites] += 1;
        rest /= state.sites;
    }
}

fn check_budget(n: usize, m: usize, budget: TensorBudget) -> Result<(), TensorError> {
    if n > budget.max_particles || m > budget.max_sites {
        return Err(TensorError::Budget(
            n,
            m,
            budget.max_particles,
            budget.max_sites,
        ));
    }
    Ok(())
}

/// Occupation-basis state to full tensor.
pub fn to_first_quantized(
    state: &SymmetricState,
    budget: TensorBudget,
) -> Result<FirstQuantizedState, TensorError> {
    let n = state.particles();
    let m = state.sites();
    check_budget(n, m, budget)?;
    let basis = state.basis();
    let mut out = FirstQuantizedState {
        particles: n,
        sites: m,
        tensor: vec![Complex64::new(0.0, 0.0); m.pow(n as u32)],
    };
    let mut occ = vec![0u8; m];
    for idx in 0..out.tensor.len() {
        occupation_of(&out, idx, &mut occ);
        let r = basis.rank(&occ);
        out.tensor[idx] = state.coeffs()[r] / multinomial(&occ).sqrt();
    }
    Ok(out)
}

/// Tensor back to occupation coefficients (projects onto the symmetric
/// sector; exact on symmetric input).
pub fn from_first_quantized(
    state: &FirstQuantizedState,
    budget: TensorBudget,
) -> Result<SymmetricState, TensorError> {
    check_budget(state.particles, state.sites, budget)?;
    let basis = super::basis::OccupationBasis::with_guard(state.particles, state.sites, u64::MAX)
        .expect("within budget");
    let mut acc = vec![Complex64::new(0.0, 0.0); basis.dim()];
    let mut occ = vec![0u8; state.sites];
    for (idx, z) in state.tensor.iter().enumerate() {
        occupation_of(state, idx, &mut occ);
        acc[basis.rank(&occ)] += z;
    }
    let coeffs = acc
        .iter()
        .enumerate()
        .map(|(r, z)| z / multinomial(basis.occupation(r)).sqrt())
        .collect();
    Ok(SymmetricState::new(basis, coeffs))
}
