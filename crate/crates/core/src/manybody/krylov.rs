//! Lanczos propagation of exp(-i dt H) on the matrix-free ring operator.
//!
//! H is Hermitian with a real matrix in the occupation basis, so the Lanczos
//! recursion produces a real symmetric tridiagonal T_m; the step is
//! V_m · exp(-i dt T_m) e_1. One full reorthogonalization pass keeps the
//! basis clean at the subspace sizes used here (m ≲ 40).

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use thiserror::Error;

use super::operator::{HamiltonianBuilder, RingOperator};
use super::state::SymmetricState;

#[derive(Debug, Error)]
pub enum KrylovError {
    #[error("Krylov residual {achieved:e} above tolerance {tol:e} at dimension {dim}")]
    Residual { achieved: f64, tol: f64, dim: usize },
    #[error("time step must be positive and finite, got {0}")]
    BadStep(f64),
}

#[derive(Debug, Clone, Copy)]
pub struct KrylovOptions {
    pub dim: usize,
    pub tol: f64,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        KrylovOptions { dim: 20, tol: 1e-9 }
    }
}

fn axpy(y: &mut [Complex64], a: Complex64, x: &[Complex64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

fn dotc(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn nrm2(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// exp(-i dt H) v via a Lanczos subspace. Norm is preserved to the achieved
/// residual; errors out if the subspace did not converge.
pub fn expm_apply(
    op: &RingOperator,
    v: &[Complex64],
    dt: f64,
    opts: KrylovOptions,
) -> Result<Vec<Complex64>, KrylovError> {
    let n = v.len();
    let beta0 = nrm2(v);
    if beta0 == 0.0 {
        return Ok(v.to_vec());
    }
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(opts.dim + 1);
    basis.push(v.iter().map(|z| z / beta0).collect());
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut w = vec![Complex64::new(0.0, 0.0); n];
    let mut happy = false;

    for j in 0..opts.dim {
        op.apply(&basis[j], &mut w);
        let alpha = dotc(&basis[j], &w).re;
        alphas.push(alpha);
        let a = Complex64::new(-alpha, 0.0);
        axpy(&mut w, a, &basis[j]);
        if j > 0 {
            axpy(&mut w, Complex64::new(-betas[j - 1], 0.0), &basis[j - 1]);
        }
        // full reorthogonalization pass
        for b in &basis {
            let c = dotc(b, &w);
            axpy(&mut w, -c, b);
        }
        let beta = nrm2(&w);
        if beta < 1e-13 * beta0.max(1.0) {
            happy = true;
            break;
        }
        betas.push(beta);
        basis.push(w.iter().map(|z| z / beta).collect());
    }

    let m = alphas.len();
    // exp(-i dt T) e1 via dense eigendecomposition of the tridiagonal
    let mut t = DMatrix::<f64>::zeros(m, m);
    for j in 0..m {
        t[(j, j)] = alphas[j];
        if j + 1 < m {
            t[(j, j + 1)] = betas[j];
            t[(j + 1, j)] = betas[j];
        }
    }
    let eig = SymmetricEigen::new(t);
    let mut y = vec![Complex64::new(0.0, 0.0); m];
    for (k, lambda) in eig.eigenvalues.iter().enumerate() {
        let phase = Complex64::new(0.0, -dt * lambda).exp();
        let weight = eig.eigenvectors[(0, k)];
        for j in 0..m {
            y[j] += phase * weight * eig.eigenvectors[(j, k)];
        }
    }

    if !happy {
        // Saad's a-posteriori estimate: next off-diagonal times the last
        // component of the subspace solution
        let beta_m = betas.last().copied().unwrap_or(0.0);
        let achieved = beta_m * y[m - 1].norm() * dt.abs();
        if achieved > opts.tol {
            return Err(KrylovError::Residual {
                achieved,
                tol: opts.tol,
                dim: m,
            });
        }
    }

    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for (j, b) in basis.iter().take(m).enumerate() {
        axpy(&mut out, y[j] * beta0, b);
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct ManyBodySample {
    pub time: f64,
    pub state: SymmetricState,
}

/// Time stepping with the Hamiltonian frozen at the midpoint of each step
/// (exact for static traps, O(dt²) for ramped ones).
pub fn evolve_krylov(
    state: &SymmetricState,
    builder: &HamiltonianBuilder,
    total_time: f64,
    dt: f64,
    sample_stride: usize,
    opts: KrylovOptions,
) -> Result<Vec<ManyBodySample>, KrylovError> {
    if !dt.is_finite() || dt <= 0.0 {
        return Err(KrylovError::BadStep(dt));
    }
    let steps = (total_time / dt).round() as usize;
    let stride = sample_stride.max(1);
    let mut samples = vec![ManyBodySample {
        time: 0.0,
        state: state.clone(),
    }];
    let mut coeffs = state.coeffs().to_vec();
    for s in 0..steps {
        let t_mid = (s as f64 + 0.5) * dt;
        let op = builder.at(t_mid);
        coeffs = expm_apply(&op, &coeffs, dt, opts)?;
        if (s + 1) % stride == 0 || s + 1 == steps {
            samples.push(ManyBodySample {
                time: (s + 1) as f64 * dt,
                state: SymmetricState::new(builder.basis().clone(), coeffs.clone()),
            });
        }
    }
    Ok(samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manybody::basis::OccupationBasis;
    use crate::manybody::operator::{LatticeConfig, PairInteraction};
    use crate::meanfield::ExternalPotential;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn dense_expm_apply(op: &RingOperator, v: &[Complex64], dt: f64) -> Vec<Complex64> {
        let h = op.to_dense(200).unwrap();
        let eig = SymmetricEigen::new(h);
        let d = v.len();
        let vec = nalgebra::DVector::from_column_slice(v);
        let coords = eig.eigenvectors.adjoint() * vec;
        let mut out = nalgebra::DVector::from_element(d, Complex64::new(0.0, 0.0));
        for k in 0..d {
            let phase = Complex64::new(0.0, -dt * eig.eigenvalues[k]).exp();
            out += eig.eigenvectors.column(k) * (coords[k] * phase);
        }
        out.iter().cloned().collect()
    }

    #[test]
    fn zero_hamiltonian_leaves_state_unchanged() {
        // huge spacing kills the hopping scale relative to tolerance
        let lat = LatticeConfig { sites: 4, spacing: 1e6 };
        let basis = OccupationBasis::new(2, 4).unwrap();
        let builder = HamiltonianBuilder::new(
            basis.clone(),
            lat,
            &PairInteraction::None,
            ExternalPotential::None,
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let psi = SymmetricState::random(basis, &mut rng);
        let out = expm_apply(&builder.at(0.0), psi.coeffs(), 0.1, KrylovOptions::default()).unwrap();
        for (a, b) in out.iter().zip(psi.coeffs()) {
            assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn krylov_matches_dense_exponential() {
        let lat = LatticeConfig { sites: 4, spacing: 0.9 };
        let basis = OccupationBasis::new(3, 4).unwrap();
        let pair = PairInteraction::MeanFieldScaled {
            profile: vec![1.1, 0.3],
            particles: 3,
        };
        let builder = HamiltonianBuilder::new(
            basis.clone(),
            lat,
            &pair,
            ExternalPotential::StaticHarmonic { omega: 1.0 },
        )
        .unwrap();
        let op = builder.at(0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let psi = SymmetricState::random(basis, &mut rng);
        let dt = 0.05;
        let fast = expm_apply(&op, psi.coeffs(), dt, KrylovOptions::default()).unwrap();
        let slow = dense_expm_apply(&op, psi.coeffs(), dt);
        let mut err: f64 = 0.0;
        for (a, b) in fast.iter().zip(&slow) {
            err = err.max((a - b).norm());
        }
        assert!(err < 1e-9, "krylov vs dense: {err}");
    }

    #[test]
    fn norm_and_energy_conserved_along_trajectory() {
        let lat = LatticeConfig { sites: 5, spacing: 1.0 };
        let basis = OccupationBasis::new(3, 5).unwrap();
        let pair = PairInteraction::MeanFieldScaled {
            profile: vec![0.8, 0.2],
            particles: 3,
        };
        let builder = HamiltonianBuilder::new(
            basis.clone(),
            lat,
            &pair,
            ExternalPotential::StaticHarmonic { omega: 0.8 },
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let psi = SymmetricState::random(basis, &mut rng);
        let e0 = builder.at(0.0).energy_per_particle(&psi);
        let samples =
            evolve_krylov(&psi, &builder, 1.0, 1e-3, 200, KrylovOptions::default()).unwrap();
        for s in &samples {
            assert!((s.state.norm() - 1.0).abs() <= 1e-8);
            let e = builder.at(s.time).energy_per_particle(&s.state);
            assert!((e - e0).abs() <= 1e-8, "energy drift {}", (e - e0).abs());
        }
        // the evolved state is still exactly bosonic: its tensor image has
        // no antisymmetric admixture
        let last = &samples.last().unwrap().state;
        let tensor =
            crate::manybody::firstq::to_first_quantized(last, Default::default()).unwrap();
        assert!(tensor.symmetry_residual() <= 1e-10);
    }

    #[test]
    fn single_particle_matches_mean_field_evolution() {
        use crate::grid::Grid;
        use crate::meanfield::{strang_step, KineticKind, MeanFieldKind, Orbital};

        let m = 6;
        let h = 1.0;
        let lat = LatticeConfig { sites: m, spacing: h };
        let grid = Grid::new(m, m as f64 * h).unwrap();
        let trap = ExternalPotential::StaticHarmonic { omega: 1.0 };
        let phi0 = Orbital::new(
            grid.sample_real(|x| (-(x - 3.0) * (x - 3.0) / 1.5).exp()).normalized(),
            0.0,
        )
        .unwrap();
        // one boson in the occupation basis
        let site = crate::manybody::state::SiteOrbital::from_grid(&phi0.psi).unwrap();
        let psi0 = crate::manybody::state::product_state(&site, 1).unwrap();
        let builder =
            HamiltonianBuilder::new(psi0.basis().clone(), lat, &PairInteraction::None, trap)
                .unwrap();
        let t_end = 0.2;
        let samples =
            evolve_krylov(&psi0, &builder, t_end, 0.01, usize::MAX, KrylovOptions::default())
                .unwrap();
        let many = samples.last().unwrap();
        // split-step on the hopping symbol at a fine step
        let mut phi = phi0;
        for _ in 0..20000 {
            phi = strang_step(
                &phi,
                t_end / 20000.0,
                &MeanFieldKind::Free,
                &trap,
                KineticKind::LatticeHopping,
            )
            .unwrap();
        }
        let target = crate::manybody::state::SiteOrbital::from_grid(&phi.psi).unwrap();
        let basis = psi0.basis();
        let mut err: f64 = 0.0;
        for r in 0..basis.dim() {
            let occ = basis.occupation(r);
            let site_idx = occ.iter().position(|&c| c == 1).unwrap();
            err = err.max((many.state.coeffs()[r] - target.amplitudes()[site_idx]).norm());
        }
        assert!(err < 1e-8, "one-body backends disagree by {err}");
    }

    #[test]
    fn tight_tolerance_with_tiny_subspace_errors_out() {
        let lat = LatticeConfig { sites: 5, spacing: 0.3 };
        let basis = OccupationBasis::new(3, 5).unwrap();
        let builder = HamiltonianBuilder::new(
            basis.clone(),
            lat,
            &PairInteraction::None,
            ExternalPotential::None,
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let psi = SymmetricState::random(basis, &mut rng);
        let res = expm_apply(
            &builder.at(0.0),
            psi.coeffs(),
            0.5,
            KrylovOptions { dim: 3, tol: 1e-12 },
        );
        match res {
            Err(KrylovError::Residual { achieved, .. }) => assert!(achieved > 1e-12),
            other => panic!("expected residual error, got {other:?}"),
        }
    }
}
