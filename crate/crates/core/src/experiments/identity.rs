//! Convergence study of the derivative identity of the counting functional:
//! along the coupled (exact state, mean-field orbital) flow, the centered
//! difference of α must converge at second order to 2·a1 + 4·a2.
//!
//! The state is stepped with a dense eigendecomposition of the static
//! Hamiltonian (exact up to roundoff), the orbital with a fine split-step
//! run on the lattice symbol, so the only O(dt²) error left is the stencil.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

use super::config::SweepConfig;
use super::convergence::{regime_kind, regime_pair, RunError};
use crate::counting::oracle::{alpha_commutator_oracle, alpha_derivative_terms};
use crate::counting::ModeDecomposition;
use crate::manybody::{
    product_state, to_first_quantized, HamiltonianBuilder, LatticeConfig, SiteOrbital,
    SymmetricState, TensorBudget,
};
use crate::meanfield::{mean_field_potential, strang_step, KineticKind, Orbital};

#[derive(Debug, Clone, Serialize)]
pub struct IdentityConvergenceRow {
    pub dt: f64,
    pub max_defect: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityConvergenceReport {
    pub particles: usize,
    pub sites: usize,
    pub rows: Vec<IdentityConvergenceRow>,
    /// log2(e(2dt)/e(dt)) between consecutive rows
    pub orders: Vec<f64>,
}

struct ExactPropagator {
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<Complex64>,
}

impl ExactPropagator {
    fn new(builder: &HamiltonianBuilder) -> Self {
        let dense = builder
            .at(0.0)
            .to_dense(usize::MAX)
            .expect("uncapped dense build");
        let eig = SymmetricEigen::new(dense);
        ExactPropagator {
            eigenvalues: eig.eigenvalues.iter().cloned().collect(),
            eigenvectors: eig.eigenvectors,
        }
    }

    fn advance(&self, coeffs: &[Complex64], dt: f64) -> Vec<Complex64> {
        let v = DVector::from_column_slice(coeffs);
        let modes = self.eigenvectors.adjoint() * v;
        let mut out = DVector::from_element(coeffs.len(), Complex64::new(0.0, 0.0));
        for (k, lambda) in self.eigenvalues.iter().enumerate() {
            let phase = Complex64::new(0.0, -dt * lambda).exp();
            out += self.eigenvectors.column(k) * (modes[k] * phase);
        }
        out.iter().cloned().collect()
    }
}

/// ⟨Ψ, n̂ Ψ⟩ at matched (state, orbital).
fn alpha_of(state: &SymmetricState, orbital: &SiteOrbital) -> Result<f64, RunError> {
    Ok(ModeDecomposition::new(state, orbital)?
        .weights()
        .moment(1.0)
        .expect("gamma > 0"))
}

/// Site-pair table of the regime interaction.
fn pair_table(cfg: &SweepConfig, n: usize) -> Vec<f64> {
    let lat = LatticeConfig {
        sites: cfg.lattice.sites,
        spacing: cfg.lattice.spacing,
    };
    let pair = regime_pair(cfg, n);
    let m = lat.sites;
    let mut t = vec![0.0; m * m];
    for x in 0..m {
        for y in 0..m {
            t[x * m + y] = pair.value(lat.ring_distance(x, y), &lat);
        }
    }
    t
}

/// Tabulates max_t |Δα/Δt - (2a1+4a2)| for each dt and the empirical order
/// between consecutive halvings. Requires a static trap (the propagator is
/// frozen once).
pub fn derivative_identity_report(
    cfg: &SweepConfig,
    n: usize,
    dt_list: &[f64],
) -> Result<IdentityConvergenceReport, RunError> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let lat = LatticeConfig {
        sites: cfg.lattice.sites,
        spacing: cfg.lattice.spacing,
    };
    let kind = regime_kind(cfg, n)?;
    let pair = regime_pair(cfg, n);
    let vtab = pair_table(cfg, n);

    let phi0 = Orbital::new(cfg.phi0.build(grid), 0.0)?;
    let psi0 = product_state(&SiteOrbital::from_grid(&phi0.psi)?, n)?;
    let builder = HamiltonianBuilder::new(psi0.basis().clone(), lat, &pair, cfg.trap)?;
    let prop = ExactPropagator::new(&builder);

    // evaluation times and stencil offsets all live on the fine grid
    let dt_fine = 1e-5;
    let eval_times: Vec<f64> = (1..=5).map(|j| j as f64 * cfg.total_time / 5.0).collect();
    let mut needed: Vec<f64> = Vec::new();
    for &t in &eval_times {
        needed.push(t);
        for &dt in dt_list {
            needed.push(t - dt);
            needed.push(t + dt);
        }
    }
    needed.sort_by(f64::total_cmp);
    needed.dedup_by(|a, b| (*a - *b).abs() < 0.5 * dt_fine);

    // orbital snapshots from one fine split-step sweep
    let mut phi_at: Vec<(f64, Orbital)> = Vec::with_capacity(needed.len());
    {
        let mut cur = phi0.clone();
        let mut step = 0usize;
        for &t in &needed {
            let target = (t / dt_fine).round() as usize;
            while step < target {
                cur = strang_step(&cur, dt_fine, &kind, &cfg.trap, KineticKind::LatticeHopping)?;
                step += 1;
            }
            phi_at.push((t, cur.clone()));
        }
    }
    let lookup_phi = |t: f64| -> &Orbital {
        let idx = phi_at
            .iter()
            .position(|(s, _)| (s - t).abs() < 0.5 * dt_fine)
            .expect("snapshot exists");
        &phi_at[idx].1
    };

    let alpha_at = |t: f64| -> Result<f64, RunError> {
        let coeffs = prop.advance(psi0.coeffs(), t);
        let state = SymmetricState::new(psi0.basis().clone(), coeffs);
        let orb = SiteOrbital::from_grid(&lookup_phi(t).psi)?;
        alpha_of(&state, &orb)
    };

    let mut rows = Vec::new();
    for &dt in dt_list {
        let mut worst: f64 = 0.0;
        for &t in &eval_times {
            let phi_t = lookup_phi(t);
            let orb = SiteOrbital::from_grid(&phi_t.psi)?;
            let coeffs = prop.advance(psi0.coeffs(), t);
            let state = SymmetricState::new(psi0.basis().clone(), coeffs);
            let tensor = to_first_quantized(&state, TensorBudget::default())
                .expect("within tensor budget");
            let v_phi_fn = mean_field_potential(&kind, phi_t);
            let v_phi: Vec<f64> = v_phi_fn.values().iter().map(|z| z.re).collect();
            let terms = alpha_derivative_terms(&tensor, &orb, &vtab, &v_phi);
            let rhs = 2.0 * terms.a1 + 4.0 * terms.a2;
            let stencil = (alpha_at(t + dt)? - alpha_at(t - dt)?) / (2.0 * dt);
            worst = worst.max((stencil - rhs).abs());
        }
        rows.push(IdentityConvergenceRow {
            dt,
            max_defect: worst,
        });
    }
    let mut orders = Vec::new();
    for w in rows.windows(2) {
        orders.push((w[0].max_defect / w[1].max_defect).log2() / (w[0].dt / w[1].dt).log2());
    }
    Ok(IdentityConvergenceReport {
        particles: n,
        sites: cfg.lattice.sites,
        rows,
        orders,
    })
}

/// Algebraic cross-check at a single state: 2a1+4a2 against the direct
/// commutator evaluation, both on the tensor backend.
pub fn commutator_crosscheck(
    cfg: &SweepConfig,
    n: usize,
    state: &SymmetricState,
    phi: &Orbital,
) -> Result<(f64, f64), RunError> {
    let kind = regime_kind(cfg, n)?;
    let vtab = pair_table(cfg, n);
    let orb = SiteOrbital::from_grid(&phi.psi)?;
    let tensor = to_first_quantized(state, TensorBudget::default()).expect("within budget");
    let v_phi_fn = mean_field_potential(&kind, phi);
    let v_phi: Vec<f64> = v_phi_fn.values().iter().map(|z| z.re).collect();
    let terms = alpha_derivative_terms(&tensor, &orb, &vtab, &v_phi);
    let oracle = alpha_commutator_oracle(&tensor, &orb, &vtab, &v_phi);
    Ok((2.0 * terms.a1 + 4.0 * terms.a2, oracle))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::config::{
        InteractionSpec, LatticeSpec, Phi0Preset, Regime, SweepConfig,
    };
    use crate::meanfield::ExternalPotential;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn identity_config(sites: usize) -> SweepConfig {
        SweepConfig {
            regime: Regime::Hartree,
            n_list: vec![2, 3],
            lattice: LatticeSpec {
                sites,
                spacing: 1.0,
            },
            interaction: InteractionSpec {
                profile: vec![1.2, 0.6],
                lambda: 1.0,
                beta: 0.5,
            },
            trap: ExternalPotential::None,
            phi0: Phi0Preset::Gaussian { width: 0.9 },
            total_time: 0.5,
            dt: 0.01,
            sample_stride: 10,
            krylov_dim: 20,
            envelope_c: 1.0,
            envelope_gamma: 0.1,
            delta: 0.1,
            seed: 3,
        }
    }

    #[test]
    fn centered_difference_converges_at_second_order() {
        let cfg = identity_config(6);
        let report = derivative_identity_report(&cfg, 3, &[0.02, 0.01, 0.005]).unwrap();
        for (i, o) in report.orders.iter().enumerate() {
            assert!(
                (o - 2.0).abs() <= 0.3,
                "order {o} at step {i}: rows {:?}",
                report.rows
            );
        }
    }

    #[test]
    fn identity_is_trivial_without_interaction() {
        let mut cfg = identity_config(5);
        cfg.interaction.profile = vec![];
        let report = derivative_identity_report(&cfg, 2, &[0.01]).unwrap();
        assert!(report.rows[0].max_defect < 1e-10);
    }

    #[test]
    fn commutator_oracle_agrees_on_random_states() {
        let cfg = identity_config(4);
        let n = 2;
        let grid = cfg.grid().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let basis = crate::manybody::OccupationBasis::new(n, 4).unwrap();
        for _ in 0..5 {
            let state = SymmetricState::random(basis.clone(), &mut rng);
            let phi = Orbital::new(cfg.phi0.build(grid), 0.0).unwrap();
            let (decomposed, oracle) = commutator_crosscheck(&cfg, n, &state, &phi).unwrap();
            assert!(
                (decomposed - oracle).abs() < 1e-10,
                "{decomposed} vs {oracle}"
            );
        }
    }
}
