//! Split-step propagation of the effective one-body equation
//!
//!   i ∂_t φ = (-Δ + A_t) φ + V_φ φ
//!
//! where the self-consistent potential V_φ is zero (free), a convolution
//! `v ⋆ |φ|²` (Hartree) or a cubic term `g_c |φ|²` (Gross-Pitaevskii).
//! A Strang kick-drift-kick step keeps the L² norm exact per step and has
//! local error O(dt³). The kinetic drift is a Fourier multiplier, either the
//! continuum symbol `k²` or the ring-lattice symbol `(4/h²) sin²(kh/2)`; the
//! latter makes the orbital dynamics commensurate with the many-body ring.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{Grid, GridError, GridFunction};

#[derive(Debug, Error)]
pub enum MeanFieldError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("non-finite values encountered at t = {0} (blow-up)")]
    Blowup(f64),
    #[error("orbital is not normalized: l2 = {0}")]
    NotNormalized(f64),
    #[error("invalid time step: {0}")]
    BadStep(f64),
}

/// Normalized one-body wave function at a given time.
#[derive(Debug, Clone)]
pub struct Orbital {
    pub psi: GridFunction,
    pub time: f64,
}

impl Orbital {
    pub fn new(psi: GridFunction, time: f64) -> Result<Self, MeanFieldError> {
        let n = psi.l2();
        if (n - 1.0).abs() > 1e-9 {
            return Err(MeanFieldError::NotNormalized(n));
        }
        Ok(Orbital { psi, time })
    }

    pub fn grid(&self) -> Grid {
        self.psi.grid()
    }
}

/// Trap potential presets. `ramped_harmonic` switches the trap off linearly
/// between `t_on` and `t_off` (continuous, piecewise-linear in t).
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(tag = "preset", rename_all = "snake_case")]
pub enum ExternalPotential {
    None,
    StaticHarmonic { omega: f64 },
    RampedHarmonic { omega: f64, t_on: f64, t_off: f64 },
}

impl ExternalPotential {
    fn ramp(&self, t: f64) -> f64 {
        match *self {
            ExternalPotential::None => 0.0,
            ExternalPotential::StaticHarmonic { .. } => 1.0,
            ExternalPotential::RampedHarmonic { t_on, t_off, .. } => {
                if t <= t_on {
                    1.0
                } else if t >= t_off {
                    0.0
                } else {
                    (t_off - t) / (t_off - t_on)
                }
            }
        }
    }

    fn ramp_dt(&self, t: f64) -> f64 {
        match *self {
            ExternalPotential::None | ExternalPotential::StaticHarmonic { .. } => 0.0,
            ExternalPotential::RampedHarmonic { t_on, t_off, .. } => {
                if t > t_on && t < t_off {
                    -1.0 / (t_off - t_on)
                } else {
                    0.0
                }
            }
        }
    }

    fn omega(&self) -> f64 {
        match *self {
            ExternalPotential::None => 0.0,
            ExternalPotential::StaticHarmonic { omega }
            | ExternalPotential::RampedHarmonic { omega, .. } => omega,
        }
    }

    /// A(x, t) on a periodic domain of the given length. Harmonic wells are
    /// centered at L/2 so the trapped mass stays away from the seam.
    pub fn eval_at(&self, length: f64, x: f64, t: f64) -> f64 {
        let d = x - 0.5 * length;
        let w = self.omega();
        0.5 * w * w * d * d * self.ramp(t)
    }

    pub fn eval(&self, grid: Grid, x: f64, t: f64) -> f64 {
        self.eval_at(grid.length(), x, t)
    }

    /// ∂_t A(x, t).
    pub fn eval_dt_at(&self, length: f64, x: f64, t: f64) -> f64 {
        let d = x - 0.5 * length;
        let w = self.omega();
        0.5 * w * w * d * d * self.ramp_dt(t)
    }

    pub fn eval_dt(&self, grid: Grid, x: f64, t: f64) -> f64 {
        self.eval_dt_at(grid.length(), x, t)
    }

    pub fn sample(&self, grid: Grid, t: f64) -> GridFunction {
        grid.sample_real(|x| self.eval(grid, x, t))
    }

    pub fn sample_dt(&self, grid: Grid, t: f64) -> GridFunction {
        grid.sample_real(|x| self.eval_dt(grid, x, t))
    }
}

/// Self-consistent potential family.
#[derive(Debug, Clone)]
pub enum MeanFieldKind {
    Free,
    /// V_φ = v ⋆ |φ|² with a real, nonnegative convolution kernel.
    Hartree(GridFunction),
    /// V_φ = g_c |φ|².
    Gp { coupling: f64 },
}

impl MeanFieldKind {
    pub fn hartree(v: GridFunction) -> Self {
        MeanFieldKind::Hartree(v)
    }
}

/// V_φ for the given kind; real-valued on the grid.
pub fn mean_field_potential(kind: &MeanFieldKind, phi: &Orbital) -> GridFunction {
    match kind {
        MeanFieldKind::Free => phi.grid().zero(),
        MeanFieldKind::Hartree(v) => {
            let dens = phi.psi.abs_sqr();
            v.convolve(&dens).expect("kernel sampled on the orbital grid")
        }
        MeanFieldKind::Gp { coupling } => phi.psi.abs_sqr().scale(Complex64::new(*coupling, 0.0)),
    }
}

/// Which kinetic symbol drives the Fourier drift step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KineticKind {
    /// Continuum symbol k².
    Spectral,
    /// Second-difference ring symbol (4/h²) sin²(kh/2).
    LatticeHopping,
}

impl KineticKind {
    pub fn symbol(&self, grid: Grid, mode: usize) -> f64 {
        let k = grid.wavenumber(mode);
        match self {
            KineticKind::Spectral => k * k,
            KineticKind::LatticeHopping => {
                let h = grid.spacing();
                let s = (0.5 * k * h).sin();
                4.0 * s * s / (h * h)
            }
        }
    }
}

fn potential_kick(
    psi: &GridFunction,
    kind: &MeanFieldKind,
    a: &ExternalPotential,
    t_mid: f64,
    half_dt: f64,
) -> GridFunction {
    let grid = psi.grid();
    let orb = Orbital {
        psi: psi.clone(),
        time: t_mid,
    };
    let v = mean_field_potential(kind, &orb);
    let mut out = psi.clone();
    for (i, z) in out.values_mut().iter_mut().enumerate() {
        let pot = a.eval(grid, grid.coord(i), t_mid) + v.values()[i].re;
        *z *= Complex64::new(0.0, -half_dt * pot).exp();
    }
    out
}

/// One Strang step of size `dt` (may be negative to run backwards).
///
/// Half potential kick at the midpoint time, full kinetic drift, half kick.
/// The second kick re-evaluates V_φ after the drift; the kick itself never
/// changes |φ|, so each substep is solved exactly.
pub fn strang_step(
    phi: &Orbital,
    dt: f64,
    kind: &MeanFieldKind,
    a: &ExternalPotential,
    kinetic: KineticKind,
) -> Result<Orbital, MeanFieldError> {
    if dt == 0.0 || !dt.is_finite() {
        return Err(MeanFieldError::BadStep(dt));
    }
    let grid = phi.grid();
    let t_mid = phi.time + 0.5 * dt;
    let kicked = potential_kick(&phi.psi, kind, a, t_mid, 0.5 * dt);
    let drifted = kicked.apply_multiplier(|mode| {
        Complex64::new(0.0, -dt * kinetic.symbol(grid, mode)).exp()
    });
    let out = potential_kick(&drifted, kind, a, t_mid, 0.5 * dt);
    if !out.is_finite() {
        return Err(MeanFieldError::Blowup(phi.time));
    }
    Ok(Orbital {
        psi: out,
        time: phi.time + dt,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct EnergyBreakdown {
    pub e_kin: f64,
    pub e_pot: f64,
    pub e_total: f64,
}

/// Energy functional of the effective equation at time `t`:
/// kinetic quadratic form plus `⟨φ, A_t φ⟩` plus the interaction part —
/// `(g_c/2)∫|φ|⁴` for the cubic kind, `½⟨φ,(v⋆|φ|²)φ⟩` for Hartree.
/// Conserved along the flow while A is static.
pub fn gp_energy(
    phi: &Orbital,
    a: &ExternalPotential,
    t: f64,
    kind: &MeanFieldKind,
    kinetic: KineticKind,
) -> EnergyBreakdown {
    let grid = phi.grid();
    let coeff = phi.psi.fourier_coefficients();
    let e_kin: f64 = coeff
        .iter()
        .enumerate()
        .map(|(mode, z)| kinetic.symbol(grid, mode) * z.norm_sqr() * grid.spacing())
        .sum();
    let a_fn = a.sample(grid, t);
    let dens = phi.psi.abs_sqr();
    let h = grid.spacing();
    let mut e_ext = 0.0;
    for i in 0..grid.points() {
        e_ext += a_fn.values()[i].re * dens.values()[i].re * h;
    }
    let e_int = match kind {
        MeanFieldKind::Free => 0.0,
        MeanFieldKind::Gp { coupling } => {
            0.5 * coupling * dens.values().iter().map(|d| d.re * d.re).sum::<f64>() * h
        }
        MeanFieldKind::Hartree(v) => {
            let conv = v.convolve(&dens).expect("same grid");
            0.5 * conv
                .values()
                .iter()
                .zip(dens.values())
                .map(|(c, d)| c.re * d.re)
                .sum::<f64>()
                * h
        }
    };
    let e_pot = e_ext + e_int;
    EnergyBreakdown {
        e_kin,
        e_pot,
        e_total: e_kin + e_pot,
    }
}

/// Sup-norm diagnostics of a trajectory; `decay_integral` is the trapezoid
/// rule applied to `‖φ‖_∞ + ‖∇φ‖_∞` over the samples.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RegularityReport {
    pub sup_linf: f64,
    pub sup_grad_linf: f64,
    pub sup_lap_linf: f64,
    pub decay_integral: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<Orbital>,
    pub report: RegularityReport,
}

#[derive(Debug, Clone)]
pub struct EvolveConfig {
    pub total_time: f64,
    pub dt: f64,
    pub sample_stride: usize,
    pub kinetic: KineticKind,
}

/// Repeated Strang steps over [0, T]; the trajectory is sampled every
/// `sample_stride` steps (and always at the final time).
pub fn evolve(
    phi0: &Orbital,
    cfg: &EvolveConfig,
    kind: &MeanFieldKind,
    a: &ExternalPotential,
) -> Result<Trajectory, MeanFieldError> {
    if cfg.total_time < 0.0 {
        return Err(MeanFieldError::BadStep(cfg.total_time));
    }
    let mut samples = vec![phi0.clone()];
    if cfg.total_time > 0.0 {
        if !(cfg.dt > 0.0 && cfg.dt <= cfg.total_time) {
            return Err(MeanFieldError::BadStep(cfg.dt));
        }
        let steps = (cfg.total_time / cfg.dt).round() as usize;
        let stride = cfg.sample_stride.max(1);
        let mut cur = phi0.clone();
        for s in 1..=steps {
            cur = strang_step(&cur, cfg.dt, kind, a, cfg.kinetic)?;
            if s % stride == 0 || s == steps {
                samples.push(cur.clone());
            }
        }
    }
    let report = regularity_report(&samples);
    Ok(Trajectory { samples, report })
}

pub fn regularity_report(samples: &[Orbital]) -> RegularityReport {
    let mut sup_linf: f64 = 0.0;
    let mut sup_grad: f64 = 0.0;
    let mut sup_lap: f64 = 0.0;
    let mut values = Vec::with_capacity(samples.len());
    for orb in samples {
        let linf = orb.psi.linf();
        let grad = orb.psi.spectral_gradient().linf();
        let lap = orb.psi.spectral_laplacian().linf();
        sup_linf = sup_linf.max(linf);
        sup_grad = sup_grad.max(grad);
        sup_lap = sup_lap.max(lap);
        values.push((orb.time, linf + grad));
    }
    let mut decay = 0.0;
    for w in values.windows(2) {
        decay += 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1);
    }
    RegularityReport {
        sup_linf,
        sup_grad_linf: sup_grad,
        sup_lap_linf: sup_lap,
        decay_integral: decay,
    }
}

/// CSV rows `t, norm, e_kin, e_pot, e_total, linf, grad_linf` for a sampled
/// trajectory.
pub fn trajectory_csv(
    samples: &[Orbital],
    kind: &MeanFieldKind,
    a: &ExternalPotential,
    kinetic: KineticKind,
) -> String {
    let mut out = String::from("t,norm,e_kin,e_pot,e_total,linf,grad_linf\n");
    for orb in samples {
        let e = gp_energy(orb, a, orb.time, kind, kinetic);
        let norm = orb.psi.l2();
        let linf = orb.psi.linf();
        let grad = orb.psi.spectral_gradient().linf();
        out.push_str(&format!(
            "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}\n",
            orb.time, norm, e.e_kin, e.e_pot, e.e_total, linf, grad
        ));
    }
    out
}
