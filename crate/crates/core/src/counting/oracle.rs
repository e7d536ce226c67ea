//! First-quantized projector calculus: the literal product-sum projectors
//! over distinguished coordinates, the exact-identity suite they satisfy,
//! and the derivative functionals of the counting measure.
//!
//! This backend is the oracle the occupation-basis implementation is tested
//! against, and the only place where operators acting on named particles
//! (p₁p₂, p₁q₂, two-body multiplications) are spelled out.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{CountingError, HatWeights, SpectralWeights};
use crate::manybody::{
    to_first_quantized, FirstQuantizedState, OccupationBasis, SiteOrbital, SymmetricState,
    TensorBudget, TensorError,
};

#[derive(Debug, thiserror::Error)]
pub enum OracleError {
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Counting(#[from] CountingError),
}

/// P_{j,k} over the last `j` particles: sum over all ways of marking k of
/// them as excited. `k` outside 0..=j gives zero.
pub fn partial_projector(
    state: &FirstQuantizedState,
    orbital: &SiteOrbital,
    j: usize,
    k: isize,
) -> FirstQuantizedState {
    let n = state.particles();
    debug_assert!(j <= n);
    let mut out = state.zeros_like();
    if k < 0 || k as usize > j {
        return out;
    }
    let k = k as usize;
    let first = n - j;
    for mask in 0u32..(1u32 << j) {
        if mask.count_ones() as usize != k {
            continue;
        }
        let mut term = state.clone();
        for l in 0..j {
            let particle = first + l;
            term = if mask >> l & 1 == 1 {
                term.project_q(particle, orbital)
            } else {
                term.project_p(particle, orbital)
            };
        }
        for (o, t) in out.tensor.iter_mut().zip(&term.tensor) {
            *o += t;
        }
    }
    out
}

/// P_k = P_{N,k}.
pub fn projector(
    state: &FirstQuantizedState,
    orbital: &SiteOrbital,
    k: isize,
) -> FirstQuantizedState {
    partial_projector(state, orbital, state.particles(), k)
}

pub fn oracle_pk_weights(state: &FirstQuantizedState, orbital: &SiteOrbital) -> SpectralWeights {
    let n = state.particles();
    let weights = (0..=n as isize)
        .map(|k| {
            let p = projector(state, orbital, k);
            p.tensor.iter().map(|z| z.norm_sqr()).sum::<f64>()
        })
        .collect();
    SpectralWeights { weights }
}

/// f̂_d Ψ = Σ_k f(k-d) P_k Ψ by brute force.
pub fn oracle_hat(
    state: &FirstQuantizedState,
    orbital: &SiteOrbital,
    f: &HatWeights,
) -> FirstQuantizedState {
    let n = state.particles();
    let mut out = state.zeros_like();
    for k in 0..=n {
        let w = f.weight_at(k);
        if w == 0.0 {
            continue;
        }
        let p = projector(state, orbital, k as isize);
        for (o, t) in out.tensor.iter_mut().zip(&p.tensor) {
            *o += w * t;
        }
    }
    out
}

/// The two derivative functionals of the counting measure. With the pair
/// operator h₁₂ = (N-1)·v_eff(x₁-x₂) - ½V(x₁) - ½V(x₂) and the forward
/// difference weights of the counting function,
///
///   a1 = N · Im ⟨Ψ, h₁₂ ĉ₂ p₁p₂ Ψ⟩,   c₂(k) = n(k+2) - n(k),
///   a2 = N · Im ⟨Ψ, h₁₂ ĉ₁ p₁q₂ Ψ⟩,   c₁(k) = n(k+1) - n(k),
///
/// and d/dt ⟨Ψ_t, n̂ Ψ_t⟩ = 2·a1 + 4·a2 along the coupled flow.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DerivativeTerms {
    pub a1: f64,
    pub a2: f64,
}

fn counting_difference(n: usize, step: usize) -> HatWeights {
    let nf = n as f64;
    HatWeights::new(
        (0..=n)
            .map(|k| (((k + step) as f64) / nf).sqrt() - ((k as f64) / nf).sqrt())
            .collect(),
    )
}

/// h₁₂ as an (M·M) multiplication table on the first two particles.
pub fn pair_operator_table(pair_table: &[f64], v_phi: &[f64], particles: usize) -> Vec<f64> {
    let m = v_phi.len();
    let nm1 = (particles - 1) as f64;
    let mut t = vec![0.0; m * m];
    for x in 0..m {
        for y in 0..m {
            t[x * m + y] = nm1 * pair_table[x * m + y] - 0.5 * v_phi[x] - 0.5 * v_phi[y];
        }
    }
    t
}

pub fn alpha_derivative_terms(
    state: &FirstQuantizedState,
    orbital: &SiteOrbital,
    pair_table: &[f64],
    v_phi: &[f64],
) -> DerivativeTerms {
    let n = state.particles();
    let h12 = pair_operator_table(pair_table, v_phi, n);
    let c2 = counting_difference(n, 2);
    let c1 = counting_difference(n, 1);

    let p1p2 = state.project_p(0, orbital).project_p(1, orbital);
    let w1 = oracle_hat(&p1p2, orbital, &c2).mul_two_body(0, 1, &h12);
    let a1 = n as f64 * state.inner(&w1).im;

    let p1q2 = state.project_q(1, orbital).project_p(0, orbital);
    let w2 = oracle_hat(&p1q2, orbital, &c1).mul_two_body(0, 1, &h12);
    let a2 = n as f64 * state.inner(&w2).im;

    DerivativeTerms { a1, a2 }
}

/// Direct evaluation of dα/dt = i⟨Ψ, [H - H_mf, n̂] Ψ⟩. Kinetic and trap
/// terms cancel in the difference, leaving only multiplication operators:
/// the ordered pair sum of v_eff minus Σ_j V(x_j).
pub fn alpha_commutator_oracle(
    state: &FirstQuantizedState,
    orbital: &SiteOrbital,
    pair_table: &[f64],
    v_phi: &[f64],
) -> f64 {
    let n = state.particles();
    let m = orbital.sites();
    // diagonal of H - H_mf over tensor indices
    let mut diag = vec![0.0f64; state.tensor.len()];
    for (idx, d) in diag.iter_mut().enumerate() {
        let mut digits = vec![0usize; n];
        let mut rest = idx;
        for dig in digits.iter_mut() {
            *dig = rest % m;
            rest /= m;
        }
        let mut val = 0.0;
        for a in 0..n {
            for b in 0..n {
                if a != b {
                    val += pair_table[digits[a] * m + digits[b]];
                }
            }
            val -= v_phi[digits[a]];
        }
        *d = val;
    }
    let nhat = HatWeights::counting(n);
    let n_psi = oracle_hat(state, orbital, &nhat);
    let mut d_n_psi = n_psi.clone();
    for (z, d) in d_n_psi.tensor.iter_mut().zip(&diag) {
        *z *= d;
    }
    let mut d_psi = state.clone();
    for (z, d) in d_psi.tensor.iter_mut().zip(&diag) {
        *z *= d;
    }
    let n_d_psi = oracle_hat(&d_psi, orbital, &nhat);
    let commutator = state.inner(&d_n_psi) - state.inner(&n_d_psi);
    (Complex64::new(0.0, 1.0) * commutator).re
}

/// Maximum residuals of the exact projector identities and the slack of the
/// two inequalities, over seeded random trials. All residuals are absolute.
#[derive(Debug, Clone, Serialize)]
pub struct IdentityReport {
    pub seed: u64,
    pub particles: usize,
    pub sites: usize,
    pub trials: usize,
    /// f̂ĝ = (fg)^ and commutation with p_j, P_{j,k}
    pub hat_product: f64,
    pub hat_commutes_with_p: f64,
    pub hat_commutes_with_partial: f64,
    /// n̂² = N⁻¹ Σ_j q_j
    pub relative_number: f64,
    /// ‖f̂q₁Ψ‖² = ‖f̂n̂Ψ‖²
    pub q1_norm_transfer: f64,
    /// ‖f̂q₁q₂Ψ‖² ≤ N/(N-1)·‖f̂n̂²Ψ‖² (positive part of the excess)
    pub q1q2_inequality_excess: f64,
    /// f̂ Q_j v Q_k = Q_j v f̂_{k-j} Q_k over j,k ∈ {0,1,2}
    pub two_body_shift: f64,
    /// |⟨Ψ,w(x₁)Ψ⟩ - ⟨φ,wφ⟩| ≤ 4‖w‖_∞(N^{-1/4} + ⟨Ψ,n̂Ψ⟩)
    pub one_body_bound_excess: f64,
    /// four-term splitting of m̂ over the first two particles
    pub pair_decomposition: f64,
    /// Σ_k P_k = 1 and idempotence of P_k
    pub resolution_of_identity: f64,
    pub projector_idempotence: f64,
}

impl IdentityReport {
    pub fn max_identity_residual(&self) -> f64 {
        [
            self.hat_product,
            self.hat_commutes_with_p,
            self.hat_commutes_with_partial,
            self.relative_number,
            self.q1_norm_transfer,
            self.two_body_shift,
            self.pair_decomposition,
            self.resolution_of_identity,
            self.projector_idempotence,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    pub fn max_inequality_excess(&self) -> f64 {
        self.q1q2_inequality_excess.max(self.one_body_bound_excess)
    }
}

fn diff_norm(a: &FirstQuantizedState, b: &FirstQuantizedState) -> f64 {
    a.tensor
        .iter()
        .zip(&b.tensor)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

fn random_weights(n: usize, rng: &mut impl Rng) -> HatWeights {
    HatWeights::new((0..=n).map(|_| rng.gen_range(0.0..2.0)).collect())
}

fn random_state_pair(
    n: usize,
    m: usize,
    rng: &mut impl Rng,
) -> Result<(SymmetricState, FirstQuantizedState, SiteOrbital), OracleError> {
    let basis = OccupationBasis::new(n, m).map_err(CountingError::from)?;
    let state = SymmetricState::random(basis, rng);
    let tensor = to_first_quantized(&state, TensorBudget::default())?;
    let amps: Vec<Complex64> = (0..m)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let norm: f64 = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let orbital = SiteOrbital::from_amplitudes(amps.into_iter().map(|z| z / norm).collect())
        .expect("normalized by construction");
    Ok((state, tensor, orbital))
}

/// Runs `trials` random checks of every identity at the given (N, M).
pub fn identity_suite(
    seed: u64,
    particles: usize,
    sites: usize,
    trials: usize,
) -> Result<IdentityReport, OracleError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = particles;
    let m = sites;
    let mut report = IdentityReport {
        seed,
        particles: n,
        sites: m,
        trials,
        hat_product: 0.0,
        hat_commutes_with_p: 0.0,
        hat_commutes_with_partial: 0.0,
        relative_number: 0.0,
        q1_norm_transfer: 0.0,
        q1q2_inequality_excess: 0.0,
        two_body_shift: 0.0,
        one_body_bound_excess: 0.0,
        pair_decomposition: 0.0,
        resolution_of_identity: 0.0,
        projector_idempotence: 0.0,
    };

    for _ in 0..trials {
        let (_, psi, phi) = random_state_pair(n, m, &mut rng)?;
        let f = random_weights(n, &mut rng);
        let g = random_weights(n, &mut rng);

        // (product) f̂(ĝΨ) vs (fg)^Ψ
        let fg = oracle_hat(&oracle_hat(&psi, &phi, &g), &phi, &f);
        let prod = oracle_hat(&psi, &phi, &f.product(&g));
        report.hat_product = report.hat_product.max(diff_norm(&fg, &prod));

        // commutation with p_1 and with P_{2,1}
        let a = oracle_hat(&psi.project_p(0, &phi), &phi, &f);
        let b = oracle_hat(&psi, &phi, &f).project_p(0, &phi);
        report.hat_commutes_with_p = report.hat_commutes_with_p.max(diff_norm(&a, &b));
        if n >= 2 {
            let a = oracle_hat(&partial_projector(&psi, &phi, 2, 1), &phi, &f);
            let b = partial_projector(&oracle_hat(&psi, &phi, &f), &phi, 2, 1);
            report.hat_commutes_with_partial =
                report.hat_commutes_with_partial.max(diff_norm(&a, &b));
        }

        // n̂² = N⁻¹ Σ_j q_j
        let nsq = HatWeights::new((0..=n).map(|k| k as f64 / n as f64).collect());
        let lhs = oracle_hat(&psi, &phi, &nsq);
        let mut rhs = psi.zeros_like();
        for j in 0..n {
            let q = psi.project_q(j, &phi);
            for (r, t) in rhs.tensor.iter_mut().zip(&q.tensor) {
                *r += t / n as f64;
            }
        }
        report.relative_number = report.relative_number.max(diff_norm(&lhs, &rhs));

        // ‖f̂q₁Ψ‖² = ‖f̂n̂Ψ‖²
        let nhat = HatWeights::counting(n);
        let fq = oracle_hat(&psi.project_q(0, &phi), &phi, &f);
        let fn_ = oracle_hat(&oracle_hat(&psi, &phi, &nhat), &phi, &f);
        let lhs2: f64 = fq.tensor.iter().map(|z| z.norm_sqr()).sum();
        let rhs2: f64 = fn_.tensor.iter().map(|z| z.norm_sqr()).sum();
        report.q1_norm_transfer = report.q1_norm_transfer.max((lhs2 - rhs2).abs());

        // ‖f̂q₁q₂Ψ‖² ≤ N/(N-1) ‖f̂n̂²Ψ‖²
        if n >= 2 {
            let fqq = oracle_hat(&psi.project_q(0, &phi).project_q(1, &phi), &phi, &f);
            let fnn = oracle_hat(&oracle_hat(&psi, &phi, &nsq), &phi, &f);
            let lhs: f64 = fqq.tensor.iter().map(|z| z.norm_sqr()).sum();
            let rhs: f64 = fnn.tensor.iter().map(|z| z.norm_sqr()).sum();
            let excess = lhs - rhs * n as f64 / (n as f64 - 1.0);
            report.q1q2_inequality_excess = report.q1q2_inequality_excess.max(excess);
        }

        // f̂ Q_j v Q_k = Q_j v f̂_{k-j} Q_k
        if n >= 2 {
            let vtab: Vec<f64> = (0..m * m).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let apply_qq = |s: &FirstQuantizedState, which: usize| -> FirstQuantizedState {
                match which {
                    0 => s.project_p(0, &phi).project_p(1, &phi),
                    1 => s.project_p(0, &phi).project_q(1, &phi),
                    _ => s.project_q(0, &phi).project_q(1, &phi),
                }
            };
            for j in 0..3usize {
                for k in 0..3usize {
                    let lhs = oracle_hat(
                        &apply_qq(&apply_qq(&psi, k).mul_two_body(0, 1, &vtab), j),
                        &phi,
                        &f,
                    );
                    let shifted =
                        HatWeights::with_shift(f.clone().values, k as i64 - j as i64);
                    let rhs = apply_qq(
                        &oracle_hat(&apply_qq(&psi, k), &phi, &shifted).mul_two_body(0, 1, &vtab),
                        j,
                    );
                    report.two_body_shift = report.two_body_shift.max(diff_norm(&lhs, &rhs));
                }
            }
        }

        // one-body expectation bound
        let w: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let w_inf = w.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
        let wc: Vec<Complex64> = w.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        let w_psi = psi.mul_one_body(0, &wc);
        let exp_state = psi.inner(&w_psi).re;
        let exp_orbital: f64 = phi
            .amplitudes()
            .iter()
            .zip(&w)
            .map(|(u, &x)| u.norm_sqr() * x)
            .sum();
        let alpha1: f64 = oracle_pk_weights(&psi, &phi)
            .moment(1.0)
            .expect("gamma > 0");
        let lhs = (exp_state - exp_orbital).abs();
        let rhs = 4.0 * w_inf * ((n as f64).powf(-0.25) + alpha1);
        report.one_body_bound_excess = report.one_body_bound_excess.max(lhs - rhs);

        // four-term splitting of a random m̂ over the first two particles
        if n >= 2 {
            let mw = random_weights(n, &mut rng);
            let mk = |k: usize| -> f64 {
                if k <= n {
                    mw.weight_at(k)
                } else {
                    0.0
                }
            };
            let c2 = HatWeights::new((0..=n).map(|k| mk(k) - mk(k + 2)).collect());
            let c1 = HatWeights::new((0..=n).map(|k| mk(k) - mk(k + 1)).collect());
            let lhs = oracle_hat(&psi, &phi, &mw);
            let t1 = oracle_hat(&psi.project_p(0, &phi).project_p(1, &phi), &phi, &c2);
            let t2 = oracle_hat(&psi.project_p(0, &phi).project_q(1, &phi), &phi, &c1);
            let t3 = oracle_hat(&psi.project_q(0, &phi).project_p(1, &phi), &phi, &c1);
            let mut t4 = psi.zeros_like();
            for k in 2..=n {
                let part = partial_projector(&psi, &phi, n - 2, k as isize - 2);
                for (o, t) in t4.tensor.iter_mut().zip(&part.tensor) {
                    *o += mk(k) * t;
                }
            }
            let mut rhs = t1;
            for (o, (a, (b, c))) in rhs
                .tensor
                .iter_mut()
                .zip(t2.tensor.iter().zip(t3.tensor.iter().zip(&t4.tensor)))
            {
                *o += a + b + c;
            }
            report.pair_decomposition = report.pair_decomposition.max(diff_norm(&lhs, &rhs));
        }

        // resolution of identity and idempotence
        let mut sum = psi.zeros_like();
        for k in 0..=n as isize {
            let p = projector(&psi, &phi, k);
            let pp = projector(&p, &phi, k);
            report.projector_idempotence = report.projector_idempotence.max(diff_norm(&p, &pp));
            for (o, t) in sum.tensor.iter_mut().zip(&p.tensor) {
                *o += t;
            }
        }
        report.resolution_of_identity = report.resolution_of_identity.max(diff_norm(&sum, &psi));
    }

    Ok(report)
}
