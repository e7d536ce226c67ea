//! Counting calculus on the occupation-basis backend.
//!
//! Everything here is organized around the mode-number operator
//! N_φ = Σ_j |φ⟩⟨φ|_j, whose integer spectrum {0..N} splits a symmetric
//! state into components with exactly k = N - eigenvalue particles outside
//! the orbital. The splitting is computed once per (state, orbital) through
//! a Newton-basis triangular scheme — N+1 operator applications followed by
//! exact back substitution — and spectral weights, hat operators and the
//! counting moments all read off the same decomposition.

pub mod oracle;

use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

use crate::manybody::basis::OccupationBasis;
use crate::manybody::{SiteOrbital, SymmetricState};

#[derive(Debug, Error)]
pub enum CountingError {
    #[error("moment exponent must be positive, got {0}")]
    BadGamma(f64),
    #[error("orbital has {0} sites, state has {1}")]
    SiteMismatch(usize, usize),
    #[error(transparent)]
    Basis(#[from] crate::manybody::basis::BasisError),
}

/// Weights f(0..N) of a hat operator `f̂_d = Σ_k f(k-d) P_k`.
#[derive(Debug, Clone)]
pub struct HatWeights {
    values: Vec<f64>,
    shift: i64,
}

impl HatWeights {
    pub fn new(values: Vec<f64>) -> Self {
        HatWeights { values, shift: 0 }
    }

    pub fn with_shift(values: Vec<f64>, shift: i64) -> Self {
        HatWeights { values, shift }
    }

    /// The counting weights n(k) = sqrt(k/N).
    pub fn counting(particles: usize) -> Self {
        let n = particles as f64;
        HatWeights::new((0..=particles).map(|k| (k as f64 / n).sqrt()).collect())
    }

    /// Effective weight multiplying P_k.
    pub fn weight_at(&self, k: usize) -> f64 {
        let j = k as i64 - self.shift;
        if j < 0 || j as usize >= self.values.len() {
            0.0
        } else {
            self.values[j as usize]
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Pointwise product of the underlying weights (shift 0).
    pub fn product(&self, other: &HatWeights) -> HatWeights {
        HatWeights::new(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a * b)
                .collect(),
        )
    }
}

/// w_k = ‖P_k Ψ‖², k = 0..N.
#[derive(Debug, Clone)]
pub struct SpectralWeights {
    pub weights: Vec<f64>,
}

impl SpectralWeights {
    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Σ_k (k/N)^(γ/2) w_k.
    pub fn moment(&self, gamma: f64) -> Result<f64, CountingError> {
        if gamma.is_nan() || gamma <= 0.0 {
            return Err(CountingError::BadGamma(gamma));
        }
        let n = (self.weights.len() - 1) as f64;
        Ok(self
            .weights
            .iter()
            .enumerate()
            .map(|(k, w)| (k as f64 / n).powf(0.5 * gamma) * w)
            .sum())
    }
}

/// b_φ / b_φ† between the N and N-1 particle sectors, plus N_φ = b† b.
pub struct ModeNumberOperator {
    basis: Arc<OccupationBasis>,
    basis_lower: Arc<OccupationBasis>,
    u: Vec<Complex64>,
}

impl ModeNumberOperator {
    pub fn new(
        basis: Arc<OccupationBasis>,
        orbital: &SiteOrbital,
    ) -> Result<Self, CountingError> {
        if orbital.sites() != basis.sites() {
            return Err(CountingError::SiteMismatch(
                orbital.sites(),
                basis.sites(),
            ));
        }
        let basis_lower = OccupationBasis::with_guard(
            basis.particles().saturating_sub(1),
            basis.sites(),
            u64::MAX,
        )?;
        Ok(ModeNumberOperator {
            basis,
            basis_lower,
            u: orbital.amplitudes().to_vec(),
        })
    }

    /// b_φ = Σ_y conj(u_y) a_y.
    pub fn lower(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        let m = self.basis.sites();
        let mut out = vec![Complex64::new(0.0, 0.0); self.basis_lower.dim()];
        let mut occ = vec![0u8; m];
        for r in 0..self.basis.dim() {
            let amp = coeffs[r];
            if amp == Complex64::new(0.0, 0.0) {
                continue;
            }
            let source = self.basis.occupation(r);
            for y in 0..m {
                if source[y] == 0 {
                    continue;
                }
                occ.copy_from_slice(source);
                occ[y] -= 1;
                let w = (source[y] as f64).sqrt();
                out[self.basis_lower.rank(&occ)] += self.u[y].conj() * w * amp;
            }
        }
        out
    }

    /// b_φ† = Σ_y u_y a_y†.
    pub fn raise(&self, lowered: &[Complex64]) -> Vec<Complex64> {
        let m = self.basis.sites();
        let mut out = vec![Complex64::new(0.0, 0.0); self.basis.dim()];
        let mut occ = vec![0u8; m];
        for r in 0..self.basis_lower.dim() {
            let amp = lowered[r];
            if amp == Complex64::new(0.0, 0.0) {
                continue;
            }
            let source = self.basis_lower.occupation(r);
            for y in 0..m {
                occ.copy_from_slice(source);
                occ[y] += 1;
                let w = (source[y] as f64 + 1.0).sqrt();
                out[self.basis.rank(&occ)] += self.u[y] * w * amp;
            }
        }
        out
    }

    pub fn apply(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        self.raise(&self.lower(coeffs))
    }
}

/// Splitting of a state over the integer spectrum of N_φ.
/// `component(m)` is the (unnormalized) part with m particles in φ,
/// equivalently P_{N-m} Ψ.
pub struct ModeDecomposition {
    particles: usize,
    basis: Arc<OccupationBasis>,
    components: Vec<Vec<Complex64>>,
}

impl ModeDecomposition {
    pub fn new(state: &SymmetricState, orbital: &SiteOrbital) -> Result<Self, CountingError> {
        let op = ModeNumberOperator::new(state.basis().clone(), orbital)?;
        let n = state.particles();
        // Newton basis: d_j = Π_{l<j} (N_φ - l) Ψ
        let mut d: Vec<Vec<Complex64>> = Vec::with_capacity(n + 1);
        d.push(state.coeffs().to_vec());
        for j in 1..=n {
            let prev = &d[j - 1];
            let mut next = op.apply(prev);
            let l = (j - 1) as f64;
            for (a, b) in next.iter_mut().zip(prev) {
                *a -= l * b;
            }
            d.push(next);
        }
        // back substitution: d_j = Σ_{m≥j} m!/(m-j)! · comp_m
        let falling = |m: usize, j: usize| -> f64 {
            let mut acc = 1.0;
            for i in 0..j {
                acc *= (m - i) as f64;
            }
            acc
        };
        let dim = state.basis().dim();
        let mut components = vec![vec![Complex64::new(0.0, 0.0); dim]; n + 1];
        for m in (0..=n).rev() {
            let mut x = d[m].clone();
            for mp in m + 1..=n {
                let c = falling(mp, m);
                let comp = &components[mp];
                for (xi, ci) in x.iter_mut().zip(comp) {
                    *xi -= c * ci;
                }
            }
            let inv = 1.0 / falling(m, m);
            for xi in x.iter_mut() {
                *xi *= inv;
            }
            components[m] = x;
        }
        Ok(ModeDecomposition {
            particles: n,
            basis: state.basis().clone(),
            components,
        })
    }

    pub fn particles(&self) -> usize {
        self.particles
    }

    /// P_k Ψ — the part with k particles outside the orbital.
    pub fn excited_component(&self, k: usize) -> &[Complex64] {
        &self.components[self.particles - k]
    }

    pub fn weights(&self) -> SpectralWeights {
        let weights = (0..=self.particles)
            .map(|k| {
                self.excited_component(k)
                    .iter()
                    .map(|z| z.norm_sqr())
                    .sum::<f64>()
            })
            .collect();
        SpectralWeights { weights }
    }

    /// f̂_d Ψ = Σ_k f(k-d) P_k Ψ.
    pub fn hat(&self, f: &HatWeights) -> SymmetricState {
        let dim = self.basis.dim();
        let mut out = vec![Complex64::new(0.0, 0.0); dim];
        for k in 0..=self.particles {
            let w = f.weight_at(k);
            if w == 0.0 {
                continue;
            }
            for (o, c) in out.iter_mut().zip(self.excited_component(k)) {
                *o += w * c;
            }
        }
        SymmetricState::new(self.basis.clone(), out)
    }
}

pub fn pk_weights(
    state: &SymmetricState,
    orbital: &SiteOrbital,
) -> Result<SpectralWeights, CountingError> {
    Ok(ModeDecomposition::new(state, orbital)?.weights())
}

pub fn apply_hat(
    state: &SymmetricState,
    orbital: &SiteOrbital,
    f: &HatWeights,
) -> Result<SymmetricState, CountingError> {
    Ok(ModeDecomposition::new(state, orbital)?.hat(f))
}

/// ⟨Ψ, (n̂^φ)^γ Ψ⟩ = Σ_k (k/N)^(γ/2) ‖P_k Ψ‖².
pub fn alpha_moment(
    state: &SymmetricState,
    orbital: &SiteOrbital,
    gamma: f64,
) -> Result<f64, CountingError> {
    pk_weights(state, orbital)?.moment(gamma)
}

/// Reduced one-particle density matrix, stored as the h-weighted kernel
/// μ(x,y): (μψ)(x) = h Σ_y μ(x,y) ψ(y), trace h·Σ μ(x,x) = 1.
#[derive(Debug, Clone)]
pub struct OneParticleDensity {
    pub kernel: Vec<Complex64>,
    pub sites: usize,
    pub spacing: f64,
    pub condensate_overlap: f64,
}

impl OneParticleDensity {
    pub fn trace(&self) -> f64 {
        (0..self.sites)
            .map(|x| self.kernel[x * self.sites + x].re)
            .sum::<f64>()
            * self.spacing
    }

    pub fn hermiticity_residual(&self) -> f64 {
        let m = self.sites;
        let mut worst: f64 = 0.0;
        for x in 0..m {
            for y in 0..m {
                let a = self.kernel[x * m + y];
                let b = self.kernel[y * m + x].conj();
                worst = worst.max((a - b).norm());
            }
        }
        worst
    }

    /// Eigenvalues of the density operator (dimensionless, sum to 1).
    pub fn eigenvalues(&self) -> Vec<f64> {
        let m = self.sites;
        let mat = nalgebra::DMatrix::from_fn(m, m, |x, y| self.kernel[x * m + y] * self.spacing);
        let mut ev: Vec<f64> = nalgebra::SymmetricEigen::new(mat)
            .eigenvalues
            .iter()
            .cloned()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }
}

/// μ(x,y) = ⟨Ψ, a_y† a_x Ψ⟩ / (N h) together with ⟨φ, μ φ⟩.
pub fn reduced_density(
    state: &SymmetricState,
    spacing: f64,
    orbital: &SiteOrbital,
) -> Result<OneParticleDensity, CountingError> {
    let m = state.sites();
    if orbital.sites() != m {
        return Err(CountingError::SiteMismatch(orbital.sites(), m));
    }
    let basis = state.basis();
    let lower = OccupationBasis::with_guard(state.particles() - 1, m, u64::MAX)?;
    // Φ_y = a_y Ψ
    let mut lowered = vec![vec![Complex64::new(0.0, 0.0); lower.dim()]; m];
    let mut occ = vec![0u8; m];
    for r in 0..basis.dim() {
        let amp = state.coeffs()[r];
        if amp == Complex64::new(0.0, 0.0) {
            continue;
        }
        let source = basis.occupation(r);
        for y in 0..m {
            if source[y] == 0 {
                continue;
            }
            occ.copy_from_slice(source);
            occ[y] -= 1;
            lowered[y][lower.rank(&occ)] += (source[y] as f64).sqrt() * amp;
        }
    }
    let n = state.particles() as f64;
    let mut unit = vec![Complex64::new(0.0, 0.0); m * m];
    for x in 0..m {
        for y in 0..m {
            // ⟨Φ_y, Φ_x⟩ / N
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..lower.dim() {
                acc += lowered[y][i].conj() * lowered[x][i];
            }
            unit[x * m + y] = acc / n;
        }
    }
    let u = orbital.amplitudes();
    let mut overlap = Complex64::new(0.0, 0.0);
    for x in 0..m {
        for y in 0..m {
            overlap += u[x].conj() * unit[x * m + y] * u[y];
        }
    }
    let kernel = unit.iter().map(|z| z / spacing).collect();
    Ok(OneParticleDensity {
        kernel,
        sites: m,
        spacing,
        condensate_overlap: overlap.re,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manybody::{product_state, to_first_quantized, TensorBudget};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn random_orbital(m: usize, rng: &mut impl Rng) -> SiteOrbital {
        let amps: Vec<Complex64> = (0..m)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let n: f64 = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        SiteOrbital::from_amplitudes(amps.into_iter().map(|z| z / n).collect()).unwrap()
    }

    #[test]
    fn product_state_sits_entirely_in_k0() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let phi = random_orbital(4, &mut rng);
        let psi = product_state(&phi, 3).unwrap();
        let w = pk_weights(&psi, &phi).unwrap();
        assert!((w.weights[0] - 1.0).abs() < 1e-12);
        for k in 1..=3 {
            assert!(w.weights[k].abs() < 1e-12);
        }
        assert!(alpha_moment(&psi, &phi, 1.0).unwrap().abs() < 1e-12);
        assert!(alpha_moment(&psi, &phi, 2.0).unwrap().abs() < 1e-12);
    }

    #[test]
    fn single_excitation_state_has_w1_equal_one() {
        // symmetrized φ^(N-1) ⊗ χ with χ ⊥ φ, built in first quantization
        let m = 4;
        let n = 3;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let phi = random_orbital(m, &mut rng);
        // Gram-Schmidt a random vector against φ
        let raw = random_orbital(m, &mut rng);
        let mut chi: Vec<Complex64> = raw.amplitudes().to_vec();
        let u = phi.amplitudes();
        let ip: Complex64 = u.iter().zip(&chi).map(|(a, b)| a.conj() * b).sum();
        for (c, a) in chi.iter_mut().zip(u) {
            *c -= ip * a;
        }
        let nn: f64 = chi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let chi = SiteOrbital::from_amplitudes(chi.into_iter().map(|z| z / nn).collect()).unwrap();

        let tensor_phi =
            to_first_quantized(&product_state(&phi, n).unwrap(), TensorBudget::default()).unwrap();
        let mm = m;
        // build φ⊗...⊗φ⊗χ and symmetrize
        let mut t = tensor_phi.zeros_like();
        for idx in 0..t.tensor.len() {
            let mut rest = idx;
            let mut amp = Complex64::new(1.0, 0.0);
            for j in 0..n {
                let x = rest % mm;
                rest /= mm;
                amp *= if j + 1 == n {
                    chi.amplitudes()[x]
                } else {
                    phi.amplitudes()[x]
                };
            }
            t.tensor[idx] = amp;
        }
        let sym = t.symmetrized();
        let psi = crate::manybody::from_first_quantized(&sym, TensorBudget::default())
            .unwrap()
            .normalized();
        let w = pk_weights(&psi, &phi).unwrap();
        assert!((w.weights[1] - 1.0).abs() < 1e-10, "w = {:?}", w.weights);
        let a = alpha_moment(&psi, &phi, 1.0).unwrap();
        assert!((a - (1.0f64 / n as f64).sqrt()).abs() < 1e-10);
    }

    #[test]
    fn weights_sum_to_one_and_projectors_are_orthogonal() {
        let basis = OccupationBasis::new(4, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let psi = SymmetricState::random(basis.clone(), &mut rng);
            let phi = random_orbital(4, &mut rng);
            let dec = ModeDecomposition::new(&psi, &phi).unwrap();
            let w = dec.weights();
            assert!((w.total() - 1.0).abs() < 1e-10);
            // mutual orthogonality of the components
            for k in 0..=4usize {
                for l in 0..=4usize {
                    if k == l {
                        continue;
                    }
                    let ip: Complex64 = dec
                        .excited_component(k)
                        .iter()
                        .zip(dec.excited_component(l))
                        .map(|(a, b)| a.conj() * b)
                        .sum();
                    assert!(ip.norm() < 1e-10);
                }
            }
            // idempotence through a second decomposition
            let comp1 = SymmetricState::new(basis.clone(), dec.excited_component(1).to_vec());
            let norm1 = comp1.norm();
            if norm1 > 1e-8 {
                let again = ModeDecomposition::new(&comp1.normalized(), &phi).unwrap();
                let w2 = again.weights();
                assert!((w2.weights[1] - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn hat_with_unit_weights_is_identity() {
        let basis = OccupationBasis::new(3, 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let psi = SymmetricState::random(basis, &mut rng);
        let phi = random_orbital(5, &mut rng);
        let ones = HatWeights::new(vec![1.0; 4]);
        let out = apply_hat(&psi, &phi, &ones).unwrap();
        for (a, b) in out.coeffs().iter().zip(psi.coeffs()) {
            assert!((a - b).norm() < 1e-11);
        }
    }

    #[test]
    fn counting_hat_kills_product_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let phi = random_orbital(3, &mut rng);
        let psi = product_state(&phi, 4).unwrap();
        let nhat = HatWeights::counting(4);
        let out = apply_hat(&psi, &phi, &nhat).unwrap();
        assert!(out.norm() < 1e-11);
    }

    #[test]
    fn hat_weights_scale_linearly() {
        let basis = OccupationBasis::new(3, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let psi = SymmetricState::random(basis, &mut rng);
        let phi = random_orbital(4, &mut rng);
        let f = HatWeights::new(vec![0.3, 1.1, 0.2, 0.9]);
        let c = 3.7;
        let scaled = HatWeights::new(vec![0.3 * c, 1.1 * c, 0.2 * c, 0.9 * c]);
        let a = apply_hat(&psi, &phi, &f).unwrap();
        let b = apply_hat(&psi, &phi, &scaled).unwrap();
        for (x, y) in a.coeffs().iter().zip(b.coeffs()) {
            assert!((x * c - y).norm() < 1e-11);
        }
    }

    #[test]
    fn weights_are_phase_invariant() {
        let basis = OccupationBasis::new(3, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        let psi = SymmetricState::random(basis.clone(), &mut rng);
        let phi = random_orbital(4, &mut rng);
        let w0 = pk_weights(&psi, &phi).unwrap();
        // global phase on the orbital
        let phase = Complex64::new(0.0, 0.83).exp();
        let phi2 = SiteOrbital::from_amplitudes(
            phi.amplitudes().iter().map(|z| z * phase).collect(),
        )
        .unwrap();
        let w1 = pk_weights(&psi, &phi2).unwrap();
        // global phase on the state
        let psi2 = SymmetricState::new(
            basis,
            psi.coeffs().iter().map(|z| z * phase).collect(),
        );
        let w2 = pk_weights(&psi2, &phi).unwrap();
        for k in 0..w0.weights.len() {
            assert!((w0.weights[k] - w1.weights[k]).abs() < 1e-11);
            assert!((w0.weights[k] - w2.weights[k]).abs() < 1e-11);
        }
    }

    #[test]
    fn moment_is_monotone_in_gamma() {
        let basis = OccupationBasis::new(4, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        for _ in 0..10 {
            let psi = SymmetricState::random(basis.clone(), &mut rng);
            let phi = random_orbital(3, &mut rng);
            let a1 = alpha_moment(&psi, &phi, 1.0).unwrap();
            let a2 = alpha_moment(&psi, &phi, 2.0).unwrap();
            // eigenvalues of n̂ live in [0,1]: larger exponent, smaller moment
            assert!(a2 <= a1 + 1e-12);
        }
        assert!(alpha_moment(
            &SymmetricState::random(basis, &mut rng),
            &random_orbital(3, &mut rng),
            0.0
        )
        .is_err());
    }

    #[test]
    fn density_of_product_state_is_rank_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        let phi = random_orbital(4, &mut rng);
        let psi = product_state(&phi, 3).unwrap();
        let h = 0.6;
        let mu = reduced_density(&psi, h, &phi).unwrap();
        let u = phi.amplitudes();
        for x in 0..4 {
            for y in 0..4 {
                // kernel should be φ(x)·conj(φ(y)) = u_x conj(u_y)/h
                let expect = u[x] * u[y].conj() / h;
                assert!((mu.kernel[x * 4 + y] - expect).norm() < 1e-12);
            }
        }
        assert!((mu.trace() - 1.0).abs() < 1e-12);
        assert!((mu.condensate_overlap - 1.0).abs() < 1e-12);
    }

    #[test]
    fn depletion_identity_links_density_and_moment() {
        // 1 - ⟨φ, μ φ⟩ = ⟨Ψ, n̂² Ψ⟩ exactly
        let basis = OccupationBasis::new(3, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(81);
        for _ in 0..10 {
            let psi = SymmetricState::random(basis.clone(), &mut rng);
            let phi = random_orbital(4, &mut rng);
            let mu = reduced_density(&psi, 0.5, &phi).unwrap();
            let a2 = alpha_moment(&psi, &phi, 2.0).unwrap();
            assert!(
                (1.0 - mu.condensate_overlap - a2).abs() < 1e-12,
                "identity residual {}",
                (1.0 - mu.condensate_overlap - a2).abs()
            );
        }
    }

    #[test]
    fn density_matches_first_quantized_partial_trace() {
        let basis = OccupationBasis::new(2, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(91);
        let phi = random_orbital(4, &mut rng);
        for _ in 0..5 {
            let psi = SymmetricState::random(basis.clone(), &mut rng);
            let h = 0.7;
            let mu = reduced_density(&psi, h, &phi).unwrap();
            let tensor = to_first_quantized(&psi, TensorBudget::default()).unwrap();
            let oracle = tensor.one_particle_matrix();
            for i in 0..16 {
                assert!(
                    (mu.kernel[i] - oracle[i] / h).norm() < 1e-11,
                    "kernel mismatch at {i}"
                );
            }
        }
    }

    #[test]
    fn density_spectrum_is_positive_and_hermitian() {
        let basis = OccupationBasis::new(3, 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(101);
        let psi = SymmetricState::random(basis, &mut rng);
        let phi = random_orbital(5, &mut rng);
        let mu = reduced_density(&psi, 1.0, &phi).unwrap();
        assert!(mu.hermiticity_residual() < 1e-12);
        let ev = mu.eigenvalues();
        assert!(ev[0] >= -1e-10);
        let sum: f64 = ev.iter().sum();
        assert!((sum - 1.0).abs() < 1e-10);
    }
}
