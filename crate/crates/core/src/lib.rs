//! Desk-scale laboratory for the mean-field dynamics of interacting bosons.
//!
//! The crate is organised around five layers:
//!
//! * [`grid`] — periodic 1-D grids with spectral differentiation and
//!   convolution; the substrate for every orbital in the crate.
//! * [`meanfield`] — split-step propagation of the effective one-body
//!   equation (free, Hartree and Gross-Pitaevskii nonlinearities) with
//!   time-dependent trap potentials and energy/regularity diagnostics.
//! * [`manybody`] — exact dynamics of N bosons on an M-site ring, both in
//!   the symmetric occupation-number basis (matrix-free, Krylov-propagated)
//!   and as a first-quantized dense tensor used as an oracle.
//! * [`counting`] — the projector calculus on top of both backends: spectral
//!   weights of the excitation-number operator, hat operators, counting
//!   moments, reduced density matrices and the derivative functionals of the
//!   counting measure.
//! * [`scattering`] — the radial zero-energy two-body problem in 3-D:
//!   scattering lengths, Born approximation, and the compensated
//!   short-range structure (W, f, g) with its bound checks.
//!
//! [`experiments`] drives convergence sweeps over the particle number and
//! writes reproducible CSV/JSON records.

pub mod counting;
pub mod experiments;
pub mod grid;
pub mod manybody;
pub mod meanfield;
pub mod scattering;

pub use num_complex::Complex64;
