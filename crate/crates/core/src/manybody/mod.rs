//! Exact N-boson dynamics on a periodic lattice.
//!
//! Two backends with one bridge: the occupation-number basis spans exactly
//! the symmetric sector (symmetry is structural, not enforced), while the
//! first-quantized tensor backend spells out distinguished-coordinate
//! operators for oracle checks.

pub mod basis;
pub mod firstq;
pub mod krylov;
pub mod operator;
pub mod state;

pub use basis::{OccupationBasis, DIMENSION_GUARD};
pub use firstq::{
    from_first_quantized, to_first_quantized, FirstQuantizedState, TensorBudget, TensorError,
};
pub use krylov::{evolve_krylov, expm_apply, KrylovError, KrylovOptions, ManyBodySample};
pub use operator::{
    HamiltonianBuilder, LatticeConfig, OperatorError, PairInteraction, RingOperator,
};
pub use state::{product_state, SiteOrbital, StateError, SymmetricState};
