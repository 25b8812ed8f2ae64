//! Spin operators, rotating-frame Hamiltonians, density states and their
//! propagation.

pub mod crossing;
pub mod operators;
pub mod state;
pub mod system;

pub use operators::{
    pair_state_projector, singlet_triplet_basis, spin_operator, total_operator, Axis, CMatrix,
    Observable, ObservableKind, PairState, SpinPair,
};
pub use state::{DensityState, Propagator};
pub use system::{hamiltonian, SpinSystem};
