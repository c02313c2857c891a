//! Ground-state solvers for one-dimensional electrons coupled to quantized
//! cavity photon modes.
//!
//! The crate provides three layers:
//!
//! - an exact-diagonalization model of spinless electrons on a periodic grid
//!   minimally coupled to a finite set of photon modes, with external scalar
//!   potentials, transversal currents, and vector potentials
//!   ([`hamiltonian`], [`lanczos`], [`observables`]);
//! - the coherent-displacement machinery that trades an external vector
//!   potential for an external current, with numerical equivalence checks
//!   ([`displacement`]);
//! - a Maxwell-Kohn-Sham self-consistent solver (single-particle orbitals
//!   coupled to a classical static field) and falsification harnesses for the
//!   uniqueness of the external-pair to internal-pair map ([`scf`], [`hk`]).
//!
//! Natural units `hbar = c = m = |e| = eps0 = 1` are used throughout.

pub mod error;
pub mod grid;
pub mod field;
pub mod fock;
pub mod fermion;
pub mod hamiltonian;
pub mod hk;
pub mod lanczos;
pub mod displacement;
pub mod observables;
pub mod scf;
pub mod linalg;

pub use error::{CoreError, Result};
pub use field::{
    b_to_current, from_mode_coefficients, solve_static_maxwell, to_mode_coefficients,
    ClassicalField, TransverseCurrent,
};
pub use grid::{Grid1D, ModeSet, ScalarField};
pub use hamiltonian::{
    build_hamiltonian, ExternalPair, HamiltonianSpec, PauliFierzOp, SoftCoulomb,
};
pub use lanczos::{EigOptions, HermitianOp};
pub use observables::{
    density, energy_decomposition, field_expectation, ground_state, internal_pair,
    maxwell_residual, physical_current, recovered_current, CompositeState, GroundStateResult,
    InternalPair,
};
pub use scf::{scf_loop, SCFConfig, SCFResult};
