//! Exact dynamics of quantum discord and entanglement for two central qubits
//! coupled to an isotropic Lipkin-Meshkov-Glick (LMG) spin bath.
//!
//! The total Hamiltonian conserves the total magnetization, so it splits into
//! invariant subspaces of dimension at most three. Starting from the bath
//! ground state and an X-shaped two-qubit state, the reduced two-qubit density
//! matrix stays an X state and can be written down from a handful of 3x3
//! propagators. The crate is organised bottom-up:
//!
//! - [`model`]: parameters, bath phase, Hamiltonian blocks, initial states
//! - [`propagator`]: block diagonalization and `exp(-iHt)` per subspace
//! - [`reduced_dynamics`]: the reduced two-qubit state at time `t`
//! - [`correlations`]: entropies, discord, concurrence, entanglement of formation
//! - [`oracle`]: dense full-space evolution and brute-force discord, used for validation
//! - [`cli`]: time series, parameter sweeps, figure presets and CSV output

#![allow(clippy::needless_range_loop)]

pub mod cli;
pub mod correlations;
pub mod error;
pub mod model;
pub mod oracle;
pub mod propagator;
pub mod reduced_dynamics;

pub use error::{Error, Result};
