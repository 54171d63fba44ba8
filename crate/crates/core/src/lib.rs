//! Entanglement of formation of bipartite mixed states.
//!
//! The entanglement of formation of a density matrix is the smallest
//! average pure-state entanglement over all of its pure-state
//! decompositions. Every decomposition with `n` states is reachable from any
//! other by an `n x n` unitary mixing of the subnormalized states, so the
//! problem becomes a minimization over unitaries. This crate computes an
//! analytic gradient for that minimization and drives a Polak-Ribiere
//! conjugate-gradient search with derivative-aware line minimization.
//!
//! Modules:
//!
//! * [`numerics`]: Hermitian eigendecomposition, matrix exponential and
//!   logarithm, partial trace.
//! * [`states`]: density matrices, decompositions, pure-state and average
//!   entanglement.
//! * [`gradient`]: the analytic gradient with respect to unitary generators.
//! * [`optimizer`]: conjugate-gradient minimization, Monte Carlo
//!   certification and random restarts.
//! * [`oracles`]: closed forms for two qubits (concurrence) and for
//!   isotropic states.
//! * [`channels`]: Kraus channels acting locally on a maximally entangled
//!   pair, and probability sweeps.
//! * [`cli`]: the `eof` command-line tool and its file formats.

pub mod channels;
pub mod cli;
pub mod error;
pub mod gradient;
pub mod numerics;
pub mod optimizer;
pub mod oracles;
pub mod states;

pub use error::{Error, Result};
pub use numerics::{CMatrix, CVector};

pub use optimizer::{
    minimize_average_entanglement, minimize_from_decomposition, MinimizationResult, MinimizerConfig,
};
pub use states::{BipartiteDims, Decomposition, DensityMatrix};
