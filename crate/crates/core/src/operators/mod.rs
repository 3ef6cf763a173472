//! Symbolic fermionic and Pauli operator algebra.

pub mod fermion;
pub mod jordan_wigner;
pub mod pauli;
pub mod symmetry;

use thiserror::Error;

pub use fermion::{FermionOperator, Ladder};
pub use jordan_wigner::jordan_wigner;
pub use pauli::{pauli_to_dense, Pauli, PauliOperator, PauliString};
pub use symmetry::{add_penalty, symmetry_operator, SymmetryKind};

/// Terms whose coefficient magnitude falls below this are dropped.
pub const COEFF_PRUNE: f64 = 1e-14;

/// Largest register converted to a dense matrix.
pub const MAX_DENSE_MODES: usize = 12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OperatorError {
    #[error("mode count mismatch: {left} vs {right}")]
    ModeCountMismatch { left: usize, right: usize },
    #[error("qubit count mismatch: {left} vs {right}")]
    QubitCountMismatch { left: usize, right: usize },
    #[error("mode {mode} out of range for {mode_count} modes")]
    ModeOutOfRange { mode: usize, mode_count: usize },
    #[error("{0} qubits exceeds the dense-matrix limit of {MAX_DENSE_MODES}")]
    TooManyQubits(usize),
    #[error("spin operators need an even mode count, got {0}")]
    OddModeCount(usize),
    #[error("penalty weight must be finite and non-negative, got {0}")]
    NegativePenalty(f64),
    #[error("unknown symmetry operator '{0}'")]
    UnknownSymmetry(String),
}
