//! Variational channel state preparation and quantum subspace expansion for
//! small molecular Hamiltonians under noise.

pub mod channels;
pub mod experiment;
pub mod format;
pub mod linalg;
pub mod molecule;
pub mod operators;
pub mod qse;
pub mod random;
pub mod rdm;
pub mod vcs;
