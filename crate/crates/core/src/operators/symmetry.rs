//! Particle-number and spin operators, and quadratic penalty terms.
//!
//! Spin orbitals are interleaved: mode `2p` is spatial orbital `p` with spin
//! alpha, mode `2p + 1` the same orbital with spin beta.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use super::fermion::FermionOperator;
use super::OperatorError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SymmetryKind {
    Number,
    Sz,
    SSquared,
}

impl SymmetryKind {
    pub fn name(self) -> &'static str {
        match self {
            SymmetryKind::Number => "number",
            SymmetryKind::Sz => "sz",
            SymmetryKind::SSquared => "s_squared",
        }
    }
}

impl fmt::Display for SymmetryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SymmetryKind {
    type Err = OperatorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "number" | "n" => Ok(SymmetryKind::Number),
            "sz" | "s_z" => Ok(SymmetryKind::Sz),
            "s_squared" | "s2" | "ssquared" => Ok(SymmetryKind::SSquared),
            other => Err(OperatorError::UnknownSymmetry(other.to_string())),
        }
    }
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn number_of(mode_count: usize, modes: impl Iterator<Item = usize>) -> FermionOperator {
    modes.fold(FermionOperator::zero(mode_count), |acc, p| {
        acc.add(&FermionOperator::excitation(mode_count, p, p).expect("mode in range"))
            .expect("same mode count")
    })
}

/// `N`, `S_z` or `S² = S₋S₊ + S_z(S_z + 1)`, normal ordered.
pub fn symmetry_operator(
    kind: SymmetryKind,
    mode_count: usize,
) -> Result<FermionOperator, OperatorError> {
    if kind == SymmetryKind::Number {
        return Ok(number_of(mode_count, 0..mode_count));
    }
    if !mode_count.is_multiple_of(2) {
        return Err(OperatorError::OddModeCount(mode_count));
    }
    let n_alpha = number_of(mode_count, (0..mode_count).step_by(2));
    let n_beta = number_of(mode_count, (1..mode_count).step_by(2));
    let sz = n_alpha.sub(&n_beta)?.scale(real(0.5));
    if kind == SymmetryKind::Sz {
        return Ok(sz);
    }
    let s_plus = (0..mode_count / 2).fold(FermionOperator::zero(mode_count), |acc, p| {
        acc.add(&FermionOperator::excitation(mode_count, 2 * p, 2 * p + 1).expect("mode in range"))
            .expect("same mode count")
    });
    let s_minus = s_plus.adjoint();
    let sz_shift = sz.add(&FermionOperator::identity(mode_count))?;
    Ok(s_minus
        .mul(&s_plus)?
        .add(&sz.mul(&sz_shift)?)?
        .normal_order())
}

/// `H + λ (O - o)²`, normal ordered.
pub fn add_penalty(
    h: &FermionOperator,
    o: &FermionOperator,
    target: f64,
    weight: f64,
) -> Result<FermionOperator, OperatorError> {
    if weight < 0.0 || !weight.is_finite() {
        return Err(OperatorError::NegativePenalty(weight));
    }
    if weight == 0.0 {
        return Ok(h.clone());
    }
    let shifted = o.sub(&FermionOperator::constant(o.mode_count(), real(target)))?;
    let penalty = shifted.mul(&shifted)?.scale(real(weight));
    Ok(h.add(&penalty)?.normal_order())
}
