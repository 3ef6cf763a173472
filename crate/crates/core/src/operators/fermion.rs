//! Second-quantized fermionic operators.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use super::{OperatorError, COEFF_PRUNE, MAX_DENSE_MODES};
use crate::format::fmt_complex;
use crate::linalg::ComplexMatrix;

/// A single creation (`dagger`) or annihilation operator on `mode`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Ladder {
    pub mode: usize,
    pub dagger: bool,
}

impl Ladder {
    pub const fn create(mode: usize) -> Self {
        Self { mode, dagger: true }
    }

    pub const fn annihilate(mode: usize) -> Self {
        Self {
            mode,
            dagger: false,
        }
    }

    pub const fn adjoint(self) -> Self {
        Self {
            mode: self.mode,
            dagger: !self.dagger,
        }
    }
}

impl fmt::Display for Ladder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.dagger {
            write!(f, "{}^", self.mode)
        } else {
            write!(f, "{}", self.mode)
        }
    }
}

/// Weighted sum of products of ladder operators over `mode_count` modes.
///
/// The empty product is the identity.
#[derive(Clone, Debug, PartialEq)]
pub struct FermionOperator {
    mode_count: usize,
    terms: BTreeMap<Vec<Ladder>, Complex64>,
}

impl FermionOperator {
    pub fn zero(mode_count: usize) -> Self {
        Self {
            mode_count,
            terms: BTreeMap::new(),
        }
    }

    pub fn identity(mode_count: usize) -> Self {
        Self::constant(mode_count, Complex64::new(1.0, 0.0))
    }

    pub fn constant(mode_count: usize, value: Complex64) -> Self {
        let mut op = Self::zero(mode_count);
        op.accumulate(Vec::new(), value);
        op
    }

    /// Single product term `coeff * ladders[0] ladders[1] ...`.
    pub fn term(
        mode_count: usize,
        ladders: &[Ladder],
        coeff: Complex64,
    ) -> Result<Self, OperatorError> {
        if let Some(bad) = ladders.iter().find(|l| l.mode >= mode_count) {
            return Err(OperatorError::ModeOutOfRange {
                mode: bad.mode,
                mode_count,
            });
        }
        let mut op = Self::zero(mode_count);
        op.accumulate(ladders.to_vec(), coeff);
        Ok(op)
    }

    pub fn create(mode_count: usize, mode: usize) -> Result<Self, OperatorError> {
        Self::term(
            mode_count,
            &[Ladder::create(mode)],
            Complex64::new(1.0, 0.0),
        )
    }

    pub fn annihilate(mode_count: usize, mode: usize) -> Result<Self, OperatorError> {
        Self::term(
            mode_count,
            &[Ladder::annihilate(mode)],
            Complex64::new(1.0, 0.0),
        )
    }

    /// `a_p† a_q`.
    pub fn excitation(mode_count: usize, p: usize, q: usize) -> Result<Self, OperatorError> {
        Self::term(
            mode_count,
            &[Ladder::create(p), Ladder::annihilate(q)],
            Complex64::new(1.0, 0.0),
        )
    }

    pub fn mode_count(&self) -> usize {
        self.mode_count
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[Ladder], Complex64)> {
        self.terms.iter().map(|(k, &v)| (k.as_slice(), v))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, ladders: &[Ladder]) -> Complex64 {
        self.terms
            .get(ladders)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    /// Adds `coeff` to the term keyed by `ladders`, pruning it if it falls below 1e-14.
    pub(crate) fn accumulate(&mut self, ladders: Vec<Ladder>, coeff: Complex64) {
        match self.terms.entry(ladders) {
            Entry::Occupied(mut e) => {
                *e.get_mut() += coeff;
                if e.get().norm() < COEFF_PRUNE {
                    e.remove();
                }
            }
            Entry::Vacant(e) => {
                if coeff.norm() >= COEFF_PRUNE {
                    e.insert(coeff);
                }
            }
        }
    }

    fn prune(&mut self) {
        self.terms.retain(|_, v| v.norm() >= COEFF_PRUNE);
    }

    fn check(&self, other: &Self) -> Result<(), OperatorError> {
        if self.mode_count != other.mode_count {
            return Err(OperatorError::ModeCountMismatch {
                left: self.mode_count,
                right: other.mode_count,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, OperatorError> {
        self.check(other)?;
        let mut out = self.clone();
        for (k, &v) in &other.terms {
            *out.terms
                .entry(k.clone())
                .or_insert(Complex64::new(0.0, 0.0)) += v;
        }
        out.prune();
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, OperatorError> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = Self {
            mode_count: self.mode_count,
            terms: self
                .terms
                .iter()
                .map(|(k, &v)| (k.clone(), v * s))
                .collect(),
        };
        out.prune();
        out
    }

    /// Operator product `self * other` (sequences concatenated, not reordered).
    pub fn mul(&self, other: &Self) -> Result<Self, OperatorError> {
        self.check(other)?;
        let mut terms: BTreeMap<Vec<Ladder>, Complex64> = BTreeMap::new();
        for (ka, &va) in &self.terms {
            for (kb, &vb) in &other.terms {
                let mut key = ka.clone();
                key.extend_from_slice(kb);
                *terms.entry(key).or_insert(Complex64::new(0.0, 0.0)) += va * vb;
            }
        }
        let mut out = Self {
            mode_count: self.mode_count,
            terms,
        };
        out.prune();
        Ok(out)
    }

    /// Hermitian adjoint: sequences reversed, daggers flipped, coefficients conjugated.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zero(self.mode_count);
        for (k, &v) in &self.terms {
            let key: Vec<Ladder> = k.iter().rev().map(|l| l.adjoint()).collect();
            *out.terms.entry(key).or_insert(Complex64::new(0.0, 0.0)) += v.conj();
        }
        out.prune();
        out
    }

    /// `AB - BA`, normal ordered.
    pub fn commutator(&self, other: &Self) -> Result<Self, OperatorError> {
        let ab = self.mul(other)?;
        let ba = other.mul(self)?;
        Ok(ab.sub(&ba)?.normal_order())
    }

    /// Rewrites every term with creations left of annihilations, creations in
    /// ascending and annihilations in descending mode order, using the
    /// canonical anticommutation relations. Terms with a repeated ladder
    /// operator vanish.
    pub fn normal_order(&self) -> Self {
        let mut out = Self::zero(self.mode_count);
        let mut work: Vec<(Vec<Ladder>, Complex64)> =
            self.terms.iter().map(|(k, &v)| (k.clone(), v)).collect();
        while let Some((mut seq, coeff)) = work.pop() {
            if coeff.norm() == 0.0 {
                continue;
            }
            match first_disorder(&seq) {
                None => {
                    *out.terms.entry(seq).or_insert(Complex64::new(0.0, 0.0)) += coeff;
                }
                Some((_, Disorder::Repeated)) => {}
                Some((i, Disorder::Swap)) => {
                    seq.swap(i, i + 1);
                    work.push((seq, -coeff));
                }
                Some((i, Disorder::Contract)) => {
                    // a_p a_q† = δ_pq - a_q† a_p
                    if seq[i].mode == seq[i + 1].mode {
                        let mut contracted = seq.clone();
                        contracted.drain(i..i + 2);
                        work.push((contracted, coeff));
                    }
                    seq.swap(i, i + 1);
                    work.push((seq, -coeff));
                }
            }
        }
        out.prune();
        out
    }

    /// `max(#creations, #annihilations)` of a single term.
    pub fn term_rank(ladders: &[Ladder]) -> usize {
        let cre = ladders.iter().filter(|l| l.dagger).count();
        cre.max(ladders.len() - cre)
    }

    pub fn max_rank(&self) -> usize {
        self.terms
            .keys()
            .map(|k| Self::term_rank(k))
            .max()
            .unwrap_or(0)
    }

    /// True when every term has equal creation and annihilation counts.
    pub fn conserves_number(&self) -> bool {
        self.terms
            .keys()
            .all(|k| 2 * k.iter().filter(|l| l.dagger).count() == k.len())
    }

    /// Largest coefficient magnitude of `self - other` after normal ordering both.
    pub fn distance(&self, other: &Self) -> Result<f64, OperatorError> {
        let d = self.sub(other)?.normal_order();
        Ok(d.terms.values().map(|v| v.norm()).fold(0.0, f64::max))
    }

    /// Dense `2^M x 2^M` matrix in the occupation basis (mode 0 is the most
    /// significant bit), built by acting with ladder operators on basis states.
    /// Agrees with the Jordan-Wigner route.
    pub fn to_dense(&self) -> Result<ComplexMatrix, OperatorError> {
        let m = self.mode_count;
        if m > MAX_DENSE_MODES {
            return Err(OperatorError::TooManyQubits(m));
        }
        let dim = 1usize << m;
        let mut out = ComplexMatrix::zeros(dim);
        for (seq, &coeff) in &self.terms {
            for col in 0..dim {
                if let Some((row, sign)) = apply_ladders(seq, col, m) {
                    let v = out.get(row, col) + coeff * sign;
                    out.set(row, col, v);
                }
            }
        }
        Ok(out)
    }

    /// Canonical text: one `coeff [ops]` line per term, lines sorted lexicographically.
    pub fn render(&self) -> String {
        let mut lines: Vec<(String, String)> = self
            .terms
            .iter()
            .map(|(k, &v)| {
                let ops: Vec<String> = k.iter().map(|l| l.to_string()).collect();
                (format!("[{}]", ops.join(" ")), fmt_complex(v))
            })
            .collect();
        lines.sort();
        lines
            .into_iter()
            .map(|(ops, c)| format!("{c} {ops}"))
            .collect::<Vec<_>>()
            .join("\n")
    }
}

impl fmt::Display for FermionOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

enum Disorder {
    Swap,
    Contract,
    Repeated,
}

fn first_disorder(seq: &[Ladder]) -> Option<(usize, Disorder)> {
    for i in 0..seq.len().saturating_sub(1) {
        let (x, y) = (seq[i], seq[i + 1]);
        match (x.dagger, y.dagger) {
            (false, true) => return Some((i, Disorder::Contract)),
            (true, true) => {
                if x.mode == y.mode {
                    return Some((i, Disorder::Repeated));
                }
                if x.mode > y.mode {
                    return Some((i, Disorder::Swap));
                }
            }
            (false, false) => {
                if x.mode == y.mode {
                    return Some((i, Disorder::Repeated));
                }
                if x.mode < y.mode {
                    return Some((i, Disorder::Swap));
                }
            }
            (true, false) => {}
        }
    }
    None
}

/// Parity sign of the occupied modes below `mode` in basis state `state`.
#[inline]
pub(crate) fn parity_below(state: usize, mode: usize, mode_count: usize) -> f64 {
    let above = state >> (mode_count - mode);
    if above.count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Applies one ladder operator to basis state `state`; `None` if it annihilates it.
#[inline]
pub(crate) fn apply_ladder(l: Ladder, state: usize, mode_count: usize) -> Option<(usize, f64)> {
    let bit = 1usize << (mode_count - 1 - l.mode);
    let occupied = state & bit != 0;
    if occupied == l.dagger {
        return None;
    }
    Some((state ^ bit, parity_below(state, l.mode, mode_count)))
}

/// Applies a product of ladders (rightmost acts first).
pub(crate) fn apply_ladders(
    seq: &[Ladder],
    state: usize,
    mode_count: usize,
) -> Option<(usize, f64)> {
    let mut s = state;
    let mut sign = 1.0;
    for &l in seq.iter().rev() {
        let (next, sg) = apply_ladder(l, s, mode_count)?;
        s = next;
        sign *= sg;
    }
    Some((s, sign))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    #[test]
    fn adjoint_of_creation() {
        let a0d = FermionOperator::create(1, 0).unwrap();
        assert_eq!(a0d.adjoint(), FermionOperator::annihilate(1, 0).unwrap());
        assert_eq!(a0d.adjoint().adjoint(), a0d);
    }

    #[test]
    fn commutator_with_self_vanishes() {
        let a = FermionOperator::excitation(3, 0, 2)
            .unwrap()
            .add(&FermionOperator::excitation(3, 1, 1).unwrap())
            .unwrap();
        assert!(a.commutator(&a).unwrap().is_empty());
    }

    #[test]
    fn anticommutation_rewrites() {
        let m = 2;
        let op = FermionOperator::term(m, &[Ladder::annihilate(0), Ladder::create(0)], one())
            .unwrap()
            .normal_order();
        let expected = FermionOperator::identity(m)
            .sub(&FermionOperator::excitation(m, 0, 0).unwrap())
            .unwrap();
        assert_eq!(op, expected);

        let op = FermionOperator::term(m, &[Ladder::annihilate(1), Ladder::create(0)], one())
            .unwrap()
            .normal_order();
        let expected = FermionOperator::excitation(m, 0, 1)
            .unwrap()
            .scale(Complex64::new(-1.0, 0.0));
        assert_eq!(op, expected);
    }

    #[test]
    fn repeated_ladder_vanishes() {
        let op = FermionOperator::term(3, &[Ladder::create(1), Ladder::create(1)], one()).unwrap();
        assert!(op.normal_order().is_empty());
    }

    #[test]
    fn canonical_order_of_output() {
        let op = FermionOperator::term(
            4,
            &[
                Ladder::annihilate(0),
                Ladder::create(3),
                Ladder::annihilate(2),
                Ladder::create(1),
            ],
            one(),
        )
        .unwrap()
        .normal_order();
        for (seq, _) in op.terms() {
            let cre: Vec<usize> = seq.iter().filter(|l| l.dagger).map(|l| l.mode).collect();
            let ann: Vec<usize> = seq.iter().filter(|l| !l.dagger).map(|l| l.mode).collect();
            assert!(seq[..cre.len()].iter().all(|l| l.dagger));
            assert!(cre.windows(2).all(|w| w[0] < w[1]));
            assert!(ann.windows(2).all(|w| w[0] > w[1]));
        }
    }

    #[test]
    fn mode_errors() {
        assert!(matches!(
            FermionOperator::create(2, 2),
            Err(OperatorError::ModeOutOfRange { .. })
        ));
        let a = FermionOperator::identity(2);
        let b = FermionOperator::identity(3);
        assert!(matches!(
            a.add(&b),
            Err(OperatorError::ModeCountMismatch { .. })
        ));
        assert!(matches!(
            a.mul(&b),
            Err(OperatorError::ModeCountMismatch { .. })
        ));
    }

    #[test]
    fn rendering() {
        let op = FermionOperator::excitation(2, 0, 1)
            .unwrap()
            .scale(Complex64::new(-0.5, 0.0));
        assert_eq!(op.render(), "(-0.5+0i) [0^ 1]");
    }

    #[test]
    fn rank_and_number_conservation() {
        let op = FermionOperator::term(
            4,
            &[Ladder::create(0), Ladder::create(1), Ladder::annihilate(2)],
            one(),
        )
        .unwrap();
        assert_eq!(op.max_rank(), 2);
        assert!(!op.conserves_number());
        assert!(FermionOperator::excitation(4, 1, 2)
            .unwrap()
            .conserves_number());
    }
}
