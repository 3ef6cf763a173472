//! Pauli-string operators on qubit registers.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use super::{OperatorError, COEFF_PRUNE, MAX_DENSE_MODES};
use crate::format::fmt_complex;
use crate::linalg::ComplexMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const NON_IDENTITY: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    /// `self * other = phase * result`.
    pub fn times(self, other: Pauli) -> (Complex64, Pauli) {
        use Pauli::*;
        let one = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        match (self, other) {
            (I, p) | (p, I) => (one, p),
            (a, b) if a == b => (one, I),
            (X, Y) => (i, Z),
            (Y, X) => (-i, Z),
            (Y, Z) => (i, X),
            (Z, Y) => (-i, X),
            (Z, X) => (i, Y),
            (X, Z) => (-i, Y),
            _ => unreachable!(),
        }
    }

    /// Matrix element `<row|P|col>` for single-qubit basis states.
    fn element(self, row: usize, col: usize) -> Complex64 {
        let z = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        match self {
            Pauli::I => {
                if row == col {
                    one
                } else {
                    z
                }
            }
            Pauli::X => {
                if row != col {
                    one
                } else {
                    z
                }
            }
            Pauli::Y => match (row, col) {
                (0, 1) => Complex64::new(0.0, -1.0),
                (1, 0) => Complex64::new(0.0, 1.0),
                _ => z,
            },
            Pauli::Z => match (row, col) {
                (0, 0) => one,
                (1, 1) => -one,
                _ => z,
            },
        }
    }

    fn letter(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    fn flips(self) -> bool {
        matches!(self, Pauli::X | Pauli::Y)
    }
}

/// Tensor product of single-qubit Paulis, one letter per qubit.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PauliString(Vec<Pauli>);

impl PauliString {
    pub fn identity(n: usize) -> Self {
        Self(vec![Pauli::I; n])
    }

    pub fn new(letters: Vec<Pauli>) -> Self {
        Self(letters)
    }

    /// Identity except for the listed `(qubit, letter)` pairs.
    pub fn from_sparse(n: usize, factors: &[(usize, Pauli)]) -> Result<Self, OperatorError> {
        let mut s = Self::identity(n);
        for &(q, p) in factors {
            if q >= n {
                return Err(OperatorError::ModeOutOfRange {
                    mode: q,
                    mode_count: n,
                });
            }
            s.0[q] = p;
        }
        Ok(s)
    }

    pub fn qubit_count(&self) -> usize {
        self.0.len()
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.0
    }

    pub fn weight(&self) -> usize {
        self.0.iter().filter(|&&p| p != Pauli::I).count()
    }

    pub fn is_identity(&self) -> bool {
        self.weight() == 0
    }

    /// `self * other = phase * result`; the phase is one of ±1, ±i.
    pub fn mul(&self, other: &PauliString) -> (Complex64, PauliString) {
        let mut phase = Complex64::new(1.0, 0.0);
        let letters = self
            .0
            .iter()
            .zip(&other.0)
            .map(|(&a, &b)| {
                let (ph, p) = a.times(b);
                phase *= ph;
                p
            })
            .collect();
        (phase, PauliString(letters))
    }

    /// Bit mask (qubit 0 most significant) of qubits flipped by X or Y.
    fn flip_mask(&self) -> usize {
        let n = self.0.len();
        self.0
            .iter()
            .enumerate()
            .filter(|(_, p)| p.flips())
            .fold(0, |m, (q, _)| m | (1 << (n - 1 - q)))
    }

    /// Nonzero entry of column `col`: `(row, value)`.
    pub fn column_entry(&self, col: usize) -> (usize, Complex64) {
        let n = self.0.len();
        let row = col ^ self.flip_mask();
        let mut v = Complex64::new(1.0, 0.0);
        for (q, &p) in self.0.iter().enumerate() {
            let shift = n - 1 - q;
            v *= p.element((row >> shift) & 1, (col >> shift) & 1);
        }
        (row, v)
    }

    /// Compact label such as `Z0 X1`; empty for the identity.
    pub fn label(&self) -> String {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &p)| p != Pauli::I)
            .map(|(q, p)| format!("{}{}", p.letter(), q))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.label())
    }
}

/// Weighted sum of Pauli strings on `qubit_count` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliOperator {
    qubit_count: usize,
    terms: BTreeMap<PauliString, Complex64>,
}

impl PauliOperator {
    pub fn zero(qubit_count: usize) -> Self {
        Self {
            qubit_count,
            terms: BTreeMap::new(),
        }
    }

    pub fn identity(qubit_count: usize) -> Self {
        Self::from_string(PauliString::identity(qubit_count), Complex64::new(1.0, 0.0))
    }

    pub fn from_string(string: PauliString, coeff: Complex64) -> Self {
        let mut op = Self::zero(string.qubit_count());
        if coeff.norm() >= COEFF_PRUNE {
            op.terms.insert(string, coeff);
        }
        op
    }

    /// `coeff * P_q` for one qubit.
    pub fn single(
        qubit_count: usize,
        qubit: usize,
        pauli: Pauli,
        coeff: Complex64,
    ) -> Result<Self, OperatorError> {
        Ok(Self::from_string(
            PauliString::from_sparse(qubit_count, &[(qubit, pauli)])?,
            coeff,
        ))
    }

    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PauliString, Complex64)> {
        self.terms.iter().map(|(k, &v)| (k, v))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, s: &PauliString) -> Complex64 {
        self.terms
            .get(s)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    /// The only term, when the operator is a single weighted string.
    pub fn single_term(&self) -> Option<(&PauliString, Complex64)> {
        if self.terms.len() == 1 {
            self.terms.iter().next().map(|(k, &v)| (k, v))
        } else {
            None
        }
    }

    fn prune(&mut self) {
        self.terms.retain(|_, v| v.norm() >= COEFF_PRUNE);
    }

    fn check(&self, other: &Self) -> Result<(), OperatorError> {
        if self.qubit_count != other.qubit_count {
            return Err(OperatorError::QubitCountMismatch {
                left: self.qubit_count,
                right: other.qubit_count,
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
            qubit_count: self.qubit_count,
            terms: self
                .terms
                .iter()
                .map(|(k, &v)| (k.clone(), v * s))
                .collect(),
        };
        out.prune();
        out
    }

    pub fn mul(&self, other: &Self) -> Result<Self, OperatorError> {
        self.check(other)?;
        let mut out = Self::zero(self.qubit_count);
        for (ka, &va) in &self.terms {
            for (kb, &vb) in &other.terms {
                let (phase, s) = ka.mul(kb);
                *out.terms.entry(s).or_insert(Complex64::new(0.0, 0.0)) += phase * va * vb;
            }
        }
        out.prune();
        Ok(out)
    }

    /// Pauli strings are self-adjoint, so only coefficients are conjugated.
    pub fn adjoint(&self) -> Self {
        Self {
            qubit_count: self.qubit_count,
            terms: self
                .terms
                .iter()
                .map(|(k, v)| (k.clone(), v.conj()))
                .collect(),
        }
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.terms.values().all(|v| v.im.abs() <= tol)
    }

    /// Dense `2^n x 2^n` matrix, qubit 0 as the leftmost Kronecker factor.
    pub fn to_dense(&self) -> Result<ComplexMatrix, OperatorError> {
        if self.qubit_count > MAX_DENSE_MODES {
            return Err(OperatorError::TooManyQubits(self.qubit_count));
        }
        let dim = 1usize << self.qubit_count;
        let mut out = ComplexMatrix::zeros(dim);
        for (s, &coeff) in &self.terms {
            for col in 0..dim {
                let (row, v) = s.column_entry(col);
                out.set(row, col, out.get(row, col) + coeff * v);
            }
        }
        Ok(out)
    }

    /// Canonical text: one `coeff [string]` line per term, lines sorted lexicographically.
    pub fn render(&self) -> String {
        let mut lines: Vec<(String, String)> = self
            .terms
            .iter()
            .map(|(k, &v)| (k.to_string(), fmt_complex(v)))
            .collect();
        lines.sort();
        lines
            .into_iter()
            .map(|(s, c)| format!("{c} {s}"))
            .collect::<Vec<_>>()
            .join("\n")
    }
}

/// Free-function form of [`PauliOperator::to_dense`].
pub fn pauli_to_dense(op: &PauliOperator) -> Result<ComplexMatrix, OperatorError> {
    op.to_dense()
}

impl fmt::Display for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}
