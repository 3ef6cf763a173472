//! Quantum subspace expansion around a pure or mixed reference.
//!
//! A basis `{E_a}` of operators spans `{E_a|Ψ⟩}`; the subspace Hamiltonian and
//! metric are `H[a,b] = Tr[E_a† H E_b ρ]` and `S[a,b] = Tr[E_a† E_b ρ]`.

mod approx;
mod lr;

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::linalg::{generalized_eigensolve, ComplexMatrix, LinalgError, Spectrum};
use crate::operators::{
    jordan_wigner, FermionOperator, OperatorError, Pauli, PauliOperator, PauliString,
    MAX_DENSE_MODES,
};
use crate::rdm::{RdmError, RdmSource};

pub use approx::{approximate_lr, expectation_from_rdms, ApproxMethod, ApproxOptions};
pub use lr::build_lr_from_rdms;

/// Default relative metric cutoff for subspace problems.
pub const QSE_METRIC_CUTOFF: f64 = 1e-8;

/// Largest mode count for fermionic bases.
pub const MAX_BASIS_MODES: usize = 8;

#[derive(Debug, Error)]
pub enum QseError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("no subspace states with {name} within {window} of {target}")]
    EmptySector {
        name: String,
        target: f64,
        window: f64,
    },
    #[error("subspace problem has no '{0}' matrix")]
    MissingSymmetry(String),
    #[error("normal-ordered term of rank {0} needs an RDM beyond the 3-RDM")]
    RankExceeded(usize),
    #[error("term {0} does not conserve particle number")]
    NonConserving(String),
    #[error("unsupported basis: {0}")]
    UnsupportedBasis(String),
    #[error("{0} exceeds the basis size limit")]
    TooLarge(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Rdm(#[from] RdmError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasisKind {
    Fermionic,
    Qubit,
}

impl fmt::Display for BasisKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BasisKind::Fermionic => "fermionic",
            BasisKind::Qubit => "qubit",
        })
    }
}

/// Which single excitations `a_i†a_j` enter a fermionic basis.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ExcitationFilter {
    #[default]
    All,
    /// Only `i`, `j` of equal spin, so `S_z` eigenstates stay in their sector.
    SpinConserving,
}

/// One expansion operator.
#[derive(Clone, Debug, PartialEq)]
pub enum BasisElement {
    Identity,
    /// Product of excitations `a_i†a_j`, left to right.
    Excitation(Vec<(usize, usize)>),
    Pauli(PauliString),
}

impl BasisElement {
    pub fn label(&self) -> String {
        match self {
            BasisElement::Identity => "g".to_string(),
            BasisElement::Excitation(f) => f
                .iter()
                .map(|(i, j)| format!("{i}^ {j}"))
                .collect::<Vec<_>>()
                .join(" "),
            BasisElement::Pauli(s) => s.label(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExpansionBasis {
    pub kind: BasisKind,
    pub order: usize,
    pub mode_count: usize,
    pub includes_reference: bool,
    pub elements: Vec<BasisElement>,
    /// Each element as a Pauli sum (fermionic elements mapped by Jordan-Wigner).
    pub operators: Vec<PauliOperator>,
}

impl ExpansionBasis {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn labels(&self) -> Vec<String> {
        self.elements.iter().map(BasisElement::label).collect()
    }

    /// Single-excitation pairs of an order-1 fermionic basis, `None` for the identity.
    pub(crate) fn single_excitations(&self) -> Result<Vec<Option<(usize, usize)>>, QseError> {
        self.elements
            .iter()
            .map(|e| match e {
                BasisElement::Identity => Ok(None),
                BasisElement::Excitation(f) if f.len() == 1 => Ok(Some(f[0])),
                other => Err(QseError::UnsupportedBasis(format!(
                    "RDM routes need single excitations, found '{}'",
                    other.label()
                ))),
            })
            .collect()
    }

    /// Only the reference operator.
    pub fn reference_only(mode_count: usize) -> Self {
        Self {
            kind: BasisKind::Fermionic,
            order: 0,
            mode_count,
            includes_reference: true,
            elements: vec![BasisElement::Identity],
            operators: vec![PauliOperator::identity(mode_count)],
        }
    }
}

fn excitation_operator(
    modes: usize,
    factors: &[(usize, usize)],
) -> Result<FermionOperator, QseError> {
    let mut op = FermionOperator::identity(modes);
    for &(i, j) in factors {
        op = op.mul(&FermionOperator::excitation(modes, i, j)?)?;
    }
    Ok(op.normal_order())
}

/// `{I} ∪ {a_i†a_j} ∪ {a_i†a_j a_k†a_l}` up to order `k`; exact duplicates
/// (after normal ordering) and vanishing products are removed.
pub fn fermionic_basis(
    mode_count: usize,
    order: usize,
    includes_reference: bool,
    filter: ExcitationFilter,
) -> Result<ExpansionBasis, QseError> {
    if mode_count > MAX_BASIS_MODES {
        return Err(QseError::TooLarge(format!("{mode_count} modes")));
    }
    if !(1..=2).contains(&order) {
        return Err(QseError::UnsupportedBasis(format!(
            "fermionic order {order}"
        )));
    }
    let singles: Vec<(usize, usize)> = (0..mode_count)
        .flat_map(|i| (0..mode_count).map(move |j| (i, j)))
        .filter(|&(i, j)| filter == ExcitationFilter::All || i % 2 == j % 2)
        .collect();
    let mut elements = Vec::new();
    let mut forms: Vec<FermionOperator> = Vec::new();
    if includes_reference {
        elements.push(BasisElement::Identity);
        forms.push(FermionOperator::identity(mode_count));
    }
    let mut candidates: Vec<Vec<(usize, usize)>> = singles.iter().map(|&s| vec![s]).collect();
    if order == 2 {
        for &a in &singles {
            for &b in &singles {
                candidates.push(vec![a, b]);
            }
        }
    }
    for factors in candidates {
        let form = excitation_operator(mode_count, &factors)?;
        if form.is_empty()
            || forms
                .iter()
                .any(|f| f.distance(&form).map(|d| d < 1e-12).unwrap_or(false))
        {
            continue;
        }
        forms.push(form);
        elements.push(BasisElement::Excitation(factors));
    }
    let operators = forms.iter().map(jordan_wigner).collect();
    Ok(ExpansionBasis {
        kind: BasisKind::Fermionic,
        order,
        mode_count,
        includes_reference,
        elements,
        operators,
    })
}

/// Identity, all single-qubit Paulis, and for order 2 all two-qubit products
/// on distinct qubits; identity is always first.
pub fn qubit_basis(qubit_count: usize, order: usize) -> Result<ExpansionBasis, QseError> {
    if qubit_count > MAX_DENSE_MODES {
        return Err(QseError::TooLarge(format!("{qubit_count} qubits")));
    }
    if !(1..=2).contains(&order) {
        return Err(QseError::UnsupportedBasis(format!("qubit order {order}")));
    }
    let mut strings = vec![PauliString::identity(qubit_count)];
    for q in 0..qubit_count {
        for p in Pauli::NON_IDENTITY {
            strings.push(PauliString::from_sparse(qubit_count, &[(q, p)])?);
        }
    }
    if order == 2 {
        for q1 in 0..qubit_count {
            for q2 in q1 + 1..qubit_count {
                for p1 in Pauli::NON_IDENTITY {
                    for p2 in Pauli::NON_IDENTITY {
                        strings.push(PauliString::from_sparse(
                            qubit_count,
                            &[(q1, p1), (q2, p2)],
                        )?);
                    }
                }
            }
        }
    }
    let mut seen = std::collections::BTreeSet::new();
    strings.retain(|s| seen.insert(s.clone()));
    let operators = strings
        .iter()
        .map(|s| PauliOperator::from_string(s.clone(), Complex64::new(1.0, 0.0)))
        .collect();
    let elements = strings
        .into_iter()
        .map(|s| {
            if s.is_identity() {
                BasisElement::Identity
            } else {
                BasisElement::Pauli(s)
            }
        })
        .collect();
    Ok(ExpansionBasis {
        kind: BasisKind::Qubit,
        order,
        mode_count: qubit_count,
        includes_reference: true,
        elements,
        operators,
    })
}

/// Subspace Hamiltonian, metric and symmetry matrices.
///
/// `coefficients` maps the current coordinates back onto the original basis
/// (identity until a symmetry projection is applied).
#[derive(Clone, Debug)]
pub struct SubspaceProblem {
    pub basis: ExpansionBasis,
    pub h_sub: ComplexMatrix,
    pub s_sub: ComplexMatrix,
    pub symmetry_subs: BTreeMap<String, ComplexMatrix>,
    pub coefficients: DMatrix<Complex64>,
    /// Largest anti-Hermitian part removed from any assembled matrix.
    pub asymmetry: f64,
}

impl SubspaceProblem {
    pub(crate) fn assemble(
        basis: ExpansionBasis,
        h_sub: ComplexMatrix,
        s_sub: ComplexMatrix,
        symmetry_subs: BTreeMap<String, ComplexMatrix>,
    ) -> Self {
        let mut asymmetry = h_sub.hermitian_asymmetry().max(s_sub.hermitian_asymmetry());
        for m in symmetry_subs.values() {
            asymmetry = asymmetry.max(m.hermitian_asymmetry());
        }
        let n = h_sub.dim();
        Self {
            basis,
            h_sub: h_sub.hermitian_part(),
            s_sub: s_sub.hermitian_part(),
            symmetry_subs: symmetry_subs
                .into_iter()
                .map(|(k, v)| (k, v.hermitian_part()))
                .collect(),
            coefficients: DMatrix::identity(n, n),
            asymmetry,
        }
    }

    pub fn dim(&self) -> usize {
        self.h_sub.dim()
    }

    /// `c† O c / c† S c` for eigenvector `k` of `spectrum`.
    pub fn expectation(&self, spectrum: &Spectrum, k: usize, name: &str) -> Result<f64, QseError> {
        let o = self
            .symmetry_subs
            .get(name)
            .ok_or_else(|| QseError::MissingSymmetry(name.to_string()))?;
        let c = spectrum.eigenvector(k);
        let num = c.dotc(&o.mul_vec(&c)).re;
        let den = c.dotc(&self.s_sub.mul_vec(&c)).re;
        Ok(num / den)
    }
}

fn frobenius_inner(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// Builds the subspace problem by dense traces against the reference.
pub fn build_subspace_direct(
    basis: &ExpansionBasis,
    h: &ComplexMatrix,
    reference: RdmSource<'_>,
    symmetry_ops: &BTreeMap<String, ComplexMatrix>,
) -> Result<SubspaceProblem, QseError> {
    let dim = h.dim();
    if reference.dim() != dim || 1usize << basis.mode_count != dim {
        return Err(QseError::DimensionMismatch(format!(
            "Hamiltonian {dim}, reference {}, basis over {} modes",
            reference.dim(),
            basis.mode_count
        )));
    }
    if let Some((name, o)) = symmetry_ops.iter().find(|(_, o)| o.dim() != dim) {
        return Err(QseError::DimensionMismatch(format!(
            "{name} has dimension {}",
            o.dim()
        )));
    }
    let ops: Vec<ComplexMatrix> = basis
        .operators
        .par_iter()
        .map(|p| p.to_dense())
        .collect::<Result<_, _>>()?;
    let n = ops.len();
    let names: Vec<&String> = symmetry_ops.keys().collect();
    let mut targets: Vec<&ComplexMatrix> = vec![h];
    targets.extend(symmetry_ops.values());

    // column b holds <E_a| O_t E_b> for every a and every target O_t
    let (h_cols, s_cols): (Vec<Vec<Vec<Complex64>>>, Vec<Vec<Complex64>>) = match reference {
        RdmSource::Pure(psi) => {
            let vecs: Vec<_> = ops.par_iter().map(|e| e.mul_vec(psi)).collect();
            let per_b: Vec<(Vec<Vec<Complex64>>, Vec<Complex64>)> = (0..n)
                .into_par_iter()
                .map(|b| {
                    let t_cols = targets
                        .iter()
                        .map(|o| {
                            let ov = o.mul_vec(&vecs[b]);
                            (0..n).map(|a| vecs[a].dotc(&ov)).collect()
                        })
                        .collect();
                    let s_col = (0..n).map(|a| vecs[a].dotc(&vecs[b])).collect();
                    (t_cols, s_col)
                })
                .collect();
            per_b.into_iter().unzip()
        }
        RdmSource::Mixed(rho) => {
            let per_b: Vec<(Vec<Vec<Complex64>>, Vec<Complex64>)> = (0..n)
                .into_par_iter()
                .map(|b| {
                    let e_rho = (&ops[b] * rho).into_dmatrix();
                    let t_cols = targets
                        .iter()
                        .map(|o| {
                            let m = o.as_dmatrix() * &e_rho;
                            (0..n)
                                .map(|a| frobenius_inner(ops[a].as_dmatrix(), &m))
                                .collect()
                        })
                        .collect();
                    let s_col = (0..n)
                        .map(|a| frobenius_inner(ops[a].as_dmatrix(), &e_rho))
                        .collect();
                    (t_cols, s_col)
                })
                .collect();
            per_b.into_iter().unzip()
        }
    };
    let h_sub = ComplexMatrix::from_fn(n, |a, b| h_cols[b][0][a]);
    let s_sub = ComplexMatrix::from_fn(n, |a, b| s_cols[b][a]);
    let symmetry_subs = names
        .iter()
        .enumerate()
        .map(|(t, name)| {
            (
                (*name).clone(),
                ComplexMatrix::from_fn(n, |a, b| h_cols[b][t + 1][a]),
            )
        })
        .collect();
    Ok(SubspaceProblem::assemble(
        basis.clone(),
        h_sub,
        s_sub,
        symmetry_subs,
    ))
}

/// Generalized eigenproblem `H c = E S c` with canonical orthogonalization.
pub fn solve_subspace(prob: &SubspaceProblem, metric_cutoff: f64) -> Result<Spectrum, QseError> {
    Ok(generalized_eigensolve(
        &prob.h_sub,
        &prob.s_sub,
        metric_cutoff,
    )?)
}

/// Restricts the problem to eigenvectors of `(O_sub, S_sub)` with eigenvalue
/// within `window` of `target`.
pub fn project_symmetry(
    prob: &SubspaceProblem,
    name: &str,
    target: f64,
    window: f64,
    metric_cutoff: f64,
) -> Result<SubspaceProblem, QseError> {
    let o = prob
        .symmetry_subs
        .get(name)
        .ok_or_else(|| QseError::MissingSymmetry(name.to_string()))?;
    let spec = generalized_eigensolve(o, &prob.s_sub, metric_cutoff)?;
    let kept: Vec<usize> = (0..spec.eigenvalues.len())
        .filter(|&k| (spec.eigenvalues[k] - target).abs() <= window)
        .collect();
    if kept.is_empty() {
        return Err(QseError::EmptySector {
            name: name.to_string(),
            target,
            window,
        });
    }
    let x = DMatrix::from_fn(prob.dim(), kept.len(), |r, c| {
        spec.eigenvectors[(r, kept[c])]
    });
    Ok(SubspaceProblem {
        basis: prob.basis.clone(),
        h_sub: prob.h_sub.congruence(&x).hermitian_part(),
        s_sub: prob.s_sub.congruence(&x).hermitian_part(),
        symmetry_subs: prob
            .symmetry_subs
            .iter()
            .map(|(k, m)| (k.clone(), m.congruence(&x).hermitian_part()))
            .collect(),
        coefficients: &prob.coefficients * x,
        asymmetry: prob.asymmetry,
    })
}
