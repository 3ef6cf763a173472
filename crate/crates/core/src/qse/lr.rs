//! Linear-response subspace matrices contracted from reduced density matrices.
//!
//! For the basis `{I, a_i†a_j}` every element `Tr[(a_i†a_j)† O a_k†a_l ρ]` of a
//! two-body operator `O` is a linear function of `D1..D4`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;

use super::{ExpansionBasis, QseError, SubspaceProblem};
use crate::linalg::ComplexMatrix;
use crate::molecule::TwoBodyTensors;
use crate::rdm::{contract_energy, RdmSet, RdmTensor};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn delta(a: usize, b: usize) -> f64 {
    if a == b {
        1.0
    } else {
        0.0
    }
}

struct Rdms<'a> {
    d1: &'a RdmTensor,
    d2: &'a RdmTensor,
    d3: Option<&'a RdmTensor>,
    d4: Option<&'a RdmTensor>,
}

/// Nonzero one- and two-body weights of `O`; two-body weights carry the ½.
struct Weights {
    constant: Complex64,
    one: Vec<(usize, usize, Complex64)>,
    two: Vec<(usize, usize, usize, usize, Complex64)>,
    h1: Vec<Complex64>,
    h2: Vec<Complex64>,
    modes: usize,
}

impl Weights {
    fn new(t: &TwoBodyTensors) -> Self {
        let m = t.modes;
        let mut one = Vec::new();
        let mut two = Vec::new();
        for p in 0..m {
            for r in 0..m {
                let w = t.h1(p, r);
                if w != ZERO {
                    one.push((p, r, w));
                }
                for q in 0..m {
                    for s in 0..m {
                        let w = t.h2(p, q, r, s);
                        if w != ZERO {
                            two.push((p, q, r, s, 0.5 * w));
                        }
                    }
                }
            }
        }
        Self {
            constant: t.constant,
            one,
            two,
            h1: t.one_body.clone(),
            h2: t.two_body.iter().map(|w| 0.5 * w).collect(),
            modes: m,
        }
    }

    fn w1(&self, p: usize, r: usize) -> Complex64 {
        self.h1[p * self.modes + r]
    }

    fn w2(&self, p: usize, q: usize, r: usize, s: usize) -> Complex64 {
        let m = self.modes;
        self.h2[((p * m + q) * m + r) * m + s]
    }
}

fn overlap(d: &Rdms<'_>, i: usize, j: usize, k: usize, l: usize) -> Complex64 {
    delta(i, k) * d.d1.get(&[j, l]) - 2.0 * d.d2.get(&[j, k, l, i])
}

fn reference_column(d: &Rdms<'_>, w: &Weights, i: usize, j: usize) -> Complex64 {
    let m = w.modes;
    let mut acc = w.constant * d.d1.get(&[j, i]);
    for &(p, r, x) in &w.one {
        acc += x * (delta(i, p) * d.d1.get(&[j, r]) - 2.0 * d.d2.get(&[j, p, r, i]));
    }
    if !w.two.is_empty() {
        let d3 = d.d3.expect("checked by caller");
        for &(p, q, r, s, x) in &w.two {
            acc += x * 6.0 * d3.get(&[j, p, q, s, r, i]);
        }
        for q in 0..m {
            for r in 0..m {
                for s in 0..m {
                    acc += 2.0 * w.w2(i, q, r, s) * d.d2.get(&[j, q, s, r]);
                    acc -= 2.0 * w.w2(q, i, r, s) * d.d2.get(&[j, q, s, r]);
                }
            }
        }
    }
    acc
}

fn excitation_pair(
    d: &Rdms<'_>,
    w: &Weights,
    (i, j): (usize, usize),
    (k, l): (usize, usize),
) -> Complex64 {
    let m = w.modes;
    let mut acc = w.constant * overlap(d, i, j, k, l);

    if !w.one.is_empty() {
        let d3 = d.d3.expect("checked by caller");
        acc += w.w1(i, k) * d.d1.get(&[j, l]);
        for &(p, r, x) in &w.one {
            acc -= 2.0 * delta(i, k) * x * d.d2.get(&[j, p, r, l]);
            acc -= 6.0 * x * d3.get(&[j, k, p, r, l, i]);
        }
        for n in 0..m {
            acc += 2.0 * w.w1(i, n) * d.d2.get(&[j, k, n, l]);
            acc -= 2.0 * w.w1(n, k) * d.d2.get(&[j, n, l, i]);
        }
    }

    if !w.two.is_empty() {
        let d3 = d.d3.expect("checked by caller");
        let d4 = d.d4.expect("checked by caller");
        for &(p, q, r, s, x) in &w.two {
            if i == k {
                acc += 6.0 * x * d3.get(&[j, p, q, s, r, l]);
            }
            acc += 6.0 * delta(k, r) * x * d3.get(&[j, p, q, s, l, i]);
            acc -= 6.0 * delta(k, s) * x * d3.get(&[j, p, q, r, l, i]);
            acc -= 24.0 * x * d4.get(&[j, k, p, q, s, r, l, i]);
        }
        for a in 0..m {
            for b in 0..m {
                acc += 2.0 * w.w2(i, a, k, b) * d.d2.get(&[j, a, b, l]);
                acc -= 2.0 * w.w2(i, a, b, k) * d.d2.get(&[j, a, b, l]);
                acc -= 2.0 * w.w2(a, i, k, b) * d.d2.get(&[j, a, b, l]);
                acc += 2.0 * w.w2(a, i, b, k) * d.d2.get(&[j, a, b, l]);
                for c in 0..m {
                    acc -= 6.0 * w.w2(i, a, b, c) * d3.get(&[j, k, a, c, b, l]);
                    acc += 6.0 * w.w2(a, i, b, c) * d3.get(&[j, k, a, c, b, l]);
                }
            }
        }
    }
    acc
}

fn operator_matrix(
    pairs: &[Option<(usize, usize)>],
    d: &Rdms<'_>,
    t: &TwoBodyTensors,
    energy: Complex64,
) -> ComplexMatrix {
    let w = Weights::new(t);
    let n = pairs.len();
    let columns: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|b| {
            (0..n)
                .map(|a| match (pairs[a], pairs[b]) {
                    (None, None) => energy,
                    (Some((i, j)), None) => reference_column(d, &w, i, j),
                    (None, Some((k, l))) => reference_column(d, &w, k, l).conj(),
                    (Some(x), Some(y)) => excitation_pair(d, &w, x, y),
                })
                .collect()
        })
        .collect();
    ComplexMatrix::from_fn(n, |a, b| columns[b][a])
}

fn requirements(t: &TwoBodyTensors) -> usize {
    if t.two_body.iter().any(|&w| w != ZERO) {
        4
    } else if t.one_body.iter().any(|&w| w != ZERO) {
        3
    } else {
        2
    }
}

/// Subspace matrices for the basis `{I, a_i†a_j}` from `D1..D4`.
///
/// The Hamiltonian and each symmetry operator must be Hermitian; the
/// reference row is filled from the reference column by conjugation.
pub fn build_lr_from_rdms(
    basis: &ExpansionBasis,
    h: &TwoBodyTensors,
    rdms: &RdmSet,
    symmetry_ops: &BTreeMap<String, TwoBodyTensors>,
) -> Result<SubspaceProblem, QseError> {
    let pairs = basis.single_excitations()?;
    let m = rdms.mode_count;
    if h.modes != m || basis.mode_count != m || symmetry_ops.values().any(|t| t.modes != m) {
        return Err(QseError::DimensionMismatch(format!(
            "RDMs over {m} modes, Hamiltonian over {}, basis over {}",
            h.modes, basis.mode_count
        )));
    }
    let needed = symmetry_ops
        .values()
        .chain([h])
        .map(requirements)
        .max()
        .unwrap_or(2);
    for k in 1..=needed {
        rdms.require(k)?;
    }
    let d = Rdms {
        d1: rdms.require(1)?,
        d2: rdms.require(2)?,
        d3: rdms.get(3),
        d4: rdms.get(4),
    };
    let energy_of = |t: &TwoBodyTensors| -> Result<Complex64, QseError> {
        Ok(Complex64::new(contract_energy(t, &rdms.truncated(2))?, 0.0))
    };

    let n = pairs.len();
    let s_sub = ComplexMatrix::from_fn(n, |a, b| match (pairs[a], pairs[b]) {
        (None, None) => Complex64::new(1.0, 0.0),
        (Some((i, j)), None) => d.d1.get(&[j, i]),
        (None, Some((k, l))) => d.d1.get(&[k, l]),
        (Some((i, j)), Some((k, l))) => overlap(&d, i, j, k, l),
    });
    let h_sub = operator_matrix(&pairs, &d, h, energy_of(h)?);
    let mut symmetry_subs = BTreeMap::new();
    for (name, t) in symmetry_ops {
        symmetry_subs.insert(name.clone(), operator_matrix(&pairs, &d, t, energy_of(t)?));
    }
    Ok(SubspaceProblem::assemble(
        basis.clone(),
        h_sub,
        s_sub,
        symmetry_subs,
    ))
}
