//! Approximate linear response from `D1` and `D2` alone.
//!
//! `Zc` evaluates `⟨E_a† [H, E_b]⟩ + E_g S[a,b]`, whose normal-ordered form
//! never exceeds rank 3, with a cumulant-reconstructed `D3`. `Za` contracts the
//! full product expression with reconstructed `D3` and `D4`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;

use super::{build_lr_from_rdms, ExpansionBasis, QseError, SubspaceProblem};
use crate::linalg::ComplexMatrix;
use crate::molecule::TwoBodyTensors;
use crate::operators::{FermionOperator, OperatorError};
use crate::rdm::{cumulants_from_rdms, reconstruct_rdms, RdmSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ApproxMethod {
    Zc,
    Za,
}

impl fmt::Display for ApproxMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ApproxMethod::Zc => "zc",
            ApproxMethod::Za => "za",
        })
    }
}

impl FromStr for ApproxMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "zc" => Ok(ApproxMethod::Zc),
            "za" => Ok(ApproxMethod::Za),
            other => Err(format!(
                "unknown approximation '{other}' (expected zc or za)"
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ApproxOptions {
    /// Use the exact `D3` from the supplied set instead of reconstructing it.
    pub exact_d3: bool,
}

fn factorial(k: usize) -> f64 {
    (1..=k).product::<usize>() as f64
}

/// `⟨O⟩` of any number-conserving operator from its normal-ordered terms.
pub fn expectation_from_rdms(op: &FermionOperator, rdms: &RdmSet) -> Result<Complex64, QseError> {
    if op.mode_count() != rdms.mode_count {
        return Err(QseError::Operator(OperatorError::ModeCountMismatch {
            left: op.mode_count(),
            right: rdms.mode_count,
        }));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for (ladders, c) in op.normal_order().terms() {
        let creators: Vec<usize> = ladders
            .iter()
            .filter(|l| l.dagger)
            .map(|l| l.mode)
            .collect();
        let annihilators: Vec<usize> = ladders
            .iter()
            .filter(|l| !l.dagger)
            .map(|l| l.mode)
            .collect();
        if creators.len() != annihilators.len() {
            return Err(QseError::NonConserving(
                FermionOperator::term(op.mode_count(), ladders, c)?.render(),
            ));
        }
        let k = creators.len();
        if k == 0 {
            acc += c;
            continue;
        }
        let d = rdms.get(k).ok_or(QseError::RankExceeded(k))?;
        let mut index = creators;
        index.extend(annihilators.iter().rev());
        acc += c * factorial(k) * d.get(&index);
    }
    Ok(acc)
}

fn element_operator(
    modes: usize,
    pair: Option<(usize, usize)>,
) -> Result<FermionOperator, QseError> {
    Ok(match pair {
        None => FermionOperator::identity(modes),
        Some((i, j)) => FermionOperator::excitation(modes, i, j)?,
    })
}

/// `⟨E_a† [O, E_b]⟩ + o_g S[a,b]` for every pair, contracted with `rdms`.
fn commutator_matrix(
    pairs: &[Option<(usize, usize)>],
    op: &FermionOperator,
    rdms: &RdmSet,
    o_g: f64,
    s_sub: &ComplexMatrix,
) -> Result<ComplexMatrix, QseError> {
    let modes = rdms.mode_count;
    let n = pairs.len();
    let columns: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|b| -> Result<Vec<Complex64>, QseError> {
            let comm = op
                .commutator(&element_operator(modes, pairs[b])?)?
                .normal_order();
            (0..n)
                .map(|a| {
                    let product = element_operator(modes, pairs[a])?
                        .adjoint()
                        .mul(&comm)?
                        .normal_order();
                    let rank = product.max_rank();
                    if rank > 3 {
                        return Err(QseError::RankExceeded(rank));
                    }
                    Ok(expectation_from_rdms(&product, rdms)? + o_g * s_sub.get(a, b))
                })
                .collect()
        })
        .collect::<Result<_, _>>()?;
    Ok(ComplexMatrix::from_fn(n, |a, b| columns[b][a]))
}

fn metric(pairs: &[Option<(usize, usize)>], rdms: &RdmSet) -> Result<ComplexMatrix, QseError> {
    let modes = rdms.mode_count;
    let n = pairs.len();
    let mut s = ComplexMatrix::zeros(n);
    for (a, &pa) in pairs.iter().enumerate() {
        let ea = element_operator(modes, pa)?.adjoint();
        for (b, &pb) in pairs.iter().enumerate() {
            let prod = ea.mul(&element_operator(modes, pb)?)?;
            s.set(a, b, expectation_from_rdms(&prod, rdms)?);
        }
    }
    Ok(s)
}

/// Approximate subspace problem for the basis `{I, a_i†a_j}`.
///
/// Only `D1` and `D2` of `rdms` are used unless `options.exact_d3` is set, in
/// which case `D3` must be present. `e_g` is the reference energy entering the
/// `Zc` form; `Za` ignores it. Both forms are Hermitized on assembly.
pub fn approximate_lr(
    method: ApproxMethod,
    basis: &ExpansionBasis,
    h: &TwoBodyTensors,
    rdms: &RdmSet,
    e_g: f64,
    symmetry_ops: &BTreeMap<String, TwoBodyTensors>,
    options: ApproxOptions,
) -> Result<SubspaceProblem, QseError> {
    let pairs = basis.single_excitations()?;
    let known = if options.exact_d3 { 3 } else { 2 };
    let cumulants = cumulants_from_rdms(&rdms.truncated(known))?;
    match method {
        ApproxMethod::Zc => {
            let working = reconstruct_rdms(&cumulants, known, 3)?;
            let s_sub = metric(&pairs, &working)?;
            let h_sub = commutator_matrix(&pairs, &h.to_fermion(), &working, e_g, &s_sub)?;
            let mut symmetry_subs = BTreeMap::new();
            for (name, t) in symmetry_ops {
                let op = t.to_fermion();
                let o_g = expectation_from_rdms(&op, &working)?.re;
                symmetry_subs.insert(
                    name.clone(),
                    commutator_matrix(&pairs, &op, &working, o_g, &s_sub)?,
                );
            }
            Ok(SubspaceProblem::assemble(
                basis.clone(),
                h_sub,
                s_sub,
                symmetry_subs,
            ))
        }
        ApproxMethod::Za => {
            let working = reconstruct_rdms(&cumulants, known, 4)?;
            build_lr_from_rdms(basis, h, &working, symmetry_ops)
        }
    }
}
