//! Shot-based estimation of Pauli expectations and of low-order RDMs.

use std::collections::BTreeMap;

use itertools::Itertools;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{factorial, signed_permutations, RdmError, RdmSet, RdmSource, RdmTensor};
use crate::operators::{jordan_wigner, FermionOperator, Ladder, PauliOperator, PauliString};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PauliEstimate {
    pub estimate: f64,
    /// Sample standard error of the ±1 outcomes.
    pub stderr: f64,
    pub shots: usize,
}

fn string_expectation(source: RdmSource<'_>, s: &PauliString) -> f64 {
    let dim = source.dim();
    let mut acc = Complex64::new(0.0, 0.0);
    match source {
        RdmSource::Pure(psi) => {
            for col in 0..dim {
                let (row, v) = s.column_entry(col);
                acc += psi[row].conj() * v * psi[col];
            }
        }
        RdmSource::Mixed(rho) => {
            for col in 0..dim {
                let (row, v) = s.column_entry(col);
                acc += v * rho.get(col, row);
            }
        }
    }
    acc.re
}

fn sample(expectation: f64, shots: usize, seed: u64) -> PauliEstimate {
    let p = ((1.0 + expectation) / 2.0).clamp(0.0, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let successes = (0..shots).filter(|_| rng.random_bool(p)).count();
    let n = shots as f64;
    let mean = 2.0 * successes as f64 / n - 1.0;
    let stderr = if shots > 1 {
        ((1.0 - mean * mean).max(0.0) * n / (n - 1.0) / n).sqrt()
    } else {
        0.0
    };
    PauliEstimate {
        estimate: mean,
        stderr,
        shots,
    }
}

/// Simulates `shots` projective measurements of a single Pauli string with
/// coefficient ±1; deterministic in `seed`.
pub fn estimate_pauli(
    source: RdmSource<'_>,
    pauli: &PauliOperator,
    shots: usize,
    seed: u64,
) -> Result<PauliEstimate, RdmError> {
    if shots == 0 {
        return Err(RdmError::NoShots);
    }
    let (string, coeff) = pauli.single_term().ok_or(RdmError::NotPauliString)?;
    if coeff.im != 0.0 || (coeff.re.abs() - 1.0).abs() > 1e-14 {
        return Err(RdmError::NotPauliString);
    }
    if string.qubit_count() != source.mode_count()? {
        return Err(RdmError::Shape(format!(
            "{} qubit string on a {} qubit state",
            string.qubit_count(),
            source.mode_count()?
        )));
    }
    let exact = coeff.re * string_expectation(source, string);
    Ok(sample(exact, shots, seed))
}

/// `D1..D{max_k}` assembled from shot estimates of the Jordan-Wigner Pauli
/// strings, each distinct string measured once with `shots` shots.
pub fn sampled_rdms(
    source: RdmSource<'_>,
    max_k: usize,
    shots: usize,
    seed: u64,
) -> Result<RdmSet, RdmError> {
    if !(1..=4).contains(&max_k) {
        return Err(RdmError::BadOrder(max_k));
    }
    if shots == 0 {
        return Err(RdmError::NoShots);
    }
    let modes = source.mode_count()?;
    source.check_normalized()?;

    // Pauli images of every sorted-tuple element.
    let mut images: Vec<(usize, Vec<usize>, Vec<usize>, PauliOperator)> = Vec::new();
    for k in 1..=max_k {
        let tuples: Vec<Vec<usize>> = (0..modes).combinations(k).collect();
        for upper in &tuples {
            for lower in &tuples {
                let mut seq: Vec<Ladder> = upper.iter().map(|&i| Ladder::create(i)).collect();
                seq.extend(lower.iter().rev().map(|&j| Ladder::annihilate(j)));
                let op = FermionOperator::term(modes, &seq, Complex64::new(1.0, 0.0))?;
                images.push((k, upper.clone(), lower.clone(), jordan_wigner(&op)));
            }
        }
    }

    let mut estimates: BTreeMap<PauliString, f64> = BTreeMap::new();
    for (_, _, _, image) in &images {
        for (s, _) in image.terms() {
            estimates.entry(s.clone()).or_insert(f64::NAN);
        }
    }
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    for (s, est) in estimates.iter_mut() {
        let sub_seed: u64 = master.random();
        *est = if s.is_identity() {
            1.0
        } else {
            sample(string_expectation(source, s), shots, sub_seed).estimate
        };
    }

    let mut tensors: Vec<RdmTensor> = (1..=max_k)
        .map(|k| RdmTensor::zeros(k, modes))
        .collect::<Result<_, _>>()?;
    let perms: Vec<_> = (1..=max_k).map(signed_permutations).collect();
    for (k, upper, lower, image) in &images {
        let v: Complex64 = image.terms().map(|(s, c)| c * estimates[s]).sum();
        tensors[k - 1].scatter(upper, lower, v / factorial(*k), &perms[k - 1]);
    }
    RdmSet::new(modes, tensors)
}
