#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use num_complex::Complex64;
use rand::Rng;

use vcsqse::linalg::{ComplexMatrix, StateVector};
use vcsqse::molecule::{assemble_hamiltonian, load_sweep, SweepPoint, TwoBodyTensors};
use vcsqse::operators::{symmetry_operator, FermionOperator, SymmetryKind};
use vcsqse::random::random_unitary;

pub const SYMMETRIES: [SymmetryKind; 3] = [
    SymmetryKind::Number,
    SymmetryKind::Sz,
    SymmetryKind::SSquared,
];

pub fn repo_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn fixture(rel: &str) -> PathBuf {
    repo_root().join("fixtures").join(rel)
}

pub fn config(name: &str) -> PathBuf {
    repo_root().join("configs").join(name)
}

pub fn sweep(basis: &str) -> Vec<SweepPoint> {
    load_sweep(&fixture(&format!("{basis}/sweep.txt"))).expect("fixture sweep")
}

pub fn dense_hamiltonian(point: &SweepPoint) -> ComplexMatrix {
    assemble_hamiltonian(&point.integrals)
        .to_dense()
        .expect("dense")
}

pub fn symmetry_dense(m: usize) -> BTreeMap<String, ComplexMatrix> {
    SYMMETRIES
        .into_iter()
        .map(|k| {
            (
                k.name().to_string(),
                symmetry_operator(k, m).unwrap().to_dense().unwrap(),
            )
        })
        .collect()
}

pub fn symmetry_tensors(m: usize) -> BTreeMap<String, TwoBodyTensors> {
    SYMMETRIES
        .into_iter()
        .map(|k| {
            let op = symmetry_operator(k, m).unwrap();
            (
                k.name().to_string(),
                TwoBodyTensors::from_fermion(&op).unwrap(),
            )
        })
        .collect()
}

/// Determinant of the first `n` columns of a random orbital rotation.
pub fn random_slater(m: usize, n: usize, rng: &mut impl Rng) -> StateVector {
    let u = random_unitary(m, rng);
    let creators: Vec<ComplexMatrix> = (0..m)
        .map(|p| FermionOperator::create(m, p).unwrap().to_dense().unwrap())
        .collect();
    let mut psi = StateVector::zeros(1 << m);
    psi[0] = Complex64::new(1.0, 0.0);
    for k in 0..n {
        let mut orbital = ComplexMatrix::zeros(1 << m);
        for (p, c) in creators.iter().enumerate() {
            orbital = &orbital + &c.scale(u.get(p, k));
        }
        psi = orbital.mul_vec(&psi);
    }
    let norm = psi.norm();
    psi / Complex64::new(norm, 0.0)
}
