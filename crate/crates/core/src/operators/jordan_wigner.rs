//! Jordan-Wigner mapping from fermionic ladder operators to Pauli strings.
//!
//! `a_p† = (Z_0 ... Z_{p-1}) σ⁺_p` with `σ± = (X ∓ iY)/2`, so qubit `|1>` is
//! an occupied mode and mode `p` maps to qubit `p`.

use std::collections::HashMap;

use num_complex::Complex64;

use super::fermion::{FermionOperator, Ladder};
use super::pauli::{Pauli, PauliOperator, PauliString};

/// Image of a single ladder operator.
pub fn ladder_image(l: Ladder, qubit_count: usize) -> PauliOperator {
    let string_with = |p: Pauli| {
        let letters = (0..qubit_count)
            .map(|q| match q.cmp(&l.mode) {
                std::cmp::Ordering::Less => Pauli::Z,
                std::cmp::Ordering::Equal => p,
                std::cmp::Ordering::Greater => Pauli::I,
            })
            .collect();
        PauliString::new(letters)
    };
    // σ⁺ = (X - iY)/2 for creation, σ⁻ = (X + iY)/2 for annihilation
    let y_coeff = if l.dagger {
        Complex64::new(0.0, -0.5)
    } else {
        Complex64::new(0.0, 0.5)
    };
    PauliOperator::from_string(string_with(Pauli::X), Complex64::new(0.5, 0.0))
        .add(&PauliOperator::from_string(string_with(Pauli::Y), y_coeff))
        .expect("same qubit count")
}

/// Maps a fermionic operator to qubits; `qubit_count = mode_count`.
pub fn jordan_wigner(op: &FermionOperator) -> PauliOperator {
    let n = op.mode_count();
    let mut cache: HashMap<Ladder, PauliOperator> = HashMap::new();
    let mut out = PauliOperator::zero(n);
    for (seq, coeff) in op.terms() {
        let mut acc = PauliOperator::from_string(PauliString::identity(n), coeff);
        for &l in seq {
            let img = cache.entry(l).or_insert_with(|| ladder_image(l, n));
            acc = acc.mul(img).expect("same qubit count");
        }
        out = out.add(&acc).expect("same qubit count");
    }
    out
}
