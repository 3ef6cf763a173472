//! Molecular integrals: FCIDUMP ingestion, sweep manifests and Hamiltonian assembly.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use thiserror::Error;

use nalgebra::DMatrix;

use crate::linalg::{hermitian_eigensolve, ComplexMatrix, LinalgError, Spectrum, StateVector};
use crate::operators::{FermionOperator, Ladder, OperatorError};

/// Tolerance for the integral symmetry checks.
pub const INTEGRAL_SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum MoleculeError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("FCIDUMP header is missing key {0}")]
    MissingKey(&'static str),
    #[error("FCIDUMP header never closed with &END or /")]
    UnterminatedHeader,
    #[error("line {line}: index {index} outside [0, {norb}]")]
    IndexOutOfRange {
        line: usize,
        index: i64,
        norb: usize,
    },
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("duplicate bond length {0} in sweep manifest")]
    DuplicateBondLength(f64),
    #[error("{path}: {source}")]
    InFile {
        path: PathBuf,
        #[source]
        source: Box<MoleculeError>,
    },
    #[error("integrals violate {0}")]
    Symmetry(&'static str),
    #[error(transparent)]
    Operator(#[from] OperatorError),
}

/// Restricted (spin-free) integrals over spatial orbitals, chemist notation.
#[derive(Clone, Debug, PartialEq)]
pub struct MolecularIntegrals {
    pub norb: usize,
    pub nelec: usize,
    pub ms2: i64,
    pub core_energy: f64,
    one_body: Vec<f64>,
    two_body: Vec<f64>,
}

impl MolecularIntegrals {
    pub fn zeros(norb: usize, nelec: usize, ms2: i64) -> Self {
        Self {
            norb,
            nelec,
            ms2,
            core_energy: 0.0,
            one_body: vec![0.0; norb.pow(2)],
            two_body: vec![0.0; norb.pow(4)],
        }
    }

    pub fn one_body(&self, p: usize, q: usize) -> f64 {
        self.one_body[p * self.norb + q]
    }

    /// `(pq|rs)`.
    pub fn two_body(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        self.two_body[self.index4(p, q, r, s)]
    }

    /// Sets `h_pq` and `h_qp`.
    pub fn set_one_body(&mut self, p: usize, q: usize, value: f64) {
        let n = self.norb;
        self.one_body[p * n + q] = value;
        self.one_body[q * n + p] = value;
    }

    /// Sets `(pq|rs)` and its seven symmetry images.
    pub fn set_two_body(&mut self, p: usize, q: usize, r: usize, s: usize, value: f64) {
        for (a, b, c, d) in [
            (p, q, r, s),
            (q, p, r, s),
            (p, q, s, r),
            (q, p, s, r),
            (r, s, p, q),
            (s, r, p, q),
            (r, s, q, p),
            (s, r, q, p),
        ] {
            let i = self.index4(a, b, c, d);
            self.two_body[i] = value;
        }
    }

    fn index4(&self, p: usize, q: usize, r: usize, s: usize) -> usize {
        ((p * self.norb + q) * self.norb + r) * self.norb + s
    }

    pub fn mode_count(&self) -> usize {
        2 * self.norb
    }

    pub fn validate(&self) -> Result<(), MoleculeError> {
        let n = self.norb;
        let tol = INTEGRAL_SYMMETRY_TOL;
        for p in 0..n {
            for q in 0..n {
                if (self.one_body(p, q) - self.one_body(q, p)).abs() > tol {
                    return Err(MoleculeError::Symmetry("h_pq = h_qp"));
                }
                for r in 0..n {
                    for s in 0..n {
                        let v = self.two_body(p, q, r, s);
                        let images = [
                            self.two_body(q, p, r, s),
                            self.two_body(p, q, s, r),
                            self.two_body(r, s, p, q),
                        ];
                        if images.iter().any(|w| (w - v).abs() > tol) {
                            return Err(MoleculeError::Symmetry("(pq|rs) 8-fold symmetry"));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

fn syntax(line: usize, message: impl Into<String>) -> MoleculeError {
    MoleculeError::Syntax {
        line,
        message: message.into(),
    }
}

fn parse_float(field: &str, line: usize) -> Result<f64, MoleculeError> {
    field
        .replace(['D', 'd'], "e")
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| syntax(line, format!("malformed number '{field}'")))
}

/// Parses FCIDUMP text. Orbital-energy records (`i > 0`, `j = k = l = 0`) are ignored.
pub fn parse_fcidump(text: &str) -> Result<MolecularIntegrals, MoleculeError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let mut header = String::new();
    let mut started = false;
    let mut closed = false;
    for (no, line) in lines.by_ref() {
        let upper = line.trim().to_ascii_uppercase();
        if !started {
            if upper.is_empty() {
                continue;
            }
            if !upper.starts_with("&FCI") {
                return Err(syntax(no, "expected &FCI header"));
            }
            started = true;
            header.push_str(&upper["&FCI".len()..]);
        } else {
            header.push(' ');
            header.push_str(&upper);
        }
        if let Some(pos) = header.find("&END").or_else(|| header.rfind('/')) {
            header.truncate(pos);
            closed = true;
            break;
        }
    }
    if !closed {
        return Err(MoleculeError::UnterminatedHeader);
    }

    // values may be padded (`NORB=   2`); list continuations carry no '='
    let header: String = header.split_whitespace().collect();
    let mut keys: HashMap<&str, &str> = HashMap::new();
    for token in header.split(',') {
        if let Some((k, v)) = token.split_once('=') {
            keys.insert(k.trim(), v.trim());
        }
    }
    let key = |name: &'static str| -> Result<i64, MoleculeError> {
        let raw = keys.get(name).ok_or(MoleculeError::MissingKey(name))?;
        raw.parse::<i64>().map_err(|_| {
            syntax(
                0,
                format!("header key {name} has non-integer value '{raw}'"),
            )
        })
    };
    let norb = key("NORB")?;
    let nelec = key("NELEC")?;
    let ms2 = key("MS2")?;
    if norb < 1 || nelec < 0 {
        return Err(syntax(0, "NORB must be positive and NELEC non-negative"));
    }
    let norb = norb as usize;
    let mut ints = MolecularIntegrals::zeros(norb, nelec as usize, ms2);

    for (no, line) in lines {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if fields.len() != 5 {
            return Err(syntax(
                no,
                format!("expected 5 fields, found {}", fields.len()),
            ));
        }
        let value = parse_float(fields[0], no)?;
        let mut idx = [0usize; 4];
        for (slot, field) in idx.iter_mut().zip(&fields[1..]) {
            let i: i64 = field
                .parse()
                .map_err(|_| syntax(no, format!("malformed index '{field}'")))?;
            if i < 0 || i as usize > norb {
                return Err(MoleculeError::IndexOutOfRange {
                    line: no,
                    index: i,
                    norb,
                });
            }
            *slot = i as usize;
        }
        match idx {
            [0, 0, 0, 0] => ints.core_energy = value,
            [_, 0, 0, 0] => {}
            [i, j, 0, 0] if i > 0 && j > 0 => ints.set_one_body(i - 1, j - 1, value),
            [i, j, k, l] if i > 0 && j > 0 && k > 0 && l > 0 => {
                ints.set_two_body(i - 1, j - 1, k - 1, l - 1, value)
            }
            _ => return Err(syntax(no, "index pattern is not a valid FCIDUMP record")),
        }
    }
    Ok(ints)
}

/// Renders integrals as FCIDUMP text; values use the shortest round-trip representation.
pub fn render_fcidump(ints: &MolecularIntegrals) -> String {
    let n = ints.norb;
    let mut out = String::new();
    let orbsym = vec!["1"; n].join(",");
    writeln!(
        out,
        " &FCI NORB={},NELEC={},MS2={},",
        n, ints.nelec, ints.ms2
    )
    .unwrap();
    writeln!(out, "  ORBSYM={orbsym},").unwrap();
    writeln!(out, "  ISYM=1,").unwrap();
    writeln!(out, " &END").unwrap();
    for p in 0..n {
        for q in 0..=p {
            for r in 0..n {
                for s in 0..=r {
                    if p * n + q < r * n + s {
                        continue;
                    }
                    let v = ints.two_body(p, q, r, s);
                    if v != 0.0 {
                        writeln!(out, "{v:e} {} {} {} {}", p + 1, q + 1, r + 1, s + 1).unwrap();
                    }
                }
            }
        }
    }
    for p in 0..n {
        for q in 0..=p {
            let v = ints.one_body(p, q);
            if v != 0.0 {
                writeln!(out, "{v:e} {} {} 0 0", p + 1, q + 1).unwrap();
            }
        }
    }
    writeln!(out, "{:e} 0 0 0 0", ints.core_energy).unwrap();
    out
}

pub fn read_fcidump(path: &Path) -> Result<MolecularIntegrals, MoleculeError> {
    let text = std::fs::read_to_string(path).map_err(|e| MoleculeError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    parse_fcidump(&text).map_err(|e| MoleculeError::InFile {
        path: path.to_path_buf(),
        source: Box::new(e),
    })
}

/// Spin-orbital coefficients of `c + Σ h1[p,q] a_p†a_q + ½ Σ h2[p,q,r,s] a_p†a_q†a_r a_s`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoBodyTensors {
    pub modes: usize,
    pub constant: Complex64,
    pub one_body: Vec<Complex64>,
    pub two_body: Vec<Complex64>,
}

impl TwoBodyTensors {
    pub fn zeros(modes: usize) -> Self {
        Self {
            modes,
            constant: Complex64::new(0.0, 0.0),
            one_body: vec![Complex64::new(0.0, 0.0); modes.pow(2)],
            two_body: vec![Complex64::new(0.0, 0.0); modes.pow(4)],
        }
    }

    #[inline]
    pub fn h1(&self, p: usize, q: usize) -> Complex64 {
        self.one_body[p * self.modes + q]
    }

    #[inline]
    pub fn h2(&self, p: usize, q: usize, r: usize, s: usize) -> Complex64 {
        self.two_body[self.index4(p, q, r, s)]
    }

    #[inline]
    fn index4(&self, p: usize, q: usize, r: usize, s: usize) -> usize {
        let m = self.modes;
        ((p * m + q) * m + r) * m + s
    }

    /// Spin-orbital expansion: `h2[P,Q,R,S] = (ps|qr)` when the spins of P,S and of Q,R agree.
    pub fn from_integrals(ints: &MolecularIntegrals) -> Self {
        let m = ints.mode_count();
        let mut t = Self::zeros(m);
        t.constant = Complex64::new(ints.core_energy, 0.0);
        let spatial = |mode: usize| mode / 2;
        let spin = |mode: usize| mode % 2;
        for p in 0..m {
            for q in 0..m {
                if spin(p) == spin(q) {
                    t.one_body[p * m + q] = ints.one_body(spatial(p), spatial(q)).into();
                }
            }
        }
        for p in 0..m {
            for q in 0..m {
                for r in 0..m {
                    for s in 0..m {
                        if spin(p) == spin(s) && spin(q) == spin(r) {
                            let v = ints.two_body(spatial(p), spatial(s), spatial(q), spatial(r));
                            let i = t.index4(p, q, r, s);
                            t.two_body[i] = v.into();
                        }
                    }
                }
            }
        }
        t
    }

    /// Extracts tensors from an operator with terms of rank at most two, each
    /// with equal numbers of creations and annihilations. The two-body part is
    /// stored antisymmetrized.
    pub fn from_fermion(op: &FermionOperator) -> Result<Self, MoleculeError> {
        let op = op.normal_order();
        let m = op.mode_count();
        let mut t = Self::zeros(m);
        for (seq, c) in op.terms() {
            match seq {
                [] => t.constant += c,
                [a, b] if a.dagger && !b.dagger => t.one_body[a.mode * m + b.mode] += c,
                [a, b, c2, d] if a.dagger && b.dagger && !c2.dagger && !d.dagger => {
                    let (p, q, r, s) = (a.mode, b.mode, c2.mode, d.mode);
                    let half = c * 0.5;
                    for (i, sign) in [
                        (t.index4(p, q, r, s), 1.0),
                        (t.index4(q, p, r, s), -1.0),
                        (t.index4(p, q, s, r), -1.0),
                        (t.index4(q, p, s, r), 1.0),
                    ] {
                        t.two_body[i] += half * sign;
                    }
                }
                _ => {
                    return Err(MoleculeError::Syntax {
                        line: 0,
                        message: format!(
                            "operator term {:?} is not a number-conserving rank <= 2 product",
                            seq
                        ),
                    })
                }
            }
        }
        Ok(t)
    }

    pub fn to_fermion(&self) -> FermionOperator {
        let m = self.modes;
        let mut op = FermionOperator::constant(m, self.constant);
        let mut push = |ladders: &[Ladder], c: Complex64| {
            if c.norm() > 0.0 {
                let term = FermionOperator::term(m, ladders, c).expect("modes in range");
                op = op.add(&term).expect("same mode count");
            }
        };
        for p in 0..m {
            for q in 0..m {
                push(&[Ladder::create(p), Ladder::annihilate(q)], self.h1(p, q));
            }
        }
        for p in 0..m {
            for q in 0..m {
                if p == q {
                    continue;
                }
                for r in 0..m {
                    for s in 0..m {
                        if r == s {
                            continue;
                        }
                        push(
                            &[
                                Ladder::create(p),
                                Ladder::create(q),
                                Ladder::annihilate(r),
                                Ladder::annihilate(s),
                            ],
                            self.h2(p, q, r, s) * 0.5,
                        );
                    }
                }
            }
        }
        op.normal_order()
    }
}

/// `H = Σ h_pq a_p†a_q + ½ Σ h_pqrs a_p†a_q†a_r a_s + core` over `2·norb` spin orbitals.
pub fn assemble_hamiltonian(ints: &MolecularIntegrals) -> FermionOperator {
    TwoBodyTensors::from_integrals(ints).to_fermion()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub bond_length: f64,
    pub integrals: MolecularIntegrals,
    pub label: String,
}

/// Reads a `bond_length path` manifest; relative paths resolve against the manifest directory.
pub fn load_sweep(manifest: &Path) -> Result<Vec<SweepPoint>, MoleculeError> {
    let text = std::fs::read_to_string(manifest).map_err(|e| MoleculeError::Io {
        path: manifest.to_path_buf(),
        message: e.to_string(),
    })?;
    let base = manifest.parent().unwrap_or(Path::new("."));
    let in_manifest = |e: MoleculeError| MoleculeError::InFile {
        path: manifest.to_path_buf(),
        source: Box::new(e),
    };
    let mut points: Vec<SweepPoint> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(in_manifest(syntax(i + 1, "expected `bond_length path`")));
        }
        let r = parse_float(fields[0], i + 1).map_err(in_manifest)?;
        if r <= 0.0 {
            return Err(in_manifest(syntax(i + 1, "bond length must be positive")));
        }
        if points.iter().any(|p| p.bond_length == r) {
            return Err(MoleculeError::DuplicateBondLength(r));
        }
        let path = base.join(fields[1]);
        let integrals = read_fcidump(&path)?;
        points.push(SweepPoint {
            bond_length: r,
            integrals,
            label: fields[1].to_string(),
        });
    }
    points.sort_by(|a, b| a.bond_length.total_cmp(&b.bond_length));
    Ok(points)
}

/// Exact spectrum of a dense Hamiltonian within the `nelec`-particle sector.
///
/// Eigenvectors are returned embedded in the full Fock space.
pub fn fci_sector(h: &ComplexMatrix, nelec: usize) -> Result<Spectrum, LinalgError> {
    let dim = h.dim();
    let states: Vec<usize> = (0..dim)
        .filter(|s| s.count_ones() as usize == nelec)
        .collect();
    if states.is_empty() {
        return Err(LinalgError::EmptySubspace);
    }
    let block = ComplexMatrix::from_fn(states.len(), |a, b| h.get(states[a], states[b]));
    let inner = hermitian_eigensolve(&block)?;
    let mut vectors = DMatrix::zeros(dim, states.len());
    for (row, &s) in states.iter().enumerate() {
        for col in 0..states.len() {
            vectors[(s, col)] = inner.eigenvectors[(row, col)];
        }
    }
    Ok(Spectrum {
        eigenvalues: inner.eigenvalues,
        eigenvectors: vectors,
        retained_dim: states.len(),
    })
}

/// Determinant occupying the lowest `nelec` spin-orbitals (mode 0 is the top bit).
pub fn hartree_fock_state(mode_count: usize, nelec: usize) -> StateVector {
    let index = ((1usize << nelec) - 1) << (mode_count - nelec);
    let mut v = StateVector::zeros(1 << mode_count);
    v[index] = Complex64::new(1.0, 0.0);
    v
}
