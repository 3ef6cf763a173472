//! Single-qubit Kraus channels and their independent application to qubit registers.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::ComplexMatrix;

/// Completeness tolerance for `Σ K†K = I`.
pub const COMPLETENESS_TOL: f64 = 1e-12;

/// Largest lifted Kraus set.
pub const MAX_KRAUS_OPS: usize = 65536;

/// Largest total number of stored matrix entries in a lifted Kraus set.
pub const MAX_LIFTED_ENTRIES: f64 = (1u64 << 26) as f64;

/// Largest register a channel may be lifted to.
pub const MAX_REGISTER_QUBITS: usize = 12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("time ratios must be finite and non-negative (tp/t1 = {0}, tp/t2 = {1})")]
    InvalidRatio(f64, f64),
    #[error(
        "amplitude-phase damping needs T2 <= 2 T1, i.e. tp/t2 >= tp/t1 / 2 (got tp/t1 = {tp_over_t1}, tp/t2 = {tp_over_t2})"
    )]
    UnphysicalCoherence { tp_over_t1: f64, tp_over_t2: f64 },
    #[error("Kraus set violates completeness by {0:e}")]
    Incomplete(f64),
    #[error("Kraus channel needs at least one operator")]
    Empty,
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("lifting needs a single-qubit channel, got dimension {0}")]
    NotSingleQubit(usize),
    #[error("lifting to {qubits} qubits gives {count} Kraus operators (limit {MAX_KRAUS_OPS})")]
    TooManyKraus { qubits: usize, count: f64 },
    #[error("lifted Kraus set would store {0:e} matrix entries")]
    TooLarge(f64),
    #[error("{0} qubits exceeds the register limit of {MAX_REGISTER_QUBITS}")]
    TooManyQubits(usize),
    #[error("unknown channel kind '{0}'")]
    UnknownKind(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ChannelKind {
    Identity,
    Dephasing,
    AmplitudePhase,
    Depolarizing,
}

impl ChannelKind {
    /// Short name used in configs and CSV output.
    pub fn name(self) -> &'static str {
        match self {
            ChannelKind::Identity => "identity",
            ChannelKind::Dephasing => "dephasing",
            ChannelKind::AmplitudePhase => "ap",
            ChannelKind::Depolarizing => "depol",
        }
    }
}

impl fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ChannelKind {
    type Err = ChannelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "identity" | "none" => Ok(ChannelKind::Identity),
            "dephasing" | "ph" => Ok(ChannelKind::Dephasing),
            "ap" | "amplitude_phase" => Ok(ChannelKind::AmplitudePhase),
            "depol" | "depolarizing" => Ok(ChannelKind::Depolarizing),
            other => Err(ChannelError::UnknownKind(other.to_string())),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelSpec {
    pub kind: ChannelKind,
    pub tp_over_t1: f64,
    pub tp_over_t2: f64,
}

impl ChannelSpec {
    pub fn new(kind: ChannelKind, tp_over_t1: f64, tp_over_t2: f64) -> Self {
        Self {
            kind,
            tp_over_t1,
            tp_over_t2,
        }
    }

    pub fn identity() -> Self {
        Self::new(ChannelKind::Identity, 0.0, 0.0)
    }

    pub fn validate(&self) -> Result<(), ChannelError> {
        let ok = |x: f64| x.is_finite() && x >= 0.0;
        if !ok(self.tp_over_t1) || !ok(self.tp_over_t2) {
            return Err(ChannelError::InvalidRatio(self.tp_over_t1, self.tp_over_t2));
        }
        if self.kind == ChannelKind::AmplitudePhase && self.tp_over_t2 < 0.5 * self.tp_over_t1 {
            return Err(ChannelError::UnphysicalCoherence {
                tp_over_t1: self.tp_over_t1,
                tp_over_t2: self.tp_over_t2,
            });
        }
        Ok(())
    }
}

/// Completeness-checked CPTP map `ρ → Σ K ρ K†`.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausChannel {
    kraus_ops: Vec<ComplexMatrix>,
    label: String,
}

impl KrausChannel {
    pub fn new(
        kraus_ops: Vec<ComplexMatrix>,
        label: impl Into<String>,
    ) -> Result<Self, ChannelError> {
        let first = kraus_ops.first().ok_or(ChannelError::Empty)?;
        let dim = first.dim();
        let mut sum = ComplexMatrix::zeros(dim);
        for k in &kraus_ops {
            if k.dim() != dim {
                return Err(ChannelError::DimensionMismatch(dim, k.dim()));
            }
            sum = &sum + &(&k.adjoint() * k);
        }
        let defect = sum.max_abs_diff(&ComplexMatrix::identity(dim));
        if defect > COMPLETENESS_TOL {
            return Err(ChannelError::Incomplete(defect));
        }
        Ok(Self {
            kraus_ops,
            label: label.into(),
        })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            kraus_ops: vec![ComplexMatrix::identity(dim)],
            label: "identity".into(),
        }
    }

    pub fn dim(&self) -> usize {
        self.kraus_ops[0].dim()
    }

    pub fn kraus_ops(&self) -> &[ComplexMatrix] {
        &self.kraus_ops
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `Σ K ρ K†`.
    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix, ChannelError> {
        if rho.dim() != self.dim() {
            return Err(ChannelError::DimensionMismatch(self.dim(), rho.dim()));
        }
        let mut out = ComplexMatrix::zeros(rho.dim());
        for k in &self.kraus_ops {
            out = &out + &(&(k * rho) * &k.adjoint());
        }
        Ok(out)
    }
}

/// Channel applying `a` first, then `b`: Kraus set `{B_j A_i}`.
pub fn compose(a: &KrausChannel, b: &KrausChannel) -> Result<KrausChannel, ChannelError> {
    if a.dim() != b.dim() {
        return Err(ChannelError::DimensionMismatch(a.dim(), b.dim()));
    }
    let ops = b
        .kraus_ops
        .iter()
        .flat_map(|kb| a.kraus_ops.iter().map(move |ka| kb * ka))
        .collect();
    KrausChannel::new(ops, format!("{}∘{}", b.label, a.label))
}

pub fn apply_channel(
    ch: &KrausChannel,
    rho: &ComplexMatrix,
) -> Result<ComplexMatrix, ChannelError> {
    ch.apply(rho)
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn pauli(letter: char) -> ComplexMatrix {
    let (o, l, i) = (real(0.0), real(1.0), Complex64::new(0.0, 1.0));
    let entries = match letter {
        'X' => [o, l, l, o],
        'Y' => [o, -i, i, o],
        'Z' => [l, o, o, -l],
        _ => [l, o, o, l],
    };
    ComplexMatrix::from_row_major(&entries).expect("2x2")
}

/// Dephasing with `p̃`: `{√(1-p̃/2) I, √(p̃/2) Z}`.
pub fn dephasing(p_tilde: f64) -> Result<KrausChannel, ChannelError> {
    nonzero(
        vec![
            pauli('I').scale_real((1.0 - p_tilde / 2.0).sqrt()),
            pauli('Z').scale_real((p_tilde / 2.0).sqrt()),
        ],
        "dephasing",
    )
}

/// Amplitude damping with decay probability `p`.
pub fn amplitude_damping(p: f64) -> Result<KrausChannel, ChannelError> {
    let (o, l) = (real(0.0), real(1.0));
    nonzero(
        vec![
            ComplexMatrix::from_row_major(&[l, o, o, real((1.0 - p).sqrt())]).expect("2x2"),
            ComplexMatrix::from_row_major(&[o, real(p.sqrt()), o, o]).expect("2x2"),
        ],
        "amplitude",
    )
}

/// Depolarizing with probability `p`: `{√(1-p) I, √(p/3) X, √(p/3) Y, √(p/3) Z}`.
pub fn depolarizing(p: f64) -> Result<KrausChannel, ChannelError> {
    let w = (p / 3.0).sqrt();
    nonzero(
        vec![
            pauli('I').scale_real((1.0 - p).sqrt()),
            pauli('X').scale_real(w),
            pauli('Y').scale_real(w),
            pauli('Z').scale_real(w),
        ],
        "depol",
    )
}

/// Drops Kraus operators that are exactly zero (vanishing probabilities).
fn nonzero(ops: Vec<ComplexMatrix>, label: &str) -> Result<KrausChannel, ChannelError> {
    KrausChannel::new(
        ops.into_iter().filter(|k| k.max_abs() > 0.0).collect(),
        label,
    )
}

/// Single-qubit channel for `spec`.
///
/// Amplitude-phase damping composes amplitude damping with `p = 1 - e^{-tp/t1}`
/// and dephasing with `1 - p̃ = e^{-(tp/t2 - tp/(2 t1))}`, so that populations
/// relax as `e^{-tp/t1}` and coherences as `e^{-tp/t2}`.
pub fn single_qubit_channel(spec: &ChannelSpec) -> Result<KrausChannel, ChannelError> {
    spec.validate()?;
    let (r1, r2) = (spec.tp_over_t1, spec.tp_over_t2);
    let ch = match spec.kind {
        ChannelKind::Identity => KrausChannel::identity(2),
        ChannelKind::Dephasing => dephasing(-(-r2).exp_m1())?,
        ChannelKind::Depolarizing => depolarizing(-(-r2).exp_m1())?,
        ChannelKind::AmplitudePhase => {
            let p = -(-r1).exp_m1();
            let p_tilde = -(-(r2 - 0.5 * r1)).exp_m1();
            compose(&amplitude_damping(p)?, &dephasing(p_tilde)?)?
        }
    };
    Ok(KrausChannel {
        label: spec.kind.name().to_string(),
        ..ch
    })
}

/// The channel acting independently on each of `n` qubits; Kraus set is all
/// n-fold tensor products (qubit 0 is the leftmost factor).
pub fn lift_to_register(per_qubit: &KrausChannel, n: usize) -> Result<KrausChannel, ChannelError> {
    if per_qubit.dim() != 2 {
        return Err(ChannelError::NotSingleQubit(per_qubit.dim()));
    }
    if n > MAX_REGISTER_QUBITS {
        return Err(ChannelError::TooManyQubits(n));
    }
    let count = (per_qubit.kraus_ops.len() as f64).powi(n as i32);
    if count > MAX_KRAUS_OPS as f64 {
        return Err(ChannelError::TooManyKraus { qubits: n, count });
    }
    let entries = count * 4f64.powi(n as i32);
    if entries > MAX_LIFTED_ENTRIES {
        return Err(ChannelError::TooLarge(entries));
    }
    let mut ops = vec![ComplexMatrix::identity(1)];
    for _ in 0..n {
        ops = ops
            .iter()
            .flat_map(|a| per_qubit.kraus_ops.iter().map(move |k| a.kron(k)))
            .collect();
    }
    Ok(KrausChannel {
        kraus_ops: ops,
        label: format!("{}^{n}", per_qubit.label),
    })
}

/// Applies a single-qubit channel to every qubit of an `n`-qubit state in turn,
/// without materializing the lifted Kraus set.
pub fn apply_factorwise(
    per_qubit: &KrausChannel,
    n: usize,
    rho: &ComplexMatrix,
) -> Result<ComplexMatrix, ChannelError> {
    if per_qubit.dim() != 2 {
        return Err(ChannelError::NotSingleQubit(per_qubit.dim()));
    }
    if rho.dim() != 1usize << n {
        return Err(ChannelError::DimensionMismatch(1 << n, rho.dim()));
    }
    let dim = rho.dim();
    let mut cur = rho.clone();
    for q in 0..n {
        let bit = 1usize << (n - 1 - q);
        let mut next = ComplexMatrix::zeros(dim);
        for k in &per_qubit.kraus_ops {
            // (K ρ K†)[r,c] = Σ_{a,b} K[r_q,a] ρ[r|a, c|b] conj(K[c_q,b])
            for r in 0..dim {
                let rq = usize::from(r & bit != 0);
                for c in 0..dim {
                    let cq = usize::from(c & bit != 0);
                    let mut acc = Complex64::new(0.0, 0.0);
                    for a in 0..2 {
                        let kra = k.get(rq, a);
                        if kra.norm() == 0.0 {
                            continue;
                        }
                        let ra = if a == 1 { r | bit } else { r & !bit };
                        for b in 0..2 {
                            let kcb = k.get(cq, b);
                            if kcb.norm() == 0.0 {
                                continue;
                            }
                            let cb = if b == 1 { c | bit } else { c & !bit };
                            acc += kra * cur.get(ra, cb) * kcb.conj();
                        }
                    }
                    next.set(r, c, next.get(r, c) + acc);
                }
            }
        }
        cur = next;
    }
    Ok(cur)
}
