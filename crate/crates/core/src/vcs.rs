//! Variational channel state: the pure input minimizing the channel-output energy.
//!
//! Minimizing `Tr[Σ K|ψ⟩⟨ψ|K† H]` over unit vectors is the ground eigenproblem of
//! `H' = Σ K† H K`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use num_complex::Complex64;
use thiserror::Error;

use crate::channels::{ChannelError, KrausChannel};
use crate::linalg::{hermitian_eigensolve, ComplexMatrix, LinalgError, Spectrum, StateVector};
use crate::operators::{symmetry_operator, OperatorError, SymmetryKind};

/// Relative gap below which ground eigenvalues are treated as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-8;

/// Smallest projection of the previous solution onto a degenerate block that
/// still counts as continuation.
pub const CONTINUATION_MIN_OVERLAP: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum VcsError {
    #[error("dimension mismatch: Hamiltonian {0}, other {1}")]
    DimensionMismatch(usize, usize),
    #[error("Hamiltonian is not Hermitian (asymmetry {0:e})")]
    NotHermitian(f64),
    #[error("penalty weight must be finite and non-negative, got {0}")]
    NegativePenalty(f64),
    #[error("state is not normalized (norm {0})")]
    NotNormalized(f64),
    #[error("dimension {0} is not a power of two")]
    NotQubitRegister(usize),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
}

/// `H' = Σ K† H K`.
pub fn transform_hamiltonian(
    h: &ComplexMatrix,
    ch: &KrausChannel,
) -> Result<ComplexMatrix, VcsError> {
    if h.dim() != ch.dim() {
        return Err(VcsError::DimensionMismatch(h.dim(), ch.dim()));
    }
    let mut out = ComplexMatrix::zeros(h.dim());
    for k in ch.kraus_ops() {
        out = &out + &(&(&k.adjoint() * h) * k);
    }
    Ok(out.hermitian_part())
}

/// `⟨φ|ρ|φ⟩`.
pub fn fidelity(rho: &ComplexMatrix, phi: &StateVector) -> Result<f64, VcsError> {
    if rho.dim() != phi.len() {
        return Err(VcsError::DimensionMismatch(rho.dim(), phi.len()));
    }
    let norm = phi.norm();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(VcsError::NotNormalized(norm));
    }
    Ok(rho.expectation(phi))
}

/// Dense number, `S_z` and `S²` matrices for expectation reporting.
#[derive(Clone, Debug)]
pub struct Observables {
    pub mode_count: usize,
    pub number: ComplexMatrix,
    pub sz: ComplexMatrix,
    pub s_squared: ComplexMatrix,
}

impl Observables {
    pub fn new(mode_count: usize) -> Result<Self, VcsError> {
        let dense = |k| -> Result<ComplexMatrix, VcsError> {
            Ok(symmetry_operator(k, mode_count)?.to_dense()?)
        };
        Ok(Self {
            mode_count,
            number: dense(SymmetryKind::Number)?,
            sz: dense(SymmetryKind::Sz)?,
            s_squared: dense(SymmetryKind::SSquared)?,
        })
    }

    pub fn get(&self, kind: SymmetryKind) -> &ComplexMatrix {
        match kind {
            SymmetryKind::Number => &self.number,
            SymmetryKind::Sz => &self.sz,
            SymmetryKind::SSquared => &self.s_squared,
        }
    }

    /// `⟨N⟩`, `⟨S_z⟩`, `⟨S²⟩` keyed by symmetry name.
    pub fn on_state(&self, v: &StateVector) -> BTreeMap<String, f64> {
        [
            SymmetryKind::Number,
            SymmetryKind::Sz,
            SymmetryKind::SSquared,
        ]
        .into_iter()
        .map(|k| (k.name().to_string(), self.get(k).expectation(v)))
        .collect()
    }

    pub fn on_density(&self, rho: &ComplexMatrix) -> BTreeMap<String, f64> {
        [
            SymmetryKind::Number,
            SymmetryKind::Sz,
            SymmetryKind::SSquared,
        ]
        .into_iter()
        .map(|k| (k.name().to_string(), self.get(k).trace_product(rho).re))
        .collect()
    }
}

/// Quadratic constraint `λ (O - o)²`.
#[derive(Clone, Debug)]
pub struct Penalty {
    pub label: String,
    pub operator: ComplexMatrix,
    pub target: f64,
    pub weight: f64,
}

impl Penalty {
    pub fn new(
        label: impl Into<String>,
        operator: ComplexMatrix,
        target: f64,
        weight: f64,
    ) -> Result<Self, VcsError> {
        if !(weight.is_finite() && weight >= 0.0) {
            return Err(VcsError::NegativePenalty(weight));
        }
        Ok(Self {
            label: label.into(),
            operator,
            target,
            weight,
        })
    }

    pub fn symmetry(
        kind: SymmetryKind,
        mode_count: usize,
        target: f64,
        weight: f64,
    ) -> Result<Self, VcsError> {
        let op = symmetry_operator(kind, mode_count)?.to_dense()?;
        Self::new(kind.name(), op, target, weight)
    }

    /// `(O - o)²` without the weight.
    pub fn deviation_squared(&self) -> ComplexMatrix {
        let shifted =
            &self.operator - &ComplexMatrix::identity(self.operator.dim()).scale_real(self.target);
        &shifted * &shifted
    }

    pub fn matrix(&self) -> ComplexMatrix {
        self.deviation_squared().scale_real(self.weight)
    }
}

/// Where penalty terms enter the VCS eigenproblem.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PenaltyPlacement {
    /// `H' + Σ λ(O - o)²`: constrains the prepared input state directly.
    #[default]
    Input,
    /// `Σ K† (H + Σ λ(O - o)²) K`: the penalty is itself passed through the channel.
    PreChannel,
}

impl fmt::Display for PenaltyPlacement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PenaltyPlacement::Input => "input",
            PenaltyPlacement::PreChannel => "pre_channel",
        })
    }
}

impl FromStr for PenaltyPlacement {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "input" => Ok(PenaltyPlacement::Input),
            "pre_channel" => Ok(PenaltyPlacement::PreChannel),
            other => Err(format!("unknown penalty placement '{other}'")),
        }
    }
}

#[derive(Clone, Debug)]
pub struct VcsSolution {
    /// `Tr[ρ_out H]` with the unpenalized Hamiltonian.
    pub energy: f64,
    /// Lowest eigenvalue of the effective (transformed, penalized) problem.
    pub objective: f64,
    pub input_state: StateVector,
    pub output_rho: ComplexMatrix,
    pub fidelity_io: f64,
    /// `⟨N⟩`, `⟨S_z⟩`, `⟨S²⟩` on the input state (empty without observables).
    pub symmetry_expectations: BTreeMap<String, f64>,
    /// Size of the degenerate ground block the input was chosen from.
    pub ground_degeneracy: usize,
    /// True when a degenerate block was resolved by overlap with a previous solution.
    pub continued: bool,
}

/// Exact VCS solver for one Hamiltonian and channel.
#[derive(Clone, Debug)]
pub struct VcsSolver {
    hamiltonian: ComplexMatrix,
    channel: KrausChannel,
    penalties: Vec<Penalty>,
    placement: PenaltyPlacement,
    observables: Option<Observables>,
    effective: OnceLock<ComplexMatrix>,
}

impl VcsSolver {
    pub fn new(hamiltonian: ComplexMatrix, channel: KrausChannel) -> Result<Self, VcsError> {
        if hamiltonian.dim() != channel.dim() {
            return Err(VcsError::DimensionMismatch(
                hamiltonian.dim(),
                channel.dim(),
            ));
        }
        let asym = hamiltonian.hermitian_asymmetry();
        if asym > 1e-10 * hamiltonian.max_abs().max(1.0) {
            return Err(VcsError::NotHermitian(asym));
        }
        Ok(Self {
            hamiltonian,
            channel,
            penalties: Vec::new(),
            placement: PenaltyPlacement::default(),
            observables: None,
            effective: OnceLock::new(),
        })
    }

    pub fn with_penalty(mut self, penalty: Penalty) -> Result<Self, VcsError> {
        if penalty.operator.dim() != self.hamiltonian.dim() {
            return Err(VcsError::DimensionMismatch(
                self.hamiltonian.dim(),
                penalty.operator.dim(),
            ));
        }
        self.penalties.push(penalty);
        self.effective = OnceLock::new();
        Ok(self)
    }

    pub fn with_placement(mut self, placement: PenaltyPlacement) -> Self {
        self.placement = placement;
        self.effective = OnceLock::new();
        self
    }

    /// Attaches symmetry observables; also enables the `S_z` tie-break for degenerate ground spaces.
    pub fn with_observables(mut self, observables: Observables) -> Result<Self, VcsError> {
        if observables.number.dim() != self.hamiltonian.dim() {
            return Err(VcsError::DimensionMismatch(
                self.hamiltonian.dim(),
                observables.number.dim(),
            ));
        }
        self.observables = Some(observables);
        Ok(self)
    }

    pub fn hamiltonian(&self) -> &ComplexMatrix {
        &self.hamiltonian
    }

    pub fn channel(&self) -> &KrausChannel {
        &self.channel
    }

    pub fn observables(&self) -> Option<&Observables> {
        self.observables.as_ref()
    }

    fn penalty_sum(&self) -> ComplexMatrix {
        self.penalties
            .iter()
            .fold(ComplexMatrix::zeros(self.hamiltonian.dim()), |acc, p| {
                &acc + &p.matrix()
            })
    }

    /// The matrix whose ground state is the VCS input.
    pub fn effective_hamiltonian(&self) -> Result<ComplexMatrix, VcsError> {
        if let Some(m) = self.effective.get() {
            return Ok(m.clone());
        }
        let penalty = self.penalty_sum();
        let m = match self.placement {
            PenaltyPlacement::Input => {
                &transform_hamiltonian(&self.hamiltonian, &self.channel)? + &penalty
            }
            PenaltyPlacement::PreChannel => {
                transform_hamiltonian(&(&self.hamiltonian + &penalty), &self.channel)?
            }
        };
        Ok(self.effective.get_or_init(|| m).clone())
    }

    /// VCS optimum. `previous` resolves degenerate ground spaces by continuation.
    pub fn solve(&self, previous: Option<&StateVector>) -> Result<VcsSolution, VcsError> {
        let spec = hermitian_eigensolve(&self.effective_hamiltonian()?)?;
        self.finish(&spec, previous)
    }

    /// Ground state of the untransformed (penalized) Hamiltonian, passed through the channel.
    pub fn no_variation(&self, previous: Option<&StateVector>) -> Result<VcsSolution, VcsError> {
        let spec = hermitian_eigensolve(&(&self.hamiltonian + &self.penalty_sum()))?;
        self.finish(&spec, previous)
    }

    /// Channel output and diagnostics for an arbitrary normalized input.
    pub fn evaluate(&self, input: &StateVector) -> Result<VcsSolution, VcsError> {
        let norm = input.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(VcsError::NotNormalized(norm));
        }
        let objective = self.effective_hamiltonian()?.expectation(input);
        self.package(input.clone(), objective, 1, false)
    }

    fn finish(
        &self,
        spec: &Spectrum,
        previous: Option<&StateVector>,
    ) -> Result<VcsSolution, VcsError> {
        let sz = self.observables.as_ref().map(|o| &o.sz);
        let pick = select_ground(spec, previous, sz);
        self.package(pick.state, spec.ground_energy(), pick.block, pick.continued)
    }

    fn package(
        &self,
        input_state: StateVector,
        objective: f64,
        ground_degeneracy: usize,
        continued: bool,
    ) -> Result<VcsSolution, VcsError> {
        let output_rho = self.channel.apply(&ComplexMatrix::outer(&input_state))?;
        let energy = self.hamiltonian.trace_product(&output_rho).re;
        let fidelity_io = fidelity(&output_rho, &input_state)?;
        let symmetry_expectations = self
            .observables
            .as_ref()
            .map(|o| o.on_state(&input_state))
            .unwrap_or_default();
        Ok(VcsSolution {
            energy,
            objective,
            input_state,
            output_rho,
            fidelity_io,
            symmetry_expectations,
            ground_degeneracy,
            continued,
        })
    }
}

/// One-shot VCS solve.
pub fn solve_vcs(
    h: &ComplexMatrix,
    ch: &KrausChannel,
    penalties: &[Penalty],
) -> Result<VcsSolution, VcsError> {
    penalties
        .iter()
        .try_fold(VcsSolver::new(h.clone(), ch.clone())?, |s, p| {
            s.with_penalty(p.clone())
        })?
        .solve(None)
}

/// One-shot no-variation baseline.
pub fn no_variation_baseline(
    h: &ComplexMatrix,
    ch: &KrausChannel,
    penalties: &[Penalty],
) -> Result<VcsSolution, VcsError> {
    penalties
        .iter()
        .try_fold(VcsSolver::new(h.clone(), ch.clone())?, |s, p| {
            s.with_penalty(p.clone())
        })?
        .no_variation(None)
}

pub(crate) struct GroundPick {
    pub state: StateVector,
    pub block: usize,
    pub continued: bool,
}

/// Picks a ground vector. Within a degenerate block: the normalized projection
/// of `previous` when it overlaps the block, otherwise the block's maximal-`S_z`
/// vector, otherwise the first column. The largest component is made real-positive.
pub(crate) fn select_ground(
    spec: &Spectrum,
    previous: Option<&StateVector>,
    sz: Option<&ComplexMatrix>,
) -> GroundPick {
    let e0 = spec.ground_energy();
    let block = spec.ground_block(DEGENERACY_TOL * e0.abs().max(1.0));
    let basis = spec.eigenvectors.columns(0, block).into_owned();
    let mut continued = false;
    let mut state = spec.eigenvector(0);
    if block > 1 {
        let projected = previous.and_then(|prev| {
            let c = basis.adjoint() * prev;
            let n = c.norm();
            (n > CONTINUATION_MIN_OVERLAP).then(|| &basis * c / Complex64::new(n, 0.0))
        });
        if let Some(v) = projected {
            state = v;
            continued = true;
        } else if let Some(sz) = sz {
            let restricted =
                ComplexMatrix::from_dmatrix(basis.adjoint() * sz.as_dmatrix() * &basis)
                    .expect("square");
            if let Ok(inner) = hermitian_eigensolve(&restricted) {
                let top = inner.eigenvector(block - 1);
                state = &basis * top;
            }
        }
    }
    GroundPick {
        state: fix_phase(state),
        block,
        continued,
    }
}

/// Scales `v` so its first largest-magnitude component is real and positive.
pub fn fix_phase(v: StateVector) -> StateVector {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return v;
    }
    let pivot = v
        .iter()
        .find(|z| z.norm() >= max * (1.0 - 1e-10))
        .copied()
        .expect("nonempty");
    let n = v.norm();
    v * (pivot.conj() / (pivot.norm() * n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{lift_to_register, single_qubit_channel, ChannelKind, ChannelSpec};
    use crate::random::{random_hermitian, random_state, random_unitary};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn real(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn register_channel(kind: ChannelKind, n: usize) -> KrausChannel {
        let single = single_qubit_channel(&ChannelSpec::new(kind, 0.05, 0.05)).unwrap();
        lift_to_register(&single, n).unwrap()
    }

    #[test]
    fn identity_channel_recovers_ground_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let h = random_hermitian(8, &mut rng);
        let sol = solve_vcs(&h, &KrausChannel::identity(8), &[]).unwrap();
        let exact = hermitian_eigensolve(&h).unwrap().ground_energy();
        assert!((sol.energy - exact).abs() < 1e-12);
        assert!((sol.fidelity_io - 1.0).abs() < 1e-12);
        let base = no_variation_baseline(&h, &KrausChannel::identity(8), &[]).unwrap();
        assert!((base.energy - sol.energy).abs() < 1e-12);
    }

    #[test]
    fn unitary_channel_preserves_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let h = random_hermitian(8, &mut rng);
        let u = random_unitary(8, &mut rng);
        let ch = KrausChannel::new(vec![u], "unitary").unwrap();
        let hp = transform_hamiltonian(&h, &ch).unwrap();
        let a = hermitian_eigensolve(&h).unwrap().eigenvalues;
        let b = hermitian_eigensolve(&hp).unwrap().eigenvalues;
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn transform_rejects_dimension_mismatch() {
        let h = ComplexMatrix::identity(4);
        assert!(matches!(
            transform_hamiltonian(&h, &KrausChannel::identity(2)),
            Err(VcsError::DimensionMismatch(4, 2))
        ));
    }

    #[test]
    fn variational_bound_over_random_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = random_hermitian(8, &mut rng);
        for kind in [
            ChannelKind::Dephasing,
            ChannelKind::AmplitudePhase,
            ChannelKind::Depolarizing,
        ] {
            let ch = register_channel(kind, 3);
            let sol = solve_vcs(&h, &ch, &[]).unwrap();
            assert!((sol.energy - sol.objective).abs() < 1e-10);
            for _ in 0..200 {
                let phi = random_state(8, &mut rng);
                let e = h
                    .trace_product(&ch.apply(&ComplexMatrix::outer(&phi)).unwrap())
                    .re;
                assert!(sol.energy <= e + 1e-12);
            }
            let base = no_variation_baseline(&h, &ch, &[]).unwrap();
            assert!(sol.energy <= base.energy + 1e-12);
        }
    }

    #[test]
    fn dephasing_fixes_computational_ground_state() {
        let h = ComplexMatrix::from_real_diagonal(&[0.5, -1.0, 0.2, 0.7]);
        let sol = solve_vcs(&h, &register_channel(ChannelKind::Dephasing, 2), &[]).unwrap();
        assert!((sol.fidelity_io - 1.0).abs() < 1e-12);
        assert!((sol.energy + 1.0).abs() < 1e-12);
    }

    #[test]
    fn fidelity_definitions() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let phi = random_state(4, &mut rng);
        assert!((fidelity(&ComplexMatrix::outer(&phi), &phi).unwrap() - 1.0).abs() < 1e-12);
        let mixed = ComplexMatrix::identity(4).scale_real(0.25);
        assert!((fidelity(&mixed, &phi).unwrap() - 0.25).abs() < 1e-12);
        assert!(fidelity(&mixed, &(phi.clone() * real(2.0))).is_err());
    }

    #[test]
    fn penalty_monotonicity() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let h = random_hermitian(16, &mut rng);
        let ch = register_channel(ChannelKind::AmplitudePhase, 4);
        let mut last = f64::INFINITY;
        for weight in [0.0, 1.0, 10.0, 100.0] {
            let pen = Penalty::symmetry(SymmetryKind::Number, 4, 2.0, weight).unwrap();
            let dev = pen.deviation_squared();
            let sol = solve_vcs(&h, &ch, &[pen]).unwrap();
            let d = dev.expectation(&sol.input_state);
            assert!(d <= last + 1e-9, "weight {weight}: {d} > {last}");
            last = d;
        }
        assert!(Penalty::symmetry(SymmetryKind::Number, 4, 2.0, -1.0).is_err());
    }

    #[test]
    fn degenerate_block_uses_sz_then_continuation() {
        // Two degenerate levels: |0001> (S_z = -1/2) and |0010> (S_z = +1/2).
        let mut diag = vec![1.0; 16];
        diag[0b0001] = -1.0;
        diag[0b0010] = -1.0;
        let h = ComplexMatrix::from_real_diagonal(&diag);
        let solver = VcsSolver::new(h, KrausChannel::identity(16))
            .unwrap()
            .with_observables(Observables::new(4).unwrap())
            .unwrap();
        let first = solver.solve(None).unwrap();
        assert_eq!(first.ground_degeneracy, 2);
        assert!(!first.continued);
        assert!((first.input_state[0b0010].norm() - 1.0).abs() < 1e-12);
        assert!((first.symmetry_expectations["sz"] - 0.5).abs() < 1e-12);

        let mut prev = StateVector::zeros(16);
        prev[0b0001] = real(1.0);
        let next = solver.solve(Some(&prev)).unwrap();
        assert!(next.continued);
        assert!((next.input_state[0b0001].re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn placements_differ_only_when_channel_acts() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let h = random_hermitian(16, &mut rng);
        let pen = Penalty::symmetry(SymmetryKind::Number, 4, 2.0, 5.0).unwrap();
        let id = KrausChannel::identity(16);
        let a = VcsSolver::new(h.clone(), id.clone())
            .unwrap()
            .with_penalty(pen.clone())
            .unwrap();
        let b = a.clone().with_placement(PenaltyPlacement::PreChannel);
        let (sa, sb) = (a.solve(None).unwrap(), b.solve(None).unwrap());
        assert!((sa.objective - sb.objective).abs() < 1e-10);
    }
}
