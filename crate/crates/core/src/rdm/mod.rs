//! Fermionic reduced density matrices with the `1/k!` normalization
//! `ᵏD^{i₁..i_k}_{j₁..j_k} = (1/k!) ⟨a†_{i₁}..a†_{i_k} a_{j_k}..a_{j₁}⟩`.

mod sampling;
pub(crate) mod wedge;

use itertools::Itertools;
use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::{ComplexMatrix, StateVector};
use crate::molecule::TwoBodyTensors;
use crate::operators::fermion::apply_ladders;
use crate::operators::{Ladder, OperatorError, MAX_DENSE_MODES};

pub use sampling::{estimate_pauli, sampled_rdms, PauliEstimate};
pub use wedge::{cumulants_from_rdms, reconstruct_rdms, wedge, CumulantSet};

/// Largest tensor stored densely (`M^{2k}` entries); admits `M = 8` at `k = 4`.
pub const MAX_TENSOR_ENTRIES: usize = 1 << 24;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RdmError {
    #[error("{modes} modes at order {rank} exceeds the dense tensor limit")]
    TooLarge { modes: usize, rank: usize },
    #[error("RDM order must be between 1 and 4, got {0}")]
    BadOrder(usize),
    #[error("missing {0}-body tensor")]
    Missing(usize),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("state dimension {0} is not a power of two")]
    NotFockSpace(usize),
    #[error("state is not normalized (norm or trace {0})")]
    NotNormalized(f64),
    #[error("Pauli estimation needs a single string with coefficient +1 or -1")]
    NotPauliString,
    #[error("shot count must be at least 1")]
    NoShots,
    #[error(transparent)]
    Operator(#[from] OperatorError),
}

/// Dense rank-`(k,k)` tensor; entries stored upper indices first, then lower.
#[derive(Clone, Debug, PartialEq)]
pub struct RdmTensor {
    rank: usize,
    modes: usize,
    data: Vec<Complex64>,
}

impl RdmTensor {
    pub fn zeros(rank: usize, modes: usize) -> Result<Self, RdmError> {
        let len = modes
            .checked_pow(2 * rank as u32)
            .filter(|&n| n <= MAX_TENSOR_ENTRIES)
            .ok_or(RdmError::TooLarge { modes, rank })?;
        Ok(Self {
            rank,
            modes,
            data: vec![Complex64::new(0.0, 0.0); len],
        })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    #[inline]
    pub fn offset(&self, index: &[usize]) -> usize {
        debug_assert_eq!(index.len(), 2 * self.rank);
        index.iter().fold(0, |acc, &i| acc * self.modes + i)
    }

    /// Entry at `upper ++ lower`.
    #[inline]
    pub fn get(&self, index: &[usize]) -> Complex64 {
        self.data[self.offset(index)]
    }

    pub fn set(&mut self, index: &[usize], value: Complex64) {
        let o = self.offset(index);
        self.data[o] = value;
    }

    fn check(&self, other: &Self) -> Result<(), RdmError> {
        if self.rank != other.rank || self.modes != other.modes {
            return Err(RdmError::Shape(format!(
                "rank {} over {} modes vs rank {} over {} modes",
                self.rank, self.modes, other.rank, other.modes
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, RdmError> {
        self.check(other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Self {
            rank: self.rank,
            modes: self.modes,
            data,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, RdmError> {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            rank: self.rank,
            modes: self.modes,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64, RdmError> {
        self.check(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// `Σ_I T^I_I` over all index tuples.
    pub fn trace(&self) -> Complex64 {
        let n = self.modes.pow(self.rank as u32);
        (0..n).map(|i| self.data[i * n + i]).sum()
    }

    /// `max |T^I_J - conj(T^J_I)|`.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.modes.pow(self.rank as u32);
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.data[i * n + j] - self.data[j * n + i].conj()).norm());
            }
        }
        worst
    }

    /// Largest violation of antisymmetry under a swap of adjacent indices within
    /// the upper or the lower group.
    pub fn antisymmetry_defect(&self) -> f64 {
        let k = self.rank;
        let mut worst: f64 = 0.0;
        let mut idx = vec![0usize; 2 * k];
        for flat in 0..self.data.len() {
            let mut rem = flat;
            for slot in idx.iter_mut().rev() {
                *slot = rem % self.modes;
                rem /= self.modes;
            }
            let v = self.data[flat];
            for group in [0, k] {
                for a in 0..k.saturating_sub(1) {
                    let mut swapped = idx.clone();
                    swapped.swap(group + a, group + a + 1);
                    worst = worst.max((v + self.get(&swapped)).norm());
                }
            }
        }
        worst
    }

    /// Writes `value` at sorted `(upper, lower)` and every permutation of each
    /// group, with the permutation signs.
    pub(crate) fn scatter(
        &mut self,
        upper: &[usize],
        lower: &[usize],
        value: Complex64,
        perms: &[(Vec<usize>, f64)],
    ) {
        let k = self.rank;
        let mut idx = vec![0usize; 2 * k];
        for (pu, su) in perms {
            for (slot, &p) in pu.iter().enumerate() {
                idx[slot] = upper[p];
            }
            for (pl, sl) in perms {
                for (slot, &p) in pl.iter().enumerate() {
                    idx[k + slot] = lower[p];
                }
                let o = self.offset(&idx);
                self.data[o] = value * (su * sl);
            }
        }
    }
}

/// Permutations of `0..k` with their signs.
pub(crate) fn signed_permutations(k: usize) -> Vec<(Vec<usize>, f64)> {
    (0..k)
        .permutations(k)
        .map(|p| {
            let inversions = (0..k)
                .flat_map(|i| (i + 1..k).map(move |j| (i, j)))
                .filter(|&(i, j)| p[i] > p[j])
                .count();
            let sign = if inversions % 2 == 0 { 1.0 } else { -1.0 };
            (p, sign)
        })
        .collect()
}

/// RDMs `D1..D_max_k` over `mode_count` modes.
#[derive(Clone, Debug, PartialEq)]
pub struct RdmSet {
    pub mode_count: usize,
    tensors: Vec<RdmTensor>,
}

impl RdmSet {
    pub fn new(mode_count: usize, tensors: Vec<RdmTensor>) -> Result<Self, RdmError> {
        for (i, t) in tensors.iter().enumerate() {
            if t.rank != i + 1 || t.modes != mode_count {
                return Err(RdmError::Shape(format!(
                    "tensor {} has rank {} over {} modes",
                    i + 1,
                    t.rank,
                    t.modes
                )));
            }
        }
        Ok(Self {
            mode_count,
            tensors,
        })
    }

    pub fn max_k(&self) -> usize {
        self.tensors.len()
    }

    pub fn get(&self, k: usize) -> Option<&RdmTensor> {
        k.checked_sub(1).and_then(|i| self.tensors.get(i))
    }

    pub fn require(&self, k: usize) -> Result<&RdmTensor, RdmError> {
        self.get(k).ok_or(RdmError::Missing(k))
    }

    pub fn tensors(&self) -> &[RdmTensor] {
        &self.tensors
    }

    /// Replaces or appends the `k`-body tensor; `k` may extend the set by one.
    pub fn with_tensor(mut self, tensor: RdmTensor) -> Result<Self, RdmError> {
        let k = tensor.rank;
        if tensor.modes != self.mode_count || k == 0 || k > self.tensors.len() + 1 {
            return Err(RdmError::Shape(format!("cannot place rank {k} tensor")));
        }
        if k == self.tensors.len() + 1 {
            self.tensors.push(tensor);
        } else {
            self.tensors[k - 1] = tensor;
        }
        Ok(self)
    }

    /// Keeps `D1..D_k`.
    pub fn truncated(&self, k: usize) -> Self {
        Self {
            mode_count: self.mode_count,
            tensors: self.tensors.iter().take(k).cloned().collect(),
        }
    }
}

/// Pure or mixed state in the `2^M` occupation basis.
#[derive(Clone, Copy, Debug)]
pub enum RdmSource<'a> {
    Pure(&'a StateVector),
    Mixed(&'a ComplexMatrix),
}

impl RdmSource<'_> {
    pub fn dim(&self) -> usize {
        match self {
            RdmSource::Pure(v) => v.len(),
            RdmSource::Mixed(m) => m.dim(),
        }
    }

    pub fn mode_count(&self) -> Result<usize, RdmError> {
        let d = self.dim();
        if !d.is_power_of_two() {
            return Err(RdmError::NotFockSpace(d));
        }
        Ok(d.trailing_zeros() as usize)
    }

    fn check_normalized(&self) -> Result<(), RdmError> {
        let n = match self {
            RdmSource::Pure(v) => v.norm(),
            RdmSource::Mixed(m) => m.trace().re,
        };
        if (n - 1.0).abs() > 1e-10 {
            return Err(RdmError::NotNormalized(n));
        }
        Ok(())
    }

    /// `⟨O⟩` for a dense operator.
    pub fn expectation(&self, op: &ComplexMatrix) -> f64 {
        match self {
            RdmSource::Pure(v) => op.expectation(v),
            RdmSource::Mixed(m) => op.trace_product(m).re,
        }
    }
}

/// `A_J = a_{j_k} .. a_{j_1}` as the ladder sequence `[a_{j_k}, .., a_{j_1}]`.
fn annihilation_string(tuple: &[usize]) -> Vec<Ladder> {
    tuple.iter().rev().map(|&j| Ladder::annihilate(j)).collect()
}

/// Sparse action of `A_J` on every basis state.
fn ladder_map(seq: &[Ladder], modes: usize) -> Vec<Option<(usize, f64)>> {
    (0..1usize << modes)
        .map(|s| apply_ladders(seq, s, modes))
        .collect()
}

fn factorial(k: usize) -> f64 {
    (1..=k).product::<usize>() as f64
}

fn rdm_of_order(source: RdmSource<'_>, k: usize, modes: usize) -> Result<RdmTensor, RdmError> {
    let mut t = RdmTensor::zeros(k, modes)?;
    let tuples: Vec<Vec<usize>> = (0..modes).combinations(k).collect();
    let maps: Vec<_> = tuples
        .iter()
        .map(|j| ladder_map(&annihilation_string(j), modes))
        .collect();
    let perms = signed_permutations(k);
    let norm = 1.0 / factorial(k);
    let dim = 1usize << modes;
    match source {
        RdmSource::Pure(psi) => {
            // φ_J = A_J ψ; D^I_J = ⟨φ_I|φ_J⟩ / k!
            let phis: Vec<StateVector> = maps
                .iter()
                .map(|map| {
                    let mut phi = StateVector::zeros(dim);
                    for (s, hit) in map.iter().enumerate() {
                        if let Some((to, sign)) = hit {
                            phi[*to] += psi[s] * sign;
                        }
                    }
                    phi
                })
                .collect();
            for (a, ia) in tuples.iter().enumerate() {
                for (b, jb) in tuples.iter().enumerate() {
                    let v = phis[a].dotc(&phis[b]) * norm;
                    t.scatter(ia, jb, v, &perms);
                }
            }
        }
        RdmSource::Mixed(rho) => {
            // Tr[A_I† A_J ρ] = Σ_b s_I s_J ρ[b, a] over A_J|b⟩ = A_I|a⟩
            let inverses: Vec<Vec<Option<(usize, f64)>>> = maps
                .iter()
                .map(|map| {
                    let mut inv = vec![None; dim];
                    for (s, hit) in map.iter().enumerate() {
                        if let Some((to, sign)) = hit {
                            inv[*to] = Some((s, *sign));
                        }
                    }
                    inv
                })
                .collect();
            let rho = rho.as_dmatrix();
            for (a, ia) in tuples.iter().enumerate() {
                for (b, jb) in tuples.iter().enumerate() {
                    let mut v = Complex64::new(0.0, 0.0);
                    for (s, hit) in maps[b].iter().enumerate() {
                        if let Some((c, sj)) = hit {
                            if let Some((src, si)) = inverses[a][*c] {
                                v += rho[(s, src)] * (si * sj);
                            }
                        }
                    }
                    t.scatter(ia, jb, v * norm, &perms);
                }
            }
        }
    }
    Ok(t)
}

/// `D1..D_max_k` of a normalized pure state or unit-trace density matrix.
pub fn compute_rdms(source: RdmSource<'_>, max_k: usize) -> Result<RdmSet, RdmError> {
    if !(1..=4).contains(&max_k) {
        return Err(RdmError::BadOrder(max_k));
    }
    let modes = source.mode_count()?;
    if modes > MAX_DENSE_MODES {
        return Err(RdmError::TooLarge { modes, rank: max_k });
    }
    RdmTensor::zeros(max_k, modes)?;
    source.check_normalized()?;
    let tensors = (1..=max_k)
        .map(|k| rdm_of_order(source, k, modes))
        .collect::<Result<Vec<_>, _>>()?;
    RdmSet::new(modes, tensors)
}

/// `⟨H⟩ = c + Σ h_ik D^i_k + Σ h_ijkl D^{ij}_{lk}`.
pub fn contract_energy(h: &TwoBodyTensors, rdms: &RdmSet) -> Result<f64, RdmError> {
    let m = h.modes;
    if rdms.mode_count != m {
        return Err(RdmError::Shape(format!(
            "{} integral modes vs {} RDM modes",
            m, rdms.mode_count
        )));
    }
    let d1 = rdms.require(1)?;
    let d2 = rdms.require(2)?;
    let mut e = h.constant;
    for i in 0..m {
        for k in 0..m {
            e += h.h1(i, k) * d1.get(&[i, k]);
        }
    }
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                for l in 0..m {
                    let w = h.h2(i, j, k, l);
                    if w.norm() != 0.0 {
                        e += w * d2.get(&[i, j, l, k]);
                    }
                }
            }
        }
    }
    Ok(e.re)
}
