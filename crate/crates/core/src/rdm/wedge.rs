//! Grassmann wedge products and the cumulant expansion of RDMs.

use std::collections::HashMap;

use itertools::Itertools;
use num_complex::Complex64;

use super::{signed_permutations, RdmError, RdmSet, RdmTensor};

/// Antisymmetrized entries `Anti(t)^S_T` for all sorted index sets `S`, `T`.
struct SortedTable {
    index: HashMap<Vec<usize>, usize>,
    values: Vec<Complex64>,
    count: usize,
}

impl SortedTable {
    fn new(t: &RdmTensor) -> Self {
        let k = t.rank();
        let combos: Vec<Vec<usize>> = (0..t.modes()).combinations(k).collect();
        let perms = signed_permutations(k);
        let norm = 1.0 / (perms.len() * perms.len()) as f64;
        let count = combos.len();
        let mut values = vec![Complex64::new(0.0, 0.0); count * count];
        let mut idx = vec![0usize; 2 * k];
        for (a, s) in combos.iter().enumerate() {
            for (b, u) in combos.iter().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for (pu, su) in &perms {
                    for (slot, &p) in pu.iter().enumerate() {
                        idx[slot] = s[p];
                    }
                    for (pl, sl) in &perms {
                        for (slot, &p) in pl.iter().enumerate() {
                            idx[k + slot] = u[p];
                        }
                        acc += t.get(&idx) * (su * sl);
                    }
                }
                values[a * count + b] = acc * norm;
            }
        }
        let index = combos
            .into_iter()
            .enumerate()
            .map(|(i, c)| (c, i))
            .collect();
        Self {
            index,
            values,
            count,
        }
    }

    fn get(&self, upper: &[usize], lower: &[usize]) -> Complex64 {
        self.values[self.index[upper] * self.count + self.index[lower]]
    }
}

/// Ways to split positions `0..n` into an ascending `m`-subset and its
/// complement, with the sign of the resulting shuffle.
fn shuffles(n: usize, m: usize) -> Vec<(Vec<usize>, Vec<usize>, f64)> {
    (0..n)
        .combinations(m)
        .map(|first| {
            let rest: Vec<usize> = (0..n).filter(|p| !first.contains(p)).collect();
            let displaced: usize = first.iter().enumerate().map(|(slot, &p)| p - slot).sum();
            let sign = if displaced.is_multiple_of(2) {
                1.0
            } else {
                -1.0
            };
            (first, rest, sign)
        })
        .collect()
}

/// `(a ∧ b)^{i₁..i_N}_{j₁..j_N} = (1/N!)² Σ_{π,σ} ε(π)ε(σ) a^{π(i)..}_{σ(j)..} b^{..}_{..}`.
pub fn wedge(a: &RdmTensor, b: &RdmTensor) -> Result<RdmTensor, RdmError> {
    if a.modes() != b.modes() {
        return Err(RdmError::Shape(format!(
            "{} vs {} modes",
            a.modes(),
            b.modes()
        )));
    }
    let (m, n) = (a.rank(), b.rank());
    let total = m + n;
    let modes = a.modes();
    let mut out = RdmTensor::zeros(total, modes)?;
    let (ta, tb) = (SortedTable::new(a), SortedTable::new(b));
    let splits = shuffles(total, m);
    let binom = splits.len() as f64;
    let norm = 1.0 / (binom * binom);
    let perms = signed_permutations(total);
    let combos: Vec<Vec<usize>> = (0..modes).combinations(total).collect();
    let pick = |set: &[usize], pos: &[usize]| pos.iter().map(|&p| set[p]).collect::<Vec<_>>();
    for upper in &combos {
        for lower in &combos {
            let mut v = Complex64::new(0.0, 0.0);
            for (su, ru, eu) in &splits {
                let (ua, ub) = (pick(upper, su), pick(upper, ru));
                for (sl, rl, el) in &splits {
                    let x = ta.get(&ua, &pick(lower, sl));
                    if x.norm() == 0.0 {
                        continue;
                    }
                    v += x * tb.get(&ub, &pick(lower, rl)) * (eu * el);
                }
            }
            if v.norm() != 0.0 {
                out.scatter(upper, lower, v * norm, &perms);
            }
        }
    }
    Ok(out)
}

/// Cumulants `Δ1..Δk`, stored like RDMs.
#[derive(Clone, Debug, PartialEq)]
pub struct CumulantSet {
    inner: RdmSet,
}

impl CumulantSet {
    pub fn new(mode_count: usize, tensors: Vec<RdmTensor>) -> Result<Self, RdmError> {
        Ok(Self {
            inner: RdmSet::new(mode_count, tensors)?,
        })
    }

    pub fn mode_count(&self) -> usize {
        self.inner.mode_count
    }

    pub fn max_k(&self) -> usize {
        self.inner.max_k()
    }

    pub fn get(&self, k: usize) -> Option<&RdmTensor> {
        self.inner.get(k)
    }

    pub fn require(&self, k: usize) -> Result<&RdmTensor, RdmError> {
        self.inner.require(k)
    }

    pub fn tensors(&self) -> &[RdmTensor] {
        self.inner.tensors()
    }
}

fn accumulate(acc: &mut Option<RdmTensor>, term: RdmTensor, weight: f64) -> Result<(), RdmError> {
    let scaled = term.scale(weight);
    *acc = Some(match acc.take() {
        Some(t) => t.add(&scaled)?,
        None => scaled,
    });
    Ok(())
}

/// The product (disconnected) part of `ᵏD` built from lower cumulants:
/// `Δ1∧Δ1`; `3Δ2∧Δ1 + Δ1∧Δ1∧Δ1`; `4Δ3∧Δ1 + 3Δ2∧Δ2 + 6Δ2∧Δ1∧Δ1 + Δ1∧Δ1∧Δ1∧Δ1`.
/// `delta(j)` returning `None` means `Δj = 0`.
fn disconnected<'a>(
    k: usize,
    modes: usize,
    delta: impl Fn(usize) -> Option<&'a RdmTensor>,
) -> Result<RdmTensor, RdmError> {
    let mut acc: Option<RdmTensor> = None;
    let d1 = delta(1);
    let d11 = d1.map(|d| wedge(d, d)).transpose()?;
    match k {
        1 => {}
        2 => {
            if let Some(x) = &d11 {
                accumulate(&mut acc, x.clone(), 1.0)?;
            }
        }
        3 => {
            if let (Some(d2), Some(d1)) = (delta(2), d1) {
                accumulate(&mut acc, wedge(d2, d1)?, 3.0)?;
            }
            if let (Some(x), Some(d1)) = (&d11, d1) {
                accumulate(&mut acc, wedge(x, d1)?, 1.0)?;
            }
        }
        4 => {
            if let (Some(d3), Some(d1)) = (delta(3), d1) {
                accumulate(&mut acc, wedge(d3, d1)?, 4.0)?;
            }
            if let Some(d2) = delta(2) {
                accumulate(&mut acc, wedge(d2, d2)?, 3.0)?;
                if let Some(x) = &d11 {
                    accumulate(&mut acc, wedge(d2, x)?, 6.0)?;
                }
            }
            if let Some(x) = &d11 {
                accumulate(&mut acc, wedge(x, x)?, 1.0)?;
            }
        }
        _ => return Err(RdmError::BadOrder(k)),
    }
    match acc {
        Some(t) => Ok(t),
        None => RdmTensor::zeros(k, modes),
    }
}

/// Inverts the cumulant expansion order by order: `Δk = ᵏD - (product terms)`.
pub fn cumulants_from_rdms(rdms: &RdmSet) -> Result<CumulantSet, RdmError> {
    let modes = rdms.mode_count;
    let mut deltas: Vec<RdmTensor> = Vec::new();
    for k in 1..=rdms.max_k() {
        let dk = rdms.require(k)?;
        let dis = disconnected(k, modes, |j| deltas.get(j - 1))?;
        deltas.push(dk.sub(&dis)?);
    }
    CumulantSet::new(modes, deltas)
}

/// Re-expands `D1..D_max_k` with every `Δj`, `j > zero_above`, set to zero.
pub fn reconstruct_rdms(
    cumulants: &CumulantSet,
    zero_above: usize,
    max_k: usize,
) -> Result<RdmSet, RdmError> {
    if !(1..=4).contains(&max_k) {
        return Err(RdmError::BadOrder(max_k));
    }
    let modes = cumulants.mode_count();
    for j in 1..=zero_above.min(max_k) {
        cumulants.require(j)?;
    }
    let delta = |j: usize| {
        if j <= zero_above {
            cumulants.get(j)
        } else {
            None
        }
    };
    let mut tensors = Vec::new();
    for k in 1..=max_k {
        let dis = disconnected(k, modes, delta)?;
        tensors.push(match delta(k) {
            Some(dk) => dk.add(&dis)?,
            None => dis,
        });
    }
    RdmSet::new(modes, tensors)
}
