//! Sweep experiments producing the figure data as deterministic CSV tables.

pub mod config;
mod point;

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use thiserror::Error;

use crate::channels::{
    lift_to_register, single_qubit_channel, ChannelError, ChannelKind, KrausChannel,
};
use crate::format::fmt_real;
use crate::linalg::{ComplexMatrix, LinalgError, StateVector};
use crate::molecule::{
    assemble_hamiltonian, fci_sector, hartree_fock_state, load_sweep, MoleculeError, SweepPoint,
    TwoBodyTensors,
};
use crate::operators::{symmetry_operator, OperatorError, SymmetryKind};
use crate::qse::{
    approximate_lr, build_lr_from_rdms, build_subspace_direct, fermionic_basis, project_symmetry,
    qubit_basis, solve_subspace, ApproxMethod, ApproxOptions, BasisKind, ExpansionBasis, QseError,
    SubspaceProblem,
};
use crate::rdm::{compute_rdms, contract_energy, sampled_rdms, RdmError, RdmSource};
use crate::vcs::{fidelity, Observables, Penalty, VcsError, VcsSolution, VcsSolver};

pub use config::{
    ConfigError, ExperimentConfig, ExperimentKind, PenaltySpec, ProjectionSpec, ReferenceKind,
    Route, ShotSpec, SubspaceSpec, DEFAULT_PENALTY_WEIGHT,
};
pub use point::single_point_report;

#[derive(Debug, Error)]
pub enum PointError {
    #[error(transparent)]
    Vcs(#[from] VcsError),
    #[error(transparent)]
    Qse(#[from] QseError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Rdm(#[from] RdmError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Molecule(#[from] MoleculeError),
}

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Input(#[from] MoleculeError),
    #[error("at R = {} ({label}): {source}", fmt_real(*.bond_length))]
    Point {
        bond_length: f64,
        label: String,
        source: PointError,
    },
    #[error("cannot write {path}: {message}")]
    Output { path: PathBuf, message: String },
}

impl ExperimentError {
    /// 2 for configuration and input problems, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            ExperimentError::Config(_) | ExperimentError::Input(_) => 2,
            ExperimentError::Point { .. } | ExperimentError::Output { .. } => 3,
        }
    }
}

/// Rows of rendered cells under a fixed header.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(columns: &[&str]) -> Self {
        Self {
            header: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Cells of column `name` parsed as numbers (`nan` for unparsable cells).
    pub fn numbers(&self, name: &str) -> Vec<f64> {
        let Some(c) = self.column(name) else {
            return Vec::new();
        };
        self.rows
            .iter()
            .map(|r| r[c].parse().unwrap_or(f64::NAN))
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells")
    }
}

#[derive(Clone, Debug)]
pub struct RunSummary {
    pub experiment: ExperimentKind,
    pub points: usize,
    pub rows: usize,
    /// Degenerate VCS ground spaces resolved by overlap with the previous point.
    pub continuation_events: usize,
    pub wall_time: Duration,
}

impl fmt::Display for RunSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} points, {} rows, {} continuation events, {:.3} s",
            self.experiment,
            self.points,
            self.rows,
            self.continuation_events,
            self.wall_time.as_secs_f64()
        )
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentOutput {
    pub table: Table,
    /// Human-readable report (single-point runs only).
    pub report: Option<String>,
    pub summary: RunSummary,
}

/// Hamiltonian and observables at one sweep point.
pub(crate) struct System {
    pub bond_length: f64,
    pub label: String,
    pub nelec: usize,
    pub modes: usize,
    pub tensors: TwoBodyTensors,
    pub h: ComplexMatrix,
    pub observables: Observables,
}

impl System {
    pub(crate) fn new(point: &SweepPoint) -> Result<Self, PointError> {
        point.integrals.validate()?;
        let modes = point.integrals.mode_count();
        let h = assemble_hamiltonian(&point.integrals).to_dense()?;
        Ok(Self {
            bond_length: point.bond_length,
            label: point.label.clone(),
            nelec: point.integrals.nelec,
            modes,
            tensors: TwoBodyTensors::from_integrals(&point.integrals),
            h,
            observables: Observables::new(modes)?,
        })
    }

    pub(crate) fn symmetry_dense(&self) -> BTreeMap<String, ComplexMatrix> {
        SYMMETRIES
            .into_iter()
            .map(|k| (k.name().to_string(), self.observables.get(k).clone()))
            .collect()
    }

    pub(crate) fn symmetry_tensors(&self) -> Result<BTreeMap<String, TwoBodyTensors>, PointError> {
        SYMMETRIES
            .into_iter()
            .map(|k| {
                let op = symmetry_operator(k, self.modes)?;
                Ok((k.name().to_string(), TwoBodyTensors::from_fermion(&op)?))
            })
            .collect()
    }

    /// Ground state and energy of the `nelec` sector.
    pub(crate) fn exact_ground(&self) -> Result<(f64, StateVector), PointError> {
        let spec = fci_sector(&self.h, self.nelec)?;
        Ok((
            spec.ground_energy(),
            crate::vcs::fix_phase(spec.eigenvector(0)),
        ))
    }

    fn fail(&self, source: impl Into<PointError>) -> ExperimentError {
        ExperimentError::Point {
            bond_length: self.bond_length,
            label: self.label.clone(),
            source: source.into(),
        }
    }
}

const SYMMETRIES: [SymmetryKind; 3] = [
    SymmetryKind::Number,
    SymmetryKind::Sz,
    SymmetryKind::SSquared,
];

fn load_systems(cfg: &ExperimentConfig) -> Result<Vec<System>, ExperimentError> {
    let manifest = cfg.sweep_manifest.as_ref().ok_or_else(|| {
        ConfigError::Invalid(format!("{} needs [experiment] sweep", cfg.experiment))
    })?;
    let points = load_sweep(manifest)?;
    points
        .par_iter()
        .map(|p| {
            System::new(p).map_err(|source| ExperimentError::Point {
                bond_length: p.bond_length,
                label: p.label.clone(),
                source,
            })
        })
        .collect()
}

pub(crate) fn register_channel(
    cfg: &ExperimentConfig,
    kind: ChannelKind,
    modes: usize,
) -> Result<KrausChannel, PointError> {
    Ok(lift_to_register(
        &single_qubit_channel(&cfg.channel(kind))?,
        modes,
    )?)
}

pub(crate) fn penalties(cfg: &ExperimentConfig, modes: usize) -> Result<Vec<Penalty>, PointError> {
    cfg.penalties
        .iter()
        .map(|p| Ok(Penalty::symmetry(p.kind, modes, p.target, p.weight)?))
        .collect()
}

/// One VCS curve: a channel, with or without the configured penalties.
#[derive(Clone, Debug)]
struct Curve {
    label: String,
    kind: ChannelKind,
    penalized: bool,
}

fn curves(cfg: &ExperimentConfig) -> Vec<Curve> {
    let plain = cfg.channel_kinds.iter().map(|&kind| Curve {
        label: kind.name().to_string(),
        kind,
        penalized: false,
    });
    let penalized = cfg.penalized_kinds.iter().map(|&kind| Curve {
        label: format!("{}_penalized", kind.name()),
        kind,
        penalized: true,
    });
    plain.chain(penalized).collect()
}

pub(crate) fn solver(
    sys: &System,
    cfg: &ExperimentConfig,
    kind: ChannelKind,
    penalized: bool,
) -> Result<VcsSolver, PointError> {
    let mut s = VcsSolver::new(sys.h.clone(), register_channel(cfg, kind, sys.modes)?)?
        .with_placement(cfg.placement)
        .with_observables(sys.observables.clone())?;
    if penalized {
        for p in penalties(cfg, sys.modes)? {
            s = s.with_penalty(p)?;
        }
    }
    Ok(s)
}

/// VCS solutions along the sweep, continuing degenerate choices from point to point.
fn vcs_curve(
    systems: &[System],
    cfg: &ExperimentConfig,
    kind: ChannelKind,
    penalized: bool,
) -> Result<Vec<(VcsSolver, VcsSolution)>, ExperimentError> {
    let mut previous: Option<StateVector> = None;
    let mut out = Vec::with_capacity(systems.len());
    for sys in systems {
        let s = solver(sys, cfg, kind, penalized).map_err(|e| sys.fail(e))?;
        let sol = s.solve(previous.as_ref()).map_err(|e| sys.fail(e))?;
        previous = Some(sol.input_state.clone());
        out.push((s, sol));
    }
    Ok(out)
}

pub(crate) fn make_basis(cfg: &ExperimentConfig, modes: usize) -> Result<ExpansionBasis, QseError> {
    match cfg.subspace.kind {
        BasisKind::Fermionic => {
            fermionic_basis(modes, cfg.subspace.order, true, cfg.subspace.filter)
        }
        BasisKind::Qubit => qubit_basis(modes, cfg.subspace.order),
    }
}

pub(crate) fn build_problem(
    cfg: &ExperimentConfig,
    sys: &System,
    basis: &ExpansionBasis,
    source: RdmSource<'_>,
) -> Result<SubspaceProblem, PointError> {
    Ok(match cfg.subspace.route {
        Route::Direct => build_subspace_direct(basis, &sys.h, source, &sys.symmetry_dense())?,
        Route::Rdm => {
            let rdms = match &cfg.shots {
                Some(s) => sampled_rdms(source, 4, s.count, s.seed)?,
                None => compute_rdms(source, 4)?,
            };
            build_lr_from_rdms(basis, &sys.tensors, &rdms, &sys.symmetry_tensors()?)?
        }
    })
}

/// Energy, `⟨N⟩` and `⟨S²⟩` of every level of a subspace problem.
pub(crate) struct Level {
    pub energy: f64,
    pub number: f64,
    pub s_squared: f64,
}

pub(crate) fn levels(prob: &SubspaceProblem, cutoff: f64) -> Result<Vec<Level>, PointError> {
    let spec = solve_subspace(prob, cutoff)?;
    (0..spec.eigenvalues.len())
        .map(|k| {
            Ok(Level {
                energy: spec.eigenvalues[k],
                number: prob.expectation(&spec, k, SymmetryKind::Number.name())?,
                s_squared: prob.expectation(&spec, k, SymmetryKind::SSquared.name())?,
            })
        })
        .collect()
}

/// The projected problem, or `None` when the requested sector is empty.
pub(crate) fn project(
    prob: &SubspaceProblem,
    spec: &ProjectionSpec,
    cutoff: f64,
) -> Result<Option<SubspaceProblem>, PointError> {
    match project_symmetry(prob, spec.symmetry.name(), spec.target, spec.window, cutoff) {
        Ok(p) => Ok(Some(p)),
        Err(QseError::EmptySector { .. }) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn r(x: f64) -> String {
    fmt_real(x)
}

/// Runs the configured experiment on the current rayon pool.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput, ExperimentError> {
    cfg.validate()?;
    let start = Instant::now();
    let (table, report, points, continuation_events) = match cfg.experiment {
        ExperimentKind::SinglePoint => {
            let (table, report) = single_point_report(cfg)?;
            (table, Some(report), 1, 0)
        }
        kind => {
            let systems = load_systems(cfg)?;
            let (table, events) = match kind {
                ExperimentKind::FidelitySweep => fidelity_sweep(cfg, &systems)?,
                ExperimentKind::Spectrum => (spectrum(cfg, &systems)?, 0),
                ExperimentKind::QseRepair => qse_repair(cfg, &systems)?,
                ExperimentKind::GroundChannels => ground_channels(cfg, &systems)?,
                ExperimentKind::ApproxSpectrum => (approx_spectrum(cfg, &systems)?, 0),
                ExperimentKind::SinglePoint => unreachable!("handled above"),
            };
            (table, None, systems.len(), events)
        }
    };
    let summary = RunSummary {
        experiment: cfg.experiment,
        points,
        rows: table.rows.len(),
        continuation_events,
        wall_time: start.elapsed(),
    };
    Ok(ExperimentOutput {
        table,
        report,
        summary,
    })
}

fn count_continued<'a>(sols: impl IntoIterator<Item = &'a VcsSolution>) -> usize {
    sols.into_iter().filter(|s| s.continued).count()
}

fn fidelity_sweep(
    cfg: &ExperimentConfig,
    systems: &[System],
) -> Result<(Table, usize), ExperimentError> {
    let exact: Vec<StateVector> = systems
        .par_iter()
        .map(|s| s.exact_ground().map(|(_, v)| v).map_err(|e| s.fail(e)))
        .collect::<Result<_, _>>()?;
    let curves = curves(cfg);
    let results: Vec<(Vec<Vec<String>>, usize)> = curves
        .par_iter()
        .map(|c| -> Result<_, ExperimentError> {
            let vcs = vcs_curve(systems, cfg, c.kind, c.penalized)?;
            let events = count_continued(vcs.iter().map(|(_, s)| s));
            let mut rows = Vec::new();
            for ((sys, (solver, sol)), ground) in systems.iter().zip(&vcs).zip(&exact) {
                let novar = solver.no_variation(None).map_err(|e| sys.fail(e))?;
                let vs_exact = fidelity(&sol.output_rho, ground).map_err(|e| sys.fail(e))?;
                rows.push(vec![
                    r(sys.bond_length),
                    c.label.clone(),
                    r(sol.fidelity_io),
                    r(novar.fidelity_io),
                    r(vs_exact),
                    r(sol.energy),
                    r(novar.energy),
                    r(sol.symmetry_expectations[SymmetryKind::SSquared.name()]),
                ]);
            }
            Ok((rows, events))
        })
        .collect::<Result<_, _>>()?;
    let mut table = Table::new(&[
        "R",
        "channel",
        "fidelity_vcs",
        "fidelity_novar",
        "fidelity_vs_exact",
        "energy_vcs",
        "energy_novar",
        "s_squared_vcs",
    ]);
    let mut events = 0;
    for (rows, e) in results {
        events += e;
        for row in rows {
            table.push(row);
        }
    }
    Ok((table, events))
}

fn spectrum(cfg: &ExperimentConfig, systems: &[System]) -> Result<Table, ExperimentError> {
    let blocks: Vec<Vec<Vec<String>>> = systems
        .par_iter()
        .map(|sys| spectrum_point(cfg, sys).map_err(|e| sys.fail(e)))
        .collect::<Result<_, _>>()?;
    let mut table = Table::new(&["R", "curve", "level", "energy", "number", "s_squared"]);
    for row in blocks.into_iter().flatten() {
        table.push(row);
    }
    Ok(table)
}

fn spectrum_point(cfg: &ExperimentConfig, sys: &System) -> Result<Vec<Vec<String>>, PointError> {
    let mut rows = Vec::new();
    let mut push = |curve: &str, items: &[(f64, f64, f64)]| {
        for (k, (e, n, s2)) in items.iter().enumerate() {
            rows.push(vec![
                r(sys.bond_length),
                curve.to_string(),
                k.to_string(),
                r(*e),
                r(*n),
                r(*s2),
            ]);
        }
    };

    let mut fock = Vec::new();
    let mut sector = Vec::new();
    for n in 0..=sys.modes {
        let spec = fci_sector(&sys.h, n)?;
        for k in 0..spec.eigenvalues.len() {
            let v = spec.eigenvector(k);
            let item = (
                spec.eigenvalues[k],
                n as f64,
                sys.observables.s_squared.expectation(&v),
            );
            fock.push(item);
            if n == sys.nelec {
                sector.push(item);
            }
        }
    }
    fock.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    push("fci_all", &fock);
    push("fci", &sector);

    let (_, ground) = sys.exact_ground()?;
    let basis = make_basis(cfg, sys.modes)?;
    let prob = build_problem(cfg, sys, &basis, RdmSource::Pure(&ground))?;
    let as_items = |ls: Vec<Level>| {
        ls.into_iter()
            .map(|l| (l.energy, l.number, l.s_squared))
            .collect::<Vec<_>>()
    };
    push("qse", &as_items(levels(&prob, cfg.metric_cutoff)?));
    if let Some(p) = &cfg.projection {
        let items = match project(&prob, p, cfg.metric_cutoff)? {
            Some(proj) => as_items(levels(&proj, cfg.metric_cutoff)?),
            None => Vec::new(),
        };
        push("qse_projected", &items);
    }
    Ok(rows)
}

fn qse_repair(
    cfg: &ExperimentConfig,
    systems: &[System],
) -> Result<(Table, usize), ExperimentError> {
    let exact: Vec<f64> = systems
        .par_iter()
        .map(|s| s.exact_ground().map(|(e, _)| e).map_err(|e| s.fail(e)))
        .collect::<Result<_, _>>()?;
    let jobs: Vec<(ChannelKind, ReferenceKind)> = cfg
        .channel_kinds
        .iter()
        .flat_map(|&k| cfg.references.iter().map(move |&r| (k, r)))
        .collect();
    let results: Vec<(Vec<Vec<String>>, usize)> = jobs
        .par_iter()
        .map(|&(kind, reference)| -> Result<_, ExperimentError> {
            let sols: Vec<VcsSolution> = match reference {
                ReferenceKind::Vcs => vcs_curve(systems, cfg, kind, false)?
                    .into_iter()
                    .map(|(_, s)| s)
                    .collect(),
                ReferenceKind::VcsPenalized => vcs_curve(systems, cfg, kind, true)?
                    .into_iter()
                    .map(|(_, s)| s)
                    .collect(),
                ReferenceKind::NoVariation => systems
                    .iter()
                    .map(|sys| {
                        solver(sys, cfg, kind, false)
                            .and_then(|s| Ok(s.no_variation(None)?))
                            .map_err(|e| sys.fail(e))
                    })
                    .collect::<Result<_, _>>()?,
            };
            let events = count_continued(&sols);
            let rows = systems
                .par_iter()
                .zip(&sols)
                .zip(&exact)
                .map(|((sys, sol), &e_exact)| {
                    repair_point(cfg, sys, sol, e_exact)
                        .map(|cells| {
                            let mut row = vec![
                                r(sys.bond_length),
                                kind.name().to_string(),
                                reference.name().to_string(),
                            ];
                            row.extend(cells);
                            row
                        })
                        .map_err(|e| sys.fail(e))
                })
                .collect::<Result<_, _>>()?;
            Ok((rows, events))
        })
        .collect::<Result<_, _>>()?;
    let mut table = Table::new(&[
        "R",
        "channel",
        "reference",
        "reference_energy",
        "reference_s2",
        "qse_energy",
        "qse_number",
        "qse_s2",
        "proj_energy",
        "proj_number",
        "proj_s2",
        "proj_dim",
        "exact_energy",
    ]);
    let mut events = 0;
    for (rows, e) in results {
        events += e;
        for row in rows {
            table.push(row);
        }
    }
    Ok((table, events))
}

fn repair_point(
    cfg: &ExperimentConfig,
    sys: &System,
    sol: &VcsSolution,
    e_exact: f64,
) -> Result<Vec<String>, PointError> {
    let basis = make_basis(cfg, sys.modes)?;
    let prob = build_problem(cfg, sys, &basis, RdmSource::Mixed(&sol.output_rho))?;
    let ground = levels(&prob, cfg.metric_cutoff)?
        .into_iter()
        .next()
        .ok_or(QseError::Linalg(LinalgError::EmptySubspace))?;
    let reference_s2 = sys.observables.s_squared.trace_product(&sol.output_rho).re;
    let (mut pe, mut pn, mut ps, mut pd) = (f64::NAN, f64::NAN, f64::NAN, 0);
    if let Some(p) = &cfg.projection {
        if let Some(proj) = project(&prob, p, cfg.metric_cutoff)? {
            pd = proj.dim();
            if let Some(l) = levels(&proj, cfg.metric_cutoff)?.into_iter().next() {
                (pe, pn, ps) = (l.energy, l.number, l.s_squared);
            }
        }
    }
    Ok(vec![
        r(sol.energy),
        r(reference_s2),
        r(ground.energy),
        r(ground.number),
        r(ground.s_squared),
        r(pe),
        r(pn),
        r(ps),
        pd.to_string(),
        r(e_exact),
    ])
}

fn ground_channels(
    cfg: &ExperimentConfig,
    systems: &[System],
) -> Result<(Table, usize), ExperimentError> {
    let mut table = Table::new(&["R", "curve", "energy", "number", "s_squared", "fidelity_io"]);
    let fixed: Vec<[Vec<String>; 2]> = systems
        .par_iter()
        .map(|sys| -> Result<_, ExperimentError> {
            let (e, v) = sys.exact_ground().map_err(|e| sys.fail(e))?;
            let obs = sys.observables.on_state(&v);
            let hf = hartree_fock_state(sys.modes, sys.nelec);
            let hf_obs = sys.observables.on_state(&hf);
            let row = |curve: &str, energy: f64, o: &BTreeMap<String, f64>| {
                vec![
                    r(sys.bond_length),
                    curve.to_string(),
                    r(energy),
                    r(o["number"]),
                    r(o["s_squared"]),
                    r(1.0),
                ]
            };
            Ok([
                row("exact", e, &obs),
                row("rhf", sys.h.expectation(&hf), &hf_obs),
            ])
        })
        .collect::<Result<_, _>>()?;
    for [exact, rhf] in fixed.iter().cloned() {
        table.push(exact);
        table.push(rhf);
    }
    let curves = curves(cfg);
    let results: Vec<(Vec<Vec<String>>, usize)> = curves
        .par_iter()
        .map(|c| -> Result<_, ExperimentError> {
            let vcs = vcs_curve(systems, cfg, c.kind, c.penalized)?;
            let events = count_continued(vcs.iter().map(|(_, s)| s));
            let rows = systems
                .iter()
                .zip(&vcs)
                .map(|(sys, (_, sol))| {
                    vec![
                        r(sys.bond_length),
                        c.label.clone(),
                        r(sol.energy),
                        r(sol.symmetry_expectations["number"]),
                        r(sol.symmetry_expectations["s_squared"]),
                        r(sol.fidelity_io),
                    ]
                })
                .collect();
            Ok((rows, events))
        })
        .collect::<Result<_, _>>()?;
    let mut events = 0;
    for (rows, e) in results {
        events += e;
        for row in rows {
            table.push(row);
        }
    }
    Ok((table, events))
}

fn approx_spectrum(cfg: &ExperimentConfig, systems: &[System]) -> Result<Table, ExperimentError> {
    let blocks: Vec<Vec<Vec<String>>> = systems
        .par_iter()
        .map(|sys| approx_point(cfg, sys).map_err(|e| sys.fail(e)))
        .collect::<Result<_, _>>()?;
    let mut table = Table::new(&["R", "method", "level", "energy"]);
    for row in blocks.into_iter().flatten() {
        table.push(row);
    }
    Ok(table)
}

fn approx_point(cfg: &ExperimentConfig, sys: &System) -> Result<Vec<Vec<String>>, PointError> {
    let (_, ground) = sys.exact_ground()?;
    let source = RdmSource::Pure(&ground);
    let basis = fermionic_basis(sys.modes, 1, true, cfg.subspace.filter)?;
    let rdms = match &cfg.shots {
        Some(s) => sampled_rdms(source, 2, s.count, s.seed)?,
        None => compute_rdms(source, 2)?,
    };
    let e_g = contract_energy(&sys.tensors, &rdms)?;
    let none = BTreeMap::new();
    let exact = build_subspace_direct(&basis, &sys.h, source, &BTreeMap::new())?;
    let mut rows = Vec::new();
    for (name, prob) in [
        ("exact", exact),
        (
            "zc",
            approximate_lr(
                ApproxMethod::Zc,
                &basis,
                &sys.tensors,
                &rdms,
                e_g,
                &none,
                ApproxOptions::default(),
            )?,
        ),
        (
            "za",
            approximate_lr(
                ApproxMethod::Za,
                &basis,
                &sys.tensors,
                &rdms,
                e_g,
                &none,
                ApproxOptions::default(),
            )?,
        ),
    ] {
        let spec = solve_subspace(&prob, cfg.metric_cutoff)?;
        for (k, e) in spec.eigenvalues.iter().enumerate() {
            rows.push(vec![
                r(sys.bond_length),
                name.to_string(),
                k.to_string(),
                r(*e),
            ]);
        }
    }
    Ok(rows)
}
