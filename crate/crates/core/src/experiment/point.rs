//! Human-readable analysis of one integral file.

use std::fmt::Write as _;

use super::{
    build_problem, levels, make_basis, project, solver, ExperimentConfig, ExperimentError,
    PointError, System, Table,
};
use crate::format::fmt_real;
use crate::molecule::{fci_sector, read_fcidump, SweepPoint};
use crate::rdm::RdmSource;
use crate::vcs::fidelity;

const MAX_LISTED_LEVELS: usize = 8;

/// Report and `quantity,value` table for `cfg.fcidump` under the first configured channel.
///
/// The VCS input uses the configured penalties; the subspace expansion is
/// built around its channel output.
pub fn single_point_report(cfg: &ExperimentConfig) -> Result<(Table, String), ExperimentError> {
    let path = cfg.fcidump.as_ref().ok_or_else(|| {
        super::ConfigError::Invalid("single-point needs [experiment] fcidump".into())
    })?;
    let integrals = read_fcidump(path)?;
    let label = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    let point = SweepPoint {
        bond_length: f64::NAN,
        integrals,
        label: label.clone(),
    };
    let fail = |source: PointError| ExperimentError::Point {
        bond_length: f64::NAN,
        label: label.clone(),
        source,
    };
    let sys = System::new(&point).map_err(fail)?;
    build(cfg, &sys, &label).map_err(fail)
}

fn build(cfg: &ExperimentConfig, sys: &System, label: &str) -> Result<(Table, String), PointError> {
    let r = fmt_real;
    let mut table = Table::new(&["quantity", "value"]);
    let mut out = String::new();
    let record = |table: &mut Table, key: String, value: f64| table.push(vec![key, r(value)]);

    let _ = writeln!(
        out,
        "system       {label}: {} modes, {} electrons",
        sys.modes, sys.nelec
    );
    let fci = fci_sector(&sys.h, sys.nelec)?;
    let (e_exact, ground) = sys.exact_ground()?;
    let obs = sys.observables.on_state(&ground);
    let _ = writeln!(
        out,
        "fci          E0 = {}  <N> = {}  <S^2> = {}",
        r(e_exact),
        r(obs["number"]),
        r(obs["s_squared"])
    );
    let listed: Vec<String> = fci
        .eigenvalues
        .iter()
        .take(MAX_LISTED_LEVELS)
        .map(|e| r(*e))
        .collect();
    let _ = writeln!(
        out,
        "             N={} levels: {}",
        sys.nelec,
        listed.join(" ")
    );
    for (k, e) in fci.eigenvalues.iter().enumerate() {
        record(&mut table, format!("fci_level_{k}"), *e);
    }

    let kind = cfg.channel_kinds[0];
    let s = solver(sys, cfg, kind, !cfg.penalties.is_empty())?;
    let vcs = s.solve(None)?;
    let novar = s.no_variation(None)?;
    let vs_exact = fidelity(&vcs.output_rho, &ground)?;
    let _ = writeln!(
        out,
        "channel      {} on every qubit, tp/t1 = {}, tp/t2 = {}, {} penalties",
        kind.name(),
        r(cfg.tp_over_t1),
        r(cfg.tp_over_t2),
        cfg.penalties.len()
    );
    let _ = writeln!(
        out,
        "vcs          energy = {}  fidelity_io = {}  fidelity_vs_exact = {}  <N> = {}  <S^2> = {}  degeneracy = {}",
        r(vcs.energy),
        r(vcs.fidelity_io),
        r(vs_exact),
        r(vcs.symmetry_expectations["number"]),
        r(vcs.symmetry_expectations["s_squared"]),
        vcs.ground_degeneracy
    );
    let _ = writeln!(
        out,
        "no variation energy = {}  fidelity_io = {}",
        r(novar.energy),
        r(novar.fidelity_io)
    );
    for (key, value) in [
        ("vcs_energy", vcs.energy),
        ("vcs_fidelity_io", vcs.fidelity_io),
        ("vcs_fidelity_vs_exact", vs_exact),
        ("vcs_number", vcs.symmetry_expectations["number"]),
        ("vcs_s_squared", vcs.symmetry_expectations["s_squared"]),
        ("novar_energy", novar.energy),
        ("novar_fidelity_io", novar.fidelity_io),
    ] {
        record(&mut table, key.to_string(), value);
    }

    let basis = make_basis(cfg, sys.modes)?;
    let prob = build_problem(cfg, sys, &basis, RdmSource::Mixed(&vcs.output_rho))?;
    let qse = levels(&prob, cfg.metric_cutoff)?;
    let _ = writeln!(
        out,
        "qse          {} order {} around the vcs output: {} operators, retained_dim {}",
        basis.kind,
        basis.order,
        basis.len(),
        qse.len()
    );
    record(&mut table, "qse_basis_size".into(), basis.len() as f64);
    record(&mut table, "qse_retained_dim".into(), qse.len() as f64);
    for (k, l) in qse.iter().enumerate() {
        if k < MAX_LISTED_LEVELS {
            let _ = writeln!(
                out,
                "  level {k:<3} E = {}  <N> = {}  <S^2> = {}",
                r(l.energy),
                r(l.number),
                r(l.s_squared)
            );
        }
        record(&mut table, format!("qse_level_{k}"), l.energy);
    }
    if let Some(p) = &cfg.projection {
        match project(&prob, p, cfg.metric_cutoff)? {
            Some(proj) => {
                let projected = levels(&proj, cfg.metric_cutoff)?;
                let lowest = projected.first().map(|l| l.energy).unwrap_or(f64::NAN);
                let _ = writeln!(
                    out,
                    "projection   {} = {} within {}: dim {}, lowest E = {}",
                    p.symmetry.name(),
                    r(p.target),
                    r(p.window),
                    proj.dim(),
                    r(lowest)
                );
                record(&mut table, "proj_dim".into(), proj.dim() as f64);
                record(&mut table, "proj_energy".into(), lowest);
            }
            None => {
                let _ = writeln!(
                    out,
                    "projection   {} = {} within {}: empty sector",
                    p.symmetry.name(),
                    r(p.target),
                    r(p.window)
                );
                record(&mut table, "proj_dim".into(), 0.0);
            }
        }
    }
    Ok((table, out))
}
