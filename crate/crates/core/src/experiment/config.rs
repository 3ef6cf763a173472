//! Experiment configuration: a flat `[section]` / `key = value` file.
//!
//! ```text
//! [experiment]
//! kind = qse-repair
//! sweep = ../fixtures/h2_sto6g/sweep.txt
//! output = fig4.csv
//! references = vcs, vcs_penalized, novar
//!
//! [channel]
//! kinds = ap
//! tp_over_t1 = 0.05
//! tp_over_t2 = 0.05
//!
//! [penalties]
//! s_squared = 0 100
//!
//! [subspace]
//! kind = fermionic
//! order = 1
//!
//! [projection]
//! symmetry = s_squared
//! target = 0
//! window = 1e-6
//! ```
//!
//! Relative paths are resolved against the directory holding the config file.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ini::Ini;
use thiserror::Error;

use crate::channels::{ChannelKind, ChannelSpec};
use crate::format::fmt_real;
use crate::operators::SymmetryKind;
use crate::qse::{BasisKind, ExcitationFilter, QSE_METRIC_CUTOFF};
use crate::vcs::PenaltyPlacement;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("malformed config: {0}")]
    Syntax(String),
    #[error("[{section}] {key}: {message}")]
    Value {
        section: String,
        key: String,
        message: String,
    },
    #[error("missing [{section}] {key}")]
    Missing { section: String, key: String },
    #[error("unknown section [{0}]")]
    UnknownSection(String),
    #[error("unknown key [{section}] {key}")]
    UnknownKey { section: String, key: String },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExperimentKind {
    FidelitySweep,
    Spectrum,
    QseRepair,
    GroundChannels,
    ApproxSpectrum,
    SinglePoint,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        ExperimentKind::FidelitySweep,
        ExperimentKind::Spectrum,
        ExperimentKind::QseRepair,
        ExperimentKind::GroundChannels,
        ExperimentKind::ApproxSpectrum,
        ExperimentKind::SinglePoint,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::FidelitySweep => "fidelity-sweep",
            ExperimentKind::Spectrum => "spectrum",
            ExperimentKind::QseRepair => "qse-repair",
            ExperimentKind::GroundChannels => "ground-channels",
            ExperimentKind::ApproxSpectrum => "approx-spectrum",
            ExperimentKind::SinglePoint => "single-point",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown experiment '{s}'"))
    }
}

/// Which channel output a subspace expansion is built around.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReferenceKind {
    /// VCS optimum without penalties.
    Vcs,
    /// VCS optimum with the configured penalties.
    VcsPenalized,
    /// Exact ground state passed through the channel.
    NoVariation,
}

impl ReferenceKind {
    pub fn name(self) -> &'static str {
        match self {
            ReferenceKind::Vcs => "vcs",
            ReferenceKind::VcsPenalized => "vcs_penalized",
            ReferenceKind::NoVariation => "novar",
        }
    }
}

impl FromStr for ReferenceKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "vcs" => Ok(ReferenceKind::Vcs),
            "vcs_penalized" => Ok(ReferenceKind::VcsPenalized),
            "novar" => Ok(ReferenceKind::NoVariation),
            other => Err(format!(
                "unknown reference '{other}' (expected vcs, vcs_penalized or novar)"
            )),
        }
    }
}

/// How subspace matrices are assembled.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Route {
    #[default]
    Direct,
    Rdm,
}

impl FromStr for Route {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "direct" => Ok(Route::Direct),
            "rdm" => Ok(Route::Rdm),
            other => Err(format!("unknown route '{other}' (expected direct or rdm)")),
        }
    }
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Route::Direct => "direct",
            Route::Rdm => "rdm",
        })
    }
}

/// Penalty weight used when a config or CLI penalty gives only a target.
pub const DEFAULT_PENALTY_WEIGHT: f64 = 100.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PenaltySpec {
    pub kind: SymmetryKind,
    pub target: f64,
    pub weight: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SubspaceSpec {
    pub kind: BasisKind,
    pub order: usize,
    pub filter: ExcitationFilter,
    pub route: Route,
}

impl Default for SubspaceSpec {
    fn default() -> Self {
        Self {
            kind: BasisKind::Fermionic,
            order: 1,
            filter: ExcitationFilter::All,
            route: Route::Direct,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProjectionSpec {
    pub symmetry: SymmetryKind,
    pub target: f64,
    pub window: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ShotSpec {
    pub count: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub sweep_manifest: Option<PathBuf>,
    pub fcidump: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub references: Vec<ReferenceKind>,
    pub channel_kinds: Vec<ChannelKind>,
    /// Channel kinds that also get a curve with the configured penalties.
    pub penalized_kinds: Vec<ChannelKind>,
    pub tp_over_t1: f64,
    pub tp_over_t2: f64,
    pub penalties: Vec<PenaltySpec>,
    pub placement: PenaltyPlacement,
    pub subspace: SubspaceSpec,
    pub projection: Option<ProjectionSpec>,
    pub metric_cutoff: f64,
    pub shots: Option<ShotSpec>,
}

impl ExperimentConfig {
    /// Defaults for `experiment`; paths unset.
    pub fn new(experiment: ExperimentKind) -> Self {
        Self {
            experiment,
            sweep_manifest: None,
            fcidump: None,
            output: None,
            references: vec![ReferenceKind::Vcs, ReferenceKind::NoVariation],
            channel_kinds: vec![ChannelKind::AmplitudePhase],
            penalized_kinds: Vec::new(),
            tp_over_t1: 0.05,
            tp_over_t2: 0.05,
            penalties: Vec::new(),
            placement: PenaltyPlacement::Input,
            subspace: SubspaceSpec::default(),
            projection: None,
            metric_cutoff: QSE_METRIC_CUTOFF,
            shots: None,
        }
    }

    pub fn channel(&self, kind: ChannelKind) -> ChannelSpec {
        ChannelSpec::new(kind, self.tp_over_t1, self.tp_over_t2)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::parse(&text, base)
    }

    pub fn parse(text: &str, base_dir: &Path) -> Result<Self, ConfigError> {
        let ini = Ini::load_from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
        let reader = Reader {
            ini: &ini,
            base_dir,
        };
        reader.check_known()?;
        let experiment: ExperimentKind = reader
            .get("experiment", "kind")?
            .ok_or_else(|| missing("experiment", "kind"))?;
        let mut cfg = Self::new(experiment);
        cfg.sweep_manifest = reader.path("experiment", "sweep");
        cfg.fcidump = reader.path("experiment", "fcidump");
        cfg.output = reader.path("experiment", "output");
        if let Some(list) = reader.list::<ReferenceKind>("experiment", "references")? {
            cfg.references = list;
        }
        if let Some(list) = reader.list::<ChannelKind>("channel", "kinds")? {
            cfg.channel_kinds = list;
        }
        if let Some(list) = reader.list::<ChannelKind>("channel", "penalized")? {
            cfg.penalized_kinds = list;
        }
        if let Some(v) = reader.get("channel", "tp_over_t1")? {
            cfg.tp_over_t1 = v;
        }
        if let Some(v) = reader.get("channel", "tp_over_t2")? {
            cfg.tp_over_t2 = v;
        }
        if let Some(section) = ini.section(Some("penalties")) {
            for (key, value) in section.iter() {
                if key == "placement" {
                    cfg.placement = value
                        .parse()
                        .map_err(|m| value_error("penalties", key, m))?;
                    continue;
                }
                let kind: SymmetryKind = key.parse().map_err(|_| ConfigError::UnknownKey {
                    section: "penalties".into(),
                    key: key.into(),
                })?;
                let parts: Vec<&str> = value.split_whitespace().collect();
                let num = |s: &str| {
                    s.parse::<f64>()
                        .map_err(|e| value_error("penalties", key, e))
                };
                let (target, weight) = match parts[..] {
                    [t] => (num(t)?, DEFAULT_PENALTY_WEIGHT),
                    [t, w] => (num(t)?, num(w)?),
                    _ => {
                        return Err(value_error(
                            "penalties",
                            key,
                            "expected '<target> [weight]'",
                        ))
                    }
                };
                cfg.penalties.push(PenaltySpec {
                    kind,
                    target,
                    weight,
                });
            }
        }
        if let Some(v) = reader.get::<BasisKindText>("subspace", "kind")? {
            cfg.subspace.kind = v.0;
        }
        if let Some(v) = reader.get("subspace", "order")? {
            cfg.subspace.order = v;
        }
        if let Some(v) = reader.get::<FilterText>("subspace", "filter")? {
            cfg.subspace.filter = v.0;
        }
        if let Some(v) = reader.get("subspace", "route")? {
            cfg.subspace.route = v;
        }
        if let Some(v) = reader.get("subspace", "metric_cutoff")? {
            cfg.metric_cutoff = v;
        }
        if let Some(symmetry) = reader.get::<SymmetryKind>("projection", "symmetry")? {
            cfg.projection = Some(ProjectionSpec {
                symmetry,
                target: reader
                    .get("projection", "target")?
                    .ok_or_else(|| missing("projection", "target"))?,
                window: reader.get("projection", "window")?.unwrap_or(1e-6),
            });
        }
        if let Some(count) = reader.get("shots", "count")? {
            cfg.shots = Some(ShotSpec {
                count,
                seed: reader.get("shots", "seed")?.unwrap_or(0),
            });
        }
        Ok(cfg)
    }

    /// Serializes the config; `parse` of the result yields an equal config.
    pub fn to_config_string(&self) -> String {
        let mut out = String::new();
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string());
        let join = |names: Vec<&str>| names.join(", ");
        out.push_str("[experiment]\n");
        out.push_str(&format!("kind = {}\n", self.experiment));
        for (key, value) in [
            ("sweep", path(&self.sweep_manifest)),
            ("fcidump", path(&self.fcidump)),
            ("output", path(&self.output)),
        ] {
            if let Some(v) = value {
                out.push_str(&format!("{key} = {v}\n"));
            }
        }
        out.push_str(&format!(
            "references = {}\n",
            join(self.references.iter().map(|r| r.name()).collect())
        ));
        out.push_str("\n[channel]\n");
        out.push_str(&format!(
            "kinds = {}\n",
            join(self.channel_kinds.iter().map(|k| k.name()).collect())
        ));
        if !self.penalized_kinds.is_empty() {
            out.push_str(&format!(
                "penalized = {}\n",
                join(self.penalized_kinds.iter().map(|k| k.name()).collect())
            ));
        }
        out.push_str(&format!("tp_over_t1 = {}\n", self.tp_over_t1));
        out.push_str(&format!("tp_over_t2 = {}\n", self.tp_over_t2));
        out.push_str("\n[penalties]\n");
        out.push_str(&format!("placement = {}\n", self.placement));
        for p in &self.penalties {
            out.push_str(&format!("{} = {} {}\n", p.kind.name(), p.target, p.weight));
        }
        out.push_str("\n[subspace]\n");
        out.push_str(&format!("kind = {}\n", self.subspace.kind));
        out.push_str(&format!("order = {}\n", self.subspace.order));
        out.push_str(&format!("filter = {}\n", FilterText(self.subspace.filter)));
        out.push_str(&format!("route = {}\n", self.subspace.route));
        out.push_str(&format!("metric_cutoff = {}\n", self.metric_cutoff));
        if let Some(p) = &self.projection {
            out.push_str("\n[projection]\n");
            out.push_str(&format!("symmetry = {}\n", p.symmetry.name()));
            out.push_str(&format!("target = {}\n", p.target));
            out.push_str(&format!("window = {}\n", p.window));
        }
        if let Some(s) = &self.shots {
            out.push_str("\n[shots]\n");
            out.push_str(&format!("count = {}\nseed = {}\n", s.count, s.seed));
        }
        out
    }

    /// Checks paths, parameter ranges and the inputs the experiment needs.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |m: String| Err(ConfigError::Invalid(m));
        match self.experiment {
            ExperimentKind::SinglePoint => match &self.fcidump {
                Some(p) if p.is_file() => {}
                Some(p) => return invalid(format!("fcidump {} does not exist", p.display())),
                None => return invalid("single-point needs [experiment] fcidump".into()),
            },
            _ => match &self.sweep_manifest {
                Some(p) if p.is_file() => {}
                Some(p) => {
                    return invalid(format!("sweep manifest {} does not exist", p.display()))
                }
                None => return invalid(format!("{} needs [experiment] sweep", self.experiment)),
            },
        }
        if self.channel_kinds.is_empty() {
            return invalid("[channel] kinds is empty".into());
        }
        for kind in self.channel_kinds.iter().chain(&self.penalized_kinds) {
            self.channel(*kind)
                .validate()
                .map_err(|e| ConfigError::Invalid(format!("channel {}: {e}", kind.name())))?;
        }
        for p in &self.penalties {
            if !(p.weight.is_finite() && p.weight >= 0.0 && p.target.is_finite()) {
                return invalid(format!(
                    "penalty {} needs a finite target and weight ≥ 0",
                    p.kind.name()
                ));
            }
        }
        if self.references.is_empty() {
            return invalid("[experiment] references is empty".into());
        }
        if !(1..=2).contains(&self.subspace.order) {
            return invalid(format!(
                "subspace order {} (expected 1 or 2)",
                self.subspace.order
            ));
        }
        if !(self.metric_cutoff.is_finite() && self.metric_cutoff > 0.0) {
            return invalid(format!(
                "metric_cutoff {} must be positive",
                fmt_real(self.metric_cutoff)
            ));
        }
        if let Some(p) = &self.projection {
            if p.window.is_nan() || p.window < 0.0 || !p.target.is_finite() {
                return invalid("projection needs a finite target and a window ≥ 0".into());
            }
        }
        if let Some(s) = &self.shots {
            if s.count == 0 {
                return invalid("[shots] count must be positive".into());
            }
        }
        let needs_fermionic = matches!(
            self.experiment,
            ExperimentKind::Spectrum | ExperimentKind::ApproxSpectrum
        ) || self.subspace.route == Route::Rdm;
        if needs_fermionic
            && (self.subspace.kind != BasisKind::Fermionic
                || self.subspace.order != 1 && self.subspace.route == Route::Rdm)
        {
            return invalid("RDM routes and spectrum experiments need a fermionic basis (order 1 for RDM routes)".into());
        }
        Ok(())
    }
}

fn missing(section: &str, key: &str) -> ConfigError {
    ConfigError::Missing {
        section: section.into(),
        key: key.into(),
    }
}

fn value_error(section: &str, key: &str, message: impl fmt::Display) -> ConfigError {
    ConfigError::Value {
        section: section.into(),
        key: key.into(),
        message: message.to_string(),
    }
}

struct BasisKindText(BasisKind);

impl FromStr for BasisKindText {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "fermionic" => Ok(Self(BasisKind::Fermionic)),
            "qubit" => Ok(Self(BasisKind::Qubit)),
            other => Err(format!(
                "unknown basis '{other}' (expected fermionic or qubit)"
            )),
        }
    }
}

struct FilterText(ExcitationFilter);

impl FromStr for FilterText {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "all" => Ok(Self(ExcitationFilter::All)),
            "spin_conserving" => Ok(Self(ExcitationFilter::SpinConserving)),
            other => Err(format!(
                "unknown filter '{other}' (expected all or spin_conserving)"
            )),
        }
    }
}

impl fmt::Display for FilterText {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self.0 {
            ExcitationFilter::All => "all",
            ExcitationFilter::SpinConserving => "spin_conserving",
        })
    }
}

const KNOWN: &[(&str, &[&str])] = &[
    (
        "experiment",
        &["kind", "sweep", "fcidump", "output", "references"],
    ),
    (
        "channel",
        &["kinds", "penalized", "tp_over_t1", "tp_over_t2"],
    ),
    ("penalties", &[]),
    (
        "subspace",
        &["kind", "order", "filter", "route", "metric_cutoff"],
    ),
    ("projection", &["symmetry", "target", "window"]),
    ("shots", &["count", "seed"]),
];

struct Reader<'a> {
    ini: &'a Ini,
    base_dir: &'a Path,
}

impl Reader<'_> {
    fn check_known(&self) -> Result<(), ConfigError> {
        for (name, props) in self.ini.iter() {
            let Some(name) = name else {
                if let Some((key, _)) = props.iter().next() {
                    return Err(ConfigError::Syntax(format!(
                        "key '{key}' outside any section"
                    )));
                }
                continue;
            };
            let Some((_, keys)) = KNOWN.iter().find(|(s, _)| *s == name) else {
                return Err(ConfigError::UnknownSection(name.to_string()));
            };
            if name == "penalties" {
                continue;
            }
            if let Some((key, _)) = props.iter().find(|(k, _)| !keys.contains(k)) {
                return Err(ConfigError::UnknownKey {
                    section: name.into(),
                    key: key.into(),
                });
            }
        }
        Ok(())
    }

    fn raw(&self, section: &str, key: &str) -> Option<&str> {
        self.ini.get_from(Some(section), key).map(str::trim)
    }

    fn get<T: FromStr>(&self, section: &str, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: fmt::Display,
    {
        self.raw(section, key)
            .map(|v| v.parse::<T>().map_err(|e| value_error(section, key, e)))
            .transpose()
    }

    fn list<T: FromStr>(&self, section: &str, key: &str) -> Result<Option<Vec<T>>, ConfigError>
    where
        T::Err: fmt::Display,
    {
        self.raw(section, key)
            .map(|v| {
                v.split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| s.parse::<T>().map_err(|e| value_error(section, key, e)))
                    .collect()
            })
            .transpose()
    }

    fn path(&self, section: &str, key: &str) -> Option<PathBuf> {
        self.raw(section, key).map(|v| {
            let p = Path::new(v);
            if p.is_absolute() {
                p.to_path_buf()
            } else {
                self.base_dir.join(p)
            }
        })
    }
}
