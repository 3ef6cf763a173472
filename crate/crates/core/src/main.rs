use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use vcsqse::channels::ChannelKind;
use vcsqse::experiment::{
    run_experiment, ExperimentConfig, ExperimentError, ExperimentKind, PenaltySpec, ProjectionSpec,
    DEFAULT_PENALTY_WEIGHT,
};
use vcsqse::operators::SymmetryKind;

#[derive(Parser)]
#[command(
    name = "vcsqse",
    version,
    about = "Variational channel states and quantum subspace expansion experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file and write its CSV.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's output path.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Worker threads (defaults to the number of cores).
        #[arg(long)]
        threads: Option<usize>,
        /// Estimate RDMs from this many simulated shots per Pauli string.
        #[arg(long)]
        shots: Option<usize>,
        /// Seed for `--shots`.
        #[arg(long, default_value_t = 0, requires = "shots")]
        seed: u64,
        /// Check the config and exit without running.
        #[arg(long)]
        validate_config: bool,
    },
    /// Analyse a single integral file and print a report.
    Point(PointArgs),
}

#[derive(Args)]
struct PointArgs {
    #[arg(long)]
    fcidump: PathBuf,
    /// identity, dephasing, ap or depol
    #[arg(long, default_value = "ap")]
    channel: ChannelKind,
    #[arg(long, default_value_t = 0.05)]
    tp_over_t1: f64,
    #[arg(long, default_value_t = 0.05)]
    tp_over_t2: f64,
    /// Penalty on the VCS input as `name=target[:weight]` (weight defaults to 100), e.g. `s_squared=0`. Repeatable.
    #[arg(long = "penalty", value_parser = parse_penalty)]
    penalties: Vec<PenaltySpec>,
    /// fermionic or qubit
    #[arg(long, default_value = "fermionic")]
    basis: String,
    #[arg(long, default_value_t = 1)]
    order: usize,
    /// Symmetry projection as `name=target:window`, e.g. `s_squared=0:1e-6`.
    #[arg(long, value_parser = parse_projection)]
    project: Option<ProjectionSpec>,
    /// Also write the `quantity,value` table here.
    #[arg(long)]
    output: Option<PathBuf>,
}

fn split_spec(s: &str) -> Result<(SymmetryKind, f64, f64), String> {
    let (name, rest) = s.split_once('=').ok_or("expected name=a:b")?;
    let (a, b) = rest.split_once(':').ok_or("expected name=a:b")?;
    let kind = name.parse::<SymmetryKind>().map_err(|e| e.to_string())?;
    let num = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("'{x}': {e}"));
    Ok((kind, num(a)?, num(b)?))
}

fn parse_penalty(s: &str) -> Result<PenaltySpec, String> {
    if let Some((name, target)) = s.split_once('=').filter(|(_, r)| !r.contains(':')) {
        let kind = name.parse::<SymmetryKind>().map_err(|e| e.to_string())?;
        let target = target
            .trim()
            .parse::<f64>()
            .map_err(|e| format!("'{target}': {e}"))?;
        return Ok(PenaltySpec {
            kind,
            target,
            weight: DEFAULT_PENALTY_WEIGHT,
        });
    }
    let (kind, target, weight) = split_spec(s)?;
    Ok(PenaltySpec {
        kind,
        target,
        weight,
    })
}

fn parse_projection(s: &str) -> Result<ProjectionSpec, String> {
    let (symmetry, target, window) = split_spec(s)?;
    Ok(ProjectionSpec {
        symmetry,
        target,
        window,
    })
}

fn point_config(args: PointArgs) -> Result<ExperimentConfig, String> {
    let mut cfg = ExperimentConfig::new(ExperimentKind::SinglePoint);
    cfg.fcidump = Some(args.fcidump);
    cfg.output = args.output;
    cfg.channel_kinds = vec![args.channel];
    cfg.tp_over_t1 = args.tp_over_t1;
    cfg.tp_over_t2 = args.tp_over_t2;
    cfg.penalties = args.penalties;
    cfg.subspace.kind = match args.basis.as_str() {
        "fermionic" => vcsqse::qse::BasisKind::Fermionic,
        "qubit" => vcsqse::qse::BasisKind::Qubit,
        other => return Err(format!("unknown basis '{other}'")),
    };
    cfg.subspace.order = args.order;
    cfg.projection = args.project;
    Ok(cfg)
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), ExperimentError> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|e| ExperimentError::Output {
                    path: p.to_path_buf(),
                    message: e.to_string(),
                })?;
            }
            std::fs::write(p, text).map_err(|e| ExperimentError::Output {
                path: p.to_path_buf(),
                message: e.to_string(),
            })
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn execute(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<(), ExperimentError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .expect("thread pool");
    let out = pool.install(|| run_experiment(cfg))?;
    match &out.report {
        Some(report) => {
            print!("{report}");
            if let Some(p) = &cfg.output {
                write_output(Some(p), &out.table.to_csv())?;
            }
        }
        None => write_output(cfg.output.as_deref(), &out.table.to_csv())?,
    }
    eprintln!("{}", out.summary);
    Ok(())
}

fn fail(e: ExperimentError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            output,
            threads,
            shots,
            seed,
            validate_config,
        } => {
            let mut cfg = match ExperimentConfig::load(&config) {
                Ok(c) => c,
                Err(e) => return fail(e.into()),
            };
            if output.is_some() {
                cfg.output = output;
            }
            if let Some(count) = shots {
                cfg.shots = Some(vcsqse::experiment::ShotSpec { count, seed });
            }
            if let Err(e) = cfg.validate() {
                return fail(e.into());
            }
            if validate_config {
                eprintln!("{}: ok ({})", config.display(), cfg.experiment);
                return ExitCode::SUCCESS;
            }
            match execute(&cfg, threads) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => fail(e),
            }
        }
        Command::Point(args) => {
            let cfg = match point_config(args) {
                Ok(c) => c,
                Err(m) => {
                    eprintln!("error: {m}");
                    return ExitCode::from(2);
                }
            };
            match execute(&cfg, None) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => fail(e),
            }
        }
    }
}
