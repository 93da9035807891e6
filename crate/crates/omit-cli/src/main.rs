//! `omit`: sweeps, cross-checks, and reports for the probe-field response
//! of a hybrid atom-optomechanical cavity.
//!
//! Every subcommand selects an operating point the same way: `--scenario`
//! names a built-in preset, `--config` supplies a JSON run configuration,
//! and flags override config fields. Results go to `--out`, into
//! `--out-dir` under scenario-derived names, or to stdout. Identical
//! requests produce byte-identical artifacts.
//!
//! Exit status: 0 success, 2 unparseable request, 3 invalid request,
//! 4 numerical or file failure; failures print a one-line JSON error
//! record to stderr.

mod config;
mod emit;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use omit_core::{
    compare_evaluators, default_prominence, denominator_roots, detect_features, phase_study,
    scenario, scenario_names, steady_state, sweep, EvaluatorComparison, FeatureKind, Grid, Method,
    PhaseStudy, RootCase, RootReport, SpectralFeature,
};
use serde::Serialize;

use config::{CliError, MethodChoice};
use emit::SCHEMA_VERSION;

#[derive(Debug, Parser)]
#[command(
    name = "omit",
    version,
    about = "Probe-field response of a hybrid atom-optomechanical cavity"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sweep the probe response over a detuning grid and emit CSV
    Sweep {
        #[command(flatten)]
        args: GriddedArgs,
        /// Evaluator filling the profile
        #[arg(long, value_enum)]
        method: Option<MethodChoice>,
    },
    /// Cross-check the response evaluators against the sideband solve
    Check {
        #[command(flatten)]
        args: GriddedArgs,
    },
    /// Detect absorption peaks and transparency dips
    Features {
        #[command(flatten)]
        args: GriddedArgs,
        /// Evaluator filling the swept profile
        #[arg(long, value_enum)]
        method: Option<MethodChoice>,
        /// Minimum topographic prominence (default: 2% of the span)
        #[arg(long)]
        prominence: Option<f64>,
    },
    /// Report complex roots of a reduced response denominator
    Roots {
        #[command(flatten)]
        select: SelectArgs,
        /// Which reduced denominator to factor
        #[arg(long, value_enum)]
        case: CaseArg,
    },
    /// Sweep at several pump phases and track the quadratic-channel dip
    PhaseStudy {
        #[command(flatten)]
        args: GriddedArgs,
        /// Pump phases in radians, comma-separated
        #[arg(long, value_delimiter = ',')]
        phases: Option<Vec<f64>>,
        /// Minimum topographic prominence (default: 2% of each span)
        #[arg(long)]
        prominence: Option<f64>,
    },
    /// List built-in scenarios and their expected features
    ListScenarios,
}

#[derive(Debug, Args)]
struct SelectArgs {
    /// Built-in scenario name; see `list-scenarios`
    #[arg(long)]
    scenario: Option<String>,
    /// JSON run configuration; flags override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file (default: config output path, else stdout)
    #[arg(long, conflicts_with = "out_dir")]
    out: Option<PathBuf>,
    /// Output directory; artifacts get scenario-derived names
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GriddedArgs {
    #[command(flatten)]
    select: SelectArgs,
    /// Detuning grid as min:max:count (default 0:4:801)
    #[arg(long, value_parser = config::parse_grid)]
    grid: Option<Grid>,
}

/// Reduced denominator spellings on the command line.
#[derive(Debug, Clone, Copy, ValueEnum)]
enum CaseArg {
    Bare,
    Atoms,
    LinearAtoms,
}

impl CaseArg {
    fn core(self) -> RootCase {
        match self {
            CaseArg::Bare => RootCase::BareCavity,
            CaseArg::Atoms => RootCase::AtomsOnly,
            CaseArg::LinearAtoms => RootCase::LinearAtoms,
        }
    }

    fn tag(self) -> &'static str {
        match self {
            CaseArg::Bare => "bare",
            CaseArg::Atoms => "atoms",
            CaseArg::LinearAtoms => "linear-atoms",
        }
    }
}

#[derive(Serialize)]
struct CheckReport<'a> {
    schema_version: &'static str,
    scenario: &'a str,
    grid: Grid,
    comparison: &'a EvaluatorComparison,
}

#[derive(Serialize)]
struct FeatureReport<'a> {
    schema_version: &'static str,
    scenario: &'a str,
    grid: Grid,
    method: Method,
    min_prominence: f64,
    features: &'a [SpectralFeature],
}

#[derive(Serialize)]
struct RootsReport<'a> {
    schema_version: &'static str,
    scenario: &'a str,
    report: &'a RootReport,
}

#[derive(Serialize)]
struct PhaseReport<'a> {
    schema_version: &'static str,
    scenario: &'a str,
    grid: Grid,
    study: &'a PhaseStudy,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.cmd {
        Command::Sweep { args, method } => run_sweep(&args, method),
        Command::Check { args } => run_check(&args),
        Command::Features {
            args,
            method,
            prominence,
        } => run_features(&args, method, prominence),
        Command::Roots { select, case } => run_roots(&select, case),
        Command::PhaseStudy {
            args,
            phases,
            prominence,
        } => run_phase_study(&args, phases, prominence),
        Command::ListScenarios => run_list(),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.record());
            ExitCode::from(e.code)
        }
    }
}

/// Picks the output path: `--out`, then `--out-dir`/`name`, then the
/// config-pinned path, then stdout (`None`).
fn resolve_sink(
    select: &SelectArgs,
    config_pin: Option<&PathBuf>,
    name: String,
) -> Result<Option<PathBuf>, CliError> {
    if let Some(path) = &select.out {
        return Ok(Some(path.clone()));
    }
    if let Some(dir) = &select.out_dir {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::io(format!("creating {}: {e}", dir.display())))?;
        return Ok(Some(dir.join(name)));
    }
    Ok(config_pin.cloned())
}

fn run_sweep(args: &GriddedArgs, method: Option<MethodChoice>) -> Result<(), CliError> {
    let run = config::resolve(
        args.select.scenario.as_deref(),
        args.select.config.as_deref(),
        args.grid,
    )?;
    let ss = steady_state(&run.params)?;
    let choice = method
        .or(run.config.method)
        .unwrap_or(MethodChoice::ClosedForm);
    match choice.single() {
        Some(m) => {
            let profile = sweep(&run.params, &ss, &run.grid, m)?;
            let text = emit::profile_csv(&profile)?;
            let pin = run
                .config
                .outputs
                .as_ref()
                .and_then(|o| o.profile_csv.as_ref());
            let sink = resolve_sink(&args.select, pin, format!("{}_profile.csv", run.label))?;
            emit::deliver(&text, sink.as_deref())
        }
        None => {
            // Two profiles cannot share one stream; `both` is directory-only.
            let dir = args.select.out_dir.clone().ok_or_else(|| {
                CliError::output("--method both emits two profiles; pass --out-dir")
            })?;
            std::fs::create_dir_all(&dir)
                .map_err(|e| CliError::io(format!("creating {}: {e}", dir.display())))?;
            for (m, tag) in [
                (Method::ClosedForm, "closed"),
                (Method::LinearSolve, "solve"),
            ] {
                let profile = sweep(&run.params, &ss, &run.grid, m)?;
                let text = emit::profile_csv(&profile)?;
                let path = dir.join(format!("{}_profile_{tag}.csv", run.label));
                emit::deliver(&text, Some(&path))?;
            }
            Ok(())
        }
    }
}

fn run_check(args: &GriddedArgs) -> Result<(), CliError> {
    let run = config::resolve(
        args.select.scenario.as_deref(),
        args.select.config.as_deref(),
        args.grid,
    )?;
    let ss = steady_state(&run.params)?;
    let comparison = compare_evaluators(&run.params, &ss, &run.grid)?;
    let doc = emit::json_doc(&CheckReport {
        schema_version: SCHEMA_VERSION,
        scenario: &run.label,
        grid: run.grid,
        comparison: &comparison,
    })?;
    let pin = run
        .config
        .outputs
        .as_ref()
        .and_then(|o| o.oracle_report_json.as_ref());
    let sink = resolve_sink(&args.select, pin, format!("{}_check.json", run.label))?;
    emit::deliver(&doc, sink.as_deref())
}

fn run_features(
    args: &GriddedArgs,
    method: Option<MethodChoice>,
    prominence: Option<f64>,
) -> Result<(), CliError> {
    let run = config::resolve(
        args.select.scenario.as_deref(),
        args.select.config.as_deref(),
        args.grid,
    )?;
    let ss = steady_state(&run.params)?;
    let m = method
        .or(run.config.method)
        .unwrap_or(MethodChoice::ClosedForm)
        .single()
        .ok_or_else(|| CliError::output("features reports one profile; pass closed or solve"))?;
    let profile = sweep(&run.params, &ss, &run.grid, m)?;
    let floor = prominence.unwrap_or_else(|| default_prominence(&profile));
    let features = detect_features(&profile, floor);
    let doc = emit::json_doc(&FeatureReport {
        schema_version: SCHEMA_VERSION,
        scenario: &run.label,
        grid: run.grid,
        method: m,
        min_prominence: floor,
        features: &features,
    })?;
    let pin = run
        .config
        .outputs
        .as_ref()
        .and_then(|o| o.features_json.as_ref());
    let sink = resolve_sink(&args.select, pin, format!("{}_features.json", run.label))?;
    emit::deliver(&doc, sink.as_deref())
}

fn run_roots(select: &SelectArgs, case: CaseArg) -> Result<(), CliError> {
    let run = config::resolve(select.scenario.as_deref(), select.config.as_deref(), None)?;
    let report = denominator_roots(&run.params, case.core())?;
    let doc = emit::json_doc(&RootsReport {
        schema_version: SCHEMA_VERSION,
        scenario: &run.label,
        report: &report,
    })?;
    let pin = run
        .config
        .outputs
        .as_ref()
        .and_then(|o| o.roots_json.as_ref());
    let sink = resolve_sink(
        select,
        pin,
        format!("{}_roots_{}.json", run.label, case.tag()),
    )?;
    emit::deliver(&doc, sink.as_deref())
}

fn run_phase_study(
    args: &GriddedArgs,
    phases: Option<Vec<f64>>,
    prominence: Option<f64>,
) -> Result<(), CliError> {
    let run = config::resolve(
        args.select.scenario.as_deref(),
        args.select.config.as_deref(),
        args.grid,
    )?;
    let ss = steady_state(&run.params)?;
    let phases = phases
        .or_else(|| run.config.phases.clone())
        .ok_or_else(|| {
            CliError::from(omit_core::Error::InvalidPhaseStudy(
                "phase study needs --phases or a config phases list",
            ))
        })?;
    let study = phase_study(&run.params, &ss, &phases, &run.grid, prominence)?;
    let doc = emit::json_doc(&PhaseReport {
        schema_version: SCHEMA_VERSION,
        scenario: &run.label,
        grid: run.grid,
        study: &study,
    })?;
    if let Some(dir) = &args.select.out_dir {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::io(format!("creating {}: {e}", dir.display())))?;
        for (k, profile) in study.profiles.iter().enumerate() {
            let text = emit::profile_csv(profile)?;
            let path = dir.join(format!("{}_phase_{k}.csv", run.label));
            emit::deliver(&text, Some(&path))?;
        }
        let path = dir.join(format!("{}_phase_study.json", run.label));
        return emit::deliver(&doc, Some(&path));
    }
    emit::deliver(&doc, args.select.out.as_deref())
}

fn run_list() -> Result<(), CliError> {
    let mut out = String::new();
    for name in scenario_names() {
        let preset = scenario(name).expect("listed scenarios resolve");
        let features: Vec<String> = preset
            .expected_features
            .iter()
            .map(|(kind, at)| {
                let tag = match kind {
                    FeatureKind::Peak => "peak",
                    FeatureKind::Dip => "dip",
                };
                format!("{tag}@{at:.1}")
            })
            .collect();
        out.push_str(&format!("{name:<12} {}\n", features.join(" ")));
    }
    emit::deliver(&out, None)
}
