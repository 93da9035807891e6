//! Run configuration: JSON config files, flag/config precedence, and the
//! error records behind the process exit codes.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use omit_core::{scenario, Error, Grid, Method, SystemParams};
use serde::Deserialize;

/// Exit status 2: the request could not be parsed.
pub const EXIT_CONFIG: u8 = 2;
/// Exit status 3: the request parsed but asks for something invalid.
pub const EXIT_VALIDATION: u8 = 3;
/// Exit status 4: a numerical evaluation or file operation failed.
pub const EXIT_NUMERICAL: u8 = 4;

/// A failure carrying its exit status and a stable machine-readable kind.
#[derive(Debug)]
pub struct CliError {
    pub kind: &'static str,
    pub message: String,
    pub code: u8,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError {
            kind: "config_parse",
            message: message.into(),
            code: EXIT_CONFIG,
        }
    }

    pub fn selection(message: impl Into<String>) -> Self {
        CliError {
            kind: "selection",
            message: message.into(),
            code: EXIT_VALIDATION,
        }
    }

    pub fn output(message: impl Into<String>) -> Self {
        CliError {
            kind: "output",
            message: message.into(),
            code: EXIT_VALIDATION,
        }
    }

    pub fn io(message: impl Into<String>) -> Self {
        CliError {
            kind: "io",
            message: message.into(),
            code: EXIT_NUMERICAL,
        }
    }

    /// The record printed to stderr before exiting.
    pub fn record(&self) -> String {
        serde_json::json!({
            "schema_version": "1",
            "error": { "kind": self.kind, "message": self.message },
        })
        .to_string()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind, self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let (kind, code) = match &e {
            Error::InvalidParams(_) => ("invalid_params", EXIT_VALIDATION),
            Error::UnknownScenario { .. } => ("unknown_scenario", EXIT_VALIDATION),
            Error::InvalidGrid(_) => ("invalid_grid", EXIT_VALIDATION),
            Error::InvalidPhaseStudy(_) => ("invalid_phase_study", EXIT_VALIDATION),
            Error::ReducedPrecondition { .. } => ("reduced_precondition", EXIT_VALIDATION),
            Error::DegenerateOperatingPoint { .. } => {
                ("degenerate_operating_point", EXIT_NUMERICAL)
            }
            Error::Pole { .. } => ("pole", EXIT_NUMERICAL),
            Error::SingularSideband { .. } => ("singular_sideband", EXIT_NUMERICAL),
            Error::UnstableDrift { .. } => ("unstable_drift", EXIT_NUMERICAL),
            Error::StepTooLarge { .. } => ("step_too_large", EXIT_NUMERICAL),
            Error::ProjectionDrift { .. } => ("projection_drift", EXIT_NUMERICAL),
            Error::FeatureLost { .. } => ("feature_lost", EXIT_NUMERICAL),
        };
        CliError {
            kind,
            message: e.to_string(),
            code,
        }
    }
}

/// Evaluator choice as spelled on the command line and in config files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodChoice {
    /// Algebraic closed form.
    #[value(name = "closed")]
    ClosedForm,
    /// Dense sideband solve.
    #[value(name = "solve")]
    LinearSolve,
    /// Both, emitted side by side.
    #[value(name = "both")]
    Both,
}

impl MethodChoice {
    /// The single core evaluator this choice names, if it names one.
    pub fn single(self) -> Option<Method> {
        match self {
            MethodChoice::ClosedForm => Some(Method::ClosedForm),
            MethodChoice::LinearSolve => Some(Method::LinearSolve),
            MethodChoice::Both => None,
        }
    }
}

/// Per-artifact output paths a config file may pin.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    pub profile_csv: Option<PathBuf>,
    pub features_json: Option<PathBuf>,
    pub roots_json: Option<PathBuf>,
    pub oracle_report_json: Option<PathBuf>,
}

/// A JSON run configuration. Command-line flags override these fields;
/// exactly one of `scenario` and `params` may be present.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: Option<String>,
    pub params: Option<SystemParams>,
    pub grid: Option<Grid>,
    pub method: Option<MethodChoice>,
    pub phases: Option<Vec<f64>>,
    pub outputs: Option<OutputPaths>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        let config: RunConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        if let Some(outputs) = &config.outputs {
            for path in [
                &outputs.profile_csv,
                &outputs.features_json,
                &outputs.roots_json,
                &outputs.oracle_report_json,
            ]
            .into_iter()
            .flatten()
            {
                if path.as_os_str().is_empty() {
                    return Err(CliError::config("output paths must be non-empty"));
                }
            }
        }
        Ok(config)
    }
}

/// The operating point a subcommand runs at, after flag/config merging.
#[derive(Debug)]
pub struct Run {
    /// Scenario name, or "custom" for inline parameters.
    pub label: String,
    pub params: SystemParams,
    pub grid: Grid,
    pub config: RunConfig,
}

/// Merges `--scenario`/`--config`/`--grid` into one operating point.
///
/// A `--scenario` flag selects a preset outright; otherwise the config
/// must name a scenario or carry inline parameters, but not both.
pub fn resolve(
    scenario_flag: Option<&str>,
    config_path: Option<&Path>,
    grid_flag: Option<Grid>,
) -> Result<Run, CliError> {
    let config = match config_path {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let (label, params) = match (scenario_flag, &config.scenario, &config.params) {
        (Some(name), _, _) => (name.to_owned(), scenario(name)?.params),
        (None, Some(_), Some(_)) => {
            return Err(CliError::selection(
                "config carries both a scenario name and inline params; keep exactly one",
            ))
        }
        (None, Some(name), None) => (name.clone(), scenario(name)?.params),
        (None, None, Some(params)) => ("custom".to_owned(), *params),
        (None, None, None) => {
            return Err(CliError::selection(
                "no scenario selected; pass --scenario or a config with scenario or params",
            ))
        }
    };
    let grid = grid_flag.or(config.grid).unwrap_or_default();
    Ok(Run {
        label,
        params,
        grid,
        config,
    })
}

/// Parses `min:max:count` into a grid; used by clap, so failures exit 2.
pub fn parse_grid(s: &str) -> Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("expected min:max:count, got `{s}`"));
    }
    let min: f64 = parts[0]
        .parse()
        .map_err(|e| format!("grid min `{}`: {e}", parts[0]))?;
    let max: f64 = parts[1]
        .parse()
        .map_err(|e| format!("grid max `{}`: {e}", parts[1]))?;
    let count: usize = parts[2]
        .parse()
        .map_err(|e| format!("grid count `{}`: {e}", parts[2]))?;
    Ok(Grid { min, max, count })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_spelling_round_trips() {
        let g = parse_grid("0:4:801").unwrap();
        assert_eq!(
            g,
            Grid {
                min: 0.0,
                max: 4.0,
                count: 801
            }
        );
        assert!(parse_grid("0:4").is_err());
        assert!(parse_grid("a:4:10").is_err());
    }

    #[test]
    fn scenario_flag_beats_config() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        fs::write(
            &path,
            r#"{ "scenario": "fig5", "grid": { "min": 0.0, "max": 2.0, "count": 11 } }"#,
        )
        .unwrap();
        let run = resolve(Some("fig2"), Some(&path), None).unwrap();
        assert_eq!(run.label, "fig2");
        assert_eq!(run.grid.count, 11);
        let run = resolve(None, Some(&path), None).unwrap();
        assert_eq!(run.label, "fig5");
    }

    #[test]
    fn ambiguous_selection_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ambiguous.json");
        let params = serde_json::to_string(&scenario("fig2").unwrap().params).unwrap();
        fs::write(
            &path,
            format!(r#"{{ "scenario": "fig2", "params": {params} }}"#),
        )
        .unwrap();
        let err = resolve(None, Some(&path), None).unwrap_err();
        assert_eq!(err.code, EXIT_VALIDATION);
        assert_eq!(err.kind, "selection");
    }
}
