//! Experiment driver for `bvl-core`.
//!
//! A run reads one TOML configuration, validates it in full, dispatches to
//! one experiment and writes a CSV table with a JSON sidecar holding the
//! configuration hash, code version, wall time and the defaults that were
//! filled in.

// Domain checks are written as `!(x > 0.0)` so that NaN is rejected as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod experiments;
pub mod table;

pub use config::{validate_config, Experiment, ExperimentConfig};
pub use error::{CliError, CliResult};
pub use experiments::{run_experiment, RunOptions};
pub use table::{Cell, Column, Metadata, ResultTable};

use std::path::{Path, PathBuf};

/// Files produced by [`execute`].
#[derive(Debug, Clone, PartialEq)]
pub struct RunArtifacts {
    pub csv: PathBuf,
    pub sidecar: PathBuf,
    /// Standalone report, written for `geometry-verify`.
    pub report: Option<PathBuf>,
}

/// Loads, validates, runs and persists one experiment.
///
/// `out_dir` overrides the configured output directory, which in turn
/// defaults to `results`.
pub fn execute(
    config_path: &Path,
    out_dir: Option<&Path>,
    seed_override: Option<u64>,
    expected: Option<Experiment>,
    verbose: bool,
) -> CliResult<(ResultTable, RunArtifacts)> {
    let text = std::fs::read_to_string(config_path)
        .map_err(|e| CliError::io(format!("reading {}", config_path.display()), e))?;
    let mut config = validate_config(&text)?;
    if let Some(e) = expected {
        if e != config.experiment {
            return Err(CliError::Config(vec![format!(
                "subcommand {} does not match experiment {} in {}",
                e.id(),
                config.experiment.id(),
                config_path.display()
            )]));
        }
    }
    if let Some(seed) = seed_override {
        config.override_seed(seed);
    }
    let dir = out_dir
        .map(Path::to_path_buf)
        .or_else(|| config.output_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("results"));
    let options = RunOptions {
        out_dir: Some(dir.clone()),
        verbose,
    };
    let table = run_experiment(&config, &options)?;
    let stem = config.experiment.id();
    let files = table.write(&dir, stem)?;
    let report = if config.experiment == Experiment::GeometryVerify {
        let path = dir.join(format!("{stem}-report.json"));
        let body = serde_json::to_string_pretty(table.metadata.report.as_ref().expect("geometry report"))
            .map_err(|e| CliError::Format(e.to_string()))?;
        std::fs::write(&path, body + "\n").map_err(|e| CliError::io(format!("writing {}", path.display()), e))?;
        Some(path)
    } else {
        None
    };
    if verbose {
        eprintln!("[bvl] wrote {} and {}", files.csv.display(), files.sidecar.display());
    }
    Ok((
        table,
        RunArtifacts {
            csv: files.csv,
            sidecar: files.sidecar,
            report,
        },
    ))
}
