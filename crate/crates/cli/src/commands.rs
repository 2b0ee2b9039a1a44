//! Subcommand implementations. Each returns the text written to stdout;
//! files land in the config's output directory.

use std::fs;
use std::path::Path;

use qnt_core::distribution::preset;
use qnt_core::error::Error;
use qnt_core::fisher::{qfim, EigenvalueModel};
use qnt_core::measurement::record_to_csv;

use crate::config::{EngineChoice, ExperimentConfig, TopologySpec};
use crate::output;
use crate::runner;
use crate::validate;
use crate::CliError;

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Validation(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents)
        .map_err(|e| CliError::Validation(format!("cannot write {}: {e}", path.display())))?;
    Ok(())
}

/// `simulate`: one record at the largest shot count of the schedule,
/// sampled with the master seed, written as `record.csv`.
pub fn cmd_simulate(config: &ExperimentConfig) -> Result<String, CliError> {
    let shots = config.max_shots();
    let record = match config.engine {
        EngineChoice::Flip => {
            let experiment = runner::prepare(config).map_err(CliError::from_core)?;
            runner::run_record(&experiment, shots, config.seed).map_err(CliError::from_core)?
        }
        EngineChoice::Dense => {
            runner::run_record_dense(config, shots, config.seed).map_err(CliError::from_core)?
        }
    };
    let csv = record_to_csv(&record);
    write_file(&config.out_dir, "record.csv", &csv)?;
    Ok(format!(
        "wrote {} ({} shots, scheme {})\n",
        config.out_dir.join("record.csv").display(),
        shots,
        config.scheme
    ))
}

/// `estimate`: simulate at the largest shot count, run the configured
/// estimator, write `report.txt` and `report.csv`.
pub fn cmd_estimate(config: &ExperimentConfig) -> Result<String, CliError> {
    // The estimators are defined for single-Pauli networks only, whatever
    // engine simulated the record.
    config
        .channels
        .thetas()
        .map_err(|e| CliError::Estimation(e.to_string()))?;
    let shots = config.max_shots();
    let experiment = runner::prepare(config).map_err(CliError::from_core)?;
    let record =
        runner::run_record(&experiment, shots, config.seed).map_err(CliError::from_core)?;
    let report = runner::estimate(&record, config.regime).map_err(CliError::from_core)?;
    let text = output::report_text(&report);
    write_file(&config.out_dir, "report.txt", &text)?;
    write_file(&config.out_dir, "report.csv", &output::report_csv(&report, config.seed))?;
    Ok(text)
}

/// `convergence`: the full `(shots, trial)` sweep as `convergence.csv`.
pub fn cmd_convergence(config: &ExperimentConfig) -> Result<String, CliError> {
    let thetas: Vec<f64> = match config.channels.thetas() {
        Ok(t) => t.to_vec(),
        Err(e) => return Err(CliError::Estimation(e.to_string())),
    };
    let table = runner::convergence(config).map_err(CliError::from_core)?;
    let star_n = config.topology.edge_count();
    let csv = output::convergence_csv(
        &table,
        config.scheme.name(),
        star_n,
        &thetas,
        &config.regime.to_string(),
        config.trials,
        config.seed,
    );
    write_file(&config.out_dir, "convergence.csv", &csv)?;
    Ok(format!(
        "wrote {} ({} rows, {} failures)\n",
        config.out_dir.join("convergence.csv").display(),
        table.rows.len(),
        table.failures.len()
    ))
}

/// `qfim`: Fisher information of the configured scheme at the configured
/// parameters; `qfim.csv` plus per-shot-count bounds in `qcrb.csv`.
pub fn cmd_qfim(config: &ExperimentConfig) -> Result<String, CliError> {
    let thetas = config
        .channels
        .thetas()
        .map_err(|e| CliError::Estimation(e.to_string()))?;
    let model = match &config.topology {
        TopologySpec::Tree { edges, .. } if edges.len() == 1 => EigenvalueModel::single_channel(),
        _ => {
            let star = config
                .topology
                .build_star()
                .map_err(|e| CliError::Validation(e.to_string()))?;
            EigenvalueModel::for_preset(&preset(&star, config.scheme))
        }
    };
    let result = qfim(&model, thetas).map_err(CliError::from_core)?;
    let scheme = config.scheme.name();
    let n = config.topology.edge_count();
    write_file(&config.out_dir, "qfim.csv", &output::qfim_csv(&result, scheme, n, thetas))?;
    write_file(
        &config.out_dir,
        "qcrb.csv",
        &output::qcrb_csv(&result, &config.shots, scheme, thetas),
    )?;
    let mut summary = String::new();
    match &result.inverse {
        Some(inv) => {
            summary.push_str("qfim nonsingular; per-shot bound diagonal:\n");
            for j in 0..inv.dim() {
                summary.push_str(&format!("  parameter {j}: {}\n", inv[(j, j)]));
            }
        }
        None => {
            summary.push_str(&format!(
                "qfim singular: {} unidentifiable direction(s)\n",
                result.null_space.len()
            ));
            for direction in &result.null_space {
                summary.push_str(&format!("  null direction: {direction:?}\n"));
            }
        }
    }
    Ok(summary)
}

/// `validate`: run the invariant suites; any failure is exit code 3.
pub fn cmd_validate(config: Option<&ExperimentConfig>) -> Result<String, CliError> {
    let star_n = config.and_then(|c| match &c.topology {
        TopologySpec::Star(n) => Some(*n),
        TopologySpec::Tree { .. } => None,
    });
    let results = validate::run_all(star_n);
    let mut out = String::new();
    let mut failures = 0;
    for result in &results {
        if result.passed {
            out.push_str(&format!("ok   {}\n", result.name));
        } else {
            failures += 1;
            out.push_str(&format!("FAIL {}: {}\n", result.name, result.detail));
        }
    }
    out.push_str(&format!("{} checks, {failures} failures\n", results.len()));
    if failures > 0 {
        return Err(CliError::InvariantSuite(out));
    }
    Ok(out)
}

impl CliError {
    pub(crate) fn from_core(e: Error) -> Self {
        match e {
            Error::InvalidTopology(_)
            | Error::InvalidParameter(_)
            | Error::InvalidCircuit(_)
            | Error::QubitCapacity { .. }
            | Error::NoPredecessor { .. } => CliError::Validation(e.to_string()),
            _ => CliError::Estimation(e.to_string()),
        }
    }
}
