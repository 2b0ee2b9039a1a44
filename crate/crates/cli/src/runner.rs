//! Experiment orchestration: per-trial seed derivation, simulation runs and
//! the convergence sweep behind the `convergence` subcommand.

use rayon::prelude::*;

use qnt_core::distribution::{preset, SchemeKind, SchemePreset};
use qnt_core::error::Error;
use qnt_core::estimators::{estimate_ghz_scheme, estimate_z_scheme, EstimateReport, Regime};
use qnt_core::labels::DiagonalState;
use qnt_core::measurement::{measure_dense, sample, OutcomeRecord};

use crate::config::{EngineChoice, ExperimentConfig};

/// Derive the sampling seed of one run from the master seed and a counter.
///
/// The counter enumerates runs in `(shot index, trial)` row-major order;
/// derivation is one splitmix64 round so trials are independent streams and
/// the whole experiment is reproducible from the master seed alone.
pub fn derive_seed(master: u64, counter: u64) -> u64 {
    let mut z = master ^ counter.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The preset and exact outcome distribution for a config, on the engine it
/// selects. The dense path is capped by the dense engine's qubit limit.
pub struct PreparedExperiment {
    pub preset: SchemePreset,
    pub distribution: DiagonalState,
}

pub fn prepare(config: &ExperimentConfig) -> Result<PreparedExperiment, Error> {
    let star = config
        .topology
        .build_star()
        .map_err(|e| Error::InvalidTopology(e.to_string()))?;
    let scheme = preset(&star, config.scheme);
    let distribution = match (config.engine, &config.channels) {
        (EngineChoice::Flip, spec) => {
            let thetas = spec
                .thetas()
                .map_err(|e| Error::UnsupportedModel(e.to_string()))?;
            scheme.exact_distribution(thetas)?
        }
        (EngineChoice::Dense, spec) => {
            let models = spec
                .models()
                .map_err(|e| Error::InvalidParameter(e.to_string()))?;
            let rho = scheme.distribute_dense(&models)?;
            rho.diagonalize_in_basis(config.scheme.basis())?
        }
    };
    Ok(PreparedExperiment { preset: scheme, distribution })
}

/// Sample one record at the given shot count and seed.
pub fn run_record(
    experiment: &PreparedExperiment,
    shots: u64,
    seed: u64,
) -> Result<OutcomeRecord, Error> {
    sample(
        &experiment.distribution,
        experiment.preset.kind(),
        experiment.preset.n(),
        shots,
        seed,
    )
}

/// Sample a record through the dense engine's Born-rule measurement. Used
/// by `simulate` when the dense engine is selected, so that depolarizing
/// configs run end to end on the exact simulator.
pub fn run_record_dense(
    config: &ExperimentConfig,
    shots: u64,
    seed: u64,
) -> Result<OutcomeRecord, Error> {
    let star = config
        .topology
        .build_star()
        .map_err(|e| Error::InvalidTopology(e.to_string()))?;
    let scheme = preset(&star, config.scheme);
    let models = config
        .channels
        .models()
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let rho = scheme.distribute_dense(&models)?;
    measure_dense(&rho, config.scheme.basis(), config.scheme, star.n(), shots, seed)
}

/// Run the configured estimator on a record.
pub fn estimate(record: &OutcomeRecord, regime: Regime) -> Result<EstimateReport, Error> {
    match record.scheme {
        SchemeKind::ZBasis => estimate_z_scheme(record, regime),
        kind => estimate_ghz_scheme(record, kind.axis()),
    }
}

/// One row of the convergence table.
#[derive(Debug, Clone)]
pub struct ConvergenceRow {
    pub shots: u64,
    pub trial: u64,
    pub parameter: usize,
    /// 1 for the primary candidate, 2 for the Z-scheme mirror.
    pub candidate: usize,
    pub estimate: f64,
    pub std_error: f64,
}

/// A per-run estimation failure, reported alongside the table rather than
/// aborting the sweep.
#[derive(Debug, Clone)]
pub struct ConvergenceFailure {
    pub shots: u64,
    pub trial: u64,
    pub message: String,
}

pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
    pub failures: Vec<ConvergenceFailure>,
}

/// Simulate and estimate every `(shots, trial)` cell of the schedule.
///
/// Cells run in parallel; rows come back sorted by `(shots, trial,
/// candidate, parameter)` regardless of completion order.
pub fn convergence(config: &ExperimentConfig) -> Result<ConvergenceTable, Error> {
    let experiment = prepare(config)?;
    let trials = config.trials;
    let cells: Vec<(usize, u64)> = (0..config.shots.len())
        .flat_map(|i| (0..trials).map(move |t| (i, t)))
        .collect();

    let results: Vec<(u64, u64, Result<EstimateReport, Error>)> = cells
        .par_iter()
        .map(|&(shot_idx, trial)| {
            let shots = config.shots[shot_idx];
            let seed = derive_seed(config.seed, shot_idx as u64 * trials + trial);
            let outcome = run_record(&experiment, shots, seed)
                .and_then(|record| estimate(&record, config.regime));
            (shots, trial, outcome)
        })
        .collect();

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (shots, trial, outcome) in results {
        match outcome {
            Ok(report) => {
                for (candidate_idx, candidate) in report.candidates.iter().enumerate() {
                    for (parameter, &estimate) in candidate.iter().enumerate() {
                        rows.push(ConvergenceRow {
                            shots,
                            trial,
                            parameter,
                            candidate: candidate_idx + 1,
                            estimate,
                            // Standard errors are reported for the primary
                            // candidate; the mirror has the same spread.
                            std_error: report.std_errors[parameter],
                        });
                    }
                }
            }
            Err(e) => failures.push(ConvergenceFailure { shots, trial, message: e.to_string() }),
        }
    }
    rows.sort_by_key(|r| (r.shots, r.trial, r.candidate, r.parameter));
    failures.sort_by_key(|f| (f.shots, f.trial));
    Ok(ConvergenceTable { rows, failures })
}
