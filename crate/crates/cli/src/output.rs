//! CSV and structured-text emission. Schemas are versioned in the first
//! comment line of every file; plot scripts and the acceptance tests parse
//! them.

use std::fmt::Write as _;

use qnt_core::estimators::EstimateReport;
use qnt_core::fisher::{QcrbRow, QfimResult};
use qnt_core::linalg::SquareMatrix;

use crate::runner::ConvergenceTable;

fn join_f64(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// `# qnt convergence v1 ...` header plus one row per
/// `(shots, trial, parameter, candidate)`.
pub fn convergence_csv(
    table: &ConvergenceTable,
    scheme: &str,
    n: usize,
    theta: &[f64],
    regime: &str,
    trials: u64,
    master_seed: u64,
) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# qnt convergence v1 scheme={scheme} n={n} theta={} regime={regime} trials={trials} master_seed={master_seed}",
        join_f64(theta)
    );
    out.push_str("shots,trial,parameter,candidate,estimate,std_error\n");
    for row in &table.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            row.shots, row.trial, row.parameter, row.candidate, row.estimate, row.std_error
        );
    }
    for failure in &table.failures {
        let _ = writeln!(
            out,
            "# estimation_error shots={} trial={} message={:?}",
            failure.shots, failure.trial, failure.message
        );
    }
    out
}

/// Structured-text report of one estimation run.
pub fn report_text(report: &EstimateReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "report {{");
    let _ = writeln!(out, "  scheme = {}", report.scheme);
    let _ = writeln!(out, "  n = {}", report.n);
    let _ = writeln!(out, "  shots = {}", report.shots);
    let _ = writeln!(
        out,
        "  regime = {}",
        report.regime_used.map(|r| r.to_string()).unwrap_or_else(|| "-".into())
    );
    let _ = writeln!(out, "  identifiable = {}", report.identifiable);
    for (idx, candidate) in report.candidates.iter().enumerate() {
        let _ = writeln!(out, "  candidate_{} = [{}]", idx + 1, join_f64(candidate));
    }
    let _ = writeln!(out, "  std_errors = [{}]", join_f64(&report.std_errors));
    let _ = writeln!(
        out,
        "  pairs_skipped = [{}]",
        report
            .diagnostics
            .pairs_skipped
            .iter()
            .map(|(j, k)| format!("({j},{k})"))
            .collect::<Vec<_>>()
            .join(",")
    );
    let _ = writeln!(
        out,
        "  clamped = [{}]",
        report
            .diagnostics
            .clamped
            .iter()
            .map(|(p, raw)| format!("({p}:{raw})"))
            .collect::<Vec<_>>()
            .join(",")
    );
    let _ = writeln!(out, "}}");
    out
}

/// One CSV row per candidate of a single estimation run.
pub fn report_csv(report: &EstimateReport, seed: u64) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# qnt report v1 scheme={} n={} shots={} seed={seed}",
        report.scheme, report.n, report.shots
    );
    out.push_str("candidate,regime,identifiable,theta_hat,std_errors\n");
    for (idx, candidate) in report.candidates.iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            idx + 1,
            report.regime_used.map(|r| r.to_string()).unwrap_or_else(|| "-".into()),
            report.identifiable,
            candidate.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(";"),
            report.std_errors.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(";"),
        );
    }
    out
}

fn matrix_rows(out: &mut String, name: &str, m: &SquareMatrix) {
    for i in 0..m.dim() {
        for j in 0..m.dim() {
            let _ = writeln!(out, "{name},{i},{j},{}", m[(i, j)]);
        }
    }
}

/// QFIM and its inverse (or null-space directions) as `matrix,i,j,value`
/// triples.
pub fn qfim_csv(result: &QfimResult, scheme: &str, n: usize, theta: &[f64]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# qnt qfim v1 scheme={scheme} n={n} theta={}",
        join_f64(theta)
    );
    out.push_str("matrix,i,j,value\n");
    matrix_rows(&mut out, "F", &result.matrix);
    match &result.inverse {
        Some(inv) => matrix_rows(&mut out, "F_inv", inv),
        None => {
            let _ = writeln!(
                out,
                "# singular: {} unidentifiable direction(s); rows below span the null space",
                result.null_space.len()
            );
            for (k, direction) in result.null_space.iter().enumerate() {
                for (j, value) in direction.iter().enumerate() {
                    let _ = writeln!(out, "null_space,{k},{j},{value}");
                }
            }
        }
    }
    out
}

/// Per-parameter Cramer-Rao variance bounds at each shot count.
pub fn qcrb_csv(result: &QfimResult, shots: &[u64], scheme: &str, theta: &[f64]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# qnt qcrb v1 scheme={scheme} theta={}",
        join_f64(theta)
    );
    out.push_str("shots,parameter,crb_variance\n");
    if let Some(inv) = &result.inverse {
        for &n in shots {
            for j in 0..inv.dim() {
                let _ = writeln!(out, "{n},{j},{}", inv[(j, j)] / n as f64);
            }
        }
    }
    out
}

/// Rows of a QCRB comparison as plain text.
pub fn qcrb_table_text(rows: &[QcrbRow]) -> String {
    let mut out = String::from("parameter  variance      bound         ratio    flag\n");
    for row in rows {
        let _ = writeln!(
            out,
            "{:<9}  {:<12.6e}  {:<12.6e}  {:<7.4}  {}",
            row.parameter,
            row.variance,
            row.bound,
            row.ratio,
            if row.violation { "VIOLATION" } else { "ok" }
        );
    }
    out
}
