//! The `validate` subcommand: cross-engine, label-algebra and
//! Fisher-information invariant suites with one pass/fail line per check.

use num_complex::Complex64;
use qnt_core::channels::{make_single_pauli, ChannelModel, PauliAxis};
use qnt_core::dense::{apply_unitary_to_vector, ghz_pauli_action, ghz_vector};
use qnt_core::distribution::{preset, SchemeKind};
use qnt_core::error::Error;
use qnt_core::fisher::{finite_difference_qfim, qfim, EigenvalueModel};
use qnt_core::labels::GhzLabel;
use qnt_core::topology::build_star;

pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &str, outcome: Result<(), String>) -> CheckResult {
    match outcome {
        Ok(()) => CheckResult { name: name.to_string(), passed: true, detail: String::new() },
        Err(detail) => CheckResult { name: name.to_string(), passed: false, detail },
    }
}

fn channels_for(axis: PauliAxis, thetas: &[f64]) -> Vec<ChannelModel> {
    thetas
        .iter()
        .map(|&t| make_single_pauli(axis, t).unwrap().to_model())
        .collect()
}

fn grid(values: &[f64], len: usize) -> Vec<Vec<f64>> {
    let mut points = vec![Vec::new()];
    for _ in 0..len {
        let mut next = Vec::new();
        for point in &points {
            for &v in values {
                let mut p = point.clone();
                p.push(v);
                next.push(p);
            }
        }
        points = next;
    }
    points
}

fn engine_equivalence(n: usize) -> Result<(), String> {
    let star = build_star(n).map_err(|e| e.to_string())?;
    let kinds: &[SchemeKind] = if n == 3 {
        &[SchemeKind::ZBasis, SchemeKind::GhzX, SchemeKind::GhzY, SchemeKind::GhzZ]
    } else {
        &[SchemeKind::ZBasis, SchemeKind::GhzX]
    };
    for &kind in kinds {
        let scheme = preset(&star, kind);
        for theta in grid(&[0.1, 0.5, 0.9], n) {
            let rho = scheme
                .distribute_dense(&channels_for(kind.axis(), &theta))
                .map_err(|e| e.to_string())?;
            let dense_diag = rho
                .diagonalize_in_basis(kind.basis())
                .map_err(|e| format!("{kind} at {theta:?}: {e}"))?;
            let flip = scheme.exact_distribution(&theta).map_err(|e| e.to_string())?;
            let diff = dense_diag.max_abs_diff(&flip);
            if diff > 1e-10 {
                return Err(format!("{kind} at {theta:?}: engines differ by {diff:e}"));
            }
        }
    }
    Ok(())
}

fn ghz_label_algebra(max_qubits: usize) -> Result<(), String> {
    for n in 2..=max_qubits {
        for code in 0..(1usize << n) {
            let label = GhzLabel::from_code(code, n);
            for axis in [PauliAxis::X, PauliAxis::Y, PauliAxis::Z] {
                for j in 0..n {
                    let (out, phase) = ghz_pauli_action(&label, axis, j).map_err(|e| e.to_string())?;
                    let mut lhs = ghz_vector(&label);
                    apply_unitary_to_vector(&mut lhs, &axis.matrix(), &[j], n);
                    let rhs: Vec<Complex64> =
                        ghz_vector(&out).into_iter().map(|a| a * phase).collect();
                    let worst = lhs
                        .iter()
                        .zip(&rhs)
                        .map(|(a, b)| (a - b).norm())
                        .fold(0.0, f64::max);
                    if worst > 1e-12 {
                        return Err(format!(
                            "n={n} label={label} axis={axis} j={j}: residual {worst:e}"
                        ));
                    }
                }
            }
        }
    }
    Ok(())
}

fn corrupted_circuit_detected() -> Result<(), String> {
    let star = build_star(3).map_err(|e| e.to_string())?;
    let mut scheme = preset(&star, SchemeKind::GhzX);
    // Negative control: drop the center's correction gate; the final state
    // must stop being GHZ-diagonal and the check must notice.
    scheme.circuit_mut().circuits[star.center()].gates.remove(0);
    let rho = scheme
        .distribute_dense(&channels_for(PauliAxis::X, &[0.8, 0.3, 0.4]))
        .map_err(|e| e.to_string())?;
    match rho.diagonalize_in_basis(SchemeKind::GhzX.basis()) {
        Err(Error::NotDiagonal { .. }) => Ok(()),
        Ok(_) => Err("corrupted circuit went undetected".into()),
        Err(e) => Err(format!("unexpected error {e}")),
    }
}

fn qfim_cross_check() -> Result<(), String> {
    let star = build_star(3).map_err(|e| e.to_string())?;
    for kind in [SchemeKind::ZBasis, SchemeKind::GhzX] {
        let model = EigenvalueModel::for_preset(&preset(&star, kind));
        for theta in grid(&[0.2, 0.5, 0.8], 3) {
            let analytic = qfim(&model, &theta).map_err(|e| e.to_string())?;
            let fd = finite_difference_qfim(&model, &theta, 1e-6).map_err(|e| e.to_string())?;
            let scale = analytic.matrix.max_abs().max(1e-12);
            let rel = analytic.matrix.max_abs_diff(&fd.matrix) / scale;
            if rel > 1e-6 {
                return Err(format!("{kind} at {theta:?}: relative deviation {rel:e}"));
            }
        }
    }
    Ok(())
}

fn ghz_qfim_closed_form() -> Result<(), String> {
    let star = build_star(3).map_err(|e| e.to_string())?;
    let model = EigenvalueModel::for_preset(&preset(&star, SchemeKind::GhzX));
    let theta = [0.8, 0.3, 0.4];
    let result = qfim(&model, &theta).map_err(|e| e.to_string())?;
    for a in 0..3 {
        for b in 0..3 {
            let expected = if a == b { 1.0 / (theta[a] * (1.0 - theta[a])) } else { 0.0 };
            let got = result.matrix[(a, b)];
            if (got - expected).abs() > 1e-10 {
                return Err(format!("F[{a}][{b}] = {got}, expected {expected}"));
            }
        }
    }
    Ok(())
}

/// Run every suite; `star_n` widens the engine-equivalence check to a
/// config's own star size when it is small enough for the dense engine.
pub fn run_all(star_n: Option<usize>) -> Vec<CheckResult> {
    let mut results = vec![
        check("engine_equivalence_n2", engine_equivalence(2)),
        check("engine_equivalence_n3", engine_equivalence(3)),
        check("engine_equivalence_n4", engine_equivalence(4)),
        check("ghz_label_algebra_n_le_4", ghz_label_algebra(4)),
        check("corrupted_circuit_detected", corrupted_circuit_detected()),
        check("qfim_finite_difference", qfim_cross_check()),
        check("ghz_qfim_closed_form", ghz_qfim_closed_form()),
    ];
    if let Some(n) = star_n {
        if n > 4 && n <= 6 {
            results.push(check(
                &format!("engine_equivalence_n{n}"),
                engine_equivalence(n),
            ));
        }
    }
    results
}
