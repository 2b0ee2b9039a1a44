//! Acceptance suite: one test per release criterion, each printing a
//! pass/fail line. Run with `cargo test -p qnt-cli --test acceptance --
//! --nocapture` to see the lines.

use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;

use qnt_cli::config::ExperimentConfig;
use qnt_cli::runner::{self, derive_seed};
use qnt_core::channels::{make_single_pauli, ChannelModel, PauliAxis};
use qnt_core::dense::{apply_unitary_to_vector, ghz_pauli_action, ghz_vector};
use qnt_core::distribution::{preset, preset_z_basis, SchemeKind};
use qnt_core::estimators::{
    estimate_ghz_scheme, estimate_z_from_marginals, estimate_z_scheme, solve_theta0_pair, Regime,
};
use qnt_core::fisher::{finite_difference_qfim, qfim, EigenvalueModel};
use qnt_core::labels::GhzLabel;
use qnt_core::measurement::{sample, Marginals};
use qnt_core::topology::build_star;
use qnt_core::Error;

const THETA: [f64; 3] = [0.8, 0.3, 0.4];

fn config_text(scheme: &str, shots: &str, trials: u64, seed: u64) -> String {
    let axis = match scheme {
        "ghz_y" => "Y",
        "ghz_z" => "Z",
        _ => "X",
    };
    format!(
        "[topology]\nstar = 3\n[channels]\naxis = {axis}\ntheta = 0.8, 0.3, 0.4\n\
         [scheme]\npreset = {scheme}\nregime = low\n\
         [experiment]\nshots = {shots}\ntrials = {trials}\nseed = {seed}\n"
    )
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

fn channels_for(axis: PauliAxis, thetas: &[f64]) -> Vec<ChannelModel> {
    thetas
        .iter()
        .map(|&t| make_single_pauli(axis, t).unwrap().to_model())
        .collect()
}

#[test]
fn criterion_1_z_scheme_two_candidate_reproduction() {
    let started = Instant::now();
    let config =
        ExperimentConfig::parse(&config_text("z_basis", "1000000", 5, 20240201)).unwrap();
    let table = runner::convergence(&config).unwrap();
    assert!(table.failures.is_empty());
    let mirror = [0.2, 0.7, 0.6];
    for trial in 0..5u64 {
        for parameter in 0..3usize {
            let value = |candidate: usize| {
                table
                    .rows
                    .iter()
                    .find(|r| {
                        r.trial == trial && r.parameter == parameter && r.candidate == candidate
                    })
                    .unwrap()
                    .estimate
            };
            let c1 = value(1);
            let c2 = value(2);
            assert!(
                (c1 - THETA[parameter]).abs() < 0.01,
                "trial {trial} candidate 1 parameter {parameter}: {c1}"
            );
            assert!(
                (c2 - mirror[parameter]).abs() < 0.01,
                "trial {trial} candidate 2 parameter {parameter}: {c2}"
            );
        }
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "took {elapsed:?}");
    println!(
        "criterion 1 PASS: Z scheme at N=1e6 x5 trials reproduces both candidates within 0.01 \
         ({elapsed:?})"
    );
}

#[test]
fn criterion_2_ghz_scheme_unique_reproduction() {
    let started = Instant::now();
    let config = ExperimentConfig::parse(&config_text("ghz_x", "1000000", 5, 424242)).unwrap();
    let experiment = runner::prepare(&config).unwrap();
    for trial in 0..5u64 {
        let record =
            runner::run_record(&experiment, 1_000_000, derive_seed(config.seed, trial)).unwrap();
        let report = estimate_ghz_scheme(&record, PauliAxis::X).unwrap();
        assert!(report.identifiable);
        assert_eq!(report.candidates.len(), 1);
        for (got, want) in report.primary().iter().zip(THETA) {
            assert!((got - want).abs() < 0.01, "trial {trial}: {got} vs {want}");
        }
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "took {elapsed:?}");
    println!(
        "criterion 2 PASS: GHZ scheme at N=1e6 identifies theta uniquely within 0.01 ({elapsed:?})"
    );
}

#[test]
fn criterion_3_exact_marginal_consistency() {
    let marginals = Marginals::from_values(3, vec![0.62, 0.56], vec![((1, 2), 0.36)]);
    let report = estimate_z_from_marginals(&marginals, Regime::Low).unwrap();
    for (got, want) in report.primary().iter().zip(THETA) {
        assert!((got - want).abs() <= 1e-12, "{got} vs {want}");
    }
    println!("criterion 3 PASS: analytic marginals recover theta to 1e-12");
}

#[test]
fn criterion_4_engine_equivalence() {
    for n in 2..=4usize {
        let star = build_star(n).unwrap();
        for kind in [SchemeKind::ZBasis, SchemeKind::GhzX] {
            let scheme = preset(&star, kind);
            for theta in grid(&[0.1, 0.5, 0.9], n) {
                let rho = scheme
                    .distribute_dense(&channels_for(kind.axis(), &theta))
                    .unwrap();
                let dense_diag = rho.diagonalize_in_basis(kind.basis()).unwrap();
                let flip = scheme.exact_distribution(&theta).unwrap();
                let diff = dense_diag.max_abs_diff(&flip);
                assert!(diff < 1e-10, "{kind} n={n} {theta:?}: {diff:e}");
            }
        }
    }
    let star = build_star(3).unwrap();
    for kind in [SchemeKind::GhzX, SchemeKind::GhzY, SchemeKind::GhzZ] {
        let scheme = preset(&star, kind);
        for theta in grid(&[0.1, 0.5, 0.9], 3) {
            let rho = scheme
                .distribute_dense(&channels_for(kind.axis(), &theta))
                .unwrap();
            let dense_diag = rho.diagonalize_in_basis(kind.basis()).unwrap();
            let flip = scheme.exact_distribution(&theta).unwrap();
            assert!(dense_diag.max_abs_diff(&flip) < 1e-10, "{kind} {theta:?}");
        }
    }
    println!(
        "criterion 4 PASS: dense and flip engines agree to 1e-10 for n in 2..4 and all GHZ axes"
    );
}

#[test]
fn criterion_5_ghz_label_algebra_against_matrices() {
    for n in 2..=4usize {
        for code in 0..(1usize << n) {
            let label = GhzLabel::from_code(code, n);
            for axis in [PauliAxis::X, PauliAxis::Y, PauliAxis::Z] {
                for j in 0..n {
                    let (out, phase) = ghz_pauli_action(&label, axis, j).unwrap();
                    let mut lhs = ghz_vector(&label);
                    apply_unitary_to_vector(&mut lhs, &axis.matrix(), &[j], n);
                    let rhs: Vec<Complex64> =
                        ghz_vector(&out).into_iter().map(|a| a * phase).collect();
                    let worst = lhs
                        .iter()
                        .zip(&rhs)
                        .map(|(a, b)| (a - b).norm())
                        .fold(0.0, f64::max);
                    assert!(worst < 1e-12, "n={n} {label} {axis} j={j}: {worst:e}");
                }
            }
        }
    }
    println!("criterion 5 PASS: GHZ Pauli label algebra matches dense matrices to 1e-12");
}

#[test]
fn criterion_6_qfim_correctness() {
    let star = build_star(3).unwrap();
    for kind in [SchemeKind::ZBasis, SchemeKind::GhzX] {
        let model = EigenvalueModel::for_preset(&preset(&star, kind));
        for theta in grid(&[0.2, 0.5, 0.8], 3) {
            let analytic = qfim(&model, &theta).unwrap();
            let fd = finite_difference_qfim(&model, &theta, 1e-6).unwrap();
            let scale = analytic.matrix.max_abs().max(1e-12);
            let rel = analytic.matrix.max_abs_diff(&fd.matrix) / scale;
            assert!(rel < 1e-6, "{kind} {theta:?}: {rel:e}");
        }
    }
    let model = EigenvalueModel::for_preset(&preset(&star, SchemeKind::GhzX));
    for theta in grid(&[0.2, 0.5, 0.8], 3) {
        let result = qfim(&model, &theta).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                let expected = if a == b { 1.0 / (theta[a] * (1.0 - theta[a])) } else { 0.0 };
                assert!(
                    (result.matrix[(a, b)] - expected).abs() < 1e-10,
                    "{theta:?} F[{a}][{b}]"
                );
            }
        }
    }
    println!(
        "criterion 6 PASS: analytic QFIM matches finite differences to 1e-6 over the 27-point \
         grid; GHZ QFIM diagonal is 1/(theta (1 - theta)) to 1e-10"
    );
}

#[test]
fn criterion_7_qcrb_attainment() {
    let star = build_star(3).unwrap();
    let shots = 100_000u64;

    // GHZ: empirical variance of theta0_hat over many trials must match
    // [F^-1]_00 / N = theta0 (1 - theta0) / N within 15 percent.
    let ghz_model = EigenvalueModel::for_preset(&preset(&star, SchemeKind::GhzX));
    let ghz_bound = qfim(&ghz_model, &THETA).unwrap().inverse.unwrap()[(0, 0)];
    assert!((ghz_bound - THETA[0] * (1.0 - THETA[0])).abs() < 1e-10);
    let ghz_dist = preset(&star, SchemeKind::GhzX).exact_distribution(&THETA).unwrap();
    let trials = 2000u64;
    let estimates: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let record =
                sample(&ghz_dist, SchemeKind::GhzX, 3, shots, derive_seed(771, t)).unwrap();
            estimate_ghz_scheme(&record, PauliAxis::X).unwrap().primary()[0]
        })
        .collect();
    let mean = estimates.iter().sum::<f64>() / trials as f64;
    let variance = estimates.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>()
        / (trials - 1) as f64;
    let expected = ghz_bound / shots as f64;
    let ratio = variance / expected;
    assert!(
        (ratio - 1.0).abs() < 0.15,
        "GHZ variance ratio {ratio} (variance {variance:e}, bound {expected:e})"
    );

    // Z scheme: empirical variances must not beat the QCRB diagonal beyond
    // Monte Carlo slack.
    let z_model = EigenvalueModel::for_preset(&preset(&star, SchemeKind::ZBasis));
    let z_inverse = qfim(&z_model, &THETA).unwrap().inverse.unwrap();
    let z_dist = preset_z_basis(&star).exact_distribution(&THETA).unwrap();
    let z_trials = 1000u64;
    let z_estimates: Vec<Vec<f64>> = (0..z_trials)
        .into_par_iter()
        .map(|t| {
            let record =
                sample(&z_dist, SchemeKind::ZBasis, 3, shots, derive_seed(772, t)).unwrap();
            estimate_z_scheme(&record, Regime::Low).unwrap().primary().to_vec()
        })
        .collect();
    for parameter in 0..3 {
        let mean =
            z_estimates.iter().map(|e| e[parameter]).sum::<f64>() / z_trials as f64;
        let variance = z_estimates
            .iter()
            .map(|e| (e[parameter] - mean) * (e[parameter] - mean))
            .sum::<f64>()
            / (z_trials - 1) as f64;
        let bound = z_inverse[(parameter, parameter)] / shots as f64;
        let ratio = variance / bound;
        // Sample variance of ~1000 trials scatters by ~4.5 percent (one
        // sigma); 0.85 is a 3.3 sigma floor.
        assert!(
            ratio >= 0.85,
            "Z parameter {parameter}: variance {variance:e} beats bound {bound:e} (ratio {ratio})"
        );
    }
    println!(
        "criterion 7 PASS: GHZ variance attains the QCRB within 15 percent; Z variances respect \
         their bounds"
    );
}

#[test]
fn criterion_8_ghz_variance_strictly_smaller() {
    let star = build_star(3).unwrap();
    let shots = 10_000u64;
    let trials = 400u64;
    let ghz_dist = preset(&star, SchemeKind::GhzX).exact_distribution(&THETA).unwrap();
    let z_dist = preset_z_basis(&star).exact_distribution(&THETA).unwrap();

    let variance_of = |estimates: &[Vec<f64>], parameter: usize| {
        let mean = estimates.iter().map(|e| e[parameter]).sum::<f64>() / estimates.len() as f64;
        estimates
            .iter()
            .map(|e| (e[parameter] - mean) * (e[parameter] - mean))
            .sum::<f64>()
            / (estimates.len() - 1) as f64
    };

    let ghz: Vec<Vec<f64>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let record =
                sample(&ghz_dist, SchemeKind::GhzX, 3, shots, derive_seed(88, t)).unwrap();
            estimate_ghz_scheme(&record, PauliAxis::X).unwrap().primary().to_vec()
        })
        .collect();
    let z: Vec<Vec<f64>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let record =
                sample(&z_dist, SchemeKind::ZBasis, 3, shots, derive_seed(89, t)).unwrap();
            estimate_z_scheme(&record, Regime::Low).unwrap().primary().to_vec()
        })
        .collect();

    for parameter in [1usize, 2] {
        let vg = variance_of(&ghz, parameter);
        let vz = variance_of(&z, parameter);
        assert!(
            vg < vz,
            "parameter {parameter}: GHZ variance {vg:e} not below Z variance {vz:e}"
        );
    }
    println!(
        "criterion 8 PASS: GHZ estimator variance is strictly below the Z-scheme variance for \
         the leaf parameters at N=1e4"
    );
}

#[test]
fn criterion_9_property_suites() {
    // Quadratic root symmetry.
    let (upper, lower) = solve_theta0_pair(0.62, 0.56, 0.36).unwrap();
    assert!((upper + lower - 1.0).abs() < 1e-12);

    // Normalization of every preset distribution at a spread of parameters.
    let star = build_star(3).unwrap();
    for kind in [SchemeKind::ZBasis, SchemeKind::GhzX, SchemeKind::GhzY, SchemeKind::GhzZ] {
        for theta in grid(&[0.0, 0.3, 1.0], 3) {
            let dist = preset(&star, kind).exact_distribution(&theta).unwrap();
            let total: f64 = dist.probs().iter().sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }

    // theta_0 = 1/2 raises the singularity error on exact marginals.
    let dist = preset_z_basis(&star).exact_distribution(&[0.5, 0.3, 0.4]).unwrap();
    let marginals = Marginals::exact(&dist, 3).unwrap();
    assert!(matches!(
        estimate_z_from_marginals(&marginals, Regime::Low),
        Err(Error::SingularParameter { .. })
    ));

    // Seeded determinism, byte for byte, through the real binary.
    let dir = std::env::temp_dir().join("qnt_acceptance_determinism");
    std::fs::create_dir_all(&dir).unwrap();
    let config_path = dir.join("exp.cfg");
    std::fs::write(&config_path, config_text("ghz_x", "1000, 10000", 2, 7)).unwrap();
    let run = |out: &str| {
        let status = std::process::Command::new(env!("CARGO_BIN_EXE_qnt"))
            .args([
                "simulate",
                "--config",
                config_path.to_str().unwrap(),
                "--out",
                dir.join(out).to_str().unwrap(),
            ])
            .status()
            .unwrap();
        assert!(status.success());
        std::fs::read(dir.join(out).join("record.csv")).unwrap()
    };
    let a = run("a");
    let b = run("b");
    assert_eq!(a, b, "simulate output is not byte-identical across runs");

    println!(
        "criterion 9 PASS: root symmetry, normalization, singularity error and byte-exact \
         determinism all hold"
    );
}
