//! Fisher-information cross-checks: the diagonal-SLD identity verified as a
//! dense matrix equation, finite-difference agreement over the full grid,
//! and the structural properties of the scheme QFIMs.

use num_complex::Complex64;
use qnt_core::dense::ghz_vector;
use qnt_core::distribution::{preset, SchemeKind};
use qnt_core::fisher::{finite_difference_qfim, qfim, sld_eigenvalues, EigenvalueModel};
use qnt_core::labels::{BasisKind, GhzLabel};
use qnt_core::topology::build_star;

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

/// Basis projectors of a scheme's label space as dense matrices.
fn basis_projectors(kind: SchemeKind, n: usize) -> Vec<Vec<Complex64>> {
    let space = kind.label_space(n);
    match kind.basis() {
        BasisKind::Computational => {
            let dim = space.len();
            (0..dim)
                .map(|idx| {
                    let mut m = vec![Complex64::new(0.0, 0.0); dim * dim];
                    m[idx * dim + idx] = Complex64::new(1.0, 0.0);
                    m
                })
                .collect()
        }
        BasisKind::Ghz => (0..space.len())
            .map(|code| {
                let v = ghz_vector(&GhzLabel::from_code(code, n));
                let dim = v.len();
                let mut m = vec![Complex64::new(0.0, 0.0); dim * dim];
                for i in 0..dim {
                    for j in 0..dim {
                        m[i * dim + j] = v[i] * v[j].conj();
                    }
                }
                m
            })
            .collect(),
    }
}

fn mat_mul(a: &[Complex64], b: &[Complex64], dim: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); dim * dim];
    for i in 0..dim {
        for k in 0..dim {
            let aik = a[i * dim + k];
            if aik.norm() == 0.0 {
                continue;
            }
            for j in 0..dim {
                out[i * dim + j] += aik * b[k * dim + j];
            }
        }
    }
    out
}

#[test]
fn sld_solves_the_defining_matrix_equation() {
    // With L_j = sum_k l_jk Lambda_k, check
    // (L_j rho + rho L_j) / 2 = d rho / d theta_j as dense matrices.
    let n = 3;
    let star = build_star(n).unwrap();
    let theta = [0.8, 0.3, 0.4];
    for kind in [SchemeKind::ZBasis, SchemeKind::GhzX] {
        let scheme = preset(&star, kind);
        let model = EigenvalueModel::for_preset(&scheme);
        let lambda = model.lambda(&theta).unwrap();
        let grads = model.gradients(&theta).unwrap();
        let projectors = basis_projectors(kind, n);
        let dim = (projectors[0].len() as f64).sqrt() as usize;

        let mut rho = vec![Complex64::new(0.0, 0.0); dim * dim];
        for (k, proj) in projectors.iter().enumerate() {
            for (r, p) in rho.iter_mut().zip(proj) {
                *r += p * lambda[k];
            }
        }

        for j in 0..n {
            let l_eigs = sld_eigenvalues(&model, &theta, j).unwrap();
            let mut sld = vec![Complex64::new(0.0, 0.0); dim * dim];
            let mut drho = vec![Complex64::new(0.0, 0.0); dim * dim];
            for (k, proj) in projectors.iter().enumerate() {
                for ((s, d), p) in sld.iter_mut().zip(drho.iter_mut()).zip(proj) {
                    *s += p * l_eigs[k];
                    *d += p * grads[k][j];
                }
            }
            let lr = mat_mul(&sld, &rho, dim);
            let rl = mat_mul(&rho, &sld, dim);
            let mut worst = 0.0_f64;
            for idx in 0..dim * dim {
                let lhs = (lr[idx] + rl[idx]) * 0.5;
                worst = worst.max((lhs - drho[idx]).norm());
            }
            assert!(worst < 1e-10, "{kind} parameter {j}: residual {worst:e}");
        }
    }
}

#[test]
fn analytic_vs_finite_difference_on_27_point_grid() {
    let star = build_star(3).unwrap();
    for kind in [SchemeKind::ZBasis, SchemeKind::GhzX] {
        let model = EigenvalueModel::for_preset(&preset(&star, kind));
        for theta in grid(&[0.2, 0.5, 0.8], 3) {
            let analytic = qfim(&model, &theta).unwrap();
            let fd = finite_difference_qfim(&model, &theta, 1e-6).unwrap();
            let scale = analytic.matrix.max_abs().max(1e-12);
            let rel = analytic.matrix.max_abs_diff(&fd.matrix) / scale;
            assert!(rel < 1e-6, "{kind} at {theta:?}: relative {rel:e}");
        }
    }
}

#[test]
fn ghz_qfim_diagonal_at_every_interior_point() {
    let star = build_star(3).unwrap();
    let model = EigenvalueModel::for_preset(&preset(&star, SchemeKind::GhzX));
    for theta in grid(&[0.2, 0.5, 0.8], 3) {
        let result = qfim(&model, &theta).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                let expected = if a == b { 1.0 / (theta[a] * (1.0 - theta[a])) } else { 0.0 };
                assert!(
                    (result.matrix[(a, b)] - expected).abs() < 1e-10,
                    "at {theta:?}: F[{a}][{b}]"
                );
            }
        }
    }
}

#[test]
fn qfim_invariant_under_leaf_relabeling() {
    // Swapping leaf parameters permutes the matching rows and columns.
    let star = build_star(4).unwrap();
    for kind in [SchemeKind::ZBasis, SchemeKind::GhzX] {
        let model = EigenvalueModel::for_preset(&preset(&star, kind));
        let theta = [0.8, 0.3, 0.55, 0.7];
        let swapped = [0.8, 0.55, 0.3, 0.7]; // leaves 1 and 2 exchanged
        let f = qfim(&model, &theta).unwrap().matrix;
        let g = qfim(&model, &swapped).unwrap().matrix;
        let perm = [0usize, 2, 1, 3];
        for a in 0..4 {
            for b in 0..4 {
                assert!(
                    (f[(a, b)] - g[(perm[a], perm[b])]).abs() < 1e-10,
                    "{kind} F[{a}][{b}]"
                );
            }
        }
    }
}

#[test]
fn even_star_y_scheme_has_singular_qfim() {
    // On an even star the Y-channel GHZ model loses a direction.
    let star = build_star(2).unwrap();
    let model = EigenvalueModel::for_preset(&preset(&star, SchemeKind::GhzY));
    let result = qfim(&model, &[0.8, 0.3]).unwrap();
    assert!(result.inverse.is_none());
    assert_eq!(result.null_space.len(), 1);
}

#[test]
fn z_scheme_qcrb_diagonal_reference_values() {
    // Independent oracle for [F^-1]_00 at theta = [0.8, 0.3, 0.4]: the
    // pair estimator's asymptotic variance by the hand-evaluated delta
    // method. With p1 = 0.62, p2 = 0.56, p12 = 0.36 the root gradient is
    // (5, 6.25, -7.5) and contracting with the multinomial covariance gives
    // Var(theta0_hat) * N = 4.165; the estimator attains the bound, so the
    // QCRB diagonal must match it.
    let star = build_star(3).unwrap();
    let model = EigenvalueModel::for_preset(&preset(&star, SchemeKind::ZBasis));
    let result = qfim(&model, &[0.8, 0.3, 0.4]).unwrap();
    let inv = result.inverse.unwrap();
    assert!((inv[(0, 0)] - 4.165).abs() < 1e-9);
    // Every Z-scheme bound dominates the GHZ Bernoulli bound for the same
    // parameter.
    assert!(inv[(0, 0)] >= 0.16);
    assert!(inv[(1, 1)] >= 0.21);
    assert!(inv[(2, 2)] >= 0.24);
}
