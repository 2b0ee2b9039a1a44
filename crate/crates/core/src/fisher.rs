//! Quantum Fisher information for the scheme states.
//!
//! Every scheme distributes a state that is diagonal in a parameter-free
//! basis, so the SLDs are diagonal in the same basis and the QFIM reduces to
//! the classical Fisher information of the eigenvalue map:
//! `F_ab = sum_k (1/lambda_k) (d lambda_k / d theta_a) (d lambda_k / d theta_b)`.
//!
//! The eigenvalues are sums, over the flip patterns that produce a label, of
//! products of per-edge Bernoulli factors; gradients follow from the product
//! rule and are cross-checked against central finite differences (exact for
//! multilinear functions up to rounding).

use crate::distribution::SchemePreset;
use crate::error::{Error, Result};
use crate::estimators::EstimateReport;
use crate::labels::LabelSpace;
use crate::linalg::{symmetric_eigen, symmetric_pseudo_inverse, SquareMatrix};

/// Relative eigenvalue threshold below which the QFIM counts as singular.
pub const SINGULARITY_THRESHOLD: f64 = 1e-10;

/// Eigenvalue map of a scheme state: for each outcome label, the set of
/// flip patterns (bitmask over edges, bit e set = edge e flipped) that
/// produce it. The probability of a label is the sum over its patterns of
/// `prod_e theta_e^(1 - f_e) (1 - theta_e)^(f_e)`.
#[derive(Debug, Clone)]
pub struct EigenvalueModel {
    name: String,
    param_count: usize,
    space: LabelSpace,
    preimages: Vec<Vec<usize>>,
}

impl EigenvalueModel {
    /// Derive the model from a scheme preset's label algebra.
    pub fn for_preset(preset: &SchemePreset) -> Self {
        let edges = preset.star().tree().edge_count();
        let actions = preset.edge_label_actions();
        let space = preset.label_space();
        let mut preimages = vec![Vec::new(); space.len()];
        for pattern in 0..(1usize << edges) {
            let mut label = 0usize;
            for (e, &mask) in actions.iter().enumerate() {
                if (pattern >> e) & 1 == 1 {
                    label ^= mask;
                }
            }
            preimages[label].push(pattern);
        }
        Self {
            name: preset.kind().name().to_string(),
            param_count: edges,
            space,
            preimages,
        }
    }

    /// Direct tomography of one channel: outcome 0 with probability theta,
    /// outcome 1 otherwise.
    pub fn single_channel() -> Self {
        Self {
            name: "single_channel".to_string(),
            param_count: 1,
            space: LabelSpace::z_bits(1),
            preimages: vec![vec![0b0], vec![0b1]],
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn param_count(&self) -> usize {
        self.param_count
    }

    pub fn space(&self) -> LabelSpace {
        self.space
    }

    fn check_theta(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.param_count {
            return Err(Error::InvalidParameter(format!(
                "{} parameters for a model over {}",
                theta.len(),
                self.param_count
            )));
        }
        for &t in theta {
            if !(0.0..=1.0).contains(&t) {
                return Err(Error::InvalidParameter(format!("theta {t} outside [0, 1]")));
            }
        }
        Ok(())
    }

    fn pattern_weight(&self, pattern: usize, theta: &[f64]) -> f64 {
        let mut w = 1.0;
        for (e, &t) in theta.iter().enumerate() {
            w *= if (pattern >> e) & 1 == 1 { 1.0 - t } else { t };
        }
        w
    }

    /// Label probabilities at `theta`.
    pub fn lambda(&self, theta: &[f64]) -> Result<Vec<f64>> {
        self.check_theta(theta)?;
        Ok(self
            .preimages
            .iter()
            .map(|patterns| patterns.iter().map(|&p| self.pattern_weight(p, theta)).sum())
            .collect())
    }

    /// Analytic gradients: `grad[label][a] = d lambda_label / d theta_a`.
    /// Each column sums to zero because normalization is theta independent.
    pub fn gradients(&self, theta: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.check_theta(theta)?;
        let mut grads = vec![vec![0.0; self.param_count]; self.preimages.len()];
        for (label, patterns) in self.preimages.iter().enumerate() {
            for &pattern in patterns {
                for a in 0..self.param_count {
                    let mut partial = 1.0;
                    for (e, &t) in theta.iter().enumerate() {
                        if e == a {
                            continue;
                        }
                        partial *= if (pattern >> e) & 1 == 1 { 1.0 - t } else { t };
                    }
                    // d/dt of t is +1, of (1 - t) is -1.
                    if (pattern >> a) & 1 == 1 {
                        partial = -partial;
                    }
                    grads[label][a] += partial;
                }
            }
        }
        Ok(grads)
    }
}

/// Matrix of eigenvalue gradients, spec'd as its own operation.
pub fn eigenvalue_gradients(model: &EigenvalueModel, theta: &[f64]) -> Result<Vec<Vec<f64>>> {
    model.gradients(theta)
}

/// Eigenvalues of the diagonal SLD for parameter `j`:
/// `l_jk = (d lambda_k / d theta_j) / lambda_k`. Labels with zero
/// probability and zero gradient contribute nothing and get `l = 0`;
/// a zero probability with a surviving gradient is a boundary singularity.
pub fn sld_eigenvalues(model: &EigenvalueModel, theta: &[f64], j: usize) -> Result<Vec<f64>> {
    if j >= model.param_count {
        return Err(Error::InvalidParameter(format!(
            "parameter index {j} out of range"
        )));
    }
    let lambda = model.lambda(theta)?;
    let grads = model.gradients(theta)?;
    let mut out = Vec::with_capacity(lambda.len());
    for (k, (&l, g)) in lambda.iter().zip(&grads).enumerate() {
        if l <= 1e-300 {
            if g[j].abs() > 1e-12 {
                return Err(Error::SingularModel(format!(
                    "label {k} has zero probability but gradient {:.3e} for theta_{j}",
                    g[j]
                )));
            }
            out.push(0.0);
        } else {
            out.push(g[j] / l);
        }
    }
    Ok(out)
}

/// QFIM with its pseudo-inverse (the per-shot Cramer-Rao covariance bound)
/// or, when singular, the null-space directions that the scheme cannot
/// identify at this point.
#[derive(Debug, Clone)]
pub struct QfimResult {
    pub matrix: SquareMatrix,
    pub inverse: Option<SquareMatrix>,
    pub null_space: Vec<Vec<f64>>,
    pub min_eigenvalue: f64,
}

fn assemble_qfim(lambda: &[f64], grads: &[Vec<f64>], params: usize) -> Result<SquareMatrix> {
    let mut f = SquareMatrix::zeros(params);
    for (k, (&l, g)) in lambda.iter().zip(grads).enumerate() {
        if l <= 1e-300 {
            if g.iter().any(|&d| d.abs() > 1e-12) {
                return Err(Error::SingularModel(format!(
                    "label {k} has zero probability with a nonvanishing gradient; \
                     the information diverges at this boundary point"
                )));
            }
            continue;
        }
        for a in 0..params {
            for b in a..params {
                let term = g[a] * g[b] / l;
                f[(a, b)] += term;
                if a != b {
                    f[(b, a)] += term;
                }
            }
        }
    }
    Ok(f)
}

/// QFIM from the analytic eigenvalue gradients.
pub fn qfim(model: &EigenvalueModel, theta: &[f64]) -> Result<QfimResult> {
    let lambda = model.lambda(theta)?;
    let grads = model.gradients(theta)?;
    finish_qfim(assemble_qfim(&lambda, &grads, model.param_count)?)
}

/// QFIM from central finite differences of the eigenvalues; the independent
/// cross-check route for the analytic gradients.
pub fn finite_difference_qfim(
    model: &EigenvalueModel,
    theta: &[f64],
    step: f64,
) -> Result<QfimResult> {
    let lambda = model.lambda(theta)?;
    let params = model.param_count;
    let mut grads = vec![vec![0.0; params]; lambda.len()];
    for a in 0..params {
        let mut up = theta.to_vec();
        let mut down = theta.to_vec();
        // Keep the probe points inside [0, 1]; the eigenvalues are
        // multilinear so the centered difference stays exact.
        let h_up = step.min(1.0 - theta[a]);
        let h_down = step.min(theta[a]);
        up[a] += h_up;
        down[a] -= h_down;
        let span = h_up + h_down;
        if span <= 0.0 {
            return Err(Error::InvalidParameter(
                "finite-difference step collapsed to zero".into(),
            ));
        }
        let lu = model.lambda(&up)?;
        let ld = model.lambda(&down)?;
        for k in 0..lambda.len() {
            grads[k][a] = (lu[k] - ld[k]) / span;
        }
    }
    finish_qfim(assemble_qfim(&lambda, &grads, params)?)
}

fn finish_qfim(matrix: SquareMatrix) -> Result<QfimResult> {
    let eig = symmetric_eigen(&matrix);
    let min_eigenvalue = eig.values.first().copied().unwrap_or(0.0);
    let (inverse, null_space) = symmetric_pseudo_inverse(&matrix, SINGULARITY_THRESHOLD);
    if null_space.is_empty() {
        Ok(QfimResult { matrix, inverse: Some(inverse), null_space, min_eigenvalue })
    } else {
        Ok(QfimResult { matrix, inverse: None, null_space, min_eigenvalue })
    }
}

/// One row of the QCRB comparison: the estimator's variance for a parameter
/// against the bound `[F^-1]_jj / N`.
#[derive(Debug, Clone)]
pub struct QcrbRow {
    pub parameter: usize,
    pub variance: f64,
    pub bound: f64,
    pub ratio: f64,
    pub violation: bool,
}

/// Compare a report's standard errors against the Cramer-Rao bound.
///
/// A ratio below `1 - 3 * mc_tolerance` is flagged: errors below the bound
/// beyond Monte Carlo slack indicate a bug, not a better estimator.
pub fn qcrb_check(
    report: &EstimateReport,
    qfim: &QfimResult,
    shots: u64,
    mc_tolerance: f64,
) -> Result<Vec<QcrbRow>> {
    let inverse = qfim.inverse.as_ref().ok_or_else(|| {
        Error::SingularModel("QFIM is singular; no Cramer-Rao bound to compare against".into())
    })?;
    if inverse.dim() != report.primary().len() {
        return Err(Error::InvalidParameter(format!(
            "QFIM dimension {} does not match the report's {} parameters",
            inverse.dim(),
            report.primary().len()
        )));
    }
    let mut rows = Vec::with_capacity(inverse.dim());
    for j in 0..inverse.dim() {
        let variance = report.std_errors[j] * report.std_errors[j];
        let bound = inverse[(j, j)] / shots as f64;
        let ratio = if bound > 0.0 { variance / bound } else { f64::INFINITY };
        rows.push(QcrbRow {
            parameter: j,
            variance,
            bound,
            ratio,
            violation: ratio < 1.0 - 3.0 * mc_tolerance,
        });
    }
    Ok(rows)
}
