//! End-to-end estimators for the star schemes.
//!
//! The Z-basis estimator solves, for every end-node pair, the quadratic in
//! the root parameter implied by the single and pairwise flip frequencies,
//! then recovers the leaf parameters linearly. Its two mirrored solutions
//! cannot be separated without a noise-regime assumption. The GHZ decoders
//! read one flip indicator per channel straight off the measured label and
//! identify the parameters outright.

use crate::channels::PauliAxis;
use crate::distribution::SchemeKind;
use crate::error::{Error, Result};
use crate::labels::DiagonalState;
use crate::measurement::{marginals, Marginals, OutcomeRecord};

/// Tolerance below which a pair's quadratic coefficient makes it useless.
pub const EPS_UNINFORMATIVE: f64 = 1e-6;
/// Tolerance on a negative discriminant before statistics are inconsistent.
pub const EPS_DISCRIMINANT: f64 = 1e-6;
/// Tolerance on |1 - 2 theta_0| before the linear recovery is singular.
pub const EPS_SINGULAR: f64 = 1e-6;

/// Noise-regime assumption breaking the Z-scheme's two-fold symmetry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// theta_0 > 1/2: identity dominates.
    Low,
    /// theta_0 < 1/2.
    High,
}

impl std::str::FromStr for Regime {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "low" => Ok(Regime::Low),
            "high" => Ok(Regime::High),
            other => Err(Error::InvalidParameter(format!("unknown regime {other:?}"))),
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Regime::Low => "low",
            Regime::High => "high",
        })
    }
}

/// Estimation diagnostics: which pairs were dropped and which estimates had
/// to be clamped into [0, 1] (parameter index, raw value).
#[derive(Debug, Clone, Default)]
pub struct Diagnostics {
    pub pairs_skipped: Vec<(usize, usize)>,
    pub clamped: Vec<(usize, f64)>,
}

/// Result of one estimation run.
#[derive(Debug, Clone)]
pub struct EstimateReport {
    pub scheme: SchemeKind,
    pub n: usize,
    pub shots: u64,
    /// One candidate vector for GHZ schemes; the regime-selected candidate
    /// followed by its mirror for the Z scheme.
    pub candidates: Vec<Vec<f64>>,
    pub regime_used: Option<Regime>,
    pub identifiable: bool,
    /// Per-parameter standard errors of the primary candidate (zeros when
    /// estimated from exact probabilities).
    pub std_errors: Vec<f64>,
    pub diagnostics: Diagnostics,
}

impl EstimateReport {
    pub fn primary(&self) -> &[f64] {
        &self.candidates[0]
    }

    pub fn mirror(&self) -> Option<&[f64]> {
        self.candidates.get(1).map(|v| v.as_slice())
    }
}

/// Roots of `a (1 - t) t + c = 0` as `t = (1 +/- sqrt(1 + 4c/a)) / 2`,
/// clamped to [0, 1]. Returned as (upper root, lower root); the two sum to
/// one before clamping.
pub fn solve_theta0_pair(p_j: f64, p_k: f64, p_jk: f64) -> Result<(f64, f64)> {
    for p in [p_j, p_k, p_jk] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!(
                "frequency {p} outside [0, 1]"
            )));
        }
    }
    let a = 1.0 + 4.0 * p_jk - 2.0 * (p_j + p_k);
    if a.abs() < EPS_UNINFORMATIVE {
        return Err(Error::UninformativePair { a });
    }
    let c = p_j * p_k - p_jk;
    let discriminant = 1.0 + 4.0 * c / a;
    if discriminant < -EPS_DISCRIMINANT {
        return Err(Error::InconsistentStatistics { discriminant });
    }
    let root = discriminant.max(0.0).sqrt();
    let upper = ((1.0 + root) / 2.0).clamp(0.0, 1.0);
    let lower = ((1.0 - root) / 2.0).clamp(0.0, 1.0);
    Ok((upper, lower))
}

/// Z-scheme estimation from marginal frequencies alone (no standard
/// errors; used for exact, infinite-sample inputs).
pub fn estimate_z_from_marginals(m: &Marginals, regime: Regime) -> Result<EstimateReport> {
    let n = m.n;
    if n < 3 {
        return Err(Error::EstimationFailed(format!(
            "the Z scheme needs at least 3 end-nodes for a pair equation, got {n}"
        )));
    }
    let mut diagnostics = Diagnostics::default();
    let mut selected = Vec::new();
    for &((j, k), p_jk) in m.pairs() {
        match solve_theta0_pair(m.single(j), m.single(k), p_jk) {
            Ok((upper, lower)) => selected.push(match regime {
                Regime::Low => upper,
                Regime::High => lower,
            }),
            Err(Error::UninformativePair { .. }) => diagnostics.pairs_skipped.push((j, k)),
            Err(e) => return Err(e),
        }
    }
    if selected.is_empty() {
        return Err(Error::EstimationFailed(
            "every end-node pair was uninformative".into(),
        ));
    }
    let theta0 = selected.iter().sum::<f64>() / selected.len() as f64;
    if (1.0 - 2.0 * theta0).abs() < EPS_SINGULAR {
        return Err(Error::SingularParameter { theta0 });
    }

    let mut raw = Vec::with_capacity(n);
    raw.push(theta0);
    for j in 1..n {
        raw.push((m.single(j) - theta0) / (1.0 - 2.0 * theta0));
    }
    let mut primary = Vec::with_capacity(n);
    for (idx, &value) in raw.iter().enumerate() {
        if !(0.0..=1.0).contains(&value) {
            diagnostics.clamped.push((idx, value));
        }
        primary.push(value.clamp(0.0, 1.0));
    }
    // The mirror candidate is the elementwise complement of the raw
    // estimates, clamped the same way.
    let mirror: Vec<f64> = raw.iter().map(|&v| (1.0 - v).clamp(0.0, 1.0)).collect();

    Ok(EstimateReport {
        scheme: SchemeKind::ZBasis,
        n,
        shots: m.shots,
        candidates: vec![primary, mirror],
        regime_used: Some(regime),
        identifiable: false,
        std_errors: vec![0.0; n],
        diagnostics,
    })
}

/// Z-scheme estimation from a sampled record, with delta-method standard
/// errors.
pub fn estimate_z_scheme(record: &OutcomeRecord, regime: Regime) -> Result<EstimateReport> {
    let m = marginals(record)?;
    let mut report = estimate_z_from_marginals(&m, regime)?;
    report.std_errors = std_errors(&report, record)?;
    Ok(report)
}

fn ghz_kind_axis(kind: SchemeKind) -> Option<PauliAxis> {
    match kind {
        SchemeKind::GhzX => Some(PauliAxis::X),
        SchemeKind::GhzY => Some(PauliAxis::Y),
        SchemeKind::GhzZ => Some(PauliAxis::Z),
        SchemeKind::ZBasis => None,
    }
}

/// Per-channel flip frequencies decoded from GHZ labels weighted by `weight`.
///
/// For X and Z channels a root flip is exactly `b = 1` and a leaf-`j` flip
/// is exactly `s_j = 1`. For Y channels a root flip complements the whole
/// string as well, so the root indicator is `b xor parity(s)` and the leaf
/// indicators are read relative to it; the parity trick only works when the
/// star size is odd.
fn ghz_flip_frequencies(
    n: usize,
    axis: PauliAxis,
    labels: impl Iterator<Item = (usize, f64)>,
) -> Result<Vec<f64>> {
    if axis == PauliAxis::Y && n % 2 == 0 {
        return Err(Error::UnsupportedModel(format!(
            "the GHZ scheme cannot identify Y channels on an even star (n = {n}): \
             a root flip is indistinguishable from a complementary leaf pattern"
        )));
    }
    let width = n - 1;
    let mut freq = vec![0.0; n];
    let mut total = 0.0;
    for (code, w) in labels {
        total += w;
        let b = code & 1 == 1;
        let s = code >> 1;
        let flip0 = match axis {
            PauliAxis::X | PauliAxis::Z => b,
            PauliAxis::Y => b ^ (s.count_ones() % 2 == 1),
        };
        if flip0 {
            freq[0] += w;
        }
        for j in 1..n {
            let s_j = (s >> (width - j)) & 1 == 1;
            let flip_j = match axis {
                PauliAxis::X | PauliAxis::Z => s_j,
                PauliAxis::Y => s_j ^ flip0,
            };
            if flip_j {
                freq[j] += w;
            }
        }
    }
    Ok(freq.into_iter().map(|f| f / total).collect())
}

/// GHZ-scheme estimation from a sampled record. The `axis` argument must
/// match the scheme that produced the record.
pub fn estimate_ghz_scheme(record: &OutcomeRecord, axis: PauliAxis) -> Result<EstimateReport> {
    let record_axis = ghz_kind_axis(record.scheme).ok_or_else(|| Error::WrongScheme {
        expected: "a GHZ scheme".into(),
        got: record.scheme.name().into(),
    })?;
    if record_axis != axis {
        return Err(Error::WrongScheme {
            expected: format!("ghz record with axis {axis}"),
            got: record.scheme.name().into(),
        });
    }
    let n = record.n;
    let freq = ghz_flip_frequencies(
        n,
        axis,
        record
            .histogram()
            .iter()
            .enumerate()
            .map(|(code, &c)| (code, c as f64)),
    )?;
    let theta: Vec<f64> = freq.iter().map(|f| 1.0 - f).collect();
    let mut report = EstimateReport {
        scheme: record.scheme,
        n,
        shots: record.shots,
        candidates: vec![theta],
        regime_used: None,
        identifiable: true,
        std_errors: vec![0.0; n],
        diagnostics: Diagnostics::default(),
    };
    report.std_errors = std_errors(&report, record)?;
    Ok(report)
}

/// GHZ-scheme estimation from an exact outcome distribution (the
/// infinite-sample limit).
pub fn estimate_ghz_from_distribution(
    dist: &DiagonalState,
    kind: SchemeKind,
    n: usize,
) -> Result<Vec<f64>> {
    let axis = ghz_kind_axis(kind).ok_or_else(|| Error::WrongScheme {
        expected: "a GHZ scheme".into(),
        got: kind.name().into(),
    })?;
    let freq = ghz_flip_frequencies(n, axis, dist.iter())?;
    Ok(freq.into_iter().map(|f| 1.0 - f).collect())
}

/// Per-parameter standard errors for a report, recomputed from its record.
///
/// GHZ schemes: each parameter is one minus an independent Bernoulli
/// frequency, so `se = sqrt(theta (1 - theta) / N)`.
///
/// Z scheme: the delta method through the pair quadratic and the linear
/// recovery. Writing `x` for the vector of single and pairwise frequencies,
/// the estimate is a smooth function of `x`; its gradient is assembled
/// analytically and contracted with the multinomial covariance
/// `Cov(x_A, x_B) = (p_AB - p_A p_B) / N`, where the joint frequencies
/// `p_AB` are read from the record's histogram.
pub fn std_errors(report: &EstimateReport, record: &OutcomeRecord) -> Result<Vec<f64>> {
    if record.shots == 0 {
        return Ok(vec![0.0; report.n]);
    }
    let shots = record.shots as f64;
    match report.scheme {
        SchemeKind::GhzX | SchemeKind::GhzY | SchemeKind::GhzZ => Ok(report
            .primary()
            .iter()
            .map(|&t| (t * (1.0 - t) / shots).sqrt())
            .collect()),
        SchemeKind::ZBasis => z_delta_std_errors(report, record),
    }
}

fn z_delta_std_errors(report: &EstimateReport, record: &OutcomeRecord) -> Result<Vec<f64>> {
    let n = report.n;
    let width = n - 1;
    let m = marginals(record)?;
    let shots = record.shots as f64;

    // Event masks over the leaf bits: singles first, then the pairs that
    // actually contributed (skipped pairs carry no weight in the estimate).
    let unit = |j: usize| 1usize << (width - j);
    let mut events: Vec<usize> = (1..n).map(unit).collect();
    let mut used_pairs = Vec::new();
    for &((j, k), p_jk) in m.pairs() {
        if report.diagnostics.pairs_skipped.contains(&(j, k)) {
            continue;
        }
        used_pairs.push(((j, k), p_jk));
        events.push(unit(j) | unit(k));
    }
    if used_pairs.is_empty() {
        return Ok(vec![f64::INFINITY; n]);
    }
    let event_prob = |mask: usize| record.frequency_where(|code| code & mask == mask);

    // Gradient of theta0_hat (the mean of per-pair regime roots) over the
    // event vector.
    let sign = match report.regime_used {
        Some(Regime::Low) | None => 1.0,
        Some(Regime::High) => -1.0,
    };
    let mut grad_theta0 = vec![0.0; events.len()];
    let pair_count = used_pairs.len() as f64;
    for (pair_idx, &((j, k), p_jk)) in used_pairs.iter().enumerate() {
        let (p_j, p_k) = (m.single(j), m.single(k));
        let a = 1.0 + 4.0 * p_jk - 2.0 * (p_j + p_k);
        let c = p_j * p_k - p_jk;
        let disc = (1.0 + 4.0 * c / a).max(0.0);
        let root = disc.sqrt();
        if root < 1e-8 {
            // Double root: the estimate is at the fold point and the
            // first-order error expansion is unbounded.
            return Ok(vec![f64::INFINITY; n]);
        }
        // theta0_pair = (1 + sign * sqrt(D)) / 2 with D = 1 + 4c/a.
        let d_of = |dc: f64, da: f64| 4.0 * (a * dc - c * da) / (a * a);
        let contributions = [
            (j - 1, d_of(p_k, -2.0)),
            (k - 1, d_of(p_j, -2.0)),
            (width + pair_idx, d_of(-1.0, 4.0)),
        ];
        for (event_idx, d_disc) in contributions {
            grad_theta0[event_idx] += sign * d_disc / (4.0 * root) / pair_count;
        }
    }

    // Covariance of the event frequencies.
    let probs: Vec<f64> = events.iter().map(|&mask| event_prob(mask)).collect();
    let mut cov = vec![vec![0.0; events.len()]; events.len()];
    for (a_idx, &mask_a) in events.iter().enumerate() {
        for (b_idx, &mask_b) in events.iter().enumerate() {
            let joint = event_prob(mask_a | mask_b);
            cov[a_idx][b_idx] = (joint - probs[a_idx] * probs[b_idx]) / shots;
        }
    }

    let quad = |g: &[f64]| -> f64 {
        let mut acc = 0.0;
        for (a_idx, &ga) in g.iter().enumerate() {
            for (b_idx, &gb) in g.iter().enumerate() {
                acc += ga * cov[a_idx][b_idx] * gb;
            }
        }
        acc.max(0.0)
    };

    let theta0 = report.primary()[0];
    let denom = 1.0 - 2.0 * theta0;
    let mut ses = Vec::with_capacity(n);
    ses.push(quad(&grad_theta0).sqrt());
    for j in 1..n {
        // theta_j = (p_j - theta0) / (1 - 2 theta0).
        let p_j = m.single(j);
        let mut grad = vec![0.0; events.len()];
        for (idx, g0) in grad_theta0.iter().enumerate() {
            grad[idx] = g0 * (2.0 * (p_j - theta0) - denom) / (denom * denom);
        }
        grad[j - 1] += 1.0 / denom;
        ses.push(quad(&grad).sqrt());
    }
    Ok(ses)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::{preset, preset_z_basis};
    use crate::measurement::sample;
    use crate::topology::build_star;

    fn exact_z_marginals(thetas: &[f64]) -> Marginals {
        let star = build_star(thetas.len()).unwrap();
        let dist = preset_z_basis(&star).exact_distribution(thetas).unwrap();
        Marginals::exact(&dist, thetas.len()).unwrap()
    }

    #[test]
    fn quadratic_roots_match_hand_computation() {
        // p_1 = 0.62, p_2 = 0.56, p_12 = 0.36 gives a = 0.08, c = -0.0128,
        // roots 0.8 and 0.2.
        let (upper, lower) = solve_theta0_pair(0.62, 0.56, 0.36).unwrap();
        assert!((upper - 0.8).abs() < 1e-12);
        assert!((lower - 0.2).abs() < 1e-12);
    }

    #[test]
    fn quadratic_noiseless_roots() {
        let (upper, lower) = solve_theta0_pair(0.0, 0.0, 0.0).unwrap();
        assert_eq!(upper, 1.0);
        assert_eq!(lower, 0.0);
    }

    #[test]
    fn quadratic_clamps_slightly_negative_discriminant() {
        // The discriminant satisfies D = (1 - 2 p_j)(1 - 2 p_k) / a, so
        // frequencies straddling 1/2 by a sliver give a tiny negative D
        // that must clamp to the double root 1/2.
        let (p_j, p_k, p_jk) = (0.5 + 1e-5, 0.5 - 1e-5, 0.5);
        let a = 1.0 + 4.0 * p_jk - 2.0 * (p_j + p_k);
        let d = 1.0 + 4.0 * (p_j * p_k - p_jk) / a;
        assert!(d < 0.0 && d > -1e-9, "engineered discriminant {d}");
        let (upper, lower) = solve_theta0_pair(p_j, p_k, p_jk).unwrap();
        assert!((upper - 0.5).abs() < 1e-6);
        assert!((lower - 0.5).abs() < 1e-6);
    }

    #[test]
    fn quadratic_rejects_uninformative_and_inconsistent() {
        // theta_j = 0.5 makes a vanish: p_j = 0.5, p_k arbitrary consistent.
        let err = solve_theta0_pair(0.5, 0.5, 0.25).unwrap_err();
        assert!(matches!(err, Error::UninformativePair { .. }));
        // p_jk far above min(p_j, p_k) cannot come from any theta: the
        // discriminant goes strongly negative.
        let err = solve_theta0_pair(0.9, 0.1, 0.3).unwrap_err();
        assert!(matches!(err, Error::InconsistentStatistics { .. }));
    }

    #[test]
    fn roots_sum_to_one() {
        let (upper, lower) = solve_theta0_pair(0.62, 0.56, 0.36).unwrap();
        assert!((upper + lower - 1.0).abs() < 1e-12);
    }

    #[test]
    fn z_estimator_exact_recovery_and_mirror() {
        let m = exact_z_marginals(&[0.8, 0.3, 0.4]);
        let report = estimate_z_from_marginals(&m, Regime::Low).unwrap();
        let expected = [0.8, 0.3, 0.4];
        let mirror_expected = [0.2, 0.7, 0.6];
        for i in 0..3 {
            assert!((report.primary()[i] - expected[i]).abs() < 1e-12);
            assert!((report.mirror().unwrap()[i] - mirror_expected[i]).abs() < 1e-12);
        }
        assert!(!report.identifiable);
        assert_eq!(report.regime_used, Some(Regime::Low));

        let high = estimate_z_from_marginals(&m, Regime::High).unwrap();
        for i in 0..3 {
            assert!((high.primary()[i] - mirror_expected[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn z_estimator_exact_marginal_inputs() {
        // The frozen analytic marginals for theta = [0.8, 0.3, 0.4].
        let m = Marginals::from_values(3, vec![0.62, 0.56], vec![((1, 2), 0.36)]);
        let report = estimate_z_from_marginals(&m, Regime::Low).unwrap();
        for (got, want) in report.primary().iter().zip([0.8, 0.3, 0.4]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn z_estimator_singular_at_half() {
        let m = exact_z_marginals(&[0.5, 0.3, 0.4]);
        assert!(matches!(
            estimate_z_from_marginals(&m, Regime::Low),
            Err(Error::SingularParameter { .. })
        ));
    }

    #[test]
    fn z_estimator_noiseless_record() {
        let star = build_star(3).unwrap();
        let dist = preset_z_basis(&star).exact_distribution(&[1.0, 1.0, 1.0]).unwrap();
        let record = sample(&dist, SchemeKind::ZBasis, 3, 1000, 4).unwrap();
        let report = estimate_z_scheme(&record, Regime::Low).unwrap();
        for &v in report.primary() {
            assert_eq!(v, 1.0);
        }
    }

    #[test]
    fn z_estimator_needs_three_end_nodes() {
        let m = Marginals::from_values(2, vec![0.3], vec![]);
        assert!(matches!(
            estimate_z_from_marginals(&m, Regime::Low),
            Err(Error::EstimationFailed(_))
        ));
    }

    #[test]
    fn z_estimator_skips_uninformative_pairs() {
        // theta_1 = 0.5 kills pairs (1,2) and (1,3); pair (2,3) remains.
        let m = exact_z_marginals(&[0.8, 0.5, 0.4, 0.3]);
        let report = estimate_z_from_marginals(&m, Regime::Low).unwrap();
        assert!((report.primary()[0] - 0.8).abs() < 1e-12);
        assert!((report.primary()[1] - 0.5).abs() < 1e-12);
        assert_eq!(report.diagnostics.pairs_skipped, vec![(1, 2), (1, 3)]);
    }

    #[test]
    fn z_estimator_fails_when_all_pairs_uninformative() {
        let m = exact_z_marginals(&[0.8, 0.5, 0.5]);
        assert!(matches!(
            estimate_z_from_marginals(&m, Regime::Low),
            Err(Error::EstimationFailed(_))
        ));
    }

    #[test]
    fn ghz_estimator_exact_recovery_all_axes() {
        let star = build_star(3).unwrap();
        let thetas = [0.8, 0.3, 0.4];
        for kind in [SchemeKind::GhzX, SchemeKind::GhzY, SchemeKind::GhzZ] {
            let dist = preset(&star, kind).exact_distribution(&thetas).unwrap();
            let estimate = estimate_ghz_from_distribution(&dist, kind, 3).unwrap();
            for (got, want) in estimate.iter().zip(thetas) {
                assert!((got - want).abs() < 1e-12, "{kind}: {estimate:?}");
            }
        }
    }

    #[test]
    fn ghz_estimator_from_record() {
        let star = build_star(3).unwrap();
        let dist = preset(&star, SchemeKind::GhzX)
            .exact_distribution(&[0.8, 0.3, 0.4])
            .unwrap();
        let record = sample(&dist, SchemeKind::GhzX, 3, 1_000_000, 5).unwrap();
        let report = estimate_ghz_scheme(&record, PauliAxis::X).unwrap();
        assert!(report.identifiable);
        assert_eq!(report.candidates.len(), 1);
        for (got, want) in report.primary().iter().zip([0.8, 0.3, 0.4]) {
            assert!((got - want).abs() < 0.005);
        }
    }

    #[test]
    fn ghz_estimator_point_mass_record() {
        let star = build_star(4).unwrap();
        let dist = preset(&star, SchemeKind::GhzX)
            .exact_distribution(&[1.0; 4])
            .unwrap();
        let record = sample(&dist, SchemeKind::GhzX, 4, 100, 8).unwrap();
        let report = estimate_ghz_scheme(&record, PauliAxis::X).unwrap();
        assert!(report.primary().iter().all(|&t| t == 1.0));
    }

    #[test]
    fn ghz_estimator_axis_mismatch() {
        let star = build_star(3).unwrap();
        let dist = preset(&star, SchemeKind::GhzX)
            .exact_distribution(&[0.9, 0.9, 0.9])
            .unwrap();
        let record = sample(&dist, SchemeKind::GhzX, 3, 100, 1).unwrap();
        assert!(matches!(
            estimate_ghz_scheme(&record, PauliAxis::Z),
            Err(Error::WrongScheme { .. })
        ));
    }

    #[test]
    fn ghz_y_even_star_rejected() {
        let star = build_star(4).unwrap();
        let dist = preset(&star, SchemeKind::GhzY)
            .exact_distribution(&[0.8, 0.3, 0.4, 0.6])
            .unwrap();
        assert!(matches!(
            estimate_ghz_from_distribution(&dist, SchemeKind::GhzY, 4),
            Err(Error::UnsupportedModel(_))
        ));
    }

    #[test]
    fn ghz_estimator_permutation_equivariant() {
        let star = build_star(4).unwrap();
        let kind = SchemeKind::GhzX;
        let thetas = [0.9, 0.2, 0.55, 0.7];
        let permuted = [0.9, 0.55, 0.7, 0.2];
        let dist = preset(&star, kind).exact_distribution(&thetas).unwrap();
        let dist_perm = preset(&star, kind).exact_distribution(&permuted).unwrap();
        let est = estimate_ghz_from_distribution(&dist, kind, 4).unwrap();
        let est_perm = estimate_ghz_from_distribution(&dist_perm, kind, 4).unwrap();
        assert!((est[1] - est_perm[3]).abs() < 1e-12);
        assert!((est[2] - est_perm[1]).abs() < 1e-12);
        assert!((est[3] - est_perm[2]).abs() < 1e-12);
    }

    #[test]
    fn ghz_std_errors_binomial() {
        let star = build_star(3).unwrap();
        let dist = preset(&star, SchemeKind::GhzX)
            .exact_distribution(&[0.8, 0.3, 0.4])
            .unwrap();
        let record = sample(&dist, SchemeKind::GhzX, 3, 10_000, 6).unwrap();
        let report = estimate_ghz_scheme(&record, PauliAxis::X).unwrap();
        let t0 = report.primary()[0];
        let expected = (t0 * (1.0 - t0) / 10_000.0).sqrt();
        assert!((report.std_errors[0] - expected).abs() < 1e-12);
        // Near theta = 0.8 at N = 1e4 the error bar is about 0.004.
        assert!((report.std_errors[0] - 0.004).abs() < 0.0005);
    }

    #[test]
    fn degenerate_estimate_has_zero_std_error() {
        let star = build_star(3).unwrap();
        let dist = preset(&star, SchemeKind::GhzX)
            .exact_distribution(&[1.0; 3])
            .unwrap();
        let record = sample(&dist, SchemeKind::GhzX, 3, 100, 1).unwrap();
        let report = estimate_ghz_scheme(&record, PauliAxis::X).unwrap();
        assert!(report.std_errors.iter().all(|&se| se == 0.0));
    }

    #[test]
    fn z_std_errors_track_monte_carlo_scatter() {
        // Delta-method error bars should agree with the trial-to-trial
        // scatter of the estimator within a loose window.
        let star = build_star(3).unwrap();
        let thetas = [0.8, 0.3, 0.4];
        let dist = preset_z_basis(&star).exact_distribution(&thetas).unwrap();
        let shots = 20_000;
        let trials = 120;
        let mut estimates = Vec::new();
        let mut reported_se = 0.0;
        for t in 0..trials {
            let record = sample(&dist, SchemeKind::ZBasis, 3, shots, 1000 + t).unwrap();
            let report = estimate_z_scheme(&record, Regime::Low).unwrap();
            estimates.push(report.primary()[0]);
            reported_se += report.std_errors[0] / trials as f64;
        }
        let mean: f64 = estimates.iter().sum::<f64>() / trials as f64;
        let var: f64 =
            estimates.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / (trials - 1) as f64;
        let empirical_se = var.sqrt();
        let ratio = reported_se / empirical_se;
        assert!(
            (0.6..1.6).contains(&ratio),
            "delta-method se {reported_se} vs empirical {empirical_se}"
        );
    }
}
