//! Extreme value index estimators on the observed sample and their
//! adaptation to censoring.
//!
//! Each classical estimator (Hill, moment, UH, ML) is applied to the
//! `Z`-sample, where it converges to the index `γ` of `Z` rather than the
//! index `γ₁` of the lifetime. Dividing by the uncensored fraction `p̂` among
//! the `k` largest observations gives the adapted estimator
//! `γ̂^(c,·) = γ̂^(·) / p̂`.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gpd::{gpd_fit_ml, GpdFit};
use crate::sample::SortedCensoredSample;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorKind {
    Hill,
    Moment,
    #[serde(rename = "uh")]
    UH,
    #[serde(rename = "ml")]
    ML,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 4] = [
        EstimatorKind::Hill,
        EstimatorKind::Moment,
        EstimatorKind::UH,
        EstimatorKind::ML,
    ];

    pub fn label(self) -> &'static str {
        match self {
            EstimatorKind::Hill => "hill",
            EstimatorKind::Moment => "moment",
            EstimatorKind::UH => "uh",
            EstimatorKind::ML => "ml",
        }
    }

    /// Smallest `k` and the gap below `n` each estimator needs.
    fn k_bounds(self) -> (usize, usize) {
        match self {
            EstimatorKind::Hill | EstimatorKind::Moment => (1, 1),
            EstimatorKind::UH => (1, 2),
            EstimatorKind::ML => (2, 1),
        }
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "hill" | "h" => Ok(EstimatorKind::Hill),
            "moment" | "m" => Ok(EstimatorKind::Moment),
            "uh" => Ok(EstimatorKind::UH),
            "ml" => Ok(EstimatorKind::ML),
            other => Err(Error::InvalidParameter(format!("unknown estimator `{other}`"))),
        }
    }
}

/// How `p̂` enters the adaptation: recomputed for every `k`, or held fixed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PPolicy {
    #[default]
    PerK,
    Fixed(f64),
}

impl PPolicy {
    pub fn p_hat(self, sorted: &SortedCensoredSample, k: usize) -> Result<f64> {
        match self {
            PPolicy::PerK => sorted.uncensored_proportion(k),
            PPolicy::Fixed(p) if p.is_finite() && (0.0..=1.0).contains(&p) => Ok(p),
            PPolicy::Fixed(p) => Err(Error::InvalidParameter(format!(
                "fixed p = {p} outside [0, 1]"
            ))),
        }
    }
}

/// Log-moment summaries of the `k` largest observations over `Z_{n-k,n}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailStatistics {
    pub k: usize,
    /// `M⁽¹⁾ = (1/k) Σ log Z_{n-i+1,n} − log Z_{n-k,n}`
    pub m1: f64,
    /// `M⁽²⁾ = (1/k) Σ (log Z_{n-i+1,n} − log Z_{n-k,n})²`
    pub m2: f64,
    /// `S = 1 − ½ (1 − M⁽¹⁾²/M⁽²⁾)⁻¹`; `None` when `M⁽²⁾ = M⁽¹⁾²`.
    pub s: Option<f64>,
}

impl TailStatistics {
    pub fn s(&self) -> Result<f64> {
        self.s.ok_or(Error::DegenerateTail)
    }
}

/// Log-moments of the `k` top order statistics; requires `1 ≤ k ≤ n − 1`
/// and `Z_{n-k,n} > 0`.
pub fn log_moments(sorted: &SortedCensoredSample, k: usize) -> Result<TailStatistics> {
    sorted.check_k(k, 1, 1)?;
    let threshold = sorted.threshold(k);
    if !(threshold > 0.0) {
        return Err(Error::NonPositiveThreshold { value: threshold });
    }
    let log_t = threshold.ln();
    let (mut s1, mut s2) = (0.0, 0.0);
    for z in sorted.top(k) {
        let d = z.ln() - log_t;
        s1 += d;
        s2 += d * d;
    }
    let kf = k as f64;
    let m1 = s1 / kf;
    let m2 = s2 / kf;
    let spread = m2 - m1 * m1;
    let s = if spread > 8.0 * f64::EPSILON * m2 {
        Some(1.0 - 0.5 / (1.0 - m1 * m1 / m2))
    } else {
        None
    };
    Ok(TailStatistics { k, m1, m2, s })
}

/// Hill estimator `M⁽¹⁾`.
pub fn hill(sorted: &SortedCensoredSample, k: usize) -> Result<f64> {
    Ok(log_moments(sorted, k)?.m1)
}

/// Moment estimator `M⁽¹⁾ + S`.
pub fn moment(sorted: &SortedCensoredSample, k: usize) -> Result<f64> {
    let t = log_moments(sorted, k)?;
    Ok(t.m1 + t.s()?)
}

/// Slope of the generalized quantile plot:
/// `(1/k) Σ_{i=1..k} log UH_{i,n} − log UH_{k+1,n}` with
/// `UH_{i,n} = Z_{n-i,n} · Hill(i)`. Requires `1 ≤ k ≤ n − 2`.
pub fn uh(sorted: &SortedCensoredSample, k: usize) -> Result<f64> {
    sorted.check_k(k, 1, 2)?;
    let n = sorted.len();
    let z = sorted.times();
    let lowest = z[n - k - 2];
    if !(lowest > 0.0) {
        return Err(Error::NonPositiveThreshold { value: lowest });
    }
    // Hill(i) for i = 1..=k+1 from a running sum of the top logs
    let mut sum_top_logs = 0.0;
    let mut log_uh = Vec::with_capacity(k + 1);
    for i in 1..=k + 1 {
        sum_top_logs += z[n - i].ln();
        let thr = z[n - i - 1];
        let hill_i = sum_top_logs / i as f64 - thr.ln();
        let uh_i = thr * hill_i;
        if !(uh_i > 0.0) {
            return Err(Error::NonPositiveUh { index: i });
        }
        log_uh.push(uh_i.ln());
    }
    let mean = log_uh[..k].iter().sum::<f64>() / k as f64;
    Ok(mean - log_uh[k])
}

/// Exceedances `Z_{n-j+1,n} − Z_{n-k,n}`, `j = 1..k`, largest first.
pub fn exceedances(sorted: &SortedCensoredSample, k: usize) -> Result<Vec<f64>> {
    sorted.check_k(k, 1, 1)?;
    let t = sorted.threshold(k);
    Ok(sorted.top(k).map(|z| z - t).collect())
}

/// Generalized Pareto fit to the `k` exceedances over `Z_{n-k,n}`.
pub fn ml_estimator(sorted: &SortedCensoredSample, k: usize) -> Result<GpdFit> {
    sorted.check_k(k, 2, 1)?;
    gpd_fit_ml(&exceedances(sorted, k)?)
}

/// Raw (unadapted) index estimate of the given kind.
pub fn estimate_index(sorted: &SortedCensoredSample, kind: EstimatorKind, k: usize) -> Result<f64> {
    match kind {
        EstimatorKind::Hill => hill(sorted, k),
        EstimatorKind::Moment => moment(sorted, k),
        EstimatorKind::UH => uh(sorted, k),
        EstimatorKind::ML => ml_estimator(sorted, k).map(|f| f.gamma),
    }
}

/// `γ̂ / p̂`.
pub fn adapt_to_censoring(raw_estimate: f64, p_hat: f64) -> Result<f64> {
    if p_hat == 0.0 {
        return Err(Error::NoUncensored);
    }
    if !(p_hat > 0.0 && p_hat <= 1.0) {
        return Err(Error::InvalidParameter(format!("p = {p_hat} outside (0, 1]")));
    }
    Ok(raw_estimate / p_hat)
}

/// Censoring-adapted estimate `γ̂^(c,·)`.
pub fn adapted_index(
    sorted: &SortedCensoredSample,
    kind: EstimatorKind,
    k: usize,
    policy: PPolicy,
) -> Result<f64> {
    let raw = estimate_index(sorted, kind, k)?;
    adapt_to_censoring(raw, policy.p_hat(sorted, k)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateCurve {
    pub kind: EstimatorKind,
    pub adapted: bool,
    pub points: Vec<(usize, f64)>,
    /// `k` values where the estimator's preconditions failed, with the cause.
    pub skipped: Vec<(usize, String)>,
}

fn check_range(sorted: &SortedCensoredSample, k_min: usize, k_max: usize) -> Result<()> {
    let upper = sorted.len().saturating_sub(2);
    if k_min < 1 || k_min > k_max || k_max > upper {
        return Err(Error::InvalidParameter(format!(
            "k range [{k_min}, {k_max}] must satisfy 1 ≤ k_min ≤ k_max ≤ n − 2 = {upper}"
        )));
    }
    Ok(())
}

fn build_curve(
    kind: EstimatorKind,
    adapted: bool,
    k_min: usize,
    k_max: usize,
    eval: impl Fn(usize) -> Result<f64> + Sync,
) -> Result<EstimateCurve> {
    let results: Vec<(usize, Result<f64>)> =
        (k_min..=k_max).into_par_iter().map(|k| (k, eval(k))).collect();
    let mut points = Vec::new();
    let mut skipped = Vec::new();
    for (k, r) in results {
        match r {
            Ok(v) if v.is_finite() => points.push((k, v)),
            Ok(v) => skipped.push((k, format!("non-finite estimate {v}"))),
            Err(e) => skipped.push((k, e.to_string())),
        }
    }
    if points.is_empty() {
        return Err(Error::EmptyRange { k_min, k_max });
    }
    Ok(EstimateCurve { kind, adapted, points, skipped })
}

/// Adapted estimates for every feasible `k` in `[k_min, k_max]`.
pub fn estimate_curve(
    sorted: &SortedCensoredSample,
    kind: EstimatorKind,
    k_min: usize,
    k_max: usize,
    policy: PPolicy,
) -> Result<EstimateCurve> {
    check_range(sorted, k_min, k_max)?;
    build_curve(kind, true, k_min, k_max, |k| adapted_index(sorted, kind, k, policy))
}

/// Unadapted estimates for every feasible `k` in `[k_min, k_max]`.
pub fn raw_curve(
    sorted: &SortedCensoredSample,
    kind: EstimatorKind,
    k_min: usize,
    k_max: usize,
) -> Result<EstimateCurve> {
    check_range(sorted, k_min, k_max)?;
    build_curve(kind, false, k_min, k_max, |k| estimate_index(sorted, kind, k))
}

/// Feasible `k` range of `kind` for a sample of size `n`, if any.
pub fn k_limits(kind: EstimatorKind, n: usize) -> Option<(usize, usize)> {
    let (lo, gap) = kind.k_bounds();
    let hi = n.checked_sub(gap)?;
    (lo <= hi).then_some((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::CensoredSample;
    use std::f64::consts::E;

    fn uncensored(z: &[f64]) -> SortedCensoredSample {
        CensoredSample::from_records(z.iter().map(|&v| (v, 1))).unwrap().sorted()
    }

    #[test]
    fn log_moments_hand_values() {
        let s = uncensored(&[1.0, E, E * E]);
        let t = log_moments(&s, 2).unwrap();
        assert!((t.m1 - 1.5).abs() < 1e-15);
        assert!((t.m2 - 2.5).abs() < 1e-15);
        assert!((t.s.unwrap() + 4.0).abs() < 1e-12);
        assert!((moment(&s, 2).unwrap() + 2.5).abs() < 1e-12);
    }

    #[test]
    fn flat_tail_is_degenerate_for_moment_only() {
        let s = uncensored(&[0.5, 2.0, 2.0, 2.0]);
        let t = log_moments(&s, 2).unwrap();
        assert!(t.s.is_none());
        assert!(matches!(t.s(), Err(Error::DegenerateTail)));
        assert_eq!(hill(&s, 2).unwrap(), 0.0);
        assert!(matches!(moment(&s, 2), Err(Error::DegenerateTail)));
    }

    #[test]
    fn moment_with_half_ratio_has_zero_s() {
        // excesses (0, 2): m1 = 1, m2 = 2, m1²/m2 = 1/2
        let s = uncensored(&[1.0, 1.0, E * E]);
        let t = log_moments(&s, 2).unwrap();
        assert!(t.s.unwrap().abs() < 1e-15);
        assert!((moment(&s, 2).unwrap() - t.m1).abs() < 1e-15);
    }

    #[test]
    fn hill_single_log_ratio() {
        let s = uncensored(&[0.3, E, E * E]);
        assert!((hill(&s, 1).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn threshold_and_range_errors() {
        let s = uncensored(&[-1.0, 2.0, 3.0]);
        assert!(matches!(hill(&s, 2), Err(Error::NonPositiveThreshold { .. })));
        assert!(matches!(hill(&s, 3), Err(Error::KOutOfRange { .. })));
        assert!(matches!(hill(&s, 0), Err(Error::KOutOfRange { .. })));
        assert!(matches!(uh(&s, 2), Err(Error::KOutOfRange { .. })));
    }

    #[test]
    fn uh_hand_value() {
        // k=1: UH_1 = e²·2, UH_2 = e·2  →  log(2e²) − log(2e) = 1
        let s = uncensored(&[1.0, E, E * E, E.powi(4)]);
        assert!((uh(&s, 1).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn uh_with_constant_hill_values_reduces_to_log_spacings() {
        // choose descending logs so that every Hill(i), i ≤ k+1, equals c
        let c = 0.4;
        let k = 6;
        let mut logs = vec![3.0];
        for _ in 0..=k {
            let mean = logs.iter().sum::<f64>() / logs.len() as f64;
            logs.push(mean - c);
        }
        let z: Vec<f64> = logs.iter().map(|l| l.exp()).collect();
        let s = uncensored(&z);
        for i in 1..=k + 1 {
            assert!((hill(&s, i).unwrap() - c).abs() < 1e-12);
        }
        // log UH_i = log Z_{n-i,n} + log c, so the slope only sees the Z's
        let expect = logs[1..=k].iter().sum::<f64>() / k as f64 - logs[k + 1];
        assert!((uh(&s, k).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn ml_exceedances_are_built_from_threshold() {
        let s = uncensored(&[0.5, 1.0, 2.0, 3.0]);
        assert_eq!(exceedances(&s, 2).unwrap(), vec![2.0, 1.0]);
        let flat = uncensored(&[0.5, 1.0, 2.0, 2.0]);
        assert!(matches!(
            ml_estimator(&flat, 2),
            Err(Error::TooFewExceedances { .. })
        ));
        assert!(matches!(ml_estimator(&s, 1), Err(Error::KOutOfRange { .. })));
    }

    #[test]
    fn adaptation() {
        assert_eq!(adapt_to_censoring(0.1, 1.0).unwrap(), 0.1);
        assert!((adapt_to_censoring(0.04, 0.28).unwrap() - 0.142_857_142_857).abs() < 1e-11);
        assert_eq!(adapt_to_censoring(0.0, 0.5).unwrap(), 0.0);
        assert!(matches!(adapt_to_censoring(0.3, 0.0), Err(Error::NoUncensored)));
    }

    #[test]
    fn curve_skips_infeasible_points() {
        let s = uncensored(&[1.0, 2.0, 2.0, 2.0, 5.0, 9.0]);
        let c = estimate_curve(&s, EstimatorKind::Moment, 1, 4, PPolicy::PerK).unwrap();
        // k=3 has threshold 2 with excesses (log 4.5, log 2.5, 0) so it is fine;
        // k=1 is a single excess, degenerate
        assert!(c.skipped.iter().any(|(k, _)| *k == 1));
        assert!(c.points.iter().all(|(k, _)| *k != 1));
        assert!(estimate_curve(&s, EstimatorKind::Hill, 0, 3, PPolicy::PerK).is_err());
        assert!(estimate_curve(&s, EstimatorKind::Hill, 2, 5, PPolicy::PerK).is_err());
    }

    #[test]
    fn kind_parsing_round_trip() {
        for kind in EstimatorKind::ALL {
            assert_eq!(kind.label().parse::<EstimatorKind>().unwrap(), kind);
        }
        assert!("pickands".parse::<EstimatorKind>().is_err());
    }
}
