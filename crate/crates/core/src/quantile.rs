//! Extreme quantiles `F⁻¹(1 − ε)` of the lifetime distribution.
//!
//! ```text
//! x̂ = Z_{n-k,n} + â · ((S_KM(Z_{n-k,n}) / ε)^γ̂ − 1) / γ̂
//! ```
//!
//! with `γ̂ = γ̂^(c,·)` the adapted index, `S_KM` the Kaplan–Meier survival
//! function, and `â = Z_{n-k,n} M⁽¹⁾ (1 − S) / p̂` for the moment and UH
//! estimators or `â = σ̂ / p̂` for ML. Hill is not available here; it is
//! only consistent when both tails are heavy.
//!
//! The formula presumes the lifetime and censoring distributions share
//! their right endpoint (possibly infinite). That cannot be checked from
//! data and is left to the user.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimators::{
    adapt_to_censoring, log_moments, ml_estimator, moment, uh, EstimatorKind, PPolicy,
};
use crate::gpd::GpdFit;
use crate::sample::SortedCensoredSample;

/// Below this `|γ|` the growth term uses its logarithmic limit.
pub const GROWTH_ZERO_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuantileEstimate {
    pub kind: EstimatorKind,
    pub k: usize,
    pub eps: f64,
    pub value: f64,
    pub scale: f64,
    pub gamma_adapted: f64,
    pub threshold: f64,
    pub survival_at_threshold: f64,
    pub p_hat: f64,
}

/// `Z_{n-k,n} M⁽¹⁾ (1 − S) / p̂`.
pub fn scale_moment_uh(sorted: &SortedCensoredSample, k: usize, p_hat: f64) -> Result<f64> {
    let t = log_moments(sorted, k)?;
    let s = t.s()?;
    adapt_to_censoring(sorted.threshold(k) * t.m1 * (1.0 - s), p_hat)
}

/// `σ̂ / p̂`.
pub fn scale_ml(fit: &GpdFit, p_hat: f64) -> Result<f64> {
    if !(fit.sigma > 0.0) {
        return Err(Error::InvalidParameter(format!("sigma = {} not positive", fit.sigma)));
    }
    adapt_to_censoring(fit.sigma, p_hat)
}

/// `(u^γ − 1)/γ`, continuous at `γ = 0` where it becomes `log u`.
pub fn pareto_growth(u: f64, gamma: f64) -> Result<f64> {
    if !(u > 0.0) {
        return Err(Error::InvalidParameter(format!("ratio u = {u} must be positive")));
    }
    let log_u = u.ln();
    if gamma.abs() < GROWTH_ZERO_TOL {
        Ok(log_u)
    } else {
        Ok((gamma * log_u).exp_m1() / gamma)
    }
}

/// Censoring-adapted extreme quantile estimate at exceedance probability `eps`.
pub fn extreme_quantile(
    sorted: &SortedCensoredSample,
    k: usize,
    eps: f64,
    kind: EstimatorKind,
    policy: PPolicy,
) -> Result<QuantileEstimate> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("eps = {eps} outside (0, 1)")));
    }
    let p_hat = policy.p_hat(sorted, k)?;
    let (raw_gamma, scale) = match kind {
        EstimatorKind::Hill => return Err(Error::HillQuantile),
        EstimatorKind::Moment => (moment(sorted, k)?, scale_moment_uh(sorted, k, p_hat)?),
        EstimatorKind::UH => (uh(sorted, k)?, scale_moment_uh(sorted, k, p_hat)?),
        EstimatorKind::ML => {
            let fit = ml_estimator(sorted, k)?;
            return extreme_quantile_ml_fit(sorted, k, eps, &fit, p_hat);
        }
    };
    assemble(sorted, k, eps, kind, raw_gamma, scale, p_hat)
}

/// ML quantile from a GPD fit already computed on the top `k` exceedances.
pub fn extreme_quantile_ml_fit(
    sorted: &SortedCensoredSample,
    k: usize,
    eps: f64,
    fit: &GpdFit,
    p_hat: f64,
) -> Result<QuantileEstimate> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("eps = {eps} outside (0, 1)")));
    }
    let scale = scale_ml(fit, p_hat)?;
    assemble(sorted, k, eps, EstimatorKind::ML, fit.gamma, scale, p_hat)
}

fn assemble(
    sorted: &SortedCensoredSample,
    k: usize,
    eps: f64,
    kind: EstimatorKind,
    raw_gamma: f64,
    scale: f64,
    p_hat: f64,
) -> Result<QuantileEstimate> {
    let gamma_adapted = adapt_to_censoring(raw_gamma, p_hat)?;
    let survival = sorted.km_survival_at_threshold(k)?;
    if survival <= 0.0 {
        return Err(Error::ZeroSurvival);
    }
    let threshold = sorted.threshold(k);
    let value = threshold + scale * pareto_growth(survival / eps, gamma_adapted)?;
    Ok(QuantileEstimate {
        kind,
        k,
        eps,
        value,
        scale,
        gamma_adapted,
        threshold,
        survival_at_threshold: survival,
        p_hat,
    })
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
    fn scale_hand_values() {
        let s = uncensored(&[1.0, E, E * E]);
        assert!((scale_moment_uh(&s, 2, 1.0).unwrap() - 7.5).abs() < 1e-12);
        assert!((scale_moment_uh(&s, 2, 0.5).unwrap() - 15.0).abs() < 1e-12);
        assert!(scale_moment_uh(&s, 2, 0.0).is_err());
    }

    #[test]
    fn scale_ml_values() {
        let fit = GpdFit { gamma: 0.1, sigma: 2.0, loglik: 0.0, converged: true, iterations: 1 };
        assert_eq!(scale_ml(&fit, 1.0).unwrap(), 2.0);
        assert!((scale_ml(&fit, 0.28).unwrap() - 7.142_857_142_857_143).abs() < 1e-12);
        assert!(matches!(scale_ml(&fit, 0.0), Err(Error::NoUncensored)));
    }

    #[test]
    fn growth_values() {
        assert_eq!(pareto_growth(1.0, 0.7).unwrap(), 0.0);
        assert!((pareto_growth(E, 0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((pareto_growth(E, 1e-12).unwrap() - 1.0).abs() < 1e-15);
        assert!((pareto_growth(4.0, 0.5).unwrap() - 2.0).abs() < 1e-15);
        assert!(pareto_growth(0.0, 0.5).is_err());
        assert!(pareto_growth(-1.0, 0.5).is_err());
    }

    #[test]
    fn quantile_at_survival_level_is_threshold() {
        let z: Vec<f64> = (1..=40).map(|i| (i as f64).powf(1.3)).collect();
        let s = uncensored(&z);
        let k = 10;
        let eps = s.km_survival_at_threshold(k).unwrap();
        for kind in [EstimatorKind::Moment, EstimatorKind::UH, EstimatorKind::ML] {
            let q = extreme_quantile(&s, k, eps, kind, PPolicy::PerK).unwrap();
            assert_eq!(q.value, s.threshold(k));
        }
    }

    #[test]
    fn hill_and_bad_eps_are_rejected() {
        let s = uncensored(&[1.0, 2.0, 3.0, 5.0, 8.0]);
        assert!(matches!(
            extreme_quantile(&s, 2, 0.01, EstimatorKind::Hill, PPolicy::PerK),
            Err(Error::HillQuantile)
        ));
        assert!(extreme_quantile(&s, 2, 0.0, EstimatorKind::UH, PPolicy::PerK).is_err());
        assert!(extreme_quantile(&s, 2, 1.0, EstimatorKind::UH, PPolicy::PerK).is_err());
    }

    #[test]
    fn composition_of_hand_oracles() {
        // â = 7.5, γ̂ = 0.5, ratio 4, threshold 1  →  1 + 7.5·2
        let value = 1.0 + 7.5 * pareto_growth(4.0, 0.5).unwrap();
        assert_eq!(value, 16.0);
    }
}
