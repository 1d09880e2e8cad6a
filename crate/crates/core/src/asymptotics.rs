//! Limiting laws of the censoring-adapted estimators.
//!
//! Under the usual second-order and intermediate-sequence conditions,
//!
//! ```text
//! √k (γ̂^(c,·) − γ₁)  →  N( (α₁ b₀ − γ₁ α₂)/p ,  (σ² + γ₁² p(1 − p))/p² )
//! ```
//!
//! where `α₁ b₀` and `σ²` are the bias and variance of the estimator on an
//! uncensored sample with index `γ`. This module classifies the
//! `(γ₁, γ₂)` configuration, evaluates the closed-form variances and
//! bias means of each estimator, the `b(x)` and `ρ̃` second-order tables,
//! and Wald intervals built from the normal limit.
//!
//! Intervals are not bias corrected: `α₁` and `α₂` depend on the unknown
//! regime and are not estimated.

use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::estimators::EstimatorKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TailCase {
    /// `γ₁ > 0, γ₂ > 0`
    Case1,
    /// `γ₁ < 0, γ₂ < 0` with a common finite endpoint
    Case2,
    /// `γ₁ = γ₂ = 0` with infinite endpoints
    Case3,
}

impl TailCase {
    pub fn number(self) -> u8 {
        match self {
            TailCase::Case1 => 1,
            TailCase::Case2 => 2,
            TailCase::Case3 => 3,
        }
    }

    pub fn from_number(n: u8) -> Result<Self> {
        match n {
            1 => Ok(TailCase::Case1),
            2 => Ok(TailCase::Case2),
            3 => Ok(TailCase::Case3),
            _ => Err(Error::InvalidParameter(format!("case {n} is not 1, 2 or 3"))),
        }
    }
}

pub fn classify_case(gamma1: f64, gamma2: f64, endpoints_equal: bool) -> Result<TailCase> {
    if gamma1 > 0.0 && gamma2 > 0.0 {
        Ok(TailCase::Case1)
    } else if gamma1 < 0.0 && gamma2 < 0.0 && endpoints_equal {
        Ok(TailCase::Case2)
    } else if gamma1 == 0.0 && gamma2 == 0.0 {
        Ok(TailCase::Case3)
    } else {
        Err(Error::OutsideCases { gamma1, gamma2 })
    }
}

/// Index of `Z`: `γ₁γ₂/(γ₁ + γ₂)`, or 0 in case 3.
pub fn combined_index(gamma1: f64, gamma2: f64, case: TailCase) -> f64 {
    match case {
        TailCase::Case3 => 0.0,
        _ => gamma1 * gamma2 / (gamma1 + gamma2),
    }
}

/// Limit of `p(z)` at the right endpoint: `γ₂/(γ₁ + γ₂)`. In case 3 the
/// limit must be supplied.
pub fn limit_p(gamma1: f64, gamma2: f64, case: TailCase, supplied: Option<f64>) -> Result<f64> {
    match case {
        TailCase::Case3 => supplied.ok_or(Error::MissingInput("p must be supplied in case 3")),
        _ => Ok(gamma2 / (gamma1 + gamma2)),
    }
}

fn check_p(p: f64) -> Result<()> {
    if p > 0.0 && p <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("p = {p} outside (0, 1]")))
    }
}

/// `(σ² + γ₁² p(1 − p)) / p²`.
pub fn variance_from_theorem(sigma2_uncensored: f64, gamma1: f64, p: f64) -> Result<f64> {
    check_p(p)?;
    if !(sigma2_uncensored >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "sigma^2 = {sigma2_uncensored} is negative"
        )));
    }
    Ok((sigma2_uncensored + gamma1 * gamma1 * p * (1.0 - p)) / (p * p))
}

/// Asymptotic variance of `√k(γ̂^(c,·) − γ₁)`.
///
/// Hill is only covered in case 1 and ML needs `γ > −1/2`. `p` is used by
/// the case-3 and ML expressions; elsewhere it is implied by `γ/γ₁`.
pub fn variance_censored(
    kind: EstimatorKind,
    case: TailCase,
    gamma1: f64,
    gamma: f64,
    p: f64,
) -> Result<f64> {
    use EstimatorKind::*;
    use TailCase::*;
    let g = gamma;
    let g1 = gamma1;
    let tail = g1 * g1 * (g1 / g - 1.0);
    let v = match (kind, case) {
        (Hill, Case1) => g1.powi(3) / g,
        (Hill, _) => {
            return Err(Error::Unsupported(
                "the Hill estimator is only covered in case 1".into(),
            ))
        }
        (Moment | UH, Case1) => g1 * g1 / (g * g) * (1.0 + g1 * g),
        (Moment, Case2) => {
            g1 * g1 * (1.0 - g).powi(2) * (1.0 - 2.0 * g) * (1.0 - g + 6.0 * g * g)
                / (g * g * (1.0 - 4.0 * g) * (1.0 - 3.0 * g))
                + tail
        }
        (UH, Case2) => {
            g1 * g1 * (1.0 - g) * (1.0 + g + 2.0 * g * g) / (g * g * (1.0 - 2.0 * g)) + tail
        }
        (Moment | UH, Case3) => {
            check_p(p)?;
            1.0 / (p * p)
        }
        (ML, _) => {
            if !(g > -0.5) {
                return Err(Error::Unsupported(format!(
                    "the ML estimator needs gamma > -1/2, got {g}"
                )));
            }
            check_p(p)?;
            (1.0 + g * (2.0 + g1)) / (p * p)
        }
    };
    Ok(v)
}

/// Variance of the estimator on an uncensored sample with index `γ`.
pub fn uncensored_variance(kind: EstimatorKind, case: TailCase, gamma: f64) -> Result<f64> {
    use EstimatorKind::*;
    use TailCase::*;
    let g = gamma;
    Ok(match (kind, case) {
        (Hill, Case1) => g * g,
        (Hill, _) => {
            return Err(Error::Unsupported(
                "the Hill estimator is only covered in case 1".into(),
            ))
        }
        (Moment | UH, Case1) => 1.0 + g * g,
        (Moment, Case2) => {
            (1.0 - g).powi(2) * (1.0 - 2.0 * g) * (1.0 - g + 6.0 * g * g)
                / ((1.0 - 4.0 * g) * (1.0 - 3.0 * g))
        }
        (UH, Case2) => (1.0 - g) * (1.0 + g + 2.0 * g * g) / (1.0 - 2.0 * g),
        (Moment | UH, Case3) => 1.0,
        (ML, _) => (1.0 + g).powi(2),
    })
}

/// Extra second-order quantities some bias branches need.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct BiasExtras {
    pub gamma1: Option<f64>,
    pub gamma: Option<f64>,
    pub rho: Option<f64>,
    pub a_coeff: Option<f64>,
    pub ell_plus: Option<f64>,
    pub tau_h: Option<f64>,
}

/// Asymptotic mean `μ^(c,·)` of `√k(γ̂^(c,·) − γ₁)`.
///
/// Every expression is `−γ₁α₂/p + (α₁/p)·c` with an estimator- and
/// case-specific constant `c`. The moment estimator in case 2 selects its
/// branch by comparing `ρ` with `γ`; the `ρ = γ` branch needs `A`, `ℓ₊`
/// and `τ_H`, and ML needs `ρ` and `A`.
pub fn bias_mu(
    kind: EstimatorKind,
    case: TailCase,
    alpha1: f64,
    alpha2: f64,
    p: f64,
    rho_tilde: f64,
    extras: &BiasExtras,
) -> Result<f64> {
    use EstimatorKind::*;
    use TailCase::*;
    check_p(p)?;
    if kind == Hill && case != Case1 {
        return Err(Error::Unsupported(
            "the Hill estimator is only covered in case 1".into(),
        ));
    }
    let censoring_term = if alpha2 == 0.0 {
        0.0
    } else {
        -extras.gamma1.ok_or(Error::MissingInput("gamma1"))? * alpha2 / p
    };
    if alpha1 == 0.0 {
        return Ok(censoring_term);
    }
    let need_gamma = || extras.gamma.ok_or(Error::MissingInput("gamma"));
    let rt = rho_tilde;

    let coeff = match (kind, case) {
        (Hill, Case1) => {
            let g = need_gamma()?;
            g / (rt + g * (1.0 - rt))
        }
        (Hill, _) => {
            return Err(Error::Unsupported(
                "the Hill estimator is only covered in case 1".into(),
            ))
        }
        (Moment, Case1) => 1.0 / (1.0 - rt),
        (Moment, Case2) => {
            let g = need_gamma()?;
            let rho = extras.rho.ok_or(Error::MissingInput("rho"))?;
            if rho < g {
                (2.0 * g - 1.0) / (rt * (1.0 - rt))
            } else if rho == g {
                let a = extras.a_coeff.ok_or(Error::MissingInput("A"))?;
                let l = extras.ell_plus.ok_or(Error::MissingInput("ell_plus"))?;
                let t = extras.tau_h.ok_or(Error::MissingInput("tau_H"))?;
                let denom = a * (1.0 - g) - l / t;
                if denom == 0.0 {
                    return Err(Error::InvalidParameter(
                        "A(1 - gamma) - ell_plus/tau_H vanishes".into(),
                    ));
                }
                (1.0 - 2.0 * g) / ((1.0 - g) * (1.0 - 3.0 * g))
                    * (a * (1.0 - g).powi(2) - (g + 1.0) * l / t)
                    / denom
            } else {
                (1.0 - 2.0 * g) / (1.0 - 2.0 * g - rt)
            }
        }
        (Moment, Case3) => 1.0,
        (UH, _) => 1.0 / (1.0 - rt),
        (ML, _) => {
            let g = need_gamma()?;
            let rho = extras.rho.ok_or(Error::MissingInput("rho"))?;
            let a = extras.a_coeff.ok_or(Error::MissingInput("A"))?;
            rho * (g + 1.0) * a / ((1.0 - rho) * (1.0 - rho + g))
        }
    };
    Ok(censoring_term + alpha1 / p * coeff)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RhoTildeBranch {
    /// `0 < γ < −ρ`, `D ≠ 0`: `ρ̃ = −γ`
    MinusGamma,
    /// `−ρ ≤ γ`, or `0 < γ < −ρ` with `D = 0`, or `γ < ρ`: `ρ̃ = ρ`
    Rho,
    /// `ρ ≤ γ ≤ 0`: `ρ̃ = γ`
    Gamma,
}

pub fn rho_tilde_branch(gamma: f64, rho: f64, d_shift: f64) -> RhoTildeBranch {
    if gamma > 0.0 && gamma < -rho && d_shift != 0.0 {
        RhoTildeBranch::MinusGamma
    } else if rho <= gamma && gamma <= 0.0 {
        RhoTildeBranch::Gamma
    } else {
        RhoTildeBranch::Rho
    }
}

pub fn rho_tilde(gamma: f64, rho: f64, d_shift: f64) -> Result<f64> {
    if rho > 0.0 {
        return Err(Error::InvalidParameter(format!("rho = {rho} must be <= 0")));
    }
    Ok(match rho_tilde_branch(gamma, rho, d_shift) {
        RhoTildeBranch::MinusGamma => -gamma,
        RhoTildeBranch::Rho => rho,
        RhoTildeBranch::Gamma => gamma,
    })
}

/// Second-order description of the tail quantile function of `Z`.
#[derive(Debug, Clone, Copy)]
pub struct SecondOrderParams {
    pub gamma: f64,
    pub rho: f64,
    pub a_coeff: f64,
    pub ell_plus: f64,
    pub d_shift: f64,
    /// Right endpoint; only meaningful for `γ < 0`.
    pub tau_h: f64,
    /// Slowly varying `L₂` for the `γ = −ρ` branch.
    pub l2: Option<fn(f64) -> f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BBranch {
    /// `0 < −ρ < γ`, or `0 < γ < −ρ` with `D = 0`
    Regular,
    /// `γ = −ρ`
    Boundary,
    /// `0 < γ < −ρ`, `D ≠ 0`
    Shift,
    /// `γ = 0`
    Zero,
    /// `γ < ρ`
    BelowRho,
    /// `ρ < γ < 0`
    Endpoint,
    /// `γ = ρ < 0`
    EqualRho,
}

/// Branch of `b(x)` whose domain contains `(γ, ρ, D)`, if any.
pub fn b_branch(gamma: f64, rho: f64, d_shift: f64) -> Option<BBranch> {
    let g = gamma;
    if g > 0.0 {
        if 0.0 < -rho && -rho < g {
            Some(BBranch::Regular)
        } else if g == -rho {
            Some(BBranch::Boundary)
        } else if g < -rho {
            Some(if d_shift == 0.0 { BBranch::Regular } else { BBranch::Shift })
        } else {
            None
        }
    } else if g == 0.0 {
        Some(BBranch::Zero)
    } else if g < rho {
        Some(BBranch::BelowRho)
    } else if rho < g {
        Some(BBranch::Endpoint)
    } else {
        Some(BBranch::EqualRho)
    }
}

/// Second-order rate `b(x)` with `a₂(x) = x^ρ`.
///
/// Pass `Some(branch)` to insist on a branch; it must match the parameter
/// domain. The `γ = 0` value `1/log² x` carries no scale factor.
pub fn b_function(x: f64, params: &SecondOrderParams, branch: Option<BBranch>) -> Result<f64> {
    let SecondOrderParams { gamma: g, rho, a_coeff: a, ell_plus, d_shift, tau_h, l2 } = *params;
    let domain = b_branch(g, rho, d_shift).ok_or_else(|| {
        Error::InvalidParameter(format!("no b(x) branch for gamma = {g}, rho = {rho}"))
    })?;
    if let Some(b) = branch {
        if b != domain {
            return Err(Error::InvalidParameter(format!(
                "branch {b:?} does not apply to gamma = {g}, rho = {rho}, D = {d_shift}"
            )));
        }
    }
    let a2 = x.powf(rho);
    Ok(match domain {
        BBranch::Regular => a * rho * (rho + g * (1.0 - rho)) / ((g + rho) * (1.0 - rho)) * a2,
        BBranch::Boundary => {
            let l2 = l2.ok_or(Error::MissingInput("L2 for the gamma = -rho branch"))?;
            -g.powi(3) / (1.0 + g) * x.powf(-g) * l2(x)
        }
        BBranch::Shift => -g.powi(3) * d_shift / (1.0 + g) * x.powf(-g),
        BBranch::Zero => 1.0 / x.ln().powi(2),
        BBranch::BelowRho => a * rho * (1.0 - g) / (1.0 - g - rho) * a2,
        BBranch::Endpoint => -g / (1.0 - 2.0 * g) * (ell_plus / tau_h) * x.powf(g),
        BBranch::EqualRho => g / (1.0 - 2.0 * g) * (a * (1.0 - g) - ell_plus / tau_h) * x.powf(g),
    })
}

/// Standard normal quantile.
pub fn normal_quantile(prob: f64) -> f64 {
    let normal = Normal::standard();
    let x = normal.inverse_cdf(prob);
    if !x.is_finite() {
        return x;
    }
    // the library inverse is good to about 1e-10; one Newton step makes it
    // invert the CDF to rounding level
    x - (normal.cdf(x) - prob) / normal.pdf(x)
}

pub fn normal_cdf(x: f64) -> f64 {
    Normal::standard().cdf(x)
}

/// Wald interval `γ̂ ∓ z_{(1+level)/2} √(variance/k)`.
pub fn confidence_interval(gamma_adapted: f64, k: usize, variance: f64, level: f64) -> Result<(f64, f64)> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    if !(variance > 0.0) {
        return Err(Error::InvalidParameter(format!("variance = {variance} not positive")));
    }
    if !(0.0..1.0).contains(&level) {
        return Err(Error::InvalidParameter(format!("level = {level} outside [0, 1)")));
    }
    let z = if level == 0.0 { 0.0 } else { normal_quantile(0.5 * (1.0 + level)) };
    let half = z * (variance / k as f64).sqrt();
    Ok((gamma_adapted - half, gamma_adapted + half))
}
