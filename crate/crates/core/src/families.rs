//! Closed-form lifetime/censoring models used as simulation ground truth.
//!
//! * Burr(β, τ, λ): `1 − F(x) = (β/(β + x^τ))^λ`, `x > 0`, index `1/(λτ)`.
//! * reverse Burr(β, τ, λ, x₊): `1 − F(x) = (β/(β + (x₊ − x)^{−τ}))^λ`,
//!   `x < x₊`, index `−1/(λτ)`.
//! * logistic: `1 − F(x) = 2/(1 + eˣ)`, `x > 0`, index 0.
//!
//! A [`FamilyPair`] couples a lifetime law `F` with a censoring law `G` of
//! the same family. Draws use inverse-CDF on a counter-based stream, two
//! uniforms per observation, so sample `i` of a seed never depends on how
//! many other samples were drawn.

use serde::{Deserialize, Serialize};

use crate::asymptotics::{classify_case, combined_index, limit_p, TailCase};
use crate::error::{Error, Result};
use crate::estimators::EstimatorKind;
use crate::rng::CounterRng;
use crate::sample::{CensoredObservation, CensoredSample};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BurrParams {
    pub beta: f64,
    pub tau: f64,
    pub lambda: f64,
}

impl BurrParams {
    pub fn new(beta: f64, tau: f64, lambda: f64) -> Result<Self> {
        let p = Self { beta, tau, lambda };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        if [self.beta, self.tau, self.lambda].iter().all(|v| *v > 0.0 && v.is_finite()) {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("Burr parameters must be positive: {self:?}")))
        }
    }

    pub fn survival(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        // (β/(β + x^τ))^λ = exp(−λ log(1 + x^τ/β))
        (-self.lambda * (x.powf(self.tau) / self.beta).ln_1p()).exp()
    }

    pub fn density(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let Self { beta, tau, lambda } = *self;
        lambda * tau * beta.powf(lambda) * x.powf(tau - 1.0) * (beta + x.powf(tau)).powf(-lambda - 1.0)
    }

    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&u) {
            return Err(Error::InvalidParameter(format!("u = {u} outside [0, 1)")));
        }
        Ok(self.quantile_unchecked(u))
    }

    fn quantile_unchecked(&self, u: f64) -> f64 {
        // (1 − u)^{−1/λ} − 1 = expm1(−log1p(−u)/λ)
        let w = (-(-u).ln_1p() / self.lambda).exp_m1();
        (self.beta * w).powf(1.0 / self.tau)
    }

    pub fn index(&self) -> f64 {
        1.0 / (self.lambda * self.tau)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReverseBurrParams {
    pub beta: f64,
    pub tau: f64,
    pub lambda: f64,
    pub x_plus: f64,
}

impl ReverseBurrParams {
    pub fn new(beta: f64, tau: f64, lambda: f64, x_plus: f64) -> Result<Self> {
        let p = Self { beta, tau, lambda, x_plus };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        let v = [self.beta, self.tau, self.lambda, self.x_plus];
        if v.iter().all(|v| *v > 0.0 && v.is_finite()) {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "reverse Burr parameters must be positive: {self:?}"
            )))
        }
    }

    fn check_support(&self, x: f64) -> Result<()> {
        if x < self.x_plus {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "x = {x} is not below the endpoint {}",
                self.x_plus
            )))
        }
    }

    pub fn survival(&self, x: f64) -> Result<f64> {
        self.check_support(x)?;
        Ok(self.survival_total(x))
    }

    pub fn density(&self, x: f64) -> Result<f64> {
        self.check_support(x)?;
        Ok(self.density_total(x))
    }

    fn survival_total(&self, x: f64) -> f64 {
        if x >= self.x_plus {
            return 0.0;
        }
        let d = self.x_plus - x;
        (-self.lambda * (d.powf(-self.tau) / self.beta).ln_1p()).exp()
    }

    fn density_total(&self, x: f64) -> f64 {
        if x >= self.x_plus {
            return 0.0;
        }
        let Self { beta, tau, lambda, .. } = *self;
        let d = self.x_plus - x;
        let w = d.powf(-tau);
        lambda * tau * beta.powf(lambda) * d.powf(-tau - 1.0) * (beta + w).powf(-lambda - 1.0)
    }

    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&u) {
            return Err(Error::InvalidParameter(format!("u = {u} outside [0, 1)")));
        }
        Ok(self.quantile_unchecked(u))
    }

    fn quantile_unchecked(&self, u: f64) -> f64 {
        let w = (-(-u).ln_1p() / self.lambda).exp_m1();
        self.x_plus - (self.beta * w).powf(-1.0 / self.tau)
    }

    pub fn index(&self) -> f64 {
        -1.0 / (self.lambda * self.tau)
    }
}

pub fn logistic_survival(x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else {
        2.0 / (1.0 + x.exp())
    }
}

pub fn logistic_density(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        // 2eˣ/(1 + eˣ)² written in e^{−x} to stay finite for large x
        let e = (-x).exp();
        2.0 * e / (1.0 + e).powi(2)
    }
}

pub fn logistic_quantile(u: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&u) {
        return Err(Error::InvalidParameter(format!("u = {u} outside [0, 1)")));
    }
    // log(2/(1 − u) − 1) = log1p(u) − log1p(−u)
    Ok(u.ln_1p() - (-u).ln_1p())
}

/// One marginal law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    Burr(BurrParams),
    ReverseBurr(ReverseBurrParams),
    Logistic,
}

impl Family {
    pub fn validate(&self) -> Result<()> {
        match self {
            Family::Burr(p) => p.validate(),
            Family::ReverseBurr(p) => p.validate(),
            Family::Logistic => Ok(()),
        }
    }

    /// `1 − F(x)`, extended by 1 below and 0 above the support.
    pub fn survival(&self, x: f64) -> f64 {
        match self {
            Family::Burr(p) => p.survival(x),
            Family::ReverseBurr(p) => p.survival_total(x),
            Family::Logistic => logistic_survival(x),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        1.0 - self.survival(x)
    }

    pub fn density(&self, x: f64) -> f64 {
        match self {
            Family::Burr(p) => p.density(x),
            Family::ReverseBurr(p) => p.density_total(x),
            Family::Logistic => logistic_density(x),
        }
    }

    pub fn quantile(&self, u: f64) -> Result<f64> {
        match self {
            Family::Burr(p) => p.quantile(u),
            Family::ReverseBurr(p) => p.quantile(u),
            Family::Logistic => logistic_quantile(u),
        }
    }

    fn draw(&self, u: f64) -> f64 {
        match self {
            Family::Burr(p) => p.quantile_unchecked(u),
            Family::ReverseBurr(p) => p.quantile_unchecked(u),
            Family::Logistic => u.ln_1p() - (-u).ln_1p(),
        }
    }

    pub fn index(&self) -> f64 {
        match self {
            Family::Burr(p) => p.index(),
            Family::ReverseBurr(p) => p.index(),
            Family::Logistic => 0.0,
        }
    }

    /// Right endpoint (`∞` for Burr and logistic).
    pub fn endpoint(&self) -> f64 {
        match self {
            Family::ReverseBurr(p) => p.x_plus,
            _ => f64::INFINITY,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Family::Burr(_) => "burr",
            Family::ReverseBurr(_) => "reverse_burr",
            Family::Logistic => "logistic",
        }
    }
}

/// Lifetime law `f` censored by an independent law `g`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilyPair {
    #[serde(alias = "f_spec")]
    pub f: Family,
    #[serde(alias = "g_spec")]
    pub g: Family,
}

/// Exact parameters of a pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TruthValues {
    pub case: TailCase,
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma: f64,
    /// Second-order parameter of `U_H`; not tabulated for the logistic pair.
    pub rho: Option<f64>,
    /// `τ = min(τ₁, τ₂)`
    pub tau_min: Option<f64>,
    pub eta: Option<f64>,
    pub beta_coeff: Option<f64>,
    pub p: f64,
}

impl FamilyPair {
    pub fn new(f: Family, g: Family) -> Result<Self> {
        f.validate()?;
        g.validate()?;
        Ok(Self { f, g })
    }

    /// Burr(10, 4, 1) censored by Burr(10, 1, 0.5).
    pub fn example_burr() -> Self {
        Self {
            f: Family::Burr(BurrParams { beta: 10.0, tau: 4.0, lambda: 1.0 }),
            g: Family::Burr(BurrParams { beta: 10.0, tau: 1.0, lambda: 0.5 }),
        }
    }

    /// reverse Burr(1, 8, 0.5, 10) censored by reverse Burr(10, 1, 0.5, 10).
    pub fn example_reverse_burr() -> Self {
        Self {
            f: Family::ReverseBurr(ReverseBurrParams { beta: 1.0, tau: 8.0, lambda: 0.5, x_plus: 10.0 }),
            g: Family::ReverseBurr(ReverseBurrParams { beta: 10.0, tau: 1.0, lambda: 0.5, x_plus: 10.0 }),
        }
    }

    /// logistic censored by logistic.
    pub fn example_logistic() -> Self {
        Self { f: Family::Logistic, g: Family::Logistic }
    }

    /// Survival function of `Z = min(X, Y)`: `(1 − F)(1 − G)`.
    pub fn z_survival(&self, z: f64) -> f64 {
        self.f.survival(z) * self.g.survival(z)
    }

    /// `P(δ = 1 | Z = z) = (1−G)f / ((1−G)f + (1−F)g)`.
    pub fn p_of_z(&self, z: f64) -> Result<f64> {
        let num = self.g.survival(z) * self.f.density(z);
        let other = self.f.survival(z) * self.g.density(z);
        let denom = num + other;
        if !(denom > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "z = {z} lies outside the common support"
            )));
        }
        Ok(num / denom)
    }

    pub fn truth_values(&self) -> Result<TruthValues> {
        self.f.validate()?;
        self.g.validate()?;
        let gamma1 = self.f.index();
        let gamma2 = self.g.index();
        let same_endpoint = self.f.endpoint() == self.g.endpoint();
        let case = classify_case(gamma1, gamma2, same_endpoint)?;
        let gamma = combined_index(gamma1, gamma2, case);

        let (rho, tau_min, eta, beta_coeff, p) = match (self.f, self.g) {
            (Family::Burr(a), Family::Burr(b)) => {
                let (tau, eta, bc) = burr_tables(a.beta, a.tau, a.lambda, b.beta, b.tau, b.lambda);
                (Some(-gamma * tau), Some(tau), Some(eta), Some(bc), limit_p(gamma1, gamma2, case, None)?)
            }
            (Family::ReverseBurr(a), Family::ReverseBurr(b)) => {
                let (tau, eta, bc) = burr_tables(a.beta, a.tau, a.lambda, b.beta, b.tau, b.lambda);
                (Some(gamma * tau), Some(tau), Some(eta), Some(bc), limit_p(gamma1, gamma2, case, None)?)
            }
            (Family::Logistic, Family::Logistic) => (None, None, None, None, 0.5),
            _ => {
                return Err(Error::Unsupported(format!(
                    "{} censored by {}",
                    self.f.name(),
                    self.g.name()
                )))
            }
        };
        Ok(TruthValues { case, gamma1, gamma2, gamma, rho, tau_min, eta, beta_coeff, p })
    }

    /// `n` independent censored pairs; draw `i` uses stream indices `2i`
    /// (lifetime) and `2i + 1` (censoring).
    pub fn sample_censored(&self, n: usize, seed: u64) -> CensoredSample {
        self.sample_with(n, CounterRng::new(seed))
    }

    pub(crate) fn sample_with(&self, n: usize, rng: CounterRng) -> CensoredSample {
        let obs = (0..n as u64)
            .map(|i| {
                let x = self.f.draw(rng.uniform(2 * i));
                let y = self.g.draw(rng.uniform(2 * i + 1));
                CensoredObservation { z: x.min(y), delta: x <= y }
            })
            .collect();
        CensoredSample::from_observations(obs).expect("inverse-CDF draws are finite")
    }
}

/// `(τ, η, β)` tables shared by the Burr and reverse-Burr examples.
fn burr_tables(b1: f64, t1: f64, l1: f64, b2: f64, t2: f64, l2: f64) -> (f64, f64, f64) {
    let tau = t1.min(t2);
    if t1 < t2 {
        (tau, l1 * b1, -b1)
    } else if t1 > t2 {
        (tau, l2 * b2, b2)
    } else {
        (tau, l1 * b1 + l2 * b2, b2 - b1)
    }
}

pub fn sample_censored(pair: &FamilyPair, n: usize, seed: u64) -> CensoredSample {
    pair.sample_censored(n, seed)
}

/// Leading-order bias terms of an example pair at `(n, k)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExampleBias {
    /// Asymptotic equivalent of the bias of `√k(γ̂^(·) − γ)` on the `Z`-sample.
    pub gamma_term: f64,
    /// Asymptotic equivalent of `(1/√k) Σ [p(H⁻(1 − i/n)) − p]`.
    pub alpha2_term: f64,
    /// True when the α₂ expansion degenerates (identical `τ` and `β`); the
    /// returned `alpha2_term` is then 0 and only the index bias is modelled.
    pub alpha2_caveat: bool,
}

impl ExampleBias {
    /// Mean of √k(γ̂^(c,·) − γ₁) implied by the two terms: `(b − γ₁α₂)/p`.
    pub fn adapted_mean(&self, truth: &TruthValues) -> f64 {
        (self.gamma_term - truth.gamma1 * self.alpha2_term) / truth.p
    }
}

/// Bias expressions for the three example pairs.
pub fn theoretical_bias_example(
    pair: &FamilyPair,
    kind: EstimatorKind,
    n: usize,
    k: usize,
) -> Result<ExampleBias> {
    use EstimatorKind::*;
    if k == 0 || k >= n {
        return Err(Error::KOutOfRange { k, min: 1, max: n.saturating_sub(1) });
    }
    let truth = pair.truth_values()?;
    let sk = (k as f64).sqrt();
    let ratio = n as f64 / k as f64;
    let g = truth.gamma;

    match (pair.f, pair.g) {
        (Family::Burr(a), Family::Burr(b)) => {
            let rho = truth.rho.unwrap();
            let eta = truth.eta.unwrap();
            let scale = (a.beta.powf(a.lambda) * b.beta.powf(b.lambda)).powf(rho);
            let common = sk * ratio.powf(rho);
            let factor = match kind {
                Hill => g * rho / (1.0 - rho),
                ML => rho * (1.0 + g) * (g + rho) / ((1.0 - rho) * (1.0 - rho + g)),
                Moment | UH => rho * (rho + g * (1.0 - rho)) / (1.0 - rho).powi(2),
            };
            let gamma_term = -eta * scale * common * factor;
            let (alpha2_term, caveat) = alpha2_term(&truth, a.tau == b.tau && a.beta == b.beta, scale, common);
            Ok(ExampleBias { gamma_term, alpha2_term, alpha2_caveat: caveat })
        }
        (Family::ReverseBurr(a), Family::ReverseBurr(b)) => {
            let rho = truth.rho.unwrap();
            let eta = truth.eta.unwrap();
            let tau = truth.tau_min.unwrap();
            let x_plus = a.x_plus;
            let base = a.beta.powf(a.lambda) * b.beta.powf(b.lambda);
            let scale_rho = base.powf(rho);
            let common_rho = sk * ratio.powf(rho);
            let common_gamma = base.powf(g) * sk * ratio.powf(g);
            let gamma_term = match kind {
                Hill => {
                    return Err(Error::Unsupported(
                        "the Hill estimator is only covered in case 1".into(),
                    ))
                }
                UH => {
                    if tau < 1.0 {
                        -g * g * tau * (1.0 - g) * (1.0 + tau)
                            / ((1.0 - g - g * tau) * (1.0 - g * tau))
                            * eta
                            * scale_rho
                            * common_rho
                    } else if tau == 1.0 {
                        g * g / ((1.0 - g) * (1.0 - 2.0 * g))
                            * scale_rho
                            * (-2.0 * eta * (1.0 - g) + 1.0 / x_plus)
                            * common_rho
                    } else {
                        g * g / ((1.0 - g) * (1.0 - 2.0 * g) * x_plus) * common_gamma
                    }
                }
                Moment => {
                    if tau < 1.0 {
                        -g * g * tau * (1.0 - g) * (1.0 + tau) * (1.0 - 2.0 * g)
                            / ((1.0 - g - g * tau) * (1.0 - 2.0 * g - g * tau))
                            * eta
                            * scale_rho
                            * common_rho
                    } else if tau == 1.0 {
                        -g * g / ((1.0 - g) * (1.0 - 3.0 * g))
                            * scale_rho
                            * (2.0 * eta * (1.0 - g).powi(2) - (g + 1.0) / x_plus)
                            * common_rho
                    } else {
                        -g / ((1.0 - g) * x_plus) * common_gamma
                    }
                }
                ML => {
                    if !(g > -0.5) {
                        return Err(Error::Unsupported(format!(
                            "the ML estimator needs gamma > -1/2, got {g}"
                        )));
                    }
                    -g * g * tau * (1.0 + g) * (1.0 + tau) / ((1.0 - g * tau) * (1.0 + g - g * tau))
                        * eta
                        * scale_rho
                        * common_rho
                }
            };
            let (alpha2_term, caveat) =
                alpha2_term(&truth, a.tau == b.tau && a.beta == b.beta, scale_rho, common_rho);
            Ok(ExampleBias { gamma_term, alpha2_term, alpha2_caveat: caveat })
        }
        (Family::Logistic, Family::Logistic) => {
            let nf = n as f64;
            let gamma_term = match kind {
                UH | Moment => sk / ratio.ln().powi(2),
                ML => -(k as f64) / (9.0 * nf.sqrt()),
                Hill => {
                    return Err(Error::Unsupported(
                        "the Hill estimator is only covered in case 1".into(),
                    ))
                }
            };
            Ok(ExampleBias { gamma_term, alpha2_term: 0.0, alpha2_caveat: false })
        }
        _ => Err(Error::Unsupported(format!(
            "{} censored by {}",
            pair.f.name(),
            pair.g.name()
        ))),
    }
}

/// `β (γ²/(γ₁γ₂)) (β₁^λ₁ β₂^λ₂)^ρ (1/(1−ρ)) √k (n/k)^ρ`.
fn alpha2_term(truth: &TruthValues, degenerate: bool, scale: f64, common: f64) -> (f64, bool) {
    if degenerate {
        return (0.0, true);
    }
    let rho = truth.rho.unwrap();
    let beta = truth.beta_coeff.unwrap();
    let g = truth.gamma;
    let v = beta * g * g / (truth.gamma1 * truth.gamma2) * scale / (1.0 - rho) * common;
    (v, false)
}
