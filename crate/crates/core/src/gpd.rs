//! Generalized Pareto likelihood and its maximization over exceedances.
//!
//! The fit profiles the likelihood in `θ = γ/σ`. For fixed `θ` the
//! maximizing shape is `γ(θ) = (1/m) Σ log(1 + θ E_j)` and `σ(θ) = γ(θ)/θ`,
//! which leaves the one-dimensional function
//!
//! ```text
//! ℓ(θ) = −m log(γ(θ)/θ) − m − m γ(θ)
//! ```
//!
//! `γ(θ)` is increasing in `θ`, so the shape box `γ ∈ [γ_min, γ_max]` maps
//! onto a `θ` interval found by bisection. The interval is scanned on a
//! log-spaced grid on each side of zero and the best bracket is refined by
//! golden-section search. `θ = 0` is the exponential model.
//!
//! Profile points are stationary in `γ`, so they miss maxima sitting on the
//! edges of the shape box. Those are found separately by maximizing over
//! `log σ` with `γ` pinned to each edge.

use serde::Serialize;

use crate::error::{Error, Result};

/// Shape floor: the limiting theory for the ML estimator needs `γ > −1/2`.
pub const GAMMA_FLOOR: f64 = -0.5 + 1e-6;
pub const GAMMA_CEIL: f64 = 5.0;
/// Below this `|γ|` the likelihood switches to the exponential form.
pub const GAMMA_ZERO_TOL: f64 = 1e-10;

const SCAN_POINTS: usize = 200;
const SUPPORT_MARGIN: f64 = 1e-8;
const GOLDEN_MAX_ITER: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GpdFit {
    pub gamma: f64,
    pub sigma: f64,
    pub loglik: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// `Σ [−log σ − (1/γ + 1) log(1 + γE/σ)]`, or `Σ[−log σ − E/σ]` when
/// `|γ| < 1e−10`. Returns `−∞` when `σ ≤ 0` or some `1 + γE/σ ≤ 0`.
pub fn gpd_loglik(exceedances: &[f64], gamma: f64, sigma: f64) -> f64 {
    if !(sigma > 0.0) {
        return f64::NEG_INFINITY;
    }
    let m = exceedances.len() as f64;
    if gamma.abs() < GAMMA_ZERO_TOL {
        let s: f64 = exceedances.iter().sum();
        return -m * sigma.ln() - s / sigma;
    }
    let ratio = gamma / sigma;
    let mut acc = 0.0;
    for &e in exceedances {
        let t = ratio * e;
        if !(t > -1.0) {
            return f64::NEG_INFINITY;
        }
        acc += t.ln_1p();
    }
    -m * sigma.ln() - (1.0 / gamma + 1.0) * acc
}

/// Profile point at `θ`: `(γ(θ), σ(θ), ℓ(θ))`. `θ = 0` gives the
/// exponential fit with `σ` the mean exceedance.
pub fn profile_at(exceedances: &[f64], theta: f64) -> (f64, f64, f64) {
    let m = exceedances.len() as f64;
    if theta == 0.0 {
        let sigma = exceedances.iter().sum::<f64>() / m;
        return (0.0, sigma, -m * sigma.ln() - m);
    }
    let gamma = shape_at(exceedances, theta);
    let sigma = gamma / theta;
    if !(sigma > 0.0) || !gamma.is_finite() {
        return (gamma, sigma, f64::NEG_INFINITY);
    }
    (gamma, sigma, -m * sigma.ln() - m - m * gamma)
}

fn shape_at(exceedances: &[f64], theta: f64) -> f64 {
    exceedances.iter().map(|&e| (theta * e).ln_1p()).sum::<f64>() / exceedances.len() as f64
}

/// Solves `γ(θ) = target` for `θ` in `[lo, hi]`, assuming a sign change.
fn solve_shape(exceedances: &[f64], target: f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if shape_at(exceedances, mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn validate(exceedances: &[f64]) -> Result<()> {
    if let Some(bad) = exceedances.iter().find(|e| !(e.is_finite() && **e >= 0.0)) {
        return Err(Error::InvalidParameter(format!(
            "exceedance {bad} is not a finite nonnegative number"
        )));
    }
    let mut v = exceedances.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    if v.len() < 2 {
        return Err(Error::TooFewExceedances { distinct: v.len() });
    }
    Ok(())
}

/// Maximum likelihood fit of a generalized Pareto law to `exceedances`,
/// with the shape restricted to `(−1/2 + 1e−6, 5]`.
///
/// `converged` is false when the maximum sits on either end of the shape
/// box or the golden-section refinement ran out of iterations.
pub fn gpd_fit_ml(exceedances: &[f64]) -> Result<GpdFit> {
    validate(exceedances)?;
    let e_max = exceedances.iter().copied().fold(0.0_f64, f64::max);

    // θ interval: support boundary or shape floor on the left, shape ceiling on the right.
    let support_lo = -(1.0 - SUPPORT_MARGIN) / e_max;
    let (theta_lo, floor_binding) = if shape_at(exceedances, support_lo) < GAMMA_FLOOR {
        (solve_shape(exceedances, GAMMA_FLOOR, support_lo, 0.0), true)
    } else {
        (support_lo, false)
    };
    let mut upper = 1.0 / e_max;
    while shape_at(exceedances, upper) < GAMMA_CEIL {
        upper *= 2.0;
    }
    let theta_hi = solve_shape(exceedances, GAMMA_CEIL, 0.0, upper);

    // Log-spaced scan: half the points on each side of zero, plus zero itself.
    let half = SCAN_POINTS / 2;
    let decades = 8.0;
    let mut grid = Vec::with_capacity(SCAN_POINTS + 1);
    for j in 0..half {
        grid.push(theta_lo * 10f64.powf(-decades * j as f64 / (half - 1) as f64));
    }
    grid.push(0.0);
    for j in (0..half).rev() {
        grid.push(theta_hi * 10f64.powf(-decades * j as f64 / (half - 1) as f64));
    }

    let values: Vec<f64> = grid.iter().map(|&t| profile_at(exceedances, t).2).collect();
    let best = values
        .iter()
        .enumerate()
        .fold(0, |b, (i, &v)| if v > values[b] { i } else { b });

    let lo = grid[best.saturating_sub(1)];
    let hi = grid[(best + 1).min(grid.len() - 1)];
    let (theta, iterations, refined) = golden_max(|t| profile_at(exceedances, t).2, lo, hi);

    // compare against the scan optimum in case the bracket was flat or one-sided
    let theta = if profile_at(exceedances, theta).2 >= values[best] {
        theta
    } else {
        grid[best]
    };

    let (mut gamma, mut sigma, _) = profile_at(exceedances, theta);
    if theta != 0.0 && gamma.abs() < GAMMA_ZERO_TOL {
        gamma = 0.0;
        sigma = exceedances.iter().sum::<f64>() / exceedances.len() as f64;
    }
    let mut loglik = gpd_loglik(exceedances, gamma, sigma);
    let at_floor = floor_binding && (theta - theta_lo).abs() <= 1e-9 * theta_lo.abs();
    let at_ceil = (theta - theta_hi).abs() <= 1e-9 * theta_hi.abs();
    let mut converged = refined && !at_floor && !at_ceil;
    let mut iterations = iterations;

    for edge in [GAMMA_FLOOR, GAMMA_CEIL] {
        let (s_edge, l_edge, it, _) = fit_scale(exceedances, edge, e_max);
        if l_edge > loglik {
            gamma = edge;
            sigma = s_edge;
            loglik = l_edge;
            iterations = it;
            converged = false;
        }
    }
    Ok(GpdFit { gamma, sigma, loglik, converged, iterations })
}

/// Maximizes the likelihood over `σ` at fixed `γ`; returns
/// `(σ, loglik, iterations, converged)`.
fn fit_scale(exceedances: &[f64], gamma: f64, e_max: f64) -> (f64, f64, usize, bool) {
    let mean = exceedances.iter().sum::<f64>() / exceedances.len() as f64;
    // σ must exceed −γ E_max when γ < 0
    let lo = if gamma < 0.0 {
        (-gamma * e_max).ln() + SUPPORT_MARGIN
    } else {
        (mean * 1e-8).ln()
    };
    let hi = (mean * 1e8).ln().max(lo + 1.0);
    let f = |t: f64| gpd_loglik(exceedances, gamma, t.exp());
    let grid: Vec<f64> = (0..SCAN_POINTS).map(|j| lo + (hi - lo) * j as f64 / (SCAN_POINTS - 1) as f64).collect();
    let values: Vec<f64> = grid.iter().map(|&t| f(t)).collect();
    let best = values
        .iter()
        .enumerate()
        .fold(0, |b, (i, &v)| if v > values[b] { i } else { b });
    let a = grid[best.saturating_sub(1)];
    let b = grid[(best + 1).min(grid.len() - 1)];
    let (t, it, ok) = golden_max(f, a, b);
    let t = if f(t) >= values[best] { t } else { grid[best] };
    (t.exp(), f(t), it, ok)
}

/// Golden-section maximization on `[a, b]`; returns `(argmax, iterations, converged)`.
fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, usize, bool) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for it in 0..GOLDEN_MAX_ITER {
        let scale = a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
        if (b - a).abs() <= 4.0 * f64::EPSILON * scale {
            let x = if fc >= fd { c } else { d };
            return (x, it, true);
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    (if fc >= fd { c } else { d }, GOLDEN_MAX_ITER, false)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loglik_hand_values() {
        assert_eq!(gpd_loglik(&[1.0], 0.0, 1.0), -1.0);
        assert!((gpd_loglik(&[1.0], 1.0, 1.0) + 2.0 * 2f64.ln()).abs() < 1e-15);
        assert_eq!(gpd_loglik(&[3.0], -1.0, 1.0), f64::NEG_INFINITY);
        assert_eq!(gpd_loglik(&[1.0], 0.5, 0.0), f64::NEG_INFINITY);
    }

    #[test]
    fn loglik_is_continuous_at_zero_shape() {
        let e = [0.3, 1.2, 2.5, 0.1];
        let at0 = gpd_loglik(&e, 0.0, 1.3);
        let near = gpd_loglik(&e, 1e-7, 1.3);
        assert!((at0 - near).abs() < 1e-5);
    }

    #[test]
    fn profile_endpoint_is_exponential_fit() {
        let e = [0.5, 1.5, 2.0, 4.0];
        let (g, s, l) = profile_at(&e, 0.0);
        assert_eq!(g, 0.0);
        assert_eq!(s, 2.0);
        assert!((l - gpd_loglik(&e, 0.0, 2.0)).abs() < 1e-12);
    }

    #[test]
    fn profile_matches_full_likelihood() {
        let e = [0.2, 0.9, 1.7, 3.3, 0.4];
        for theta in [-0.25, -0.05, 0.3, 2.0] {
            let (g, s, l) = profile_at(&e, theta);
            assert!((l - gpd_loglik(&e, g, s)).abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_degenerate_input() {
        assert!(matches!(
            gpd_fit_ml(&[1.0, 1.0, 1.0]),
            Err(Error::TooFewExceedances { distinct: 1 })
        ));
        assert!(gpd_fit_ml(&[1.0, f64::NAN]).is_err());
        assert!(gpd_fit_ml(&[1.0, -2.0]).is_err());
    }

    #[test]
    fn fit_respects_support_and_box() {
        let e = [0.1, 0.2, 0.25, 0.4, 0.9, 1.0, 1.0, 0.95];
        let fit = gpd_fit_ml(&e).unwrap();
        assert!(fit.sigma > 0.0);
        assert!(fit.gamma >= GAMMA_FLOOR - 1e-9 && fit.gamma <= GAMMA_CEIL);
        for &x in &e {
            assert!(1.0 + fit.gamma * x / fit.sigma > 0.0);
        }
        assert!(fit.loglik.is_finite());
    }

    #[test]
    fn uniform_like_data_pins_to_floor() {
        // equally spaced points look like γ = −1, below the floor
        let e: Vec<f64> = (1..=200).map(|i| i as f64 / 200.0).collect();
        let fit = gpd_fit_ml(&e).unwrap();
        assert!((fit.gamma - GAMMA_FLOOR).abs() < 1e-6);
        assert!(!fit.converged);
    }
}
