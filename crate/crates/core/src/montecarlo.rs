//! Seeded simulation studies over a grid of `k`.
//!
//! Replicate `r` draws its sample from the stream keyed by `seed ⊕ r`, so
//! replicates can run in any order or in parallel. Per-cell statistics are
//! always accumulated in replicate order, which keeps summaries bit-identical
//! whatever the thread count.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{normal_cdf, variance_censored};
use crate::error::{Error, Result};
use crate::estimators::{adapt_to_censoring, adapted_index, ml_estimator, EstimatorKind, PPolicy};
use crate::families::{theoretical_bias_example, FamilyPair, TruthValues};
use crate::quantile::{extreme_quantile, extreme_quantile_ml_fit};
use crate::rng::{CounterRng, GENERATOR_ID};
use crate::sample::SortedCensoredSample;

fn default_k_grid() -> Vec<usize> {
    (5..=475).step_by(5).collect()
}

fn default_eps() -> f64 {
    1.0 / 50.0
}

fn default_estimators() -> Vec<EstimatorKind> {
    EstimatorKind::ALL.to_vec()
}

/// Description of one simulation study; mirrors the JSON config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub pair: FamilyPair,
    pub n: usize,
    pub reps: usize,
    #[serde(default = "default_k_grid")]
    pub k_grid: Vec<usize>,
    #[serde(default = "default_eps")]
    pub eps: f64,
    pub seed: u64,
    #[serde(default = "default_estimators")]
    pub estimators: Vec<EstimatorKind>,
    #[serde(default)]
    pub p_policy: PPolicy,
}

fn config_error(pointer: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Config { pointer: pointer.into(), message: message.into() }
}

impl SimConfig {
    /// Study of the given pair with 100 replicates of size 500, the default
    /// grid `k = 5, 10, …, 475`, `ε = 1/50` and all four estimators.
    pub fn standard_study(pair: FamilyPair, seed: u64) -> Self {
        Self {
            pair,
            n: 500,
            reps: 100,
            k_grid: default_k_grid(),
            eps: default_eps(),
            seed,
            estimators: default_estimators(),
            p_policy: PPolicy::PerK,
        }
    }

    /// Parses and validates a JSON config. Errors carry a JSON pointer to
    /// the offending field.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let config: SimConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let pointer = if path == "." {
                String::new()
            } else {
                format!("/{}", path.replace('.', "/"))
            };
            config_error(pointer, e.into_inner().to_string())
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.pair.f.validate().map_err(|e| config_error("/pair/f", e.to_string()))?;
        self.pair.g.validate().map_err(|e| config_error("/pair/g", e.to_string()))?;
        self.pair.truth_values().map_err(|e| config_error("/pair", e.to_string()))?;
        if self.reps == 0 {
            return Err(config_error("/reps", "must be at least 1"));
        }
        if self.n < 3 {
            return Err(config_error("/n", "must be at least 3"));
        }
        if self.k_grid.is_empty() {
            return Err(config_error("/k_grid", "must not be empty"));
        }
        for (i, &k) in self.k_grid.iter().enumerate() {
            if k < 1 || k > self.n - 2 {
                return Err(config_error(
                    format!("/k_grid/{i}"),
                    format!("k = {k} outside [1, n - 2] = [1, {}]", self.n - 2),
                ));
            }
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(config_error("/eps", format!("{} outside (0, 1)", self.eps)));
        }
        if self.estimators.is_empty() {
            return Err(config_error("/estimators", "must not be empty"));
        }
        if let PPolicy::Fixed(p) = self.p_policy {
            if !(p > 0.0 && p <= 1.0) {
                return Err(config_error("/p_policy/fixed", format!("{p} outside (0, 1]")));
            }
        }
        Ok(())
    }
}

/// `(1/m) Σ (vᵢ − truth)²`.
pub fn mse(values: &[f64], truth: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptySample);
    }
    Ok(values.iter().map(|v| (v - truth).powi(2)).sum::<f64>() / values.len() as f64)
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len();
    if m % 2 == 1 {
        v[m / 2]
    } else {
        0.5 * (v[m / 2 - 1] + v[m / 2])
    }
}

/// Summary of one `(estimator, k)` cell across replicates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellSummary {
    pub kind: EstimatorKind,
    pub k: usize,
    /// Successful replicates.
    pub count: usize,
    pub median: f64,
    pub mean: f64,
    pub mse: f64,
    /// `(1/m) Σ (vᵢ − mean)²`, so that `mse = (mean − truth)² + variance`.
    pub variance: f64,
    /// Failed replicates by cause tag.
    pub failures: BTreeMap<String, usize>,
    /// Successful estimates in replicate order.
    #[serde(skip)]
    pub values: Vec<f64>,
}

impl CellSummary {
    fn from_outcomes(kind: EstimatorKind, k: usize, outcomes: Vec<Outcome>, truth: f64) -> Self {
        let mut values = Vec::with_capacity(outcomes.len());
        let mut failures = BTreeMap::new();
        for o in outcomes {
            match o {
                Ok(v) if v.is_finite() => values.push(v),
                Ok(_) => *failures.entry("non_finite".to_string()).or_insert(0) += 1,
                Err(tag) => *failures.entry(tag.to_string()).or_insert(0) += 1,
            }
        }
        let (median, mean, mse, variance) = if values.is_empty() {
            (f64::NAN, f64::NAN, f64::NAN, f64::NAN)
        } else {
            let m = mean(&values);
            let var = values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / values.len() as f64;
            (median(&values), m, mse(&values, truth).expect("nonempty"), var)
        };
        Self { kind, k, count: values.len(), median, mean, mse, variance, failures, values }
    }

    pub fn failure_count(&self) -> usize {
        self.failures.values().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimMetadata {
    pub generator: &'static str,
    pub version: &'static str,
}

impl Default for SimMetadata {
    fn default() -> Self {
        Self { generator: GENERATOR_ID, version: env!("CARGO_PKG_VERSION") }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimSummary {
    pub config: SimConfig,
    pub truth: TruthValues,
    /// `F⁻¹(1 − ε)` of the lifetime law.
    pub true_quantile: f64,
    /// Index cells, ordered by estimator then `k` as in the config.
    pub index: Vec<CellSummary>,
    /// Quantile cells (Hill excluded), same ordering.
    pub quantile: Vec<CellSummary>,
    pub metadata: SimMetadata,
}

impl SimSummary {
    pub fn index_cell(&self, kind: EstimatorKind, k: usize) -> Option<&CellSummary> {
        self.index.iter().find(|c| c.kind == kind && c.k == k)
    }

    pub fn quantile_cell(&self, kind: EstimatorKind, k: usize) -> Option<&CellSummary> {
        self.quantile.iter().find(|c| c.kind == kind && c.k == k)
    }

    /// Writes `estimator,k,median,mean,mse,failures` rows for the index cells.
    pub fn write_index_csv<W: Write>(&self, out: W) -> Result<()> {
        write_cells(out, &self.index)
    }

    pub fn write_quantile_csv<W: Write>(&self, out: W) -> Result<()> {
        write_cells(out, &self.quantile)
    }

    /// Config echo, truth, generator id, version and itemized failures.
    pub fn metadata_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct FailureRow<'a> {
            target: &'static str,
            estimator: EstimatorKind,
            k: usize,
            causes: &'a BTreeMap<String, usize>,
        }
        #[derive(Serialize)]
        struct Sidecar<'a> {
            config: &'a SimConfig,
            truth: &'a TruthValues,
            true_quantile: f64,
            generator: &'static str,
            version: &'static str,
            failures: Vec<FailureRow<'a>>,
        }
        let failures = [("index", &self.index), ("quantile", &self.quantile)]
            .into_iter()
            .flat_map(|(target, cells)| {
                cells.iter().filter(|c| !c.failures.is_empty()).map(move |c| FailureRow {
                    target,
                    estimator: c.kind,
                    k: c.k,
                    causes: &c.failures,
                })
            })
            .collect();
        let sidecar = Sidecar {
            config: &self.config,
            truth: &self.truth,
            true_quantile: self.true_quantile,
            generator: self.metadata.generator,
            version: self.metadata.version,
            failures,
        };
        let mut s = serde_json::to_string_pretty(&sidecar)?;
        s.push('\n');
        Ok(s)
    }

    /// Writes `summary.csv`, `quantile_summary.csv` and `metadata.json`
    /// into `dir`, creating it if needed.
    pub fn write_files(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        self.write_index_csv(std::fs::File::create(dir.join("summary.csv"))?)?;
        self.write_quantile_csv(std::fs::File::create(dir.join("quantile_summary.csv"))?)?;
        std::fs::write(dir.join("metadata.json"), self.metadata_json()?)?;
        Ok(())
    }
}

fn write_cells<W: Write>(out: W, cells: &[CellSummary]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(["estimator", "k", "median", "mean", "mse", "failures"])?;
    for c in cells {
        w.write_record([
            c.kind.label().to_string(),
            c.k.to_string(),
            c.median.to_string(),
            c.mean.to_string(),
            c.mse.to_string(),
            c.failure_count().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// A replicate's estimate, or the cause tag of its failure.
type Outcome = std::result::Result<f64, &'static str>;

fn tagged(r: Result<f64>) -> Outcome {
    r.map_err(|e| e.cause_tag())
}

/// Index and (for non-Hill kinds) quantile outcomes at one `(kind, k)`.
fn evaluate_cell(
    sorted: &SortedCensoredSample,
    kind: EstimatorKind,
    k: usize,
    eps: f64,
    policy: PPolicy,
) -> (Outcome, Option<Outcome>) {
    match kind {
        EstimatorKind::Hill => (tagged(adapted_index(sorted, kind, k, policy)), None),
        EstimatorKind::ML => {
            // one GPD fit serves both targets
            let fit_and_p = ml_estimator(sorted, k).and_then(|fit| Ok((fit, policy.p_hat(sorted, k)?)));
            match fit_and_p {
                Ok((fit, p)) => (
                    tagged(adapt_to_censoring(fit.gamma, p)),
                    Some(tagged(extreme_quantile_ml_fit(sorted, k, eps, &fit, p).map(|q| q.value))),
                ),
                Err(e) => (Err(e.cause_tag()), Some(Err(e.cause_tag()))),
            }
        }
        _ => (
            tagged(adapted_index(sorted, kind, k, policy)),
            Some(tagged(extreme_quantile(sorted, k, eps, kind, policy).map(|q| q.value))),
        ),
    }
}

/// Runs the study: for every replicate, kind and `k`, the adapted index and
/// the adapted `ε` quantile. Estimator failures are tallied per cell.
pub fn run_study(config: &SimConfig) -> Result<SimSummary> {
    config.validate()?;
    let truth = config.pair.truth_values()?;
    let true_quantile = config.pair.f.quantile(1.0 - config.eps)?;

    let cells: Vec<(EstimatorKind, usize)> = config
        .estimators
        .iter()
        .flat_map(|&kind| config.k_grid.iter().map(move |&k| (kind, k)))
        .collect();

    let per_replicate: Vec<Vec<(Outcome, Option<Outcome>)>> = (0..config.reps as u64)
        .into_par_iter()
        .map(|r| {
            let rng = CounterRng::for_replicate(config.seed, r);
            let sorted = config.pair.sample_with(config.n, rng).sorted();
            cells
                .iter()
                .map(|&(kind, k)| evaluate_cell(&sorted, kind, k, config.eps, config.p_policy))
                .collect()
        })
        .collect();

    let mut index_outcomes: Vec<Vec<Outcome>> = vec![Vec::with_capacity(config.reps); cells.len()];
    let mut quantile_outcomes: Vec<Vec<Outcome>> = vec![Vec::with_capacity(config.reps); cells.len()];
    for replicate in per_replicate {
        for (c, (idx, q)) in replicate.into_iter().enumerate() {
            index_outcomes[c].push(idx);
            if let Some(q) = q {
                quantile_outcomes[c].push(q);
            }
        }
    }

    let mut index = Vec::with_capacity(cells.len());
    let mut quantile = Vec::new();
    for ((&(kind, k), idx), q) in cells.iter().zip(index_outcomes).zip(quantile_outcomes) {
        index.push(CellSummary::from_outcomes(kind, k, idx, truth.gamma1));
        if kind != EstimatorKind::Hill {
            quantile.push(CellSummary::from_outcomes(kind, k, q, true_quantile));
        }
    }

    Ok(SimSummary {
        config: config.clone(),
        truth,
        true_quantile,
        index,
        quantile,
        metadata: SimMetadata::default(),
    })
}

/// How the normality experiment picks `k` from `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KRule {
    Fixed(usize),
    /// `k = ⌊n^a⌋`
    Power(f64),
}

impl KRule {
    pub fn k_for(self, n: usize) -> Result<usize> {
        let k = match self {
            KRule::Fixed(k) => k,
            KRule::Power(a) if a > 0.0 && a < 1.0 => (n as f64).powf(a).floor() as usize,
            KRule::Power(a) => {
                return Err(Error::InvalidParameter(format!("exponent {a} outside (0, 1)")))
            }
        };
        if k < 1 || k + 2 > n {
            return Err(Error::KOutOfRange { k, min: 1, max: n.saturating_sub(2) });
        }
        Ok(k)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalityReport {
    pub kind: EstimatorKind,
    pub n: usize,
    pub k: usize,
    pub k_rule: KRule,
    /// `√k(γ̂^(c,·) − γ₁)` for each successful replicate, in replicate order.
    pub values: Vec<f64>,
    pub failures: BTreeMap<String, usize>,
    pub mean: Option<f64>,
    /// Sample variance with denominator `m − 1`.
    pub variance: Option<f64>,
    /// Asymptotic variance of the adapted estimator.
    pub theory_variance: Option<f64>,
    /// Leading-order mean implied by the bias expansion of the pair.
    pub theory_mean: Option<f64>,
    /// Kolmogorov–Smirnov distance to the normal law with the sample mean
    /// and variance.
    pub ks_distance: Option<f64>,
}

/// Sup-distance between the empirical distribution of `values` and
/// `N(mean, variance)`.
pub fn ks_distance_normal(values: &[f64], mean: f64, variance: f64) -> Option<f64> {
    if values.is_empty() || !(variance > 0.0) {
        return None;
    }
    let sd = variance.sqrt();
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() as f64;
    let d = v.iter().enumerate().fold(0.0_f64, |d, (i, &x)| {
        let f = normal_cdf((x - mean) / sd);
        d.max(f - i as f64 / m).max((i + 1) as f64 / m - f)
    });
    Some(d)
}

/// Replicates `√k(γ̂^(c,·) − γ₁)` at a single `k` and compares the spread
/// with the asymptotic normal law.
pub fn normality_experiment(config: &SimConfig, kind: EstimatorKind, k_rule: KRule) -> Result<NormalityReport> {
    config.validate()?;
    let n = config.n;
    let k = k_rule.k_for(n)?;
    let truth = config.pair.truth_values()?;
    let sk = (k as f64).sqrt();

    let outcomes: Vec<Result<f64>> = (0..config.reps as u64)
        .into_par_iter()
        .map(|r| {
            let sorted = config.pair.sample_with(n, CounterRng::for_replicate(config.seed, r)).sorted();
            adapted_index(&sorted, kind, k, config.p_policy)
        })
        .collect();

    let mut values = Vec::with_capacity(outcomes.len());
    let mut failures = BTreeMap::new();
    for o in outcomes {
        match o {
            Ok(g) if g.is_finite() => values.push(sk * (g - truth.gamma1)),
            Ok(_) => *failures.entry("non_finite".to_string()).or_insert(0) += 1,
            Err(e) => *failures.entry(e.cause_tag().to_string()).or_insert(0) += 1,
        }
    }

    let m = values.len();
    let mean_v = (m > 0).then(|| mean(&values));
    let variance = (m > 1).then(|| {
        let mu = mean_v.unwrap();
        values.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / (m - 1) as f64
    });
    let ks = match (mean_v, variance) {
        (Some(mu), Some(var)) => ks_distance_normal(&values, mu, var),
        _ => None,
    };
    let theory_variance = variance_censored(kind, truth.case, truth.gamma1, truth.gamma, truth.p).ok();
    let theory_mean = theoretical_bias_example(&config.pair, kind, n, k)
        .ok()
        .filter(|b| !b.alpha2_caveat)
        .map(|b| b.adapted_mean(&truth));

    Ok(NormalityReport {
        kind,
        n,
        k,
        k_rule,
        values,
        failures,
        mean: mean_v,
        variance,
        theory_variance,
        theory_mean,
        ks_distance: ks,
    })
}
