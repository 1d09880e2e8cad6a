//! Censored observations, their order statistics, the uncensored fraction
//! among the largest observations, and the Kaplan–Meier estimator.
//!
//! An observation is a pair `(z, δ)` with `z = min(X, Y)` the observed time
//! and `δ = 1{X ≤ Y}`; `δ = 0` marks a right-censored lifetime.
//!
//! Order statistics follow the usual convention `Z_{1,n} ≤ … ≤ Z_{n,n}`.
//! Tied times are ordered with censored observations first, so that events
//! at a time `t` act on a risk set that still contains the observations
//! censored at `t`.

use std::cmp::Ordering;
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CensoredObservation {
    /// Observed time, in the units of the input data.
    pub z: f64,
    /// `true` when the event was observed, `false` when right-censored.
    pub delta: bool,
}

/// A validated sample in input order.
#[derive(Debug, Clone, PartialEq)]
pub struct CensoredSample {
    observations: Vec<CensoredObservation>,
}

impl CensoredSample {
    /// Validates `(time, indicator)` rows. Errors name the zero-based row index.
    pub fn from_records<I>(rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, u8)>,
    {
        let mut observations = Vec::new();
        for (row, (z, ind)) in rows.into_iter().enumerate() {
            if !z.is_finite() {
                return Err(Error::InvalidRecord {
                    row,
                    reason: format!("time {z} is not finite"),
                });
            }
            let delta = match ind {
                0 => false,
                1 => true,
                other => {
                    return Err(Error::InvalidRecord {
                        row,
                        reason: format!("indicator {other} is not 0 or 1"),
                    })
                }
            };
            observations.push(CensoredObservation { z, delta });
        }
        if observations.is_empty() {
            return Err(Error::EmptySample);
        }
        Ok(Self { observations })
    }

    pub fn from_observations(observations: Vec<CensoredObservation>) -> Result<Self> {
        Self::from_records(observations.iter().map(|o| (o.z, o.delta as u8)))
    }

    /// Reads a `z,delta` CSV with a header line. Errors report the 1-based
    /// line number in the file.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(reader);

        let headers = rdr.headers()?.clone();
        let z_col = headers.iter().position(|h| h == "z");
        let d_col = headers.iter().position(|h| h == "delta");
        let (z_col, d_col) = match (z_col, d_col) {
            (Some(z), Some(d)) => (z, d),
            _ => {
                return Err(Error::InvalidRecord {
                    row: 1,
                    reason: "header must contain columns `z` and `delta`".into(),
                })
            }
        };

        let mut rows = Vec::new();
        for record in rdr.records() {
            let record = record?;
            let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
            let field = |col: usize, name: &str| -> Result<&str> {
                match record.get(col) {
                    Some(s) if !s.is_empty() => Ok(s),
                    _ => Err(Error::InvalidRecord {
                        row: line,
                        reason: format!("missing field `{name}`"),
                    }),
                }
            };
            let z_txt = field(z_col, "z")?;
            let d_txt = field(d_col, "delta")?;
            let z: f64 = z_txt.parse().map_err(|_| Error::InvalidRecord {
                row: line,
                reason: format!("cannot parse time `{z_txt}`"),
            })?;
            if !z.is_finite() {
                return Err(Error::InvalidRecord {
                    row: line,
                    reason: format!("time {z} is not finite"),
                });
            }
            let d = match d_txt {
                "0" => 0,
                "1" => 1,
                _ => {
                    return Err(Error::InvalidRecord {
                        row: line,
                        reason: format!("indicator `{d_txt}` is not 0 or 1"),
                    })
                }
            };
            rows.push((z, d));
        }
        Self::from_records(rows)
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn observations(&self) -> &[CensoredObservation] {
        &self.observations
    }

    /// Returns a copy with every time multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        self.mapped(|z| c * z)
    }

    /// Returns a copy with `f` applied to every time.
    pub fn mapped(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            observations: self
                .observations
                .iter()
                .map(|o| CensoredObservation { z: f(o.z), delta: o.delta })
                .collect(),
        }
    }

    pub fn sorted(&self) -> SortedCensoredSample {
        sort_sample(self)
    }
}

/// Order statistics `Z_{1,n} ≤ … ≤ Z_{n,n}` with induced indicators `δ_{[i,n]}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SortedCensoredSample {
    z: Vec<f64>,
    delta: Vec<bool>,
}

pub fn sort_sample(sample: &CensoredSample) -> SortedCensoredSample {
    let mut idx: Vec<usize> = (0..sample.len()).collect();
    let obs = sample.observations();
    // stable: remaining ties keep input order
    idx.sort_by(|&a, &b| {
        obs[a]
            .z
            .partial_cmp(&obs[b].z)
            .unwrap_or(Ordering::Equal)
            .then(obs[a].delta.cmp(&obs[b].delta))
    });
    SortedCensoredSample {
        z: idx.iter().map(|&i| obs[i].z).collect(),
        delta: idx.iter().map(|&i| obs[i].delta).collect(),
    }
}

impl SortedCensoredSample {
    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.z
    }

    pub fn indicators(&self) -> &[bool] {
        &self.delta
    }

    /// `Z_{i,n}`, 1-based.
    #[inline]
    pub fn order_stat(&self, i: usize) -> f64 {
        self.z[i - 1]
    }

    /// `Z_{n-k,n}`, the threshold used with the `k` largest observations.
    #[inline]
    pub fn threshold(&self, k: usize) -> f64 {
        self.z[self.len() - k - 1]
    }

    /// The `k` largest times, largest first: `Z_{n,n}, Z_{n-1,n}, …, Z_{n-k+1,n}`.
    pub fn top(&self, k: usize) -> impl Iterator<Item = f64> + '_ {
        self.z[self.len() - k..].iter().rev().copied()
    }

    pub(crate) fn check_k(&self, k: usize, min: usize, max_below_n: usize) -> Result<()> {
        let max = self.len().saturating_sub(max_below_n);
        if k < min || k > max {
            return Err(Error::KOutOfRange { k, min, max });
        }
        Ok(())
    }

    /// `p̂ = (1/k) Σ_{j=1..k} δ_{[n-j+1,n]}`, the uncensored fraction among
    /// the `k` largest observations.
    pub fn uncensored_proportion(&self, k: usize) -> Result<f64> {
        self.check_k(k, 1, 0)?;
        let events = self.delta[self.len() - k..].iter().filter(|&&d| d).count();
        Ok(events as f64 / k as f64)
    }

    /// Kaplan–Meier estimate `F̂ₙ` as a right-continuous step function.
    pub fn kaplan_meier(&self) -> StepFunction {
        let steps = product_limit(self);
        StepFunction {
            jump_points: steps.iter().map(|s| s.time).collect(),
            values: steps.iter().map(|s| s.distribution).collect(),
            initial_value: 0.0,
        }
    }

    /// `1 − F̂ₙ(Z_{n-k,n})`, for `1 ≤ k ≤ n − 1`.
    pub fn km_survival_at_threshold(&self, k: usize) -> Result<f64> {
        self.check_k(k, 1, 1)?;
        Ok(self.km_survival_at(self.threshold(k)))
    }

    /// `1 − F̂ₙ(t)` with right-continuous evaluation.
    pub fn km_survival_at(&self, t: f64) -> f64 {
        product_limit(self)
            .iter()
            .take_while(|s| s.time <= t)
            .last()
            .map_or(1.0, |s| s.survival)
    }
}

pub fn uncensored_proportion(sorted: &SortedCensoredSample, k: usize) -> Result<f64> {
    sorted.uncensored_proportion(k)
}

pub fn kaplan_meier(sorted: &SortedCensoredSample) -> StepFunction {
    sorted.kaplan_meier()
}

pub fn km_survival_at_threshold(sorted: &SortedCensoredSample, k: usize) -> Result<f64> {
    sorted.km_survival_at_threshold(k)
}

struct KmStep {
    time: f64,
    distribution: f64,
    survival: f64,
}

/// Product-limit recursion over distinct event times.
///
/// Between two censoring times the factors `(r − d)/r` telescope, so the
/// survival is carried as `anchor · remaining / anchor_risk` from the last
/// censoring on. Without censoring this gives `F̂ₙ = i/n` exactly.
fn product_limit(sorted: &SortedCensoredSample) -> Vec<KmStep> {
    let n = sorted.len();
    let z = sorted.times();
    let delta = sorted.indicators();

    let mut steps = Vec::new();
    let mut anchor_s = 1.0_f64;
    let mut anchor_risk = n;
    let mut events_in_segment = 0usize;
    let mut i = 0;
    while i < n {
        let t = z[i];
        let at_risk = n - i;
        let mut d = 0;
        let mut c = 0;
        while i < n && z[i] == t {
            if delta[i] {
                d += 1;
            } else {
                c += 1;
            }
            i += 1;
        }
        if d > 0 {
            events_in_segment += d;
            let frac_dead = events_in_segment as f64 / anchor_risk as f64;
            let frac_alive = (anchor_risk - events_in_segment) as f64 / anchor_risk as f64;
            steps.push(KmStep {
                time: t,
                distribution: (1.0 - anchor_s) + anchor_s * frac_dead,
                survival: anchor_s * frac_alive,
            });
        }
        if c > 0 {
            anchor_s = steps.last().map_or(1.0, |s| s.survival);
            anchor_risk = at_risk - d - c;
            events_in_segment = 0;
        }
    }
    steps
}

/// Right-continuous step function.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepFunction {
    pub jump_points: Vec<f64>,
    /// Value on `[jump_points[i], jump_points[i+1])`.
    pub values: Vec<f64>,
    pub initial_value: f64,
}

impl StepFunction {
    pub fn eval(&self, t: f64) -> f64 {
        let idx = self.jump_points.partition_point(|&p| p <= t);
        if idx == 0 {
            self.initial_value
        } else {
            self.values[idx - 1]
        }
    }
}
