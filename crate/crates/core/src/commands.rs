//! Command-line surface: `prepare-survival`, `analyze`, `simulate`, `truth`.
//!
//! Every number written by `analyze` comes from a library call on the
//! parsed sample; the only arithmetic done here is the optional day→year
//! conversion of quantile values. CSV output is comma separated with LF
//! line endings and a header row.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::asymptotics::{confidence_interval, variance_censored, TailCase};
use crate::error::{Error, Result};
use crate::estimators::{adapt_to_censoring, estimate_index, k_limits, EstimatorKind, PPolicy};
use crate::families::{FamilyPair, TruthValues};
use crate::montecarlo::{run_study, SimConfig};
use crate::quantile::extreme_quantile;
use crate::sample::{CensoredSample, SortedCensoredSample};

pub const DAYS_PER_YEAR: f64 = 365.25;

/// Column names and filters for `prepare-survival`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrepareOptions {
    pub start_column: String,
    pub end_column: String,
    pub status_column: String,
    pub sex_column: String,
    /// Keep only rows whose sex column equals this value (case-insensitive).
    pub sex_filter: Option<String>,
    /// Keep zero durations instead of rejecting them.
    pub keep_zero: bool,
}

impl Default for PrepareOptions {
    fn default() -> Self {
        Self {
            start_column: "diag".into(),
            end_column: "death".into(),
            status_column: "status".into(),
            sex_column: "sex".into(),
            sex_filter: None,
            keep_zero: false,
        }
    }
}

/// A date as an ISO `YYYY-MM-DD` string or as an integer day number.
fn parse_day(field: &str) -> Option<i64> {
    let field = field.trim();
    if let Ok(d) = field.parse::<i64>() {
        return Some(d);
    }
    let date = NaiveDate::parse_from_str(field, "%Y-%m-%d").ok()?;
    Some(date.signed_duration_since(NaiveDate::MIN).num_days())
}

fn parse_status(field: &str) -> Option<u8> {
    match field.trim().to_ascii_lowercase().as_str() {
        "dead" | "d" | "death" | "1" => Some(1),
        "censored" | "alive" | "a" | "0" => Some(0),
        _ => None,
    }
}

/// Turns event records (start date, end date, status) into `(z, δ)` rows
/// with `z` the duration in days.
///
/// Rows are numbered by their line in the input, header included.
/// Negative durations are always rejected; zero durations unless
/// `keep_zero` is set.
pub fn prepare_survival<R: Read>(input: R, options: &PrepareOptions) -> Result<Vec<(i64, u8)>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = reader.headers()?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::InvalidRecord { row: 1, reason: format!("missing column `{name}`") })
    };
    let start = column(&options.start_column)?;
    let end = column(&options.end_column)?;
    let status = column(&options.status_column)?;
    let sex = match options.sex_filter {
        Some(_) => Some(column(&options.sex_column)?),
        None => None,
    };

    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        let row = record.position().map_or(0, |p| p.line() as usize);
        let get = |i: usize| record.get(i).unwrap_or("");
        if let (Some(i), Some(want)) = (sex, &options.sex_filter) {
            if !get(i).eq_ignore_ascii_case(want) {
                continue;
            }
        }
        let bad = |reason: String| Error::InvalidRecord { row, reason };
        let t0 = parse_day(get(start)).ok_or_else(|| bad(format!("unparseable date `{}`", get(start))))?;
        let t1 = parse_day(get(end)).ok_or_else(|| bad(format!("unparseable date `{}`", get(end))))?;
        let delta = parse_status(get(status))
            .ok_or_else(|| bad(format!("unknown status `{}`", get(status))))?;
        let z = t1 - t0;
        if z < 0 || (z == 0 && !options.keep_zero) {
            return Err(bad(format!("nonpositive duration {z} days")));
        }
        rows.push((z, delta));
    }
    Ok(rows)
}

pub fn write_survival_csv<W: Write>(out: W, rows: &[(i64, u8)]) -> Result<()> {
    let mut w = csv_writer(out);
    w.write_record(["z", "delta"])?;
    for (z, d) in rows {
        w.write_record([z.to_string(), d.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

fn csv_writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out)
}

fn cell(value: Result<f64>) -> String {
    value.map(|v| v.to_string()).unwrap_or_default()
}

/// Hypothesis under which confidence intervals are reported.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalSpec {
    pub case: TailCase,
    /// Hypothesized `γ₁`; the adapted estimate at each `k` when absent.
    pub gamma1: Option<f64>,
    pub level: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisRequest {
    pub kinds: Vec<EstimatorKind>,
    pub k_min: usize,
    /// Defaults to the largest feasible `k` of each estimator.
    pub k_max: Option<usize>,
    pub eps: Vec<f64>,
    pub p_policy: PPolicy,
    /// Divide quantile values by 365.25.
    pub years: bool,
    pub interval: Option<IntervalSpec>,
}

impl Default for AnalysisRequest {
    fn default() -> Self {
        Self {
            kinds: EstimatorKind::ALL.to_vec(),
            k_min: 1,
            k_max: None,
            eps: Vec::new(),
            p_policy: PPolicy::PerK,
            years: false,
            interval: None,
        }
    }
}

impl AnalysisRequest {
    fn validate(&self) -> Result<()> {
        if let Some(&eps) = self.eps.iter().find(|e| !(**e > 0.0 && **e < 1.0)) {
            return Err(Error::InvalidParameter(format!("eps = {eps} outside (0, 1)")));
        }
        if let Some(k_max) = self.k_max {
            if self.k_min > k_max || self.k_min == 0 {
                return Err(Error::EmptyRange { k_min: self.k_min, k_max });
            }
        }
        if let Some(spec) = self.interval {
            if !(0.0..1.0).contains(&spec.level) {
                return Err(Error::InvalidParameter(format!("level {} outside [0, 1)", spec.level)));
            }
        }
        Ok(())
    }

    /// `[k_min, k_max]` clipped to what `kind` supports on `n` observations.
    fn range(&self, kind: EstimatorKind, n: usize) -> Result<(usize, usize)> {
        let (lo, hi) = k_limits(kind, n).ok_or(Error::EmptyRange { k_min: self.k_min, k_max: 0 })?;
        let k_min = self.k_min.max(lo);
        let k_max = self.k_max.unwrap_or(hi).min(hi);
        if k_min > k_max {
            return Err(Error::EmptyRange { k_min, k_max });
        }
        Ok((k_min, k_max))
    }
}

/// One output file of `analyze`: name and CSV contents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputFile {
    pub name: String,
    pub contents: String,
}

fn render(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("CSV output is UTF-8"))
}

/// Adapted index with an optional confidence interval at one `k`.
fn gamma_row(sorted: &SortedCensoredSample, kind: EstimatorKind, k: usize, request: &AnalysisRequest) -> Vec<String> {
    let raw = estimate_index(sorted, kind, k).ok();
    let p_hat = request.p_policy.p_hat(sorted, k).ok();
    let adapted = raw.zip(p_hat).and_then(|(r, p)| adapt_to_censoring(r, p).ok());
    let text = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
    let mut row = vec![k.to_string(), text(raw), text(adapted)];
    if let Some(spec) = request.interval {
        let ci = adapted.zip(p_hat).and_then(|(g_hat, p)| {
            let (g1, g) = match spec.case {
                TailCase::Case3 => (0.0, 0.0),
                _ => {
                    let g1 = spec.gamma1.unwrap_or(g_hat);
                    (g1, p * g1)
                }
            };
            let variance = variance_censored(kind, spec.case, g1, g, p).ok()?;
            confidence_interval(g_hat, k, variance, spec.level).ok()
        });
        row.extend([text(ci.map(|c| c.0)), text(ci.map(|c| c.1))]);
    }
    row
}

/// Builds every `analyze` output for a parsed sample.
///
/// * `phat.csv`: `k,p_hat`
/// * `gamma_<kind>.csv`: `k,raw,adapted` plus `ci_lower,ci_upper` when an
///   interval hypothesis is given
/// * `quantile_<kind>_<eps>.csv`: `k,estimate` for moment, UH and ML
///
/// Cells where an estimator's preconditions fail are left empty.
pub fn analyze_sample(sorted: &SortedCensoredSample, request: &AnalysisRequest) -> Result<Vec<OutputFile>> {
    request.validate()?;
    let n = sorted.len();
    let mut files = Vec::new();

    let p_lo = request.k_min.max(1);
    let p_hi = request.k_max.unwrap_or(n.saturating_sub(1)).min(n.saturating_sub(1));
    if p_lo > p_hi {
        return Err(Error::EmptyRange { k_min: p_lo, k_max: p_hi });
    }
    let rows = (p_lo..=p_hi).map(|k| vec![k.to_string(), cell(sorted.uncensored_proportion(k))]);
    files.push(OutputFile { name: "phat.csv".into(), contents: render(&["k", "p_hat"], rows)? });

    for &kind in &request.kinds {
        let (k_min, k_max) = request.range(kind, n)?;
        let header: &[&str] = if request.interval.is_some() {
            &["k", "raw", "adapted", "ci_lower", "ci_upper"]
        } else {
            &["k", "raw", "adapted"]
        };
        let rows = (k_min..=k_max).map(|k| gamma_row(sorted, kind, k, request));
        files.push(OutputFile { name: format!("gamma_{}.csv", kind.label()), contents: render(header, rows)? });

        if kind == EstimatorKind::Hill {
            continue;
        }
        for &eps in &request.eps {
            let rows = (k_min..=k_max).map(|k| {
                let q = extreme_quantile(sorted, k, eps, kind, request.p_policy).map(|q| {
                    if request.years {
                        q.value / DAYS_PER_YEAR
                    } else {
                        q.value
                    }
                });
                vec![k.to_string(), cell(q)]
            });
            files.push(OutputFile {
                name: format!("quantile_{}_{}.csv", kind.label(), eps),
                contents: render(&["k", "estimate"], rows)?,
            });
        }
    }
    Ok(files)
}

fn write_outputs(dir: &Path, files: &[OutputFile]) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for f in files {
        std::fs::write(dir.join(&f.name), &f.contents)?;
    }
    Ok(())
}

/// Truth values of a pair with the asymptotic variance of each adapted
/// estimator (`None` where the theory does not cover it).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruthReport {
    #[serde(flatten)]
    pub truth: TruthValues,
    pub variances: BTreeMap<&'static str, Option<f64>>,
}

pub fn truth_report(pair: &FamilyPair) -> Result<TruthReport> {
    let truth = pair.truth_values()?;
    let variances = EstimatorKind::ALL
        .iter()
        .map(|&k| (k.label(), variance_censored(k, truth.case, truth.gamma1, truth.gamma, truth.p).ok()))
        .collect();
    Ok(TruthReport { truth, variances })
}

// ---------------------------------------------------------------------------
// clap layer

#[derive(Debug, Parser)]
#[command(name = "censored-evt", version, about = "Tail index and extreme quantile estimation for right-censored data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Convert event records into a `z,delta` CSV of durations in days.
    ///
    /// Dates are ISO `YYYY-MM-DD` or integer day numbers. Status `dead`/`d`
    /// gives delta = 1 and `censored`/`alive`/`a` gives delta = 0. Rows with a
    /// negative duration are rejected; zero durations too unless
    /// `--keep-zero` is passed.
    PrepareSurvival(PrepareArgs),
    /// Estimate p, the extreme value index and extreme quantiles over a k range.
    Analyze(AnalyzeArgs),
    /// Run a seeded simulation study described by a JSON config.
    Simulate(SimulateArgs),
    /// Print the exact parameters and asymptotic variances of a model pair.
    Truth(TruthArgs),
}

#[derive(Debug, Args)]
pub struct PrepareArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Output CSV; standard output when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, default_value = "diag")]
    pub start_column: String,
    #[arg(long, default_value = "death")]
    pub end_column: String,
    #[arg(long, default_value = "status")]
    pub status_column: String,
    #[arg(long, default_value = "sex")]
    pub sex_column: String,
    /// Keep only rows with this sex value.
    #[arg(long)]
    pub sex: Option<String>,
    #[arg(long)]
    pub keep_zero: bool,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// CSV with columns `z,delta`.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub k_min: usize,
    #[arg(long)]
    pub k_max: Option<usize>,
    /// Exceedance probability of a quantile file; repeatable.
    #[arg(long)]
    pub eps: Vec<f64>,
    /// Use this value for p instead of the per-k estimate.
    #[arg(long)]
    pub fix_p: Option<f64>,
    #[arg(long, value_delimiter = ',', default_value = "hill,moment,uh,ml")]
    pub estimators: Vec<EstimatorKind>,
    /// Report quantiles in years (days / 365.25).
    #[arg(long)]
    pub years: bool,
    /// Tail case (1, 2 or 3) asserted for confidence intervals.
    #[arg(long)]
    pub case: Option<u8>,
    /// Hypothesized gamma1 for the interval variance.
    #[arg(long, requires = "case")]
    pub gamma1_hyp: Option<f64>,
    #[arg(long, default_value_t = 0.95, requires = "case")]
    pub level: f64,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// JSON study config.
    #[arg(long, alias = "input")]
    pub config: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Override the seed in the config.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct TruthArgs {
    /// JSON file with a model pair `{"f": {...}, "g": {...}}`.
    #[arg(long, alias = "input", conflicts_with = "example")]
    pub pair: Option<PathBuf>,
    /// Built-in pair: burr, reverse-burr or logistic.
    #[arg(long)]
    pub example: Option<String>,
}

fn read_to_string(path: &Path) -> Result<String> {
    Ok(std::fs::read_to_string(path)?)
}

pub fn run(cli: Cli, stdout: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::PrepareSurvival(a) => {
            let options = PrepareOptions {
                start_column: a.start_column,
                end_column: a.end_column,
                status_column: a.status_column,
                sex_column: a.sex_column,
                sex_filter: a.sex,
                keep_zero: a.keep_zero,
            };
            let rows = prepare_survival(std::fs::File::open(&a.input)?, &options)?;
            match a.output {
                Some(path) => write_survival_csv(std::fs::File::create(path)?, &rows)?,
                None => write_survival_csv(&mut *stdout, &rows)?,
            }
        }
        Command::Analyze(a) => {
            let sample = CensoredSample::from_csv_reader(std::fs::File::open(&a.input)?)?;
            let interval = match a.case {
                Some(c) => Some(IntervalSpec { case: TailCase::from_number(c)?, gamma1: a.gamma1_hyp, level: a.level }),
                None => None,
            };
            let request = AnalysisRequest {
                kinds: a.estimators,
                k_min: a.k_min,
                k_max: a.k_max,
                eps: a.eps,
                p_policy: a.fix_p.map_or(PPolicy::PerK, PPolicy::Fixed),
                years: a.years,
                interval,
            };
            let files = analyze_sample(&sample.sorted(), &request)?;
            write_outputs(&a.out_dir, &files)?;
        }
        Command::Simulate(a) => {
            let mut config = SimConfig::from_json(&read_to_string(&a.config)?)?;
            if let Some(seed) = a.seed {
                config.seed = seed;
            }
            run_study(&config)?.write_files(&a.out_dir)?;
        }
        Command::Truth(a) => {
            let pair = match (a.pair, a.example.as_deref()) {
                (Some(path), _) => serde_json::from_str(&read_to_string(&path)?)?,
                (None, Some("burr")) => FamilyPair::example_burr(),
                (None, Some("reverse-burr")) => FamilyPair::example_reverse_burr(),
                (None, Some("logistic")) => FamilyPair::example_logistic(),
                (None, Some(other)) => {
                    return Err(Error::InvalidParameter(format!("unknown example `{other}`")))
                }
                (None, None) => return Err(Error::MissingInput("--pair or --example")),
            };
            let report = truth_report(&pair)?;
            serde_json::to_writer_pretty(&mut *stdout, &report)?;
            writeln!(stdout)?;
        }
    }
    Ok(())
}

/// Exit status for an error: 2 for I/O failures, 1 otherwise.
pub fn exit_code(error: &Error) -> i32 {
    if error.is_io() {
        2
    } else {
        1
    }
}
