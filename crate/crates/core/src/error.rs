use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong while ingesting data, estimating or simulating.
#[derive(Debug, Error)]
pub enum Error {
    #[error("row {row}: {reason}")]
    InvalidRecord { row: usize, reason: String },

    #[error("sample is empty")]
    EmptySample,

    #[error("k = {k} outside the admissible range [{min}, {max}]")]
    KOutOfRange { k: usize, min: usize, max: usize },

    #[error("threshold {value} is not positive, logarithm undefined")]
    NonPositiveThreshold { value: f64 },

    #[error("degenerate tail: all log-excesses are equal (M2 = M1^2)")]
    DegenerateTail,

    #[error("generalized quantile plot value UH_{index} is not positive")]
    NonPositiveUh { index: usize },

    #[error("need at least 2 distinct exceedances, got {distinct}")]
    TooFewExceedances { distinct: usize },

    #[error("no uncensored observations among top k")]
    NoUncensored,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("the Hill estimator is excluded from extreme quantile estimation (valid in case 1 only)")]
    HillQuantile,

    #[error("Kaplan-Meier survival at the threshold is zero")]
    ZeroSurvival,

    #[error(
        "(gamma1 = {gamma1}, gamma2 = {gamma2}) is outside the three supported cases \
         (both positive; both negative with equal endpoints; both zero)"
    )]
    OutsideCases { gamma1: f64, gamma2: f64 },

    #[error("unsupported combination: {0}")]
    Unsupported(String),

    #[error("missing required input: {0}")]
    MissingInput(&'static str),

    #[error("no feasible k in [{k_min}, {k_max}]")]
    EmptyRange { k_min: usize, k_max: usize },

    #[error("config error at {pointer}: {message}")]
    Config { pointer: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short stable tag used when failures are tallied by cause.
    pub fn cause_tag(&self) -> &'static str {
        match self {
            Error::InvalidRecord { .. } => "invalid_record",
            Error::EmptySample => "empty_sample",
            Error::KOutOfRange { .. } => "k_out_of_range",
            Error::NonPositiveThreshold { .. } => "nonpositive_threshold",
            Error::DegenerateTail => "degenerate_tail",
            Error::NonPositiveUh { .. } => "nonpositive_uh",
            Error::TooFewExceedances { .. } => "too_few_exceedances",
            Error::NoUncensored => "no_uncensored",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::HillQuantile => "hill_quantile",
            Error::ZeroSurvival => "zero_survival",
            Error::OutsideCases { .. } => "outside_cases",
            Error::Unsupported(_) => "unsupported",
            Error::MissingInput(_) => "missing_input",
            Error::EmptyRange { .. } => "empty_range",
            Error::Config { .. } => "config",
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
            Error::Json(_) => "json",
        }
    }

    /// True for errors caused by the filesystem rather than by the data.
    pub fn is_io(&self) -> bool {
        match self {
            Error::Io(_) => true,
            Error::Csv(e) => e.is_io_error(),
            _ => false,
        }
    }
}
