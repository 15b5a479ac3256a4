//! Error types shared across the pipeline.

use thiserror::Error;

/// Errors returned by this crate.
#[derive(Debug, Error)]
pub enum Error {
    /// SOC code does not match the `NN-NNNN` shape.
    #[error("malformed SOC code '{0}': expected NN-NNNN with all digits")]
    MalformedSoc(String),
    /// SOC major group is not a recognized 2-digit occupation family.
    #[error("unknown SOC major group '{0}'")]
    UnknownMajorGroup(String),
    /// The same task row appears twice with conflicting cluster assignments.
    #[error("task '{task}' assigned to conflicting clusters '{first}' and '{second}'")]
    DuplicateConflict {
        task: String,
        first: String,
        second: String,
    },
    /// Header is missing a required column.
    #[error("missing column '{column}' in {what}")]
    MissingColumn { column: String, what: String },
    /// File had no data rows.
    #[error("empty input: {0}")]
    EmptyInput(String),
    /// Wage must be finite and positive.
    #[error("non-positive or non-finite wage {value} for {soc}")]
    InvalidWage { soc: String, value: f64 },
    /// Duplicate (soc, year) row in the annual statistics.
    #[error("duplicate key ({soc}, {year}) in annual statistics")]
    DuplicateKey { soc: String, year: i32 },
    /// Wage or employment below zero.
    #[error("negative {field} {value} for ({soc}, {year})")]
    NegativeValue {
        field: &'static str,
        soc: String,
        year: i32,
        value: f64,
    },
    /// Month outside the analysis window or otherwise unrepresentable.
    #[error("invalid month '{0}': expected YYYY-MM")]
    InvalidMonth(String),
    /// Window start is after end.
    #[error("invalid window: {start} after {end}")]
    InvalidWindow { start: String, end: String },
    /// Employment sums to zero for a month, so shares are undefined.
    #[error("zero total employment in month {0}")]
    ZeroTotalEmployment(String),
    /// A task or SOC in the share data has no taxonomy entry.
    #[error("unresolvable {kind} '{key}' in share data")]
    Unresolvable { kind: &'static str, key: String },
    /// Smoothing window outside [1, len].
    #[error("smoothing window {window} invalid for series of length {len}")]
    InvalidSmoothingWindow { window: usize, len: usize },
    /// Series too short for the requested operation.
    #[error("series too short: {len} points, need at least {min}")]
    SeriesTooShort { len: usize, min: usize },
    /// Degenerate regression input.
    #[error("degenerate series: need at least 2 points with distinct time indices")]
    DegenerateSeries,
    /// Ranking with k = 0.
    #[error("rank_series requires k > 0")]
    InvalidRankK,
    /// Optimizer did not converge within the iteration bound.
    #[error("ARIMA optimizer failed to converge within {0} iterations")]
    NonConvergence(usize),
    /// Fitted parameters violate stationarity or invertibility.
    #[error("fitted model rejected: {0}")]
    ModelRejected(&'static str),
    /// No candidate in the order grid produced a valid fit.
    #[error("no ARIMA candidate fitted successfully")]
    NoModelFound,
    /// Empty holdout in rolling forecast.
    #[error("holdout is empty: start {start} not before series end {len}")]
    EmptyHoldout { start: usize, len: usize },
    /// MAPE over an empty or all-zero-actual point set.
    #[error("no valid points for MAPE (all actuals zero or missing)")]
    NoValidPoints,
    /// Configuration value out of range or inconsistent.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    /// Aggregation mass-consistency check failed.
    #[error("mass consistency violated for family '{family}' month {month}: |{lhs} - {rhs}| > {tol}")]
    MassInconsistency {
        family: String,
        month: String,
        lhs: f64,
        rhs: f64,
        tol: f64,
    },
    /// A required input file does not exist.
    #[error("file not found: {0}")]
    FileNotFound(String),
    /// Upstream pipeline artifact missing from the output directory.
    #[error("missing artifact '{0}'; run the upstream subcommand first")]
    MissingArtifact(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("config parse error: {0}")]
    Toml(#[from] toml::de::Error),
}

impl Error {
    /// Whether this error stems from bad input (exit code 2) rather than an
    /// internal failure (exit code 1).
    pub fn is_input_error(&self) -> bool {
        !matches!(
            self,
            Error::NonConvergence(_) | Error::ModelRejected(_) | Error::MassInconsistency { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
