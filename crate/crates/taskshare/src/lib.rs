//! Monthly task-share time series from online job postings.
//!
//! The pipeline turns raw posting records and annual occupational statistics
//! into monthly task-share series, aggregates them by task cluster family,
//! occupation family and wage tercile, and fits ARIMA models for one-step
//! ahead forecasting with 95% confidence intervals and MAPE evaluation.
//!
//! Stages:
//! 1. [`taxonomy`] — parse the task/occupation hierarchies, assign wage terciles.
//! 2. [`ingest`] — stream postings into a sparse [`ingest::CountsCube`] and
//!    interpolate annual wage/employment statistics to monthly values.
//! 3. [`shares`] — occupation-task shares, employment shares, task-shares and
//!    the two aggregations.
//! 4. [`analysis`] — moving-average smoothing, trend regression, ranking.
//! 5. [`forecast`] — ARIMA fitting, rolling one-step prediction, MAPE.
//!
//! The `taskshare` binary exposes the stages as subcommands; see [`pipeline`].

pub mod analysis;
pub mod config;
pub mod error;
pub mod forecast;
pub mod ingest;
pub mod io;
pub mod pipeline;
pub mod shares;
pub mod taxonomy;
pub mod time;

pub use error::{Error, Result};
