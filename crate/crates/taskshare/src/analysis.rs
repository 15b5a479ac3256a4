//! Smoothing, trend regression, and ranking of task-share series.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::shares::{SeriesKey, SeriesSet};

/// Time axis scaling for the trend regression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrendTimeScale {
    /// Time rescaled to [0, 1]; the slope reads as total change over the window.
    #[default]
    Unit,
    /// Time in raw month indices 0..n-1; the slope is change per month.
    Month,
}

/// OLS fit of a series against its time axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrendCoefficient {
    pub slope: f64,
    pub intercept: f64,
    pub n_points: usize,
}

/// Centered moving average with truncated edges.
///
/// For odd `window` the value at `t` averages `t - (w-1)/2 ..= t + (w-1)/2`;
/// near the edges only the in-range points are averaged, so the output has
/// the same length and alignment as the input.
pub fn moving_average(series: &[f64], window: usize) -> Result<Vec<f64>> {
    if window < 1 || window > series.len() {
        return Err(Error::InvalidSmoothingWindow {
            window,
            len: series.len(),
        });
    }
    let half_back = (window - 1) / 2;
    let half_fwd = window / 2;
    let out = (0..series.len())
        .map(|t| {
            let lo = t.saturating_sub(half_back);
            let hi = (t + half_fwd).min(series.len() - 1);
            let slice = &series[lo..=hi];
            slice.iter().sum::<f64>() / slice.len() as f64
        })
        .collect();
    Ok(out)
}

/// Ordinary least squares of a series against time.
///
/// With [`TrendTimeScale::Unit`] the regressor is `t / (n-1)`, so the slope
/// is the fitted total change across the window.
pub fn trend_coefficient(series: &[f64], scale: TrendTimeScale) -> Result<TrendCoefficient> {
    let n = series.len();
    if n < 2 {
        return Err(Error::DegenerateSeries);
    }
    let xs: Vec<f64> = match scale {
        TrendTimeScale::Unit => (0..n).map(|t| t as f64 / (n - 1) as f64).collect(),
        TrendTimeScale::Month => (0..n).map(|t| t as f64).collect(),
    };
    let x_mean = xs.iter().sum::<f64>() / n as f64;
    let y_mean = series.iter().sum::<f64>() / n as f64;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (x, y) in xs.iter().zip(series) {
        sxy += (x - x_mean) * (y - y_mean);
        sxx += (x - x_mean) * (x - x_mean);
    }
    let slope = sxy / sxx;
    Ok(TrendCoefficient {
        slope,
        intercept: y_mean - slope * x_mean,
        n_points: n,
    })
}

/// Statistic used by [`rank_series`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankBy {
    MeanLevel,
    Slope,
}

/// Top-k series keys by the chosen statistic, descending, ties by key order.
pub fn rank_series(set: &SeriesSet, by: RankBy, k: usize) -> Result<Vec<SeriesKey>> {
    if k == 0 {
        return Err(Error::InvalidRankK);
    }
    if set.is_empty() {
        return Err(Error::EmptyInput("series set".into()));
    }
    let mut scored: Vec<(f64, &SeriesKey)> = Vec::with_capacity(set.len());
    for (key, values) in set {
        let stat = match by {
            RankBy::MeanLevel => values.iter().sum::<f64>() / values.len() as f64,
            RankBy::Slope => trend_coefficient(values, TrendTimeScale::Unit)?.slope,
        };
        scored.push((stat, key));
    }
    // Descending by statistic; BTreeMap order already sorted keys, and the
    // stable sort keeps that order within ties.
    scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    Ok(scored
        .into_iter()
        .take(k)
        .map(|(_, key)| key.clone())
        .collect())
}
