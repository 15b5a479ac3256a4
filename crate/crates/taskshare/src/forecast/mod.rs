//! ARIMA forecasting: model fitting, rolling one-step prediction with 95%
//! confidence intervals, and MAPE evaluation.

pub mod arima;
pub mod optim;
pub mod simulate;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::shares::{SeriesKey, SeriesSet};
use crate::time::{MonthIndex, MonthWindow};

pub use arima::{
    difference, difference_initials, fit_arima, integrate, one_step_mean, select_order,
    ArimaModel, ArimaOrder, Z_95,
};
pub use simulate::simulate_arima;

/// A one-step-ahead forecast for a single month.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForecastPoint {
    pub month: MonthIndex,
    pub mean: f64,
    pub lower95: f64,
    pub upper95: f64,
    pub actual: Option<f64>,
}

/// Roll one-step-ahead forecasts over the holdout.
///
/// For each month at or after `holdout_start` (an index into `series`,
/// aligned with `window`), the forecast conditions on all actual
/// observations before it with frozen parameters. The interval is
/// mean +- 1.96 sigma; the one-step forecast variance of an ARMA model is
/// the innovation variance.
pub fn rolling_one_step(
    series: &[f64],
    model: &ArimaModel,
    holdout_start: usize,
    window: MonthWindow,
) -> Result<Vec<ForecastPoint>> {
    if holdout_start >= series.len() {
        return Err(Error::EmptyHoldout {
            start: holdout_start,
            len: series.len(),
        });
    }
    let half_width = Z_95 * model.sigma2.sqrt();
    let mut points = Vec::with_capacity(series.len() - holdout_start);
    for t in holdout_start..series.len() {
        let mean = one_step_mean(model, &series[..t]);
        points.push(ForecastPoint {
            month: window.at(t),
            mean,
            lower95: mean - half_width,
            upper95: mean + half_width,
            actual: Some(series[t]),
        });
    }
    Ok(points)
}

/// MAPE outcome with the zero-actual exclusion tally.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapeSummary {
    /// 100 * mean(|actual - mean| / |actual|) over valid points.
    pub mape: f64,
    pub n_used: usize,
    /// Points dropped because the actual was zero or missing.
    pub n_excluded: usize,
}

/// Mean absolute percentage error over forecast points. Zero or missing
/// actuals are excluded and counted.
pub fn mape(points: &[ForecastPoint]) -> Result<MapeSummary> {
    let mut sum = 0.0;
    let mut used = 0usize;
    let mut excluded = 0usize;
    for point in points {
        match point.actual {
            Some(actual) if actual != 0.0 => {
                sum += ((actual - point.mean) / actual).abs();
                used += 1;
            }
            _ => excluded += 1,
        }
    }
    if used == 0 {
        return Err(Error::NoValidPoints);
    }
    Ok(MapeSummary {
        mape: 100.0 * sum / used as f64,
        n_used: used,
        n_excluded: excluded,
    })
}

/// One evaluation table row per forecast series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRow {
    pub key: SeriesKey,
    pub order: ArimaOrder,
    pub mape: f64,
    pub n_forecasts: usize,
    pub n_zero_excluded: usize,
}

/// Output of [`forecast_suite`].
#[derive(Debug, Clone, Default)]
pub struct SuiteResult {
    pub rows: Vec<EvaluationRow>,
    pub points: Vec<(SeriesKey, Vec<ForecastPoint>)>,
    /// Per-series failures; the suite keeps going past them.
    pub failures: Vec<(SeriesKey, String)>,
}

/// Fit, roll, and evaluate every series in the set.
///
/// Each series gets its order selected on the training slice (unless
/// overridden), is fitted on the first `train_months` points, and is then
/// forecast one step at a time over the remainder. Failures are collected,
/// not fatal. Results come back in key order.
pub fn forecast_suite(
    set: &SeriesSet,
    train_months: usize,
    order_override: Option<ArimaOrder>,
    grid: &[ArimaOrder],
    window: MonthWindow,
) -> SuiteResult {
    let mut result = SuiteResult::default();
    for (key, series) in set {
        match run_one(series, train_months, order_override, grid, window) {
            Ok((order, points, summary)) => {
                result.rows.push(EvaluationRow {
                    key: key.clone(),
                    order,
                    mape: summary.mape,
                    n_forecasts: summary.n_used,
                    n_zero_excluded: summary.n_excluded,
                });
                result.points.push((key.clone(), points));
            }
            Err(e) => result.failures.push((key.clone(), e.to_string())),
        }
    }
    result
}

fn run_one(
    series: &[f64],
    train_months: usize,
    order_override: Option<ArimaOrder>,
    grid: &[ArimaOrder],
    window: MonthWindow,
) -> Result<(ArimaOrder, Vec<ForecastPoint>, MapeSummary)> {
    if series.len() <= train_months {
        return Err(Error::SeriesTooShort {
            len: series.len(),
            min: train_months + 1,
        });
    }
    let train = &series[..train_months];
    let order = match order_override {
        Some(o) => o,
        None => select_order(train, grid)?,
    };
    let model = fit_arima(train, order)?;
    let points = rolling_one_step(series, &model, train_months, window)?;
    let summary = mape(&points)?;
    // The fallback path can change the effective order.
    Ok((model.order, points, summary))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taxonomy::WageTercile;

    fn window() -> MonthWindow {
        MonthWindow::default_analysis()
    }

    #[test]
    fn random_walk_forecasts_equal_lagged_actuals() {
        let series = simulate_arima(ArimaOrder::new(0, 1, 0), &[], &[], 0.0, 1.0, 96, 5);
        let mut model = fit_arima(&series[..72], ArimaOrder::new(0, 1, 0)).unwrap();
        model.intercept = 0.0;
        let points = rolling_one_step(&series, &model, 72, window()).unwrap();
        assert_eq!(points.len(), 24);
        for (i, p) in points.iter().enumerate() {
            assert!((p.mean - series[72 + i - 1]).abs() < 1e-12);
            assert_eq!(p.actual, Some(series[72 + i]));
        }
    }

    #[test]
    fn interval_half_width_is_z_times_sigma() {
        let model = ArimaModel {
            order: ArimaOrder::new(0, 0, 0),
            ar_coeffs: vec![],
            ma_coeffs: vec![],
            intercept: 0.0,
            sigma2: 1.0,
            css: 10.0,
            n_obs: 10,
        };
        let series = vec![0.0; 20];
        let points = rolling_one_step(&series, &model, 10, window()).unwrap();
        for p in &points {
            assert!((p.upper95 - p.mean - 1.96).abs() < 1e-12);
            assert!((p.mean - p.lower95 - 1.96).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_holdout_rejected() {
        let model = fit_arima(&vec![1.0; 20], ArimaOrder::new(0, 0, 0)).unwrap();
        assert!(matches!(
            rolling_one_step(&[1.0; 20], &model, 20, window()),
            Err(Error::EmptyHoldout { .. })
        ));
    }

    fn pt(mean: f64, actual: f64) -> ForecastPoint {
        ForecastPoint {
            month: MonthIndex::new(2016, 1).unwrap(),
            mean,
            lower95: mean - 1.0,
            upper95: mean + 1.0,
            actual: Some(actual),
        }
    }

    #[test]
    fn mape_direct_formula() {
        let points = vec![pt(110.0, 100.0), pt(180.0, 200.0)];
        let s = mape(&points).unwrap();
        assert!((s.mape - 10.0).abs() < 1e-12);
        assert_eq!(s.n_used, 2);
    }

    #[test]
    fn mape_perfect_forecasts_zero() {
        let points = vec![pt(3.0, 3.0), pt(4.0, 4.0)];
        assert_eq!(mape(&points).unwrap().mape, 0.0);
    }

    #[test]
    fn mape_excludes_zero_actuals() {
        let points = vec![pt(1.0, 0.0), pt(110.0, 100.0)];
        let s = mape(&points).unwrap();
        assert_eq!(s.n_excluded, 1);
        assert!((s.mape - 10.0).abs() < 1e-12);
        assert!(matches!(mape(&[pt(1.0, 0.0)]), Err(Error::NoValidPoints)));
    }

    #[test]
    fn mape_scale_invariant() {
        let points = vec![pt(110.0, 100.0), pt(180.0, 200.0)];
        let scaled: Vec<ForecastPoint> = points
            .iter()
            .map(|p| ForecastPoint {
                mean: p.mean * 7.5,
                actual: p.actual.map(|a| a * 7.5),
                ..*p
            })
            .collect();
        assert!((mape(&points).unwrap().mape - mape(&scaled).unwrap().mape).abs() < 1e-12);
    }

    #[test]
    fn suite_produces_24_points_per_series() {
        let mut set = SeriesSet::new();
        for (i, tercile) in WageTercile::ALL.iter().enumerate() {
            let series = simulate_arima(
                ArimaOrder::new(1, 0, 0),
                &[0.6],
                &[],
                0.004,
                1e-4,
                96,
                i as u64,
            );
            set.insert(
                SeriesKey::FamilyTercile {
                    family: "Information Technology".into(),
                    tercile: *tercile,
                },
                series,
            );
        }
        let result = forecast_suite(
            &set,
            72,
            Some(ArimaOrder::new(1, 0, 0)),
            &[],
            window(),
        );
        assert_eq!(result.rows.len(), 3);
        assert!(result.failures.is_empty());
        for (_, points) in &result.points {
            assert_eq!(points.len(), 24);
        }
    }

    #[test]
    fn suite_skips_short_series_with_failure_note() {
        let mut set = SeriesSet::new();
        set.insert(
            SeriesKey::FamilyTercile {
                family: "Religion".into(),
                tercile: WageTercile::Low,
            },
            vec![0.1; 10],
        );
        let result = forecast_suite(&set, 72, None, &ArimaOrder::default_grid(), window());
        assert!(result.rows.is_empty());
        assert_eq!(result.failures.len(), 1);
    }

    #[test]
    fn recursive_one_step_matches_brute_force_conditional_expectation() {
        // Independent route: enumerate the ARMA conditional expectation
        // directly from the definition on a short series.
        let model = ArimaModel {
            order: ArimaOrder::new(2, 0, 1),
            ar_coeffs: vec![0.5, -0.2],
            ma_coeffs: vec![0.3],
            intercept: 0.1,
            sigma2: 1.0,
            css: 1.0,
            n_obs: 1,
        };
        let series = simulate_arima(ArimaOrder::new(2, 0, 1), &[0.5, -0.2], &[0.3], 0.1, 1.0, 20, 77);
        for t in 5..series.len() {
            let recursive = one_step_mean(&model, &series[..t]);
            // Brute force: rebuild innovations from scratch by definition.
            let mut e = vec![0.0; t];
            for s in 2..t {
                let mut pred = model.intercept
                    + model.ar_coeffs[0] * series[s - 1]
                    + model.ar_coeffs[1] * series[s - 2];
                if s >= 1 {
                    pred += model.ma_coeffs[0] * e[s - 1];
                }
                e[s] = series[s] - pred;
            }
            let brute = model.intercept
                + model.ar_coeffs[0] * series[t - 1]
                + model.ar_coeffs[1] * series[t - 2]
                + model.ma_coeffs[0] * e[t - 1];
            assert!((recursive - brute).abs() < 1e-9);
        }
    }
}
