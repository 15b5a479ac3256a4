//! ARIMA estimation by conditional sum of squares.
//!
//! The series is differenced `d` times, then ARMA(p, q) parameters
//! (intercept, AR and MA coefficients) minimize the conditional sum of
//! squared innovations. Starting values come from Hannan-Rissanen long-AR
//! residual regression; the optimizer is a derivative-free simplex.
//! Non-stationary or non-invertible parameter points are penalized during
//! the search and rejected after it.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forecast::optim::nelder_mead;

/// 97.5% standard normal quantile, for 95% intervals.
pub const Z_95: f64 = 1.96;

/// Model orders (p, d, q). A (0, d, 0) model is the constant-mean special
/// case on the differenced series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ArimaOrder {
    pub p: usize,
    pub d: usize,
    pub q: usize,
}

impl ArimaOrder {
    pub fn new(p: usize, d: usize, q: usize) -> Self {
        ArimaOrder { p, d, q }
    }

    pub fn complexity(&self) -> usize {
        self.p + self.d + self.q
    }

    /// Default selection grid: p, q in {0, 1, 2}, d in {0, 1}.
    pub fn default_grid() -> Vec<ArimaOrder> {
        let mut grid = Vec::new();
        for p in 0..=2 {
            for d in 0..=1 {
                for q in 0..=2 {
                    grid.push(ArimaOrder::new(p, d, q));
                }
            }
        }
        grid
    }

    /// Parse `p,d,q`.
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(Error::InvalidConfig(format!(
                "order '{s}' must be p,d,q"
            )));
        }
        let nums: Vec<usize> = parts
            .iter()
            .map(|p| {
                p.parse()
                    .map_err(|_| Error::InvalidConfig(format!("order '{s}' must be p,d,q")))
            })
            .collect::<Result<_>>()?;
        Ok(ArimaOrder::new(nums[0], nums[1], nums[2]))
    }
}

impl std::fmt::Display for ArimaOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},{})", self.p, self.d, self.q)
    }
}

/// A fitted ARIMA model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArimaModel {
    pub order: ArimaOrder,
    pub ar_coeffs: Vec<f64>,
    pub ma_coeffs: Vec<f64>,
    pub intercept: f64,
    /// Innovation variance; also the one-step-ahead forecast variance.
    pub sigma2: f64,
    /// Conditional sum of squares at the optimum.
    pub css: f64,
    /// Residual count behind `css` (differenced length minus p).
    pub n_obs: usize,
}

impl ArimaModel {
    /// AIC on the CSS objective: n ln(CSS/n) + 2 (p + q + 1).
    pub fn aic(&self) -> f64 {
        let n = self.n_obs as f64;
        let rate = (self.css / n).max(1e-300);
        n * rate.ln() + 2.0 * (self.order.p + self.order.q + 1) as f64
    }
}

/// Apply d-fold first differencing.
pub fn difference(series: &[f64], d: usize) -> Vec<f64> {
    let mut out = series.to_vec();
    for _ in 0..d {
        out = out.windows(2).map(|w| w[1] - w[0]).collect();
    }
    out
}

/// Undo d-fold differencing given the d initial values of each level.
///
/// `initials[k]` is the first element of the k-times-differenced series,
/// with `initials[0]` the first original observation.
pub fn integrate(diffed: &[f64], initials: &[f64]) -> Vec<f64> {
    let mut out = diffed.to_vec();
    for init in initials.iter().rev() {
        let mut acc = *init;
        let mut level = Vec::with_capacity(out.len() + 1);
        level.push(acc);
        for v in &out {
            acc += v;
            level.push(acc);
        }
        out = level;
    }
    out
}

/// Leading values of each differencing level, for [`integrate`].
pub fn difference_initials(series: &[f64], d: usize) -> Vec<f64> {
    let mut initials = Vec::with_capacity(d);
    let mut cur = series.to_vec();
    for _ in 0..d {
        initials.push(cur[0]);
        cur = cur.windows(2).map(|w| w[1] - w[0]).collect();
    }
    initials
}

/// Innovations from the CSS recursion. Residuals before index `p` are zero
/// by convention; the sum of squares runs over `t >= p`.
pub fn css_residuals(w: &[f64], intercept: f64, ar: &[f64], ma: &[f64]) -> Vec<f64> {
    let p = ar.len();
    let mut e = vec![0.0; w.len()];
    for t in p..w.len() {
        let mut pred = intercept;
        for (i, phi) in ar.iter().enumerate() {
            pred += phi * w[t - 1 - i];
        }
        for (j, theta) in ma.iter().enumerate() {
            if t > j {
                pred += theta * e[t - 1 - j];
            }
        }
        e[t] = w[t] - pred;
    }
    e
}

fn css_value(w: &[f64], intercept: f64, ar: &[f64], ma: &[f64]) -> f64 {
    let p = ar.len();
    css_residuals(w, intercept, ar, ma)[p..]
        .iter()
        .map(|e| e * e)
        .sum()
}

/// Largest root modulus of the monic polynomial
/// `z^k - c1 z^(k-1) - ... - ck`, via companion-matrix eigenvalues.
///
/// Stationarity of AR(phi) requires this < 1 with `c = phi`; invertibility
/// of MA(theta) requires it < 1 with `c = -theta`.
fn max_root_modulus(coeffs: &[f64]) -> f64 {
    let k = coeffs.len();
    if k == 0 {
        return 0.0;
    }
    if k == 1 {
        return coeffs[0].abs();
    }
    let companion = DMatrix::from_fn(k, k, |i, j| {
        if i == 0 {
            coeffs[j]
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    companion
        .complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

fn is_stationary(ar: &[f64]) -> bool {
    max_root_modulus(ar) < 1.0
}

fn is_invertible(ma: &[f64]) -> bool {
    let neg: Vec<f64> = ma.iter().map(|t| -t).collect();
    max_root_modulus(&neg) < 1.0
}

/// Least-squares solve of `a x = b` via SVD.
fn lstsq(a: DMatrix<f64>, b: DVector<f64>) -> Option<Vec<f64>> {
    let svd = a.svd(true, true);
    svd.solve(&b, 1e-12).ok().map(|x| x.iter().copied().collect())
}

/// Hannan-Rissanen starting values: a long AR regression supplies proxy
/// innovations, then `w_t` regresses on its own lags and the proxy lags.
fn hannan_rissanen(w: &[f64], p: usize, q: usize) -> (f64, Vec<f64>, Vec<f64>) {
    let n = w.len();
    let fallback = || (mean(w), vec![0.0; p], vec![0.0; q]);

    if q == 0 {
        // Pure AR: direct lag regression.
        if p == 0 {
            return (mean(w), vec![], vec![]);
        }
        let rows = n - p;
        let mut a = DMatrix::zeros(rows, p + 1);
        let mut b = DVector::zeros(rows);
        for t in p..n {
            a[(t - p, 0)] = 1.0;
            for i in 0..p {
                a[(t - p, i + 1)] = w[t - 1 - i];
            }
            b[t - p] = w[t];
        }
        return match lstsq(a, b) {
            Some(x) => (x[0], shrink_to_region(&x[1..=p], false), vec![]),
            None => fallback(),
        };
    }

    // Stage 1: long AR for proxy innovations.
    let long = ((10.0 * (n as f64).log10()).ceil() as usize)
        .max(p + q)
        .min(n / 2);
    if n <= long + q || long == 0 {
        return fallback();
    }
    let rows = n - long;
    let mut a = DMatrix::zeros(rows, long + 1);
    let mut b = DVector::zeros(rows);
    for t in long..n {
        a[(t - long, 0)] = 1.0;
        for i in 0..long {
            a[(t - long, i + 1)] = w[t - 1 - i];
        }
        b[t - long] = w[t];
    }
    let Some(coefs) = lstsq(a, b) else {
        return fallback();
    };
    let mut proxy = vec![0.0; n];
    for t in long..n {
        let mut pred = coefs[0];
        for i in 0..long {
            pred += coefs[i + 1] * w[t - 1 - i];
        }
        proxy[t] = w[t] - pred;
    }

    // Stage 2: regress on own lags and proxy-innovation lags.
    let start = (long + q).max(p);
    if n <= start {
        return fallback();
    }
    let rows = n - start;
    let mut a = DMatrix::zeros(rows, p + q + 1);
    let mut b = DVector::zeros(rows);
    for t in start..n {
        let r = t - start;
        a[(r, 0)] = 1.0;
        for i in 0..p {
            a[(r, 1 + i)] = w[t - 1 - i];
        }
        for j in 0..q {
            a[(r, 1 + p + j)] = proxy[t - 1 - j];
        }
        b[r] = w[t];
    }
    match lstsq(a, b) {
        Some(x) => (
            x[0],
            shrink_to_region(&x[1..=p], false),
            shrink_to_region(&x[1 + p..1 + p + q], true),
        ),
        None => fallback(),
    }
}

/// Scale coefficients toward zero until the polynomial roots sit safely
/// outside the unit circle.
fn shrink_to_region(coeffs: &[f64], ma: bool) -> Vec<f64> {
    let mut out = coeffs.to_vec();
    for _ in 0..64 {
        let ok = if ma { is_invertible(&out) } else { is_stationary(&out) };
        let margin = if ma {
            max_root_modulus(&out.iter().map(|t| -t).collect::<Vec<_>>())
        } else {
            max_root_modulus(&out)
        };
        if ok && margin < 0.995 {
            break;
        }
        for v in &mut out {
            *v *= 0.9;
        }
    }
    out
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn minimum_length(order: ArimaOrder) -> usize {
    3 * order.complexity() + 10
}

const ROOT_BARRIER: f64 = 0.999;
const PENALTY: f64 = 1e12;

/// Fit an ARIMA(p, d, q) model by conditional sum of squares.
pub fn fit_arima(series: &[f64], order: ArimaOrder) -> Result<ArimaModel> {
    let min = minimum_length(order);
    if series.len() < min {
        return Err(Error::SeriesTooShort {
            len: series.len(),
            min,
        });
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidConfig("series contains non-finite values".into()));
    }

    let w = difference(series, order.d);
    let n = w.len();
    let w_mean = mean(&w);
    let w_var = w.iter().map(|v| (v - w_mean).powi(2)).sum::<f64>() / n as f64;

    // Constant differenced series: ARMA terms are unidentifiable. Fall back
    // to the constant-mean model at the same d.
    if w_var < 1e-24 && order.p + order.q > 0 {
        log::warn!(
            "constant series after differencing; falling back from {order} to (0,{},0)",
            order.d
        );
        return fit_arima(series, ArimaOrder::new(0, order.d, 0));
    }

    if order.p == 0 && order.q == 0 {
        let css = w.iter().map(|v| (v - w_mean).powi(2)).sum::<f64>();
        return Ok(ArimaModel {
            order,
            ar_coeffs: vec![],
            ma_coeffs: vec![],
            intercept: w_mean,
            sigma2: css / n as f64,
            css,
            n_obs: n,
        });
    }

    let (c0, ar0, ma0) = hannan_rissanen(&w, order.p, order.q);
    let mut x0 = Vec::with_capacity(1 + order.p + order.q);
    x0.push(c0);
    x0.extend_from_slice(&ar0);
    x0.extend_from_slice(&ma0);

    let p = order.p;
    let q = order.q;
    let objective = |params: &[f64]| -> f64 {
        let ar = &params[1..=p];
        let ma = &params[1 + p..1 + p + q];
        let ar_root = max_root_modulus(ar);
        let ma_root = max_root_modulus(&ma.iter().map(|t| -t).collect::<Vec<_>>());
        let worst = ar_root.max(ma_root);
        if worst >= ROOT_BARRIER {
            return PENALTY * (1.0 + worst);
        }
        css_value(&w, params[0], ar, ma)
    };

    let max_iters = 400 * (1 + p + q);
    let result = nelder_mead(objective, &x0, max_iters, 1e-12);
    if !result.converged {
        return Err(Error::NonConvergence(max_iters));
    }

    let intercept = result.x[0];
    let ar_coeffs = result.x[1..=p].to_vec();
    let ma_coeffs = result.x[1 + p..1 + p + q].to_vec();
    if !is_stationary(&ar_coeffs) {
        return Err(Error::ModelRejected("AR polynomial root inside unit circle"));
    }
    if !is_invertible(&ma_coeffs) {
        return Err(Error::ModelRejected("MA polynomial root inside unit circle"));
    }

    let css = result.fx;
    let n_obs = n - p;
    Ok(ArimaModel {
        order,
        ar_coeffs,
        ma_coeffs,
        intercept,
        sigma2: css / n_obs as f64,
        css,
        n_obs,
    })
}

/// Pick the AIC-minimizing order over a grid; ties go to the smaller
/// p + d + q (then lexicographic (p, d, q)).
pub fn select_order(series: &[f64], grid: &[ArimaOrder]) -> Result<ArimaOrder> {
    if grid.is_empty() {
        return Err(Error::EmptyInput("order grid".into()));
    }
    let mut candidates: Vec<ArimaOrder> = grid.to_vec();
    candidates.sort_by_key(|o| (o.complexity(), o.p, o.d, o.q));
    let mut best: Option<(f64, ArimaOrder)> = None;
    for order in candidates {
        let Ok(model) = fit_arima(series, order) else {
            continue;
        };
        let aic = model.aic();
        // Strict improvement keeps the earlier (simpler) order on ties.
        if best.map_or(true, |(b, _)| aic < b) {
            best = Some((aic, order));
        }
    }
    best.map(|(_, o)| o).ok_or(Error::NoModelFound)
}

/// Conditional-expectation forecast of the next observation given the
/// history, with frozen parameters. Returned on the original scale.
pub fn one_step_mean(model: &ArimaModel, history: &[f64]) -> f64 {
    let d = model.order.d;
    let w = difference(history, d);
    let e = css_residuals(&w, model.intercept, &model.ar_coeffs, &model.ma_coeffs);
    let t = w.len();
    let mut pred = model.intercept;
    for (i, phi) in model.ar_coeffs.iter().enumerate() {
        if t > i {
            pred += phi * w[t - 1 - i];
        }
    }
    for (j, theta) in model.ma_coeffs.iter().enumerate() {
        if t > j {
            pred += theta * e[t - 1 - j];
        }
    }
    // Undo differencing: the forecast of y_t adds binomially weighted
    // recent actuals.
    let mut yhat = pred;
    let mut binom: i64 = 1;
    for k in 1..=d {
        binom = binom * (d as i64 - k as i64 + 1) / k as i64;
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        yhat += sign * binom as f64 * history[history.len() - k];
    }
    yhat
}
