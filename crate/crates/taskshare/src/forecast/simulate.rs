//! Deterministic ARIMA simulation, used by tests and sample generation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::forecast::arima::{integrate, ArimaOrder};

/// Simulate an ARIMA(p, d, q) series with Gaussian innovations.
///
/// The ARMA recursion runs on the differenced scale with a 200-step burn-in
/// and is then integrated `d` times (starting levels zero). The same seed
/// always yields the same series.
pub fn simulate_arima(
    order: ArimaOrder,
    ar: &[f64],
    ma: &[f64],
    intercept: f64,
    sigma: f64,
    n: usize,
    seed: u64,
) -> Vec<f64> {
    assert_eq!(ar.len(), order.p);
    assert_eq!(ma.len(), order.q);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, sigma).expect("sigma must be finite and non-negative");

    let burnin = 200;
    let total = n + burnin;
    let mut w = Vec::with_capacity(total);
    let mut eps: Vec<f64> = Vec::with_capacity(total);
    for t in 0..total {
        let e = normal.sample(&mut rng);
        let mut value = intercept + e;
        for (i, phi) in ar.iter().enumerate() {
            if t > i {
                value += phi * w[t - 1 - i];
            }
        }
        for (j, theta) in ma.iter().enumerate() {
            if t > j {
                value += theta * eps[t - 1 - j];
            }
        }
        w.push(value);
        eps.push(e);
    }
    let w = &w[burnin..];

    if order.d == 0 {
        w.to_vec()
    } else {
        integrate(w, &vec![0.0; order.d])[..n].to_vec()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_per_seed() {
        let a = simulate_arima(ArimaOrder::new(1, 0, 0), &[0.7], &[], 0.0, 1.0, 50, 9);
        let b = simulate_arima(ArimaOrder::new(1, 0, 0), &[0.7], &[], 0.0, 1.0, 50, 9);
        assert_eq!(a, b);
        let c = simulate_arima(ArimaOrder::new(1, 0, 0), &[0.7], &[], 0.0, 1.0, 50, 10);
        assert_ne!(a, c);
    }

    #[test]
    fn ar1_sample_moments_are_plausible() {
        // Stationary AR(1): variance sigma^2 / (1 - phi^2).
        let data = simulate_arima(ArimaOrder::new(1, 0, 0), &[0.7], &[], 0.0, 1.0, 20_000, 1);
        let mean = data.iter().sum::<f64>() / data.len() as f64;
        let var = data.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / data.len() as f64;
        assert!(mean.abs() < 0.1, "mean = {mean}");
        let expected = 1.0 / (1.0 - 0.49);
        assert!((var - expected).abs() < 0.2, "var = {var}");
    }

    #[test]
    fn requested_length() {
        for d in 0..2 {
            let data = simulate_arima(ArimaOrder::new(0, d, 0), &[], &[], 0.1, 0.5, 96, 4);
            assert_eq!(data.len(), 96);
        }
    }
}
