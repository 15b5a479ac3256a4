//! Derivative-free simplex minimizer for the CSS objective.

/// Result of a Nelder-Mead run.
#[derive(Debug, Clone)]
pub struct MinimizeResult {
    pub x: Vec<f64>,
    pub fx: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Best objective value after each iteration; non-increasing, since an
    /// iteration never discards the best vertex.
    pub history: Vec<f64>,
}

/// Nelder-Mead simplex minimization with standard coefficients
/// (reflection 1, expansion 2, contraction 0.5, shrink 0.5).
pub fn nelder_mead<F>(
    mut f: F,
    x0: &[f64],
    max_iters: usize,
    tol: f64,
) -> MinimizeResult
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    if n == 0 {
        let fx = f(x0);
        return MinimizeResult {
            x: vec![],
            fx,
            iterations: 0,
            converged: true,
            history: vec![fx],
        };
    }

    // Initial simplex: x0 plus a perturbation along each axis.
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += if v[i].abs() > 1e-8 { 0.05 * v[i].abs() } else { 0.05 };
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| f(v)).collect();

    let mut iterations = 0;
    let mut converged = false;
    let mut history = Vec::new();
    while iterations < max_iters {
        iterations += 1;

        // Order vertices by objective value.
        let mut idx: Vec<usize> = (0..=n).collect();
        idx.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
        simplex = idx.iter().map(|&i| simplex[i].clone()).collect();
        values = idx.iter().map(|&i| values[i]).collect();

        let spread = values[n] - values[0];
        let diameter = simplex[1..]
            .iter()
            .map(|v| {
                v.iter()
                    .zip(&simplex[0])
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if spread.abs() < tol && diameter < tol.sqrt() {
            converged = true;
            break;
        }

        // Centroid of all but the worst vertex.
        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..n].iter().map(|v| v[j]).sum::<f64>() / n as f64)
            .collect();

        let reflect: Vec<f64> = centroid
            .iter()
            .zip(&simplex[n])
            .map(|(c, w)| c + (c - w))
            .collect();
        let f_reflect = f(&reflect);

        if f_reflect < values[0] {
            let expand: Vec<f64> = centroid
                .iter()
                .zip(&simplex[n])
                .map(|(c, w)| c + 2.0 * (c - w))
                .collect();
            let f_expand = f(&expand);
            if f_expand < f_reflect {
                simplex[n] = expand;
                values[n] = f_expand;
            } else {
                simplex[n] = reflect;
                values[n] = f_reflect;
            }
        } else if f_reflect < values[n - 1] {
            simplex[n] = reflect;
            values[n] = f_reflect;
        } else {
            let (base, f_base) = if f_reflect < values[n] {
                (&reflect, f_reflect)
            } else {
                (&simplex[n], values[n])
            };
            let contract: Vec<f64> = centroid
                .iter()
                .zip(base)
                .map(|(c, w)| c + 0.5 * (w - c))
                .collect();
            let f_contract = f(&contract);
            if f_contract < f_base {
                simplex[n] = contract;
                values[n] = f_contract;
            } else {
                // Shrink toward the best vertex.
                let best = simplex[0].clone();
                for v in simplex.iter_mut().skip(1) {
                    for (x, b) in v.iter_mut().zip(&best) {
                        *x = b + 0.5 * (*x - b);
                    }
                }
                for (i, v) in simplex.iter().enumerate().skip(1) {
                    values[i] = f(v);
                }
            }
        }

        history.push(values.iter().copied().fold(f64::INFINITY, f64::min));
    }

    let mut best = 0;
    for i in 1..=n {
        if values[i] < values[best] {
            best = i;
        }
    }
    MinimizeResult {
        x: simplex[best].clone(),
        fx: values[best],
        iterations,
        converged,
        history,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimizes_quadratic() {
        let r = nelder_mead(
            |x| (x[0] - 3.0).powi(2) + 2.0 * (x[1] + 1.0).powi(2),
            &[0.0, 0.0],
            1000,
            1e-12,
        );
        assert!(r.converged);
        assert!((r.x[0] - 3.0).abs() < 1e-4);
        assert!((r.x[1] + 1.0).abs() < 1e-4);
    }

    #[test]
    fn minimizes_rosenbrock() {
        let r = nelder_mead(
            |x| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2),
            &[-1.2, 1.0],
            5000,
            1e-14,
        );
        assert!(r.converged);
        assert!((r.x[0] - 1.0).abs() < 1e-3);
        assert!((r.x[1] - 1.0).abs() < 1e-3);
    }

    #[test]
    fn zero_dimensional_input() {
        let r = nelder_mead(|_| 7.0, &[], 10, 1e-8);
        assert!(r.converged);
        assert_eq!(r.fx, 7.0);
    }
}
