//! Ordinary least squares and Newton-fitted logistic regression.

use crate::linalg::{cholesky, cholesky_solve};
use crate::special::sigmoid;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearFit {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    /// A ridge term had to be added to a singular design.
    pub ridge: Option<f64>,
}

pub const SINGULAR_RIDGE: f64 = 1e-8;

/// Least squares on centered data: solves (XcᵀXc + λI) β = Xcᵀyc.
/// `l2` is an optional ridge penalty; a singular design without one gets
/// a ridge of 1e-8 (relative to the largest diagonal entry).
pub fn fit_linear(x: &[Vec<f64>], y: &[f64], l2: f64) -> LinearFit {
    let n = y.len() as f64;
    let m = x.len();
    let ybar = y.iter().sum::<f64>() / n;
    let means: Vec<f64> = x.iter().map(|c| c.iter().sum::<f64>() / n).collect();
    let centered: Vec<Vec<f64>> = x
        .iter()
        .zip(&means)
        .map(|(c, mu)| c.iter().map(|v| v - mu).collect())
        .collect();
    let mut gram = vec![0.0; m * m];
    let mut rhs = vec![0.0; m];
    for i in 0..m {
        for j in 0..=i {
            let v: f64 = centered[i].iter().zip(&centered[j]).map(|(a, b)| a * b).sum();
            gram[i * m + j] = v;
            gram[j * m + i] = v;
        }
        rhs[i] = centered[i].iter().zip(y).map(|(a, b)| a * (b - ybar)).sum();
        gram[i * m + i] += l2;
    }
    let (l, ridge) = match cholesky(&gram, m, 1e-12) {
        Some(l) => (l, None),
        None => {
            let max_diag = (0..m).map(|i| gram[i * m + i]).fold(0.0f64, f64::max);
            let lambda = SINGULAR_RIDGE * max_diag.max(1.0);
            for i in 0..m {
                gram[i * m + i] += lambda;
            }
            (
                cholesky(&gram, m, 0.0).expect("ridge makes the system positive definite"),
                Some(lambda),
            )
        }
    };
    let coefficients = if m == 0 {
        Vec::new()
    } else {
        cholesky_solve(&l, m, &rhs)
    };
    let intercept = ybar - coefficients.iter().zip(&means).map(|(b, mu)| b * mu).sum::<f64>();
    LinearFit {
        intercept,
        coefficients,
        ridge,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogisticParams {
    pub l2: f64,
    pub max_iters: usize,
    /// Initial Newton step length.
    pub step: f64,
}

impl Default for LogisticParams {
    fn default() -> Self {
        Self {
            l2: 1e-6,
            max_iters: 100,
            step: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticFit {
    /// Intercept first, then one weight per feature.
    pub weights: Vec<f64>,
    pub loss_trace: Vec<f64>,
    pub converged: bool,
    pub gradient_norm: f64,
}

pub const GRADIENT_TOL: f64 = 1e-8;
const MAX_HALVINGS: usize = 30;

fn score(x: &[Vec<f64>], w: &[f64], r: usize) -> f64 {
    w[0] + x.iter().zip(&w[1..]).map(|(c, b)| c[r] * b).sum::<f64>()
}

// log(1 + e^s) without overflow
fn softplus(s: f64) -> f64 {
    if s > 0.0 {
        s + (-s).exp().ln_1p()
    } else {
        s.exp().ln_1p()
    }
}

/// Penalized negative log-likelihood; the intercept is not penalized.
pub fn log_loss(x: &[Vec<f64>], y: &[f64], w: &[f64], l2: f64) -> f64 {
    let nll: f64 = (0..y.len())
        .map(|r| {
            let s = score(x, w, r);
            softplus(s) - y[r] * s
        })
        .sum();
    nll + 0.5 * l2 * w[1..].iter().map(|b| b * b).sum::<f64>()
}

/// Gradient of [`log_loss`].
pub fn log_loss_gradient(x: &[Vec<f64>], y: &[f64], w: &[f64], l2: f64) -> Vec<f64> {
    let mut g = vec![0.0; w.len()];
    for r in 0..y.len() {
        let e = sigmoid(score(x, w, r)) - y[r];
        g[0] += e;
        for (j, c) in x.iter().enumerate() {
            g[j + 1] += e * c[r];
        }
    }
    for j in 1..w.len() {
        g[j] += l2 * w[j];
    }
    g
}

/// Damped Newton: the step is halved until the loss decreases.
pub fn fit_logistic(x: &[Vec<f64>], y: &[f64], params: LogisticParams) -> LogisticFit {
    let k = x.len() + 1;
    let mut w = vec![0.0; k];
    let mut loss = log_loss(x, y, &w, params.l2);
    let mut trace = vec![loss];
    let mut converged = false;
    let mut gnorm = f64::INFINITY;
    for _ in 0..params.max_iters {
        let g = log_loss_gradient(x, y, &w, params.l2);
        gnorm = g.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if gnorm <= GRADIENT_TOL {
            converged = true;
            break;
        }
        let mut h = vec![0.0; k * k];
        let mut z = vec![0.0; k];
        z[0] = 1.0;
        for r in 0..y.len() {
            for (j, c) in x.iter().enumerate() {
                z[j + 1] = c[r];
            }
            let p = sigmoid(score(x, &w, r));
            let v = p * (1.0 - p);
            for i in 0..k {
                let zi = v * z[i];
                for j in 0..=i {
                    h[i * k + j] += zi * z[j];
                }
            }
        }
        for i in 0..k {
            for j in 0..i {
                h[j * k + i] = h[i * k + j];
            }
            if i > 0 {
                h[i * k + i] += params.l2;
            }
        }
        let l = cholesky(&h, k, 1e-14).unwrap_or_else(|| {
            let max_diag = (0..k).map(|i| h[i * k + i]).fold(0.0f64, f64::max);
            for i in 0..k {
                h[i * k + i] += SINGULAR_RIDGE * max_diag.max(1.0);
            }
            cholesky(&h, k, 0.0).expect("ridge makes the Hessian positive definite")
        });
        let d = cholesky_solve(&l, k, &g);
        let mut t = params.step;
        let mut accepted = false;
        for _ in 0..=MAX_HALVINGS {
            let cand: Vec<f64> = w.iter().zip(&d).map(|(a, b)| a - t * b).collect();
            let cl = log_loss(x, y, &cand, params.l2);
            if cl < loss || (cl <= loss && t == params.step) {
                w = cand;
                loss = cl;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        trace.push(loss);
        if !accepted {
            // no descent left along the Newton direction
            gnorm = log_loss_gradient(x, y, &w, params.l2)
                .iter()
                .fold(0.0f64, |a, v| a.max(v.abs()));
            converged = gnorm <= GRADIENT_TOL;
            break;
        }
    }
    if !converged && gnorm.is_finite() {
        gnorm = log_loss_gradient(x, y, &w, params.l2)
            .iter()
            .fold(0.0f64, |a, v| a.max(v.abs()));
        converged = gnorm <= GRADIENT_TOL;
    }
    LogisticFit {
        weights: w,
        loss_trace: trace,
        converged,
        gradient_norm: gnorm,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_through_three_points() {
        let f = fit_linear(&[vec![0.0, 1.0, 2.0]], &[1.0, 2.5, 4.0], 0.0);
        assert!((f.intercept - 1.0).abs() < 1e-14);
        assert!((f.coefficients[0] - 1.5).abs() < 1e-14);
        assert!(f.ridge.is_none());
    }

    #[test]
    fn duplicated_column_uses_ridge() {
        let x = vec![0.0, 1.0, 2.0, 3.0];
        let f = fit_linear(&[x.clone(), x], &[1.0, 2.0, 3.0, 4.0], 0.0);
        assert!(f.ridge.is_some());
        assert!((f.coefficients[0] + f.coefficients[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn constant_outcome() {
        let f = fit_linear(&[vec![0.0, 1.0, 5.0]], &[2.0, 2.0, 2.0], 0.0);
        assert_eq!(f.coefficients[0], 0.0);
        assert_eq!(f.intercept, 2.0);
    }

    #[test]
    fn useless_feature_gets_zero_weight() {
        // every x value appears once with each label
        let x = vec![vec![0.0, 0.0, 1.0, 1.0, 2.0, 2.0]];
        let y = [0.0, 1.0, 0.0, 1.0, 0.0, 1.0];
        let f = fit_logistic(&x, &y, LogisticParams::default());
        assert!(f.converged);
        assert!(f.weights[1].abs() < 1e-9);
        assert!((sigmoid(f.weights[0]) - 0.5).abs() < 1e-9);
    }

    #[test]
    fn newton_reaches_tolerance() {
        let x = vec![vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0]];
        let y = [0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 1.0];
        let f = fit_logistic(&x, &y, LogisticParams::default());
        assert!(f.converged, "{}", f.gradient_norm);
        assert!(f.loss_trace.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn separable_data_stays_finite() {
        let x = vec![vec![0.0, 1.0, 2.0, 3.0]];
        let y = [0.0, 0.0, 1.0, 1.0];
        let f = fit_logistic(&x, &y, LogisticParams { max_iters: 50, ..Default::default() });
        assert!(f.weights.iter().all(|w| w.is_finite()));
    }
}
