//! L2-penalized logistic regression fitted by damped Newton iterations.
//!
//! Minimizes `−(1/n) Σ log-likelihood + (l2/2)‖β‖²`; the intercept is not
//! penalized.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub(crate) const GRAD_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct LogisticFit {
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    pub converged: bool,
    pub iterations: usize,
    pub grad_norm: f64,
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + e^z)` without overflow.
fn log1pexp(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

struct Problem<'a> {
    x: &'a [&'a [f64]],
    y: &'a [bool],
    l2: f64,
    d: usize,
}

impl Problem<'_> {
    fn linear(&self, theta: &DVector<f64>, xi: &[f64]) -> f64 {
        theta[self.d] + xi.iter().zip(theta.iter()).map(|(a, b)| a * b).sum::<f64>()
    }

    fn objective(&self, theta: &DVector<f64>) -> f64 {
        let n = self.x.len() as f64;
        let nll: f64 = self
            .x
            .iter()
            .zip(self.y)
            .map(|(xi, &yi)| {
                let z = self.linear(theta, xi);
                if yi {
                    log1pexp(-z)
                } else {
                    log1pexp(z)
                }
            })
            .sum::<f64>()
            / n;
        let pen: f64 = theta.iter().take(self.d).map(|b| b * b).sum::<f64>();
        nll + 0.5 * self.l2 * pen
    }

    fn gradient_hessian(&self, theta: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>) {
        let d = self.d;
        let n = self.x.len() as f64;
        let mut g = DVector::zeros(d + 1);
        let mut h = DMatrix::zeros(d + 1, d + 1);
        for (xi, &yi) in self.x.iter().zip(self.y) {
            let p = sigmoid(self.linear(theta, xi));
            let r = p - f64::from(u8::from(yi));
            let w = p * (1.0 - p);
            for a in 0..=d {
                let xa = if a < d { xi[a] } else { 1.0 };
                g[a] += r * xa;
                for b in 0..=a {
                    let xb = if b < d { xi[b] } else { 1.0 };
                    h[(a, b)] += w * xa * xb;
                }
            }
        }
        g /= n;
        h /= n;
        for a in 0..=d {
            for b in 0..a {
                h[(b, a)] = h[(a, b)];
            }
        }
        for a in 0..d {
            g[a] += self.l2 * theta[a];
            h[(a, a)] += self.l2;
        }
        (g, h)
    }
}

pub(crate) fn fit_logistic(x: &[&[f64]], y: &[bool], l2: f64, max_iter: usize) -> Result<LogisticFit> {
    if x.is_empty() || x.len() != y.len() {
        return Err(Error::invalid("logistic fit needs matching, nonempty inputs"));
    }
    if !(l2 > 0.0 && l2.is_finite()) {
        return Err(Error::invalid(format!("l2 penalty must be positive, got {l2}")));
    }
    let d = x[0].len();
    if let Some(bad) = x.iter().find(|r| r.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: bad.len(),
        });
    }
    let prob = Problem { x, y, l2, d };
    let mut theta = DVector::zeros(d + 1);
    let mut f = prob.objective(&theta);
    let mut grad_norm = f64::INFINITY;
    // first iterate within tolerance; one more Newton step is kept only if it
    // shrinks the gradient further
    let mut within: Option<(DVector<f64>, f64)> = None;
    for it in 0..max_iter {
        let (g, mut h) = prob.gradient_hessian(&theta);
        grad_norm = g.amax();
        if let Some((best, best_norm)) = within.take() {
            let (done, norm) = if grad_norm < best_norm { (theta, grad_norm) } else { (best, best_norm) };
            return Ok(LogisticFit {
                coefficients: done.iter().take(d).copied().collect(),
                intercept: done[d],
                converged: true,
                iterations: it,
                grad_norm: norm,
            });
        }
        if grad_norm <= GRAD_TOL {
            within = Some((theta.clone(), grad_norm));
        }
        let scale = h.diagonal().amax().max(1.0);
        h[(d, d)] += 1e-14 * scale;
        let step = match h.clone().cholesky() {
            Some(c) => c.solve(&g),
            None => g.clone(),
        };
        let slope = g.dot(&step);
        let mut t = 1.0;
        loop {
            let cand = &theta - t * &step;
            let fc = prob.objective(&cand);
            if fc <= f - 1e-4 * t * slope || t < 1e-12 {
                theta = cand;
                f = fc;
                break;
            }
            t *= 0.5;
        }
    }
    Ok(LogisticFit {
        coefficients: theta.iter().take(d).copied().collect(),
        intercept: theta[d],
        converged: grad_norm <= GRAD_TOL,
        iterations: max_iter,
        grad_norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigmoid_is_stable() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(-800.0) >= 0.0 && sigmoid(800.0) == 1.0);
    }

    #[test]
    fn constant_feature_recovers_prior_log_odds() {
        let rows: Vec<Vec<f64>> = vec![vec![0.0]; 10];
        let x: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
        let y: Vec<bool> = (0..10).map(|i| i < 3).collect();
        let fit = fit_logistic(&x, &y, 1e-4, 100).unwrap();
        assert!(fit.converged);
        assert_eq!(fit.coefficients, vec![0.0]);
        assert!((fit.intercept - (0.3f64 / 0.7).ln()).abs() < 1e-8, "{fit:?}");
    }

    #[test]
    fn separable_data_stays_finite() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64 - 4.5]).collect();
        let x: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
        let y: Vec<bool> = (0..10).map(|i| i >= 5).collect();
        let fit = fit_logistic(&x, &y, 1e-2, 200).unwrap();
        assert!(fit.converged);
        assert!(fit.coefficients[0].is_finite() && fit.coefficients[0] > 0.0);
    }
}
