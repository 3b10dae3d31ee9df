//! Generalization-bound calculators.
//!
//! With probability at least `1 − δ` the expected conditional-difference loss
//! is at most `M · (max(R̂_T, R̂_C) + max(Δ_T(δ/2), Δ_C(δ/2)))`, where the
//! empirical risks use the loss rescaled by `1/M` and
//!
//! ```text
//! Δ_T(δ) = 2 √(2 (log S_F(2n_T) + log(4/δ)) / n_T)
//! Δ_C(δ) = 2^{5/4} √d₂ ((p log(2 e n_C / p) + log(4/δ)) / n_C)^{3/8}
//! ```
//!
//! All logarithms are natural; `d₂(P‖Q) = 2^{KL(P‖Q) in bits}`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub n_t: usize,
    pub n_c: usize,
    pub delta: f64,
    pub pdim: usize,
    /// `log S_F(2 n_T)`.
    pub growth_log: f64,
    pub d2: f64,
    /// Supremum of the surrogate loss.
    pub m: f64,
}

impl BoundInputs {
    pub fn validate(&self) -> Result<()> {
        if self.n_t == 0 || self.n_c == 0 || self.pdim == 0 {
            return Err(Error::invalid("n_t, n_c and pdim must be positive"));
        }
        check_delta(self.delta)?;
        if !(self.d2 >= 1.0) {
            return Err(Error::invalid(format!("d2 must be at least 1, got {}", self.d2)));
        }
        if !(self.m >= 1.0) {
            return Err(Error::invalid(format!("M must be at least 1, got {}", self.m)));
        }
        if !(self.growth_log >= 0.0) {
            return Err(Error::invalid("growth_log must be nonnegative"));
        }
        Ok(())
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 4.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("δ must lie in (0, 4), got {delta}")))
    }
}

/// Sauer's bound on `log S_F(m)` for a class of VC dimension `d`:
/// `d · ln(e m / d)` when `m > d`, else `m ln 2`.
pub fn sauer_growth_log(d: usize, m: usize) -> f64 {
    if m <= d {
        m as f64 * std::f64::consts::LN_2
    } else {
        let (d, m) = (d as f64, m as f64);
        d * (std::f64::consts::E * m / d).ln()
    }
}

/// `δ` may exceed 1 only so that arranged identities such as
/// `log(4/δ) = 1` are expressible; meaningful confidence levels lie in (0, 1).
pub fn delta_t(n_t: usize, delta: f64, growth_log: f64) -> Result<f64> {
    if n_t == 0 {
        return Err(Error::invalid("n_t must be positive"));
    }
    check_delta(delta)?;
    Ok(2.0 * (2.0 * (growth_log + (4.0 / delta).ln()) / n_t as f64).sqrt())
}

pub fn delta_c(n_c: usize, delta: f64, pdim: usize, d2: f64) -> Result<f64> {
    if pdim == 0 || n_c < pdim {
        return Err(Error::invalid(format!("need n_c ≥ pdim ≥ 1, got n_c = {n_c}, pdim = {pdim}")));
    }
    check_delta(delta)?;
    let p = pdim as f64;
    let n = n_c as f64;
    let inner = (p * (2.0 * n * std::f64::consts::E / p).ln() + (4.0 / delta).ln()) / n;
    Ok(2f64.powf(1.25) * d2.sqrt() * inner.powf(0.375))
}

pub fn generalization_bound(r_hat_t: f64, r_hat_c: f64, inputs: &BoundInputs) -> Result<f64> {
    inputs.validate()?;
    let dt = delta_t(inputs.n_t, inputs.delta / 2.0, inputs.growth_log)?;
    let dc = delta_c(inputs.n_c, inputs.delta / 2.0, inputs.pdim, inputs.d2)?;
    Ok(inputs.m * (r_hat_t.max(r_hat_c) + dt.max(dc)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum D2Estimator {
    GaussianParametric,
    UserSupplied { value: f64 },
}

/// Ridge added to each fitted covariance.
pub const COV_RIDGE: f64 = 1e-6;

/// `KL(N(μ_p, Σ_p) ‖ N(μ_q, Σ_q))` in nats.
pub fn gaussian_kl(
    mean_p: &DVector<f64>,
    cov_p: &DMatrix<f64>,
    mean_q: &DVector<f64>,
    cov_q: &DMatrix<f64>,
) -> Result<f64> {
    let d = mean_p.len();
    let degenerate = || Error::Numerical("covariance is not positive definite".into());
    let chol_p = cov_p.clone().cholesky().ok_or_else(degenerate)?;
    let chol_q = cov_q.clone().cholesky().ok_or_else(degenerate)?;
    let logdet = |c: &nalgebra::Cholesky<f64, nalgebra::Dyn>| {
        2.0 * c.l_dirty().diagonal().iter().map(|v| v.ln()).sum::<f64>()
    };
    let trace = chol_q.solve(cov_p).trace();
    let diff = mean_q - mean_p;
    let maha = diff.dot(&chol_q.solve(&diff));
    let kl = 0.5 * (trace + maha - d as f64 + logdet(&chol_q) - logdet(&chol_p));
    Ok(kl.max(0.0))
}

fn fit_gaussian(points: &[&[f64]], d: usize) -> (DVector<f64>, DMatrix<f64>) {
    let n = points.len() as f64;
    let mut mean = DVector::zeros(d);
    for p in points {
        mean += DVector::from_column_slice(p);
    }
    mean /= n;
    let mut cov = DMatrix::zeros(d, d);
    for p in points {
        let c = DVector::from_column_slice(p) - &mean;
        cov += &c * c.transpose();
    }
    cov /= n;
    for i in 0..d {
        cov[(i, i)] += COV_RIDGE;
    }
    (mean, cov)
}

/// `d₂(μ_T ‖ μ_C)`. The Gaussian estimator fits maximum-likelihood normals
/// (covariance plus `1e-6·I`) to each group.
pub fn estimate_d2(treatment: &[&[f64]], control: &[&[f64]], estimator: &D2Estimator) -> Result<f64> {
    match *estimator {
        D2Estimator::UserSupplied { value } => {
            if value >= 1.0 && value.is_finite() {
                Ok(value)
            } else {
                Err(Error::invalid(format!("d2 must be a finite value ≥ 1, got {value}")))
            }
        }
        D2Estimator::GaussianParametric => {
            let d = treatment.first().or(control.first()).map_or(0, |x| x.len());
            if d == 0 {
                return Err(Error::EmptyInput("feature vectors"));
            }
            if treatment.len() < d + 2 || control.len() < d + 2 {
                return Err(Error::InvalidDataset(format!(
                    "Gaussian d2 needs at least {} points per group",
                    d + 2
                )));
            }
            if let Some(bad) = treatment.iter().chain(control).find(|x| x.len() != d) {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: bad.len(),
                });
            }
            let (mt, ct) = fit_gaussian(treatment, d);
            let (mc, cc) = fit_gaussian(control, d);
            let kl_nats = gaussian_kl(&mt, &ct, &mc, &cc)?;
            // 2^{KL in bits} = e^{KL in nats}
            Ok(kl_nats.exp())
        }
    }
}
