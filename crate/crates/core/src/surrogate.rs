//! Surrogate losses for the conditional-difference 0-1 loss and the minimax
//! empirical risk built from them.
//!
//! A loss `l` is admissible when `l(z) ≥ 1{z ≥ 0} + 1{z ≥ 1}` for every real
//! `z`. Under that condition the expected `l_1` loss of a predictor `h` is
//! bounded by the larger of the treatment risk `E_T l(−h·y^T)` and the
//! ratio-weighted control risk `E_C l(h·y^C) / ratio`.

use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use crate::domain::Dataset;
use crate::error::{Error, Result};

/// Argument above which the exponential loss is reported as `+∞`.
pub const EXP_SATURATION: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurrogateLoss {
    DoubleIndicator,
    Hinge,
    Squared,
    ScaledLogistic,
    Exponential,
}

impl SurrogateLoss {
    pub const ALL: [SurrogateLoss; 5] = [
        SurrogateLoss::DoubleIndicator,
        SurrogateLoss::Hinge,
        SurrogateLoss::Squared,
        SurrogateLoss::ScaledLogistic,
        SurrogateLoss::Exponential,
    ];

    pub fn value(self, z: f64) -> f64 {
        match self {
            SurrogateLoss::DoubleIndicator => double_indicator(z),
            SurrogateLoss::Hinge => (1.0 + z).max(0.0),
            SurrogateLoss::Squared => (1.0 + z) * (1.0 + z),
            SurrogateLoss::ScaledLogistic => 2.0 * softplus(z) / (1.0 + E).ln(),
            SurrogateLoss::Exponential => {
                if z > EXP_SATURATION {
                    f64::INFINITY
                } else {
                    z.exp()
                }
            }
        }
    }

    /// True when [`value`](Self::value) returned the saturated `+∞`.
    pub fn saturates(self, z: f64) -> bool {
        self == SurrogateLoss::Exponential && z > EXP_SATURATION
    }
}

/// `1{z ≥ 0} + 1{z ≥ 1}`, the pointwise lower bound every surrogate must meet.
pub fn double_indicator(z: f64) -> f64 {
    f64::from(u8::from(z >= 0.0) + u8::from(z >= 1.0))
}

/// `ln(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

pub fn surrogate_value(loss: SurrogateLoss, z: f64) -> f64 {
    loss.value(z)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidityReport {
    pub passed: bool,
    pub points_checked: usize,
    /// First grid point where the bound fails: `(z, l(z), 1{z≥0}+1{z≥1})`.
    pub first_violation: Option<(f64, f64, f64)>,
}

/// Grid check of the admissibility condition for an arbitrary function,
/// always including the breakpoints `z = 0` and `z = 1`.
pub fn check_validity_with(
    loss: impl Fn(f64) -> f64,
    z_min: f64,
    z_max: f64,
    step: f64,
) -> Result<ValidityReport> {
    if !(z_min < z_max) || !(step > 0.0) || !step.is_finite() {
        return Err(Error::invalid(format!(
            "need z_min < z_max and step > 0 (got [{z_min}, {z_max}], step {step})"
        )));
    }
    let steps = ((z_max - z_min) / step).floor() as usize;
    let grid = (0..=steps).map(|k| z_min + k as f64 * step);
    let mut points = 0;
    for z in [0.0, 1.0].into_iter().chain(grid) {
        points += 1;
        let v = loss(z);
        let bound = double_indicator(z);
        if !(v >= bound - 1e-12) {
            return Ok(ValidityReport {
                passed: false,
                points_checked: points,
                first_violation: Some((z, v, bound)),
            });
        }
    }
    Ok(ValidityReport {
        passed: true,
        points_checked: points,
        first_violation: None,
    })
}

pub fn check_surrogate_validity(
    loss: SurrogateLoss,
    z_min: f64,
    z_max: f64,
    step: f64,
) -> Result<ValidityReport> {
    check_validity_with(|z| loss.value(z), z_min, z_max, step)
}

/// Treatment risk, ratio-weighted control risk and their maximum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskPair {
    pub treatment_risk: f64,
    pub control_risk: f64,
    pub minimax: f64,
}

impl RiskPair {
    pub fn new(treatment_risk: f64, control_risk: f64) -> Self {
        RiskPair {
            treatment_risk,
            control_risk,
            minimax: treatment_risk.max(control_risk),
        }
    }

    /// The looser bound a two-model fit would minimize.
    pub fn sum(&self) -> f64 {
        self.treatment_risk + self.control_risk
    }
}

/// Empirical minimax surrogate risk of the predictions `h_values`, given in
/// the dataset's canonical order.
pub fn minimax_risk(h_values: &[f64], dataset: &Dataset, loss: SurrogateLoss) -> Result<RiskPair> {
    if h_values.len() != dataset.len() {
        return Err(Error::DimensionMismatch {
            expected: dataset.len(),
            found: h_values.len(),
        });
    }
    if let Some(index) = h_values.iter().position(|h| h.is_nan()) {
        return Err(Error::NonFinite { index });
    }
    if dataset.n_t() == 0 || dataset.n_c() == 0 {
        return Err(Error::InvalidDataset(
            "minimax risk needs both treatment and control units".into(),
        ));
    }
    let ratios = dataset.control_ratios()?;
    let n_t = dataset.n_t();

    let treatment: f64 = dataset
        .treatment()
        .iter()
        .zip(h_values)
        .map(|(u, h)| loss.value(-h * f64::from(u.y_obs)))
        .sum::<f64>()
        / n_t as f64;
    let control: f64 = dataset
        .control()
        .iter()
        .zip(&h_values[n_t..])
        .zip(&ratios)
        .map(|((u, h), r)| loss.value(h * f64::from(u.y_obs)) / r)
        .sum::<f64>()
        / dataset.n_c() as f64;
    Ok(RiskPair::new(treatment, control))
}
