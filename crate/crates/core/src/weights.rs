//! Density ratios `μ_{X|C}(x) / μ_{X|T}(x)` for the control units.
//!
//! Randomized assignment gives the constant ratio 1. Covariate-dependent
//! assignment uses a logistic propensity model `e(x) = P(T | x)` and Bayes'
//! identity `ratio = ((1 − e)/e) · (n_T/n_C)`, clipped into `[1/clip, clip]`.

use serde::{Deserialize, Serialize};

use crate::domain::{Dataset, Group};
use crate::error::{Error, Result};
use crate::logistic::{fit_logistic, sigmoid};

pub const DEFAULT_CLIP: f64 = 20.0;
pub const DEFAULT_L2: f64 = 1e-4;
pub const DEFAULT_MAX_ITER: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropensityModel {
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    /// False when the gradient tolerance was not reached within the budget.
    pub converged: bool,
    pub iterations: usize,
}

impl PropensityModel {
    /// `e(x) = P(Treatment | x)`.
    pub fn propensity(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.coefficients.len() {
            return Err(Error::DimensionMismatch {
                expected: self.coefficients.len(),
                found: x.len(),
            });
        }
        let z = self.intercept
            + self
                .coefficients
                .iter()
                .zip(x)
                .map(|(a, b)| a * b)
                .sum::<f64>();
        Ok(sigmoid(z))
    }
}

/// Sets every control ratio to 1.
pub fn constant_ratios(dataset: &Dataset) -> Dataset {
    dataset.map_units(|u| {
        let mut u = u.clone();
        if u.group == Group::Control {
            u.ratio = Some(1.0);
        }
        u
    })
}

/// L2-penalized logistic regression of group membership on the features.
pub fn fit_propensity(dataset: &Dataset, l2: f64, max_iter: usize) -> Result<PropensityModel> {
    if dataset.n_t() == 0 || dataset.n_c() == 0 {
        return Err(Error::InvalidDataset(
            "propensity fit needs both treatment and control units".into(),
        ));
    }
    let x: Vec<&[f64]> = dataset.units().iter().map(|u| u.features.as_slice()).collect();
    let y: Vec<bool> = dataset.units().iter().map(|u| u.is_treated()).collect();
    let fit = fit_logistic(&x, &y, l2, max_iter)?;
    Ok(PropensityModel {
        coefficients: fit.coefficients,
        intercept: fit.intercept,
        converged: fit.converged,
        iterations: fit.iterations,
    })
}

/// Control ratio for propensity `e` and group sizes, clipped into `[1/clip, clip]`.
pub fn ratio_from_propensity(e: f64, n_t: usize, n_c: usize, clip: f64) -> f64 {
    let odds = if e <= 0.0 { f64::INFINITY } else { (1.0 - e) / e };
    (odds * n_t as f64 / n_c as f64).clamp(1.0 / clip, clip)
}

pub fn ratios_from_propensity(dataset: &Dataset, model: &PropensityModel, clip: f64) -> Result<Dataset> {
    if !(clip >= 1.0) {
        return Err(Error::invalid(format!("clip must be at least 1, got {clip}")));
    }
    if dataset.n_c() == 0 || dataset.n_t() == 0 {
        return Err(Error::InvalidDataset(
            "ratios need both treatment and control units".into(),
        ));
    }
    let (n_t, n_c) = (dataset.n_t(), dataset.n_c());
    let units = dataset
        .units()
        .iter()
        .map(|u| {
            let mut u = u.clone();
            if u.group == Group::Control {
                let e = model.propensity(&u.features)?;
                u.ratio = Some(ratio_from_propensity(e, n_t, n_c, clip));
            }
            Ok(u)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Dataset::new(units))
}

/// How control ratios are obtained before training.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum WeightMode {
    Constant,
    Propensity { l2: f64, clip: f64 },
    /// Ratios already present in the input are used as they are.
    Column,
}

impl WeightMode {
    pub fn propensity_default() -> Self {
        WeightMode::Propensity {
            l2: DEFAULT_L2,
            clip: DEFAULT_CLIP,
        }
    }
}

/// Fills the control ratios according to `mode`. The fitted propensity model
/// is returned when one was used.
pub fn apply_weights(dataset: &Dataset, mode: &WeightMode) -> Result<(Dataset, Option<PropensityModel>)> {
    match *mode {
        WeightMode::Constant => Ok((constant_ratios(dataset), None)),
        WeightMode::Propensity { l2, clip } => {
            let model = fit_propensity(dataset, l2, DEFAULT_MAX_ITER)?;
            Ok((ratios_from_propensity(dataset, &model, clip)?, Some(model)))
        }
        WeightMode::Column => {
            dataset.control_ratios()?;
            Ok((dataset.clone(), None))
        }
    }
}
