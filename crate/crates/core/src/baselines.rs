//! Difference-of-two-models comparators.
//!
//! A learner is fitted separately on the treatment and the control units and
//! the effect score is `f_T(x) − f_C(x)`, where `f` is the SVM margin, the
//! ridge output or the logistic log-odds.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::domain::{Dataset, Unit};
use crate::error::{Error, Result};
use crate::kernels::{gram_matrix, KernelSpec};
use crate::logistic::fit_logistic;
use crate::qp::{solve_qp, QpProblem, QpSettings, QpStatus};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LearnerKind {
    Svm { kernel: KernelSpec, c: f64 },
    Ridge { kernel: KernelSpec, l2: f64 },
    Logistic { l2: f64 },
}

impl LearnerKind {
    /// SVM whose box constraint `C = 1/(2γ)` puts it on the causal SVM's γ axis.
    pub fn svm_for_gamma(kernel: KernelSpec, gamma: f64) -> Self {
        LearnerKind::Svm {
            kernel,
            c: 1.0 / (2.0 * gamma),
        }
    }

    pub fn label(&self) -> String {
        match self {
            LearnerKind::Svm { .. } => "2 SVM".into(),
            LearnerKind::Ridge { kernel: KernelSpec::Linear, .. } => "2 ridge".into(),
            LearnerKind::Ridge { kernel, .. } => format!("2 {kernel} kernel ridge"),
            LearnerKind::Logistic { .. } => "2 logistic".into(),
        }
    }

    fn validate(&self) -> Result<()> {
        let positive = |v: f64, what: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(format!("{what} must be positive, got {v}")))
            }
        };
        match *self {
            LearnerKind::Svm { kernel, c } => {
                kernel.validate()?;
                positive(c, "SVM C")
            }
            LearnerKind::Ridge { kernel, l2 } => {
                kernel.validate()?;
                positive(l2, "ridge l2")
            }
            LearnerKind::Logistic { l2 } => positive(l2, "logistic l2"),
        }
    }
}

/// A fitted single-group model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum BaseLearner {
    Constant {
        value: f64,
    },
    /// `f(x) = Σ coef_i K(x_i, x) + bias`
    Kernel {
        kernel: KernelSpec,
        points: Vec<Vec<f64>>,
        coef: Vec<f64>,
        bias: f64,
    },
    /// `f(x) = ⟨coefficients, x⟩ + intercept`
    Linear {
        coefficients: Vec<f64>,
        intercept: f64,
    },
}

impl BaseLearner {
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        match self {
            BaseLearner::Constant { value } => Ok(*value),
            BaseLearner::Kernel {
                kernel,
                points,
                coef,
                bias,
            } => {
                let dim = points.first().map_or(x.len(), Vec::len);
                if dim != x.len() {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: x.len(),
                    });
                }
                Ok(bias
                    + points
                        .iter()
                        .zip(coef)
                        .filter(|(_, c)| **c != 0.0)
                        .map(|(p, c)| c * kernel.eval(p, x))
                        .sum::<f64>())
            }
            BaseLearner::Linear {
                coefficients,
                intercept,
            } => {
                if coefficients.len() != x.len() {
                    return Err(Error::DimensionMismatch {
                        expected: coefficients.len(),
                        found: x.len(),
                    });
                }
                Ok(intercept + coefficients.iter().zip(x).map(|(a, b)| a * b).sum::<f64>())
            }
        }
    }
}

fn single_class(units: &[Unit]) -> Option<f64> {
    let first = units[0].y_obs;
    units.iter().all(|u| u.y_obs == first).then_some(f64::from(first))
}

fn fit_svm(units: &[Unit], kernel: KernelSpec, c: f64) -> Result<BaseLearner> {
    let n = units.len();
    let ds = Dataset::new(units.to_vec());
    let k = gram_matrix(&kernel, &ds)?;
    let y: Vec<f64> = ds.units().iter().map(|u| f64::from(u.y_obs)).collect();
    // solved in u = α/C ∈ [0, 1] with the objective divided by C
    let p = DMatrix::from_fn(n, n, |i, j| c * y[i] * y[j] * k[(i, j)]);
    let q = DVector::from_element(n, -1.0);
    let mut a = DMatrix::zeros(2 * n, n);
    let mut b = DVector::zeros(2 * n);
    for i in 0..n {
        a[(2 * i, i)] = -1.0;
        a[(2 * i + 1, i)] = 1.0;
        b[2 * i + 1] = 1.0;
    }
    let e = DMatrix::from_row_slice(1, n, &y);
    let prob = QpProblem::new(p, q, a, b, e, DVector::zeros(1))?;
    let sol = solve_qp(&prob, &QpSettings::default())?;
    match sol.status {
        QpStatus::Infeasible => return Err(Error::Infeasible),
        QpStatus::MaxIter if sol.kkt_residual > 1e-4 => {
            return Err(Error::Numerical(format!(
                "SVM dual stalled with KKT residual {:.3e}",
                sol.kkt_residual
            )))
        }
        _ => {}
    }
    let u: Vec<f64> = sol.x.iter().map(|v| v.clamp(0.0, 1.0)).collect();
    let coef: Vec<f64> = u.iter().zip(&y).map(|(u, y)| c * u * y).collect();
    let f_no_bias = &k * DVector::from_column_slice(&coef);

    // margin-placing bias g_i for each unit: y_i − Σ_j coef_j K_ji
    let g: Vec<f64> = (0..n).map(|i| y[i] - f_no_bias[i]).collect();
    let band = 1e-3;
    let free: Vec<f64> = (0..n)
        .filter(|&i| u[i] > band && u[i] < 1.0 - band)
        .map(|i| g[i])
        .collect();
    let bias = if !free.is_empty() {
        free.iter().sum::<f64>() / free.len() as f64
    } else {
        let (mut lb, mut ub) = (f64::NEG_INFINITY, f64::INFINITY);
        for i in 0..n {
            let at_lower = u[i] <= band;
            if at_lower == (y[i] > 0.0) {
                lb = lb.max(g[i]);
            } else {
                ub = ub.min(g[i]);
            }
        }
        match (lb.is_finite(), ub.is_finite()) {
            (true, true) => 0.5 * (lb + ub),
            (true, false) => lb,
            (false, true) => ub,
            (false, false) => 0.0,
        }
    };
    Ok(BaseLearner::Kernel {
        kernel,
        points: ds.units().iter().map(|u| u.features.clone()).collect(),
        coef,
        bias,
    })
}

fn fit_ridge(units: &[Unit], kernel: KernelSpec, l2: f64) -> Result<BaseLearner> {
    let ds = Dataset::new(units.to_vec());
    let n = ds.len();
    let mut k = gram_matrix(&kernel, &ds)?;
    for i in 0..n {
        k[(i, i)] += l2;
    }
    let y = DVector::from_iterator(n, ds.units().iter().map(|u| f64::from(u.y_obs)));
    let coef = match k.clone().cholesky() {
        Some(ch) => ch.solve(&y),
        None => k
            .lu()
            .solve(&y)
            .ok_or_else(|| Error::Numerical("ridge system is singular".into()))?,
    };
    Ok(BaseLearner::Kernel {
        kernel,
        points: ds.units().iter().map(|u| u.features.clone()).collect(),
        coef: coef.iter().copied().collect(),
        bias: 0.0,
    })
}

fn fit_logistic_learner(units: &[Unit], l2: f64) -> Result<BaseLearner> {
    let x: Vec<&[f64]> = units.iter().map(|u| u.features.as_slice()).collect();
    let y: Vec<bool> = units.iter().map(|u| u.y_obs > 0).collect();
    let fit = fit_logistic(&x, &y, l2, 200)?;
    Ok(BaseLearner::Linear {
        coefficients: fit.coefficients,
        intercept: fit.intercept,
    })
}

/// Fits one learner on a single group's units. Classifiers given a single
/// outcome class return the constant model emitting that class's sign.
pub fn train_base_learner(kind: &LearnerKind, units: &[Unit]) -> Result<BaseLearner> {
    kind.validate()?;
    if units.len() < 2 {
        return Err(Error::InvalidDataset(format!(
            "a base learner needs at least 2 units, got {}",
            units.len()
        )));
    }
    match *kind {
        LearnerKind::Svm { kernel, c } => match single_class(units) {
            Some(v) => Ok(BaseLearner::Constant { value: v }),
            None => fit_svm(units, kernel, c),
        },
        LearnerKind::Ridge { kernel, l2 } => fit_ridge(units, kernel, l2),
        LearnerKind::Logistic { l2 } => match single_class(units) {
            Some(v) => Ok(BaseLearner::Constant { value: v }),
            None => fit_logistic_learner(units, l2),
        },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoModelPredictor {
    pub learner_kind: LearnerKind,
    pub model_t: BaseLearner,
    pub model_c: BaseLearner,
}

#[derive(Serialize, Deserialize)]
struct TwoModelJson {
    two_model: TwoModelPredictor,
}

impl TwoModelPredictor {
    pub fn fit(dataset: &Dataset, kind: &LearnerKind) -> Result<Self> {
        Ok(TwoModelPredictor {
            learner_kind: *kind,
            model_t: train_base_learner(kind, dataset.treatment())?,
            model_c: train_base_learner(kind, dataset.control())?,
        })
    }

    /// `f_T(x) − f_C(x)`.
    pub fn predict_difference(&self, x: &[f64]) -> Result<f64> {
        Ok(self.model_t.predict(x)? - self.model_c.predict(x)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&TwoModelJson {
            two_model: self.clone(),
        })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let j: TwoModelJson = serde_json::from_str(text)?;
        Ok(j.two_model)
    }
}
