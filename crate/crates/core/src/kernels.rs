//! Kernel functions and Gram matrices.
//!
//! Polynomial kernels are inhomogeneous, `(1 + ⟨x, x′⟩)^k`. The RBF kernel is
//! parameterized by its inverse width `g`: `exp(−g‖x − x′‖²)`.

use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::domain::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum KernelSpec {
    Linear,
    Polynomial { degree: u32 },
    Rbf { inv_width: f64 },
}

impl KernelSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelSpec::Polynomial { degree } if degree < 1 => Err(Error::invalid(
                "polynomial kernel degree must be at least 1",
            )),
            KernelSpec::Rbf { inv_width } if !(inv_width > 0.0 && inv_width.is_finite()) => Err(
                Error::invalid(format!("RBF inverse width must be positive, got {inv_width}")),
            ),
            _ => Ok(()),
        }
    }

    /// Kernel value without the dimension check.
    #[inline]
    pub fn eval(&self, x: &[f64], x2: &[f64]) -> f64 {
        match *self {
            KernelSpec::Linear => dot(x, x2),
            KernelSpec::Polynomial { degree } => (1.0 + dot(x, x2)).powi(degree as i32),
            KernelSpec::Rbf { inv_width } => {
                let d2: f64 = x.iter().zip(x2).map(|(a, b)| (a - b) * (a - b)).sum();
                (-inv_width * d2).exp()
            }
        }
    }

    /// Total order used for tie-breaking: linear, then polynomials by degree,
    /// then RBF kernels from widest (smallest inverse width) to narrowest.
    pub fn complexity_rank(&self) -> (u8, f64) {
        match *self {
            KernelSpec::Linear => (0, 0.0),
            KernelSpec::Polynomial { degree } => (1, f64::from(degree)),
            KernelSpec::Rbf { inv_width } => (2, inv_width),
        }
    }

    /// Short label as used in result tables: `linear`, `quadratic`, `cubic`,
    /// `poly4`, `rbf 0.1`.
    pub fn label(&self) -> String {
        match *self {
            KernelSpec::Linear => "linear".into(),
            KernelSpec::Polynomial { degree: 2 } => "quadratic".into(),
            KernelSpec::Polynomial { degree: 3 } => "cubic".into(),
            KernelSpec::Polynomial { degree } => format!("poly{degree}"),
            KernelSpec::Rbf { inv_width } => format!("rbf {inv_width}"),
        }
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn eval_kernel(spec: &KernelSpec, x: &[f64], x2: &[f64]) -> Result<f64> {
    if x.len() != x2.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: x2.len(),
        });
    }
    Ok(spec.eval(x, x2))
}

/// Kernel matrix between two point sets, `out[i][j] = K(rows[i], cols[j])`.
pub fn cross_gram(spec: &KernelSpec, rows: &[&[f64]], cols: &[&[f64]]) -> Result<DMatrix<f64>> {
    let dim = rows.first().or(cols.first()).map_or(0, |x| x.len());
    if let Some(bad) = rows.iter().chain(cols).find(|x| x.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: bad.len(),
        });
    }
    Ok(DMatrix::from_fn(rows.len(), cols.len(), |i, j| {
        spec.eval(rows[i], cols[j])
    }))
}

fn symmetric_gram(spec: &KernelSpec, points: &[&[f64]]) -> DMatrix<f64> {
    let n = points.len();
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = spec.eval(points[i], points[j]);
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    k
}

/// Gram matrix `K*` over the dataset in canonical order.
pub fn gram_matrix(spec: &KernelSpec, dataset: &Dataset) -> Result<DMatrix<f64>> {
    spec.validate()?;
    let dim = dataset.dim();
    if let Some(u) = dataset.units().iter().find(|u| u.features.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: u.features.len(),
        });
    }
    let points: Vec<&[f64]> = dataset.units().iter().map(|u| u.features.as_slice()).collect();
    Ok(symmetric_gram(spec, &points))
}

/// `D · K* · D` with `D = diag(y^T_1, …, y^T_{n_T}, −y^C_1, …, −y^C_{n_C})`.
pub fn signed_gram(gram: &DMatrix<f64>, dataset: &Dataset) -> Result<DMatrix<f64>> {
    let n = dataset.len();
    if gram.nrows() != n || gram.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: gram.nrows().max(gram.ncols()),
        });
    }
    let d = dataset.dual_signs();
    Ok(DMatrix::from_fn(n, n, |i, j| d[i] * gram[(i, j)] * d[j]))
}
