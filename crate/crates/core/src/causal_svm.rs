//! The minimax hinge-loss SVM for treatment-effect signs.
//!
//! Training minimizes
//!
//! ```text
//! max( mean_T ⌊1 − h(x)·y^T⌋₊ , mean_C ⌊1 + h(x)·y^C⌋₊ / ratio ) + γ K(w, w)
//! ```
//!
//! over `h(x) = w0 + K(w, x)` through its dual, a single convex QP in
//! `(λ, η, α)` with `β = 1 − α`. Stationarity in `w` gives the expansion
//!
//! ```text
//! K(w, x) = (1/2γ) ( Σ_T λ_i y_i^T K(x_i, x) − Σ_C η_j y_j^C K(x_j, x) )
//! ```
//!
//! which is used both for prediction and for the primal objective, so the
//! duality gap of every trained model is computed from independent formulas.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::domain::{ensure_valid, Dataset, EffectLabel, Group, Unit};
use crate::error::{Error, Result};
use crate::kernels::{gram_matrix, signed_gram, KernelSpec};
use crate::qp::{solve_qp, QpProblem, QpSettings, QpSolution, QpStatus};

pub const FORMAT_VERSION: u32 = 1;

/// Default interior-point tolerance for training.
pub const DEFAULT_TOL: f64 = 1e-8;

/// Relative width of the band next to each box bound inside which a dual
/// coefficient is treated as sitting on the bound when recovering `w0`.
pub const DEFAULT_INTERIOR_TOL: f64 = 1e-3;

/// How the intercept of a model was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InterceptSource {
    ComplementarySlackness,
    PrimalLineSearch,
}

impl fmt::Display for InterceptSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InterceptSource::ComplementarySlackness => "complementary-slackness",
            InterceptSource::PrimalLineSearch => "primal-line-search",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CausalSvmModel {
    pub train_units: Dataset,
    pub lambda: Vec<f64>,
    pub eta: Vec<f64>,
    pub alpha: f64,
    pub beta: f64,
    pub w0: f64,
    pub gamma: f64,
    pub kernel: KernelSpec,
    pub dual_objective: f64,
    pub primal_objective: f64,
    pub duality_gap: f64,
    pub intercept_source: InterceptSource,
    pub qp_iterations: usize,
    pub kkt_residual: f64,
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("γ must be positive and finite, got {gamma}")))
    }
}

/// Box upper bounds of `(λ, η)` for a given `α`.
fn upper_bounds(n_t: usize, ratios: &[f64], alpha: f64) -> Vec<f64> {
    let n_c = ratios.len() as f64;
    std::iter::repeat_n(alpha / n_t as f64, n_t)
        .chain(ratios.iter().map(|r| (1.0 - alpha) / (n_c * r)))
        .collect()
}

fn assemble_from_signed(dataset: &Dataset, signed: &DMatrix<f64>, gamma: f64) -> Result<QpProblem> {
    let n_t = dataset.n_t();
    let n_c = dataset.n_c();
    let ratios = dataset.control_ratios()?;
    let n = n_t + n_c;
    let nv = n + 1;
    let ia = n;

    let mut p = DMatrix::zeros(nv, nv);
    p.view_mut((0, 0), (n, n)).copy_from(&(signed / (2.0 * gamma)));
    let mut q = DVector::from_element(nv, -1.0);
    q[ia] = 0.0;

    let m = 2 * n + 2;
    let mut a = DMatrix::zeros(m, nv);
    let mut b = DVector::zeros(m);
    for i in 0..n {
        // −v_i ≤ 0
        a[(2 * i, i)] = -1.0;
        // λ_i − α/n_T ≤ 0   or   η_j + α/(n_C r_j) ≤ 1/(n_C r_j)
        a[(2 * i + 1, i)] = 1.0;
        if i < n_t {
            a[(2 * i + 1, ia)] = -1.0 / n_t as f64;
        } else {
            let c = 1.0 / (n_c as f64 * ratios[i - n_t]);
            a[(2 * i + 1, ia)] = c;
            b[2 * i + 1] = c;
        }
    }
    a[(2 * n, ia)] = -1.0;
    a[(2 * n + 1, ia)] = 1.0;
    b[2 * n + 1] = 1.0;

    let signs = dataset.dual_signs();
    let mut e = DMatrix::zeros(1, nv);
    for (i, s) in signs.iter().enumerate() {
        e[(0, i)] = *s;
    }
    QpProblem::new(p, q, a, b, e, DVector::zeros(1))
}

fn check_trainable(dataset: &Dataset, gamma: f64) -> Result<()> {
    check_gamma(gamma)?;
    if dataset.n_t() == 0 || dataset.n_c() == 0 {
        return Err(Error::InvalidDataset(
            "training needs both treatment and control units".into(),
        ));
    }
    dataset.control_ratios()?;
    Ok(())
}

/// Dual QP over `x = (λ, η, α)`.
///
/// Rows of `A` come in pairs per unit (`−v_i ≤ 0`, then the coupled upper
/// bound) followed by `−α ≤ 0` and `α ≤ 1`. The single equality row is
/// `Σ_T λ_i y_i^T − Σ_C η_j y_j^C = 0`.
pub fn assemble_dual(dataset: &Dataset, kernel: &KernelSpec, gamma: f64) -> Result<QpProblem> {
    check_trainable(dataset, gamma)?;
    let gram = gram_matrix(kernel, dataset)?;
    let signed = signed_gram(&gram, dataset)?;
    assemble_from_signed(dataset, &signed, gamma)
}

/// `K(w, x_k)` at every training point: `(1/2γ) · K · (D v)`.
fn kw_at_train(gram: &DMatrix<f64>, signs: &[f64], v: &[f64], gamma: f64) -> Vec<f64> {
    let dv = DVector::from_iterator(v.len(), v.iter().zip(signs).map(|(a, s)| a * s));
    let kw = gram * dv / (2.0 * gamma);
    kw.iter().copied().collect()
}

/// `(1/4γ) vᵀ (DKD) v`, which equals `γ K(w, w)`.
fn regularizer(signed: &DMatrix<f64>, v: &[f64], gamma: f64) -> f64 {
    let v = DVector::from_column_slice(v);
    v.dot(&(signed * &v)).max(0.0) / (4.0 * gamma)
}

fn hinge_means(dataset: &Dataset, ratios: &[f64], h: &[f64]) -> (f64, f64) {
    let n_t = dataset.n_t();
    let t: f64 = dataset
        .treatment()
        .iter()
        .zip(h)
        .map(|(u, h)| (1.0 - h * f64::from(u.y_obs)).max(0.0))
        .sum::<f64>()
        / n_t as f64;
    let c: f64 = dataset
        .control()
        .iter()
        .zip(&h[n_t..])
        .zip(ratios)
        .map(|((u, h), r)| (1.0 + h * f64::from(u.y_obs)).max(0.0) / r)
        .sum::<f64>()
        / dataset.n_c() as f64;
    (t, c)
}

fn coefficient_vector(dataset: &Dataset, lambda: &[f64], eta: &[f64]) -> Result<Vec<f64>> {
    if lambda.len() != dataset.n_t() {
        return Err(Error::DimensionMismatch {
            expected: dataset.n_t(),
            found: lambda.len(),
        });
    }
    if eta.len() != dataset.n_c() {
        return Err(Error::DimensionMismatch {
            expected: dataset.n_c(),
            found: eta.len(),
        });
    }
    Ok(lambda.iter().chain(eta).copied().collect())
}

/// Primal objective `max(treatment hinge mean, control hinge mean) + γ K(w, w)`
/// of the predictor induced by `(λ, η, w0)`.
pub fn primal_objective(
    dataset: &Dataset,
    kernel: &KernelSpec,
    gamma: f64,
    lambda: &[f64],
    eta: &[f64],
    w0: f64,
) -> Result<f64> {
    check_trainable(dataset, gamma)?;
    let v = coefficient_vector(dataset, lambda, eta)?;
    let gram = gram_matrix(kernel, dataset)?;
    let signed = signed_gram(&gram, dataset)?;
    let ratios = dataset.control_ratios()?;
    let signs = dataset.dual_signs();
    let h: Vec<f64> = kw_at_train(&gram, &signs, &v, gamma)
        .into_iter()
        .map(|k| k + w0)
        .collect();
    let (t, c) = hinge_means(dataset, &ratios, &h);
    Ok(t.max(c) + regularizer(&signed, &v, gamma))
}

/// Dual objective `Σλ + Ση − (1/4γ) vᵀ(DKD)v`.
pub fn dual_objective(
    dataset: &Dataset,
    kernel: &KernelSpec,
    gamma: f64,
    lambda: &[f64],
    eta: &[f64],
) -> Result<f64> {
    check_trainable(dataset, gamma)?;
    let v = coefficient_vector(dataset, lambda, eta)?;
    let gram = gram_matrix(kernel, dataset)?;
    let signed = signed_gram(&gram, dataset)?;
    Ok(v.iter().sum::<f64>() - regularizer(&signed, &v, gamma))
}

/// Minimizes the primal objective over `w0` with `K(w, x_k)` fixed.
///
/// The objective is convex and piecewise linear, so its minimum is attained
/// at a hinge breakpoint or at a crossing of the two group means. When the
/// minimizing set is an interval its midpoint is returned; when it is a ray
/// (every unit on the correct side of its margin) the point one unit beyond
/// its finite end is returned.
pub fn line_search_intercept(dataset: &Dataset, ratios: &[f64], kw: &[f64]) -> f64 {
    let n_t = dataset.n_t();
    let eval = |w0: f64| {
        let h: Vec<f64> = kw.iter().map(|k| k + w0).collect();
        let (t, c) = hinge_means(dataset, ratios, &h);
        (t, c)
    };
    let f = |w0: f64| {
        let (t, c) = eval(w0);
        t.max(c)
    };

    let mut breaks: Vec<f64> = dataset
        .units()
        .iter()
        .zip(kw)
        .enumerate()
        .map(|(k, (u, kwk))| {
            let y = f64::from(u.y_obs);
            if k < n_t {
                y - kwk
            } else {
                -y - kwk
            }
        })
        .collect();
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();

    let mut candidates = breaks.clone();
    for pair in breaks.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        let (tl, cl) = eval(lo);
        let (th, ch) = eval(hi);
        let (dl, dh) = (tl - cl, th - ch);
        if dl * dh < 0.0 {
            candidates.push(lo + (hi - lo) * dl / (dl - dh));
        }
    }
    let values: Vec<(f64, f64)> = candidates.iter().map(|&c| (c, f(c))).collect();
    let fmin = values.iter().map(|v| v.1).fold(f64::INFINITY, f64::min);
    let tie = 1e-12 * (1.0 + fmin.abs());
    let tied = values.iter().filter(|v| v.1 <= fmin + tie).map(|v| v.0);
    let (lo, hi) = tied.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), c| {
        (l.min(c), h.max(c))
    });
    let flat_right = f(hi + 1.0) <= fmin + tie;
    let flat_left = f(lo - 1.0) <= fmin + tie;
    match (flat_left, flat_right) {
        (false, true) => lo + 1.0,
        (true, false) => hi - 1.0,
        _ => 0.5 * (lo + hi),
    }
}

/// Intercept from complementary slackness, averaged over every dual
/// coefficient strictly inside its box, with the primal line search as the
/// fallback when no coefficient is interior.
///
/// `tol` is relative: a coefficient `v` with upper bound `u` counts as
/// interior when `tol·u < v < (1 − tol)·u`.
pub fn recover_intercept(
    dual: &QpSolution,
    dataset: &Dataset,
    kernel: &KernelSpec,
    gamma: f64,
    tol: f64,
) -> Result<(f64, InterceptSource)> {
    check_trainable(dataset, gamma)?;
    let n = dataset.len();
    if dual.x.len() != n + 1 {
        return Err(Error::DimensionMismatch {
            expected: n + 1,
            found: dual.x.len(),
        });
    }
    let gram = gram_matrix(kernel, dataset)?;
    let ratios = dataset.control_ratios()?;
    let (v, alpha) = project_dual(&dual.x, dataset.n_t(), &ratios);
    Ok(intercept_from(dataset, &gram, &ratios, &v, alpha, gamma, tol))
}

fn intercept_from(
    dataset: &Dataset,
    gram: &DMatrix<f64>,
    ratios: &[f64],
    v: &[f64],
    alpha: f64,
    gamma: f64,
    tol: f64,
) -> (f64, InterceptSource) {
    let n_t = dataset.n_t();
    let signs = dataset.dual_signs();
    let kw = kw_at_train(gram, &signs, v, gamma);
    let ub = upper_bounds(n_t, ratios, alpha);
    let candidates: Vec<f64> = dataset
        .units()
        .iter()
        .enumerate()
        .filter(|&(k, _)| ub[k] > 0.0 && v[k] > tol * ub[k] && v[k] < (1.0 - tol) * ub[k])
        .map(|(k, u)| {
            let y = f64::from(u.y_obs);
            if k < n_t {
                y - kw[k]
            } else {
                -y - kw[k]
            }
        })
        .collect();
    if candidates.is_empty() {
        (
            line_search_intercept(dataset, ratios, &kw),
            InterceptSource::PrimalLineSearch,
        )
    } else {
        (
            candidates.iter().sum::<f64>() / candidates.len() as f64,
            InterceptSource::ComplementarySlackness,
        )
    }
}

/// Projects a raw QP iterate onto the dual box: `α` into `[0, 1]`, then each
/// coefficient into `[0, upper bound(α)]`.
fn project_dual(x: &DVector<f64>, n_t: usize, ratios: &[f64]) -> (Vec<f64>, f64) {
    let n = n_t + ratios.len();
    let alpha = x[n].clamp(0.0, 1.0);
    let ub = upper_bounds(n_t, ratios, alpha);
    let v = (0..n).map(|k| x[k].clamp(0.0, ub[k])).collect();
    (v, alpha)
}

/// Fits the model and certifies the solution by its duality gap.
pub fn train(dataset: &Dataset, kernel: &KernelSpec, gamma: f64, tol: f64) -> Result<CausalSvmModel> {
    ensure_valid(dataset)?;
    check_trainable(dataset, gamma)?;
    kernel.validate()?;
    if !(tol > 0.0) {
        return Err(Error::invalid("solver tolerance must be positive"));
    }
    let n_t = dataset.n_t();
    let ratios = dataset.control_ratios()?;
    let gram = gram_matrix(kernel, dataset)?;
    let signed = signed_gram(&gram, dataset)?;
    let problem = assemble_from_signed(dataset, &signed, gamma)?;
    let sol = solve_qp(&problem, &QpSettings::with_tol(tol))?;
    if sol.status == QpStatus::Infeasible {
        return Err(Error::Infeasible);
    }

    let (v, alpha) = project_dual(&sol.x, n_t, &ratios);
    let dual = v.iter().sum::<f64>() - regularizer(&signed, &v, gamma);
    let kw = kw_at_train(&gram, &dataset.dual_signs(), &v, gamma);
    let primal_at = |w0: f64| {
        let h: Vec<f64> = kw.iter().map(|k| k + w0).collect();
        let (t, c) = hinge_means(dataset, &ratios, &h);
        t.max(c) + regularizer(&signed, &v, gamma)
    };

    let tolerance = 1e-4f64.max(10.0 * tol);
    let (mut w0, mut source) =
        intercept_from(dataset, &gram, &ratios, &v, alpha, gamma, DEFAULT_INTERIOR_TOL);
    let mut primal = primal_at(w0);
    if primal - dual > tolerance * (1.0 + primal.abs())
        && source == InterceptSource::ComplementarySlackness
    {
        // Interior coefficients misjudged at the solver's accuracy; the exact
        // line search is the optimal intercept for the recovered w.
        let ls = line_search_intercept(dataset, &ratios, &kw);
        let p = primal_at(ls);
        if p < primal {
            w0 = ls;
            primal = p;
            source = InterceptSource::PrimalLineSearch;
        }
    }
    let gap = primal - dual;
    if gap > tolerance * (1.0 + primal.abs()) || gap < -1e-6 {
        return Err(Error::DualityGap {
            primal,
            dual,
            gap,
            tolerance: tolerance * (1.0 + primal.abs()),
        });
    }

    let (lambda, eta) = v.split_at(n_t);
    Ok(CausalSvmModel {
        train_units: dataset.clone(),
        lambda: lambda.to_vec(),
        eta: eta.to_vec(),
        alpha,
        beta: 1.0 - alpha,
        w0,
        gamma,
        kernel: *kernel,
        dual_objective: dual,
        primal_objective: primal,
        duality_gap: gap,
        intercept_source: source,
        qp_iterations: sol.iterations,
        kkt_residual: sol.kkt_residual,
    })
}

impl CausalSvmModel {
    pub fn dim(&self) -> usize {
        self.train_units.dim()
    }

    /// `K(w, x)` without the intercept.
    pub fn kernel_expansion(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        let units = self.train_units.units();
        let (tr, ct) = units.split_at(self.lambda.len());
        let mut s = 0.0;
        for (u, l) in tr.iter().zip(&self.lambda) {
            if *l != 0.0 {
                s += l * f64::from(u.y_obs) * self.kernel.eval(&u.features, x);
            }
        }
        for (u, e) in ct.iter().zip(&self.eta) {
            if *e != 0.0 {
                s -= e * f64::from(u.y_obs) * self.kernel.eval(&u.features, x);
            }
        }
        Ok(s / (2.0 * self.gamma))
    }

    /// `γ K(w, w)`.
    pub fn regularization_term(&self) -> Result<f64> {
        let gram = gram_matrix(&self.kernel, &self.train_units)?;
        let signed = signed_gram(&gram, &self.train_units)?;
        let v = coefficient_vector(&self.train_units, &self.lambda, &self.eta)?;
        Ok(regularizer(&signed, &v, self.gamma))
    }
}

/// `h(x) = w0 + K(w, x)`.
pub fn decision_value(model: &CausalSvmModel, x: &[f64]) -> Result<f64> {
    Ok(model.w0 + model.kernel_expansion(x)?)
}

/// Threshold `h(x)` at `±θ`; values exactly at a threshold are decided.
pub fn label_from_value(h: f64, theta: f64) -> EffectLabel {
    if h >= theta {
        EffectLabel::Positive
    } else if h <= -theta {
        EffectLabel::Negative
    } else {
        EffectLabel::Neutral
    }
}

pub fn predict_effect(model: &CausalSvmModel, x: &[f64], theta: f64) -> Result<EffectLabel> {
    if !(theta > 0.0) {
        return Err(Error::invalid(format!("θ must be positive, got {theta}")));
    }
    Ok(label_from_value(decision_value(model, x)?, theta))
}

/// Canonical indices of treatment and control support vectors.
///
/// `tol = None` uses `1e-7 ·` the largest coefficient.
pub fn support_vectors(model: &CausalSvmModel, tol: Option<f64>) -> (Vec<usize>, Vec<usize>) {
    let max = model
        .lambda
        .iter()
        .chain(&model.eta)
        .fold(0.0f64, |m, v| m.max(*v));
    let tol = tol.unwrap_or(1e-7 * max);
    let n_t = model.lambda.len();
    let t = (0..n_t).filter(|&i| model.lambda[i] > tol).collect();
    let c = (0..model.eta.len())
        .filter(|&j| model.eta[j] > tol)
        .map(|j| n_t + j)
        .collect();
    (t, c)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveRecord {
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
}

/// On-disk form of a trained model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelJson {
    pub format_version: u32,
    pub kernel: KernelSpec,
    pub gamma: f64,
    pub w0: f64,
    pub alpha: f64,
    pub beta: f64,
    pub lambda: Vec<f64>,
    pub eta: Vec<f64>,
    pub train_features: Vec<Vec<f64>>,
    pub train_labels: Vec<i8>,
    pub train_groups: Vec<Group>,
    pub ratios: Vec<Option<f64>>,
    pub objective: ObjectiveRecord,
    #[serde(default = "default_source")]
    pub intercept_source: InterceptSource,
}

fn default_source() -> InterceptSource {
    InterceptSource::ComplementarySlackness
}

impl From<&CausalSvmModel> for ModelJson {
    fn from(m: &CausalSvmModel) -> Self {
        let units = m.train_units.units();
        ModelJson {
            format_version: FORMAT_VERSION,
            kernel: m.kernel,
            gamma: m.gamma,
            w0: m.w0,
            alpha: m.alpha,
            beta: m.beta,
            lambda: m.lambda.clone(),
            eta: m.eta.clone(),
            train_features: units.iter().map(|u| u.features.clone()).collect(),
            train_labels: units.iter().map(|u| u.y_obs).collect(),
            train_groups: units.iter().map(|u| u.group).collect(),
            ratios: units.iter().map(|u| u.ratio).collect(),
            objective: ObjectiveRecord {
                primal: m.primal_objective,
                dual: m.dual_objective,
                gap: m.duality_gap,
            },
            intercept_source: m.intercept_source,
        }
    }
}

impl TryFrom<ModelJson> for CausalSvmModel {
    type Error = Error;

    fn try_from(j: ModelJson) -> Result<Self> {
        if j.format_version != FORMAT_VERSION {
            return Err(Error::Parse(format!(
                "unsupported model format_version {}",
                j.format_version
            )));
        }
        let n = j.train_features.len();
        if j.train_labels.len() != n || j.train_groups.len() != n || j.ratios.len() != n {
            return Err(Error::Parse("model arrays have inconsistent lengths".into()));
        }
        let units: Vec<Unit> = (0..n)
            .map(|k| {
                let mut u = Unit::new(j.train_features[k].clone(), j.train_groups[k], j.train_labels[k]);
                u.ratio = j.ratios[k];
                u
            })
            .collect();
        let train_units = Dataset::new(units);
        if train_units.units().iter().map(|u| u.group).ne(j.train_groups.iter().copied()) {
            return Err(Error::Parse("model training units are not in canonical order".into()));
        }
        if j.lambda.len() != train_units.n_t() || j.eta.len() != train_units.n_c() {
            return Err(Error::Parse("coefficient counts do not match the group sizes".into()));
        }
        j.kernel.validate()?;
        check_gamma(j.gamma)?;
        Ok(CausalSvmModel {
            train_units,
            lambda: j.lambda,
            eta: j.eta,
            alpha: j.alpha,
            beta: j.beta,
            w0: j.w0,
            gamma: j.gamma,
            kernel: j.kernel,
            dual_objective: j.objective.dual,
            primal_objective: j.objective.primal,
            duality_gap: j.objective.gap,
            intercept_source: j.intercept_source,
            qp_iterations: 0,
            kkt_residual: 0.0,
        })
    }
}

impl CausalSvmModel {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&ModelJson::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let j: ModelJson = serde_json::from_str(text)?;
        j.try_into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> Dataset {
        Dataset::new(vec![
            Unit::new(vec![1.0], Group::Treatment, 1),
            Unit::new(vec![-1.0], Group::Control, -1).with_ratio(1.0),
        ])
    }

    fn small(n_t: usize, n_c: usize) -> Dataset {
        let mut units = Vec::new();
        for i in 0..n_t {
            let x = i as f64 * 0.7 - 0.4;
            units.push(Unit::new(vec![x, (x * 3.1).sin()], Group::Treatment, if i % 2 == 0 { 1 } else { -1 }));
        }
        for j in 0..n_c {
            let x = j as f64 * 0.55 - 0.2;
            units.push(
                Unit::new(vec![x, (x * 1.7).cos()], Group::Control, if j % 3 == 0 { 1 } else { -1 })
                    .with_ratio(0.8 + 0.1 * j as f64),
            );
        }
        Dataset::new(units)
    }

    #[test]
    fn dual_shape() {
        let prob = assemble_dual(&small(2, 3), &KernelSpec::Linear, 1.0).unwrap();
        assert_eq!(prob.num_vars(), 6);
        assert_eq!(prob.num_eq(), 1);
    }

    #[test]
    fn zero_with_half_alpha_is_feasible() {
        let prob = assemble_dual(&small(2, 3), &KernelSpec::Linear, 1.0).unwrap();
        let mut x = DVector::zeros(6);
        x[5] = 0.5;
        let slack = &prob.b - &prob.a * &x;
        assert!(slack.iter().all(|s| *s >= 0.0));
        assert!((&prob.e * &x - &prob.d).amax() == 0.0);
    }

    #[test]
    fn quadratic_term_is_half_over_gamma_signed_gram() {
        let ds = small(2, 2);
        let kernel = KernelSpec::Rbf { inv_width: 0.3 };
        let gamma = 0.25;
        let prob = assemble_dual(&ds, &kernel, gamma).unwrap();
        let signs = ds.dual_signs();
        for i in 0..4 {
            for j in 0..4 {
                let k = kernel.eval(&ds.units()[i].features, &ds.units()[j].features);
                let expected = signs[i] * signs[j] * k / (2.0 * gamma);
                assert!((prob.p[(i, j)] - expected).abs() < 1e-15);
            }
            assert_eq!(prob.p[(i, 4)], 0.0);
        }
    }

    #[test]
    fn rejects_missing_ratio_and_bad_gamma() {
        let ds = Dataset::new(vec![
            Unit::new(vec![1.0], Group::Treatment, 1),
            Unit::new(vec![-1.0], Group::Control, -1),
        ]);
        assert!(matches!(
            assemble_dual(&ds, &KernelSpec::Linear, 1.0),
            Err(Error::MissingRatio { .. })
        ));
        assert!(assemble_dual(&toy(), &KernelSpec::Linear, 0.0).is_err());
    }

    #[test]
    fn toy_positive_effect() {
        let m = train(&toy(), &KernelSpec::Linear, 1.0, 1e-8).unwrap();
        assert!(m.primal_objective <= 1e-6, "{}", m.primal_objective);
        assert!(decision_value(&m, &[1.0]).unwrap() >= 1.0);
        assert!(decision_value(&m, &[-1.0]).unwrap() >= 1.0);
        for k in 0..=40 {
            let x = -2.0 + 0.1 * k as f64;
            assert_eq!(predict_effect(&m, &[x], 1.0).unwrap(), EffectLabel::Positive);
        }
    }

    #[test]
    fn zero_coefficients_give_constant() {
        let ds = small(3, 3);
        let obj = primal_objective(&ds, &KernelSpec::Linear, 1.0, &[0.0; 3], &[0.0; 3], 0.0).unwrap();
        // treatment hinge mean is 1; control hinge mean is the mean of 1/ratio
        let c: f64 = ds.control_ratios().unwrap().iter().map(|r| 1.0 / r).sum::<f64>() / 3.0;
        assert!((obj - c.max(1.0)).abs() < 1e-15);
    }

    #[test]
    fn threshold_boundaries() {
        assert_eq!(label_from_value(1.0, 1.0), EffectLabel::Positive);
        assert_eq!(label_from_value(0.0, 0.3), EffectLabel::Neutral);
        assert_eq!(label_from_value(-2.0, 1.0), EffectLabel::Negative);
        assert_eq!(label_from_value(-1.0, 1.0), EffectLabel::Negative);
    }

    #[test]
    fn trained_model_invariants_and_round_trip() {
        let ds = small(6, 7);
        let m = train(&ds, &KernelSpec::Rbf { inv_width: 0.5 }, 0.01, 1e-8).unwrap();
        assert!((m.alpha + m.beta - 1.0).abs() < 1e-9);
        let eq: f64 = m
            .lambda
            .iter()
            .zip(ds.treatment())
            .map(|(l, u)| l * f64::from(u.y_obs))
            .sum::<f64>()
            - m.eta.iter().zip(ds.control()).map(|(e, u)| e * f64::from(u.y_obs)).sum::<f64>();
        assert!(eq.abs() <= 1e-6);
        assert!(m.duality_gap >= -1e-6);

        let back = CausalSvmModel::from_json(&m.to_json().unwrap()).unwrap();
        for u in ds.units() {
            let a = decision_value(&m, &u.features).unwrap();
            let b = decision_value(&back, &u.features).unwrap();
            assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn huge_gamma_gives_nearly_constant_predictor() {
        let ds = small(5, 5);
        let m = train(&ds, &KernelSpec::Rbf { inv_width: 1.0 }, 1e6, 1e-8).unwrap();
        let vals: Vec<f64> = ds.units().iter().map(|u| m.kernel_expansion(&u.features).unwrap()).collect();
        assert!(vals.iter().all(|v| v.abs() < 1e-6), "{vals:?}");
    }

    #[test]
    fn support_vectors_of_zero_model_are_empty() {
        let mut m = train(&toy(), &KernelSpec::Linear, 1.0, 1e-8).unwrap();
        m.lambda = vec![0.0];
        m.eta = vec![0.0];
        assert_eq!(support_vectors(&m, None), (vec![], vec![]));
    }
}
