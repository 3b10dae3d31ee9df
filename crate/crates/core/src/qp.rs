//! Dense convex quadratic programming.
//!
//! Problems are posed as
//!
//! ```text
//! minimize    ½ xᵀPx + qᵀx
//! subject to  A x ≤ b
//!             E x = d
//! ```
//!
//! and solved with a Mehrotra predictor-corrector primal-dual interior-point
//! method. Newton systems are reduced to the normal matrix `P + AᵀWA`
//! (formed from the sparse rows of `A`), factored by Cholesky with a small
//! diagonal shift, and polished by iterative refinement against the unshifted
//! system. Equality constraints are eliminated through their Schur complement.
//!
//! A solution is reported `Optimal` only when the independently recomputed
//! [`kkt_residuals`] are all within the requested tolerance.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Eigenvalues down to this value are accepted as numerically PSD.
pub const PSD_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct QpProblem {
    pub p: DMatrix<f64>,
    pub q: DVector<f64>,
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub e: DMatrix<f64>,
    pub d: DVector<f64>,
}

impl QpProblem {
    /// Checks shapes and symmetry of `P`. Positive semidefiniteness is not
    /// checked here (it costs an eigendecomposition); see [`min_eigenvalue`](Self::min_eigenvalue).
    pub fn new(
        p: DMatrix<f64>,
        q: DVector<f64>,
        a: DMatrix<f64>,
        b: DVector<f64>,
        e: DMatrix<f64>,
        d: DVector<f64>,
    ) -> Result<Self> {
        let n = q.len();
        let shape_err = |what: &str| Error::invalid(format!("QP shape mismatch: {what}"));
        if p.nrows() != n || p.ncols() != n {
            return Err(shape_err("P must be n×n"));
        }
        if a.ncols() != n || a.nrows() != b.len() {
            return Err(shape_err("A must be m×n with len(b) = m"));
        }
        if e.ncols() != n || e.nrows() != d.len() {
            return Err(shape_err("E must be p×n with len(d) = p"));
        }
        let scale = p.amax().max(1.0);
        for i in 0..n {
            for j in 0..i {
                if (p[(i, j)] - p[(j, i)]).abs() > 1e-12 * scale {
                    return Err(Error::invalid(format!("P is not symmetric at ({i}, {j})")));
                }
            }
        }
        let all_finite = p.iter().chain(q.iter()).chain(a.iter()).chain(b.iter()).chain(e.iter()).chain(d.iter()).all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::invalid("QP data contains non-finite values"));
        }
        Ok(QpProblem { p, q, a, b, e, d })
    }

    /// Problem with inequality constraints only.
    pub fn inequality(p: DMatrix<f64>, q: DVector<f64>, a: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        let n = q.len();
        Self::new(p, q, a, b, DMatrix::zeros(0, n), DVector::zeros(0))
    }

    pub fn num_vars(&self) -> usize {
        self.q.len()
    }

    pub fn num_ineq(&self) -> usize {
        self.b.len()
    }

    pub fn num_eq(&self) -> usize {
        self.d.len()
    }

    pub fn objective(&self, x: &DVector<f64>) -> f64 {
        0.5 * x.dot(&(&self.p * x)) + self.q.dot(x)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        if self.num_vars() == 0 {
            return 0.0;
        }
        self.p.clone().symmetric_eigenvalues().min()
    }

    pub fn is_psd(&self) -> bool {
        self.min_eigenvalue() >= -PSD_TOLERANCE
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QpStatus {
    Optimal,
    MaxIter,
    Infeasible,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QpSettings {
    pub tol: f64,
    pub max_iter: usize,
    /// Stop after this many iterations without a 10% reduction of the KKT residual.
    pub stall_iterations: usize,
}

impl Default for QpSettings {
    fn default() -> Self {
        QpSettings {
            tol: 1e-8,
            max_iter: 100_000,
            stall_iterations: 30,
        }
    }
}

impl QpSettings {
    pub fn with_tol(tol: f64) -> Self {
        QpSettings {
            tol,
            ..Self::default()
        }
    }
}

/// Solver identification recorded alongside every solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverInfo {
    pub algorithm: String,
    pub scaling: String,
}

impl Default for SolverInfo {
    fn default() -> Self {
        SolverInfo {
            algorithm: "mehrotra-predictor-corrector-ipm/dense-cholesky".into(),
            scaling: "none".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QpSolution {
    pub x: DVector<f64>,
    pub objective: f64,
    pub ineq_multipliers: DVector<f64>,
    pub eq_multipliers: DVector<f64>,
    pub kkt_residual: f64,
    pub iterations: usize,
    pub status: QpStatus,
    /// Complementarity measure `sᵀz / m` after each iteration.
    pub mu_history: Vec<f64>,
    pub info: SolverInfo,
}

/// Max-norm KKT residuals, recomputed from `(x, μ, ν)` alone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KktResiduals {
    /// `‖Px + q + Aᵀμ + Eᵀν‖∞`
    pub stationarity: f64,
    /// `max(max_i (Ax − b)_i⁺, ‖Ex − d‖∞)`
    pub primal: f64,
    /// `max_i (−μ_i)⁺`
    pub dual: f64,
    /// `max_i |μ_i (Ax − b)_i|`
    pub complementarity: f64,
}

impl KktResiduals {
    pub fn max(&self) -> f64 {
        self.stationarity
            .max(self.primal)
            .max(self.dual)
            .max(self.complementarity)
    }
}

fn residuals_of(
    prob: &QpProblem,
    x: &DVector<f64>,
    mu: &DVector<f64>,
    nu: &DVector<f64>,
) -> KktResiduals {
    let grad = &prob.p * x + &prob.q + prob.a.tr_mul(mu) + prob.e.tr_mul(nu);
    let ax_b = &prob.a * x - &prob.b;
    let ex_d = &prob.e * x - &prob.d;
    let primal_ineq = ax_b.iter().fold(0.0f64, |m, v| m.max(*v));
    let primal_eq = ex_d.amax();
    let dual = mu.iter().fold(0.0f64, |m, v| m.max(-v));
    let comp = mu
        .iter()
        .zip(ax_b.iter())
        .fold(0.0f64, |m, (u, r)| m.max((u * r).abs()));
    KktResiduals {
        stationarity: if grad.is_empty() { 0.0 } else { grad.amax() },
        primal: primal_ineq.max(if ex_d.is_empty() { 0.0 } else { primal_eq }),
        dual,
        complementarity: comp,
    }
}

pub fn kkt_residuals(problem: &QpProblem, solution: &QpSolution) -> Result<KktResiduals> {
    let check = |expected: usize, found: usize| {
        if expected == found {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected, found })
        }
    };
    check(problem.num_vars(), solution.x.len())?;
    check(problem.num_ineq(), solution.ineq_multipliers.len())?;
    check(problem.num_eq(), solution.eq_multipliers.len())?;
    Ok(residuals_of(
        problem,
        &solution.x,
        &solution.ineq_multipliers,
        &solution.eq_multipliers,
    ))
}

/// Row-compressed copy of the inequality matrix.
struct SparseRows {
    rows: Vec<Vec<(usize, f64)>>,
    ncols: usize,
}

impl SparseRows {
    fn from_dense(a: &DMatrix<f64>) -> Self {
        let rows = (0..a.nrows())
            .map(|i| {
                (0..a.ncols())
                    .filter_map(|j| {
                        let v = a[(i, j)];
                        (v != 0.0).then_some((j, v))
                    })
                    .collect()
            })
            .collect();
        SparseRows {
            rows,
            ncols: a.ncols(),
        }
    }

    fn mul(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(
            self.rows.len(),
            self.rows
                .iter()
                .map(|r| r.iter().map(|&(j, v)| v * x[j]).sum::<f64>()),
        )
    }

    fn tr_mul(&self, y: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.ncols);
        for (r, &yi) in self.rows.iter().zip(y.iter()) {
            if yi != 0.0 {
                for &(j, v) in r {
                    out[j] += v * yi;
                }
            }
        }
        out
    }

    /// `target += Aᵀ diag(w) A`
    fn add_weighted_gram(&self, w: &DVector<f64>, target: &mut DMatrix<f64>) {
        for (r, &wi) in self.rows.iter().zip(w.iter()) {
            for &(j, vj) in r {
                let s = wi * vj;
                for &(k, vk) in r {
                    target[(j, k)] += s * vk;
                }
            }
        }
    }
}

/// Factored reduced KKT system `[H Eᵀ; E 0]` for one interior-point iteration.
struct NewtonSystem<'a> {
    prob: &'a QpProblem,
    a: &'a SparseRows,
    w: DVector<f64>,
    chol: Cholesky<f64, Dyn>,
    /// `H⁻¹ Eᵀ`
    h_inv_et: DMatrix<f64>,
    schur: Option<nalgebra::LU<f64, Dyn, Dyn>>,
}

impl<'a> NewtonSystem<'a> {
    fn factor(prob: &'a QpProblem, a: &'a SparseRows, w: DVector<f64>) -> Result<Self> {
        let n = prob.num_vars();
        let mut h = prob.p.clone();
        a.add_weighted_gram(&w, &mut h);
        let diag_scale = (0..n).fold(1.0f64, |m, i| m.max(h[(i, i)].abs()));
        let mut shift = 1e-14 * diag_scale;
        let chol = loop {
            let mut hs = h.clone();
            for i in 0..n {
                hs[(i, i)] += shift;
            }
            if let Some(c) = Cholesky::new(hs) {
                break c;
            }
            shift *= 100.0;
            if shift > 1e-2 * diag_scale {
                return Err(Error::Numerical(
                    "interior-point normal matrix could not be factored".into(),
                ));
            }
        };
        let et = prob.e.transpose();
        let h_inv_et = chol.solve(&et);
        let schur = if prob.num_eq() > 0 {
            let s = &prob.e * &h_inv_et;
            Some(s.lu())
        } else {
            None
        };
        Ok(NewtonSystem {
            prob,
            a,
            w,
            chol,
            h_inv_et,
            schur,
        })
    }

    fn apply_h(&self, v: &DVector<f64>) -> DVector<f64> {
        let av = self.a.mul(v).component_mul(&self.w);
        &self.prob.p * v + self.a.tr_mul(&av)
    }

    fn solve_once(&self, rx: &DVector<f64>, re: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        let hx = self.chol.solve(rx);
        match &self.schur {
            None => (hx, DVector::zeros(0)),
            Some(lu) => {
                let rhs = &self.prob.e * &hx - re;
                let dy = lu.solve(&rhs).unwrap_or_else(|| DVector::zeros(re.len()));
                let dx = hx - &self.h_inv_et * &dy;
                (dx, dy)
            }
        }
    }

    /// Solves `H dx + Eᵀ dy = rx`, `E dx = re` with refinement against the
    /// unshifted `H`.
    fn solve(&self, rx: &DVector<f64>, re: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        let (mut dx, mut dy) = self.solve_once(rx, re);
        for _ in 0..3 {
            let res_x = rx - self.apply_h(&dx) - self.prob.e.tr_mul(&dy);
            let res_e = re - &self.prob.e * &dx;
            let scale = rx.amax().max(if re.is_empty() { 0.0 } else { re.amax() }).max(1e-300);
            let err = res_x.amax().max(if res_e.is_empty() { 0.0 } else { res_e.amax() });
            if err <= 1e-15 * scale {
                break;
            }
            let (cx, cy) = self.solve_once(&res_x, &res_e);
            dx += cx;
            dy += cy;
        }
        (dx, dy)
    }
}

fn max_step(v: &DVector<f64>, dv: &DVector<f64>) -> f64 {
    v.iter()
        .zip(dv.iter())
        .filter(|(_, d)| **d < 0.0)
        .fold(1.0f64, |a, (x, d)| a.min(-x / d))
}

struct Iterate {
    x: DVector<f64>,
    s: DVector<f64>,
    z: DVector<f64>,
    y: DVector<f64>,
}

/// Solves a convex QP to the requested KKT tolerance.
pub fn solve_qp(problem: &QpProblem, settings: &QpSettings) -> Result<QpSolution> {
    if !(settings.tol > 0.0) {
        return Err(Error::invalid("QP tolerance must be positive"));
    }
    let m = problem.num_ineq();
    let p_eq = problem.num_eq();
    let a = SparseRows::from_dense(&problem.a);

    // Starting point: least-squares compromise between stationarity and the
    // inequality right-hand sides, then shifted into the interior.
    let init = NewtonSystem::factor(problem, &a, DVector::from_element(m, 1.0))?;
    let (x0, _) = init.solve(&(a.tr_mul(&problem.b) - &problem.q), &problem.d);
    let slack0 = &problem.b - a.mul(&x0);
    let mut it = Iterate {
        s: slack0.map(|v| v.max(1.0)),
        z: DVector::from_element(m, 1.0),
        y: DVector::zeros(p_eq),
        x: x0,
    };

    let mut best: Option<(f64, DVector<f64>, DVector<f64>, DVector<f64>)> = None;
    let mut best_at = 0usize;
    let mut mu_history = Vec::new();
    let mut status = QpStatus::MaxIter;
    let mut iterations = 0;

    for iter in 0..settings.max_iter {
        iterations = iter;
        let kkt = residuals_of(problem, &it.x, &it.z, &it.y).max();
        let improved = best.as_ref().is_none_or(|b| kkt < 0.9 * b.0);
        if best.as_ref().is_none_or(|b| kkt < b.0) {
            best = Some((kkt, it.x.clone(), it.z.clone(), it.y.clone()));
        }
        if improved {
            best_at = iter;
        }
        if kkt <= settings.tol {
            status = QpStatus::Optimal;
            break;
        }
        if infeasibility_certificate(problem, &a, &it) {
            status = QpStatus::Infeasible;
            break;
        }
        if iter - best_at > settings.stall_iterations {
            break;
        }

        let r_d = &problem.p * &it.x + &problem.q + a.tr_mul(&it.z) + problem.e.tr_mul(&it.y);
        let r_p = a.mul(&it.x) + &it.s - &problem.b;
        let r_e = &problem.e * &it.x - &problem.d;
        let mu = if m > 0 { it.s.dot(&it.z) / m as f64 } else { 0.0 };

        let w = it.z.component_div(&it.s);
        let sys = match NewtonSystem::factor(problem, &a, w) {
            Ok(s) => s,
            Err(_) => break,
        };
        let zr_p = it.z.component_mul(&r_p);

        let direction = |r_c: &DVector<f64>| {
            let t = (&zr_p - r_c).component_div(&it.s);
            let rx = -&r_d - a.tr_mul(&t);
            let (dx, dy) = sys.solve(&rx, &(-&r_e));
            let adx = a.mul(&dx);
            let dz = sys.w.component_mul(&adx) + &t;
            let ds = -&r_p - adx;
            (dx, ds, dz, dy)
        };

        // predictor
        let sz = it.s.component_mul(&it.z);
        let (_, ds_a, dz_a, _) = direction(&sz);
        let step_a = max_step(&it.s, &ds_a).min(max_step(&it.z, &dz_a));
        let mu_aff = if m > 0 {
            (&it.s + step_a * &ds_a).dot(&(&it.z + step_a * &dz_a)) / m as f64
        } else {
            0.0
        };
        let sigma = if mu > 0.0 { (mu_aff / mu).powi(3).min(1.0) } else { 0.0 };

        // corrector
        let r_c = sz + ds_a.component_mul(&dz_a) - DVector::from_element(m, sigma * mu);
        let (dx, ds, dz, dy) = direction(&r_c);
        let step_max = max_step(&it.s, &ds).min(max_step(&it.z, &dz));
        let step = (0.99 * step_max).min(1.0);

        it.x += step * dx;
        it.s += step * ds;
        it.z += step * dz;
        it.y += step * dy;
        mu_history.push(if m > 0 { it.s.dot(&it.z) / m as f64 } else { 0.0 });
        iterations = iter + 1;
    }

    let (kkt, x, z, y) = match status {
        QpStatus::Optimal | QpStatus::Infeasible => {
            let k = residuals_of(problem, &it.x, &it.z, &it.y).max();
            (k, it.x, it.z, it.y)
        }
        QpStatus::MaxIter => {
            let (k, x, z, y) = best.expect("at least one iterate was evaluated");
            let final_k = residuals_of(problem, &it.x, &it.z, &it.y).max();
            if final_k <= k {
                (final_k, it.x, it.z, it.y)
            } else {
                (k, x, z, y)
            }
        }
    };
    let status = if status == QpStatus::MaxIter && kkt <= settings.tol {
        QpStatus::Optimal
    } else {
        status
    };
    Ok(QpSolution {
        objective: problem.objective(&x),
        x,
        ineq_multipliers: z,
        eq_multipliers: y,
        kkt_residual: kkt,
        iterations,
        status,
        mu_history,
        info: SolverInfo::default(),
    })
}

/// Farkas-type test on the normalized dual iterate: `Aᵀz + Eᵀy ≈ 0` with
/// `bᵀz + dᵀy < 0` proves `{Ax ≤ b, Ex = d}` empty.
fn infeasibility_certificate(prob: &QpProblem, a: &SparseRows, it: &Iterate) -> bool {
    let norm = it
        .z
        .amax()
        .max(if it.y.is_empty() { 0.0 } else { it.y.amax() });
    if norm < 1e6 {
        return false;
    }
    let z = &it.z / norm;
    let y = &it.y / norm;
    let combo = a.tr_mul(&z) + prob.e.tr_mul(&y);
    let gap = prob.b.dot(&z) + prob.d.dot(&y);
    let scale = 1.0 + prob.b.amax().max(if prob.d.is_empty() { 0.0 } else { prob.d.amax() });
    combo.amax() <= 1e-9 * (1.0 + prob.a.amax()) && gap < -1e-6 * scale
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dm(r: usize, c: usize, v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_row_slice(r, c, v)
    }
    fn dv(v: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(v)
    }

    fn single_bound() -> QpProblem {
        // min x² s.t. x ≥ 1
        QpProblem::inequality(dm(1, 1, &[2.0]), dv(&[0.0]), dm(1, 1, &[-1.0]), dv(&[-1.0])).unwrap()
    }

    #[test]
    fn scalar_bound_constrained() {
        let prob = single_bound();
        let sol = solve_qp(&prob, &QpSettings::default()).unwrap();
        assert_eq!(sol.status, QpStatus::Optimal);
        assert!((sol.x[0] - 1.0).abs() < 1e-7);
        assert!((sol.objective - 1.0).abs() < 1e-7);
        assert!((sol.ineq_multipliers[0] - 2.0).abs() < 1e-6);
        assert!(sol.kkt_residual <= 1e-8);
    }

    #[test]
    fn equality_projection() {
        // min ½‖x‖² s.t. x1 + x2 = 1
        let prob = QpProblem::new(
            DMatrix::identity(2, 2),
            dv(&[0.0, 0.0]),
            DMatrix::zeros(0, 2),
            DVector::zeros(0),
            dm(1, 2, &[1.0, 1.0]),
            dv(&[1.0]),
        )
        .unwrap();
        let sol = solve_qp(&prob, &QpSettings::default()).unwrap();
        assert_eq!(sol.status, QpStatus::Optimal);
        assert!((sol.x[0] - 0.5).abs() < 1e-10 && (sol.x[1] - 0.5).abs() < 1e-10);
    }

    #[test]
    fn analytic_solution_has_zero_residuals() {
        let prob = single_bound();
        let exact = QpSolution {
            x: dv(&[1.0]),
            objective: 1.0,
            ineq_multipliers: dv(&[2.0]),
            eq_multipliers: DVector::zeros(0),
            kkt_residual: 0.0,
            iterations: 0,
            status: QpStatus::Optimal,
            mu_history: vec![],
            info: SolverInfo::default(),
        };
        let r = kkt_residuals(&prob, &exact).unwrap();
        assert!(r.max() <= 1e-12);

        let mut off = exact.clone();
        off.x[0] = 1.1;
        let r = kkt_residuals(&prob, &off).unwrap();
        assert!(r.primal.max(r.stationarity) >= 0.05, "{r:?}");

        let mut off = exact;
        off.x[0] = 0.9;
        let r = kkt_residuals(&prob, &off).unwrap();
        assert!(r.primal.max(r.stationarity) >= 0.05, "{r:?}");
    }

    #[test]
    fn unconstrained_minimizer_is_stationary() {
        let p = dm(2, 2, &[4.0, 1.0, 1.0, 3.0]);
        let q = dv(&[1.0, -2.0]);
        let x = -p.clone().lu().solve(&q).unwrap();
        let prob = QpProblem::inequality(p, q, DMatrix::zeros(0, 2), DVector::zeros(0)).unwrap();
        let sol = QpSolution {
            objective: prob.objective(&x),
            x,
            ineq_multipliers: DVector::zeros(0),
            eq_multipliers: DVector::zeros(0),
            kkt_residual: 0.0,
            iterations: 0,
            status: QpStatus::Optimal,
            mu_history: vec![],
            info: SolverInfo::default(),
        };
        assert!(kkt_residuals(&prob, &sol).unwrap().stationarity < 1e-14);
        let solved = solve_qp(&prob, &QpSettings::default()).unwrap();
        assert_eq!(solved.status, QpStatus::Optimal);
        assert!((solved.x - sol.x).amax() < 1e-9);
    }

    #[test]
    fn contradictory_bounds_are_infeasible() {
        // x ≥ 1 and x ≤ 0
        let prob =
            QpProblem::inequality(dm(1, 1, &[1.0]), dv(&[0.0]), dm(2, 1, &[-1.0, 1.0]), dv(&[-1.0, 0.0]))
                .unwrap();
        let sol = solve_qp(&prob, &QpSettings::default()).unwrap();
        assert_eq!(sol.status, QpStatus::Infeasible);
    }

    #[test]
    fn residual_dimension_checks() {
        let prob = single_bound();
        let mut sol = solve_qp(&prob, &QpSettings::default()).unwrap();
        sol.x = dv(&[1.0, 2.0]);
        assert!(kkt_residuals(&prob, &sol).is_err());
    }

    #[test]
    fn shape_and_symmetry_validation() {
        assert!(QpProblem::inequality(dm(1, 2, &[1.0, 0.0]), dv(&[0.0]), DMatrix::zeros(0, 1), DVector::zeros(0)).is_err());
        assert!(QpProblem::inequality(dm(2, 2, &[1.0, 2.0, 0.0, 1.0]), dv(&[0.0, 0.0]), DMatrix::zeros(0, 2), DVector::zeros(0)).is_err());
        let indefinite = QpProblem::inequality(dm(2, 2, &[1.0, 0.0, 0.0, -1.0]), dv(&[0.0, 0.0]), DMatrix::zeros(0, 2), DVector::zeros(0)).unwrap();
        assert!(!indefinite.is_psd());
    }

    #[test]
    fn deterministic() {
        let prob = single_bound();
        let a = solve_qp(&prob, &QpSettings::default()).unwrap();
        let b = solve_qp(&prob, &QpSettings::default()).unwrap();
        assert_eq!(a, b);
    }
}
