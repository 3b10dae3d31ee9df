//! Interior-point solver checked against independent reference solutions.

use causal_svm::qp::{kkt_residuals, solve_qp, QpProblem, QpSettings, QpStatus};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

fn random_box_qp(seed: u64, n: usize) -> (DMatrix<f64>, DVector<f64>, DVector<f64>, DVector<f64>) {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let m = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let p = &m * m.transpose() + DMatrix::identity(n, n) * 0.1;
    let q = DVector::from_fn(n, |_, _| rng.random_range(-3.0..3.0));
    let lo = DVector::from_fn(n, |_, _| rng.random_range(-1.0..0.0));
    let hi = DVector::from_fn(n, |i, _| lo[i] + rng.random_range(0.2..2.0));
    (p, q, lo, hi)
}

fn box_problem(p: &DMatrix<f64>, q: &DVector<f64>, lo: &DVector<f64>, hi: &DVector<f64>) -> QpProblem {
    let n = q.len();
    let mut a = DMatrix::zeros(2 * n, n);
    let mut b = DVector::zeros(2 * n);
    for i in 0..n {
        a[(2 * i, i)] = 1.0;
        b[2 * i] = hi[i];
        a[(2 * i + 1, i)] = -1.0;
        b[2 * i + 1] = -lo[i];
    }
    QpProblem::inequality(p.clone(), q.clone(), a, b).unwrap()
}

/// Projected gradient with step 1/L, run to a fixed point.
fn projected_gradient(p: &DMatrix<f64>, q: &DVector<f64>, lo: &DVector<f64>, hi: &DVector<f64>) -> DVector<f64> {
    let lipschitz = p.clone().symmetric_eigen().eigenvalues.max();
    let project = |x: DVector<f64>| DVector::from_fn(x.len(), |i, _| x[i].clamp(lo[i], hi[i]));
    let mut x = project(DVector::zeros(q.len()));
    for _ in 0..200_000 {
        let next = project(&x - (p * &x + q) / lipschitz);
        let moved = (&next - &x).amax();
        x = next;
        if moved < 1e-15 {
            break;
        }
    }
    x
}

#[test]
fn box_qp_matches_projected_gradient() {
    for seed in 0..10 {
        let (p, q, lo, hi) = random_box_qp(seed, 10);
        let sol = solve_qp(&box_problem(&p, &q, &lo, &hi), &QpSettings::default()).unwrap();
        assert_eq!(sol.status, QpStatus::Optimal);
        let reference = projected_gradient(&p, &q, &lo, &hi);
        let err = (&sol.x - &reference).amax();
        assert!(err <= 1e-5, "seed {seed}: |x − x_ref| = {err:e}");
    }
}

#[test]
fn tighter_tolerance_changes_objective_by_less_than_ten_tol() {
    for seed in 20..30 {
        let (p, q, lo, hi) = random_box_qp(seed, 10);
        let problem = box_problem(&p, &q, &lo, &hi);
        for tol in [1e-4, 1e-6, 1e-8] {
            let coarse = solve_qp(&problem, &QpSettings::with_tol(tol)).unwrap();
            let fine = solve_qp(&problem, &QpSettings::with_tol(tol / 10.0)).unwrap();
            let diff = (coarse.objective - fine.objective).abs();
            assert!(diff <= 10.0 * tol, "seed {seed}, tol {tol}: Δobjective {diff:e}");
        }
    }
}

#[test]
fn equality_constrained_qp_matches_kkt_system() {
    // min ½xᵀPx + qᵀx s.t. Ex = d has the closed-form KKT solution
    let mut rng = ChaCha20Rng::seed_from_u64(7);
    let n = 6;
    let m = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let p = &m * m.transpose() + DMatrix::identity(n, n);
    let q = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
    let e = DMatrix::from_fn(2, n, |_, _| rng.random_range(-1.0..1.0));
    let d = DVector::from_fn(2, |_, _| rng.random_range(-1.0..1.0));
    let mut kkt = DMatrix::zeros(n + 2, n + 2);
    kkt.view_mut((0, 0), (n, n)).copy_from(&p);
    kkt.view_mut((0, n), (n, 2)).copy_from(&e.transpose());
    kkt.view_mut((n, 0), (2, n)).copy_from(&e);
    let mut rhs = DVector::zeros(n + 2);
    rhs.rows_mut(0, n).copy_from(&(-&q));
    rhs.rows_mut(n, 2).copy_from(&d);
    let reference = kkt.lu().solve(&rhs).unwrap();

    // a loose inequality keeps the problem in general form
    let a = DMatrix::from_row_slice(1, n, &[1.0; 6]);
    let b = DVector::from_element(1, 1e3);
    let problem = QpProblem::new(p, q, a, b, e, d).unwrap();
    let sol = solve_qp(&problem, &QpSettings::default()).unwrap();
    assert!((&sol.x - reference.rows(0, n)).amax() < 1e-7);
    assert!(kkt_residuals(&problem, &sol).unwrap().max() <= 1e-8);
}

#[test]
fn complementarity_measure_is_monotone() {
    for seed in 0..20 {
        let (p, q, lo, hi) = random_box_qp(seed, 10);
        let sol = solve_qp(&box_problem(&p, &q, &lo, &hi), &QpSettings::default()).unwrap();
        let mu = &sol.mu_history;
        assert!(mu.len() >= 2);
        assert!(mu.windows(2).all(|w| w[1] <= w[0]), "seed {seed}: {mu:?}");
        assert!(*mu.last().unwrap() < mu[0] * 1e-6);
    }
}
