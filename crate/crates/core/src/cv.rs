//! Cross-validated selection of `(kernel, γ)` by the held-out minimax
//! surrogate risk, which needs no ground-truth effects.

use std::cmp::Ordering;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::causal_svm::{train, DEFAULT_TOL};
use crate::domain::{Dataset, Group, Unit};
use crate::error::{Error, Result};
use crate::evaluation::{score_all, EffectScorer};
use crate::kernels::KernelSpec;
use crate::surrogate::{minimax_risk, SurrogateLoss};

pub const DEFAULT_FOLDS: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvGrid {
    pub kernels: Vec<KernelSpec>,
    pub gammas: Vec<f64>,
    pub folds: usize,
    pub seed: u64,
}

impl CvGrid {
    /// Linear, quadratic, cubic and RBF 0.05 / 0.1 kernels, γ ∈ {1e-8, 1e-6, 1e-4}.
    pub fn default_grid(seed: u64) -> Self {
        CvGrid {
            kernels: vec![
                KernelSpec::Linear,
                KernelSpec::Polynomial { degree: 2 },
                KernelSpec::Polynomial { degree: 3 },
                KernelSpec::Rbf { inv_width: 0.05 },
                KernelSpec::Rbf { inv_width: 0.1 },
            ],
            gammas: vec![1e-8, 1e-6, 1e-4],
            folds: DEFAULT_FOLDS,
            seed,
        }
    }

    pub fn validate(&self, dataset: &Dataset) -> Result<()> {
        if self.kernels.is_empty() || self.gammas.is_empty() {
            return Err(Error::invalid("CV grid must have at least one kernel and one γ"));
        }
        for k in &self.kernels {
            k.validate()?;
        }
        if let Some(g) = self.gammas.iter().find(|g| !(**g > 0.0 && g.is_finite())) {
            return Err(Error::invalid(format!("γ must be positive, got {g}")));
        }
        if self.folds < 2 {
            return Err(Error::invalid("need at least 2 folds"));
        }
        if self.folds > dataset.n_t().min(dataset.n_c()) {
            return Err(Error::InvalidDataset(format!(
                "{} folds need at least that many units per group (n_t = {}, n_c = {})",
                self.folds,
                dataset.n_t(),
                dataset.n_c()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigScore {
    pub kernel: KernelSpec,
    pub gamma: f64,
    /// Mean held-out minimax risk; `+∞` when any fold failed to train.
    pub score: f64,
    pub fold_scores: Vec<f64>,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub best_kernel: KernelSpec,
    pub best_gamma: f64,
    pub best_score: f64,
    /// In grid order: kernels outer, γ inner.
    pub scores: Vec<ConfigScore>,
}

impl CvResult {
    pub const CSV_HEADER: [&'static str; 5] = ["kernel", "gamma", "score", "failures", "selected"];

    pub fn csv_records(&self) -> Vec<[String; 5]> {
        self.scores
            .iter()
            .map(|s| {
                let selected = s.kernel == self.best_kernel && s.gamma == self.best_gamma;
                [
                    s.kernel.label(),
                    format!("{:e}", s.gamma),
                    format!("{:?}", s.score),
                    s.failures.to_string(),
                    selected.to_string(),
                ]
            })
            .collect()
    }
}

fn fingerprint_cmp(a: &Unit, b: &Unit) -> Ordering {
    let floats = |x: &[f64], y: &[f64]| {
        x.iter()
            .zip(y)
            .map(|(p, q)| p.total_cmp(q))
            .find(|o| o.is_ne())
            .unwrap_or_else(|| x.len().cmp(&y.len()))
    };
    (a.group == Group::Control)
        .cmp(&(b.group == Group::Control))
        .then_with(|| floats(&a.features, &b.features))
        .then_with(|| a.y_obs.cmp(&b.y_obs))
        .then_with(|| a.y_t.cmp(&b.y_t))
        .then_with(|| a.y_c.cmp(&b.y_c))
        .then_with(|| a.ratio.unwrap_or(0.0).total_cmp(&b.ratio.unwrap_or(0.0)))
}

/// Fold index of every unit (canonical order), stratified by group.
///
/// Units are sorted by a fingerprint, shuffled per group with a seeded RNG and
/// dealt round-robin, so the assignment does not depend on input order.
pub fn stratified_folds(dataset: &Dataset, folds: usize, seed: u64) -> Result<Vec<usize>> {
    if folds < 2 || folds > dataset.n_t().min(dataset.n_c()) {
        return Err(Error::InvalidDataset(format!(
            "cannot form {folds} folds with n_t = {}, n_c = {}",
            dataset.n_t(),
            dataset.n_c()
        )));
    }
    let units = dataset.units();
    let mut assignment = vec![0; units.len()];
    for (stream, range) in [(0u64, 0..dataset.n_t()), (1, dataset.n_t()..units.len())] {
        let mut idx: Vec<usize> = range.collect();
        idx.sort_by(|&a, &b| fingerprint_cmp(&units[a], &units[b]));
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        idx.shuffle(&mut rng);
        for (pos, i) in idx.into_iter().enumerate() {
            assignment[i] = pos % folds;
        }
    }
    Ok(assignment)
}

fn fold_score(
    dataset: &Dataset,
    assignment: &[usize],
    fold: usize,
    kernel: &KernelSpec,
    gamma: f64,
    loss: SurrogateLoss,
) -> Result<f64> {
    let (held, fit): (Vec<usize>, Vec<usize>) = (0..dataset.len()).partition(|&i| assignment[i] == fold);
    let train_ds = dataset.select(&fit);
    let held_ds = dataset.select(&held);
    let model = train(&train_ds, kernel, gamma, DEFAULT_TOL)?;
    let h = score_all(&model as &dyn EffectScorer, &held_ds)?;
    Ok(minimax_risk(&h, &held_ds, loss)?.minimax)
}

/// Order on `(score, γ, kernel)`: lower score, then larger γ, then simpler kernel.
fn preference(a: &ConfigScore, b: &ConfigScore) -> Ordering {
    let (ka, wa) = a.kernel.complexity_rank();
    let (kb, wb) = b.kernel.complexity_rank();
    a.score
        .total_cmp(&b.score)
        .then_with(|| b.gamma.total_cmp(&a.gamma))
        .then_with(|| ka.cmp(&kb))
        .then_with(|| wa.total_cmp(&wb))
}

pub fn nested_cv_select(dataset: &Dataset, grid: &CvGrid, loss: SurrogateLoss) -> Result<CvResult> {
    grid.validate(dataset)?;
    dataset.control_ratios()?;
    let assignment = stratified_folds(dataset, grid.folds, grid.seed)?;
    let configs: Vec<(KernelSpec, f64)> = grid
        .kernels
        .iter()
        .flat_map(|k| grid.gammas.iter().map(move |g| (*k, *g)))
        .collect();
    let jobs: Vec<(usize, usize)> = (0..configs.len())
        .flat_map(|c| (0..grid.folds).map(move |f| (c, f)))
        .collect();
    let results: Vec<Option<f64>> = jobs
        .par_iter()
        .map(|&(c, f)| {
            let (kernel, gamma) = &configs[c];
            fold_score(dataset, &assignment, f, kernel, *gamma, loss).ok()
        })
        .collect();

    let scores: Vec<ConfigScore> = configs
        .iter()
        .enumerate()
        .map(|(c, (kernel, gamma))| {
            let per_fold = &results[c * grid.folds..(c + 1) * grid.folds];
            let failures = per_fold.iter().filter(|r| r.is_none()).count();
            let fold_scores: Vec<f64> = per_fold.iter().map(|r| r.unwrap_or(f64::INFINITY)).collect();
            let score = if failures > 0 {
                f64::INFINITY
            } else {
                fold_scores.iter().sum::<f64>() / grid.folds as f64
            };
            ConfigScore {
                kernel: *kernel,
                gamma: *gamma,
                score,
                fold_scores,
                failures,
            }
        })
        .collect();
    let best = scores
        .iter()
        .min_by(|a, b| preference(a, b))
        .expect("grid is nonempty");
    Ok(CvResult {
        best_kernel: best.kernel,
        best_gamma: best.gamma,
        best_score: best.score,
        scores: scores.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ds() -> Dataset {
        let units: Vec<Unit> = (0..20)
            .map(|i| {
                let x = i as f64 / 10.0 - 1.0;
                let g = if i % 2 == 0 { Group::Treatment } else { Group::Control };
                let y = if (x > 0.0) == (g == Group::Treatment) { 1 } else { -1 };
                let u = Unit::new(vec![x], g, y);
                if g == Group::Control { u.with_ratio(1.0) } else { u }
            })
            .collect();
        Dataset::new(units)
    }

    #[test]
    fn folds_are_stratified_and_order_invariant() {
        let d = ds();
        let a = stratified_folds(&d, 5, 3).unwrap();
        for f in 0..5 {
            let t = (0..d.n_t()).filter(|&i| a[i] == f).count();
            let c = (d.n_t()..d.len()).filter(|&i| a[i] == f).count();
            assert_eq!((t, c), (2, 2));
        }
        let mut rev: Vec<Unit> = d.units().to_vec();
        rev.reverse();
        let d2 = Dataset::new(rev);
        let b = stratified_folds(&d2, 5, 3).unwrap();
        for (i, u) in d.units().iter().enumerate() {
            let j = d2.units().iter().position(|v| v == u).unwrap();
            assert_eq!(a[i], b[j]);
        }
        assert!(stratified_folds(&d, 11, 3).is_err());
    }

    #[test]
    fn single_config_grid() {
        let grid = CvGrid {
            kernels: vec![KernelSpec::Linear],
            gammas: vec![0.01],
            folds: 2,
            seed: 1,
        };
        let r = nested_cv_select(&ds(), &grid, SurrogateLoss::Hinge).unwrap();
        assert_eq!(r.best_kernel, KernelSpec::Linear);
        assert_eq!(r.scores.len(), 1);
        let mean = r.scores[0].fold_scores.iter().sum::<f64>() / 2.0;
        assert_eq!(r.best_score, mean);
    }

    #[test]
    fn tie_break_prefers_larger_gamma_then_simpler_kernel() {
        let mk = |kernel, gamma| ConfigScore {
            kernel,
            gamma,
            score: 1.0,
            fold_scores: vec![],
            failures: 0,
        };
        let a = mk(KernelSpec::Rbf { inv_width: 0.1 }, 1.0);
        let b = mk(KernelSpec::Linear, 0.1);
        assert_eq!(preference(&a, &b), Ordering::Less);
        let c = mk(KernelSpec::Rbf { inv_width: 0.05 }, 1.0);
        assert_eq!(preference(&c, &a), Ordering::Less);
    }

    #[test]
    fn grid_order_does_not_matter() {
        let mut grid = CvGrid {
            kernels: vec![KernelSpec::Linear, KernelSpec::Rbf { inv_width: 1.0 }],
            gammas: vec![0.01, 1.0],
            folds: 2,
            seed: 4,
        };
        let a = nested_cv_select(&ds(), &grid, SurrogateLoss::Hinge).unwrap();
        grid.kernels.reverse();
        grid.gammas.reverse();
        let b = nested_cv_select(&ds(), &grid, SurrogateLoss::Hinge).unwrap();
        assert_eq!((a.best_kernel, a.best_gamma), (b.best_kernel, b.best_gamma));
    }
}
