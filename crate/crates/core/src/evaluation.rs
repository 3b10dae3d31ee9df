//! Ground-truth evaluation of effect predictions.
//!
//! [`pointwise_loss`] implements the conditional-difference losses. The
//! benchmark metric, [`quantile_neutral_loss`], declares the `fraction` of
//! points with the smallest `|h|` neutral and counts sign errors beyond the
//! realized cut `t`.

use serde::{Deserialize, Serialize};

use crate::baselines::TwoModelPredictor;
use crate::causal_svm::{decision_value, CausalSvmModel};
use crate::domain::Dataset;
use crate::error::{Error, Result};

/// Cut used when no point is declared neutral.
pub const ZERO_FRACTION_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LossKind {
    L01,
    LTheta(f64),
    L1,
}

fn check_label(y: i8) -> Result<()> {
    if y == 1 || y == -1 {
        Ok(())
    } else {
        Err(Error::invalid(format!("labels must be ±1, got {y}")))
    }
}

/// 0/1 loss of a single prediction against its potential outcomes.
pub fn pointwise_loss(kind: LossKind, h: f64, y_t: i8, y_c: i8) -> Result<u8> {
    check_label(y_t)?;
    check_label(y_c)?;
    let theta = match kind {
        LossKind::L1 | LossKind::L01 => 1.0,
        LossKind::LTheta(t) if t > 0.0 => t,
        LossKind::LTheta(t) => return Err(Error::invalid(format!("θ must be positive, got {t}"))),
    };
    let sign_cut = if kind == LossKind::L01 { 0.0 } else { theta };
    let err = match y_t.cmp(&y_c) {
        std::cmp::Ordering::Equal => h.abs() >= theta,
        std::cmp::Ordering::Greater => h <= -sign_cut,
        std::cmp::Ordering::Less => h >= sign_cut,
    };
    Ok(u8::from(err))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ErrorCounts {
    pub false_positive: usize,
    pub false_negative: usize,
    pub spurious_effect: usize,
    pub n: usize,
}

impl ErrorCounts {
    pub fn errors(&self) -> usize {
        self.false_positive + self.false_negative + self.spurious_effect
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub fraction_neutral: f64,
    pub threshold_t: f64,
    pub loss_percent: f64,
    pub counts: ErrorCounts,
}

impl EvaluationReport {
    pub const CSV_HEADER: [&'static str; 7] =
        ["fraction", "threshold", "loss_percent", "fp", "fn", "spurious", "n"];

    pub fn csv_record(&self) -> [String; 7] {
        [
            self.fraction_neutral.to_string(),
            format!("{:?}", self.threshold_t),
            format!("{:?}", self.loss_percent),
            self.counts.false_positive.to_string(),
            self.counts.false_negative.to_string(),
            self.counts.spurious_effect.to_string(),
            self.counts.n.to_string(),
        ]
    }
}

/// Smallest cut `t` leaving at least `⌈fraction·n⌉` values of `|h|` strictly
/// below it: the midpoint between the `k`-th smallest `|h|` and the next
/// larger distinct value.
pub fn neutral_threshold(h_values: &[f64], fraction: f64) -> Result<f64> {
    if h_values.is_empty() {
        return Err(Error::EmptyInput("prediction vector"));
    }
    if !(0.0..1.0).contains(&fraction) {
        return Err(Error::invalid(format!("neutral fraction must lie in [0, 1), got {fraction}")));
    }
    if let Some(index) = h_values.iter().position(|h| h.is_nan()) {
        return Err(Error::NonFinite { index });
    }
    let k = (fraction * h_values.len() as f64).ceil() as usize;
    if k == 0 {
        return Ok(ZERO_FRACTION_EPS);
    }
    let mut a: Vec<f64> = h_values.iter().map(|h| h.abs()).collect();
    a.sort_by(f64::total_cmp);
    let kth = a[k - 1];
    Ok(match a[k..].iter().find(|v| **v > kth) {
        Some(next) if next.is_finite() => 0.5 * (kth + next),
        _ => kth + ZERO_FRACTION_EPS.max(ZERO_FRACTION_EPS * kth),
    })
}

pub fn quantile_neutral_loss(
    h_values: &[f64],
    truths: &[(i8, i8)],
    fraction: f64,
) -> Result<EvaluationReport> {
    if h_values.len() != truths.len() {
        return Err(Error::DimensionMismatch {
            expected: h_values.len(),
            found: truths.len(),
        });
    }
    let t = neutral_threshold(h_values, fraction)?;
    let mut counts = ErrorCounts {
        n: h_values.len(),
        ..ErrorCounts::default()
    };
    for (&h, &(y_t, y_c)) in h_values.iter().zip(truths) {
        check_label(y_t)?;
        check_label(y_c)?;
        match y_t.cmp(&y_c) {
            std::cmp::Ordering::Greater if h <= -t => counts.false_negative += 1,
            std::cmp::Ordering::Less if h >= t => counts.false_positive += 1,
            std::cmp::Ordering::Equal if h.abs() >= t => counts.spurious_effect += 1,
            _ => {}
        }
    }
    Ok(EvaluationReport {
        fraction_neutral: fraction,
        threshold_t: t,
        loss_percent: 100.0 * counts.errors() as f64 / counts.n as f64,
        counts,
    })
}

/// Anything producing a real-valued effect score `h(x)`.
pub trait EffectScorer: Sync {
    fn score(&self, x: &[f64]) -> Result<f64>;
}

impl EffectScorer for CausalSvmModel {
    fn score(&self, x: &[f64]) -> Result<f64> {
        decision_value(self, x)
    }
}

impl EffectScorer for TwoModelPredictor {
    fn score(&self, x: &[f64]) -> Result<f64> {
        self.predict_difference(x)
    }
}

/// Ground-truth pairs `(y^T, y^C)` of every unit, in canonical order.
pub fn ground_truth(dataset: &Dataset) -> Result<Vec<(i8, i8)>> {
    dataset
        .units()
        .iter()
        .enumerate()
        .map(|(index, u)| match (u.y_t, u.y_c) {
            (Some(t), Some(c)) => Ok((t, c)),
            _ => Err(Error::MissingGroundTruth { index }),
        })
        .collect()
}

pub fn score_all(scorer: &dyn EffectScorer, dataset: &Dataset) -> Result<Vec<f64>> {
    dataset.units().iter().map(|u| scorer.score(&u.features)).collect()
}

/// One report per neutral fraction.
pub fn evaluate_model(
    scorer: &dyn EffectScorer,
    test: &Dataset,
    fractions: &[f64],
) -> Result<Vec<EvaluationReport>> {
    let truths = ground_truth(test)?;
    let h = score_all(scorer, test)?;
    fractions
        .iter()
        .map(|&f| quantile_neutral_loss(&h, &truths, f))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pointwise_examples() {
        assert_eq!(pointwise_loss(LossKind::L1, 0.5, 1, 1).unwrap(), 0);
        assert_eq!(pointwise_loss(LossKind::L1, -1.5, 1, -1).unwrap(), 1);
        assert_eq!(pointwise_loss(LossKind::L01, 0.0, 1, -1).unwrap(), 1);
        assert_eq!(pointwise_loss(LossKind::LTheta(0.5), 0.5, -1, 1).unwrap(), 1);
        assert!(pointwise_loss(LossKind::L1, 0.0, 0, 1).is_err());
        assert!(pointwise_loss(LossKind::LTheta(0.0), 0.0, 1, 1).is_err());
    }

    #[test]
    fn four_point_example() {
        let h = [0.1, -0.5, 2.0, -3.0];
        let truths = [(1, 1), (1, -1), (1, -1), (-1, 1)];
        let r = quantile_neutral_loss(&h, &truths, 0.25).unwrap();
        assert_eq!(r.threshold_t, 0.3);
        assert_eq!(r.counts.false_negative, 1);
        assert_eq!(r.loss_percent, 25.0);
    }

    #[test]
    fn perfect_separation_has_zero_loss() {
        let h: Vec<f64> = (0..20).map(|i| if i % 2 == 0 { 2.0 } else { -2.0 }).collect();
        let truths: Vec<(i8, i8)> = (0..20).map(|i| if i % 2 == 0 { (1, -1) } else { (-1, 1) }).collect();
        assert_eq!(quantile_neutral_loss(&h, &truths, 0.1).unwrap().loss_percent, 0.0);
    }

    #[test]
    fn zero_fraction_convention() {
        let truths = vec![(1, -1); 5];
        let r = quantile_neutral_loss(&[0.0; 5], &truths, 0.0).unwrap();
        assert_eq!(r.threshold_t, ZERO_FRACTION_EPS);
        assert_eq!(r.loss_percent, 0.0);
        let r = quantile_neutral_loss(&[-2.0; 5], &truths, 0.0).unwrap();
        assert_eq!(r.loss_percent, 100.0);
    }

    #[test]
    fn errors_on_bad_input() {
        assert!(matches!(quantile_neutral_loss(&[], &[], 0.1), Err(Error::EmptyInput(_))));
        assert!(quantile_neutral_loss(&[0.0], &[(1, 1)], 1.0).is_err());
        assert!(quantile_neutral_loss(&[0.0], &[], 0.1).is_err());
    }

    #[test]
    fn ties_at_the_cut_are_all_neutral() {
        let t = neutral_threshold(&[1.0, 1.0, 1.0, 4.0], 0.25).unwrap();
        assert_eq!(t, 2.5);
        let t = neutral_threshold(&[3.0; 4], 0.5).unwrap();
        assert!(t > 3.0 && t < 3.0 + 1e-9);
    }
}
