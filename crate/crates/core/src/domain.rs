//! Units, datasets and the three-way effect label.
//!
//! A [`Dataset`] is always stored in canonical order: every treatment unit
//! first, then every control unit, each group keeping its insertion order.
//! Kernel matrices and dual coefficient vectors are indexed in that order.

use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Group {
    #[serde(rename = "T")]
    Treatment,
    #[serde(rename = "C")]
    Control,
}

impl Group {
    pub fn as_str(self) -> &'static str {
        match self {
            Group::Treatment => "T",
            Group::Control => "C",
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One observation.
///
/// Outcomes are `±1`. `y_t`/`y_c` are the potential outcomes and are only
/// known for simulated data; `ratio` is the density ratio
/// `μ_{X|C}(x) / μ_{X|T}(x)` and is only read for control units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Unit {
    pub features: Vec<f64>,
    pub group: Group,
    pub y_obs: i8,
    pub y_t: Option<i8>,
    pub y_c: Option<i8>,
    pub ratio: Option<f64>,
}

impl Unit {
    pub fn new(features: Vec<f64>, group: Group, y_obs: i8) -> Self {
        Unit {
            features,
            group,
            y_obs,
            y_t: None,
            y_c: None,
            ratio: None,
        }
    }

    /// Builds a unit from both potential outcomes, observing the one that
    /// matches its group.
    pub fn with_potential_outcomes(features: Vec<f64>, group: Group, y_t: i8, y_c: i8) -> Self {
        let y_obs = match group {
            Group::Treatment => y_t,
            Group::Control => y_c,
        };
        Unit {
            features,
            group,
            y_obs,
            y_t: Some(y_t),
            y_c: Some(y_c),
            ratio: None,
        }
    }

    pub fn with_ratio(mut self, ratio: f64) -> Self {
        self.ratio = Some(ratio);
        self
    }

    pub fn is_treated(&self) -> bool {
        self.group == Group::Treatment
    }

    /// Ground-truth effect sign, when both potential outcomes are known.
    pub fn true_effect(&self) -> Option<EffectLabel> {
        match (self.y_t, self.y_c) {
            (Some(t), Some(c)) => Some(EffectLabel::from_difference(f64::from(t - c))),
            _ => None,
        }
    }
}

/// Predicted or true sign of `Y^T − Y^C`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EffectLabel {
    Positive,
    Neutral,
    Negative,
}

impl EffectLabel {
    pub fn from_difference(diff: f64) -> Self {
        if diff > 0.0 {
            EffectLabel::Positive
        } else if diff < 0.0 {
            EffectLabel::Negative
        } else {
            EffectLabel::Neutral
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EffectLabel::Positive => "positive",
            EffectLabel::Neutral => "neutral",
            EffectLabel::Negative => "negative",
        }
    }
}

impl fmt::Display for EffectLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Ordered collection of units in canonical (treatment-first) order.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Dataset {
    units: Vec<Unit>,
    n_t: usize,
}

impl Dataset {
    /// Canonicalizes `units` with a stable treatment-first partition.
    pub fn new(units: Vec<Unit>) -> Self {
        let (mut treated, control): (Vec<Unit>, Vec<Unit>) =
            units.into_iter().partition(Unit::is_treated);
        let n_t = treated.len();
        treated.extend(control);
        Dataset { units: treated, n_t }
    }

    pub fn units(&self) -> &[Unit] {
        &self.units
    }

    pub fn into_units(self) -> Vec<Unit> {
        self.units
    }

    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }

    pub fn n_t(&self) -> usize {
        self.n_t
    }

    pub fn n_c(&self) -> usize {
        self.units.len() - self.n_t
    }

    /// Feature dimension of the first unit (0 for an empty dataset).
    pub fn dim(&self) -> usize {
        self.units.first().map_or(0, |u| u.features.len())
    }

    pub fn treatment(&self) -> &[Unit] {
        &self.units[..self.n_t]
    }

    pub fn control(&self) -> &[Unit] {
        &self.units[self.n_t..]
    }

    pub fn is_canonical(&self) -> bool {
        self.units[..self.n_t].iter().all(Unit::is_treated)
            && self.units[self.n_t..].iter().all(|u| !u.is_treated())
    }

    /// Returns a copy with every unit passed through `f`, re-canonicalized.
    pub fn map_units(&self, f: impl FnMut(&Unit) -> Unit) -> Dataset {
        Dataset::new(self.units.iter().map(f).collect())
    }

    /// Subset by canonical indices, re-canonicalized.
    pub fn select(&self, indices: &[usize]) -> Dataset {
        Dataset::new(indices.iter().map(|&i| self.units[i].clone()).collect())
    }

    /// Label signs of the dual's diagonal scaling: `y^T` for treatment units,
    /// `−y^C` for control units.
    pub fn dual_signs(&self) -> Vec<f64> {
        self.units
            .iter()
            .map(|u| match u.group {
                Group::Treatment => f64::from(u.y_obs),
                Group::Control => -f64::from(u.y_obs),
            })
            .collect()
    }

    /// Density ratios of the control units in canonical order.
    pub fn control_ratios(&self) -> Result<Vec<f64>> {
        self.control()
            .iter()
            .enumerate()
            .map(|(j, u)| {
                u.ratio
                    .ok_or(Error::MissingRatio { index: self.n_t + j })
            })
            .collect()
    }
}

impl FromIterator<Unit> for Dataset {
    fn from_iter<I: IntoIterator<Item = Unit>>(iter: I) -> Self {
        Dataset::new(iter.into_iter().collect())
    }
}

/// A single failed invariant.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    /// Canonical unit index, or `None` for dataset-level problems.
    pub index: Option<usize>,
    pub reason: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.index {
            Some(i) => write!(f, "unit {i}: {}", self.reason),
            None => write!(f, "{}", self.reason),
        }
    }
}

fn is_label(y: i8) -> bool {
    y == 1 || y == -1
}

/// Checks every unit and dataset invariant required for training.
pub fn validate_dataset(dataset: &Dataset) -> std::result::Result<(), Vec<Violation>> {
    let mut out = Vec::new();
    let mut push = |index: Option<usize>, reason: String| out.push(Violation { index, reason });

    if dataset.n_t() < 1 {
        push(None, "n_t ≥ 1 fails".to_string());
    }
    if dataset.n_c() < 1 {
        push(None, "n_c ≥ 1 fails".to_string());
    }
    if !dataset.is_canonical() {
        push(None, "dataset is not in treatment-first order".to_string());
    }

    let dim = dataset.dim();
    for (i, u) in dataset.units().iter().enumerate() {
        if u.features.len() != dim {
            push(
                Some(i),
                format!("feature dimension {} differs from {dim}", u.features.len()),
            );
        }
        if let Some(j) = u.features.iter().position(|v| !v.is_finite()) {
            push(Some(i), format!("feature {j} is not finite"));
        }
        if !is_label(u.y_obs) {
            push(Some(i), format!("y_obs = {} is not ±1", u.y_obs));
        }
        for (name, y) in [("y_t", u.y_t), ("y_c", u.y_c)] {
            if let Some(y) = y {
                if !is_label(y) {
                    push(Some(i), format!("{name} = {y} is not ±1"));
                }
            }
        }
        match (u.group, u.y_t, u.y_c) {
            (Group::Treatment, Some(t), _) if t != u.y_obs => {
                push(Some(i), "y_obs differs from y_t on a treatment unit".to_string())
            }
            (Group::Control, _, Some(c)) if c != u.y_obs => {
                push(Some(i), "y_obs differs from y_c on a control unit".to_string())
            }
            _ => {}
        }
        if let Some(r) = u.ratio {
            if !(r.is_finite() && r > 0.0) {
                push(Some(i), format!("ratio must be positive and finite (got {r})"));
            }
        }
    }

    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

/// Like [`validate_dataset`] but folds the violations into an [`Error`].
pub fn ensure_valid(dataset: &Dataset) -> Result<()> {
    validate_dataset(dataset).map_err(|v| {
        let msg = v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ");
        Error::InvalidDataset(msg)
    })
}

/// Uniform random train/test partition.
///
/// The test side gets `round(test_fraction · n)` units, clamped so both sides
/// keep at least one unit. Deterministic given `seed`.
pub fn split_train_test(
    dataset: &Dataset,
    test_fraction: f64,
    seed: u64,
) -> Result<(Dataset, Dataset)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::invalid(format!(
            "test fraction must lie in (0, 1), got {test_fraction}"
        )));
    }
    let n = dataset.len();
    if n < 2 {
        return Err(Error::InvalidDataset(format!(
            "need at least 2 units to split, got {n}"
        )));
    }
    let n_test = ((test_fraction * n as f64).round() as usize).clamp(1, n - 1);

    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);

    let (test_idx, train_idx) = order.split_at(n_test);
    Ok((dataset.select(train_idx), dataset.select(test_idx)))
}
