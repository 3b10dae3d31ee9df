//! Benchmark populations with full potential-outcome ground truth.
//!
//! Randomness comes from ChaCha20 seeded with `seed_from_u64(seed)`. Stream 0
//! draws covariates and potential outcomes, stream 1 draws group assignment,
//! so changing the assignment mechanism never perturbs the covariates.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::domain::{Dataset, Group, Unit};
use crate::error::{Error, Result};

pub const RNG_ID: &str = "chacha20/rand_chacha-0.9/seed_from_u64";

/// Largest spiral radius after scaling.
pub const SPIRAL_MAX_RADIUS: f64 = 6.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Assignment {
    Balanced,
    BernoulliP { p: f64 },
    CovariateSigmoid { scale: f64, feature_index: usize },
}

impl Assignment {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Assignment::Balanced => Ok(()),
            Assignment::BernoulliP { p } if p > 0.0 && p < 1.0 => Ok(()),
            Assignment::BernoulliP { p } => {
                Err(Error::invalid(format!("assignment probability must lie in (0, 1), got {p}")))
            }
            Assignment::CovariateSigmoid { scale, .. } if scale > 0.0 && scale <= 1.0 => Ok(()),
            Assignment::CovariateSigmoid { scale, .. } => Err(Error::invalid(format!(
                "sigmoid assignment scale must lie in (0, 1], got {scale}"
            ))),
        }
    }

    /// Probability of treatment for covariates `x`.
    pub fn treatment_probability(&self, x: &[f64]) -> f64 {
        match *self {
            Assignment::Balanced => 0.5,
            Assignment::BernoulliP { p } => p,
            Assignment::CovariateSigmoid { scale, feature_index } => {
                let e = (-x[feature_index] * x[feature_index]).exp();
                scale * (1.0 - e) / (1.0 + e)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Population {
    Spirals { noise_prob: f64 },
    Threshold2d,
    Imbalanced30,
    Highdim120,
}

impl Population {
    pub fn default_assignment(&self) -> Assignment {
        match self {
            Population::Imbalanced30 => Assignment::BernoulliP { p: 0.7 },
            _ => Assignment::Balanced,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub population: Population,
    pub n: usize,
    pub seed: u64,
    pub assignment: Assignment,
}

impl GeneratorSpec {
    pub fn new(population: Population, n: usize, seed: u64) -> Self {
        GeneratorSpec {
            population,
            n,
            seed,
            assignment: population.default_assignment(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 4 {
            return Err(Error::invalid(format!("need n ≥ 4, got {}", self.n)));
        }
        if let Population::Spirals { noise_prob } = self.population {
            if !(0.0..1.0).contains(&noise_prob) {
                return Err(Error::invalid(format!(
                    "noise probability must lie in [0, 1), got {noise_prob}"
                )));
            }
            if self.n % 2 != 0 {
                return Err(Error::invalid(format!("spirals need an even n, got {}", self.n)));
            }
        }
        self.assignment.validate()
    }
}

/// Sidecar metadata written next to generated CSV files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationMeta {
    pub spec: GeneratorSpec,
    pub rng: String,
    pub notes: Vec<String>,
}

impl GenerationMeta {
    pub fn for_spec(spec: &GeneratorSpec) -> Self {
        let mut notes = vec![
            "stream 0: covariates and potential outcomes; stream 1: assignment".to_string(),
        ];
        match spec.population {
            Population::Spirals { .. } => notes.push(format!(
                "angle t ~ U[π/4, 4π], radius ∝ t scaled to max {SPIRAL_MAX_RADIUS}, arm offset π; noise swaps both potential outcomes"
            )),
            Population::Imbalanced30 => notes.push(
                "P(y_t = 1) = 0.8 when ‖x‖ > 3, else 0.2; P(y_c = 1) = 0.2".to_string(),
            ),
            _ => {}
        }
        GenerationMeta {
            spec: *spec,
            rng: RNG_ID.to_string(),
            notes,
        }
    }
}

fn rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut r = ChaCha20Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

fn label(rng: &mut ChaCha20Rng, p_one: f64) -> i8 {
    if rng.random_bool(p_one) {
        1
    } else {
        -1
    }
}

fn normal(rng: &mut ChaCha20Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Draws groups and sets `y_obs = W·y^T + (1 − W)·y^C`.
pub fn apply_assignment(units: Vec<Unit>, mechanism: &Assignment, seed: u64) -> Result<Dataset> {
    mechanism.validate()?;
    let mut r = rng(seed, 1);
    let mut out = Vec::with_capacity(units.len());
    for (i, mut u) in units.into_iter().enumerate() {
        let (Some(y_t), Some(y_c)) = (u.y_t, u.y_c) else {
            return Err(Error::MissingGroundTruth { index: i });
        };
        if let Assignment::CovariateSigmoid { feature_index, .. } = mechanism {
            if *feature_index >= u.features.len() {
                return Err(Error::invalid(format!(
                    "assignment feature {feature_index} out of range for dimension {}",
                    u.features.len()
                )));
            }
        }
        let p = mechanism.treatment_probability(&u.features);
        let treated = r.random::<f64>() < p;
        u.group = if treated { Group::Treatment } else { Group::Control };
        u.y_obs = if treated { y_t } else { y_c };
        out.push(u);
    }
    Ok(Dataset::new(out))
}

fn spiral_units(n: usize, noise_prob: f64, r: &mut ChaCha20Rng) -> Vec<Unit> {
    let scale = SPIRAL_MAX_RADIUS / (4.0 * PI);
    (0..n)
        .map(|i| {
            let arm = i % 2;
            let t = r.random_range(PI / 4.0..4.0 * PI);
            let phase = t + arm as f64 * PI;
            let x = vec![scale * t * phase.cos(), scale * t * phase.sin()];
            let (mut y_t, mut y_c) = if arm == 0 { (1, -1) } else { (-1, 1) };
            if r.random_bool(noise_prob) {
                std::mem::swap(&mut y_t, &mut y_c);
            }
            Unit::with_potential_outcomes(x, Group::Treatment, y_t, y_c)
        })
        .collect()
}

fn threshold_units(n: usize, r: &mut ChaCha20Rng) -> Vec<Unit> {
    (0..n)
        .map(|_| {
            let x: Vec<f64> = (0..2).map(|_| r.random::<f64>()).collect();
            let (pt, pc) = if x[0] < 0.6 {
                (0.4, 0.6)
            } else if x[0] < 0.8 {
                (0.3, 0.7)
            } else {
                (0.8, 0.2)
            };
            let y_t = label(r, pt);
            let y_c = label(r, pc);
            Unit::with_potential_outcomes(x, Group::Treatment, y_t, y_c)
        })
        .collect()
}

fn mixed_features(n_normal: usize, n_uniform: usize, r: &mut ChaCha20Rng) -> Vec<f64> {
    let mut x: Vec<f64> = (0..n_normal).map(|_| normal(r)).collect();
    x.extend((0..n_uniform).map(|_| r.random_range(-1.0..1.0)));
    x
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn imbalanced_units(n: usize, r: &mut ChaCha20Rng) -> Vec<Unit> {
    (0..n)
        .map(|_| {
            let x = mixed_features(20, 10, r);
            let pt = if norm(&x) > 3.0 { 0.8 } else { 0.2 };
            let y_t = label(r, pt);
            let y_c = label(r, 0.2);
            Unit::with_potential_outcomes(x, Group::Treatment, y_t, y_c)
        })
        .collect()
}

fn highdim_units(n: usize, r: &mut ChaCha20Rng) -> Vec<Unit> {
    (0..n)
        .map(|_| {
            let x = mixed_features(60, 60, r);
            let nx = norm(&x);
            let (pt, pc) = if nx < 3.0 {
                (0.4, 0.6)
            } else if nx < 4.0 {
                (0.3, 0.7)
            } else {
                (0.2, 0.2)
            };
            let y_t = label(r, pt);
            let y_c = label(r, pc);
            Unit::with_potential_outcomes(x, Group::Treatment, y_t, y_c)
        })
        .collect()
}

/// Generates a dataset with ground truth and observed groups.
pub fn generate(spec: &GeneratorSpec) -> Result<Dataset> {
    spec.validate()?;
    let mut r = rng(spec.seed, 0);
    let units = match spec.population {
        Population::Spirals { noise_prob } => spiral_units(spec.n, noise_prob, &mut r),
        Population::Threshold2d => threshold_units(spec.n, &mut r),
        Population::Imbalanced30 => imbalanced_units(spec.n, &mut r),
        Population::Highdim120 => highdim_units(spec.n, &mut r),
    };
    apply_assignment(units, &spec.assignment, spec.seed)
}

/// Two interleaved Archimedean spirals; arm 0 has a positive effect, arm 1 a
/// negative one, and `noise_prob` swaps both potential outcomes of a unit.
pub fn generate_spirals(n: usize, noise_prob: f64, seed: u64) -> Result<Dataset> {
    generate(&GeneratorSpec::new(Population::Spirals { noise_prob }, n, seed))
}

/// `x ~ U[0,1]²` with effect probabilities stepping at `x₁ = 0.6` and `0.8`.
pub fn generate_threshold_2d(n: usize, seed: u64) -> Result<Dataset> {
    generate(&GeneratorSpec::new(Population::Threshold2d, n, seed))
}

/// 20 normal and 10 uniform features; control with probability 0.3.
pub fn generate_imbalanced_30(n: usize, seed: u64) -> Result<Dataset> {
    generate(&GeneratorSpec::new(Population::Imbalanced30, n, seed))
}

/// 60 normal and 60 uniform features with norm-shell effect probabilities.
pub fn generate_highdim_120(n: usize, seed: u64) -> Result<Dataset> {
    generate(&GeneratorSpec::new(Population::Highdim120, n, seed))
}
