//! Multi-seed experiment matrices and decision-surface grids.

use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{LearnerKind, TwoModelPredictor};
use crate::causal_svm::{decision_value, label_from_value, support_vectors, train, CausalSvmModel};
use crate::domain::{split_train_test, Dataset, Group};
use crate::error::{Error, Result};
use crate::evaluation::{evaluate_model, EffectScorer};
use crate::io::read_dataset_file;
use crate::kernels::KernelSpec;
use crate::synthetic::{generate, Assignment, GeneratorSpec, Population};
use crate::weights::{apply_weights, WeightMode};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum DataSource {
    /// A fresh population draw per seed; `n` counts train and test together.
    Generated {
        population: Population,
        n: usize,
        assignment: Option<Assignment>,
    },
    Csv { path: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum MethodSpec {
    CausalSvm { kernel: KernelSpec, gamma: f64 },
    TwoModel { learner: LearnerKind },
}

impl MethodSpec {
    /// Row label, e.g. `rbf causal SVM 0.1, 1e-8` or `2 SVM`.
    pub fn label(&self) -> String {
        match self {
            MethodSpec::CausalSvm { kernel: KernelSpec::Rbf { inv_width }, gamma } => {
                format!("rbf causal SVM {inv_width}, {gamma:e}")
            }
            MethodSpec::CausalSvm { kernel, gamma } => format!("{kernel} causal SVM {gamma:e}"),
            MethodSpec::TwoModel { learner } => learner.label(),
        }
    }

    fn fit(&self, train_ds: &Dataset, tol: f64) -> Result<Box<dyn EffectScorer>> {
        Ok(match *self {
            MethodSpec::CausalSvm { kernel, gamma } => Box::new(train(train_ds, &kernel, gamma, tol)?),
            MethodSpec::TwoModel { learner } => Box::new(TwoModelPredictor::fit(train_ds, &learner)?),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixConfig {
    pub data: DataSource,
    pub test_fraction: f64,
    pub seeds: Vec<u64>,
    pub methods: Vec<MethodSpec>,
    pub fractions: Vec<f64>,
    pub weights: WeightMode,
    pub tol: f64,
}

impl MatrixConfig {
    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() || self.methods.is_empty() || self.fractions.is_empty() {
            return Err(Error::invalid("matrix needs at least one seed, method and fraction"));
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::invalid(format!(
                "test fraction must lie in (0, 1), got {}",
                self.test_fraction
            )));
        }
        if let Some(f) = self.fractions.iter().find(|f| !(0.0..1.0).contains(*f)) {
            return Err(Error::invalid(format!("neutral fraction must lie in [0, 1), got {f}")));
        }
        if !(self.tol > 0.0) {
            return Err(Error::invalid("solver tolerance must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellStats {
    pub mean: f64,
    /// Sample standard deviation (0 for a single run).
    pub std: f64,
    pub runs: usize,
    pub failures: usize,
}

impl CellStats {
    fn from_runs(values: &[f64], failures: usize) -> Self {
        let n = values.len();
        let mean = if n == 0 { f64::NAN } else { values.iter().sum::<f64>() / n as f64 };
        let std = if n < 2 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        };
        CellStats {
            mean,
            std,
            runs: n,
            failures,
        }
    }

    /// `mean(std)` with two decimals; failed runs are appended as `[k failed]`.
    pub fn format(&self) -> String {
        let base = if self.runs == 0 {
            "NA".to_string()
        } else {
            format!("{:.2}({:.2})", self.mean, self.std)
        };
        if self.failures > 0 {
            format!("{base} [{} failed]", self.failures)
        } else {
            base
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodRow {
    pub label: String,
    pub cells: Vec<CellStats>,
    /// Per-seed loss percentages, `None` for failed runs.
    pub runs: Vec<Option<Vec<f64>>>,
    /// `(seed, message)` of each failed run.
    pub errors: Vec<(u64, String)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixResult {
    pub fractions: Vec<f64>,
    pub seeds: Vec<u64>,
    pub rows: Vec<MethodRow>,
}

impl MatrixResult {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["method".to_string()];
        header.extend(self.fractions.iter().map(|f| format!("l_{{{f}}}")));
        w.write_record(&header)?;
        for row in &self.rows {
            let mut rec = vec![row.label.clone()];
            rec.extend(row.cells.iter().map(CellStats::format));
            w.write_record(&rec)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
    }
}

fn load(source: &DataSource, seed: u64) -> Result<Dataset> {
    match source {
        DataSource::Generated {
            population,
            n,
            assignment,
        } => {
            let mut spec = GeneratorSpec::new(*population, *n, seed);
            if let Some(a) = assignment {
                spec.assignment = *a;
            }
            generate(&spec)
        }
        DataSource::Csv { path } => read_dataset_file(path),
    }
}

/// Runs every method on one seed: load, split, weight the training side, fit,
/// evaluate at each fraction.
fn run_seed(config: &MatrixConfig, seed: u64) -> Vec<Result<Vec<f64>>> {
    let prepared = load(&config.data, seed)
        .and_then(|ds| split_train_test(&ds, config.test_fraction, seed))
        .and_then(|(tr, te)| Ok((apply_weights(&tr, &config.weights)?.0, te)));
    let (train_ds, test_ds) = match prepared {
        Ok(p) => p,
        Err(e) => {
            let msg = e.to_string();
            return config
                .methods
                .iter()
                .map(|_| Err(Error::InvalidDataset(msg.clone())))
                .collect();
        }
    };
    config
        .methods
        .iter()
        .map(|m| {
            let model = m.fit(&train_ds, config.tol)?;
            let reports = evaluate_model(model.as_ref(), &test_ds, &config.fractions)?;
            Ok(reports.iter().map(|r| r.loss_percent).collect())
        })
        .collect()
}

/// Seeds run concurrently; the result is assembled in seed order.
pub fn run_experiment_matrix(config: &MatrixConfig) -> Result<MatrixResult> {
    config.validate()?;
    let per_seed: Vec<Vec<Result<Vec<f64>>>> =
        config.seeds.par_iter().map(|&s| run_seed(config, s)).collect();
    let rows = config
        .methods
        .iter()
        .enumerate()
        .map(|(m, method)| {
            let mut runs = Vec::with_capacity(config.seeds.len());
            let mut errors = Vec::new();
            for (seed, results) in config.seeds.iter().zip(&per_seed) {
                match &results[m] {
                    Ok(v) => runs.push(Some(v.clone())),
                    Err(e) => {
                        runs.push(None);
                        errors.push((*seed, e.to_string()));
                    }
                }
            }
            let cells = (0..config.fractions.len())
                .map(|f| {
                    let vals: Vec<f64> = runs.iter().flatten().map(|r| r[f]).collect();
                    CellStats::from_runs(&vals, errors.len())
                })
                .collect();
            MethodRow {
                label: method.label(),
                cells,
                runs,
                errors,
            }
        })
        .collect();
    Ok(MatrixResult {
        fractions: config.fractions.clone(),
        seeds: config.seeds.clone(),
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridBounds {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridPointKind {
    Grid,
    SupportTreatment,
    SupportControl,
}

impl GridPointKind {
    pub fn as_str(self) -> &'static str {
        match self {
            GridPointKind::Grid => "grid",
            GridPointKind::SupportTreatment => "sv_treatment",
            GridPointKind::SupportControl => "sv_control",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub kind: GridPointKind,
    pub x: f64,
    pub y: f64,
    pub h: f64,
    pub label: crate::domain::EffectLabel,
}

fn lattice(lo: f64, hi: f64, resolution: usize) -> Vec<f64> {
    if resolution == 1 {
        return vec![0.5 * (lo + hi)];
    }
    (0..resolution)
        .map(|i| lo + (hi - lo) * i as f64 / (resolution - 1) as f64)
        .collect()
}

/// Decision values on a `resolution × resolution` lattice (x outer, y inner),
/// followed by the support vectors of the model.
pub fn emit_decision_grid(
    model: &CausalSvmModel,
    bounds: &GridBounds,
    resolution: usize,
    theta: f64,
) -> Result<Vec<GridPoint>> {
    if model.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: model.dim(),
        });
    }
    if resolution == 0 {
        return Err(Error::invalid("grid resolution must be positive"));
    }
    if !(bounds.xmin <= bounds.xmax && bounds.ymin <= bounds.ymax) {
        return Err(Error::invalid("grid bounds must satisfy min ≤ max"));
    }
    if !(theta > 0.0) {
        return Err(Error::invalid(format!("θ must be positive, got {theta}")));
    }
    let point = |kind, x: f64, y: f64| -> Result<GridPoint> {
        let h = decision_value(model, &[x, y])?;
        Ok(GridPoint {
            kind,
            x,
            y,
            h,
            label: label_from_value(h, theta),
        })
    };
    let ys = lattice(bounds.ymin, bounds.ymax, resolution);
    let mut out = Vec::with_capacity(resolution * resolution);
    for x in lattice(bounds.xmin, bounds.xmax, resolution) {
        for &y in &ys {
            out.push(point(GridPointKind::Grid, x, y)?);
        }
    }
    let (t_sv, c_sv) = support_vectors(model, None);
    for i in t_sv.into_iter().chain(c_sv) {
        let u = &model.train_units.units()[i];
        let kind = match u.group {
            Group::Treatment => GridPointKind::SupportTreatment,
            Group::Control => GridPointKind::SupportControl,
        };
        out.push(point(kind, u.features[0], u.features[1])?);
    }
    Ok(out)
}

pub const GRID_CSV_HEADER: [&str; 5] = ["kind", "x", "y", "h", "label"];

pub fn grid_csv(points: &[GridPoint]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(GRID_CSV_HEADER)?;
    for p in points {
        w.write_record([
            p.kind.as_str().to_string(),
            format!("{:?}", p.x),
            format!("{:?}", p.y),
            format!("{:?}", p.h),
            p.label.as_str().to_string(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
}
