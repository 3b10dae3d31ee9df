//! Command-line front end.
//!
//! Every subcommand is resolved into a [`RunConfig`], executed, and recorded
//! in a manifest `<out>.manifest.json` holding the full configuration, the
//! crate version, the RNG and the solver identity.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::baselines::{LearnerKind, TwoModelPredictor};
use crate::bounds::{
    delta_c, delta_t, estimate_d2, generalization_bound, sauer_growth_log, BoundInputs, D2Estimator,
};
use crate::causal_svm::{label_from_value, train, CausalSvmModel, DEFAULT_TOL};
use crate::cv::{nested_cv_select, CvGrid, CvResult, DEFAULT_FOLDS};
use crate::domain::Dataset;
use crate::error::{Error, ErrorClass, Result};
use crate::evaluation::{evaluate_model, score_all, EffectScorer, EvaluationReport};
use crate::experiment::{emit_decision_grid, grid_csv, run_experiment_matrix, GridBounds, MatrixConfig};
use crate::io::{read_dataset_file, write_dataset_file};
use crate::kernels::KernelSpec;
use crate::qp::SolverInfo;
use crate::surrogate::SurrogateLoss;
use crate::synthetic::{generate, Assignment, GenerationMeta, GeneratorSpec, Population, RNG_ID};
use crate::weights::{apply_weights, WeightMode, DEFAULT_CLIP, DEFAULT_L2};

#[derive(Debug, Parser)]
#[command(name = "causal-svm", version, about = "Minimax causal SVM for treatment-effect sign estimation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw a synthetic dataset with ground-truth potential outcomes.
    Generate(GenerateArgs),
    /// Fill the control density ratios.
    Weights(WeightsArgs),
    /// Fit a causal SVM or a two-model baseline.
    Train(TrainArgs),
    /// Decision values and effect labels for every unit of a dataset.
    Predict(PredictArgs),
    /// Quantile-neutral loss against ground truth.
    Evaluate(EvaluateArgs),
    /// Methods × seeds results table.
    Matrix(MatrixArgs),
    /// Cross-validated selection of kernel and γ.
    Cv(CvArgs),
    /// Generalization-bound calculator.
    Bound(BoundArgs),
    /// Decision surface of a 2-D model on a lattice.
    Grid(GridArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PopulationArg {
    Spirals,
    Threshold2d,
    Imbalanced30,
    Highdim120,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KernelArg {
    Linear,
    Poly2,
    Poly3,
    Rbf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WeightsArg {
    Constant,
    Propensity,
    Column,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Causal,
    Svm2,
    Ridge2,
    Logistic2,
}

#[derive(Debug, Args)]
pub struct KernelOpts {
    #[arg(long, value_enum, default_value = "rbf")]
    pub kernel: KernelArg,
    /// RBF inverse width `g` in `exp(−g‖x − x′‖²)`.
    #[arg(long, default_value_t = 0.1)]
    pub inv_width: f64,
}

impl KernelOpts {
    pub fn spec(&self) -> KernelSpec {
        match self.kernel {
            KernelArg::Linear => KernelSpec::Linear,
            KernelArg::Poly2 => KernelSpec::Polynomial { degree: 2 },
            KernelArg::Poly3 => KernelSpec::Polynomial { degree: 3 },
            KernelArg::Rbf => KernelSpec::Rbf { inv_width: self.inv_width },
        }
    }
}

#[derive(Debug, Args)]
pub struct WeightOpts {
    #[arg(long, value_enum, default_value = "constant")]
    pub weights: WeightsArg,
    /// Ratios are clipped into `[1/clip, clip]`.
    #[arg(long, default_value_t = DEFAULT_CLIP)]
    pub clip: f64,
    /// Ridge penalty of the propensity model.
    #[arg(long = "propensity-l2", default_value_t = DEFAULT_L2)]
    pub propensity_l2: f64,
}

impl WeightOpts {
    pub fn mode(&self) -> WeightMode {
        match self.weights {
            WeightsArg::Constant => WeightMode::Constant,
            WeightsArg::Propensity => WeightMode::Propensity {
                l2: self.propensity_l2,
                clip: self.clip,
            },
            WeightsArg::Column => WeightMode::Column,
        }
    }
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub population: PopulationArg,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Effect-flip probability (spirals only).
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    /// `balanced`, `bernoulli:<p>` or `sigmoid:<scale>:<feature>`; default per population.
    #[arg(long)]
    pub assignment: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct WeightsArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[command(flatten)]
    pub weights: WeightOpts,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum, default_value = "causal")]
    pub method: MethodArg,
    #[command(flatten)]
    pub kernel: KernelOpts,
    #[arg(long, default_value_t = 1e-8)]
    pub gamma: f64,
    /// Ridge / logistic penalty for the two-model baselines.
    #[arg(long, default_value_t = 1e-4)]
    pub l2: f64,
    #[command(flatten)]
    pub weights: WeightOpts,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    pub theta: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "0.01,0.1")]
    pub fractions: Vec<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct MatrixArgs {
    /// JSON matrix configuration.
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
    #[arg(long, value_delimiter = ',')]
    pub fractions: Option<Vec<f64>>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CvArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Kernel tokens: `linear`, `poly<k>`, `rbf:<inv_width>`.
    #[arg(long, value_delimiter = ',', default_value = "linear,poly2,poly3,rbf:0.05,rbf:0.1")]
    pub kernels: Vec<String>,
    #[arg(long = "gamma", value_delimiter = ',', default_value = "1e-8,1e-6,1e-4")]
    pub gammas: Vec<f64>,
    #[arg(long, default_value_t = DEFAULT_FOLDS)]
    pub folds: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub weights: WeightOpts,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    #[arg(long)]
    pub n_t: usize,
    #[arg(long)]
    pub n_c: usize,
    #[arg(long, default_value_t = 0.05)]
    pub delta: f64,
    /// Pseudo-dimension of the hypothesis class.
    #[arg(long)]
    pub pdim: usize,
    /// `log S_F(2 n_T)`; defaults to Sauer's bound with VC dimension `pdim`.
    #[arg(long)]
    pub growth_log: Option<f64>,
    /// Rényi divergence `d₂`; alternatively estimated from `--data`.
    #[arg(long, conflicts_with = "data")]
    pub d2: Option<f64>,
    /// Dataset for the Gaussian `d₂` estimate.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    pub m: f64,
    #[arg(long, default_value_t = 0.0)]
    pub r_hat_t: f64,
    #[arg(long, default_value_t = 0.0)]
    pub r_hat_c: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// `xmin,xmax,ymin,ymax`
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub bounds: Vec<f64>,
    #[arg(long, default_value_t = 50)]
    pub resolution: usize,
    #[arg(long, default_value_t = 1.0)]
    pub theta: f64,
    #[arg(long)]
    pub out: PathBuf,
}

/// Fully resolved configuration of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum RunConfig {
    Generate {
        spec: GeneratorSpec,
        out: PathBuf,
    },
    Weights {
        data: PathBuf,
        weights: WeightMode,
        out: PathBuf,
    },
    Train {
        data: PathBuf,
        method: TrainMethod,
        weights: WeightMode,
        tol: f64,
        out: PathBuf,
    },
    Predict {
        model: PathBuf,
        data: PathBuf,
        theta: f64,
        out: PathBuf,
    },
    Evaluate {
        model: PathBuf,
        data: PathBuf,
        fractions: Vec<f64>,
        out: PathBuf,
    },
    Matrix {
        matrix: MatrixConfig,
        out: PathBuf,
    },
    Cv {
        data: PathBuf,
        grid: CvGrid,
        loss: SurrogateLoss,
        weights: WeightMode,
        out: PathBuf,
    },
    Bound {
        n_t: usize,
        n_c: usize,
        delta: f64,
        pdim: usize,
        growth_log: f64,
        d2: D2Source,
        m: f64,
        r_hat_t: f64,
        r_hat_c: f64,
        out: PathBuf,
    },
    Grid {
        model: PathBuf,
        bounds: GridBounds,
        resolution: usize,
        theta: f64,
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TrainMethod {
    CausalSvm { kernel: KernelSpec, gamma: f64 },
    TwoModel { learner: LearnerKind },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum D2Source {
    Value { d2: f64 },
    GaussianFromData { data: PathBuf },
}

impl RunConfig {
    pub fn out(&self) -> &Path {
        match self {
            RunConfig::Generate { out, .. }
            | RunConfig::Weights { out, .. }
            | RunConfig::Train { out, .. }
            | RunConfig::Predict { out, .. }
            | RunConfig::Evaluate { out, .. }
            | RunConfig::Matrix { out, .. }
            | RunConfig::Cv { out, .. }
            | RunConfig::Bound { out, .. }
            | RunConfig::Grid { out, .. } => out,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub rng: String,
    pub solver: SolverInfo,
    pub config: RunConfig,
    pub outputs: Vec<PathBuf>,
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

fn sidecar(out: &Path, suffix: &str) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// `linear`, `poly<k>`, `quadratic`, `cubic` or `rbf:<inv_width>`.
pub fn parse_kernel_token(token: &str) -> Result<KernelSpec> {
    let t = token.trim();
    let spec = match t {
        "linear" => KernelSpec::Linear,
        "quadratic" => KernelSpec::Polynomial { degree: 2 },
        "cubic" => KernelSpec::Polynomial { degree: 3 },
        _ => {
            if let Some(d) = t.strip_prefix("poly") {
                KernelSpec::Polynomial {
                    degree: d.parse().map_err(|_| Error::invalid(format!("bad kernel `{t}`")))?,
                }
            } else if let Some(w) = t.strip_prefix("rbf:") {
                KernelSpec::Rbf {
                    inv_width: w.parse().map_err(|_| Error::invalid(format!("bad kernel `{t}`")))?,
                }
            } else {
                return Err(Error::invalid(format!("unknown kernel `{t}`")));
            }
        }
    };
    spec.validate()?;
    Ok(spec)
}

/// `balanced`, `bernoulli:<p>` or `sigmoid:<scale>:<feature_index>`.
pub fn parse_assignment(token: &str) -> Result<Assignment> {
    let parts: Vec<&str> = token.trim().split(':').collect();
    let bad = || Error::invalid(format!("bad assignment `{token}`"));
    let a = match parts.as_slice() {
        ["balanced"] => Assignment::Balanced,
        ["bernoulli", p] => Assignment::BernoulliP {
            p: p.parse().map_err(|_| bad())?,
        },
        ["sigmoid", s, k] => Assignment::CovariateSigmoid {
            scale: s.parse().map_err(|_| bad())?,
            feature_index: k.parse().map_err(|_| bad())?,
        },
        _ => return Err(bad()),
    };
    a.validate()?;
    Ok(a)
}

impl Command {
    /// Resolves the parsed arguments into a run configuration.
    pub fn resolve(&self) -> Result<RunConfig> {
        Ok(match self {
            Command::Generate(a) => {
                let population = match a.population {
                    PopulationArg::Spirals => Population::Spirals { noise_prob: a.noise },
                    PopulationArg::Threshold2d => Population::Threshold2d,
                    PopulationArg::Imbalanced30 => Population::Imbalanced30,
                    PopulationArg::Highdim120 => Population::Highdim120,
                };
                let mut spec = GeneratorSpec::new(population, a.n, a.seed);
                if let Some(t) = &a.assignment {
                    spec.assignment = parse_assignment(t)?;
                }
                RunConfig::Generate {
                    spec,
                    out: a.out.clone(),
                }
            }
            Command::Weights(a) => RunConfig::Weights {
                data: a.data.clone(),
                weights: a.weights.mode(),
                out: a.out.clone(),
            },
            Command::Train(a) => {
                let kernel = a.kernel.spec();
                let method = match a.method {
                    MethodArg::Causal => TrainMethod::CausalSvm {
                        kernel,
                        gamma: a.gamma,
                    },
                    MethodArg::Svm2 => TrainMethod::TwoModel {
                        learner: LearnerKind::svm_for_gamma(kernel, a.gamma),
                    },
                    MethodArg::Ridge2 => TrainMethod::TwoModel {
                        learner: LearnerKind::Ridge { kernel, l2: a.l2 },
                    },
                    MethodArg::Logistic2 => TrainMethod::TwoModel {
                        learner: LearnerKind::Logistic { l2: a.l2 },
                    },
                };
                RunConfig::Train {
                    data: a.data.clone(),
                    method,
                    weights: a.weights.mode(),
                    tol: a.tol,
                    out: a.out.clone(),
                }
            }
            Command::Predict(a) => RunConfig::Predict {
                model: a.model.clone(),
                data: a.data.clone(),
                theta: a.theta,
                out: a.out.clone(),
            },
            Command::Evaluate(a) => RunConfig::Evaluate {
                model: a.model.clone(),
                data: a.data.clone(),
                fractions: a.fractions.clone(),
                out: a.out.clone(),
            },
            Command::Matrix(a) => {
                let mut matrix: MatrixConfig = serde_json::from_str(&fs::read_to_string(&a.config)?)?;
                if let Some(s) = &a.seeds {
                    matrix.seeds = s.clone();
                }
                if let Some(f) = &a.fractions {
                    matrix.fractions = f.clone();
                }
                if let Some(t) = a.tol {
                    matrix.tol = t;
                }
                RunConfig::Matrix {
                    matrix,
                    out: a.out.clone(),
                }
            }
            Command::Cv(a) => RunConfig::Cv {
                data: a.data.clone(),
                grid: CvGrid {
                    kernels: a.kernels.iter().map(|k| parse_kernel_token(k)).collect::<Result<_>>()?,
                    gammas: a.gammas.clone(),
                    folds: a.folds,
                    seed: a.seed,
                },
                loss: SurrogateLoss::Hinge,
                weights: a.weights.mode(),
                out: a.out.clone(),
            },
            Command::Bound(a) => RunConfig::Bound {
                n_t: a.n_t,
                n_c: a.n_c,
                delta: a.delta,
                pdim: a.pdim,
                growth_log: a.growth_log.unwrap_or_else(|| sauer_growth_log(a.pdim, 2 * a.n_t)),
                d2: match (&a.data, a.d2) {
                    (Some(p), _) => D2Source::GaussianFromData { data: p.clone() },
                    (None, Some(d2)) => D2Source::Value { d2 },
                    (None, None) => return Err(Error::invalid("bound needs --d2 or --data")),
                },
                m: a.m,
                r_hat_t: a.r_hat_t,
                r_hat_c: a.r_hat_c,
                out: a.out.clone(),
            },
            Command::Grid(a) => {
                let [xmin, xmax, ymin, ymax] = a.bounds[..] else {
                    return Err(Error::invalid("--bounds takes xmin,xmax,ymin,ymax"));
                };
                RunConfig::Grid {
                    model: a.model.clone(),
                    bounds: GridBounds { xmin, xmax, ymin, ymax },
                    resolution: a.resolution,
                    theta: a.theta,
                    out: a.out.clone(),
                }
            }
        })
    }
}

/// A stored model of either family.
pub enum StoredModel {
    Causal(CausalSvmModel),
    TwoModel(TwoModelPredictor),
}

impl StoredModel {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let value: serde_json::Value = serde_json::from_str(&text)?;
        if value.get("two_model").is_some() {
            Ok(StoredModel::TwoModel(TwoModelPredictor::from_json(&text)?))
        } else {
            Ok(StoredModel::Causal(CausalSvmModel::from_json(&text)?))
        }
    }

    pub fn scorer(&self) -> &dyn EffectScorer {
        match self {
            StoredModel::Causal(m) => m,
            StoredModel::TwoModel(m) => m,
        }
    }
}

fn write_csv<I, R>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

fn weighted(data: &Path, mode: &WeightMode) -> Result<Dataset> {
    Ok(apply_weights(&read_dataset_file(data)?, mode)?.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub delta_t: f64,
    pub delta_c: f64,
    pub d2: f64,
    pub growth_log: f64,
    pub bound: f64,
}

/// Executes a run and returns the paths it wrote (manifest excluded).
pub fn execute(config: &RunConfig) -> Result<Vec<PathBuf>> {
    let out = config.out().to_path_buf();
    let mut outputs = vec![out.clone()];
    match config {
        RunConfig::Generate { spec, .. } => {
            write_dataset_file(&generate(spec)?, &out)?;
            let meta = sidecar(&out, ".meta.json");
            fs::write(&meta, serde_json::to_string_pretty(&GenerationMeta::for_spec(spec))?)?;
            outputs.push(meta);
        }
        RunConfig::Weights { data, weights, .. } => {
            let (ds, model) = apply_weights(&read_dataset_file(data)?, weights)?;
            write_dataset_file(&ds, &out)?;
            if let Some(m) = model {
                let p = sidecar(&out, ".propensity.json");
                fs::write(&p, serde_json::to_string_pretty(&m)?)?;
                outputs.push(p);
            }
        }
        RunConfig::Train {
            data,
            method,
            weights,
            tol,
            ..
        } => {
            let ds = weighted(data, weights)?;
            let json = match *method {
                TrainMethod::CausalSvm { kernel, gamma } => train(&ds, &kernel, gamma, *tol)?.to_json()?,
                TrainMethod::TwoModel { learner } => TwoModelPredictor::fit(&ds, &learner)?.to_json()?,
            };
            fs::write(&out, json)?;
        }
        RunConfig::Predict { model, data, theta, .. } => {
            if !(*theta > 0.0) {
                return Err(Error::invalid(format!("θ must be positive, got {theta}")));
            }
            let model = StoredModel::load(model)?;
            let ds = read_dataset_file(data)?;
            let h = score_all(model.scorer(), &ds)?;
            write_csv(
                &out,
                &["index", "group", "h", "label"],
                ds.units().iter().zip(&h).enumerate().map(|(i, (u, h))| {
                    [
                        i.to_string(),
                        u.group.as_str().to_string(),
                        format!("{h:?}"),
                        label_from_value(*h, *theta).as_str().to_string(),
                    ]
                }),
            )?;
        }
        RunConfig::Evaluate { model, data, fractions, .. } => {
            let model = StoredModel::load(model)?;
            let reports = evaluate_model(model.scorer(), &read_dataset_file(data)?, fractions)?;
            write_csv(&out, &EvaluationReport::CSV_HEADER, reports.iter().map(|r| r.csv_record()))?;
        }
        RunConfig::Matrix { matrix, .. } => {
            let result = run_experiment_matrix(matrix)?;
            fs::write(&out, result.to_csv()?)?;
            let detail = sidecar(&out, ".runs.json");
            fs::write(&detail, serde_json::to_string_pretty(&result)?)?;
            outputs.push(detail);
        }
        RunConfig::Cv {
            data,
            grid,
            loss,
            weights,
            ..
        } => {
            let result: CvResult = nested_cv_select(&weighted(data, weights)?, grid, *loss)?;
            write_csv(&out, &CvResult::CSV_HEADER, result.csv_records())?;
        }
        RunConfig::Bound {
            n_t,
            n_c,
            delta,
            pdim,
            growth_log,
            d2,
            m,
            r_hat_t,
            r_hat_c,
            ..
        } => {
            let d2 = match d2 {
                D2Source::Value { d2 } => estimate_d2(&[], &[], &D2Estimator::UserSupplied { value: *d2 })?,
                D2Source::GaussianFromData { data } => {
                    let ds = read_dataset_file(data)?;
                    let t: Vec<&[f64]> = ds.treatment().iter().map(|u| u.features.as_slice()).collect();
                    let c: Vec<&[f64]> = ds.control().iter().map(|u| u.features.as_slice()).collect();
                    estimate_d2(&t, &c, &D2Estimator::GaussianParametric)?
                }
            };
            let inputs = BoundInputs {
                n_t: *n_t,
                n_c: *n_c,
                delta: *delta,
                pdim: *pdim,
                growth_log: *growth_log,
                d2,
                m: *m,
            };
            let report = BoundReport {
                delta_t: delta_t(*n_t, delta / 2.0, *growth_log)?,
                delta_c: delta_c(*n_c, delta / 2.0, *pdim, d2)?,
                d2,
                growth_log: *growth_log,
                bound: generalization_bound(*r_hat_t, *r_hat_c, &inputs)?,
            };
            fs::write(&out, serde_json::to_string_pretty(&report)?)?;
        }
        RunConfig::Grid {
            model,
            bounds,
            resolution,
            theta,
            ..
        } => {
            let StoredModel::Causal(m) = StoredModel::load(model)? else {
                return Err(Error::invalid("grid output needs a causal SVM model"));
            };
            fs::write(&out, grid_csv(&emit_decision_grid(&m, bounds, *resolution, *theta)?)?)?;
        }
    }
    Ok(outputs)
}

/// Executes `config` and writes its manifest next to the main output.
pub fn run(config: &RunConfig) -> Result<Manifest> {
    let outputs = execute(config)?;
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        rng: RNG_ID.to_string(),
        solver: SolverInfo::default(),
        config: config.clone(),
        outputs,
    };
    fs::write(manifest_path(config.out()), serde_json::to_string_pretty(&manifest)?)?;
    Ok(manifest)
}

/// Process exit code for an error: 2 configuration, 3 numerical, 4 I/O.
pub fn exit_code(err: &Error) -> i32 {
    match err.class() {
        ErrorClass::Config => 2,
        ErrorClass::Numerical => 3,
        ErrorClass::Io => 4,
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match cli.command.resolve().and_then(|c| run(&c)) {
        Ok(_) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_tokens() {
        assert_eq!(parse_kernel_token("rbf:0.1").unwrap(), KernelSpec::Rbf { inv_width: 0.1 });
        assert_eq!(parse_kernel_token("poly3").unwrap(), KernelSpec::Polynomial { degree: 3 });
        assert!(parse_kernel_token("rbf:-1").is_err());
        assert!(parse_kernel_token("sigmoid").is_err());
    }

    #[test]
    fn assignment_tokens() {
        assert_eq!(parse_assignment("bernoulli:0.7").unwrap(), Assignment::BernoulliP { p: 0.7 });
        assert!(parse_assignment("bernoulli:1.5").is_err());
        assert!(parse_assignment("sigmoid:0.9").is_err());
    }

    #[test]
    fn run_config_round_trips() {
        let cli = Cli::try_parse_from([
            "causal-svm", "train", "--data", "d.csv", "--kernel", "rbf", "--inv-width", "0.05",
            "--gamma", "1e-6", "--weights", "propensity", "--clip", "10", "--out", "m.json",
        ])
        .unwrap();
        let cfg = cli.command.resolve().unwrap();
        let back: RunConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn manifest_path_appends_suffix() {
        assert_eq!(manifest_path(Path::new("a/b.csv")), PathBuf::from("a/b.csv.manifest.json"));
    }
}
