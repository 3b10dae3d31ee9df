//! End-to-end runs of the `causal-svm` binary.

use std::path::{Path, PathBuf};
use std::process::Command;

use causal_svm::baselines::LearnerKind;
use causal_svm::cli::{manifest_path, Manifest, RunConfig};
use causal_svm::experiment::{DataSource, MatrixConfig, MethodSpec};
use causal_svm::kernels::KernelSpec;
use causal_svm::synthetic::Population;
use causal_svm::weights::WeightMode;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_causal-svm"))
}

fn run(args: &[&str]) -> i32 {
    let out = bin().args(args).output().expect("binary runs");
    out.status.code().expect("exit code")
}

fn ok(args: &[&str]) {
    let out = bin().args(args).output().expect("binary runs");
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read_manifest(out: &Path) -> Manifest {
    let text = std::fs::read_to_string(manifest_path(out)).expect("manifest written");
    let manifest: Manifest = serde_json::from_str(&text).unwrap();
    let again: RunConfig = serde_json::from_str(&serde_json::to_string(&manifest.config).unwrap()).unwrap();
    assert_eq!(again, manifest.config);
    assert_eq!(manifest.config.out(), out);
    manifest
}

fn header(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap().lines().next().unwrap().to_string()
}

#[test]
fn full_pipeline_writes_outputs_and_manifests() {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| -> PathBuf { dir.path().join(name) };

    let data = p("spirals.csv");
    ok(&["generate", "--population", "spirals", "--n", "120", "--seed", "3", "--out", s(&data)]);
    assert!(Path::new(&format!("{}.meta.json", s(&data))).exists());
    read_manifest(&data);

    let weighted = p("weighted.csv");
    ok(&["weights", "--data", s(&data), "--weights", "propensity", "--out", s(&weighted)]);
    assert!(Path::new(&format!("{}.propensity.json", s(&weighted))).exists());
    read_manifest(&weighted);

    let model = p("model.json");
    ok(&["train", "--data", s(&data), "--kernel", "rbf", "--inv-width", "0.1", "--out", s(&model)]);
    read_manifest(&model);

    let baseline = p("svm2.json");
    ok(&["train", "--data", s(&data), "--method", "svm2", "--out", s(&baseline)]);

    let pred = p("pred.csv");
    ok(&["predict", "--model", s(&model), "--data", s(&data), "--out", s(&pred)]);
    assert_eq!(header(&pred), "index,group,h,label");
    assert_eq!(std::fs::read_to_string(&pred).unwrap().lines().count(), 121);

    let eval = p("eval.csv");
    ok(&["evaluate", "--model", s(&baseline), "--data", s(&data), "--out", s(&eval)]);
    assert_eq!(std::fs::read_to_string(&eval).unwrap().lines().count(), 3);

    let grid = p("grid.csv");
    ok(&[
        "grid", "--model", s(&model), "--bounds", "-7,7,-7,7", "--resolution", "5", "--out", s(&grid),
    ]);
    assert_eq!(header(&grid), "kind,x,y,h,label");

    let cv = p("cv.csv");
    ok(&[
        "cv", "--data", s(&data), "--kernels", "linear,rbf:0.1", "--gamma", "1e-6", "--folds", "3", "--out",
        s(&cv),
    ]);
    assert_eq!(header(&cv), "kernel,gamma,score,failures,selected");

    let bound = p("bound.json");
    ok(&[
        "bound", "--n-t", "400", "--n-c", "400", "--pdim", "3", "--data", s(&data), "--out", s(&bound),
    ]);
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&bound).unwrap()).unwrap();
    assert!(report["bound"].as_f64().unwrap() > 0.0);
    read_manifest(&bound);
}

#[test]
fn matrix_rerun_is_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let config = MatrixConfig {
        data: DataSource::Generated {
            population: Population::Spirals { noise_prob: 0.0 },
            n: 160,
            assignment: None,
        },
        test_fraction: 0.5,
        seeds: vec![0, 1],
        methods: vec![
            MethodSpec::CausalSvm { kernel: KernelSpec::Rbf { inv_width: 0.1 }, gamma: 1e-8 },
            MethodSpec::TwoModel { learner: LearnerKind::Logistic { l2: 1e-4 } },
        ],
        fractions: vec![0.01, 0.1],
        weights: WeightMode::Constant,
        tol: 1e-8,
    };
    let cfg = dir.path().join("matrix.json");
    std::fs::write(&cfg, serde_json::to_string(&config).unwrap()).unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    ok(&["matrix", "--config", s(&cfg), "--out", s(&a)]);
    ok(&["matrix", "--config", s(&cfg), "--out", s(&b)]);
    let (ta, tb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ta, tb);
    assert_eq!(header(&a), "method,l_{0.01},l_{0.1}");
    let manifest = read_manifest(&a);
    match manifest.config {
        RunConfig::Matrix { matrix, .. } => assert_eq!(matrix, config),
        other => panic!("unexpected config {other:?}"),
    }
}

#[test]
fn exit_codes_follow_error_class() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    let missing = dir.path().join("missing.csv");
    assert_eq!(run(&["train", "--data", s(&missing), "--out", s(&out)]), 4);
    assert_eq!(
        run(&["generate", "--population", "spirals", "--n", "0", "--out", s(&out)]),
        2
    );
    assert_eq!(run(&["bound", "--n-t", "10", "--n-c", "10", "--pdim", "2", "--delta", "5", "--d2", "1", "--out", s(&out)]), 2);
    assert_eq!(run(&["no-such-command"]), 2);
}
