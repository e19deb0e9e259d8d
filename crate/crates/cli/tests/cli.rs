use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn examples() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../examples_config")
}

fn schema(name: &str) -> jsonschema::Validator {
    let path =
        Path::new(env!("CARGO_MANIFEST_DIR")).join(format!("../../docs/schema/{name}.schema.json"));
    let value: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::validator_for(&value).unwrap()
}

fn run(args: &[&str], config: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lightcone"))
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn read_json(path: PathBuf) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn assert_valid(validator: &jsonschema::Validator, value: &serde_json::Value) {
    let errors: Vec<String> = validator
        .iter_errors(value)
        .map(|e| e.to_string())
        .collect();
    assert!(errors.is_empty(), "{errors:?}");
}

#[test]
fn reports_match_schemas() {
    let (verify, classify, residual) = (schema("verify"), schema("classify"), schema("residual"));
    for name in ["plane", "tanh", "paraboloid", "null_parabola", "curved"] {
        let out = tempfile::tempdir().unwrap();
        let config = examples().join(format!("{name}.json"));
        for sub in ["verify", "classify", "residual"] {
            run(&[sub], &config, out.path());
        }
        assert_valid(&verify, &read_json(out.path().join("verify.json")));
        assert_valid(&classify, &read_json(out.path().join("classify.json")));
        assert_valid(&residual, &read_json(out.path().join("residual.json")));
    }
}

#[test]
fn verdict_exit_codes() {
    let out = tempfile::tempdir().unwrap();
    for (name, code, verdict) in [
        ("plane", 0, "PASS"),
        ("null_parabola", 0, "PASS"),
        ("curved", 0, "PASS"),
        ("paraboloid", 3, "INAPPLICABLE"),
        ("tanh", 3, "INAPPLICABLE"),
    ] {
        let o = run(
            &["verify"],
            &examples().join(format!("{name}.json")),
            out.path(),
        );
        assert_eq!(
            o.status.code(),
            Some(code),
            "{name}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        assert_eq!(
            read_json(out.path().join("verify.json"))["verdict"],
            verdict
        );
    }
    let report = read_json(out.path().join("verify.json"));
    assert_eq!(report["degenerate_initial"], false);
}

#[test]
fn zero_tolerance_fails() {
    // The normalized null plane carries round-off in its containment residual; with a zero
    // tolerance the theorem check reports FAIL and exit 2 rather than INAPPLICABLE.
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("c.json");
    std::fs::write(
        &config,
        r#"{
  "n": 2,
  "f": "(x1 + x2)/sqrt(2)",
  "tolerances": {"containment": 0},
  "verify": {"t_span": [-0.2, 0.2], "steps": 40, "grid": 5, "lipschitz": {"samples": 50},
             "normalize": {"q": [0.2, 0.1], "v": [0.7071067811865476, 0.7071067811865476]}}
}"#,
    )
    .unwrap();
    let o = run(&["verify"], &config, dir.path());
    let report = read_json(dir.path().join("verify.json"));
    assert!(
        report["containment_max"].as_f64().unwrap() > 0.0,
        "{report}"
    );
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(report["verdict"], "FAIL");
}

#[test]
fn negative_tolerance_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("c.json");
    std::fs::write(&config, r#"{"n": 2, "f": "xn", "tolerances": {"ode": -1}}"#).unwrap();
    assert_eq!(run(&["verify"], &config, dir.path()).status.code(), Some(1));
    assert_eq!(
        run(&["verify", "--tol-b=-1"], &config, dir.path())
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn classify_splits_tanh_regions() {
    let out = tempfile::tempdir().unwrap();
    let o = run(&["classify"], &examples().join("tanh.json"), out.path());
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(out.path().join("classify.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("x1,x2,B,grad_norm,class"));
    for line in lines {
        let cells: Vec<&str> = line.split(',').collect();
        let (x1, x2): (f64, f64) = (cells[0].parse().unwrap(), cells[1].parse().unwrap());
        let gap = x2.cosh() - x1.abs();
        match cells[4] {
            "SpaceLike" => assert!(gap > 0.0, "{line}"),
            "TimeLike" => assert!(gap < 0.0, "{line}"),
            _ => assert!(gap.abs() < 1e-6, "{line}"),
        }
    }
}

#[test]
fn config_errors_exit_one_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.json");
    std::fs::write(&config, "{\n  \"n\": 2,\n  \"f\": \"x1 +\"\n}\n").unwrap();
    let o = run(&["classify"], &config, dir.path());
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 3"), "{err}");

    std::fs::write(&config, "{\n  \"n\": 2\n  \"f\": \"x1\"\n}\n").unwrap();
    let o = run(&["classify"], &config, dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
}

#[test]
fn usage_errors_exit_one() {
    let o = Command::new(env!("CARGO_BIN_EXE_lightcone"))
        .arg("frobnicate")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    let o = Command::new(env!("CARGO_BIN_EXE_lightcone"))
        .arg("--help")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn thread_variable_is_validated() {
    let out = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_lightcone"))
        .args(["residual", "--config"])
        .arg(examples().join("plane.json"))
        .arg("--out")
        .arg(out.path())
        .env("LIGHTCONE_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn singular_ode_writes_partial_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("c.json");
    std::fs::write(
        &config,
        r#"{"n": 2, "f": "xn + x1^2*xn", "ode": {"y_span": [0, 1], "steps": 10, "init": {"a": 0, "a_prime": 1, "b": [0.9], "b_prime": [1]}}}"#,
    )
    .unwrap();
    let o = run(&["ode"], &config, dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("singular"));
    let csv = std::fs::read_to_string(dir.path().join("ode.csv")).unwrap();
    assert!(csv.lines().count() >= 3);
}

#[test]
fn steps_flag_overrides_config() {
    let out = tempfile::tempdir().unwrap();
    run(
        &["ode", "--steps", "7"],
        &examples().join("plane.json"),
        out.path(),
    );
    let csv = std::fs::read_to_string(out.path().join("ode.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 8);
}
