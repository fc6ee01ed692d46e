use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn slip() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_slip"));
    c.env_remove("SLIP_OUT_DIR");
    c
}

fn write_spec(dir: &Path, name: &str, doc: &Value) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, serde_json::to_string_pretty(doc).unwrap()).unwrap();
    p
}

fn run(sub: &str, spec: &Path, out: &Path) -> Output {
    slip()
        .args([sub, "--spec"])
        .arg(spec)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn summary(out: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap()
}

fn check(s: &Value, name: &str) -> bool {
    s["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == name)
        .unwrap_or_else(|| panic!("no check {name}"))["passed"]
        .as_bool()
        .unwrap()
}

fn eigs_doc(k: usize) -> Value {
    json!({"schema_version": 1, "kind": "eigs", "parameters": {"potential": {"type": "zero"}, "K": k}})
}

#[test]
fn eigs_match_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "eigs.json", &eigs_doc(5));
    let out = dir.path().join("out");
    let o = run("eigs", &spec, &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(out.join("eigs.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "k,lambda,dphi_at_1,norm_sq");
    for (i, line) in lines.enumerate() {
        let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        let k = (i + 1) as f64;
        assert_eq!(cols[0], k);
        assert!((cols[1] / (k * k * PI * PI) - 1.0).abs() < 1e-8, "{line}");
    }
    let s = summary(&out);
    assert!(s["build"]
        .as_str()
        .unwrap()
        .starts_with(env!("CARGO_PKG_VERSION")));
    assert_eq!(s["parameters"]["cells"], json!(1024));
    assert!(check(&s, "closed_form_eigenvalues"));
    assert!(fs::read_to_string(out.join("summary.txt"))
        .unwrap()
        .contains("result: PASS"));
}

#[test]
fn validate_reports_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let ok = write_spec(dir.path(), "ok.json", &eigs_doc(5));
    let o = slip()
        .args(["validate", "--spec"])
        .arg(&ok)
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(o.stderr.is_empty());

    let mut doc = eigs_doc(5);
    doc["parameters"].as_object_mut().unwrap().remove("K");
    let missing = write_spec(dir.path(), "missing.json", &doc);
    let o = slip()
        .args(["validate", "--spec"])
        .arg(&missing)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(err.contains("parameters.K"), "{err}");

    let mut doc = eigs_doc(5);
    doc["kind"] = json!("spectra");
    let unknown = write_spec(dir.path(), "unknown.json", &doc);
    let o = slip()
        .args(["validate", "--spec"])
        .arg(&unknown)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(String::from_utf8(o.stderr).unwrap().lines().count(), 1);
}

#[test]
fn invalid_spec_does_not_run() {
    let dir = tempfile::tempdir().unwrap();
    let mut doc = eigs_doc(5);
    doc["schema_version"] = json!(7);
    let spec = write_spec(dir.path(), "bad.json", &doc);
    let out = dir.path().join("out");
    let o = run("eigs", &spec, &out);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
    let spec = write_spec(dir.path(), "eigs.json", &eigs_doc(3));
    assert_eq!(run("zeros", &spec, &out).status.code(), Some(2));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let doc = json!({"schema_version": 1, "kind": "interp", "seed": 5, "parameters": {
        "P": {"from": 2, "to": 16, "step": 2}, "epsilon": 0.6, "K": 8,
        "potential": {"type": "random", "amplitude": 3.0}, "ensemble": 8}});
    let spec = write_spec(dir.path(), "interp.json", &doc);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(run("interp", &spec, &a).status.success());
    let o = slip()
        .args(["interp", "--threads", "1", "--spec"])
        .arg(&spec)
        .arg("--out")
        .arg(&b)
        .output()
        .unwrap();
    assert!(o.status.success());
    for name in ["summary.json", "summary.txt", "witness.csv"] {
        assert_eq!(
            fs::read(a.join(name)).unwrap(),
            fs::read(b.join(name)).unwrap(),
            "{name}"
        );
    }
    let c = dir.path().join("c");
    let o = slip()
        .args(["interp", "--seed", "6", "--spec"])
        .arg(&spec)
        .arg("--out")
        .arg(&c)
        .output()
        .unwrap();
    assert!(o.status.success());
    assert_eq!(summary(&c)["seed"], json!(6));
    assert_ne!(
        fs::read(a.join("witness.csv")).unwrap(),
        fs::read(c.join("witness.csv")).unwrap()
    );
}

#[test]
fn output_dir_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let mut doc = eigs_doc(2);
    let from_spec = dir.path().join("from-spec");
    doc["output_dir"] = json!(from_spec);
    let spec = write_spec(dir.path(), "eigs.json", &doc);
    assert!(slip()
        .args(["eigs", "--spec"])
        .arg(&spec)
        .output()
        .unwrap()
        .status
        .success());
    assert!(from_spec.join("eigs.csv").exists());

    let from_env = dir.path().join("from-env");
    let o = slip()
        .env("SLIP_OUT_DIR", &from_env)
        .args(["eigs", "--spec"])
        .arg(&spec)
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(from_env.join("eigs.csv").exists());

    let from_flag = dir.path().join("from-flag");
    let o = slip()
        .env("SLIP_OUT_DIR", dir.path().join("ignored"))
        .args(["eigs", "--spec"])
        .arg(&spec)
        .arg("--out")
        .arg(&from_flag)
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(from_flag.join("eigs.csv").exists());
    assert!(!dir.path().join("ignored").exists());
}

#[test]
fn step_potential_zero_density() {
    let dir = tempfile::tempdir().unwrap();
    let doc = json!({"schema_version": 1, "kind": "zeros", "parameters": {
        "potential1": {"type": "zero"},
        "potential2": {"type": "step", "value": 4.0, "until": 0.5},
        "x0": 0.6}});
    let spec = write_spec(dir.path(), "zeros.json", &doc);
    let out = dir.path().join("out");
    assert!(run("zeros", &spec, &out).status.success());
    let text = fs::read_to_string(out.join("density.csv")).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "radius,count,n_over_r,contour_residual"
    );
    let counts: Vec<usize> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(counts, vec![9, 18, 37]);
    let s = summary(&out);
    assert!(s["metrics"]["plateau"].as_f64().unwrap() <= 0.6 / PI + 0.02);
}

#[test]
fn theorem1_pipeline_certificate_and_recovery() {
    let dir = tempfile::tempdir().unwrap();
    let doc = json!({"schema_version": 1, "kind": "theorem1-pipeline", "seed": 3,
        "parameters": {"epsilon": 0.3, "S": {"from": 1, "to": 40}}});
    let spec = write_spec(dir.path(), "t1.json", &doc);
    let out = dir.path().join("out");
    let o = run("pipeline", &spec, &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let s = summary(&out);
    assert!(check(&s, "certificate_false_before"));
    assert!(check(&s, "alternative_shares_tail"));
    assert!(s["metrics"]["recovery_rel_l2"].as_f64().unwrap() <= 0.05);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("PASS certificate_false_before"));
    assert!(text.contains("PASS recovery_error"));
}

#[test]
fn windows_and_traces_run() {
    let dir = tempfile::tempdir().unwrap();
    let doc = json!({"schema_version": 1, "kind": "theorem2-pipeline", "parameters": {
        "potential1": {"type": "zero"}, "potential2": {"type": "constant", "value": 1.0},
        "f": {"type": "sum", "terms": [{"type": "sine", "mode": 1}, {"type": "sine", "mode": 5, "amplitude": 0.5}]},
        "T": 2.5, "K": 20, "m": [1, 5]}});
    let spec = write_spec(dir.path(), "t2.json", &doc);
    let out = dir.path().join("t2");
    assert!(run("pipeline", &spec, &out).status.success());
    let s = summary(&out);
    assert!(check(&s, "m5.extraction") && check(&s, "traces_differ"));

    let doc = json!({"schema_version": 1, "kind": "windows", "parameters": {
        "family": "cos", "potential1": {"type": "zero"}, "potential2": {"type": "constant", "value": 1.0},
        "m": 3, "K": 20, "T": 1.0}});
    let spec = write_spec(dir.path(), "w.json", &doc);
    let out = dir.path().join("w");
    let o = run("windows", &spec, &out);
    assert_eq!(o.status.code(), Some(1));
    assert!(!check(&summary(&out), "m3.constraints"));

    let doc = json!({"schema_version": 1, "kind": "wave-trace", "parameters": {
        "potential": {"type": "zero"}, "f": {"type": "sine", "mode": 1}, "T": 2.5, "K": 16, "samples": 501}});
    let spec = write_spec(dir.path(), "wave.json", &doc);
    let out = dir.path().join("wave");
    assert!(run("trace", &spec, &out).status.success());
    let text = fs::read_to_string(out.join("trace.csv")).unwrap();
    let err = text
        .lines()
        .skip(1)
        .map(|l| {
            let c: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
            (c[1] - PI * (PI * c[0]).cos()).abs()
        })
        .fold(0.0, f64::max);
    assert!(err < 1e-6, "{err}");
    assert_eq!(run("eigs", &spec, &out).status.code(), Some(2));
}

#[test]
fn example_specs_validate() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../specs");
    let mut n = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "json") {
            let o = slip()
                .args(["validate", "--spec"])
                .arg(&path)
                .output()
                .unwrap();
            assert!(
                o.status.success(),
                "{}: {}",
                path.display(),
                String::from_utf8_lossy(&o.stderr)
            );
            n += 1;
        }
    }
    assert_eq!(n, 10);
}
