use std::path::Path;
use std::process::{Command, Output};

fn isingtest(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_isingtest")).args(args).output().expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_model(dir: &Path, name: &str, json: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, json).unwrap();
    p
}

const EDGE: &str = r#"{"n": 4, "node_theta": [0, 0, 0, 0], "edges": [[0, 1, 1.2], [2, 3, -1.0]]}"#;
const UNIFORM: &str = r#"{"n": 4, "node_theta": [0, 0, 0, 0], "edges": []}"#;

#[test]
fn exit_codes_follow_the_decision() {
    let dir = tempfile::tempdir().unwrap();
    let far = write_model(dir.path(), "far.json", EDGE);
    let null = write_model(dir.path(), "null.json", UNIFORM);
    let base = ["test", "--tester", "loc-ind", "--eps", "0.5", "--beta", "1.2", "--seed", "3"];

    let reject = isingtest(&[&base[..], &["--model", path(&far)]].concat());
    assert_eq!(reject.status.code(), Some(1), "{}", String::from_utf8_lossy(&reject.stderr));
    let verdict: serde_json::Value = serde_json::from_slice(&reject.stdout).unwrap();
    assert_eq!(verdict["decision"], "reject");
    assert_eq!(verdict["witness"]["kind"], "edge");

    let accept = isingtest(&[&base[..], &["--model", path(&null)]].concat());
    assert_eq!(accept.status.code(), Some(0), "{}", String::from_utf8_lossy(&accept.stderr));

    let missing = isingtest(&["test", "--tester", "loc-ind", "--eps", "0.5", "--model", path(&null)]);
    assert_eq!(missing.status.code(), Some(2));
    let bad_flag = isingtest(&["test", "--tester", "nope"]);
    assert_eq!(bad_flag.status.code(), Some(2));
}

#[test]
fn identity_test_from_sample_file() {
    let dir = tempfile::tempdir().unwrap();
    let far = write_model(dir.path(), "far.json", EDGE);
    let null = write_model(dir.path(), "null.json", UNIFORM);
    let csv = dir.path().join("samples.csv");
    let out = isingtest(&["sample", "--model", path(&far), "--k", "5000", "--seed", "9", "--out", path(&csv)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let args = ["test", "--tester", "loc-id", "--samples", path(&csv), "--eps", "5", "--beta", "1.2", "--budget-override", "4000"];
    let same = isingtest(&[&args[..], &["--reference", path(&far)]].concat());
    assert_eq!(same.status.code(), Some(0), "{}", String::from_utf8_lossy(&same.stderr));
    let other = isingtest(&[&args[..], &["--reference", path(&null)]].concat());
    assert_eq!(other.status.code(), Some(1), "{}", String::from_utf8_lossy(&other.stderr));

    // Asking for more samples than the file holds is an error, not a verdict.
    let short = isingtest(&["test", "--tester", "loc-ind", "--samples", path(&csv), "--eps", "0.01", "--beta", "1.2"]);
    assert_eq!(short.status.code(), Some(2));
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let far = write_model(dir.path(), "far.json", EDGE);
    let config = dir.path().join("config.json");
    std::fs::write(
        &config,
        format!(r#"{{"model": {:?}, "tester": "forest-ind", "eps": 0.5, "seed": 4, "budget_override": 2000}}"#, far),
    )
    .unwrap();
    let from_file = isingtest(&["test", "--config", path(&config)]);
    assert_eq!(from_file.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&from_file.stdout).unwrap();
    assert_eq!(v["samples_used"], 2000);
    assert_eq!(v["algorithm"], "forest-independence");

    let overridden = isingtest(&["test", "--config", path(&config), "--budget-override", "300"]);
    let v: serde_json::Value = serde_json::from_slice(&overridden.stdout).unwrap();
    assert_eq!(v["samples_used"], 300);

    std::fs::write(&config, r#"{"bogus": 1}"#).unwrap();
    assert_eq!(isingtest(&["test", "--config", path(&config)]).status.code(), Some(2));
}

#[test]
fn exact_reports_marginals_and_distances() {
    let dir = tempfile::tempdir().unwrap();
    let far = write_model(dir.path(), "far.json", EDGE);
    let null = write_model(dir.path(), "null.json", UNIFORM);
    let out = isingtest(&["exact", "--model", path(&far), "--reference", path(&null)]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let mu01 = v["edge_marginals"][0][1].as_f64().unwrap();
    assert!((mu01 - 1.2f64.tanh()).abs() < 1e-12);
    let skl = v["skl_to_reference"].as_f64().unwrap();
    assert!((skl - (1.2 * 1.2f64.tanh() + 1.0 * 1.0f64.tanh())).abs() < 1e-12);

    let bad = write_model(dir.path(), "bad.json", r#"{"n": 2, "node_theta": [0, 0], "edges": [[1, 1, 0.5]]}"#);
    assert_eq!(isingtest(&["exact", "--model", path(&bad)]).status.code(), Some(2));
}

#[test]
fn sampling_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let far = write_model(dir.path(), "far.json", EDGE);
    let read = |name: &str, sampler: &str| {
        let p = dir.path().join(name);
        let out = isingtest(&["sample", "--model", path(&far), "--k", "300", "--seed", "2", "--sampler", sampler, "--out", path(&p)]);
        assert!(out.status.success());
        std::fs::read(p).unwrap()
    };
    assert_eq!(read("a.csv", "exact"), read("b.csv", "exact"));
    assert_eq!(read("c.csv", "glauber"), read("d.csv", "glauber"));
}

#[test]
fn make_instance_writes_certified_models() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("matching.json");
    let out = isingtest(&["make-instance", "--family", "random-matching", "--n", "8", "--eps", "0.2", "--seed", "1", "--out", path(&m)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["certified_skl"].as_f64().unwrap() >= 0.2);

    let u = write_model(dir.path(), "u.json", r#"{"n": 8, "node_theta": [0,0,0,0,0,0,0,0], "edges": []}"#);
    let exact = isingtest(&["exact", "--model", path(&m), "--reference", path(&u)]);
    let e: serde_json::Value = serde_json::from_slice(&exact.stdout).unwrap();
    assert!((e["skl_to_reference"].as_f64().unwrap() - v["certified_skl"].as_f64().unwrap()).abs() < 1e-9);

    let p = dir.path().join("pair.json");
    let out = isingtest(&["make-instance", "--family", "h-identity", "--beta", "1.0", "--eps", "0.1", "--out", path(&p)]);
    assert!(out.status.success());
    assert!(dir.path().join("pair.json.reference.json").exists());
    let bad = isingtest(&["make-instance", "--family", "spiral", "--eps", "0.1", "--out", path(&p)]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn experiment_csv_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    std::fs::write(
        &spec,
        r#"{
            "tester": "ltt-id",
            "instances": [
                {"name": "null", "family": "uniform", "n": 8},
                {"name": "perturbed", "family": "product-perturbation", "n": 8, "eps": 0.4, "seed": 1}
            ],
            "budgets": [1000, 4000],
            "trials": 8,
            "seed": 21,
            "config": {"epsilon": 0.4, "beta": 0.3, "field_bound": 0.3}
        }"#,
    )
    .unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = isingtest(&["experiment", "--config", path(&spec), "--out", path(&out)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        (std::fs::read(&out).unwrap(), std::fs::read(dir.path().join(format!("{name}.power.csv"))).unwrap())
    };
    let (a, b) = (run("a.csv"), run("b.csv"));
    assert_eq!(a, b);
    let text = String::from_utf8(a.0).unwrap();
    assert!(text.starts_with("schema=1\ninstance,family,n,budget,trial,decision,statistic,seed,ms\n"));
    assert_eq!(text.lines().count(), 2 + 2 * 2 * 8);

    let stdout = isingtest(&["experiment", "--config", path(&spec)]);
    assert_eq!(stdout.stdout, text.into_bytes());
    let reseeded = isingtest(&["experiment", "--config", path(&spec), "--seed", "22"]);
    assert_ne!(reseeded.stdout, stdout.stdout);
}
