use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use prospect_core::agents::{economicus_choice, load_response_table};
use prospect_core::prospects::read_contexts;
use serde_json::Value;

fn prospect(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_prospect"))
        .args(args)
        .current_dir(cwd)
        .env_remove("PROSPECT_TEST_MISSING_KEY")
        .output()
        .expect("spawn prospect")
}

fn ok(args: &[&str], cwd: &Path) {
    let out = prospect(args, cwd);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn json(path: PathBuf) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn gen(dir: &Path, name: &str, extra: &[&str]) {
    let mut args = vec!["gen", "--out", name];
    args.extend_from_slice(extra);
    ok(&args, dir);
}

const PT: [&str; 8] = [
    "--sigma", "0.8", "--lambda", "2", "--gamma", "0.7", "--beta", "10",
];

#[test]
fn gen_writes_default_grid_reproducibly() {
    let tmp = tempfile::tempdir().unwrap();
    gen(tmp.path(), "a", &[]);
    gen(tmp.path(), "b", &[]);
    let a = fs::read(tmp.path().join("a/contexts.json")).unwrap();
    assert_eq!(a, fs::read(tmp.path().join("b/contexts.json")).unwrap());
    assert_eq!(read_contexts(&tmp.path().join("a/contexts.json")).unwrap().len(), 324);
    let manifest = json(tmp.path().join("a/manifest.json"));
    assert_eq!(manifest["command"], "gen");
    assert_eq!(manifest["outputs"][0], "contexts.json");
}

#[test]
fn invalid_sample_size_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = prospect(&["gen", "--sample-sizes", "0", "--out", "g"], tmp.path());
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("sample size"));
    assert!(!tmp.path().join("g").exists());

    fs::write(tmp.path().join("grid.toml"), "[grid]\nsample_sizes = [0]\n").unwrap();
    let out = prospect(&["gen", "--config", "grid.toml", "--out", "g"], tmp.path());
    assert_eq!(code(&out), 2);
}

#[test]
fn output_directory_must_be_fresh_unless_forced() {
    let tmp = tempfile::tempdir().unwrap();
    gen(tmp.path(), "g", &[]);
    assert_eq!(code(&prospect(&["gen", "--out", "g"], tmp.path())), 2);
    ok(&["gen", "--out", "g", "--force"], tmp.path());
    let manifests = fs::read_dir(tmp.path().join("g"))
        .unwrap()
        .filter(|e| e.as_ref().unwrap().file_name() == "manifest.json")
        .count();
    assert_eq!(manifests, 1);
}

#[test]
fn economicus_run_is_decisive_where_options_differ() {
    let tmp = tempfile::tempdir().unwrap();
    gen(tmp.path(), "g", &[]);
    ok(
        &["run", "--contexts", "g/contexts.json", "--agent", "economicus", "--reps", "10", "--out", "r"],
        tmp.path(),
    );
    let contexts = read_contexts(&tmp.path().join("g/contexts.json")).unwrap();
    let table = load_response_table(&tmp.path().join("r/responses.csv"), None).unwrap();
    let mut decided = 0;
    for c in &contexts {
        let p = economicus_choice(c);
        if p != 0.5 {
            assert_eq!(table.rate(&c.id()), Some(p), "{}", c.id());
            decided += 1;
        }
    }
    assert!(decided >= 300);

    ok(
        &["report", "--contexts", "g/contexts.json", "--model", "econ=r/dataset.json", "--subset", "explicit", "--out", "rep"],
        tmp.path(),
    );
    let metrics = json(tmp.path().join("rep/metrics.json"));
    let row = &metrics["consistency"][0];
    assert_eq!(row["model"], "econ");
    for key in ["decisiveness", "order", "prompt", "frame"] {
        assert_eq!(row[key], 1.0, "{key}");
    }
}

#[test]
fn agent_and_mock_backend_runs_are_idempotent() {
    let tmp = tempfile::tempdir().unwrap();
    gen(tmp.path(), "g", &["--explicit-only"]);
    for out in ["a", "b"] {
        let mut args = vec!["run", "--contexts", "g/contexts.json", "--backend", "mock-pt", "--seed", "3", "--out", out];
        args.extend_from_slice(&PT);
        ok(&args, tmp.path());
    }
    for f in ["dataset.json", "responses.csv"] {
        assert_eq!(
            fs::read(tmp.path().join("a").join(f)).unwrap(),
            fs::read(tmp.path().join("b").join(f)).unwrap(),
            "{f}"
        );
    }
    let archive = |dir: &str| -> Vec<Value> {
        fs::read_to_string(tmp.path().join(dir).join("archive.jsonl"))
            .unwrap()
            .lines()
            .map(|l| {
                let mut v: Value = serde_json::from_str(l).unwrap();
                v["latency_ms"] = Value::Null;
                v
            })
            .collect()
    };
    assert_eq!(archive("a"), archive("b"));
    let mut manifest = json(tmp.path().join("a/manifest.json"));
    let mut other = json(tmp.path().join("b/manifest.json"));
    manifest["config"]["args"]["out"]["out"] = Value::Null;
    other["config"]["args"]["out"]["out"] = Value::Null;
    assert_eq!(manifest, other);
    assert_eq!(manifest["seeds"]["seed"], 3);
    assert_eq!(manifest["inputs"][0]["path"], "g/contexts.json");
    assert_eq!(manifest["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn pt_agent_needs_its_parameters() {
    let tmp = tempfile::tempdir().unwrap();
    gen(tmp.path(), "g", &["--explicit-only"]);
    let out = prospect(
        &["run", "--contexts", "g/contexts.json", "--agent", "pt", "--sigma", "0.8", "--out", "r"],
        tmp.path(),
    );
    assert_eq!(code(&out), 2);
    let out = prospect(
        &["run", "--contexts", "g/contexts.json", "--agent", "economicus", "--backend", "mock-pt", "--out", "r"],
        tmp.path(),
    );
    assert_eq!(code(&out), 2);
}

#[test]
fn missing_credential_fails_before_any_request() {
    let tmp = tempfile::tempdir().unwrap();
    gen(tmp.path(), "g", &["--explicit-only"]);
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    listener.set_nonblocking(true).unwrap();
    let config = format!(
        "[backend]\nkind = \"http\"\nendpoint = \"http://{}/v1/chat/completions\"\nmodel = \"m\"\napi_key_env = \"PROSPECT_TEST_MISSING_KEY\"\n",
        listener.local_addr().unwrap()
    );
    fs::write(tmp.path().join("live.toml"), config).unwrap();
    let out = prospect(
        &["run", "--contexts", "g/contexts.json", "--config", "live.toml", "--out", "r"],
        tmp.path(),
    );
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("PROSPECT_TEST_MISSING_KEY"));
    assert!(listener.accept().is_err(), "a request was sent");
    assert!(!tmp.path().join("r").exists());
}

#[test]
fn unreachable_backend_exits_with_backend_code() {
    let tmp = tempfile::tempdir().unwrap();
    gen(tmp.path(), "g", &["--explicit-only", "--pairs", "2"]);
    let port = {
        let l = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
        l.local_addr().unwrap().port()
    };
    let config = format!(
        "[backend]\nkind = \"http\"\nendpoint = \"http://127.0.0.1:{port}/v1\"\nmodel = \"m\"\napi_key_env = \"PROSPECT_TEST_DEAD_KEY\"\n[query]\nreps = 1\nretries = 0\ntimeout_secs = 2\n"
    );
    fs::write(tmp.path().join("dead.toml"), config).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_prospect"))
        .args(["run", "--contexts", "g/contexts.json", "--config", "dead.toml", "--out", "r"])
        .current_dir(tmp.path())
        .env("PROSPECT_TEST_DEAD_KEY", "x")
        .output()
        .unwrap();
    assert_eq!(code(&out), 4, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(tmp.path().join("r/archive.jsonl").exists());
}

#[test]
fn fit_reports_bound_and_bootstrap_columns() {
    let tmp = tempfile::tempdir().unwrap();
    gen(tmp.path(), "g", &[]);
    ok(
        &["run", "--contexts", "g/contexts.json", "--agent", "economicus", "--out", "r"],
        tmp.path(),
    );
    ok(
        &["fit", "--contexts", "g/contexts.json", "--dataset", "r/dataset.json", "--variant", "full-pt", "--label", "econ", "--out", "f"],
        tmp.path(),
    );
    let csv = fs::read_to_string(tmp.path().join("f/params.csv")).unwrap();
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "econ");
    assert_eq!(row[4].parse::<f64>().unwrap(), 1000.0);
    assert_eq!(row[7], "β");

    ok(
        &["fit", "--contexts", "g/contexts.json", "--dataset", "r/responses.csv", "--variant", "beta-only", "--bootstrap", "200", "--out", "b"],
        tmp.path(),
    );
    let csv = fs::read_to_string(tmp.path().join("b/params.csv")).unwrap();
    assert!(csv.lines().next().unwrap().ends_with("β_lo,β_hi"));
    let report = json(tmp.path().join("b/fit.json"));
    assert_eq!(report["bootstrap"]["replicates"], 200);

    let out = prospect(
        &["fit", "--contexts", "g/contexts.json", "--dataset", "r/dataset.json", "--variant", "cubic", "--out", "x"],
        tmp.path(),
    );
    assert_eq!(code(&out), 2);
}

#[test]
fn holdout_metrics_are_recorded() {
    let tmp = tempfile::tempdir().unwrap();
    gen(tmp.path(), "g", &[]);
    let mut args = vec!["run", "--contexts", "g/contexts.json", "--agent", "pt", "--reps", "50", "--out", "r"];
    args.extend_from_slice(&PT);
    ok(&args, tmp.path());
    ok(
        &["fit", "--contexts", "g/contexts.json", "--dataset", "r/dataset.json", "--variant", "full-pt", "--holdout", "7", "--out", "f"],
        tmp.path(),
    );
    let report = json(tmp.path().join("f/fit.json"));
    assert_eq!(report["holdout"]["seed"], 7);
    assert_eq!(report["holdout"]["train_entries"], 162);
    assert_eq!(report["holdout"]["test_entries"], 162);
    assert!(report["holdout"]["test"]["corr"]["defined"].as_f64().unwrap() > 0.8);
}

#[test]
fn report_over_two_datasets() {
    let tmp = tempfile::tempdir().unwrap();
    gen(tmp.path(), "g", &[]);
    ok(&["run", "--contexts", "g/contexts.json", "--agent", "economicus", "--out", "e"], tmp.path());
    let mut args = vec!["run", "--contexts", "g/contexts.json", "--agent", "pt", "--out", "p"];
    args.extend_from_slice(&PT);
    ok(&args, tmp.path());
    ok(
        &["report", "--contexts", "g/contexts.json", "--model", "econ=e/dataset.json", "--model", "pt=p/responses.csv", "--out", "rep"],
        tmp.path(),
    );
    let dir = tmp.path().join("rep");
    let matrix = fs::read_to_string(dir.join("correlation_all.csv")).unwrap();
    assert_eq!(matrix.lines().next().unwrap(), "label,econ,pt,economicus");
    assert_eq!(matrix.lines().count(), 4);
    for subset in ["all", "explicit", "implicit"] {
        let he = fs::read_to_string(dir.join(format!("he_{subset}.csv"))).unwrap();
        assert_eq!(he.lines().count(), 3, "{subset}");
    }
    assert!(dir.join("dh_gap.csv").exists());
    assert!(dir.join("consistency.csv").exists());
    assert!(!dir.join("parameters.csv").exists());
}

#[test]
fn report_subset_missing_from_bundle() {
    let tmp = tempfile::tempdir().unwrap();
    gen(tmp.path(), "g", &[]);
    gen(tmp.path(), "gx", &["--explicit-only"]);
    ok(&["run", "--contexts", "gx/contexts.json", "--agent", "economicus", "--out", "e"], tmp.path());
    let out = prospect(
        &["report", "--contexts", "g/contexts.json", "--model", "econ=e/dataset.json", "--subset", "implicit", "--out", "rep"],
        tmp.path(),
    );
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("econ:p1-gain-imp20-s0-AB-none"));

    let out = prospect(
        &["report", "--contexts", "gx/contexts.json", "--model", "econ=e/dataset.json", "--subset", "n100", "--out", "rep"],
        tmp.path(),
    );
    assert_eq!(code(&out), 3);
}

#[test]
fn inputs_are_never_overwritten() {
    let tmp = tempfile::tempdir().unwrap();
    gen(tmp.path(), "g", &["--explicit-only"]);
    ok(&["run", "--contexts", "g/contexts.json", "--agent", "economicus", "--out", "r"], tmp.path());
    fs::create_dir(tmp.path().join("f")).unwrap();
    fs::copy(tmp.path().join("r/responses.csv"), tmp.path().join("f/params.csv")).unwrap();
    let before = fs::read(tmp.path().join("f/params.csv")).unwrap();
    let out = prospect(
        &["fit", "--contexts", "g/contexts.json", "--dataset", "f/params.csv", "--variant", "beta-only", "--out", "f", "--force"],
        tmp.path(),
    );
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("refusing to overwrite"));
    assert_eq!(fs::read(tmp.path().join("f/params.csv")).unwrap(), before);
}
