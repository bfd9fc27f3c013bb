use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_impsearch"))
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(out)))
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn solve_exact_on_running_example() {
    let inst = data("running.json");
    let out = run(&["solve", "--instance", path_str(&inst), "--solver", "exact"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["probability"], 0.525);
    assert_eq!(v["schedule"][0]["point"], 1);
    assert_eq!(v["schedule"][0]["searches"], 3);
    assert!(v["runtime_ms"].is_number());
}

#[test]
fn solve_ordered_with_explicit_order() {
    let inst = data("running.json");
    let out = run(&[
        "solve", "--instance", path_str(&inst), "--solver", "ordered", "--order", "1,2", "--C", "1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["probability"], 0.525);
}

#[test]
fn solve_every_solver_on_a_collinear_instance() {
    let inst = data("running.json");
    for solver in ["dp1d", "tsp-dp", "greedy", "exact"] {
        let out = run(&["solve", "--instance", path_str(&inst), "--solver", solver, "--omit-runtime"]);
        assert_eq!(out.status.code(), Some(0), "{solver}");
        assert_eq!(json(&out)["probability"], 0.525, "{solver}");
        assert_eq!(json(&out)["feasible"], true);
    }
    let even = data("even.json");
    let out = run(&["solve", "--instance", path_str(&even), "--solver", "uniform", "--uniform-epsilon", "0.25"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["solver"], "uniform");
}

#[test]
fn solve_precondition_failures() {
    let planar = data("planar.json");
    let running = data("running.json");
    let out = run(&["solve", "--instance", path_str(&planar), "--solver", "dp1d"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["solve", "--instance", path_str(&running), "--solver", "ordered"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["solve", "--instance", path_str(&planar), "--solver", "uniform"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["solve", "--instance", "/nonexistent.json", "--solver", "exact"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["solve", "--instance", path_str(&running), "--solver", "nope"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn exact_refusal_exits_three() {
    let running = data("running.json");
    let out = run(&[
        "solve", "--instance", path_str(&running), "--solver", "exact", "--exact-max-points", "1",
    ]);
    assert_eq!(out.status.code(), Some(3));
    let out = run(&["solve", "--instance", path_str(&running), "--solver", "exact", "--budget", "1e7"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn solve_is_byte_identical_without_runtime() {
    let planar = data("planar.json");
    let args = ["solve", "--instance", path_str(&planar), "--solver", "tsp-dp", "--omit-runtime"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
}

#[test]
fn compare_corpus() {
    let pattern = data("corpus").join("*.json");
    let out = run(&["compare", "--instances", path_str(&pattern), "--solvers", "greedy,tsp-dp,exact"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "instance,solver,C,probability,weight,runtime_ms,gap_to_best,feasible"
    );
    let rows: Vec<Vec<String>> = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    assert_eq!(rows.len(), 15);
    for r in &rows {
        let gap: f64 = r[6].parse().unwrap();
        assert!(gap >= -1e-12);
        if r[1] == "exact" {
            assert_eq!(gap, 0.0);
        }
        assert_eq!(r[7], "true");
    }
}

#[test]
fn compare_is_monotone_in_c_and_reproducible() {
    let pattern = data("corpus").join("tiny-4.json");
    let args = [
        "compare",
        "--instances",
        path_str(&pattern),
        "--solvers",
        "tsp-dp",
        "--C-values",
        "1,10,20",
        "--omit-runtime",
    ];
    let out = run(&args);
    assert_eq!(out.status.code(), Some(0));
    let probs: Vec<f64> = stdout(&out)
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(3).unwrap().parse().unwrap())
        .collect();
    assert_eq!(probs.len(), 3);
    assert!(probs.windows(2).all(|w| w[0] <= w[1] + 1e-12), "{probs:?}");
    assert_eq!(out.stdout, run(&args).stdout);
}

#[test]
fn compare_timeout_and_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("rows.csv");
    let pattern = data("corpus").join("tiny-1.json");
    let out = run(&[
        "compare",
        "--instances",
        path_str(&pattern),
        "--solvers",
        "exact",
        "--time-limit-s",
        "0.000001",
        "--out",
        path_str(&csv_path),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv_path).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[1], "exact");
    assert_eq!(row[3], "");
    assert_eq!(row[7], "false");
}

#[test]
fn compare_empty_glob() {
    let pattern = data("missing").join("*.json");
    let out = run(&["compare", "--instances", path_str(&pattern)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn posterior_from_trace_and_observations() {
    let even = data("even.json");
    let out = run(&["posterior", "--instance", path_str(&even), "--trace", "a=0,0;b=1,0"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let p: Vec<f64> = v["posterior"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert!((p[0] - 1.0 / 3.0).abs() < 1e-15 && (p[1] - 2.0 / 3.0).abs() < 1e-15);

    let out = run(&[
        "posterior", "--instance", path_str(&even), "--observations", "1:no", "--method", "recursive",
    ]);
    assert_eq!(json(&out)["posterior"], v["posterior"]);

    let out = run(&["posterior", "--instance", path_str(&even), "--observations", "2:yes"]);
    assert_eq!(json(&out)["collapsed"], true);
    let out = run(&["posterior", "--instance", path_str(&even), "--trace", "a=0;b=1,0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn gen_single_point() {
    let out = run(&["gen", "--n", "1", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["points"][0]["prior"], 1.0);
    assert_eq!(v["schema_version"], "1");
    assert_eq!(out.stdout, run(&["gen", "--n", "1", "--seed", "7"]).stdout);
}

#[test]
fn gen_then_solve() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["gen", "--n", "6", "--seed", "3", "--count", "3", "--out-dir", path_str(dir.path())]);
    assert_eq!(out.status.code(), Some(0));
    let files: Vec<String> = stdout(&out).lines().map(String::from).collect();
    assert_eq!(files.len(), 3);
    for f in &files {
        let out = run(&["solve", "--instance", f, "--solver", "greedy"]);
        assert_eq!(out.status.code(), Some(0));
        assert_eq!(json(&out)["feasible"], true);
    }
}

#[test]
fn convert_orienteering_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "convert",
        path_str(&data("tiny.txt")),
        "--out-dir",
        path_str(dir.path()),
        "--instances-per-base",
        "4",
        "--seed",
        "5",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let files: Vec<String> = stdout(&out).lines().map(String::from).collect();
    assert_eq!(files.len(), 4);
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&files[0]).unwrap()).unwrap();
    assert_eq!(doc["budget"], 10.0);
    assert_eq!(doc["points"].as_array().unwrap().len(), 4);
    assert_eq!(doc["provenance"]["seed"], 5);

    let bad = run(&["convert", path_str(&data("running.json")), "--out-dir", path_str(dir.path())]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn validate_schedules() {
    let running = data("running.json");
    let out = run(&[
        "validate", "--instance", path_str(&running), "--schedule", path_str(&data("over_budget.json")),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["violations"][0]["kind"], "over_budget");

    let out = run(&[
        "validate", "--instance", path_str(&running), "--schedule", path_str(&data("within_budget.json")),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["probability"], 0.525);

    let out = run(&["validate", "--instance", path_str(&running), "--schedule", path_str(&data("raw_walk.json"))]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["raw_weight"], 4.0);
    assert_eq!(json(&out)["weight"], 2.0);
}

#[test]
fn validate_accepts_solve_output() {
    let dir = tempfile::tempdir().unwrap();
    let planar = data("planar.json");
    let out = run(&["solve", "--instance", path_str(&planar), "--solver", "exact"]);
    let sched = dir.path().join("result.json");
    std::fs::write(&sched, &out.stdout).unwrap();
    let out = run(&["validate", "--instance", path_str(&planar), "--schedule", path_str(&sched)]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn simulate_matches_analytic_value() {
    let running = data("running.json");
    let out = run(&[
        "simulate", "--instance", path_str(&running), "--solver", "exact", "--trials", "100000", "--seed", "9",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let (p, se) = (v["p_hat"].as_f64().unwrap(), v["std_err"].as_f64().unwrap());
    assert!((p - 0.525).abs() <= 4.0 * se, "{p} {se}");
    let again = run(&[
        "simulate", "--instance", path_str(&running), "--solver", "exact", "--trials", "100000", "--seed", "9",
    ]);
    assert_eq!(out.stdout, again.stdout);

    let out = run(&[
        "simulate",
        "--instance",
        path_str(&running),
        "--schedule",
        path_str(&data("within_budget.json")),
        "--trials",
        "1000",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["analytic_probability"], 0.525);
}
