use std::path::PathBuf;
use std::process::{Command, Output};

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name).to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_msopoly")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("json output")
}

#[test]
fn solve_path_and_triangle() {
    let o = run(&["solve", "--graph", &data("p3.gr"), "--problem", "independent-set"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v = json(&o);
    assert_eq!(v["status"], "Optimal");
    assert_eq!(v["value"], "2");
    assert_eq!(v["y"]["y_1_0"], 1);
    assert_eq!(v["y"]["y_3_0"], 1);
    let o = run(&["solve", "--graph", &data("k3.gr"), "--formula", &data("is.mso")]);
    assert_eq!(json(&o)["value"], "1");
}

#[test]
fn weighted_min_and_given_decomposition() {
    let o = run(&["solve", "--graph", &data("p3.gr"), "--problem", "independent-set", "--weights", &data("p3.w")]);
    assert_eq!(json(&o)["value"], "3/4");
    let o = run(&[
        "solve",
        "--graph",
        &data("p3.gr"),
        "--problem",
        "independent-set",
        "--weights",
        &data("p3.w"),
        "--sense",
        "min",
        "--td",
        &data("p3.td"),
    ]);
    assert_eq!(json(&o)["value"], "-3");
}

#[test]
fn infeasible_is_not_an_error() {
    let o = run(&["solve", "--graph", &data("p3.gr"), "--formula", &data("false.mso")]);
    assert!(o.status.success());
    assert_eq!(json(&o)["status"], "Infeasible");
}

#[test]
fn error_classes_and_exit_codes() {
    let o = run(&["build", "--graph", &data("bad.gr"), "--problem", "independent-set"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error: SyntaxError: line 3"));
    assert_eq!(stderr(&o).lines().count(), 1);
    let o = run(&["build", "--graph", &data("p3.gr"), "--problem", "independent-set", "--max-k", "1"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).starts_with("error: BudgetExceeded"));
    let o = run(&["build", "--graph", &data("missing.gr"), "--problem", "independent-set"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error: IoError"));
}

#[test]
fn build_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let mut texts = Vec::new();
    for (i, fmt) in ["lp", "json", "lp"].iter().enumerate() {
        let out = dir.path().join(format!("out{i}"));
        let o = run(&[
            "build",
            "--graph",
            &data("k3.gr"),
            "--problem",
            "vertex-cover",
            "--format",
            fmt,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        let stats: serde_json::Value = serde_json::from_str(stderr(&o).trim()).unwrap();
        assert!(stats["rows"].as_u64().unwrap() > 0);
        texts.push(std::fs::read_to_string(out).unwrap());
    }
    assert!(texts[0].starts_with("Maximize\n obj: y_1_0 + y_2_0 + y_3_0\nSubject To\n"));
    assert!(texts[1].contains("\"rows\""));
    assert_eq!(texts[0], texts[2]);
}

#[test]
fn check_passes_and_detects_corruption() {
    let o = run(&["check", "--graph", &data("p3.gr"), "--problem", "independent-set", "--seed", "7"]);
    assert!(o.status.success(), "{}{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).lines().all(|l| l.starts_with("PASS")));
    assert!(stdout(&o).contains("PASS projection"));
    let o = run(&["check", "--graph", &data("p3.gr"), "--problem", "independent-set", "--corrupt-nu"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL nu_implication"));
    let o = run(&["check", "--graph", &data("k3.gr"), "--problem", "independent-set", "--check-limit", "5"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn enumerate_and_decompose_round_trip() {
    let o = run(&["enumerate", "--graph", &data("p3.gr"), "--problem", "independent-set", "--points"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v = json(&o);
    assert_eq!(v["assignments"].as_array().unwrap().len(), 5);
    let points = v["points"].as_array().unwrap();
    assert_eq!(points.len(), 5);
    let mut sum = serde_json::Map::new();
    for p in &points[..3] {
        for (k, x) in p.as_object().unwrap() {
            let prev = sum.get(k).and_then(|s| s.as_i64()).unwrap_or(0);
            sum.insert(k.clone(), (prev + x.as_i64().unwrap()).into());
        }
    }
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("point.json");
    std::fs::write(&path, serde_json::Value::Object(sum).to_string()).unwrap();
    let args = ["decompose", "--graph", &data("p3.gr"), "--problem", "independent-set", "--point"];
    let o = run(&[&args[..], &[path.to_str().unwrap(), "--r", "3"]].concat());
    assert!(o.status.success(), "{}", stderr(&o));
    let parts = json(&o);
    assert_eq!(parts.as_array().unwrap().len(), 3);
    for part in parts.as_array().unwrap() {
        assert!(points.contains(part));
    }
    let o = run(&[&args[..], &[path.to_str().unwrap(), "--r", "2"]].concat());
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).starts_with("error: NotInDilate"));
}

#[test]
fn stats_report_sizes() {
    let o = run(&["stats", "--graph", &data("p3.gr"), "--problem", "dominating-set"]);
    let v = json(&o);
    for key in ["rows", "cols", "nnz", "nodes", "types", "widths", "system_width"] {
        assert!(v.get(key).is_some(), "{key}");
    }
    assert!(v["rows"].as_u64().unwrap() <= v["size_bound"].as_u64().unwrap());
}
