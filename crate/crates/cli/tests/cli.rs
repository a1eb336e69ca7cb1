use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_parelim"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout))
    })
}

fn stderr_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stderr).expect("stderr is an error object")
}

fn eliminate_to(dir: &Path, problem: &str) -> PathBuf {
    let path = dir.join(problem);
    let out = run(&["eliminate", fixture(problem).to_str().unwrap(), "-o", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    path
}

#[test]
fn eliminate_portfolio_reports_size() {
    let out = run(&["eliminate", fixture("portfolio.json").to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert_eq!(v["degree"], 4);
    assert_eq!(v["diagnostics"]["p_d"], 384);
    assert_eq!(v["diagnostics"]["q_d"], 330);
    assert_eq!(v["polynomials"].as_array().unwrap().len(), 1);
    let meta = &v["metadata"];
    assert_eq!(meta["degree_max"], 12);
    assert_eq!(meta["rank_tol"], 1e-10);
    assert_eq!(meta["row_scaling"], true);
}

#[test]
fn eliminate_is_byte_identical_across_runs() {
    let a = run(&["eliminate", fixture("example1.json").to_str().unwrap()]);
    let b = run(&["eliminate", fixture("example1.json").to_str().unwrap()]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn verify_example1() {
    let dir = tempfile::tempdir().unwrap();
    let elim = eliminate_to(dir.path(), "example1.json");
    let out = run(&["verify", fixture("example1.json").to_str().unwrap(), elim.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert_eq!(v["pass"], true);
    assert!(v["max_residual"].as_f64().unwrap() <= 1e-8);
    assert!(v["points"].as_u64().unwrap() >= 15);
}

#[test]
fn verify_failure_is_numerical() {
    let dir = tempfile::tempdir().unwrap();
    let elim = eliminate_to(dir.path(), "example3.json");
    // the eliminant of another problem with the same number of objectives
    let out = run(&["verify", fixture("example1.json").to_str().unwrap(), elim.to_str().unwrap(), "--grid", "5"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"], "VerificationFailed");
}

#[test]
fn recover_portfolio_weights_and_decisions() {
    let dir = tempfile::tempdir().unwrap();
    let elim = eliminate_to(dir.path(), "portfolio.json");
    let out = run(&["recover", elim.to_str().unwrap(), "--at", "-16.59,4.74"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let w: Vec<f64> = serde_json::from_value(stdout_json(&out)["weights"].clone()).unwrap();
    assert!((w[0] - 0.45).abs() < 0.01 && (w[1] - 0.55).abs() < 0.01, "{w:?}");

    let out = run(&[
        "recover",
        elim.to_str().unwrap(),
        "--at",
        "-16.590909090909,4.741735537190",
        "--problem",
        fixture("portfolio.json").to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    let x: Vec<f64> = serde_json::from_value(v["decisions"][0]["x"].clone()).unwrap();
    for (a, b) in x.iter().zip([18.18, 50.0, 31.82]) {
        assert!((a - b).abs() < 0.01, "{x:?}");
    }
}

#[test]
fn recover_checks_point_length() {
    let dir = tempfile::tempdir().unwrap();
    let elim = eliminate_to(dir.path(), "example3.json");
    let out = run(&["recover", elim.to_str().unwrap(), "--at", "1,2"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn sample_then_plot() {
    let dir = tempfile::tempdir().unwrap();
    let elim = eliminate_to(dir.path(), "portfolio.json");
    let csv = dir.path().join("front.csv");
    let out = run(&[
        "sample",
        fixture("portfolio.json").to_str().unwrap(),
        "--eliminant",
        elim.to_str().unwrap(),
        "-o",
        csv.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# parelim sample grid=21 starts=64 seed=42"));
    assert_eq!(lines.next().unwrap(), "s1,s2,w1,w2,kkt_residual,eliminant_residual");
    let rows: Vec<&str> = lines.collect();
    assert!(rows.len() >= 15);
    // clamped end weights put s far out where the residual is conditioning-limited
    let mut interior = 0;
    for row in &rows {
        let f: Vec<f64> = row.split(',').map(|c| c.parse().unwrap()).collect();
        assert!(f[5].is_finite(), "{row}");
        if f[2].min(f[3]) > 1e-3 {
            interior += 1;
            assert!(f[5] <= 1e-8, "{row}");
        }
    }
    assert!(interior >= 15);

    let svg = dir.path().join("front.svg");
    let out = run(&["plot", csv.to_str().unwrap(), elim.to_str().unwrap(), "-o", svg.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&svg).unwrap();
    assert!(text.starts_with("<svg"));
    assert_eq!(text.matches("<circle").count(), rows.len());
    assert!(text.contains("<path"));
}

#[test]
fn plot_rejects_three_objectives() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("three.csv");
    std::fs::write(&csv, "s1,s2,s3\n1,2,3\n").unwrap();
    let out = run(&["plot", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn sysid_reports_system_and_front() {
    let out = run(&[
        "sysid",
        fixture("sysid.json").to_str().unwrap(),
        "--degree-max",
        "3",
        "--grid",
        "5",
    ]);
    // no eliminant up to degree 3
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"], "DegreeCapExceeded");
    let v = stdout_json(&out);
    assert_eq!(v["block_equations"], 13);
    assert_eq!(v["stated_equations"], 12);
    assert_eq!(v["system"]["equations"].as_array().unwrap().len(), 13);
    let front = v["front"].as_array().unwrap();
    assert_eq!(front.len(), 5);
    for p in front {
        assert!(p["kkt_residual"].as_f64().unwrap() <= 1e-9);
    }
    assert!(v.get("eliminant").is_none());
}

#[test]
fn sysid_flags_match_input_file() {
    let a = run(&["sysid", "--y", "1,4,2,3", "--na", "1", "--degree-max", "2", "--grid", "3"]);
    let b = run(&["sysid", fixture("sysid.json").to_str().unwrap(), "--degree-max", "2", "--grid", "3"]);
    assert_eq!(a.stdout, b.stdout);
    let short = run(&["sysid", "--y", "1,2", "--na", "1"]);
    assert_eq!(short.status.code(), Some(1));
}

#[test]
fn missing_file_is_io_error() {
    let out = run(&["eliminate", "/nonexistent/problem.json"]);
    assert_eq!(out.status.code(), Some(3));
    let e = stderr_json(&out);
    assert_eq!(e["error"], "Io");
    assert_eq!(e["exit_code"], 3);
}

#[test]
fn schema_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"decision_vars": ["x"], "objectives": []}"#).unwrap();
    let out = run(&["eliminate", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    std::fs::write(&bad, r#"{"decision_vars": ["x"], "objectives": [[{"coeff": 1, "monomial": {"y": 1}}], []]}"#).unwrap();
    let out = run(&["eliminate", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr_json(&out)["message"].as_str().unwrap().contains("objectives[0]"));
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["eliminate"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn fixtures_match_library_problems() {
    use parelim::fixtures;
    for (file, p) in [
        ("portfolio.json", fixtures::portfolio()),
        ("example1.json", fixtures::example1()),
        ("example2.json", fixtures::example2()),
        ("example3.json", fixtures::example3()),
    ] {
        assert_eq!(parelim::problem::load_problem(fixture(file)).unwrap(), p, "{file}");
    }
}
