//! End-to-end runs of the binary.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hardy-lab"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

const UNIT: &str = r#"{"kind":"power","alpha":0,"interval":[0,"inf"]}"#;

#[test]
fn exit_codes() {
    assert_eq!(code(&run(&["constant", "--p", "2", "--alpha", "0", "--direction", "minus"])), 0);
    assert_eq!(code(&run(&["verify", "--ineq", "power-minus", "--p", "2", "--alpha", "0"])), 0);
    let v = r#"{"kind":"power","alpha":-2.0,"interval":[0,"inf"]}"#;
    assert_eq!(code(&run(&["muckenhoupt", "--v", v, "--w", UNIT, "--p", "2", "--direction", "minus"])), 0);
    // v = w = 1 on the half line has an infinite constant.
    assert_eq!(code(&run(&["muckenhoupt", "--v", UNIT, "--w", UNIT, "--p", "2", "--direction", "minus"])), 1);
    assert_eq!(code(&run(&["verify", "--ineq", "power-minus", "--p", "2", "--alpha", "-2"])), 3);
    assert_eq!(code(&run(&["verify", "--ineq", "power-minus", "--p", "2", "--alpha", "1"])), 2);
    assert_eq!(code(&run(&["verify", "--ineq", "bogus", "--p", "2", "--alpha", "0"])), 2);
    assert_eq!(code(&run(&["constant", "--p", "2"])), 2);
    assert_eq!(code(&run(&["opcheck", "--p", "2", "--steps", "/nonexistent/path.json"])), 2);
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn constant_json_envelope() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.json");
    let o = bin().args(["constant", "--p", "2", "--alpha", "0", "--direction", "minus", "--json"]).arg(&out).output().unwrap();
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["schema"], "hardy-lab/v1");
    assert_eq!(v["manifest"]["command"], "constant");
    let a: f64 = v["result"]["A"].to_string().parse().unwrap();
    assert!((a - 1.0).abs() < 1e-6);
}

fn sweep(dir: &Path, config: &str) -> (Output, String) {
    let cfg = dir.join("sweep.json");
    let csv = dir.join("out.csv");
    std::fs::write(&cfg, config).unwrap();
    let o = bin().arg("sweep").arg("--config").arg(&cfg).arg("--csv").arg(&csv).output().unwrap();
    let body = std::fs::read_to_string(&csv).unwrap_or_default();
    (o, body)
}

fn data_lines(csv: &str) -> Vec<&str> {
    csv.lines().filter(|l| !l.starts_with('#')).collect()
}

#[test]
fn empty_sweep_writes_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let (o, body) = sweep(dir.path(), r#"{"schema":"hardy-lab/v1","ineq":[],"p":[2],"alpha":[0]}"#);
    assert_eq!(code(&o), 0);
    assert!(body.starts_with("# schema: hardy-lab/v1\n# manifest: {"));
    assert_eq!(data_lines(&body), vec!["ineq,p,alpha,extra,lhs,rhs,ratio,margin,verdict"]);
}

#[test]
fn degenerate_cell_is_a_tagged_row() {
    let dir = tempfile::tempdir().unwrap();
    let (o, body) = sweep(dir.path(), r#"{"schema":"hardy-lab/v1","ineq":["power-minus"],"p":[2],"alpha":[1,0]}"#);
    assert_eq!(code(&o), 0);
    let rows = data_lines(&body);
    assert_eq!(rows.len(), 3);
    assert!(rows[1].ends_with(",,,,,DegenerateExponent"), "{}", rows[1]);
    assert!(rows[2].ends_with(",holds"), "{}", rows[2]);
}

#[test]
fn bad_sweep_configs_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    for cfg in [
        r#"{"schema":"v0","ineq":[],"p":[],"alpha":[]}"#,
        r#"{"schema":"hardy-lab/v1","ineq":["ad-hoc-minus"],"p":[2],"alpha":[0]}"#,
        "not json",
    ] {
        let (o, _) = sweep(dir.path(), cfg);
        assert_eq!(code(&o), 2, "{cfg}");
    }
}

#[test]
fn deterministic_reruns_are_identical() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ce.json");
    let mut bodies = Vec::new();
    for _ in 0..2 {
        let o = bin()
            .args(["--deterministic", "counterexample", "--p", "2", "--seed", "5", "--budget", "100", "--json"])
            .arg(&out)
            .output()
            .unwrap();
        assert_eq!(code(&o), 0);
        bodies.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(bodies[0], bodies[1]);
    let v: serde_json::Value = serde_json::from_slice(&bodies[0]).unwrap();
    assert_eq!(v["manifest"]["seed"], 5);
    assert_eq!(v["manifest"]["timestamp"], "1970-01-01T00:00:00Z");
}

#[test]
fn thread_cap_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.json");
    std::fs::write(&cfg, r#"{"schema":"hardy-lab/v1","ineq":["power-minus","iterated"],"p":[1.5,2],"alpha":[-0.5,0],"order":[1,2]}"#)
        .unwrap();
    let mut bodies = Vec::new();
    for threads in ["1", "4"] {
        let o = bin().env("HARDY_LAB_THREADS", threads).arg("--deterministic").arg("sweep").arg("--config").arg(&cfg).output().unwrap();
        assert_eq!(code(&o), 0);
        bodies.push(stdout(&o));
    }
    assert_eq!(bodies[0], bodies[1]);
    assert_eq!(code(&bin().env("HARDY_LAB_THREADS", "zero").arg("sweep").arg("--config").arg(&cfg).output().unwrap()), 2);
}

#[test]
fn opcheck_reads_a_step_path() {
    let dir = tempfile::tempdir().unwrap();
    let steps = dir.path().join("steps.json");
    std::fs::write(&steps, r#"{"dim":2,"grid":[1,2,3],"values":[[1,0,0,2],[0.5,0.1,0.1,1]]}"#).unwrap();
    let o = bin().args(["opcheck", "--p", "1.5", "--dim", "2", "--steps"]).arg(&steps).output().unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("LoewnerHolds"));
    let o = bin().args(["opcheck", "--p", "1.5", "--dim", "3", "--steps"]).arg(&steps).output().unwrap();
    assert_eq!(code(&o), 2);
}
