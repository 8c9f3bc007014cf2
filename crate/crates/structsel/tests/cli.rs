use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_structsel"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn generate_heat(dir: &Path) -> String {
    let out = dir.join("heat");
    ok(&[
        "generate",
        "heat",
        "--dof",
        "61",
        "--sensors",
        "8",
        "--snapshots",
        "4",
        "--seed",
        "3",
        "--out",
        out.to_str().unwrap(),
    ]);
    out.to_str().unwrap().to_string()
}

#[test]
fn generate_writes_problem_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let p = generate_heat(dir.path());
    for f in ["problem.json", "problem.bin", "manifest.json"] {
        assert!(Path::new(&p).join(f).exists(), "{f}");
    }
    let header: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(Path::new(&p).join("problem.json")).unwrap()).unwrap();
    assert_eq!(header["mode_sizes"], serde_json::json!([8, 4]));
    assert_eq!(header["parameter_dim"], 61);
}

#[test]
fn select_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let p = generate_heat(dir.path());
    let out = dir.path().join("sel");
    let o = ok(&[
        "select",
        "--problem",
        &p,
        "--method",
        "iter",
        "--engine",
        "greedy",
        "--k",
        "3,2",
        "--order",
        "2,1",
        "--seed",
        "5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(String::from_utf8_lossy(&o.stdout).contains("eig ="));
    let rep: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(rep["selection"]["per_mode"][0].as_array().unwrap().len(), 3);
    assert_eq!(rep["template"], "iter");
}

#[test]
fn full_counts_select_identity() {
    let dir = tempfile::tempdir().unwrap();
    let p = generate_heat(dir.path());
    let out = dir.path().join("sel");
    ok(&[
        "select",
        "--problem",
        &p,
        "--method",
        "seq",
        "--k",
        "8,4",
        "--out",
        out.to_str().unwrap(),
    ]);
    let rep: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(
        rep["selection"]["per_mode"],
        serde_json::json!([[0, 1, 2, 3, 4, 5, 6, 7], [0, 1, 2, 3]])
    );
}

#[test]
fn compare_writes_headers() {
    let dir = tempfile::tempdir().unwrap();
    let p = generate_heat(dir.path());
    let out = dir.path().join("cmp");
    ok(&[
        "compare",
        "--problem",
        &p,
        "--methods",
        "ind:gks,iter:deim,seq:greedy:sketch",
        "--k",
        "2,4",
        "--exhaustive",
        "--out",
        out.to_str().unwrap(),
    ]);
    let csv = fs::read_to_string(out.join("comparison.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("method,name,eig,percentile,sweeps,seed,status"));
    assert_eq!(csv.lines().count(), 4);
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",ok")));
    let hist = fs::read_to_string(out.join("histogram.csv")).unwrap();
    assert_eq!(hist.lines().next(), Some("eig"));
    assert_eq!(hist.lines().count(), 1 + 28);
}

#[test]
fn compare_without_baseline_marks_rows() {
    let dir = tempfile::tempdir().unwrap();
    let p = generate_heat(dir.path());
    let out = dir.path().join("cmp");
    ok(&[
        "compare",
        "--problem",
        &p,
        "--k",
        "2,2",
        "--random",
        "0",
        "--out",
        out.to_str().unwrap(),
    ]);
    let csv = fs::read_to_string(out.join("comparison.csv")).unwrap();
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",no_baseline")));
    assert!(!out.join("histogram.csv").exists());
}

#[test]
fn reconstruct_with_full_selection_matches_full_data() {
    let dir = tempfile::tempdir().unwrap();
    let p = generate_heat(dir.path());
    let sel = dir.path().join("sel");
    ok(&["select", "--problem", &p, "--k", "8,4", "--out", sel.to_str().unwrap()]);
    let out = dir.path().join("rec");
    ok(&[
        "reconstruct",
        "--problem",
        &p,
        "--selection",
        sel.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    let e: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("errors.json")).unwrap()).unwrap();
    assert_eq!(e["ratio"].as_f64().unwrap(), 1.0);
    let csv = fs::read_to_string(out.join("reconstruction.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("index,u_true,u_selected,u_full"));
    assert_eq!(csv.lines().count(), 62);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let p = generate_heat(dir.path());
    let out = dir.path().join("x");
    let o = out.to_str().unwrap();
    let code = |args: &[&str]| run(args).status.code().unwrap();
    assert_eq!(code(&["select", "--problem", &p, "--k", "9,2", "--out", o]), 2);
    assert_eq!(code(&["select", "--problem", &p, "--k", "2", "--out", o]), 2);
    assert_eq!(
        code(&["select", "--problem", &p, "--k", "2,2", "--order", "0,1", "--out", o]),
        2
    );
    assert_eq!(
        code(&["select", "--problem", &p, "--k", "2,2", "--engine", "qr", "--out", o]),
        2
    );
    assert_eq!(code(&["generate", "lowrank", "--rank", "0", "--out", o]), 2);
    assert_eq!(code(&["frobnicate"]), 2);
    assert_eq!(
        code(&[
            "compare",
            "--problem",
            &p,
            "--k",
            "4,2",
            "--exhaustive",
            "--budget",
            "10",
            "--out",
            o
        ]),
        4
    );
    assert_eq!(
        code(&["select", "--problem", "/nonexistent/problem", "--k", "2,2", "--out", o]),
        1
    );
}

#[test]
fn compare_is_independent_of_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let p = generate_heat(dir.path());
    let mut outputs = vec![];
    for threads in ["1", "3"] {
        let out = dir.path().join(format!("cmp{threads}"));
        ok(&[
            "compare",
            "--problem",
            &p,
            "--k",
            "3,2",
            "--random",
            "300",
            "--threads",
            threads,
            "--seed",
            "8",
            "--out",
            out.to_str().unwrap(),
        ]);
        outputs.push((
            fs::read(out.join("comparison.csv")).unwrap(),
            fs::read(out.join("histogram.csv")).unwrap(),
        ));
    }
    assert_eq!(outputs[0], outputs[1]);
}
