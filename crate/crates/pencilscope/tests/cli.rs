use std::path::PathBuf;
use std::process::Command;

use pencilscope::{load_problem, parse_problem, Problem};
use serde_json::Value;

const FIXTURES: [&str; 10] = [
    "example1",
    "example2",
    "example3",
    "kreinmatch",
    "kreinmismatch",
    "quadratic1",
    "quadratic2",
    "branchprev",
    "dde_scalar",
    "canonical",
];

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(format!("{name}.json"))
}

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn pencilscope(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_pencilscope")).args(args).output().expect("binary runs");
    Run {
        code: out.status.code().expect("exit code"),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn report(cmd: &str, name: &str, extra: &[&str]) -> Value {
    let path = fixture(name);
    let mut args = vec![cmd, "--input", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    let r = pencilscope(&args);
    assert_eq!(r.code, 0, "{cmd} {name}: {}{}", r.stdout, r.stderr);
    serde_json::from_str(&r.stdout).unwrap()
}

#[test]
fn every_fixture_round_trips() {
    for name in FIXTURES {
        let p = load_problem(fixture(name)).unwrap_or_else(|e| panic!("{name}: {e}"));
        let again = parse_problem(&p.to_json()).unwrap();
        assert_eq!(p, again, "{name}");
    }
}

#[test]
fn fixtures_load_as_their_kinds() {
    let ex1 = load_problem(fixture("example1")).unwrap();
    let Problem::Hamiltonian(sys) = &ex1.problem else { panic!("example1 is Hamiltonian") };
    assert_eq!(sys.dim(), 4);
    let q1 = load_problem(fixture("quadratic1")).unwrap();
    let Problem::Polynomial(p) = &q1.problem else { panic!("quadratic1 is polynomial") };
    assert_eq!(p.degree(), Some(2));
    assert_eq!(p.dim(), 2);
}

#[test]
fn non_skew_j_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        r#"{"schema_version": 1, "kind": "hamiltonian",
            "J": [[[1,0],[0,0]],[[0,0],[1,0]]],
            "L": [[[1,0],[0,0]],[[0,0],[1,0]]]}"#,
    )
    .unwrap();
    let err = load_problem(&path).unwrap_err();
    assert_eq!(err.field(), Some("J"));
    assert_eq!(err.code(), "invariant_violation");

    let r = pencilscope(&["index", "--input", path.to_str().unwrap()]);
    assert_eq!(r.code, 1);
    assert!(r.stdout.is_empty());
    let v: Value = serde_json::from_str(&r.stderr).unwrap();
    assert_eq!(v["error"]["code"], "invariant_violation");
    assert!(v["error"]["message"].as_str().unwrap().contains("\"J\""));
}

#[test]
fn parse_and_schema_errors_are_located() {
    let e = parse_problem("{\"schema_version\": 1,\n  \"kind\": }").unwrap_err();
    assert_eq!(e.code(), "parse_error");
    assert!(e.to_string().contains("line 2"), "{e}");
    let e = parse_problem(r#"{"schema_version": 2, "kind": "hamiltonian"}"#).unwrap_err();
    assert_eq!(e.field(), Some("schema_version"));
    let e = parse_problem(r#"{"schema_version": 1, "kind": "polynomial_pencil"}"#).unwrap_err();
    assert_eq!(e.field(), Some("coefficients"));
    let e = parse_problem(
        r#"{"schema_version": 1, "kind": "polynomial_pencil", "coefficients": [[[[1,0],[0,0]]]]}"#,
    )
    .unwrap_err();
    assert_eq!(e.code(), "schema_error");
}

#[test]
fn signatures_on_example3() {
    let v = report("signatures", "example3", &[]);
    let kappas: Vec<i64> = v["values"].as_array().unwrap().iter().map(|r| r["kappa"].as_i64().unwrap()).collect();
    assert_eq!(kappas, [1, -1, 1, -1]);
    assert!(v["values"].as_array().unwrap().iter().all(|r| r["gram"]["agree"] == true));
    assert_eq!(v["status"], "ok");
}

#[test]
fn index_on_example2() {
    let v = report("index", "example2", &[]);
    assert_eq!(v["index"]["n_u"], 2);
    assert_eq!(v["index"]["n_u_direct"], 2);
    assert_eq!(v["index"]["pencil"]["conservation_residual"], 0);
    assert_eq!(v["index"]["consistent"], true);
}

#[test]
fn chains_on_quadratic2() {
    let v = report("chains", "quadratic2", &[]);
    let at_one = v["values"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| (r["lambda"].as_f64().unwrap() - 1.0).abs() < 1e-6)
        .expect("value at 1");
    assert_eq!(at_one["lengths"], serde_json::json!([2, 1]));
    assert_eq!(at_one["alpha"], 3);
}

fn read_csv(path: &std::path::Path) -> (String, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().to_string();
    let rows = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    (header, rows)
}

#[test]
fn branch_csv_example1_positive_at_origin() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("b.csv");
    report("branches", "example1", &["--lambda-min", "-3", "--lambda-max", "3", "--steps", "600", "--csv", csv.to_str().unwrap()]);
    let (header, rows) = read_csv(&csv);
    assert_eq!(header, "lambda,branch_0,branch_1,branch_2,branch_3");
    assert_eq!(rows.len(), 601);
    let origin = rows.iter().find(|r| r[0].abs() < 1e-12).expect("grid hits 0");
    assert!(origin[1..].iter().all(|&m| m > 0.0), "{origin:?}");
    let raw = std::fs::read_to_string(&csv).unwrap();
    let first_value = raw.lines().nth(1).unwrap().split(',').next().unwrap();
    assert_eq!(first_value, "-3.0000000000000000e0");
}

#[test]
fn branch_csv_example2_stays_off_zero() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("b.csv");
    report("branches", "example2", &["--lambda-min", "-3", "--lambda-max", "3", "--csv", csv.to_str().unwrap()]);
    let (_, rows) = read_csv(&csv);
    let min = rows.iter().flat_map(|r| r[1..].iter().map(|m| m.abs())).fold(f64::INFINITY, f64::min);
    assert!(min > 0.1, "min |mu| = {min}");
}

#[test]
fn sweep_branchprev() {
    let v = report("sweep", "branchprev", &[]);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r["all_real"] == true));
    let t1 = &rows[1];
    assert_eq!(t1["t"].as_f64(), Some(1.0));
    let kinds: Vec<&str> = t1["collisions"].as_array().unwrap().iter().map(|c| c["type"].as_str().unwrap()).collect();
    assert!(kinds.contains(&"same-signature (harmless)"));
    assert!(!kinds.contains(&"opposite-signature (Hopf-capable)"));
}

#[test]
fn sweep_without_direction_repeats_itself() {
    let dir = tempfile::tempdir().unwrap();
    let mut file: Value = serde_json::from_str(&std::fs::read_to_string(fixture("branchprev")).unwrap()).unwrap();
    let n = file["A"].as_array().unwrap().len();
    file["B"] = serde_json::json!(vec![vec![[0.0, 0.0]; n]; n]);
    file["t_values"] = serde_json::json!([-2.0, 0.0, 0.5, 3.0]);
    let path = dir.path().join("flat.json");
    std::fs::write(&path, serde_json::to_string(&file).unwrap()).unwrap();
    let r = pencilscope(&["sweep", "--input", path.to_str().unwrap()]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v: Value = serde_json::from_str(&r.stdout).unwrap();
    let mut rows: Vec<Value> = v["rows"].as_array().unwrap().clone();
    for row in &mut rows {
        row.as_object_mut().unwrap().remove("t");
        for c in row["collisions"].as_array_mut().unwrap() {
            c.as_object_mut().unwrap().remove("t");
        }
    }
    assert!(rows.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn repeated_runs_are_byte_identical() {
    for (cmd, name) in [("signatures", "example3"), ("evans", "kreinmismatch"), ("sweep", "branchprev"), ("branches", "quadratic1")] {
        let path = fixture(name);
        let args = [cmd, "--input", path.to_str().unwrap()];
        let a = pencilscope(&args);
        let b = pencilscope(&args);
        assert_eq!(a.stdout, b.stdout, "{cmd} {name}");
        assert!(!a.stdout.is_empty());
    }
}

#[test]
fn thread_count_does_not_change_output() {
    let path = fixture("branchprev");
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_pencilscope"))
            .args(["sweep", "--input", path.to_str().unwrap()])
            .env("PENCILSCOPE_THREADS", threads)
            .output()
            .unwrap()
            .stdout
    };
    assert_eq!(run("1"), run("4"));
}

#[test]
fn exit_codes() {
    let ex2 = fixture("example2");
    let sweep = fixture("branchprev");
    assert_eq!(pencilscope(&["index", "--input", ex2.to_str().unwrap()]).code, 0);
    // usage: wrong command for the problem kind, missing file, bad contour
    assert_eq!(pencilscope(&["index", "--input", sweep.to_str().unwrap()]).code, 1);
    assert_eq!(pencilscope(&["index", "--input", "/nonexistent/p.json"]).code, 1);
    assert_eq!(pencilscope(&["evans", "--input", ex2.to_str().unwrap(), "--contour", "0,0;x,1"]).code, 1);
    assert_ne!(pencilscope(&["frobnicate"]).code, 0);
}

#[test]
fn ambiguity_exits_two() {
    // a contour passing through a characteristic value cannot be counted
    let v = pencilscope(&[
        "evans",
        "--input",
        fixture("example1").to_str().unwrap(),
        "--contour",
        "-1.4142135623730951,-1;3,-1;3,1;-1.4142135623730951,1",
    ]);
    let (v_code, out) = (v.code, v.stdout);
    let report: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v_code, 2, "{out}");
    assert_ne!(report["status"], "ok");
    assert!(!report["flags"].as_array().unwrap().is_empty());
}

#[test]
fn evans_winding_on_delay_fixture() {
    let v = report("evans", "dde_scalar", &[]);
    assert_eq!(v["winding"][0]["count"], 2);
}

#[test]
fn evans_on_kreinmismatch_recovers_signatures() {
    let v = report("evans", "kreinmismatch", &[]);
    let rows = v["values"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r["agree"] == true), "{rows:?}");
}

#[test]
fn quadratic1_winding_counts() {
    let v = report(
        "evans",
        "quadratic1",
        &["--contour", "0.5,-0.5;1.5,-0.5;1.5,0.5;0.5,0.5", "--contour", "-1.5,-0.5;-0.5,-0.5;-0.5,0.5;-1.5,0.5"],
    );
    assert_eq!(v["winding"][0]["count"], 3);
    assert_eq!(v["winding"][1]["count"], 1);
}
