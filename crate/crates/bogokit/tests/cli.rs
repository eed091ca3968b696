use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_bogokit");

fn scratch(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("bogokit-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn csv_rows(out: &Output) -> (Vec<String>, Vec<Vec<String>>) {
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(str::to_owned).collect();
    let rows = lines
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect();
    (header, rows)
}

fn col(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap()
}

const IDENTITY_MAP: &str = r#"{"statistics":"bosonic",
  "u":{"rows":2,"cols":2,"re":[[1,0],[0,1]]},
  "v":{"rows":2,"cols":2,"re":[[0,0],[0,0]]}}"#;

const BCS_HAMILTONIAN: &str = r#"{"statistics":"fermionic",
  "h":{"rows":2,"cols":2,"re":[[3,0],[0,3]]},
  "k":{"rows":2,"cols":2,"re":[[0,4],[-4,0]]}}"#;

#[test]
fn validate_identity_succeeds() {
    let path = scratch("identity.json", IDENTITY_MAP);
    let out = run(&["validate", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let report = stdout_json(&out);
    assert_eq!(report["passed"], Value::Bool(true));
    assert_eq!(report["max_residual"].as_f64(), Some(0.0));
}

#[test]
fn validate_u_equals_v_fails_with_unit_residual() {
    let path = scratch(
        "uv.json",
        r#"{"statistics":"bosonic","u":{"rows":1,"cols":1,"re":[[1]]},"v":{"rows":1,"cols":1,"re":[[1]]}}"#,
    );
    let out = run(&["validate", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let report = stdout_json(&out);
    assert_eq!(report["passed"], Value::Bool(false));
    assert!((report["max_residual"].as_f64().unwrap() - 1.0).abs() < 1e-15);
}

#[test]
fn malformed_input_is_a_usage_error() {
    let path = scratch("bad.json", r#"{"statistics": "#);
    let out = run(&["validate", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stdout_json(&out)["reason"], "Parse");
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["sweep", "nope"]).status.code(), Some(2));
    assert_eq!(run(&["validate", "/nonexistent/map.json"]).status.code(), Some(2));
}

#[test]
fn diagonalize_bcs_block() {
    let path = scratch("bcs.json", BCS_HAMILTONIAN);
    let out = run(&["diagonalize", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let res = stdout_json(&out);
    let e: Vec<f64> = res["energies"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect();
    assert_eq!(e.len(), 2);
    for x in e {
        assert!((x - 5.0).abs() < 1e-12);
    }
    // ½(tr E − tr h) = ½(10 − 6)
    assert!((res["normal_ordering_constant"].as_f64().unwrap() - 2.0).abs() < 1e-12);
}

#[test]
fn diagonalize_wick_square_is_rejected() {
    let path = scratch(
        "wick_square.json",
        r#"{"statistics":"bosonic","h":{"rows":1,"cols":1,"re":[[1]]},"k":{"rows":1,"cols":1,"re":[[1]]}}"#,
    );
    let out = run(&["diagonalize", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = stdout_json(&out);
    assert_eq!(err["status"], "error");
    assert_eq!(err["reason"], "GramTooLarge");
}

#[test]
fn diagonalize_without_pairing_gives_identity() {
    let path = scratch(
        "diag.json",
        r#"{"statistics":"bosonic","h":{"rows":2,"cols":2,"re":[[2,0],[0,1]]},"k":{"rows":2,"cols":2,"re":[[0,0],[0,0]]}}"#,
    );
    let out = run(&["diagonalize", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let res = stdout_json(&out);
    let e = res["energies"].as_array().unwrap();
    assert!((e[0].as_f64().unwrap() - 2.0).abs() < 1e-14);
    assert!((e[1].as_f64().unwrap() - 1.0).abs() < 1e-14);
    let u = &res["u"]["re"];
    let v = &res["v"]["re"];
    for i in 0..2 {
        for j in 0..2 {
            let expected = if i == j { 1.0 } else { 0.0 };
            assert!((u[i][j].as_f64().unwrap() - expected).abs() < 1e-14);
            assert!(v[i][j].as_f64().unwrap().abs() < 1e-14);
        }
    }
}

#[test]
fn wick_sweep_rows_are_ordered_by_shell_then_lexicographically() {
    let out = run(&["sweep", "wick", "--m", "1", "--kappa", "1", "--radius", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let (header, rows) = csv_rows(&out);
    // Number of p ∈ ℤ³ with |p| ≤ 3.
    let mut expected = 0;
    for x in -3i64..=3 {
        for y in -3i64..=3 {
            for z in -3i64..=3 {
                if x * x + y * y + z * z <= 9 {
                    expected += 1;
                }
            }
        }
    }
    assert_eq!(rows.len(), expected);
    let (s, px, py, pz) = (
        col(&header, "shell"),
        col(&header, "px"),
        col(&header, "py"),
        col(&header, "pz"),
    );
    let keys: Vec<(i64, [i64; 3])> = rows
        .iter()
        .map(|r| {
            (
                r[s].parse().unwrap(),
                [
                    r[px].parse().unwrap(),
                    r[py].parse().unwrap(),
                    r[pz].parse().unwrap(),
                ],
            )
        })
        .collect();
    assert!(keys.windows(2).all(|w| w[0] < w[1]));
    assert_eq!(keys[0], (0, [0, 0, 0]));
    // u² − v² = 1 on every row.
    let (u, v) = (col(&header, "u"), col(&header, "v"));
    for r in &rows {
        let (u, v): (f64, f64) = (r[u].parse().unwrap(), r[v].parse().unwrap());
        assert!((u * u - v * v - 1.0).abs() < 1e-12);
    }
}

#[test]
fn sweep_output_is_deterministic() {
    let a = run(&["sweep", "wick", "--radius", "4", "--threads", "3"]);
    let b = run(&["sweep", "wick", "--radius", "4"]);
    assert_eq!(a.stdout, b.stdout);
    let a = run(&["sweep", "wick", "--probe", "5,8"]);
    let b = run(&["sweep", "wick", "--probe", "5,8", "--threads", "1"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn bcs_sweep_energy_matches_recomputation() {
    let out = run(&[
        "sweep", "bcs", "--m", "0.5", "--mu", "2", "--delta", "0.7", "--radius", "2",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let (header, rows) = csv_rows(&out);
    let (eps, d, e) = (
        col(&header, "eps"),
        col(&header, "delta_re"),
        col(&header, "E"),
    );
    assert_eq!(rows.len(), 33);
    for r in &rows {
        let (eps, d, e): (f64, f64, f64) = (
            r[eps].parse().unwrap(),
            r[d].parse().unwrap(),
            r[e].parse().unwrap(),
        );
        assert!((e - (eps * eps + d * d).sqrt()).abs() < 1e-12);
    }
}

#[test]
fn qed_sweep_unitarity_column() {
    let out = run(&[
        "sweep", "qed", "--omega", "1.3", "--field", "2", "--detuning", "0.4", "--radius", "1",
        "--t", "3", "--points", "5", "--steps", "32",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let (header, rows) = csv_rows(&out);
    assert_eq!(rows.len(), 7 * 5);
    let (n1, n2) = (col(&header, "norm1"), col(&header, "norm2"));
    for r in &rows {
        for c in [n1, n2] {
            let x: f64 = r[c].parse().unwrap();
            assert!((x - 1.0).abs() < 1e-10);
        }
    }
}

#[test]
fn sweep_config_file_replaces_flags() {
    let cfg = scratch("wick.json", r#"{"m": 2.0, "kappa": 0.5, "radius": 1}"#);
    let from_file = run(&["sweep", "wick", "--config", cfg.to_str().unwrap()]);
    let from_flags = run(&["sweep", "wick", "--m", "2", "--kappa", "0.5", "--radius", "1"]);
    assert_eq!(from_file.status.code(), Some(0));
    assert_eq!(from_file.stdout, from_flags.stdout);
}

#[test]
fn csv_floats_round_trip() {
    let out = run(&["sweep", "wick", "--radius", "1"]);
    let (header, rows) = csv_rows(&out);
    let e = col(&header, "E");
    let x: f64 = rows[0][e].parse().unwrap();
    assert_eq!(x, 3f64.sqrt());
}

#[test]
fn domain_errors_carry_reasons() {
    let out = run(&["sweep", "wick", "--kappa", "0"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stdout_json(&out)["reason"], "ConstraintViolated");
    let out = run(&["sweep", "bcs", "--delta", "0"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn simulate_checks() {
    let out = run(&["simulate", "vacuum", "--xi", "0.5", "--cutoff", "100"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    let diff = v["vacuum_overlap"].as_f64().unwrap() - v["expected_overlap"].as_f64().unwrap();
    assert!(diff.abs() < 1e-8);

    let out = run(&["simulate", "rapid-decay", "--t", "0.3", "--n", "0"]);
    let v = stdout_json(&out);
    assert!((v["seminorm"]["value"].as_f64().unwrap() - 1.0).abs() < 1e-10);
    assert!((v["mean_particle_number"]["value"].as_f64().unwrap() - 0.5625).abs() < 1e-10);

    let out = run(&[
        "simulate", "conjugation", "--alpha", "0.6", "--beta", "0.8",
    ]);
    assert_eq!(out.status.code(), Some(0));

    let path = scratch("heis.json", BCS_HAMILTONIAN);
    let out = run(&["simulate", "heisenberg", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));

    assert_eq!(
        run(&["simulate", "vacuum", "--xi", "0.5", "--alpha", "0.6"]).status.code(),
        Some(2)
    );
}

#[test]
fn decompose_and_classify_map() {
    let path = scratch("id2.json", IDENTITY_MAP);
    let out = run(&["decompose", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out)["modes"].as_array().unwrap().len(), 2);

    let input = format!(r#"{{"type":"map","map":{IDENTITY_MAP}}}"#);
    let path = scratch("classify_map.json", &input);
    let out = run(&["classify", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.len() > 2);
}

#[test]
fn classify_sequences() {
    let path = scratch(
        "basel.json",
        r#"{"type":"sequence","sequence":{"form":"expression","re":"1/k^2","tail":{"type":"power_decay","exponent":2}}}"#,
    );
    let out = run(&["classify", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["kind"], "Summable");
    let value = v["value"][0].as_f64().or(v["value"]["re"].as_f64()).unwrap();
    let bound = v["bound"].as_f64().unwrap();
    assert!((value - std::f64::consts::PI.powi(2) / 6.0).abs() <= bound);

    let path = scratch(
        "harmonic.json",
        r#"{"type":"sequence","sequence":{"form":"expression","re":"1/k","tail":{"type":"power_decay","exponent":1}}}"#,
    );
    let out = run(&["classify", path.to_str().unwrap()]);
    assert_eq!(stdout_json(&out)["kind"], "DivergentPlus");
}

#[test]
fn itp_family_and_equivalence() {
    let path = scratch(
        "itp.json",
        r#"{"type":"family","norms":"1 + k^(-2)","tail":{"type":"power_decay","exponent":2}}"#,
    );
    let out = run(&["itp", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let report = stdout_json(&out);
    assert_eq!(report["is_c"], "Yes");
    assert_eq!(report["is_c0"], "Yes");

    let path = scratch(
        "phases.json",
        r#"{"type":"equivalence","re":"math::cos(1/k)","im":"math::sin(1/k)",
           "strong_tail":{"type":"power_decay","exponent":1},
           "weak_tail":{"type":"power_decay","exponent":2}}"#,
    );
    let out = run(&["itp", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out)["equivalence"], "WeaklyEquivalent");
}

#[test]
fn out_flag_writes_file() {
    let dir = std::env::temp_dir().join(format!("bogokit-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let target = dir.join("sweep.csv");
    let out = run(&["sweep", "wick", "--radius", "1", "--out", target.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let written = std::fs::read_to_string(&target).unwrap();
    assert!(written.starts_with("shell,px,py,pz"));
}
