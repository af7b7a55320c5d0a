use std::path::Path;
use std::process::{Command, Output};

fn galerkin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_galerkin"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read_csv(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records()
        .map(|rec| rec.unwrap().iter().map(str::to_owned).collect())
        .collect()
}

#[test]
fn solve_linear_decay() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("solve.csv");
    let o = galerkin(&[
        "solve",
        "--problem",
        "linear",
        "--lambda",
        "-1",
        "--scheme",
        "cg",
        "--degree",
        "1",
        "--steps",
        "10",
        "--horizon",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = read_csv(&out);
    assert_eq!(rows.len(), 11);
    for row in &rows {
        let t: f64 = row[1].parse().unwrap();
        let u: f64 = row[2].parse().unwrap();
        let err: f64 = row[3].parse().unwrap();
        assert!(err < 1e-6);
        assert!((u - (-t).exp()).abs() < 1e-6);
    }
    assert!(stdout(&o).contains("sampled L-inf error"));
}

#[test]
fn solve_zero_rhs_keeps_initial_value() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("zero.json");
    let o = galerkin(&[
        "solve",
        "--problem",
        "zero",
        "--u0",
        "1.5,-2",
        "--scheme",
        "dg",
        "--degree",
        "2",
        "--steps",
        "4",
        "--format",
        "json",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    let nodal = v["nodal_values"].as_array().unwrap();
    assert_eq!(nodal.len(), 5);
    for u in nodal {
        assert_eq!(u, &serde_json::json!([1.5, -2.0]));
    }
}

#[test]
fn malformed_config_is_a_configuration_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "problem = [unclosed").unwrap();
    let o = galerkin(&["solve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("configuration error"));

    let o = galerkin(&[
        "solve",
        "--problem",
        "linear",
        "--scheme",
        "fem",
        "--steps",
        "2",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let o = galerkin(&["solve", "--problem", "linear"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        "problem = \"linear\"\nscheme = \"dg\"\ndegree = 0\n[params]\nlambda = -1.0\n[mesh]\nsteps = 3\n",
    )
    .unwrap();
    let out = dir.path().join("o.json");
    let o = galerkin(&[
        "solve",
        "--config",
        cfg.to_str().unwrap(),
        "--steps",
        "6",
        "--scheme",
        "cg",
        "--format",
        "json",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    assert_eq!(v["scheme"], "cg");
    assert_eq!(v["degree"], 0);
    assert_eq!(v["nodes"].as_array().unwrap().len(), 7);
}

#[test]
fn solver_failure_exit_code() {
    let o = galerkin(&[
        "solve",
        "--problem",
        "powerlaw",
        "--scheme",
        "cg",
        "--steps",
        "1",
        "--horizon",
        "5",
    ]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stderr(&o).contains("step 0"));
}

#[test]
fn blowup_empirical_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("steps.csv");
    let o = galerkin(&[
        "blowup",
        "--problem",
        "example54",
        "--scheme",
        "cg",
        "--degree",
        "0",
        "--rho",
        "0.25",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("T_estimate"));
    assert!(text.contains("|error|"));
    assert!(text.contains("saturation"));
    let rows = read_csv(&out);
    assert_eq!(rows[0][0], "0");
    assert_eq!(rows[0][2], "");
    let last_t: f64 = rows.last().unwrap()[1].parse().unwrap();
    assert!((last_t - (5.0f64 / 3.0).ln()).abs() < 1e-2);
}

#[test]
fn blowup_theoretical_rho_too_large() {
    let o = galerkin(&[
        "blowup",
        "--problem",
        "example54",
        "--mode",
        "theoretical",
        "--rho",
        "0.3",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("admissible bound"));
}

#[test]
fn blowup_tau_above_first_step() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("b.json");
    let o = galerkin(&[
        "blowup",
        "--problem",
        "example54",
        "--rho",
        "0.25",
        "--tau",
        "1",
        "--format",
        "json",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    assert_eq!(v["result"]["steps"], 0);
    assert_eq!(v["result"]["stopped_by"], "tolerance");
    assert_eq!(v["result"]["step_sizes"].as_array().unwrap().len(), 1);
}

#[test]
fn sweep_single_cell_has_undefined_slope() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let o = galerkin(&[
        "sweep",
        "--problem",
        "example54",
        "--scheme",
        "dg",
        "--degree",
        "1",
        "--rho",
        "0.25",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = read_csv(&out);
    assert_eq!(rows.len(), 1);
    assert_eq!(&rows[0][1..3], ["dg", "1"]);
    assert_eq!(rows[0][6], "ok");
    let slopes = read_csv(&dir.path().join("sweep_slopes.csv"));
    assert_eq!(slopes, vec![vec!["dg", "1", "1", "undefined"]]);
}

#[test]
fn sweep_output_is_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, threads: &str| {
        let out = dir.path().join(name);
        let o = galerkin(&[
            "sweep",
            "--problem",
            "example54",
            "--scheme",
            "cg,dg",
            "--degree",
            "0,1",
            "--rho-list",
            "0.25,0.125",
            "--threads",
            threads,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        std::fs::read(out).unwrap()
    };
    let a = run("a.csv", "1");
    let b = run("b.csv", "4");
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "rho,scheme,degree,steps,T_estimate,abs_error,status"
    );
    assert_eq!(lines.len(), 9);
    assert!(lines[1].starts_with("2.5000000000000000e-1,cg,0,"));
    assert!(lines[5].starts_with("1.2500000000000000e-1,cg,0,"));
}

#[test]
fn sweep_without_growth_constants_is_rejected() {
    let o = galerkin(&["sweep", "--problem", "linear"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("growth"));
}
