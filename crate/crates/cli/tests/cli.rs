use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn infostab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_infostab"))
        .args(args)
        .env_remove("INFOSTAB_WORKERS")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}",
            String::from_utf8_lossy(&out.stdout)
        )
    })
}

#[test]
fn certify_exact_power_passes_with_exact_field_set() {
    let out = infostab(&[
        "certify",
        "--alpha",
        "2",
        "--input",
        "power(3,-2)",
        "--samples",
        "2000",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let cert = json(&out);
    let mut keys: Vec<&str> = cert
        .as_object()
        .unwrap()
        .keys()
        .map(String::as_str)
        .collect();
    keys.sort_unstable();
    assert_eq!(
        keys,
        [
            "alpha",
            "bound",
            "candidate",
            "domain",
            "eps_hat",
            "k_alpha",
            "margin",
            "pass",
            "samples",
            "seed",
            "sup_deviation"
        ]
    );
    assert_eq!(cert["pass"], true);
    assert!(cert["sup_deviation"].as_f64().unwrap() < 1e-12);
}

#[test]
fn certify_perturbed_instance_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("cert.json");
    let diag = dir.path().join("diag.json");
    let out = infostab(&[
        "certify",
        "--alpha",
        "-1",
        "--input",
        "power(2,5)",
        "--epsilon",
        "1e-2",
        "--noise-seed",
        "42",
        "--out",
        report.to_str().unwrap(),
        "--diagnostics",
        diag.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let written: Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(written, json(&out));
    let d = written["sup_deviation"].as_f64().unwrap();
    let eps = written["eps_hat"].as_f64().unwrap();
    assert!(d <= 13.0 / 3.0 * eps);
    let full: Value = serde_json::from_str(&fs::read_to_string(&diag).unwrap()).unwrap();
    assert_eq!(full["diagnostics"]["verdict"], "pass");
}

#[test]
fn failing_certificate_exits_2() {
    let out = infostab(&[
        "certify",
        "--alpha",
        "-1",
        "--input",
        "power(2,5)",
        "--domain",
        "closed",
        "--f0",
        "0.1",
        "--samples",
        "2000",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["pass"], false);
}

#[test]
fn guard_band_is_an_error() {
    let out = infostab(&["certify", "--alpha", "0.9995"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("guard band"));
}

#[test]
fn mismatched_input_family_is_an_error() {
    let out = infostab(&["extract", "--alpha", "0", "--input", "power(1,2)"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn extract_recovers_log_parameters() {
    let out = infostab(&["extract", "--alpha", "0", "--input", "log(1.5,2)"]);
    assert_eq!(out.status.code(), Some(0));
    let cand = &json(&out)["candidate"];
    assert_eq!(cand["kind"], "log_plus_const");
    assert!((cand["lambda"].as_f64().unwrap() - 1.5).abs() < 1e-12);
    assert!((cand["c"].as_f64().unwrap() - 2.0).abs() < 1e-12);
}

#[test]
fn residual_report_alias() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let out = infostab(&[
        "residual",
        "--alpha",
        "2",
        "--input",
        "power(3,-2)",
        "--samples",
        "500",
        "--margin",
        "1e-3",
        "--seed",
        "9",
        "--report",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["samples"], 500);
    assert!(v["eps_hat"].as_f64().unwrap() < 1e-12);
    assert!(path.exists());
}

#[test]
fn constants_csv() {
    let out = infostab(&["constants", "--alpha", "0,-1,2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "alpha,K,T,relation_residual");
    assert_eq!(lines[1], "0.0,63.0,,");
    assert!(lines[3].starts_with("2.0,2406.0,300.0,"));
}

#[test]
fn entropy_and_recursion() {
    let out = infostab(&["entropy", "--p", "0.5,0.25,0.125,0.125", "--alpha", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let row = &json(&out)["rows"][0];
    assert_eq!(row["shannon"], 1.75);
    assert_eq!(row["degree_alpha"], 1.3125);

    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("p.csv");
    fs::write(&csv, "0.2,0.3,0.5\n\n0.1,0.2,0.3,0.4\n").unwrap();
    let out = infostab(&[
        "recursive",
        "--alpha",
        "-0.5",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["rows"].as_array().unwrap().len(), 2);
    for row in v["rows"].as_array().unwrap() {
        assert!(row["gap"].as_f64().unwrap() < 1e-12);
    }
    assert!(v["semi_symmetry_defect"].as_f64().unwrap() < 1e-12);
}

#[test]
fn invalid_vector_is_an_error() {
    let out = infostab(&["entropy", "--p", "0.5,0.6"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn system_certify_reports_per_n() {
    let out = infostab(&[
        "system-certify",
        "--alpha",
        "2",
        "--epsilon",
        "1e-3",
        "--n-max",
        "4",
        "--vectors",
        "500",
        "--samples",
        "2000",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let ns: Vec<u64> = v["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["n"].as_u64().unwrap())
        .collect();
    assert_eq!(ns, [2, 3, 4]);
    for row in v["rows"].as_array().unwrap() {
        assert!(row["deviation"].is_number() && row["bound"].is_number());
        assert_eq!(row["pass"], true);
    }
}

#[test]
fn oracle_fit_sits_below_constructive() {
    let out = infostab(&[
        "oracle-fit",
        "--alpha",
        "2",
        "--input",
        "power(1,2)",
        "--epsilon",
        "1e-3",
        "--samples",
        "2000",
        "--deviation-points",
        "2000",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let oracle = v["oracle"]["dev"].as_f64().unwrap();
    let constructive = v["constructive"]["sup_deviation"].as_f64().unwrap();
    assert!(oracle <= constructive && oracle <= 1e-3 * (1.0 + 1e-9));
}

#[test]
fn gen_is_deterministic_and_flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(
        &cfg,
        "alpha = -1.0\na = 2.0\nb = 5.0\nepsilon = 1e-3\nseed = 1\n",
    )
    .unwrap();
    let mut manifests = Vec::new();
    let mut tables = Vec::new();
    let m = dir.path().join("m.json");
    let t = dir.path().join("t.csv");
    for _ in 0..2 {
        let out = infostab(&[
            "gen",
            "--config",
            cfg.to_str().unwrap(),
            "--seed",
            "4",
            "--deviation-points",
            "300",
            "--out",
            m.to_str().unwrap(),
            "--table",
            t.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
        manifests.push(fs::read(&m).unwrap());
        tables.push(fs::read(&t).unwrap());
    }
    assert_eq!(manifests[0], manifests[1]);
    assert_eq!(tables[0], tables[1]);
    let m: Value = serde_json::from_slice(&manifests[0]).unwrap();
    assert_eq!(m["status"], "perturbed");
    assert_eq!(m["config"]["seed"], 4);
    assert_eq!(m["truth"]["a"], 2.0);
}

#[test]
fn table_input_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let t = dir.path().join("t.csv");
    let out = infostab(&[
        "gen",
        "--alpha",
        "2",
        "--input",
        "power(1,1)",
        "--table",
        t.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let out = infostab(&["extract", "--alpha", "2", "--input", t.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let cand = &json(&out)["candidate"];
    assert!((cand["a"].as_f64().unwrap() - 1.0).abs() < 1e-3);
}

#[test]
fn batch_isolates_errors_and_honours_workers() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.toml");
    let bad = dir.path().join("bad.toml");
    fs::write(
        &good,
        "alpha = 2.0\nepsilon = 1e-3\nsamples = 2000\ndeviation_points = 500\n",
    )
    .unwrap();
    fs::write(&bad, "alpha = 0.9999\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_infostab"))
        .args(["batch", good.to_str().unwrap(), bad.to_str().unwrap()])
        .env("INFOSTAB_WORKERS", "1")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["total"], 2);
    assert_eq!(v["passed"], 1);
    assert_eq!(v["errors"], 1);
    assert_eq!(v["items"][1]["status"], "error");

    let out = infostab(&["batch", good.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["pass_rate"], 1.0);
}
