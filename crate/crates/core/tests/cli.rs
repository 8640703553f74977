//! Subcommands driven in-process through `cli::run`, plus one real process spawn.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use gnbdim::cli;
use serde_json::Value;
use tempfile::TempDir;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

struct Outcome {
    code: i32,
    stdout: String,
    stderr: String,
}

fn gnbdim(args: &[&str]) -> Outcome {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = cli::run(std::iter::once("gnbdim").chain(args.iter().copied()), &mut out, &mut err);
    Outcome {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_slice(&fs::read(p).unwrap()).unwrap()
}

/// Worked-example config with one field rewritten.
fn config_with(dir: &Path, edit: impl FnOnce(&mut Value)) -> PathBuf {
    let mut cfg = read_json(&fixture("worked.json"));
    cfg["input"] = Value::String(fixture("city.csv").to_str().unwrap().into());
    edit(&mut cfg);
    let path = dir.join("config.json");
    fs::write(&path, serde_json::to_vec_pretty(&cfg).unwrap()).unwrap();
    path
}

const FIVE_ROWS: &str = "\
radio,mcc,net,area,cell,unit,lon,lat,range,samples,changeable,created,updated,averageSignal
LTE,222,1,100,256001,0,10.01,45.01,500,3,1,1500000000,1600000000,
LTE,222,1,100,256002,0,10.02,45.01,500,4,1,1500000000,1600000000,-90
UMTS,222,10,7,99,0,10.03,45.02,800,1,1,1500000000,1600000000,
LTE,222,1,100,256003,0,200.0,45.01,500,2,1,1500000000,1600000000,
GSM,222,1,5,17,0,10.04,45.03,1000,9,1,1500000000,1600000000,
";

#[test]
fn ingest_five_rows_one_bad() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("cells.csv");
    fs::write(&input, FIVE_ROWS).unwrap();
    let out = gnbdim(&["ingest", "--input", s(&input), "--out", s(dir.path())]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let report: Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(report["rows_read"], 5);
    assert_eq!(report["rows_kept"], 4);
    assert_eq!(report["rows_rejected"], 1);
    assert_eq!(report["reject_reasons"]["BadCoordinate"], 1);
    let records = fs::read_to_string(dir.path().join("records.csv")).unwrap();
    assert_eq!(records.lines().count(), 5);

    let lte = gnbdim(&["ingest", "--input", s(&input), "--out", s(dir.path()), "--radio", "LTE"]);
    assert_eq!(lte.code, 0);
    let records = fs::read_to_string(dir.path().join("records.csv")).unwrap();
    assert_eq!(records.lines().count(), 3);
}

#[test]
fn ingest_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("cells.csv");
    fs::write(&input, FIVE_ROWS).unwrap();
    let a = gnbdim(&["ingest", "--input", s(&input), "--out", s(dir.path())]);
    let first = fs::read(dir.path().join("records.csv")).unwrap();
    let b = gnbdim(&["ingest", "--input", s(&input), "--out", s(dir.path())]);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(first, fs::read(dir.path().join("records.csv")).unwrap());
}

#[test]
fn missing_input_names_the_path() {
    let out = gnbdim(&["ingest", "--input", "/nonexistent/cells.csv"]);
    assert_eq!(out.code, 2);
    assert!(out.stderr.contains("/nonexistent/cells.csv"), "{}", out.stderr);
}

#[test]
fn bad_header_is_a_fault() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("cells.csv");
    fs::write(&input, "a,b,c\n1,2,3\n").unwrap();
    assert_eq!(gnbdim(&["ingest", "--input", s(&input), "--out", s(dir.path())]).code, 2);
}

#[test]
fn usage_errors() {
    assert_eq!(gnbdim(&[]).code, 2);
    assert_eq!(gnbdim(&["dimension", "--window", "7"]).code, 2);
    assert_eq!(gnbdim(&["dimension", "--input", s(&fixture("city.csv"))]).code, 2);
    assert_eq!(gnbdim(&["--help"]).code, 0);
}

#[test]
fn density_single_tower() {
    let dir = TempDir::new().unwrap();
    let out = gnbdim(&["density", "--input", s(&fixture("single.csv")), "--out", s(dir.path()), "--window", "1x1"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let area: Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(area["total_weight"], 42.0);
    assert_eq!((area["col0"].as_u64(), area["row0"].as_u64()), (Some(0), Some(0)));
    assert!(dir.path().join("grid.csv").exists());
    let geo = read_json(&dir.path().join("fivegda.geojson"));
    assert_eq!(geo["type"], "Feature");
}

#[test]
fn density_lands_in_the_dense_block() {
    // city.csv: 12x12 tiles of weight 1, with a 7x7 block of weight 100 at col 4, row 3
    let dir = TempDir::new().unwrap();
    let cfg = config_with(dir.path(), |_| {});
    let out = gnbdim(&["density", "--config", s(&cfg), "--out", s(dir.path())]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let area: Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!((area["col0"].as_u64(), area["row0"].as_u64()), (Some(4), Some(3)));
    assert_eq!(area["total_weight"], 4900.0);
}

#[test]
fn window_equal_to_grid_takes_everything() {
    let dir = TempDir::new().unwrap();
    let cfg = config_with(dir.path(), |_| {});
    let out = gnbdim(&["density", "--config", s(&cfg), "--out", s(dir.path()), "--window", "12x12"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let area: Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!((area["col0"].as_u64(), area["row0"].as_u64()), (Some(0), Some(0)));
    assert_eq!(area["total_weight"], 4900.0 + (144.0 - 49.0));

    let too_big = gnbdim(&["density", "--config", s(&cfg), "--out", s(dir.path()), "--window", "13x12"]);
    assert_eq!(too_big.code, 2);
}

#[test]
fn dimension_worked_example() {
    let dir = TempDir::new().unwrap();
    let out = gnbdim(&["dimension", "--config", s(&fixture("worked.json")), "--out", s(dir.path())]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let summary = read_json(&dir.path().join("summary.json"));
    let d = &summary["dimensioning"];
    assert_eq!(d["n_sites_coverage"], 19);
    assert_eq!(d["n_sites_capacity"], 17);
    assert_eq!(d["n_sites_final"], 19);
    assert_eq!(d["max_subs_per_cell"], 300);
    assert_eq!(d["classification"], "Balanced");
    assert_eq!(d["converged"], true);
    assert_eq!(summary["subscriber_density_per_km2"], 100.0);
    assert_eq!(summary["numerology"][0]["scs_khz"], 30.0);
    assert_eq!(summary["numerology"][0]["n_prb"], 250);
    assert_eq!(summary["input_sha256"].as_str().unwrap().len(), 64);
    assert!(summary["cost"]["cost_per_bit"].as_f64().unwrap() > 0.0);

    let sites = read_json(&dir.path().join("sites.geojson"));
    let features = sites["features"].as_array().unwrap();
    assert!(!features.is_empty());
    for f in features {
        let c = &f["geometry"]["coordinates"];
        let (lon, lat) = (c[0].as_f64().unwrap(), c[1].as_f64().unwrap());
        assert!(lon > 10.0 && lon < 10.2 && lat > 45.0 && lat < 45.12, "{lon} {lat}");
    }
}

#[test]
fn dimension_empty_area_is_coverage_only() {
    // every tower carries zero samples, so no subscribers anywhere
    let dir = TempDir::new().unwrap();
    let csv = fs::read_to_string(fixture("dense.csv")).unwrap();
    let zeroed: String = csv
        .lines()
        .enumerate()
        .map(|(i, l)| {
            if i == 0 {
                return format!("{l}\n");
            }
            let mut f: Vec<&str> = l.split(',').collect();
            f[9] = "0";
            format!("{}\n", f.join(","))
        })
        .collect();
    let input = dir.path().join("empty.csv");
    fs::write(&input, zeroed).unwrap();
    let cfg = config_with(dir.path(), |_| {});
    let out = gnbdim(&["dimension", "--config", s(&cfg), "--input", s(&input), "--out", s(dir.path())]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let d = &read_json(&dir.path().join("summary.json"))["dimensioning"];
    assert_eq!(d["actual_load"], 0.0);
    assert_eq!(d["r_cap_km"], Value::Null);
    assert_eq!(d["n_sites_capacity"], 0);
    assert_eq!(d["n_sites_final"], d["n_sites_coverage"]);
}

#[test]
fn infeasible_margins_exit_3() {
    let dir = TempDir::new().unwrap();
    let cfg = config_with(dir.path(), |c| c["link_budget"]["penetration_margin_db"] = 300.into());
    let out = gnbdim(&["dimension", "--config", s(&cfg), "--out", s(dir.path())]);
    assert_eq!(out.code, 3);
    assert!(out.stderr.contains("NegativeMapl"), "{}", out.stderr);
    assert!(!dir.path().join("summary.json").exists());
}

#[test]
fn oversized_demand_exit_3() {
    let dir = TempDir::new().unwrap();
    let cfg = config_with(dir.path(), |c| c["traffic"]["demand_per_sub_mbps"] = 1000.into());
    let out = gnbdim(&["dimension", "--config", s(&cfg), "--out", s(dir.path())]);
    assert_eq!(out.code, 3);
    assert!(out.stderr.contains("ZeroSubscribers"), "{}", out.stderr);
}

#[test]
fn config_faults_exit_2() {
    let dir = TempDir::new().unwrap();
    let cfg = config_with(dir.path(), |c| c["traffic"]["target_load"] = 1.5.into());
    let out = gnbdim(&["dimension", "--config", s(&cfg), "--out", s(dir.path())]);
    assert_eq!(out.code, 2);
    assert!(out.stderr.contains("traffic"), "{}", out.stderr);

    let cfg = config_with(dir.path(), |c| c["nr"]["bwps"][0]["mu"] = 7.into());
    assert_eq!(gnbdim(&["dimension", "--config", s(&cfg), "--out", s(dir.path())]).code, 2);

    let cfg = config_with(dir.path(), |c| c["unexpected"] = 1.into());
    assert_eq!(gnbdim(&["dimension", "--config", s(&cfg), "--out", s(dir.path())]).code, 2);

    let out = gnbdim(&["dimension", "--config", "/nonexistent/config.json"]);
    assert_eq!(out.code, 2);
    assert!(out.stderr.contains("/nonexistent/config.json"));
}

#[test]
fn non_convergence_is_reported_not_failed() {
    let dir = TempDir::new().unwrap();
    let cfg = config_with(dir.path(), |c| {
        c["balance"]["max_iter"] = 1.into();
        c["balance"]["eps_load"] = 1e-9.into();
    });
    let out = gnbdim(&["dimension", "--config", s(&cfg), "--out", s(dir.path())]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let d = &read_json(&dir.path().join("summary.json"))["dimensioning"];
    assert_eq!(d["converged"], false);
    assert_eq!(d["iterations"], 1);
}

#[test]
fn echoed_config_reproduces_the_report() {
    let dir = TempDir::new().unwrap();
    let first = dir.path().join("first");
    let out = gnbdim(&["dimension", "--config", s(&fixture("worked.json")), "--out", s(&first)]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let summary = read_json(&first.join("summary.json"));

    let second = dir.path().join("second");
    let mut echo = summary["config"].clone();
    echo["input"] = Value::String(fixture("city.csv").to_str().unwrap().into());
    echo["out_dir"] = Value::String(s(&second).into());
    let echo_path = dir.path().join("echo.json");
    fs::write(&echo_path, serde_json::to_vec(&echo).unwrap()).unwrap();
    assert_eq!(gnbdim(&["dimension", "--config", s(&echo_path)]).code, 0);
    let again = read_json(&second.join("summary.json"));

    for key in ["dimensioning", "cost", "deployment_area", "grid", "ingest", "input_sha256"] {
        assert_eq!(summary[key], again[key], "{key}");
    }
}

#[test]
fn flags_override_the_file() {
    let dir = TempDir::new().unwrap();
    let out = gnbdim(&[
        "dimension",
        "--config",
        s(&fixture("worked.json")),
        "--out",
        s(dir.path()),
        "--window",
        "5x5",
        "--plmn",
        "22201",
    ]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let summary = read_json(&dir.path().join("summary.json"));
    assert_eq!(summary["deployment_area"]["w_cols"], 5);
    assert_eq!(summary["config"]["window"]["w_cols"], 5);
    assert_eq!(summary["config"]["filters"]["plmn"], "22201");
}

#[test]
fn binary_runs_with_logging() {
    let dir = TempDir::new().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_gnbdim"))
        .args(["dimension", "--config", s(&fixture("worked.json")), "--out", s(dir.path())])
        .env("GNBDIM_LOG", "debug")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("balance iter"));

    let missing = Command::new(env!("CARGO_BIN_EXE_gnbdim"))
        .args(["ingest", "--input", "/nonexistent/x.csv"])
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(2));
}
