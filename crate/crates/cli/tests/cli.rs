use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn ecasim(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ecasim")).args(args).current_dir(dir).output().unwrap()
}

fn stdout(dir: &Path, args: &[&str]) -> String {
    let out = ecasim(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn table<'a>(csv: &'a str, name: &str) -> Vec<&'a str> {
    let header = format!("# table: {name}");
    csv.lines()
        .skip_while(|l| *l != header)
        .skip(1)
        .take_while(|l| !l.is_empty() && !l.starts_with('#'))
        .collect()
}

#[test]
fn analyze_matches_the_chain() {
    let dir = tempfile::tempdir().unwrap();
    let csv = stdout(dir.path(), &["analyze", "--sigma", "1-5", "--cw-min", "8"]);
    let rows = table(&csv, "absorption");
    assert_eq!(rows[0], "sigma,capacity,status,expected_steps,expected_slots");
    assert_eq!(rows[1], "1,4,ok,1,4");
    assert!(rows[3].starts_with("3,4,ok,2.66666666667,10.6666666667"), "{}", rows[3]);
    assert_eq!(rows[5], "5,4,unreachable,,");

    let csv = stdout(dir.path(), &["analyze"]);
    let slots: Vec<f64> = table(&csv, "absorption")[1..].iter().map(|r| r.split(',').nth(4).unwrap().parse().unwrap()).collect();
    assert_eq!(slots.len(), 16);
    assert_eq!(slots[0], 16.0);
    assert!(slots.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn analyze_monte_carlo_columns() {
    let dir = tempfile::tempdir().unwrap();
    let out = stdout(dir.path(), &["analyze", "--sigma", "2,3", "--cw-min", "8", "--runs", "30", "--format", "json"]);
    let v: Value = serde_json::from_str(&out).unwrap();
    let t = &v["tables"]["absorption"];
    assert_eq!(t["columns"][7], "mc_mean");
    assert_eq!(t["rows"].as_array().unwrap().len(), 2);
    assert_eq!(t["rows"][0][9], 30);
    assert!(t["rows"][1][7].as_f64().unwrap() > 1.0);
    assert_eq!(v["config"]["runs"], 30);
}

#[test]
fn simulate_writes_trace_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let csv = stdout(dir.path(), &["simulate", "--sigma", "4", "--slots", "2000", "--trace", "t.jsonl"]);
    let summary = table(&csv, "summary");
    let fields: Vec<&str> = summary[1].split(',').collect();
    assert_eq!(fields[0], "e2ca");
    assert_eq!(fields[3], "2000");
    let counts: u64 = fields[4..8].iter().map(|f| f.parse::<u64>().unwrap()).sum();
    assert_eq!(counts, 2000);

    let trace = std::fs::read_to_string(dir.path().join("t.jsonl")).unwrap();
    let lines: Vec<Value> = trace.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 2000);
    assert_eq!(lines[0]["slot"], 0);
    let success = lines.iter().filter(|l| l["outcome"] == "success").count();
    assert_eq!(success.to_string(), fields[5]);
}

#[test]
fn simulate_with_adaptation_reports_beacons() {
    let dir = tempfile::tempdir().unwrap();
    let out = stdout(dir.path(), &["simulate", "--sigma", "40", "--adapt", "--intervals", "6", "--format", "json"]);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["tables"]["intervals"]["rows"].as_array().unwrap().len(), 6);
    let beacons = v["tables"]["beacons"]["rows"].as_array().unwrap();
    assert_eq!(beacons.len(), 6);
    // Forty stations on a 32-slot window saturate the first interval.
    assert_eq!(beacons[0][4], 32);
    assert_eq!(beacons[0][5], 64);
    assert_eq!(v["config"]["sim"]["adaptation_enabled"], true);
}

#[test]
fn sweep_grid_from_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("grid.toml"),
        "protocols = [\"ca\", \"eca\"]\nsigma = [4, 8]\ndrop_prob = [0.0]\nslots = 20000\nruns = 2\nformat = \"json\"\n",
    )
    .unwrap();
    let out = stdout(dir.path(), &["sweep", "--config", "grid.toml", "--sigma", "6"]);
    let v: Value = serde_json::from_str(&out).unwrap();
    let rows = v["tables"]["fractions"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][0], "ca");
    assert_eq!(rows[1][0], "eca");
    assert_eq!(rows[1][4], 6);
    // ECA below capacity on an ideal channel settles collision-free.
    assert!(rows[1][12].as_f64().unwrap() < 0.01);
    let fractions: f64 = [8, 10, 12, 14].iter().map(|&i| rows[0][i].as_f64().unwrap()).sum();
    assert!((fractions - 1.0).abs() < 1e-9);
}

#[test]
fn out_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["adapt", "--sigma", "20", "--runs", "4", "--intervals", "3"];
    let printed = stdout(dir.path(), &args);
    let mut with_out = args.to_vec();
    with_out.extend(["--out", "adapt.csv"]);
    assert_eq!(stdout(dir.path(), &with_out), "");
    assert_eq!(std::fs::read_to_string(dir.path().join("adapt.csv")).unwrap(), printed);
    assert!(printed.starts_with("# command: adapt\n# config: {"));
    assert_eq!(table(&printed, "efficiency").len(), 4);
}

#[test]
fn seeds_change_results_and_reruns_do_not() {
    let dir = tempfile::tempdir().unwrap();
    let a = stdout(dir.path(), &["sweep", "--protocol", "ca", "--sigma", "8", "--slots", "5000", "--runs", "3", "--seed", "1"]);
    let b = stdout(dir.path(), &["sweep", "--protocol", "ca", "--sigma", "8", "--slots", "5000", "--runs", "3", "--seed", "1"]);
    let c = stdout(dir.path(), &["sweep", "--protocol", "ca", "--sigma", "8", "--slots", "5000", "--runs", "3", "--seed", "2"]);
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn invalid_parameters_fail_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [&[&str]; 7] = [
        &["simulate", "--cw-min", "24"],
        &["simulate", "--drop-prob", "1.5"],
        &["simulate", "--protocol", "aloha"],
        &["simulate", "--sigma", "2,4"],
        &["sweep", "--runs", "0"],
        &["adapt", "--intervals", "0"],
        &["sweep", "--config", "missing.toml"],
    ];
    for args in cases {
        let mut full = args.to_vec();
        full.extend(["--out", "never.csv"]);
        let out = ecasim(dir.path(), &full);
        assert!(!out.status.success(), "{args:?} should fail");
        assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"), "{args:?}");
        assert!(!dir.path().join("never.csv").exists(), "{args:?} wrote output");
    }
}
