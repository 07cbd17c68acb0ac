use std::fs;
use std::path::Path;

use ringbubble_cli::run;

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("config.json");
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

fn run_to(dir: &Path, name: &str, args: &[&str]) -> (i32, String) {
    let out = dir.join(name);
    let mut argv = vec!["ringbubble", "--no-timestamp", "--out", out.to_str().unwrap()];
    argv.extend_from_slice(args);
    let code = run(argv);
    (code, fs::read_to_string(&out).unwrap_or_default())
}

const REFERENCE: &str = r#"{"params": {"N": 5, "m": 2, "n": 2, "c0": -1, "d0": 1, "r0": 1, "Dfrak": 2}, "mc": {"samples": 10000, "seed": 5}}"#;

#[test]
fn csv_header_carries_hash_seed_and_mu_law() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), REFERENCE);
    let (code, text) = run_to(dir.path(), "scan.csv", &["--config", &cfg, "energy-scan", "--k", "6", "--nr", "3", "--nl", "4"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "# ringbubble energy-scan");
    assert!(lines[1].starts_with("# config_sha256: ") && lines[1].len() == "# config_sha256: ".len() + 64);
    assert_eq!(lines[2], "# seed: 5");
    assert!(lines[3].starts_with("# mu = k^{(N-2)/(N-2-frakm)} = k^3.0"));
    assert_eq!(lines[4], "r,Lambda,F,dF_dr,dF_dLambda");
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 1 + 12);
    assert!(!text.contains("timestamp"));
}

#[test]
fn seed_flag_changes_the_hash_and_the_header() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), REFERENCE);
    let (_, a) = run_to(dir.path(), "a.csv", &["--config", &cfg, "check-bubble", "--points", "5"]);
    let (_, b) = run_to(dir.path(), "b.csv", &["--config", &cfg, "--seed", "6", "check-bubble", "--points", "5"]);
    assert!(b.contains("# seed: 6"));
    assert_ne!(a.lines().nth(1), b.lines().nth(1));
    assert_ne!(a, b);
}

#[test]
fn timestamp_line_is_present_unless_suppressed() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.json");
    let code = run(["ringbubble", "--out", out.to_str().unwrap(), "constants"]);
    assert_eq!(code, 0);
    assert!(fs::read_to_string(&out).unwrap().contains("\"timestamp_unix\""));
}

#[test]
fn constants_json_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let (code, text) = run_to(dir.path(), "c.json", &["constants"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let a = v["result"]["A"].as_f64().unwrap();
    assert!((a - 414.4067).abs() < 1e-3);
    assert_eq!(v["meta"]["command"], "constants");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    // missing seed for a Monte Carlo subcommand
    assert_eq!(run_to(dir.path(), "x", &["check-bubble"]).0, 1);
    // unknown key
    let bad = write_config(dir.path(), r#"{"params": {"N": 5, "m": 2, "n": 2, "c0": -1, "d0": 1, "r0": 1, "Dfrak": 2, "oops": 1}}"#);
    assert_eq!(run_to(dir.path(), "x", &["--config", &bad, "constants"]).0, 1);
    // dimension below five
    let bad = write_config(dir.path(), r#"{"params": {"N": 4, "m": 2, "n": 2, "c0": -1, "d0": 1, "r0": 1, "Dfrak": 2}}"#);
    assert_eq!(run_to(dir.path(), "x", &["--config", &bad, "constants"]).0, 1);
    // wrong sign of c0 for m = n
    let inadmissible = write_config(dir.path(), r#"{"params": {"N": 5, "m": 2, "n": 2, "c0": 1, "d0": 1, "r0": 1, "Dfrak": 2}}"#);
    assert_eq!(run_to(dir.path(), "x", &["--config", &inadmissible, "critical-point", "--k", "8"]).0, 3);
    // unparsable argument
    assert_eq!(run(["ringbubble", "energy-scan", "--k", "six"]), 1);
    // impossible residual tolerance
    let cfg = write_config(dir.path(), REFERENCE);
    assert_eq!(run_to(dir.path(), "x", &["--config", &cfg, "check-bubble", "--points", "5", "--tol", "1e-30"]).0, 2);
}

#[test]
fn critical_point_report() {
    let dir = tempfile::tempdir().unwrap();
    let (code, text) = run_to(dir.path(), "cp.json", &["critical-point", "--k", "8"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let cp = &v["result"]["critical_point"];
    assert!((cp[0].as_f64().unwrap() - 512.0).abs() < 1e-6);
    assert_eq!(v["result"]["converged"], true);

    // below k0 the report is flagged rather than solved
    let (code, text) = run_to(dir.path(), "small.json", &["critical-point", "--k", "3"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert!(v["result"]["critical_point"].is_null());
    assert!(v["result"]["notes"][0].as_str().unwrap().contains("k0"));
}

#[test]
fn error_decay_footer_has_slopes() {
    let dir = tempfile::tempdir().unwrap();
    let (code, text) = run_to(dir.path(), "d.csv", &["error-decay", "--k", "6,8,12,16"]);
    assert_eq!(code, 0);
    assert!(text.contains("k,mu,norm_in,norm_bd\n"));
    let slope = |key: &str| -> f64 {
        let line = text.lines().find(|l| l.starts_with(&format!("# {key}:"))).unwrap();
        line.split_whitespace().nth(2).unwrap().parse().unwrap()
    };
    assert!(slope("slope_in") < -1.0);
    assert!(slope("slope_bd") < -1.0);
}

#[test]
fn export_profile_on_the_half_space_and_the_ball() {
    let dir = tempfile::tempdir().unwrap();
    let (code, text) = run_to(dir.path(), "h.csv", &["export-profile", "--k", "6", "--grid", "y1:210:222:7,yN:0:1:3"]);
    assert_eq!(code, 0);
    assert!(text.contains("y_1,y_2,y_3,y_4,y_5,W\n"));
    let rows: Vec<Vec<f64>> = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with('y'))
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 21);
    // the profile peaks on the ring
    let peak = rows.iter().max_by(|a, b| a[5].total_cmp(&b[5])).unwrap();
    assert_eq!((peak[0], peak[4]), (216.0, 0.0));

    let (code, text) = run_to(dir.path(), "b.csv", &["export-profile", "--k", "6", "--ball", "--grid", "xiN:-1:1:5"]);
    assert_eq!(code, 0);
    let data: Vec<&str> = text.lines().filter(|l| !l.starts_with('#') && !l.starts_with("xi")).collect();
    assert_eq!(data.len(), 5);
    assert!(data[0].ends_with(",0.0000000000000000e0"));
}

#[test]
fn json_tables() {
    let dir = tempfile::tempdir().unwrap();
    let (code, text) = run_to(dir.path(), "s.json", &["--format", "json", "energy-scan", "--k", "6", "--nr", "2", "--nl", "2"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["result"]["rows"].as_array().unwrap().len(), 4);
    assert!(v["result"]["rows"][0]["dF_dLambda"].is_number());
}
