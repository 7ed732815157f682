use std::process::Command;

fn run(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_pdc-lhv")).args(args).output().unwrap()
}

fn write_config(dir: &std::path::Path, body: &str) -> String {
    let path = dir.join("run.json");
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_owned()
}

const CONFIG: &str = r#"{"lambda_center": 7e-7, "delta_lambda": 1e-8, "T_window": 1e-8, "tau_coherence": 1e-10,
    "g_coupling": 0.2, "I_m_margin": 1.0, "zeta_gain": 5.0}"#;

#[test]
fn unknown_verb_is_a_usage_error() {
    let out = run(&["simulate", "--config", "x.json"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn invalid_config_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"lambda_center": -1, "delta_lambda": 1e-8, "T_window": 1e-8}"#);
    let out = run(&["analytic", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("lambda_center"));
}

#[test]
fn mc_csv_carries_provenance_header() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CONFIG);
    let out = run(&["mc", "--config", &cfg, "--trials", "2000", "--seed", "4"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# pdc-lhv "));
    assert_eq!(lines[1], "# verb: mc");
    assert_eq!(lines[2], "# seed: 4");
    assert!(lines[3].starts_with("# config: {"));
    assert!(lines.contains(&"quantity,mean,std_error,n,seed"));
}

#[test]
fn analytic_json_accepts_reduced_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CONFIG);
    let out = run(&["analytic", "--config", &cfg, "--set", "m=3", "--set", "x=6", "--set", "gamma=0.01"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["provenance"]["verb"], "analytic");
    let p = doc["result"]["p_single_model"].as_f64().unwrap();
    assert!((p - 0.0582).abs() < 1e-3, "{p}");
}

#[test]
fn output_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CONFIG);
    let path = dir.path().join("out.csv");
    let args = ["compare", "--config", &cfg, "--trials", "3000", "--seed", "9"];
    let stdout = run(&args).stdout;
    let mut with_file = args.to_vec();
    with_file.extend(["--output", path.to_str().unwrap()]);
    let out = run(&with_file);
    assert!(matches!(out.status.code(), Some(0) | Some(3)));
    assert_eq!(std::fs::read(&path).unwrap(), stdout);
}
