use std::process::{Command, Output};

fn maxwave(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_maxwave")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn list_names_every_experiment() {
    let o = maxwave(&["list"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    for id in ["maximal-knapp", "l2xt-knapp", "tinycap-sharp", "bilinear-transverse", "local-global", "whitney-product"] {
        assert!(s.contains(id), "{id}");
    }
}

#[test]
fn verify_passes() {
    let o = maxwave(&["verify"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).trim_end().ends_with("PASS"));
}

#[test]
fn run_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r");
    let o = maxwave(&["run", "maximal-knapp", "--scales", "8,16,32", "--seed", "7", "--dt", "0.125", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(out.join("maximal-knapp.csv").exists());
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("maximal-knapp.json")).unwrap()).unwrap();
    assert_eq!(json["config"]["scales"], serde_json::json!([8, 16, 32]));
}

#[test]
fn config_file_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    let out = dir.path().join("r");
    std::fs::write(&cfg, format!(r#"{{"experiment": "l2xt-knapp", "scales": [8, 16, 32], "out": {:?}}}"#, out)).unwrap();
    let o = maxwave(&["run", "--config", cfg.to_str().unwrap(), "--dt", "0.25"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("l2xt-knapp.json")).unwrap()).unwrap();
    assert_eq!(json["config"]["dt"], 0.25);
}

#[test]
fn tolerance_failure_exits_with_two() {
    // the bilinear exponent exceeds its window at these scales
    let dir = tempfile::tempdir().unwrap();
    let o = maxwave(&["run", "bilinear-transverse", "--scales", "16,32,64", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", stdout(&o));
    assert!(dir.path().join("bilinear-transverse.json").exists());
}

#[test]
fn errors_exit_with_one() {
    assert_eq!(maxwave(&["run", "no-such-experiment"]).status.code(), Some(1));
    assert_eq!(maxwave(&["run", "maximal-knapp", "--scales", "16,32"]).status.code(), Some(1));
    assert_eq!(maxwave(&["run", "maximal-knapp", "--dt", "0.5"]).status.code(), Some(1));
    assert_eq!(maxwave(&["run"]).status.code(), Some(1));
    assert_eq!(maxwave(&["run", "--config", "/nonexistent/c.json"]).status.code(), Some(1));
    assert_eq!(maxwave(&["frobnicate"]).status.code(), Some(1));
}
