use std::path::Path;
use std::process::{Command, Output};

fn hypodense(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hypodense")).args(args).output().expect("binary runs")
}

fn run_config(dir: &Path, name: &str, body: &str) -> Output {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    hypodense(&["run", path.to_str().unwrap()])
}

fn leftovers(dir: &Path) -> Vec<String> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| !n.ends_with(".json"))
        .collect()
}

#[test]
fn density_defaults_to_csv() {
    let o = hypodense(&["density", "--set", "evens", "--weight", "harmonic", "--horizon", "100000"]);
    assert_eq!(o.status.code(), Some(0));
    let out = String::from_utf8(o.stdout).unwrap();
    assert!(out.starts_with("N,Q_numerator,Q_denominator,Q_float_display\n1,1,1,"));
    assert!(String::from_utf8(o.stderr).unwrap().starts_with("PASS"));
}

#[test]
fn emit_flag_overrides_the_default() {
    let o = hypodense(&["--emit", "json", "density", "--set", "odds", "--horizon", "1000"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["horizon"], 1000);
    assert_eq!(v["lower_estimate"], "1/2");
}

#[test]
fn config_writes_declared_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("shadow.json");
    let cfg = format!(
        r#"{{"experiment":{{"command":"shadow","params":{{"preset":"shadow"}},"epsilon":"1/16"}},"out":{}}}"#,
        serde_json::to_string(out.to_str().unwrap()).unwrap()
    );
    let o = run_config(dir.path(), "cfg.json", &cfg);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    let first = std::fs::read(&out).unwrap();
    let v: serde_json::Value = serde_json::from_slice(&first).unwrap();
    assert_eq!(v["big_k"], 2);
    assert_eq!(v["z"], serde_json::json!([[1593, "1*2^-6"]]));
    run_config(dir.path(), "cfg.json", &cfg);
    assert_eq!(std::fs::read(&out).unwrap(), first);
}

#[test]
fn malformed_config_exits_2_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never.csv");
    let quoted = serde_json::to_string(out.to_str().unwrap()).unwrap();
    let bad = [
        "{not json".to_string(),
        format!(r#"{{"experiment":{{"command":"density","set":"evens","horizn":10}},"out":{quoted}}}"#),
        format!(r#"{{"experiment":{{"command":"density","set":"evens"}},"out":{quoted},"extra":1}}"#),
        format!(r#"{{"experiment":{{"command":"orbit","params":{{"kmax":3}}}},"out":{quoted}}}"#),
        format!(r#"{{"experiment":{{"command":"nonsense"}},"out":{quoted}}}"#),
        format!(r#"{{"experiment":{{"command":"verify","suite":"forge"}},"out":{quoted}}}"#),
        format!(r#"{{"experiment":{{"command":"density","set":"evens","horizon":0}},"out":{quoted}}}"#),
    ];
    for (i, cfg) in bad.iter().enumerate() {
        let o = run_config(dir.path(), &format!("bad{i}.json"), cfg);
        assert_eq!(o.status.code(), Some(2), "config {i}: {cfg}");
        assert!(o.stdout.is_empty());
        assert!(!o.stderr.is_empty());
        assert!(leftovers(dir.path()).is_empty(), "config {i} left {:?}", leftovers(dir.path()));
    }
    let missing = hypodense(&["run", dir.path().join("absent.json").to_str().unwrap()]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn bad_flags_exit_2() {
    assert_eq!(hypodense(&["density", "--set", "evens", "--bogus"]).status.code(), Some(2));
    assert_eq!(hypodense(&["orbit", "--x", "3"]).status.code(), Some(2));
    assert_eq!(hypodense(&["shadow", "--preset", "shadow", "--epsilon", "1/1024"]).status.code(), Some(2));
}

#[test]
fn failed_check_exits_1() {
    let o = hypodense(&[
        "identity",
        "--preset",
        "periodic",
        "--x",
        "3:1",
        "--x",
        "30:1,31:-1/2",
        "--ball",
        "3:1;1/8",
        "--ball",
        "31:1;1/2",
        "--weight",
        "harmonic",
        "--tol",
        "0",
        "--density-horizon",
        "4096",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8(o.stderr).unwrap().starts_with("FAIL"));
}

#[test]
fn verify_config_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"experiment":{"command":"verify","suite":"ctype","seed":3,"trials":5},"emit":"csv"}"#;
    let a = run_config(dir.path(), "v.json", cfg);
    let b = run_config(dir.path(), "v.json", cfg);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert!(String::from_utf8(a.stdout).unwrap().starts_with("suite,check,status,detail\n"));
}

#[test]
fn asymptotic_schedule_is_not_materialized() {
    let o = hypodense(&["orbit", "--preset", "shadow", "--steps", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let o = hypodense(&["schedule", "--mode", "asymptotic", "--preset", "props", "--emit", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.lines().count() > 1);
}
