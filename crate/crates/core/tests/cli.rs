use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

fn spincat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spincat")).args(args).output().expect("binary runs")
}

fn default_config() -> Value {
    let out = spincat(&["default-config"]);
    assert!(out.status.success());
    serde_json::from_slice(&out.stdout).unwrap()
}

fn write_config(dir: &Path, cfg: &Value) -> String {
    let path = dir.join("config.json");
    std::fs::write(&path, serde_json::to_vec_pretty(cfg).unwrap()).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn default_config_is_accepted_back() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = default_config();
    assert_eq!(cfg["schema_version"], 1);
    cfg["scans"]["evolve_points"] = 21.into();
    let path = write_config(dir.path(), &cfg);
    let out_dir = dir.path().join("out");
    let out = spincat(&["evolve", "--config", &path, "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(out_dir.join("fig2.csv")).unwrap();
    assert!(text.starts_with("omega_t [rad],model,mz,var_jz,p(m=-8)"), "{}", text.lines().next().unwrap());
    // 21 points for each of ideal, imperfect and analytic, plus the header
    assert_eq!(text.lines().count(), 1 + 3 * 21);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = spincat(&["evolve", "--config", "/nonexistent/spincat.json"]);
    assert_eq!(missing.status.code(), Some(1));

    let mut cfg = default_config();
    cfg["schema_version"] = 7.into();
    let bad = spincat(&["evolve", "--config", &write_config(dir.path(), &cfg)]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("schema_version"));

    let mut cfg = default_config();
    cfg["seed"] = Value::Null;
    let unseeded = spincat(&["parity", "--config", &write_config(dir.path(), &cfg), "--samples", "1000"]);
    assert_eq!(unseeded.status.code(), Some(2));

    let mut cfg = default_config();
    cfg["coupling"]["omega_hz"] = 3.into();
    assert_eq!(spincat(&["evolve", "--config", &write_config(dir.path(), &cfg)]).status.code(), Some(2));

    assert_eq!(spincat(&["verify", "--out", dir.path().join("empty").to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn reruns_are_byte_identical_and_verifiable() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        let out = spincat(&["evolve", "--seed", "9", "--out", d.to_str().unwrap()]);
        assert!(out.status.success());
    }
    for name in ["fig2.csv", "figS1.csv", "fig2.meta.json"] {
        assert_eq!(std::fs::read(a.join(name)).unwrap(), std::fs::read(b.join(name)).unwrap(), "{name}");
    }
    let meta: Value = serde_json::from_slice(&std::fs::read(a.join("fig2.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["seed"], 9);
    assert_eq!(meta["rng"].as_str().unwrap().to_lowercase().contains("chacha"), true);
    assert_eq!(meta["config_sha256"].as_str().unwrap().len(), 64);

    assert!(spincat(&["verify", "--out", a.to_str().unwrap()]).status.success());
    std::fs::write(a.join("figS1.csv"), "tampered\n").unwrap();
    let out = spincat(&["verify", "--out", a.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL figS1"));
}

#[test]
fn json_output_mirrors_csv_records() {
    let dir = tempfile::tempdir().unwrap();
    let out = spincat(&["evolve", "--format", "json", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let doc: Value = serde_json::from_slice(&std::fs::read(dir.path().join("fig2.json")).unwrap()).unwrap();
    assert_eq!(doc["artifact"], "fig2");
    let records = doc["records"].as_array().unwrap();
    assert_eq!(records.len(), 3 * 201);
    assert!(doc["columns"].as_array().unwrap().iter().any(|c| c["name"] == "omega_t" && c["unit"] == "rad"));
    assert_eq!(doc["summary"]["ideal_mz_at_pi"], 8.0);
}
