use std::path::Path;
use std::process::Command;

use karst_fem::mesh::MeshDocument;

fn karst(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_karst"))
        .args(args)
        .env_remove("KARST_THREADS")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("config.json");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

/// A verify run small enough for a test.
const SMALL_VERIFY: &str = r#"{
  "verify": {
    "convergence": { "families": ["q1"], "nx": 2, "ny": 2, "levels": 2 },
    "sweep": { "families": ["p1"], "aspect_ratios": [1, 10], "nx": 2, "levels": 2 },
    "suites": ["unisolvence", "alignment-bounds"]
  }
}"#;

#[test]
fn mesh_command_writes_32_elements() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"mesh": {"nx": 4, "ny": 4}}"#);
    let out = dir.path().join("out");
    let o = karst(&["mesh", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let doc = MeshDocument::read(&out.join("mesh.json")).unwrap();
    assert_eq!(doc.to_mesh().unwrap().num_elements(), 32);
}

#[test]
fn estimate_writes_all_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "{}");
    let out = dir.path().join("est");
    let o = karst(&["estimate", "--config", &cfg, "--out", out.to_str().unwrap(), "--set", "mesh.nx=3"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["mesh.json", "solution.json", "estimator.csv", "estimator.json", "run.json"] {
        assert!(out.join(f).exists(), "missing {f}");
    }
    let csv = std::fs::read_to_string(out.join("estimator.csv")).unwrap();
    // 2 * 3 * 4 rectangles plus the header
    assert_eq!(csv.lines().count(), 25);
    let run: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("run.json")).unwrap()).unwrap();
    assert_eq!(run["config"]["mesh"]["nx"], 3);
    assert!(run["solver"]["iterations"].as_u64().unwrap() > 0);
}

#[test]
fn unknown_keys_are_rejected_with_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"mesh": {"nx": 4, "depth": 2}}"#);
    let o = karst(&["mesh", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("mesh.depth"), "{err}");
}

#[test]
fn bad_override_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "{}");
    let o = karst(&["solve", "--config", &cfg, "--set", "adapt.fraction=2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("adapt"));
}

#[test]
fn missing_config_flag_is_a_usage_error() {
    let o = karst(&["solve"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL_VERIFY);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let o = karst(&["verify", "--config", &cfg, "--out", a.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = Command::new(env!("CARGO_BIN_EXE_karst"))
        .args(["verify", "--config", &cfg, "--out", b.to_str().unwrap()])
        .env("KARST_THREADS", "1")
        .output()
        .unwrap();
    assert!(o.status.success());
    for f in ["study.csv", "sweep.csv", "properties.json"] {
        let x = std::fs::read(a.join(f)).unwrap();
        let y = std::fs::read(b.join(f)).unwrap();
        assert_eq!(x, y, "{f} differs");
    }
    let failures: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(a.join("failures.json")).unwrap()).unwrap();
    assert_eq!(failures["passed"], true);
    assert_eq!(failures["failures"].as_array().unwrap().len(), 0);
}

#[test]
fn adapt_reports_conduit_fraction() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"adapt": {"max_levels": 3}}"#);
    let out = dir.path().join("adapt");
    let o = karst(&["adapt", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("adapt.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 3);
    let fraction: f64 = rows[0].split(',').nth(6).unwrap().parse().unwrap();
    assert!(fraction > 0.5, "{fraction}");
    // the last level does not mark
    let last: Vec<&str> = rows[2].split(',').collect();
    assert_eq!((last[5], last[6]), ("0", ""), "{}", rows[2]);
    assert!(out.join("estimator-2.csv").exists());
}

#[test]
fn thread_cap_must_be_positive() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "{}");
    let o = Command::new(env!("CARGO_BIN_EXE_karst"))
        .args(["mesh", "--config", &cfg, "--out", dir.path().to_str().unwrap()])
        .env("KARST_THREADS", "none")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("KARST_THREADS"));
}
