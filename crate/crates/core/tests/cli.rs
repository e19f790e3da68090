use std::fs;
use std::process::Command;

use torsionlab::config::RunConfig;
use torsionlab::export::ArtifactDir;
use torsionlab::verify::{bundled_config_dir, run_criteria, ConfigSet, CONFIG_FILES};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_torsionlab"))
}

fn write_config(dir: &std::path::Path, text: &str) -> std::path::PathBuf {
    let p = dir.join("run.json");
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn help_lists_every_command() {
    let out = bin().arg("--help").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for c in ["torsion", "zeroset", "decompose", "green", "eigen", "poincare", "iterate", "weight", "kato", "oracle", "defect", "verify-all"] {
        assert!(text.contains(c), "{c} missing from help");
    }
}

#[test]
fn corrupted_config_names_key_and_exits_two() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), r#"{ "h": 0.125, "bogus_key": 1 }"#);
    let out = bin().args(["torsion", "--config"]).arg(&cfg).arg("--out").arg(tmp.path().join("o")).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bogus_key"));

    let set = tmp.path().join("set");
    fs::create_dir(&set).unwrap();
    for f in CONFIG_FILES {
        fs::copy(bundled_config_dir().join(f), set.join(f)).unwrap();
    }
    fs::write(set.join(CONFIG_FILES[3]), r#"{ "hh": 0.1 }"#).unwrap();
    let out = bin().args(["verify-all", "--config"]).arg(&set).arg("--out").arg(tmp.path().join("v")).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("hh"));
}

#[test]
fn torsion_summary_and_collision_suffix() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), r#"{ "h": 0.0625 }"#);
    let out_dir = tmp.path().join("o");
    for _ in 0..2 {
        let st = bin().args(["torsion", "--config"]).arg(&cfg).arg("--out").arg(&out_dir).status().unwrap();
        assert_eq!(st.code(), Some(0));
    }
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(out_dir.join("summary.json")).unwrap()).unwrap();
    for key in ["command", "config_hash", "timings"] {
        assert!(summary.get(key).is_some(), "{key} missing");
    }
    assert!(summary["results"]["grid"]["node_count"].as_u64().unwrap() > 0);
    assert!(out_dir.join("summary-1.json").exists());
    assert!(out_dir.join("torsion.pgm").exists());
}

#[test]
fn override_changes_config_hash() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    assert_eq!(bin().args(["torsion", "--h=0.125", "--out"]).arg(&a).status().unwrap().code(), Some(0));
    assert_eq!(bin().args(["torsion", "--h=0.25", "--out"]).arg(&b).status().unwrap().code(), Some(0));
    let ha = RunConfig::load_with_overrides(None, &[("h".into(), "0.125".into())]).unwrap().hash();
    let sa = fs::read_to_string(a.join("summary.json")).unwrap();
    let sb = fs::read_to_string(b.join("summary.json")).unwrap();
    assert!(sa.contains(&ha));
    assert!(!sb.contains(&ha));
}

#[test]
fn weight_certification_failure_exits_three() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), r#"{ "h": 0.0625, "potential": { "type": "constant", "value": -25.0 } }"#);
    let out_dir = tmp.path().join("o");
    let st = bin().args(["weight", "--config"]).arg(&cfg).arg("--out").arg(&out_dir).status().unwrap();
    assert_eq!(st.code(), Some(3));
    assert!(out_dir.join("summary.json").exists());
    assert!(out_dir.join("certificate_1.csv").exists());
}

#[test]
fn tightened_tolerance_fails_in_report_format() {
    let tmp = tempfile::tempdir().unwrap();
    let set = ConfigSet::load(&bundled_config_dir(), &[("tolerance_scale".into(), "1e-30".into())]).unwrap();
    let out = ArtifactDir::create(tmp.path()).unwrap();
    let (results, _) = run_criteria(&set, &out, &[3]).unwrap();
    assert!(!results[0].passed);
    assert!(results[0].line().contains("FAIL"));
    assert!(results[0].checks.iter().all(|c| c.tolerance < 1e-30));
}

#[test]
fn commands_run_on_small_grids() {
    let tmp = tempfile::tempdir().unwrap();
    let cases = [
        ("zeroset", r#"{ "domain": { "type": "disk", "center": [0, 0], "radius": 1 }, "h": 0.0625, "potential": { "type": "hardy_point", "center": [0, 0], "kappa": 1 } }"#),
        ("decompose", r#"{ "domain": { "type": "rectangle", "x0": 0, "x1": 1, "y0": 0, "y1": 1 }, "h": 0.03125, "potential": { "type": "brezis_marcus", "region": { "center": [0.5, 0.5], "radius": 0.25 } } }"#),
        ("green", r#"{ "h": 0.0625, "green": { "points": [[0.25, 0.25], [0.5, 0.75]] } }"#),
        ("eigen", r#"{ "h": 0.0625 }"#),
        ("poincare", r#"{ "h": 0.0625, "potential": { "type": "constant", "value": -3 } }"#),
        ("iterate", r#"{ "h": 0.0625, "potential": { "type": "constant", "value": -3 } }"#),
        ("kato", r#"{ "domain": { "type": "radial_ball", "dimension": 3, "radius": 1 }, "h": 0.01, "potential": { "type": "inverse_power_radial", "beta": 1 } }"#),
        ("oracle", r#"{ "oracle": { "scan_h": 0.001 } }"#),
        ("defect", r#"{ "domain": { "type": "disk", "center": [0, 0], "radius": 1 }, "potential": { "type": "inverse_power_axis", "alpha": 1.5 }, "defect": { "widths": [0.0625, 0.03125] } }"#),
    ];
    for (i, (cmd, text)) in cases.iter().enumerate() {
        let cfg = tmp.path().join(format!("{i}.json"));
        fs::write(&cfg, text).unwrap();
        let out = bin().arg(cmd).arg("--config").arg(&cfg).arg("--out").arg(tmp.path().join(cmd)).output().unwrap();
        assert_eq!(out.status.code(), Some(0), "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let dec: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("decompose/summary.json")).unwrap()).unwrap();
    assert_eq!(dec["results"]["decomposition"]["component_count"], 2);
}
