// JSON run configuration with dotted overrides, executed through the
// command layer into an artifact directory.

use torsionlab::app::run_command;
use torsionlab::config::RunConfig;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let text = r#"{
        "domain": { "type": "disk", "center": [0.0, 0.0], "radius": 1.0 },
        "h": 0.0625,
        "potential": { "type": "inverse_power_axis", "alpha": 1.5 }
    }"#;
    let mut cfg = RunConfig::from_json(text)?;
    println!("config hash {}", cfg.hash());
    cfg = RunConfig::from_value(serde_json::to_value(&cfg)?)?;

    let out = tempfile::tempdir()?;
    let outcome = run_command("zeroset", &cfg, out.path())?;
    println!("zeroset components: {}", outcome.summary["results"]["component_count"]);
    let outcome = run_command("decompose", &cfg, out.path())?;
    println!("decompose localization gap: {}", outcome.summary["results"]["localization_gap"]);
    let mut files: Vec<String> = std::fs::read_dir(out.path())?.map(|e| Ok(e?.file_name().to_string_lossy().into_owned())).collect::<std::io::Result<_>>()?;
    files.sort();
    println!("artifacts: {files:?}");
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("config example");
}
