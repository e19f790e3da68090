// Run individual acceptance criteria from the bundled config set.

use torsionlab::export::ArtifactDir;
use torsionlab::verify::{bundled_config_dir, run_criteria, ConfigSet};

pub fn run_example() -> torsionlab::Result<()> {
    let set = ConfigSet::load(&bundled_config_dir(), &[])?;
    let tmp = tempfile::tempdir()?;
    let (results, _) = run_criteria(&set, &ArtifactDir::create(tmp.path())?, &[2, 3, 11])?;
    for r in &results {
        println!("{}", r.line());
        for c in &r.checks {
            println!("    {:<28} {:.3e}  expected {}", c.name, c.value, c.expected);
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("acceptance example");
}
