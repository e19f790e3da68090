// Defect mass carried by the hyperplane `{x1 = 0}` for `|x1|^{-α}` on the
// unit disk, with the one-dimensional slab model alongside.

use torsionlab::decomposition::{defect_refinement, DEFAULT_THETA_REL};
use torsionlab::grid::DomainSpec;
use torsionlab::oracle::slab_defect;
use torsionlab::potential::{PotentialSpec, DEFAULT_CLIP};

pub fn run_example() -> torsionlab::Result<()> {
    let widths = [1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0];
    for alpha in [1.5, 2.5] {
        let est = defect_refinement(
            &DomainSpec::unit_disk(),
            &PotentialSpec::InversePowerAxis { alpha },
            &widths,
            3,
            DEFAULT_CLIP,
            DEFAULT_THETA_REL,
        )?;
        println!("alpha = {alpha}");
        for &(h, tau) in &est.trace {
            println!("  h = {h:.5}  tau = {tau:.5e}  slab tau = {:.5e}", slab_defect(alpha, h)?.tau);
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("defect example");
}
