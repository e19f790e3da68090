// Torsion function of the plain Laplacian on the unit disk against `(1 - |x|^2)/4`.

use torsionlab::grid::{build_grid, integrate, DomainSpec};
use torsionlab::oracle::torsion_exact;
use torsionlab::variational::{torsion, SchroedingerOperator};

pub fn run_example() -> torsionlab::Result<()> {
    let domain = DomainSpec::unit_disk();
    for h in [1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0] {
        let grid = build_grid(&domain, h)?;
        let zeta = torsion(&SchroedingerOperator::laplacian(&grid)?, &grid)?.field;
        let mut err: f64 = 0.0;
        for (k, &p) in grid.coords().iter().enumerate() {
            err = err.max((zeta.values[k] - torsion_exact(&domain, p)?).abs());
        }
        println!("h = {h:.5}  nodes = {:5}  max error = {err:.3e}  integral = {:.6}", grid.len(), integrate(&grid, &zeta)?);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("torsion example");
}
