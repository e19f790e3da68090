// Smallest eigenvalue of the Dirichlet Laplacian on the unit square against `2π^2`.

use torsionlab::grid::{build_grid, DomainSpec};
use torsionlab::variational::{rayleigh_lambda1, SchroedingerOperator};

pub fn run_example() -> torsionlab::Result<()> {
    let exact = 2.0 * std::f64::consts::PI.powi(2);
    for h in [1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0] {
        let grid = build_grid(&DomainSpec::unit_square(), h)?;
        let spec = rayleigh_lambda1(&SchroedingerOperator::laplacian(&grid)?, &grid, None, None)?;
        println!(
            "h = {h:.5}  lambda1 = {:.6}  relative error = {:.3e}  probes = {}",
            spec.lambda1,
            (spec.lambda1 - exact).abs() / exact,
            spec.probes
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("eigen example");
}
