// Monotone truncation scheme for a signed potential, converging from below
// to the direct minimizer.

use torsionlab::grid::{build_grid, DomainSpec};
use torsionlab::iteration::{monotone_scheme, SchemeOptions};
use torsionlab::potential::{evaluate, PotentialSpec, DEFAULT_CLIP};
use torsionlab::variational::SchroedingerOperator;

pub fn run_example() -> torsionlab::Result<()> {
    let grid = build_grid(&DomainSpec::unit_disk(), 1.0 / 32.0)?;
    let spec = PotentialSpec::HardyPoint { center: [0.3, 0.0], kappa: 1.0 }.plus(PotentialSpec::Constant { value: -4.0 });
    let v = evaluate(&spec, &grid, 3, DEFAULT_CLIP)?;
    let mu = grid.density(grid.constant(1.0))?;
    let theta = SchroedingerOperator::signed(&grid, &v)?.solve_measure(&grid, &mu)?.field;
    let options = SchemeOptions { n_max: 1000, tol: 1e-10, upper: Some(theta.clone()), ..SchemeOptions::default() };
    let trace = monotone_scheme(&grid, &v, &mu, &options)?;
    for s in trace.steps.iter().take(6) {
        println!("n = {:3}  sup u = {:.8}  increment = {:.3e}", s.n, s.sup_u, s.increment);
    }
    let gap = trace.field.values.iter().zip(&theta.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    println!(
        "converged = {} after {} steps, |u - theta| = {gap:.3e}, worst excess over theta = {:.3e}",
        trace.converged,
        trace.iterations(),
        trace.upper_violation.unwrap_or(0.0)
    );
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("monotone scheme example");
}
