// Poincaré weight for the signed Hardy potential on the three-dimensional
// ball, certified by the weighted smallest eigenvalue.

use torsionlab::decomposition::{detect_s, DEFAULT_THETA_REL};
use torsionlab::grid::{build_grid, DomainSpec};
use torsionlab::iteration::{build_weight, calibrate_q, SchemeOptions, WeightOptions};
use torsionlab::potential::{evaluate, PotentialSpec, DEFAULT_CLIP};
use torsionlab::variational::{torsion, SchroedingerOperator};

pub fn run_example() -> torsionlab::Result<()> {
    let grid = build_grid(&DomainSpec::radial_ball(3, 1.0), 0.01)?;
    let v = evaluate(&PotentialSpec::HardySigned { alpha: 0.6 }, &grid, 3, DEFAULT_CLIP)?;
    let zeta = torsion(&SchroedingerOperator::positive(&grid, &v)?, &grid)?.field;
    let dec = detect_s(&grid, &zeta, &v.hard, DEFAULT_THETA_REL)?;
    let q = calibrate_q(&grid, &v.positive_part(), 2.0, 3, 0)?;
    println!("Q(t) = (alpha - 1)/(C alpha) min(t^alpha, 1) with alpha = {}, C = {}", q.alpha, q.c);
    let options = WeightOptions { scheme: SchemeOptions { n_max: 100_000, ..SchemeOptions::default() }, ..WeightOptions::default() };
    let w = build_weight(&grid, &v, &grid.density(grid.constant(1.0))?, &dec, 1, &q, &options)?;
    println!(
        "weighted lambda1 = {:.9}  certified = {}  scheme steps = {}  min weight = {:.4}",
        w.certified_lambda,
        w.certified,
        w.scheme_iterations,
        w.weight.min()
    );
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("weight example");
}
