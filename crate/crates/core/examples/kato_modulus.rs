// Kato modulus `η(δ)` of radial power potentials in three dimensions.

use torsionlab::grid::{build_grid, DomainSpec};
use torsionlab::potential::{evaluate, kato_report, PotentialSpec, DEFAULT_CLIP};

pub fn run_example() -> torsionlab::Result<()> {
    let grid = build_grid(&DomainSpec::radial_ball(3, 1.0), 0.002)?;
    for beta in [1.0, 2.0] {
        let v = evaluate(&PotentialSpec::InversePowerRadial { beta }, &grid, 3, DEFAULT_CLIP)?;
        let rep = kato_report(&v, &grid, &[0.2, 0.1, 0.05, 0.025], 3, 3, 0.2)?;
        println!("beta = {beta}: vanishing = {}", rep.vanishing);
        print!("{}", rep.csv());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("kato example");
}
