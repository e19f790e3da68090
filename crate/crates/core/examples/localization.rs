// Brezis–Marcus barrier: two components, and solving with a datum
// restricted to one component equals cutting off the global solution.

use torsionlab::decomposition::{components, cutoff, reconstruction_gap, restrict_measure};
use torsionlab::grid::{build_grid, Disk, DomainSpec};
use torsionlab::potential::{evaluate, PotentialSpec, DEFAULT_CLIP};
use torsionlab::variational::SchroedingerOperator;

pub fn run_example() -> torsionlab::Result<()> {
    let grid = build_grid(&DomainSpec::unit_square(), 1.0 / 32.0)?;
    let omega = Disk::new([0.5, 0.5], 0.3);
    let v = evaluate(&PotentialSpec::BrezisMarcus { region: omega }, &grid, 3, DEFAULT_CLIP)?;
    let op = SchroedingerOperator::positive(&grid, &v)?;
    let dec = components(&grid, &v.hard);
    println!("components: {} with sizes {:?}", dec.component_count, dec.component_sizes);

    let nu = grid.density(grid.from_fn(|p| 1.0 + p[0]))?.with_atom(grid.nearest_node([0.5, 0.5]), 0.1);
    let u = op.solve_measure(&grid, &nu)?.field;
    for id in 1..=dec.component_count {
        let local = op.solve_measure(&grid, &restrict_measure(&nu, &dec, id)?)?.field;
        let cut = cutoff(&u, &dec, id)?;
        let gap = local.values.iter().zip(&cut.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        println!("component {id}: localization gap {gap:.3e}");
    }
    println!("reconstruction gap {:.3e}", reconstruction_gap(&u, &dec)?);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("localization example");
}
