// Zero sets of the torsion function for barrier potentials on the unit disk.

use torsionlab::decomposition::{detect_s, DEFAULT_THETA_REL};
use torsionlab::grid::{build_grid, Disk, DomainSpec};
use torsionlab::potential::{evaluate, PotentialSpec, DEFAULT_CLIP};
use torsionlab::variational::{torsion, SchroedingerOperator};

pub fn run_example() -> torsionlab::Result<()> {
    let grid = build_grid(&DomainSpec::unit_disk(), 1.0 / 32.0)?;
    let omega = Disk::new([0.0, 0.0], 0.5);
    let catalog = [
        PotentialSpec::HardyPoint { center: [0.0, 0.0], kappa: 1.0 },
        PotentialSpec::DistBoundarySq { region: omega },
        PotentialSpec::DistSetSq { region: omega },
        PotentialSpec::InversePowerAxis { alpha: 1.5 },
        PotentialSpec::InversePowerAxis { alpha: 0.5 },
    ];
    for spec in &catalog {
        let v = evaluate(spec, &grid, 3, DEFAULT_CLIP)?;
        let zeta = torsion(&SchroedingerOperator::positive(&grid, &v)?, &grid)?.field;
        let dec = detect_s(&grid, &zeta, &v.hard, DEFAULT_THETA_REL)?;
        println!(
            "{:<20} hard = {:4}  |S| = {:4}  components = {}",
            spec.name(),
            v.hard_count(),
            dec.s_size(),
            dec.component_count
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("zero set example");
}
