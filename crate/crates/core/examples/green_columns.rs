// Green columns of `-Δ + V` with a Hardy point potential: symmetry and `∫ G_x = ζ1(x)`.

use torsionlab::grid::{build_grid, integrate, DomainSpec};
use torsionlab::potential::{evaluate, PotentialSpec, DEFAULT_CLIP};
use torsionlab::variational::{green_column, torsion, SchroedingerOperator};

pub fn run_example() -> torsionlab::Result<()> {
    let grid = build_grid(&DomainSpec::unit_square(), 1.0 / 32.0)?;
    let v = evaluate(&PotentialSpec::HardyPoint { center: [0.5, 0.5], kappa: 0.5 }, &grid, 3, DEFAULT_CLIP)?;
    let op = SchroedingerOperator::positive(&grid, &v)?;
    let zeta = torsion(&op, &grid)?.field;
    let nodes: Vec<usize> = [[0.25, 0.25], [0.75, 0.5], [0.4, 0.8]].iter().map(|&p| grid.nearest_node(p)).collect();
    let cols = nodes.iter().map(|&x| Ok(green_column(&op, &grid, x)?.field)).collect::<torsionlab::Result<Vec<_>>>()?;
    for (i, &x) in nodes.iter().enumerate() {
        println!("G_{x}: integral {:.8} vs torsion {:.8}", integrate(&grid, &cols[i])?, zeta.values[x]);
        for (j, &y) in nodes.iter().enumerate().skip(i + 1) {
            println!("  G_{x}({y}) = {:.10}  G_{y}({x}) = {:.10}", cols[i].values[y], cols[j].values[x]);
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("green example");
}
