// Closed-form Hardy family: radial residual order and the critical truncation scan.

use torsionlab::oracle::{critical_dirichlet_growth, radial_residual, truncation_energy_scan, HardyFamily};

pub fn run_example() -> torsionlab::Result<()> {
    let fam = HardyFamily::new(5, 2.5, 1.5)?;
    for r in [0.1, 0.5, 0.9] {
        println!("r = {r}: u = {:.6}  V = {:.6}  f = {:.6}", fam.u(r)?, fam.v(r)?, fam.f(r)?);
    }
    let widths = [1.0 / 200.0, 1.0 / 400.0, 1.0 / 800.0];
    let res = widths.iter().map(|&h| radial_residual(5, 2.5, 1.5, h)).collect::<torsionlab::Result<Vec<_>>>()?;
    for (h, r) in widths.iter().zip(&res) {
        println!("h = {h:.5}  residual = {r:.4e}");
    }
    println!("halving ratios: {:.3} {:.3}", res[0] / res[1], res[1] / res[2]);

    for row in truncation_energy_scan(4, 1.0, &[10.0, 100.0, 1000.0], 1e-4)? {
        println!(
            "k = {:6}  dirichlet = {:8.3} (log law {:8.3})  energy = {:.4}",
            row.k,
            row.dirichlet,
            critical_dirichlet_growth(4, row.k),
            row.energy
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("hardy family example");
}
