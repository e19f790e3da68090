// Ground-state transform identity and the agreement between a positive
// supersolution and nonnegativity of the quadratic form.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use torsionlab::grid::{build_grid, DomainSpec};
use torsionlab::potential::{evaluate, PotentialSpec, DEFAULT_CLIP};
use torsionlab::variational::{aap_check, ground_state_identity, torsion, SchroedingerOperator};

pub fn run_example() -> torsionlab::Result<()> {
    let grid = build_grid(&DomainSpec::unit_disk(), 1.0 / 16.0)?;
    let v = evaluate(&PotentialSpec::InversePowerAxis { alpha: 0.5 }, &grid, 3, DEFAULT_CLIP)?;
    let op = SchroedingerOperator::positive(&grid, &v)?;
    let u = torsion(&op, &grid)?.field;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let xi = grid.field((0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect())?;
    let rep = ground_state_identity(&op, &grid, &u, &xi)?;
    println!("form {:.10} = potential {:.10} + edges {:.10} (gap {:.2e})", rep.lhs, rep.potential_term, rep.edge_term, rep.relative_gap);

    for c in [-3.0, -8.0] {
        let signed = evaluate(&PotentialSpec::Constant { value: c }, &grid, 3, DEFAULT_CLIP)?;
        let aap = aap_check(&SchroedingerOperator::signed(&grid, &signed)?, &grid, 1)?;
        println!(
            "V = {c}: lambda1 = {:.4}  form nonnegative = {}  witness = {}  agree = {}",
            aap.lambda1, aap.form_nonnegative, aap.witness_certified, aap.agree
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("ground state example");
}
