use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use torsionlab::decomposition::{components, detect_s, DEFAULT_THETA_REL};
use torsionlab::grid::{build_grid, gradient_energy, DomainSpec, Grid, ScalarField};
use torsionlab::iteration::{self, monotone_scheme, SchemeOptions, WeightOptions};
use torsionlab::potential::{evaluate, kato_eta, truncate_plus, PotentialSpec, DEFAULT_CLIP};
use torsionlab::variational::{self, rayleigh_lambda1, SchroedingerOperator};

fn domain(kind: u8) -> DomainSpec {
    match kind % 3 {
        0 => DomainSpec::unit_square(),
        1 => DomainSpec::unit_disk(),
        _ => DomainSpec::radial_ball(3, 1.0),
    }
}

fn width(kind: u8, level: u8) -> f64 {
    if kind % 3 == 2 {
        1.0 / (20.0 * (1 + level % 3) as f64)
    } else {
        1.0 / (8.0 * (1 + level % 3) as f64)
    }
}

fn random_field(grid: &Grid, seed: u64, lo: f64, hi: f64) -> ScalarField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    grid.field((0..grid.len()).map(|_| rng.gen_range(lo..hi)).collect()).unwrap()
}

fn barrier(kind: u8, pick: u8) -> PotentialSpec {
    if kind % 3 == 2 {
        return PotentialSpec::InversePowerRadial { beta: 1.0 + (pick % 3) as f64 * 0.5 };
    }
    let c = if kind % 3 == 0 { [0.5, 0.5] } else { [0.0, 0.0] };
    match pick % 3 {
        0 => PotentialSpec::HardyPoint { center: c, kappa: 1.0 },
        1 => PotentialSpec::InversePowerAxis { alpha: 1.5 },
        _ => PotentialSpec::Constant { value: 2.0 },
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn laplacian_is_m_matrix(kind in 0u8..3, level in 0u8..3) {
        let g = build_grid(&domain(kind), width(kind, level)).unwrap();
        prop_assert!(g.m_matrix_report().is_m_matrix());
    }

    #[test]
    fn gradient_energy_is_quadratic_form(kind in 0u8..3, seed in any::<u64>()) {
        let g = build_grid(&domain(kind), width(kind, 0)).unwrap();
        let xi = random_field(&g, seed, -1.0, 1.0);
        let lx = g.apply_laplacian(&xi.values);
        let form: f64 = lx.iter().zip(&xi.values).map(|(a, b)| a * b).sum();
        let e = gradient_energy(&g, &xi).unwrap();
        prop_assert!((e - form).abs() <= 1e-12 * e.abs().max(1.0));
    }

    #[test]
    fn splitting_is_disjoint(kind in 0u8..2, pick in 0u8..3, shift in -5.0f64..5.0) {
        let g = build_grid(&domain(kind), 1.0 / 16.0).unwrap();
        let spec = barrier(kind, pick).plus(PotentialSpec::Constant { value: shift });
        let v = evaluate(&spec, &g, 3, DEFAULT_CLIP).unwrap();
        for k in 0..g.len() {
            prop_assert!(v.vplus.values[k] >= 0.0 && v.vminus.values[k] >= 0.0);
            prop_assert_eq!(v.vplus.values[k] * v.vminus.values[k], 0.0);
        }
    }

    #[test]
    fn truncation_is_monotone(seed in any::<u64>(), n in 0.0f64..10.0) {
        let g = build_grid(&DomainSpec::unit_square(), 0.125).unwrap();
        let f = random_field(&g, seed, 0.0, 20.0);
        let a = truncate_plus(&f, n);
        let b = truncate_plus(&f, n + 1.0);
        for k in 0..g.len() {
            prop_assert!(a.values[k] <= b.values[k] && b.values[k] <= f.values[k]);
        }
    }

    #[test]
    fn kato_eta_monotone_in_delta(beta in 0.5f64..2.5, d in 0.05f64..0.3) {
        let g = build_grid(&DomainSpec::radial_ball(3, 1.0), 0.01).unwrap();
        let v = evaluate(&PotentialSpec::InversePowerRadial { beta }, &g, 3, DEFAULT_CLIP).unwrap();
        let small = kato_eta(&v, &g, d, 3, 3).unwrap();
        let large = kato_eta(&v, &g, 1.5 * d, 3, 3).unwrap();
        prop_assert!(small <= large * (1.0 + 1e-12));
    }

    #[test]
    fn maximum_principle_and_comparison(kind in 0u8..3, pick in 0u8..3, seed in any::<u64>()) {
        let g = build_grid(&domain(kind), width(kind, 0)).unwrap();
        let v = evaluate(&barrier(kind, pick), &g, 3, DEFAULT_CLIP).unwrap();
        let op = SchroedingerOperator::positive(&g, &v).unwrap();
        let f = random_field(&g, seed, 0.0, 1.0);
        let extra = random_field(&g, seed ^ 1, 0.0, 1.0);
        let gf = f.zip_map(&extra, |a, b| a + b).unwrap();
        let zf = variational::minimize_energy(&op, &g, &g.density(f).unwrap()).unwrap().field;
        let zg = variational::minimize_energy(&op, &g, &g.density(gf).unwrap()).unwrap().field;
        let tol = 1e-10 * zg.sup_abs();
        for k in 0..g.len() {
            prop_assert!(zf.values[k] >= -tol);
            prop_assert!(zf.values[k] <= zg.values[k] + tol);
        }
    }

    #[test]
    fn zero_set_grows_with_potential(kind in 0u8..2, pick in 0u8..3, extra in 0.0f64..500.0) {
        let g = build_grid(&domain(kind), 1.0 / 16.0).unwrap();
        let base = barrier(kind, pick);
        let big = base.clone().plus(PotentialSpec::Constant { value: extra });
        let s = |spec: &PotentialSpec| {
            let v = evaluate(spec, &g, 3, DEFAULT_CLIP).unwrap();
            let z = variational::torsion(&SchroedingerOperator::positive(&g, &v).unwrap(), &g).unwrap().field;
            detect_s(&g, &z, &v.hard, DEFAULT_THETA_REL).map(|d| d.s_mask)
        };
        let small_s = s(&base).unwrap();
        if let Ok(big_s) = s(&big) {
            for k in 0..g.len() {
                prop_assert!(!small_s[k] || big_s[k]);
            }
        }
    }

    #[test]
    fn decomposition_partitions_nodes(kind in 0u8..2, pick in 0u8..3) {
        let g = build_grid(&domain(kind), 1.0 / 16.0).unwrap();
        let v = evaluate(&barrier(kind, pick), &g, 3, DEFAULT_CLIP).unwrap();
        let op = SchroedingerOperator::positive(&g, &v).unwrap();
        let z = variational::torsion(&op, &g).unwrap().field;
        let dec = detect_s(&g, &z, &v.hard, DEFAULT_THETA_REL).unwrap();
        let mut covered = dec.s_mask.iter().map(|&s| usize::from(s)).collect::<Vec<_>>();
        for id in 1..=dec.component_count {
            for (c, m) in covered.iter_mut().zip(dec.component_mask(id).unwrap()) {
                *c += usize::from(m);
            }
        }
        prop_assert!(covered.iter().all(|&c| c == 1));
        // solutions vanish on hard nodes and sit below the threshold elsewhere on S
        for k in 0..g.len() {
            if dec.hard[k] {
                prop_assert_eq!(z.values[k], 0.0);
            } else if dec.s_mask[k] {
                prop_assert!(z.values[k] <= dec.threshold);
            }
        }
    }

    #[test]
    fn ground_state_identity_random(kind in 0u8..3, pick in 0u8..3, seed in any::<u64>()) {
        let g = build_grid(&domain(kind), width(kind, 1)).unwrap();
        let v = evaluate(&barrier(kind, pick), &g, 3, DEFAULT_CLIP).unwrap();
        let op = SchroedingerOperator::positive(&g, &v).unwrap();
        let u = variational::minimize_energy(&op, &g, &g.density(random_field(&g, seed, 0.1, 1.0)).unwrap()).unwrap().field;
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 7);
        let xi = g.field((0..g.len()).map(|k| if op.is_active(k) { rng.gen_range(-1.0..1.0) } else { 0.0 }).collect()).unwrap();
        let rep = variational::ground_state_identity(&op, &g, &u, &xi).unwrap();
        prop_assert!(rep.relative_gap <= 1e-10);
    }

    #[test]
    fn lambda1_invariant_under_mirroring(x in 0.2f64..0.8, y in 0.2f64..0.8, kappa in 0.1f64..3.0) {
        // mirroring x -> 1 - x permutes the node ordering of the lattice
        let g = build_grid(&DomainSpec::unit_square(), 1.0 / 16.0).unwrap();
        let lam = |cx: f64| {
            let v = evaluate(&PotentialSpec::HardyPoint { center: [cx, y], kappa }, &g, 3, DEFAULT_CLIP).unwrap();
            let op = SchroedingerOperator::signed(&g, &v).unwrap();
            let sizes = {
                let mut s = components(&g, &v.hard).component_sizes;
                s.sort();
                s
            };
            (rayleigh_lambda1(&op, &g, None, None).unwrap().lambda1, sizes)
        };
        let (a, sa) = lam(x);
        let (b, sb) = lam(1.0 - x);
        prop_assert!((a - b).abs() <= 1e-3 * a.abs());
        prop_assert_eq!(sa, sb);
    }

    #[test]
    fn monotone_scheme_is_monotone(c in 0.0f64..5.0, seed in any::<u64>()) {
        let g = build_grid(&DomainSpec::unit_disk(), 1.0 / 16.0).unwrap();
        let v = evaluate(&PotentialSpec::Constant { value: -c }, &g, 3, DEFAULT_CLIP).unwrap();
        let mu = g.density(random_field(&g, seed, 0.0, 3.0)).unwrap();
        let theta = SchroedingerOperator::signed(&g, &v).unwrap().solve_measure(&g, &mu).unwrap().field;
        let options = SchemeOptions { n_max: 5000, upper: Some(theta), ..SchemeOptions::default() };
        let trace = monotone_scheme(&g, &v, &mu, &options).unwrap();
        prop_assert!(trace.converged);
        prop_assert!(trace.steps.iter().all(|s| s.violation <= 1e-12));
        prop_assert!(trace.upper_violation.unwrap() <= 1e-8);
    }
}

#[test]
fn certified_weight_gives_form_inequality() {
    let g = build_grid(&DomainSpec::radial_ball(3, 1.0), 0.01).unwrap();
    let v = evaluate(&PotentialSpec::HardySigned { alpha: 0.6 }, &g, 3, DEFAULT_CLIP).unwrap();
    let z = variational::torsion(&SchroedingerOperator::positive(&g, &v).unwrap(), &g).unwrap().field;
    let dec = detect_s(&g, &z, &v.hard, DEFAULT_THETA_REL).unwrap();
    let q = iteration::calibrate_q(&g, &v.positive_part(), 2.0, 3, 0).unwrap();
    let options = WeightOptions { scheme: SchemeOptions { n_max: 100_000, ..SchemeOptions::default() }, ..WeightOptions::default() };
    let w = iteration::build_weight(&g, &v, &g.density(g.constant(1.0)).unwrap(), &dec, 1, &q, &options).unwrap();
    assert!(w.certified, "lambda {}", w.certified_lambda);

    let mask = dec.component_mask(1).unwrap();
    let qz = q.apply(&w.z);
    let eps = 1e-12 * w.u_tilde.sup_abs();
    for k in (0..g.len()).filter(|&k| mask[k]) {
        assert!(w.weight.values[k] > 0.0);
        if w.u_tilde.values[k] > eps {
            assert!(w.weight.values[k] * w.u_tilde.values[k] <= qz.values[k] * (1.0 + 1e-12));
        }
    }

    let op = SchroedingerOperator::signed(&g, &v).unwrap();
    let quad = g.quad_weights();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let xi: Vec<f64> = (0..g.len()).map(|k| if mask[k] { rng.gen_range(-1.0..1.0) } else { 0.0 }).collect();
        let form = op.energy(&xi);
        let weighted: f64 = (0..g.len()).map(|k| quad[k] * w.weight.values[k] * xi[k] * xi[k]).sum();
        assert!(form >= weighted * (1.0 - 1e-6), "{form} < {weighted}");
    }
    let unweighted = rayleigh_lambda1(&op, &g, None, Some(&mask)).unwrap();
    assert!(unweighted.lambda1 >= -1e-8);
}
