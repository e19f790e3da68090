//! Monotone truncation scheme, the comparison function `Q`, weighted
//! Poincaré weights and the component-restricted minimizer `θ`.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::decomposition::DecompositionResult;
use crate::error::{LabError, Result};
use crate::grid::{DiscreteMeasure, Grid, ScalarField};
use crate::potential::{truncate, SplitPotential};
use crate::variational::{rayleigh_lambda1, SchroedingerOperator};

/// `Q(t) = ((α - 1) / (C α)) min(t^α, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QFunction {
    pub alpha: f64,
    pub c: f64,
}

impl QFunction {
    pub fn new(alpha: f64, c: f64) -> Result<Self> {
        if !(alpha > 1.0) || !(c > 0.0) {
            return Err(LabError::InvalidArgument(format!("Q needs alpha > 1 and C > 0, got alpha = {alpha}, C = {c}")));
        }
        Ok(QFunction { alpha, c })
    }

    pub fn bound(&self) -> f64 {
        (self.alpha - 1.0) / (self.c * self.alpha)
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.bound() * t.max(0.0).powf(self.alpha).min(1.0)
    }

    pub fn apply(&self, u: &ScalarField) -> ScalarField {
        u.map(|t| self.eval(t))
    }
}

/// Stopping rule and optional comparison field for the monotone scheme.
#[derive(Debug, Clone)]
pub struct SchemeOptions {
    pub n_max: usize,
    /// Relative sup-increment at which the scheme stops.
    pub tol: f64,
    /// Nodewise violation budget relative to `sup u_n`.
    pub monotone_tol: f64,
    /// Field that must dominate every iterate.
    pub upper: Option<ScalarField>,
    /// Store `u_n` for `n` in this list (the final iterate is always kept).
    pub snapshots: Vec<usize>,
}

impl Default for SchemeOptions {
    fn default() -> Self {
        SchemeOptions { n_max: 200, tol: 1e-8, monotone_tol: 1e-12, upper: None, snapshots: Vec::new() }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StepRecord {
    pub n: usize,
    pub sup_u: f64,
    pub increment: f64,
    /// Most negative entry of `u_n - u_{n-1}` relative to `sup u_n` (0 if none).
    pub violation: f64,
    pub monotone_ok: bool,
}

/// Record of a monotone scheme run.
#[derive(Debug, Clone, Serialize)]
pub struct IterationTrace {
    pub steps: Vec<StepRecord>,
    pub converged: bool,
    /// Worst relative excess of `u_n` over the comparison field.
    pub upper_violation: Option<f64>,
    #[serde(skip)]
    pub field: ScalarField,
    #[serde(skip)]
    pub snapshots: Vec<(usize, ScalarField)>,
}

impl IterationTrace {
    pub fn csv(&self) -> String {
        let mut out = String::from("n,sup_u,increment,monotone_ok\n");
        for s in &self.steps {
            let _ = writeln!(out, "{},{:.12e},{:.12e},{}", s.n, s.sup_u, s.increment, s.monotone_ok);
        }
        out
    }

    pub fn iterations(&self) -> usize {
        self.steps.len()
    }
}

/// `(L + V+) u_n = T_n(μ) + T_n(V-) u_{n-1}` from `u_0 = 0`.
///
/// Each step solves for the increment `d_n = u_n - u_{n-1}`, whose load
/// `ΔT_n(μ) + ΔT_n(V-) u_{n-1} + T_{n-1}(V-) d_{n-1}` is nonnegative, so the
/// M-matrix inverse keeps `d_n >= 0` up to roundoff of the increment alone.
/// The run stops once both truncations are inactive and the
/// sup-increment drops below `tol * sup u_n`.
pub fn monotone_scheme(
    grid: &Grid,
    potential: &SplitPotential,
    mu: &DiscreteMeasure,
    options: &SchemeOptions,
) -> Result<IterationTrace> {
    if !mu.is_nonnegative() {
        return Err(LabError::Precondition("the monotone scheme needs a nonnegative datum".into()));
    }
    if let Some(up) = &options.upper {
        grid.check(up)?;
    }
    let op = SchroedingerOperator::positive(grid, potential)?;
    let quad = grid.quad_weights();
    let n = grid.len();
    let load = mu.load(grid)?;
    let density: Vec<f64> = (0..n).map(|k| if op.is_active(k) { load[k] / quad[k] } else { 0.0 }).collect();
    let vminus: Vec<f64> = (0..n).map(|k| if op.is_active(k) { potential.vminus.values[k] } else { 0.0 }).collect();
    let max_level = density.iter().chain(&vminus).fold(0.0f64, |a, &b| a.max(b));

    let mut u = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut steps = Vec::new();
    let mut snapshots = Vec::new();
    let mut converged = false;
    let mut upper_violation: Option<f64> = options.upper.as_ref().map(|_| 0.0);
    let mut b = vec![0.0; n];
    for step in 1..=options.n_max {
        let level = step as f64;
        let prev = level - 1.0;
        for k in 0..n {
            let dmu = truncate(density[k], level) - truncate(density[k], prev);
            let dv = truncate(vminus[k], level) - truncate(vminus[k], prev);
            b[k] = quad[k] * (dmu + dv * u[k] + truncate(vminus[k], prev) * d[k]);
        }
        let (inc, _, _) = op.solve_load(&b)?;
        d = inc;
        for k in 0..n {
            u[k] += d[k];
        }
        let sup_u = u.iter().fold(0.0f64, |a, &b| a.max(b));
        let scale = sup_u.max(f64::MIN_POSITIVE);
        let increment = d.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        let worst_d = d.iter().fold(0.0f64, |a, &b| a.min(b));
        let worst_u = u.iter().fold(0.0f64, |a, &b| a.min(b));
        let violation = (-worst_d.min(worst_u)).max(0.0) / scale;
        let monotone_ok = violation <= options.monotone_tol;
        steps.push(StepRecord { n: step, sup_u, increment, violation, monotone_ok });
        if !monotone_ok {
            return Err(LabError::MonotonicityViolated { step, violation });
        }
        if let (Some(up), Some(worst)) = (&options.upper, upper_violation.as_mut()) {
            let excess = u.iter().zip(&up.values).map(|(a, b)| a - b).fold(0.0f64, f64::max);
            *worst = worst.max(excess / up.sup_abs().max(f64::MIN_POSITIVE));
        }
        if options.snapshots.contains(&step) {
            snapshots.push((step, grid.field(u.clone())?));
        }
        if level >= max_level && increment <= options.tol * sup_u {
            converged = true;
            break;
        }
    }
    Ok(IterationTrace { steps, converged, upper_violation, field: grid.field(u)?, snapshots })
}

/// Probe solutions used to calibrate `Q`: `ζ1` and `count` random-density solutions.
pub fn probe_solutions(grid: &Grid, op: &SchroedingerOperator, count: usize, seed: u64) -> Result<Vec<ScalarField>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut probes = vec![crate::variational::torsion(op, grid)?.field];
    for _ in 0..count {
        let f = grid.field((0..grid.len()).map(|_| rng.gen_range(0.0..1.0)).collect())?;
        probes.push(crate::variational::minimize_energy(op, grid, &grid.density(f)?)?.field);
    }
    Ok(probes)
}

/// Worst relative violation of `u >= ζ_{Q(u)}` over `probes`.
pub fn q_inequality_gap(grid: &Grid, op: &SchroedingerOperator, q: &QFunction, probes: &[ScalarField]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for u in probes {
        let zq = crate::variational::minimize_energy(op, grid, &grid.density(q.apply(u))?)?.field;
        let scale = u.sup_abs().max(f64::MIN_POSITIVE);
        let excess = zq.values.iter().zip(&u.values).map(|(z, v)| z - v).fold(0.0f64, f64::max);
        worst = worst.max(excess / scale);
    }
    Ok(worst)
}

/// Tolerance for `u >= ζ_{Q(u)}` relative to `sup u`.
pub const Q_TOL: f64 = 1e-8;

/// Smallest `C = 2^k`, `k ∈ [-64, 64]`, with `u >= ζ_{Q(u)}` on every probe.
pub fn calibrate_q(grid: &Grid, potential: &SplitPotential, alpha: f64, probe_count: usize, seed: u64) -> Result<QFunction> {
    let op = SchroedingerOperator::positive(grid, potential)?;
    let probes = probe_solutions(grid, &op, probe_count, seed)?;
    let passes = |k: i32| -> Result<bool> {
        let q = QFunction::new(alpha, 2f64.powi(k))?;
        Ok(q_inequality_gap(grid, &op, &q, &probes)? <= Q_TOL)
    };
    let (mut lo, mut hi) = (-64, 64);
    if !passes(hi)? {
        return Err(LabError::CalibrationFailed);
    }
    if passes(lo)? {
        return QFunction::new(alpha, 2f64.powi(lo));
    }
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if passes(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    QFunction::new(alpha, 2f64.powi(hi))
}

#[derive(Debug, Clone)]
pub struct WeightOptions {
    pub w_cap: f64,
    pub scheme: SchemeOptions,
    pub certify_tol: f64,
}

impl Default for WeightOptions {
    fn default() -> Self {
        WeightOptions { w_cap: 1e6, scheme: SchemeOptions::default(), certify_tol: 1e-6 }
    }
}

/// Weight `w_i = min(Q(z_i) / max(ũ, ε_u), w_cap)` on `D_i` and its certification.
#[derive(Debug, Clone, Serialize)]
pub struct WeightResult {
    pub component: usize,
    pub alpha: f64,
    pub c: f64,
    pub certified_lambda: f64,
    pub certified: bool,
    pub scheme_converged: bool,
    pub scheme_iterations: usize,
    #[serde(skip)]
    pub z: ScalarField,
    #[serde(skip)]
    pub u_tilde: ScalarField,
    #[serde(skip)]
    pub weight: ScalarField,
    /// Direction of negative weighted energy when certification fails with `λ < 0`.
    #[serde(skip)]
    pub certificate: Option<ScalarField>,
}

pub fn build_weight(
    grid: &Grid,
    potential: &SplitPotential,
    mu: &DiscreteMeasure,
    dec: &DecompositionResult,
    id: usize,
    q: &QFunction,
    options: &WeightOptions,
) -> Result<WeightResult> {
    let mask = dec.component_mask(id)?;
    let local = mu.restrict(|k| mask[k]);
    if !local.is_nonnegative() {
        return Err(LabError::Precondition("the weight datum must be nonnegative".into()));
    }
    if local.total_variation(grid) <= 0.0 {
        return Err(LabError::Precondition(format!("the datum has no mass on component {id}")));
    }
    let op = SchroedingerOperator::positive(grid, potential)?;
    let z = crate::variational::minimize_energy(&op, grid, &local)?.field;
    let qz = q.apply(&z);
    let qz = qz.with_values(qz.values.iter().zip(&mask).map(|(&v, &m)| if m { v } else { 0.0 }).collect());
    let trace = monotone_scheme(grid, potential, &grid.density(qz.clone())?, &options.scheme)?;
    let u_tilde = trace.field.clone();
    let eps = 1e-12 * u_tilde.sup_abs();
    let weight = grid.field(
        (0..grid.len())
            .map(|k| if mask[k] { (qz.values[k] / u_tilde.values[k].max(eps)).min(options.w_cap) } else { 0.0 })
            .collect(),
    )?;
    let signed = SchroedingerOperator::signed(grid, potential)?;
    let positive_on_mask = (0..grid.len()).all(|k| !mask[k] || !signed.is_active(k) || weight.values[k] > 0.0);
    if !positive_on_mask {
        return Err(LabError::Precondition("weight vanishes on part of the component".into()));
    }
    let wfield = weight.with_values(weight.values.iter().map(|&w| if w > 0.0 { w } else { 1.0 }).collect());
    let spec = rayleigh_lambda1(&signed, grid, Some(&wfield), Some(&mask))?;
    let certified = spec.lambda1 >= 1.0 - options.certify_tol;
    let certificate = (spec.lambda1 < 0.0).then(|| spec.eigenfield.clone());
    Ok(WeightResult {
        component: id,
        alpha: q.alpha,
        c: q.c,
        certified_lambda: spec.lambda1,
        certified,
        scheme_converged: trace.converged,
        scheme_iterations: trace.iterations(),
        z,
        u_tilde,
        weight,
        certificate,
    })
}

/// Solve `(L + V)|_{D_i} θ = w h` on component `id`; zero elsewhere.
pub fn minimize_theta(
    grid: &Grid,
    potential: &SplitPotential,
    dec: &DecompositionResult,
    id: usize,
    weight: &ScalarField,
    datum: &ScalarField,
) -> Result<ScalarField> {
    grid.check(weight)?;
    grid.check(datum)?;
    let mask = dec.component_mask(id)?;
    let op = SchroedingerOperator::signed(grid, potential)?.restricted(grid, &mask)?;
    let quad = grid.quad_weights();
    let load: Vec<f64> = (0..grid.len()).map(|k| quad[k] * weight.values[k] * datum.values[k]).collect();
    let (theta, _, _) = op.solve_load(&load)?;
    grid.field(theta)
}

#[derive(Debug, Clone, Serialize)]
pub struct RigidityVerdict {
    pub component: usize,
    pub max_on_component: f64,
    pub scale: f64,
    pub holds: bool,
}

/// `u ≡ 0` on `D_i` up to `1e-8 sup |u|`.
pub fn supersolution_rigidity_check(dec: &DecompositionResult, id: usize, u: &ScalarField) -> Result<RigidityVerdict> {
    let mask = dec.component_mask(id)?;
    let max_on = u.values.iter().zip(&mask).filter(|(_, &m)| m).map(|(v, _)| v.abs()).fold(0.0, f64::max);
    let scale = u.sup_abs();
    Ok(RigidityVerdict { component: id, max_on_component: max_on, scale, holds: max_on <= 1e-8 * scale.max(f64::MIN_POSITIVE) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::components;
    use crate::grid::{build_grid, DomainSpec};
    use crate::potential::{evaluate, PotentialSpec, DEFAULT_CLIP};
    use crate::variational::torsion;

    #[test]
    fn q_function_shape() {
        let q = QFunction::new(2.0, 4.0).unwrap();
        assert_eq!(q.eval(0.0), 0.0);
        assert_eq!(q.bound(), 0.125);
        assert_eq!(q.eval(3.0), 0.125);
        assert!(q.eval(0.5) > 0.0 && q.eval(0.5) < q.eval(0.7));
        assert!(QFunction::new(1.0, 1.0).is_err());
    }

    #[test]
    fn scheme_without_negative_part_stops_at_torsion() {
        let g = build_grid(&DomainSpec::unit_square(), 1.0 / 16.0).unwrap();
        let v = SplitPotential::zero(&g);
        let trace = monotone_scheme(&g, &v, &g.density(g.constant(1.0)).unwrap(), &SchemeOptions::default()).unwrap();
        assert!(trace.converged);
        assert_eq!(trace.iterations(), 2);
        let z = torsion(&SchroedingerOperator::laplacian(&g).unwrap(), &g).unwrap().field;
        for (a, b) in trace.field.values.iter().zip(&z.values) {
            assert!((a - b).abs() <= 1e-14);
        }
    }

    #[test]
    fn scheme_with_zero_datum() {
        let g = build_grid(&DomainSpec::unit_square(), 1.0 / 8.0).unwrap();
        let v = SplitPotential::from_values(&g, &g.constant(-3.0), DEFAULT_CLIP).unwrap();
        let trace = monotone_scheme(&g, &v, &g.density(g.zeros()).unwrap(), &SchemeOptions::default()).unwrap();
        assert!(trace.field.values.iter().all(|&x| x == 0.0));
        assert!(trace.converged);
    }

    #[test]
    fn calibrated_q_satisfies_inequality() {
        let g = build_grid(&DomainSpec::unit_square(), 1.0 / 16.0).unwrap();
        let v = SplitPotential::zero(&g);
        let q = calibrate_q(&g, &v, 2.0, 3, 7).unwrap();
        let op = SchroedingerOperator::positive(&g, &v).unwrap();
        let probes = probe_solutions(&g, &op, 3, 7).unwrap();
        assert!(q_inequality_gap(&g, &op, &q, &probes).unwrap() <= Q_TOL);
        let doubled = QFunction::new(2.0, 2.0 * q.c).unwrap();
        assert!(q_inequality_gap(&g, &op, &doubled, &probes).unwrap() <= Q_TOL);
    }

    #[test]
    fn theta_matches_torsion_without_potential() {
        let g = build_grid(&DomainSpec::unit_square(), 1.0 / 16.0).unwrap();
        let v = SplitPotential::zero(&g);
        let dec = components(&g, &vec![false; g.len()]);
        let theta = minimize_theta(&g, &v, &dec, 1, &g.constant(1.0), &g.constant(1.0)).unwrap();
        let z = torsion(&SchroedingerOperator::laplacian(&g).unwrap(), &g).unwrap().field;
        for (a, b) in theta.values.iter().zip(&z.values) {
            assert!((a - b).abs() <= 1e-14);
        }
    }

    #[test]
    fn rigidity_on_decoupled_component() {
        let g = build_grid(&DomainSpec::unit_disk(), 1.0 / 16.0).unwrap();
        let v = evaluate(&PotentialSpec::InversePowerAxis { alpha: 1.5 }, &g, 3, DEFAULT_CLIP).unwrap();
        let op = SchroedingerOperator::positive(&g, &v).unwrap();
        let z = torsion(&op, &g).unwrap().field;
        let dec = crate::decomposition::detect_s(&g, &z, &v.hard, 1e-3).unwrap();
        let atom = g.nearest_node([0.5, 0.0]);
        let u = op.solve_measure(&g, &g.dirac(atom).unwrap()).unwrap().field;
        let other = if dec.component_of(atom) == Some(1) { 2 } else { 1 };
        let verdict = supersolution_rigidity_check(&dec, other, &u).unwrap();
        assert!(verdict.holds);
        assert_eq!(verdict.max_on_component, 0.0);
    }
}
