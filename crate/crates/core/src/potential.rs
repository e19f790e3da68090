//! Catalog of singular potentials, their cell-averaged evaluation on a grid,
//! the split `V = V+ - V-`, truncations and the Kato modulus estimator.
//!
//! Each node value is the mean of `V` over an `m x m` (planar) or `m`
//! (radial, `r^{N-1}`-weighted) subdivision of the node's cell. A sub-cell
//! that meets the singular set of the potential contributes the exact local
//! mean when the singularity is integrable across it and `+inf` otherwise;
//! `+inf` in the positive part saturates the clip and tags the node hard.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::grid::{dist, sphere_area, Disk, Grid, ScalarField};

/// Default clip applied to cell averages.
pub const DEFAULT_CLIP: f64 = 1e12;
/// Default number of subsamples per axis.
pub const DEFAULT_SUBSAMPLES: usize = 3;

/// Symbolic potential family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    /// `kappa / |x - a|^2`.
    HardyPoint { center: [f64; 2], kappa: f64 },
    /// `1 / |x_1|^alpha`.
    InversePowerAxis { alpha: f64 },
    /// `1 / d(x, ∂ω)^2`.
    DistBoundarySq { region: Disk },
    /// `1 / d(x, ω)^2`, infinite on the closed disk.
    DistSetSq { region: Disk },
    /// `-alpha (N - 2 - alpha) / (|x|^2 (1 - |x|^alpha))` on a radial ball.
    HardySigned { alpha: f64 },
    /// `(χ_{Ω∖ω} - χ_ω) / (4 d(x, ∂ω)^2)`.
    BrezisMarcus { region: Disk },
    /// `1 / |x|^beta`.
    InversePowerRadial { beta: f64 },
    Constant { value: f64 },
    Sum { first: Box<PotentialSpec>, second: Box<PotentialSpec> },
}

impl PotentialSpec {
    pub fn name(&self) -> &'static str {
        match self {
            PotentialSpec::HardyPoint { .. } => "hardy_point",
            PotentialSpec::InversePowerAxis { .. } => "inverse_power_axis",
            PotentialSpec::DistBoundarySq { .. } => "dist_boundary_sq",
            PotentialSpec::DistSetSq { .. } => "dist_set_sq",
            PotentialSpec::HardySigned { .. } => "hardy_signed",
            PotentialSpec::BrezisMarcus { .. } => "brezis_marcus",
            PotentialSpec::InversePowerRadial { .. } => "inverse_power_radial",
            PotentialSpec::Constant { .. } => "constant",
            PotentialSpec::Sum { .. } => "sum",
        }
    }

    pub fn zero() -> Self {
        PotentialSpec::Constant { value: 0.0 }
    }

    pub fn plus(self, other: PotentialSpec) -> Self {
        PotentialSpec::Sum { first: Box::new(self), second: Box::new(other) }
    }

    fn validate(&self, grid: &Grid) -> Result<()> {
        let mismatch = |reason: &str| {
            Err(LabError::ModeMismatch { potential: self.name(), reason: reason.to_string() })
        };
        let bad = |reason: String| Err(LabError::InvalidArgument(reason));
        let radial = grid.is_radial();
        match self {
            PotentialSpec::HardyPoint { center, kappa } => {
                if *kappa < 0.0 {
                    return bad(format!("hardy_point needs kappa >= 0, got {kappa}"));
                }
                if radial && (center[0] != 0.0 || center[1] != 0.0) {
                    return mismatch("on a radial grid the singular point must be the origin");
                }
            }
            PotentialSpec::InversePowerAxis { alpha } => {
                if *alpha < 0.0 {
                    return bad(format!("inverse_power_axis needs alpha >= 0, got {alpha}"));
                }
                if radial {
                    return mismatch("requires a planar grid");
                }
            }
            PotentialSpec::DistBoundarySq { region }
            | PotentialSpec::DistSetSq { region }
            | PotentialSpec::BrezisMarcus { region } => {
                if !(region.radius > 0.0) {
                    return bad("region radius must be positive".into());
                }
                if radial {
                    return mismatch("requires a planar grid");
                }
            }
            PotentialSpec::HardySigned { alpha } => {
                if !radial {
                    return mismatch("requires a radial ball grid");
                }
                let n = grid.dimension() as f64;
                if !(*alpha > 0.0 && *alpha < n - 2.0) {
                    return bad(format!("hardy_signed needs 0 < alpha < N - 2, got alpha = {alpha}, N = {n}"));
                }
            }
            PotentialSpec::InversePowerRadial { beta } => {
                if *beta < 0.0 {
                    return bad(format!("inverse_power_radial needs beta >= 0, got {beta}"));
                }
            }
            PotentialSpec::Constant { value } => {
                if !value.is_finite() {
                    return bad("constant potential must be finite".into());
                }
            }
            PotentialSpec::Sum { first, second } => {
                first.validate(grid)?;
                second.validate(grid)?;
            }
        }
        Ok(())
    }

    /// Mean over the closed planar box `[lo, hi]` (exact near the singular set).
    fn planar_part(&self, lo: [f64; 2], hi: [f64; 2]) -> Part {
        let p = [(lo[0] + hi[0]) / 2.0, (lo[1] + hi[1]) / 2.0];
        match self {
            PotentialSpec::Constant { value } => Part::value(*value),
            PotentialSpec::HardyPoint { center, kappa } => {
                if *kappa == 0.0 {
                    Part::value(0.0)
                } else if box_contains(lo, hi, *center) {
                    Part::POS_INF
                } else {
                    Part::value(kappa / dist(p, *center).powi(2))
                }
            }
            PotentialSpec::InversePowerAxis { alpha } => {
                if *alpha == 0.0 {
                    Part::value(1.0)
                } else if lo[0] <= 0.0 && 0.0 <= hi[0] {
                    if *alpha >= 1.0 {
                        Part::POS_INF
                    } else {
                        let e = 1.0 - alpha;
                        Part::value((lo[0].abs().powf(e) + hi[0].abs().powf(e)) / (e * (hi[0] - lo[0])))
                    }
                } else {
                    Part::value(p[0].abs().powf(-alpha))
                }
            }
            PotentialSpec::DistBoundarySq { region } => {
                if region.box_meets_boundary(lo, hi) {
                    Part::POS_INF
                } else {
                    Part::value(region.boundary_distance(p).powi(-2))
                }
            }
            PotentialSpec::DistSetSq { region } => {
                if region.box_meets_disk(lo, hi) {
                    Part::POS_INF
                } else {
                    Part::value(region.set_distance(p).powi(-2))
                }
            }
            PotentialSpec::BrezisMarcus { region } => {
                if region.box_meets_boundary(lo, hi) {
                    Part { pos: f64::INFINITY, neg: f64::INFINITY }
                } else {
                    let v = 0.25 * region.boundary_distance(p).powi(-2);
                    if region.contains(p) {
                        Part { pos: 0.0, neg: v }
                    } else {
                        Part { pos: v, neg: 0.0 }
                    }
                }
            }
            PotentialSpec::InversePowerRadial { beta } => {
                if *beta == 0.0 {
                    Part::value(1.0)
                } else if box_contains(lo, hi, [0.0, 0.0]) {
                    if *beta < 2.0 {
                        // mean over the disk of equal area
                        let rho = ((hi[0] - lo[0]) * (hi[1] - lo[1]) / PI).sqrt();
                        Part::value(2.0 * rho.powf(-beta) / (2.0 - beta))
                    } else {
                        Part::POS_INF
                    }
                } else {
                    Part::value(dist(p, [0.0, 0.0]).powf(-beta))
                }
            }
            PotentialSpec::HardySigned { .. } => unreachable!("validated: radial only"),
            PotentialSpec::Sum { first, second } => first.planar_part(lo, hi).add(second.planar_part(lo, hi)),
        }
    }

    /// Pointwise value at radius `r` of a radial potential in dimension `n`.
    fn radial_part(&self, r: f64, n: usize) -> Part {
        match self {
            PotentialSpec::Constant { value } => Part::value(*value),
            PotentialSpec::HardyPoint { kappa, .. } => Part::value(kappa / (r * r)),
            PotentialSpec::InversePowerRadial { beta } => Part::value(r.powf(-beta)),
            PotentialSpec::HardySigned { alpha } => {
                if r >= 1.0 {
                    Part { pos: 0.0, neg: f64::INFINITY }
                } else {
                    Part::value(hardy_signed_value(*alpha, n, r))
                }
            }
            PotentialSpec::Sum { first, second } => first.radial_part(r, n).add(second.radial_part(r, n)),
            _ => unreachable!("validated: planar only"),
        }
    }
}

/// `-alpha (N - 2 - alpha) / (r^2 (1 - r^alpha))`.
pub fn hardy_signed_value(alpha: f64, n: usize, r: f64) -> f64 {
    -alpha * (n as f64 - 2.0 - alpha) / (r * r * (1.0 - r.powf(alpha)))
}

fn box_contains(lo: [f64; 2], hi: [f64; 2], p: [f64; 2]) -> bool {
    lo[0] <= p[0] && p[0] <= hi[0] && lo[1] <= p[1] && p[1] <= hi[1]
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Part {
    pos: f64,
    neg: f64,
}

impl Part {
    const POS_INF: Part = Part { pos: f64::INFINITY, neg: 0.0 };

    fn value(v: f64) -> Part {
        if v >= 0.0 {
            Part { pos: v, neg: 0.0 }
        } else {
            Part { pos: 0.0, neg: -v }
        }
    }

    fn add(self, other: Part) -> Part {
        Part { pos: self.pos + other.pos, neg: self.neg + other.neg }
    }
}

/// Nodewise positive and negative parts of a clipped potential.
#[derive(Debug, Clone)]
pub struct SplitPotential {
    pub vplus: ScalarField,
    pub vminus: ScalarField,
    /// Nodes whose cell average of `V+` reached the clip.
    pub hard: Vec<bool>,
    pub clip: f64,
}

impl SplitPotential {
    /// A potential with no hard nodes built from nodal values.
    pub fn from_values(grid: &Grid, values: &ScalarField, clip: f64) -> Result<Self> {
        grid.check(values)?;
        let v: Vec<f64> = values.values.iter().map(|v| v.clamp(-clip, clip)).collect();
        Ok(SplitPotential {
            vplus: values.with_values(v.iter().map(|v| v.max(0.0)).collect()),
            vminus: values.with_values(v.iter().map(|v| (-v).max(0.0)).collect()),
            hard: vec![false; grid.len()],
            clip,
        })
    }

    pub fn zero(grid: &Grid) -> Self {
        SplitPotential {
            vplus: grid.zeros(),
            vminus: grid.zeros(),
            hard: vec![false; grid.len()],
            clip: DEFAULT_CLIP,
        }
    }

    /// `V+ - V-`.
    pub fn signed(&self) -> ScalarField {
        self.vplus.zip_map(&self.vminus, |p, m| p - m).expect("same grid")
    }

    /// `|V| = V+ + V-`.
    pub fn magnitude(&self) -> ScalarField {
        self.vplus.zip_map(&self.vminus, |p, m| p + m).expect("same grid")
    }

    pub fn hard_nodes(&self) -> Vec<usize> {
        self.hard.iter().enumerate().filter(|(_, &h)| h).map(|(k, _)| k).collect()
    }

    pub fn hard_count(&self) -> usize {
        self.hard.iter().filter(|&&h| h).count()
    }

    /// Same potential with `V-` replaced by zero.
    pub fn positive_part(&self) -> SplitPotential {
        SplitPotential { vminus: self.vminus.map(|_| 0.0), ..self.clone() }
    }

    /// Same potential with `V-` scaled by `factor`.
    pub fn scale_negative(&self, factor: f64) -> SplitPotential {
        SplitPotential { vminus: self.vminus.map(|v| v * factor), ..self.clone() }
    }
}

/// Cell-averaged, clipped evaluation of `spec` on `grid`.
pub fn evaluate(spec: &PotentialSpec, grid: &Grid, subsamples: usize, clip: f64) -> Result<SplitPotential> {
    if subsamples == 0 || subsamples % 2 == 0 {
        return Err(LabError::InvalidArgument(format!("subsamples must be odd and >= 1, got {subsamples}")));
    }
    if !(clip > 0.0) {
        return Err(LabError::InvalidArgument(format!("clip must be positive, got {clip}")));
    }
    spec.validate(grid)?;
    let h = grid.h();
    let m = subsamples;
    let sub = h / m as f64;
    let n = grid.len();
    let mut vplus = vec![0.0; n];
    let mut vminus = vec![0.0; n];
    let mut hard = vec![false; n];
    for k in 0..n {
        let c = grid.coord(k);
        let mut saturated = false;
        let mut sum = 0.0;
        let mut weight_sum = 0.0;
        if grid.is_radial() {
            let dim = grid.dimension();
            for q in 0..m {
                let r = c[0] - h / 2.0 + (q as f64 + 0.5) * sub;
                let w = r.powi(dim as i32 - 1);
                let part = spec.radial_part(r, dim);
                saturated |= part.pos == f64::INFINITY;
                sum += w * (part.pos - part.neg);
                weight_sum += w;
            }
        } else {
            for a in 0..m {
                for b in 0..m {
                    let lo = [c[0] - h / 2.0 + a as f64 * sub, c[1] - h / 2.0 + b as f64 * sub];
                    let hi = [lo[0] + sub, lo[1] + sub];
                    let part = spec.planar_part(lo, hi);
                    if part.pos == f64::INFINITY {
                        saturated = true;
                    } else {
                        sum += part.pos - part.neg;
                    }
                    weight_sum += 1.0;
                }
            }
        }
        let mean = sum / weight_sum;
        if saturated || mean >= clip {
            hard[k] = true;
            vplus[k] = clip;
        } else {
            let v = mean.clamp(-clip, clip);
            vplus[k] = v.max(0.0);
            vminus[k] = (-v).max(0.0);
        }
    }
    Ok(SplitPotential {
        vplus: grid.field(vplus)?,
        vminus: grid.field(vminus)?,
        hard,
        clip,
    })
}

/// `min(f, n)` for a nonnegative field.
pub fn truncate_plus(f: &ScalarField, n: f64) -> ScalarField {
    f.map(|v| v.min(n))
}

/// `T_k(s) = min(max(s, -k), k)`.
pub fn truncate_signed(f: &ScalarField, k: f64) -> ScalarField {
    f.map(|v| truncate(v, k))
}

pub fn truncate(v: f64, k: f64) -> f64 {
    v.max(-k).min(k)
}

/// Kato modulus `eta(delta)` of the evaluated potential.
///
/// Planar grids use the kernel `log(2 delta / |x - y|)`; radial grids use
/// `|x - y|^{2-N}` integrated exactly over spherical shells and also
/// evaluate the origin. The supremum runs over all grid nodes.
pub fn kato_eta(potential: &SplitPotential, grid: &Grid, delta: f64, dimension: usize, subsamples: usize) -> Result<f64> {
    let h = grid.h();
    if !(delta >= h) {
        return Err(LabError::UnresolvedRadius { delta, h });
    }
    if dimension != grid.dimension() {
        return Err(LabError::InvalidArgument(format!(
            "Kato kernel dimension {dimension} does not match grid dimension {}",
            grid.dimension()
        )));
    }
    let m = subsamples.max(1);
    let magnitude = potential.magnitude();
    let vabs = &magnitude.values;
    if grid.is_radial() {
        let mut points: Vec<f64> = vec![0.0];
        points.extend(grid.coords().iter().map(|c| c[0]));
        let sphere = sphere_area(dimension);
        let eta = points
            .par_iter()
            .map(|&r| {
                let mut acc = 0.0;
                for (k, c) in grid.coords().iter().enumerate() {
                    let s = c[0];
                    if (s - r).abs() > delta + h || vabs[k] == 0.0 {
                        continue;
                    }
                    let sub = h / m as f64;
                    let mut cell = 0.0;
                    for q in 0..m {
                        let sq = s - h / 2.0 + (q as f64 + 0.5) * sub;
                        cell += shell_kernel(r, sq, delta, dimension, sphere) * sub;
                    }
                    acc += vabs[k] * cell;
                }
                acc
            })
            .collect::<Vec<_>>();
        Ok(eta.into_iter().fold(0.0, f64::max))
    } else {
        let area = h * h;
        let sub = h / m as f64;
        let reach = (delta / h).ceil() as isize + 1;
        let eta = (0..grid.len())
            .into_par_iter()
            .map(|x| {
                let [i, j] = grid.lattice_index(x).expect("planar");
                let cx = grid.coord(x);
                let mut acc = 0.0;
                for di in -reach..=reach {
                    for dj in -reach..=reach {
                        let Some(y) = grid.node_at(i as isize + di, j as isize + dj) else { continue };
                        if vabs[y] == 0.0 {
                            continue;
                        }
                        if y == x {
                            // self cell: m x m subsamples, the central one integrated exactly
                            let mut cell = 0.0;
                            for a in 0..m {
                                for b in 0..m {
                                    let off = [
                                        -h / 2.0 + (a as f64 + 0.5) * sub,
                                        -h / 2.0 + (b as f64 + 0.5) * sub,
                                    ];
                                    let r = (off[0] * off[0] + off[1] * off[1]).sqrt();
                                    if r < 1e-14 * h {
                                        let rho = sub / PI.sqrt();
                                        cell += PI * rho * rho * ((2.0 * delta / rho).ln() + 0.5);
                                    } else if r < delta {
                                        cell += (2.0 * delta / r).ln() * sub * sub;
                                    }
                                }
                            }
                            acc += vabs[y] * cell;
                        } else {
                            let r = dist(cx, grid.coord(y));
                            if r < delta {
                                acc += vabs[y] * (2.0 * delta / r).ln() * area;
                            }
                        }
                    }
                }
                acc
            })
            .collect::<Vec<_>>();
        Ok(eta.into_iter().fold(0.0, f64::max))
    }
}

/// `∫_{|y| = s, |x - y| < delta} k(|x - y|) dσ(y)` with `|x| = r`, where
/// `k(t) = t^{2-N}` (N >= 3) or `log(2 delta / t)` (N = 2).
pub(crate) fn shell_kernel(r: f64, s: f64, delta: f64, n: usize, sphere: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    if r == 0.0 {
        if s >= delta {
            return 0.0;
        }
        return sphere * s.powi(n as i32 - 1) * if n == 2 { (2.0 * delta / s).ln() } else { s.powi(2 - n as i32) };
    }
    if (r - s).abs() >= delta {
        return 0.0;
    }
    if n == 3 {
        // t dt = r s sinθ dθ turns the shell integral of 1/t into 2π s dt / r
        return 2.0 * PI * s * ((r + s).min(delta) - (r - s).abs()) / r;
    }
    // θ_max where |x - y| = delta
    let cos_max = ((r * r + s * s - delta * delta) / (2.0 * r * s)).clamp(-1.0, 1.0);
    let theta_max = cos_max.acos();
    let integrand = |theta: f64| {
        let t2 = r * r + s * s - 2.0 * r * s * theta.cos();
        let t = t2.max(0.0).sqrt();
        let k = if n == 2 { (2.0 * delta / t).ln() } else { t.powi(2 - n as i32) };
        theta.sin().powi(n as i32 - 2) * k
    };
    // geometric refinement toward θ = 0 where the kernel peaks
    let mut total = 0.0;
    let mut hi = theta_max;
    for _ in 0..30 {
        let lo = hi * 0.5;
        total += gauss_legendre(&integrand, lo, hi);
        hi = lo;
    }
    total += gauss_legendre(&integrand, 0.0, hi);
    // S^0 is two points: the circle integral is 2 ∫_0^θmax
    let lower_sphere = if n == 2 { 2.0 } else { sphere_area(n - 1) };
    lower_sphere * s.powi(n as i32 - 1) * total
}

fn gauss_legendre(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    const X: [f64; 4] = [0.183_434_642_495_649_8, 0.525_532_409_916_329, 0.796_666_477_413_626_7, 0.960_289_856_497_536_3];
    const W: [f64; 4] = [0.362_683_783_378_362, 0.313_706_645_877_887_3, 0.222_381_034_453_374_5, 0.101_228_536_290_376_3];
    let mid = (a + b) / 2.0;
    let half = (b - a) / 2.0;
    let mut s = 0.0;
    for i in 0..4 {
        s += W[i] * (f(mid + half * X[i]) + f(mid - half * X[i]));
    }
    s * half
}

/// Table of `eta(delta)` over a decreasing sweep with a vanishing verdict.
#[derive(Debug, Clone, Serialize)]
pub struct KatoReport {
    pub rows: Vec<(f64, f64)>,
    pub fraction: f64,
    pub vanishing: bool,
}

impl KatoReport {
    pub fn csv(&self) -> String {
        let mut out = String::from("delta,eta\n");
        for (d, e) in &self.rows {
            let _ = writeln!(out, "{d:.12e},{e:.12e}");
        }
        out
    }
}

pub fn kato_report(
    potential: &SplitPotential,
    grid: &Grid,
    deltas: &[f64],
    dimension: usize,
    subsamples: usize,
    fraction: f64,
) -> Result<KatoReport> {
    if deltas.is_empty() {
        return Err(LabError::InvalidArgument("empty delta sequence".into()));
    }
    if deltas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(LabError::InvalidArgument("delta sequence must be decreasing".into()));
    }
    if let Some(&d) = deltas.iter().find(|&&d| d < 2.0 * grid.h()) {
        return Err(LabError::UnresolvedRadius { delta: d, h: 2.0 * grid.h() });
    }
    let rows = deltas
        .iter()
        .map(|&d| Ok((d, kato_eta(potential, grid, d, dimension, subsamples)?)))
        .collect::<Result<Vec<_>>>()?;
    let first = rows[0].1;
    let last = rows[rows.len() - 1].1;
    Ok(KatoReport { vanishing: last < fraction * first, rows, fraction })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, DomainSpec};

    #[test]
    fn constant_has_no_hard_nodes() {
        let g = build_grid(&DomainSpec::unit_square(), 1.0 / 8.0).unwrap();
        let v = evaluate(&PotentialSpec::Constant { value: 5.0 }, &g, 3, DEFAULT_CLIP).unwrap();
        assert!(v.vplus.values.iter().all(|&x| x == 5.0));
        assert!(v.vminus.values.iter().all(|&x| x == 0.0));
        assert_eq!(v.hard_count(), 0);
    }

    #[test]
    fn axis_power_dichotomy() {
        let g = build_grid(&DomainSpec::unit_disk(), 1.0 / 16.0).unwrap();
        let strong = evaluate(&PotentialSpec::InversePowerAxis { alpha: 1.5 }, &g, 3, DEFAULT_CLIP).unwrap();
        let hard = strong.hard_nodes();
        assert!(!hard.is_empty());
        assert!(hard.iter().all(|&k| g.coord(k)[0].abs() < 1e-12));
        let column = (0..g.len()).filter(|&k| g.coord(k)[0].abs() < 1e-12).count();
        assert_eq!(hard.len(), column);
        let weak = evaluate(&PotentialSpec::InversePowerAxis { alpha: 0.5 }, &g, 3, DEFAULT_CLIP).unwrap();
        assert_eq!(weak.hard_count(), 0);
        // exact mean of |t|^{-1/2} over [-h/6, h/6]
        let k = g.nearest_node([0.0, 0.0]);
        assert!(weak.vplus.values[k].is_finite() && weak.vplus.values[k] > 0.0);
    }

    #[test]
    fn split_is_consistent() {
        let g = build_grid(&DomainSpec::unit_square(), 1.0 / 16.0).unwrap();
        let omega = Disk::new([0.5, 0.5], 0.25);
        let v = evaluate(&PotentialSpec::BrezisMarcus { region: omega }, &g, 3, DEFAULT_CLIP).unwrap();
        for k in 0..g.len() {
            assert_eq!(v.vplus.values[k] * v.vminus.values[k], 0.0);
            assert!(v.vplus.values[k] >= 0.0 && v.vminus.values[k] >= 0.0);
            if v.hard[k] {
                assert_eq!(v.vplus.values[k], v.clip);
            }
        }
        assert!(v.hard_count() > 0);
        assert!(v.vminus.values.iter().any(|&x| x > 0.0));
    }

    #[test]
    fn mode_mismatch() {
        let g = build_grid(&DomainSpec::unit_square(), 1.0 / 8.0).unwrap();
        let err = evaluate(&PotentialSpec::HardySigned { alpha: 0.5 }, &g, 3, DEFAULT_CLIP).unwrap_err();
        assert!(matches!(err, LabError::ModeMismatch { .. }));
        let r = build_grid(&DomainSpec::radial_ball(3, 1.0), 0.01).unwrap();
        assert!(evaluate(&PotentialSpec::HardySigned { alpha: 1.5 }, &r, 3, DEFAULT_CLIP).is_err());
        assert!(evaluate(&PotentialSpec::InversePowerAxis { alpha: 1.0 }, &r, 3, DEFAULT_CLIP).is_err());
        assert!(evaluate(&PotentialSpec::Constant { value: 1.0 }, &r, 2, DEFAULT_CLIP).is_err());
    }

    #[test]
    fn truncations() {
        let g = build_grid(&DomainSpec::unit_square(), 0.25).unwrap();
        assert!(truncate_plus(&g.constant(5.0), 3.0).values.iter().all(|&v| v == 3.0));
        assert!(truncate_plus(&g.constant(5.0), 7.0).values.iter().all(|&v| v == 5.0));
        assert_eq!(truncate(-5.0, 2.0), -2.0);
        assert!(truncate_signed(&g.constant(-5.0), 2.0).values.iter().all(|&v| v == -2.0));
    }

    #[test]
    fn shell_kernel_matches_quadrature_in_three_dimensions() {
        // the closed form for N = 3 against the generic angular quadrature
        let sphere = sphere_area(3);
        for &(r, s, d) in &[(0.3, 0.35, 0.2), (0.3, 0.3, 0.1), (0.5, 0.2, 0.4)] {
            let closed = shell_kernel(r, s, d, 3, sphere);
            let cos_max = ((r * r + s * s - d * d) / (2.0 * r * s)).clamp(-1.0, 1.0);
            let theta_max = cos_max.acos();
            let steps = 200_000;
            let mut num = 0.0;
            for q in 0..steps {
                let th = (q as f64 + 0.5) * theta_max / steps as f64;
                let t = (r * r + s * s - 2.0 * r * s * th.cos()).sqrt();
                num += th.sin() / t * theta_max / steps as f64;
            }
            num *= 2.0 * PI * s * s;
            assert!((closed - num).abs() < 1e-4 * closed, "{closed} vs {num}");
        }
    }
}
