//! Zero set `S` of the torsion function, connected components of its
//! complement, per-component localization and the defect measure carried
//! by a one-cell-thick `S`.

use std::collections::VecDeque;
use std::fmt::Write as _;

use serde::Serialize;
use serde_json::json;

use crate::error::{LabError, Result};
use crate::grid::{build_grid, integrate, sphere_area, DiscreteMeasure, DomainSpec, Grid, ScalarField};
use crate::potential::{evaluate, PotentialSpec};
use crate::variational::{torsion, SchroedingerOperator};

/// Default relative threshold of the torsion tier.
pub const DEFAULT_THETA_REL: f64 = 1e-3;

/// `S` and the labeling of `Ω ∖ S`.
#[derive(Debug, Clone, Serialize)]
pub struct DecompositionResult {
    /// Membership in `S` (hard nodes and torsion-threshold nodes).
    pub s_mask: Vec<bool>,
    pub hard: Vec<bool>,
    pub threshold: f64,
    /// 0 on `S`, component id `1..=K` elsewhere.
    pub labels: Vec<usize>,
    pub component_count: usize,
    /// Node count of each component, indexed by `id - 1`.
    pub component_sizes: Vec<usize>,
}

impl DecompositionResult {
    pub fn s_size(&self) -> usize {
        self.s_mask.iter().filter(|&&s| s).count()
    }

    pub fn s_nodes(&self) -> Vec<usize> {
        self.s_mask.iter().enumerate().filter(|(_, &s)| s).map(|(k, _)| k).collect()
    }

    /// Node mask of component `id`.
    pub fn component_mask(&self, id: usize) -> Result<Vec<bool>> {
        self.check_id(id)?;
        Ok(self.labels.iter().map(|&l| l == id).collect())
    }

    fn check_id(&self, id: usize) -> Result<()> {
        if id == 0 || id > self.component_count {
            return Err(LabError::InvalidArgument(format!(
                "component id {id} out of range 1..={}",
                self.component_count
            )));
        }
        Ok(())
    }

    /// Component containing `node`, if it is not in `S`.
    pub fn component_of(&self, node: usize) -> Option<usize> {
        match self.labels.get(node) {
            Some(&l) if l > 0 => Some(l),
            _ => None,
        }
    }

    pub fn summary_json(&self) -> serde_json::Value {
        json!({
            "component_count": self.component_count,
            "component_sizes": self.component_sizes,
            "hard_count": self.hard.iter().filter(|&&h| h).count(),
            "s_size": self.s_size(),
            "threshold": self.threshold,
        })
    }

    /// Binary 16-bit PGM of the labels: planar grids as the lattice image
    /// (top row = largest y, off-domain pixels 0), radial grids as one row.
    pub fn label_pgm(&self, grid: &Grid) -> Vec<u8> {
        let (width, height, pixels) = match grid.lattice_shape() {
            Some((nx, ny)) => {
                let mut px = vec![0u16; nx * ny];
                for row in 0..ny {
                    let j = ny - 1 - row;
                    for i in 0..nx {
                        if let Some(k) = grid.node_at(i as isize, j as isize) {
                            px[row * nx + i] = self.labels[k].min(u16::MAX as usize) as u16;
                        }
                    }
                }
                (nx, ny, px)
            }
            None => (grid.len(), 1, self.labels.iter().map(|&l| l.min(u16::MAX as usize) as u16).collect()),
        };
        let mut out = format!("P5\n{width} {height}\n65535\n").into_bytes();
        for p in pixels {
            out.extend_from_slice(&p.to_be_bytes());
        }
        out
    }
}

/// `S = hard ∪ {ζ1 <= max(θ_rel max ζ^0, h^2/4)}` with its components.
///
/// `ζ^0` is the torsion function of the bare Laplacian on the same grid, so
/// the threshold does not depend on `V+` and `S` grows with `V+`.
pub fn detect_s(grid: &Grid, zeta: &ScalarField, hard: &[bool], theta_rel: f64) -> Result<DecompositionResult> {
    grid.check(zeta)?;
    if hard.len() != grid.len() {
        return Err(LabError::GridMismatch);
    }
    if !(theta_rel > 0.0 && theta_rel < 1.0) {
        return Err(LabError::InvalidArgument(format!("theta_rel must lie in (0, 1), got {theta_rel}")));
    }
    let h = grid.h();
    let free = torsion(&SchroedingerOperator::laplacian(grid)?, grid)?.field.max();
    let threshold = (theta_rel * free).max(h * h / 4.0);
    let s_mask: Vec<bool> = (0..grid.len()).map(|k| hard[k] || zeta.values[k] <= threshold).collect();
    if s_mask.iter().all(|&s| s) {
        return Err(LabError::EmptyComplement);
    }
    let mut dec = components(grid, &s_mask);
    dec.hard = hard.to_vec();
    dec.threshold = threshold;
    Ok(dec)
}

/// Flood-fill labeling of the node graph minus `s_mask`, smallest node index first.
pub fn components(grid: &Grid, s_mask: &[bool]) -> DecompositionResult {
    let n = grid.len();
    let mut labels = vec![0usize; n];
    let mut sizes = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..n {
        if s_mask[start] || labels[start] != 0 {
            continue;
        }
        let id = sizes.len() + 1;
        labels[start] = id;
        queue.push_back(start);
        let mut size = 0;
        while let Some(k) = queue.pop_front() {
            size += 1;
            for &(j, _) in grid.neighbours(k) {
                if !s_mask[j] && labels[j] == 0 {
                    labels[j] = id;
                    queue.push_back(j);
                }
            }
        }
        sizes.push(size);
    }
    DecompositionResult {
        s_mask: s_mask.to_vec(),
        hard: vec![false; n],
        threshold: 0.0,
        labels,
        component_count: sizes.len(),
        component_sizes: sizes,
    }
}

/// `u χ_{D_i}`.
pub fn cutoff(u: &ScalarField, dec: &DecompositionResult, id: usize) -> Result<ScalarField> {
    dec.check_id(id)?;
    if u.values.len() != dec.labels.len() {
        return Err(LabError::GridMismatch);
    }
    Ok(u.with_values(
        u.values.iter().zip(&dec.labels).map(|(&v, &l)| if l == id { v } else { 0.0 }).collect(),
    ))
}

/// Restriction of a datum to component `id`.
pub fn restrict_measure(nu: &DiscreteMeasure, dec: &DecompositionResult, id: usize) -> Result<DiscreteMeasure> {
    dec.check_id(id)?;
    Ok(nu.restrict(|k| dec.labels[k] == id))
}

/// Worst nodewise gap of `Σ_i u χ_{D_i} + u χ_S = u` (zero by construction).
pub fn reconstruction_gap(u: &ScalarField, dec: &DecompositionResult) -> Result<f64> {
    let mut sum: Vec<f64> = u.values.iter().zip(&dec.s_mask).map(|(&v, &s)| if s { v } else { 0.0 }).collect();
    for id in 1..=dec.component_count {
        let c = cutoff(u, dec, id)?;
        for (acc, v) in sum.iter_mut().zip(&c.values) {
            *acc += v;
        }
    }
    Ok(sum.iter().zip(&u.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
}

/// Outcome of the strong maximum principle test on one component.
#[derive(Debug, Clone, Serialize)]
pub struct MaxPrincipleVerdict {
    pub component: usize,
    /// `ν >= 0` on `D_i` and `∫_{D_i} u > 0`.
    pub applicable: bool,
    pub holds: bool,
    pub min_value: f64,
    pub argmin: usize,
}

pub fn strong_max_principle_check(
    grid: &Grid,
    u: &ScalarField,
    nu: &DiscreteMeasure,
    dec: &DecompositionResult,
    id: usize,
) -> Result<MaxPrincipleVerdict> {
    grid.check(u)?;
    let mask = dec.component_mask(id)?;
    let local = nu.restrict(|k| mask[k]);
    let mass = integrate(grid, &cutoff(u, dec, id)?)?;
    let applicable = local.is_nonnegative() && mass > 0.0;
    let (argmin, min_value) = (0..grid.len())
        .filter(|&k| mask[k])
        .map(|k| (k, u.values[k]))
        .fold((usize::MAX, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best });
    Ok(MaxPrincipleVerdict { component: id, applicable, holds: applicable && min_value > 0.0, min_value, argmin })
}

/// Defect measure carried by `S`.
#[derive(Debug, Clone, Serialize)]
pub struct DefectEstimate {
    pub tau_mass: f64,
    /// `(node, density)` along the interface.
    pub densities: Vec<(usize, f64)>,
    /// `(h, tau_mass)` over a refinement sequence.
    pub trace: Vec<(f64, f64)>,
}

impl DefectEstimate {
    pub fn is_empty(&self) -> bool {
        self.densities.is_empty()
    }

    pub fn trace_csv(&self) -> String {
        let mut out = String::from("h,tau_mass\n");
        for (h, t) in &self.trace {
            let _ = writeln!(out, "{h:.12e},{t:.12e}");
        }
        out
    }
}

/// Sum of the one-sided quotients `ζ1(s ± h e)/h` across the interface.
///
/// The interface is the hard part of `S` when present, otherwise all of
/// `S`. At each interface node the axis is one whose two neighbours lie
/// off the interface; the density is integrated along `S` with the
/// transverse cell measure.
pub fn defect_estimate(grid: &Grid, zeta: &ScalarField, dec: &DecompositionResult) -> Result<DefectEstimate> {
    grid.check(zeta)?;
    let interface: Vec<bool> = if dec.hard.iter().any(|&h| h) { dec.hard.clone() } else { dec.s_mask.clone() };
    let nodes: Vec<usize> = (0..grid.len()).filter(|&k| interface[k]).collect();
    if nodes.is_empty() {
        return Ok(DefectEstimate { tau_mass: 0.0, densities: Vec::new(), trace: Vec::new() });
    }
    let h = grid.h();
    let off = |k: Option<usize>| k.map(|k| !interface[k]);
    let mut densities = Vec::new();
    let mut tau = 0.0;
    for &s in &nodes {
        let pairs: Vec<(Option<usize>, Option<usize>)> = match grid.lattice_index(s) {
            Some([i, j]) => {
                let (i, j) = (i as isize, j as isize);
                vec![
                    (grid.node_at(i - 1, j), grid.node_at(i + 1, j)),
                    (grid.node_at(i, j - 1), grid.node_at(i, j + 1)),
                ]
            }
            None => vec![((s > 0).then(|| s - 1), (s + 1 < grid.len()).then_some(s + 1))],
        };
        for (a, b) in pairs {
            if off(a) == Some(true) && off(b) == Some(true) {
                let (a, b) = (a.unwrap(), b.unwrap());
                let density = (zeta.values[a] + zeta.values[b]) / h;
                let measure = if grid.is_radial() {
                    sphere_area(grid.dimension()) * grid.radius_of(s).powi(grid.dimension() as i32 - 1)
                } else {
                    h
                };
                densities.push((s, density));
                tau += density * measure;
                break;
            }
        }
    }
    if 2 * densities.len() < nodes.len() {
        return Err(LabError::NotInterface);
    }
    Ok(DefectEstimate { tau_mass: tau, densities, trace: Vec::new() })
}

/// Defect estimate at each mesh width, datum 1; the trace lists `(h, tau_mass)`.
pub fn defect_refinement(
    domain: &DomainSpec,
    potential: &PotentialSpec,
    widths: &[f64],
    subsamples: usize,
    clip: f64,
    theta_rel: f64,
) -> Result<DefectEstimate> {
    let mut last = None;
    let mut trace = Vec::new();
    for &h in widths {
        let grid = build_grid(domain, h)?;
        let v = evaluate(potential, &grid, subsamples, clip)?;
        let op = SchroedingerOperator::positive(&grid, &v)?;
        let zeta = torsion(&op, &grid)?.field;
        let dec = detect_s(&grid, &zeta, &v.hard, theta_rel)?;
        let est = defect_estimate(&grid, &zeta, &dec)?;
        trace.push((h, est.tau_mass));
        last = Some(est);
    }
    let mut est = last.ok_or_else(|| LabError::InvalidArgument("empty refinement sequence".into()))?;
    est.trace = trace;
    Ok(est)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Disk;
    use crate::potential::DEFAULT_CLIP;

    fn decompose(domain: DomainSpec, h: f64, p: &PotentialSpec) -> (Grid, ScalarField, DecompositionResult) {
        let g = build_grid(&domain, h).unwrap();
        let v = evaluate(p, &g, 3, DEFAULT_CLIP).unwrap();
        let op = SchroedingerOperator::positive(&g, &v).unwrap();
        let z = torsion(&op, &g).unwrap().field;
        let d = detect_s(&g, &z, &v.hard, DEFAULT_THETA_REL).unwrap();
        (g, z, d)
    }

    #[test]
    fn free_square_has_empty_s() {
        let (_, _, d) = decompose(DomainSpec::unit_square(), 1.0 / 32.0, &PotentialSpec::zero());
        assert_eq!(d.s_size(), 0);
        assert_eq!(d.component_count, 1);
    }

    #[test]
    fn axis_barrier_splits_disk() {
        let (g, z, d) = decompose(DomainSpec::unit_disk(), 1.0 / 32.0, &PotentialSpec::InversePowerAxis { alpha: 1.5 });
        assert_eq!(d.component_count, 2);
        let left = d.component_of(g.nearest_node([-0.5, 0.0])).unwrap();
        let right = d.component_of(g.nearest_node([0.5, 0.0])).unwrap();
        assert_ne!(left, right);
        assert_eq!(reconstruction_gap(&z, &d).unwrap(), 0.0);
        let est = defect_estimate(&g, &z, &d).unwrap();
        assert!(est.tau_mass > 0.0);
    }

    #[test]
    fn brezis_marcus_components() {
        let omega = Disk::new([0.5, 0.5], 0.25);
        let (g, _, d) = decompose(DomainSpec::unit_square(), 1.0 / 32.0, &PotentialSpec::BrezisMarcus { region: omega });
        assert_eq!(d.component_count, 2);
        assert!(d.component_of(g.nearest_node([0.5, 0.5])).is_some());
    }

    #[test]
    fn labels_and_pgm() {
        let g = build_grid(&DomainSpec::unit_square(), 0.25).unwrap();
        let mut s = vec![false; g.len()];
        // middle column splits the 3x3 lattice
        for k in 0..g.len() {
            s[k] = g.lattice_index(k).unwrap()[0] == 1;
        }
        let d = components(&g, &s);
        assert_eq!(d.component_count, 2);
        assert_eq!(d.component_sizes, vec![3, 3]);
        assert_eq!(d.labels[0], 1);
        let pgm = d.label_pgm(&g);
        assert!(pgm.starts_with(b"P5\n3 3\n65535\n"));
        assert_eq!(pgm.len(), 13 + 18);
        assert!(cutoff(&g.constant(1.0), &d, 3).is_err());
    }

    #[test]
    fn empty_s_has_empty_defect() {
        let (g, z, d) = decompose(DomainSpec::unit_square(), 1.0 / 16.0, &PotentialSpec::zero());
        assert!(defect_estimate(&g, &z, &d).unwrap().is_empty());
    }
}
