//! Discrete domains and the Dirichlet Laplacian.
//!
//! Planar domains live on a square lattice of width `h`; nodes outside the
//! mask are dropped and their couplings become links to the zero extension.
//! Radial domains discretize `-(r^{N-1} u')' / r^{N-1}` on the nodes
//! `r_j = j h`, `j = 1..R/h-1`.
//!
//! The assembled operator is stored in stiffness form: for a field `x`,
//! `x^T L x = sum_e s_e (x_a - x_b)^2 + sum_j b_j x_j^2` where every edge
//! carries `s_e = coef * measure > 0`. `L` is therefore a symmetric M-matrix.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{LabError, Result};

/// A closed disk in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Disk {
    pub center: [f64; 2],
    pub radius: f64,
}

impl Disk {
    pub fn new(center: [f64; 2], radius: f64) -> Self {
        Disk { center, radius }
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        dist(p, self.center) < self.radius
    }

    /// Distance from `p` to the circle bounding the disk.
    pub fn boundary_distance(&self, p: [f64; 2]) -> f64 {
        (dist(p, self.center) - self.radius).abs()
    }

    /// Distance from `p` to the closed disk.
    pub fn set_distance(&self, p: [f64; 2]) -> f64 {
        (dist(p, self.center) - self.radius).max(0.0)
    }

    /// Smallest and largest distance from the center to a closed box.
    pub(crate) fn box_center_distances(&self, lo: [f64; 2], hi: [f64; 2]) -> (f64, f64) {
        let c = self.center;
        let nx = c[0].clamp(lo[0], hi[0]);
        let ny = c[1].clamp(lo[1], hi[1]);
        let near = dist([nx, ny], c);
        let fx = if (c[0] - lo[0]).abs() > (c[0] - hi[0]).abs() { lo[0] } else { hi[0] };
        let fy = if (c[1] - lo[1]).abs() > (c[1] - hi[1]).abs() { lo[1] } else { hi[1] };
        (near, dist([fx, fy], c))
    }

    /// Whether the closed box meets the bounding circle.
    pub(crate) fn box_meets_boundary(&self, lo: [f64; 2], hi: [f64; 2]) -> bool {
        let (near, far) = self.box_center_distances(lo, hi);
        near <= self.radius && self.radius <= far
    }

    /// Whether the closed box meets the closed disk.
    pub(crate) fn box_meets_disk(&self, lo: [f64; 2], hi: [f64; 2]) -> bool {
        self.box_center_distances(lo, hi).0 <= self.radius
    }
}

pub(crate) fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Closure applied at the origin of a radial grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OriginClosure {
    /// No flux through `r = h/2`; the regular closure.
    #[default]
    ZeroFlux,
    /// Ghost value `u(0) = 0`; used when the origin carries a singularity.
    Dirichlet,
}

/// Description of a discrete domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainSpec {
    Rectangle {
        x0: f64,
        x1: f64,
        y0: f64,
        y1: f64,
        #[serde(default)]
        inner_region: Option<Disk>,
    },
    Disk {
        center: [f64; 2],
        radius: f64,
        #[serde(default)]
        inner_region: Option<Disk>,
    },
    RadialBall {
        dimension: usize,
        radius: f64,
        #[serde(default)]
        origin: OriginClosure,
    },
}

impl DomainSpec {
    pub fn unit_square() -> Self {
        DomainSpec::Rectangle { x0: 0.0, x1: 1.0, y0: 0.0, y1: 1.0, inner_region: None }
    }

    pub fn unit_disk() -> Self {
        DomainSpec::Disk { center: [0.0, 0.0], radius: 1.0, inner_region: None }
    }

    pub fn radial_ball(dimension: usize, radius: f64) -> Self {
        DomainSpec::RadialBall { dimension, radius, origin: OriginClosure::ZeroFlux }
    }

    pub fn inner_region(&self) -> Option<Disk> {
        match self {
            DomainSpec::Rectangle { inner_region, .. } | DomainSpec::Disk { inner_region, .. } => {
                *inner_region
            }
            DomainSpec::RadialBall { .. } => None,
        }
    }

    pub fn with_inner_region(self, disk: Disk) -> Self {
        match self {
            DomainSpec::Rectangle { x0, x1, y0, y1, .. } => {
                DomainSpec::Rectangle { x0, x1, y0, y1, inner_region: Some(disk) }
            }
            DomainSpec::Disk { center, radius, .. } => {
                DomainSpec::Disk { center, radius, inner_region: Some(disk) }
            }
            radial => radial,
        }
    }

    pub fn is_radial(&self) -> bool {
        matches!(self, DomainSpec::RadialBall { .. })
    }

    /// Spatial dimension of the continuum domain.
    pub fn dimension(&self) -> usize {
        match self {
            DomainSpec::RadialBall { dimension, .. } => *dimension,
            _ => 2,
        }
    }

    /// Lebesgue measure of the continuum domain.
    pub fn measure(&self) -> f64 {
        match self {
            DomainSpec::Rectangle { x0, x1, y0, y1, .. } => (x1 - x0) * (y1 - y0),
            DomainSpec::Disk { radius, .. } => PI * radius * radius,
            DomainSpec::RadialBall { dimension, radius, .. } => {
                sphere_area(*dimension) * radius.powi(*dimension as i32) / *dimension as f64
            }
        }
    }

    fn outer_contains_with_margin(&self, p: [f64; 2], margin: f64) -> bool {
        match self {
            DomainSpec::Rectangle { x0, x1, y0, y1, .. } => {
                p[0] - margin > *x0 && p[0] + margin < *x1 && p[1] - margin > *y0 && p[1] + margin < *y1
            }
            DomainSpec::Disk { center, radius, .. } => dist(p, *center) + margin < *radius,
            DomainSpec::RadialBall { .. } => false,
        }
    }

    fn validate(&self, h: f64) -> Result<()> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(LabError::InvalidDomain(format!("mesh width h = {h} must be positive")));
        }
        match self {
            DomainSpec::Rectangle { x0, x1, y0, y1, .. } => {
                if !(x1 > x0 && y1 > y0) {
                    return Err(LabError::InvalidDomain("rectangle requires x1 > x0 and y1 > y0".into()));
                }
            }
            DomainSpec::Disk { radius, .. } => {
                if !(*radius > 0.0) {
                    return Err(LabError::InvalidDomain("disk radius must be positive".into()));
                }
            }
            DomainSpec::RadialBall { dimension, radius, .. } => {
                if *dimension < 2 {
                    return Err(LabError::InvalidDomain("radial ball requires dimension N >= 2".into()));
                }
                if !(*radius > 0.0) {
                    return Err(LabError::InvalidDomain("radial ball radius must be positive".into()));
                }
            }
        }
        if let Some(inner) = self.inner_region() {
            if !(inner.radius > 0.0) {
                return Err(LabError::InvalidDomain("inner region radius must be positive".into()));
            }
            // the closure of the inner region must stay at least one cell away from the outer boundary
            if !self.outer_contains_with_margin(inner.center, inner.radius + h) {
                return Err(LabError::InvalidDomain(
                    "inner region must lie strictly inside the domain (it touches the boundary at this h)".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Surface measure of the unit sphere in R^n.
pub fn sphere_area(n: usize) -> f64 {
    // |S^{n-1}| = 2 pi^{n/2} / Gamma(n/2)
    let half = n as f64 / 2.0;
    2.0 * PI.powf(half) / gamma_half_integer(n)
}

/// Gamma(n/2) for a positive integer n.
fn gamma_half_integer(n: usize) -> f64 {
    let mut value = if n % 2 == 0 { 1.0 } else { PI.sqrt() };
    let mut k = if n % 2 == 0 { 2 } else { 1 };
    while k + 2 <= n {
        value *= k as f64 / 2.0;
        k += 2;
    }
    value
}

/// Identity of a grid; fields and measures carry it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridId(pub u64);

/// Off-diagonal coupling between two nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    /// Operator coefficient, `1/h^2`.
    pub coef: f64,
    /// Measure attached to the edge: `h^2` in the plane, `|S^{N-1}| r_{j+1/2}^{N-1} h` radially.
    pub measure: f64,
}

impl Edge {
    pub fn stiffness(&self) -> f64 {
        self.coef * self.measure
    }
}

#[derive(Debug, Clone)]
pub(crate) enum Layout {
    Planar {
        nx: usize,
        ny: usize,
        lattice: Vec<Option<usize>>,
        ij: Vec<[usize; 2]>,
    },
    Radial {
        dimension: usize,
    },
}

/// A discretized domain with quadrature and edge structure.
#[derive(Debug, Clone)]
pub struct Grid {
    id: GridId,
    spec: DomainSpec,
    h: f64,
    coords: Vec<[f64; 2]>,
    quad: Vec<f64>,
    edges: Vec<Edge>,
    boundary: Vec<f64>,
    adj_offsets: Vec<usize>,
    adj: Vec<(usize, f64)>,
    pub(crate) layout: Layout,
}

/// Build the grid of `spec` at mesh width `h`.
pub fn build_grid(spec: &DomainSpec, h: f64) -> Result<Grid> {
    spec.validate(h)?;
    match spec {
        DomainSpec::RadialBall { dimension, radius, origin } => {
            build_radial(spec.clone(), h, *dimension, *radius, *origin)
        }
        _ => build_planar(spec.clone(), h),
    }
}

fn grid_id(spec: &DomainSpec, h: f64) -> GridId {
    let mut hasher = Sha256::new();
    hasher.update(serde_json::to_vec(spec).unwrap_or_default());
    hasher.update(h.to_bits().to_le_bytes());
    let digest = hasher.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    GridId(u64::from_le_bytes(bytes))
}

fn integer_ratio(length: f64, h: f64, what: &str) -> Result<usize> {
    let ratio = length / h;
    let n = ratio.round();
    if (ratio - n).abs() > 1e-9 * ratio.max(1.0) {
        return Err(LabError::InvalidDomain(format!(
            "{what} length {length} is not an integer multiple of h = {h}"
        )));
    }
    Ok(n as usize)
}

fn build_planar(spec: DomainSpec, h: f64) -> Result<Grid> {
    let (origin, nx, ny, inside): ([f64; 2], usize, usize, Box<dyn Fn([f64; 2]) -> bool>) = match &spec {
        DomainSpec::Rectangle { x0, x1, y0, y1, .. } => {
            let cx = integer_ratio(x1 - x0, h, "rectangle x")?;
            let cy = integer_ratio(y1 - y0, h, "rectangle y")?;
            if cx < 4 || cy < 4 {
                return Err(LabError::InvalidDomain(format!(
                    "h = {h} too coarse: need at least 3 interior nodes per axis"
                )));
            }
            ([x0 + h, y0 + h], cx - 1, cy - 1, Box::new(|_| true))
        }
        DomainSpec::Disk { center, radius, .. } => {
            let k = (radius / h).floor() as usize;
            let c = *center;
            let r = *radius;
            let inside = move |p: [f64; 2]| dist(p, c) < r * (1.0 - 1e-12);
            // nodes on the axes through the center
            let axis = (0..=k).filter(|&i| inside([c[0] + i as f64 * h, c[1]])).count() * 2 - 1;
            if axis < 3 {
                return Err(LabError::InvalidDomain(format!(
                    "h = {h} too coarse: need at least 3 interior nodes per axis"
                )));
            }
            ([c[0] - k as f64 * h, c[1] - k as f64 * h], 2 * k + 1, 2 * k + 1, Box::new(inside))
        }
        DomainSpec::RadialBall { .. } => unreachable!(),
    };

    let mut lattice = vec![None; nx * ny];
    let mut coords = Vec::new();
    let mut ij = Vec::new();
    // lexicographic in (x, y)
    for i in 0..nx {
        for j in 0..ny {
            let p = [origin[0] + i as f64 * h, origin[1] + j as f64 * h];
            if inside(p) {
                lattice[i * ny + j] = Some(coords.len());
                coords.push(p);
                ij.push([i, j]);
            }
        }
    }
    let n = coords.len();
    let coef = 1.0 / (h * h);
    let measure = h * h;
    let mut edges = Vec::new();
    let mut boundary = vec![0.0; n];
    for (k, &[i, j]) in ij.iter().enumerate() {
        let neighbours = [
            (i as isize - 1, j as isize),
            (i as isize + 1, j as isize),
            (i as isize, j as isize - 1),
            (i as isize, j as isize + 1),
        ];
        for (a, b) in neighbours {
            let node = if a >= 0 && b >= 0 && (a as usize) < nx && (b as usize) < ny {
                lattice[a as usize * ny + b as usize]
            } else {
                None
            };
            match node {
                Some(other) if other > k => edges.push(Edge { a: k, b: other, coef, measure }),
                Some(_) => {}
                None => boundary[k] += coef * measure,
            }
        }
    }
    let quad = vec![h * h; n];
    let layout = Layout::Planar { nx, ny, lattice, ij };
    Ok(assemble(spec, h, coords, quad, edges, boundary, layout))
}

fn build_radial(spec: DomainSpec, h: f64, dimension: usize, radius: f64, origin: OriginClosure) -> Result<Grid> {
    let cells = integer_ratio(radius, h, "radius")?;
    if cells < 4 {
        return Err(LabError::InvalidDomain(format!(
            "h = {h} too coarse: need at least 3 interior radial nodes"
        )));
    }
    let sphere = sphere_area(dimension);
    let p = dimension as i32 - 1;
    let n = cells - 1;
    let coords: Vec<[f64; 2]> = (1..=n).map(|j| [j as f64 * h, 0.0]).collect();
    let quad: Vec<f64> = coords.iter().map(|c| sphere * c[0].powi(p) * h).collect();
    let coef = 1.0 / (h * h);
    let edges: Vec<Edge> = (0..n - 1)
        .map(|k| {
            let mid = (k as f64 + 1.5) * h;
            Edge { a: k, b: k + 1, coef, measure: sphere * mid.powi(p) * h }
        })
        .collect();
    let mut boundary = vec![0.0; n];
    boundary[n - 1] = coef * sphere * (radius - 0.5 * h).powi(p) * h;
    if origin == OriginClosure::Dirichlet {
        boundary[0] = coef * sphere * (0.5 * h).powi(p) * h;
    }
    let layout = Layout::Radial { dimension };
    Ok(assemble(spec, h, coords, quad, edges, boundary, layout))
}

fn assemble(
    spec: DomainSpec,
    h: f64,
    coords: Vec<[f64; 2]>,
    quad: Vec<f64>,
    edges: Vec<Edge>,
    boundary: Vec<f64>,
    layout: Layout,
) -> Grid {
    let n = coords.len();
    let mut degree = vec![0usize; n];
    for e in &edges {
        degree[e.a] += 1;
        degree[e.b] += 1;
    }
    let mut adj_offsets = vec![0usize; n + 1];
    for k in 0..n {
        adj_offsets[k + 1] = adj_offsets[k] + degree[k];
    }
    let mut fill = adj_offsets.clone();
    let mut adj = vec![(0usize, 0.0); adj_offsets[n]];
    for e in &edges {
        let s = e.stiffness();
        adj[fill[e.a]] = (e.b, s);
        fill[e.a] += 1;
        adj[fill[e.b]] = (e.a, s);
        fill[e.b] += 1;
    }
    for k in 0..n {
        adj[adj_offsets[k]..adj_offsets[k + 1]].sort_by_key(|&(j, _)| j);
    }
    Grid { id: grid_id(&spec, h), spec, h, coords, quad, edges, boundary, adj_offsets, adj, layout }
}

impl Grid {
    pub fn id(&self) -> GridId {
        self.id
    }

    pub fn spec(&self) -> &DomainSpec {
        &self.spec
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn is_radial(&self) -> bool {
        matches!(self.layout, Layout::Radial { .. })
    }

    /// Dimension of the continuum domain (2 for planar grids).
    pub fn dimension(&self) -> usize {
        match self.layout {
            Layout::Radial { dimension, .. } => dimension,
            Layout::Planar { .. } => 2,
        }
    }

    /// Node coordinates; radial grids store `[r, 0]`.
    pub fn coords(&self) -> &[[f64; 2]] {
        &self.coords
    }

    pub fn coord(&self, node: usize) -> [f64; 2] {
        self.coords[node]
    }

    pub fn quad_weights(&self) -> &[f64] {
        &self.quad
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Stiffness coupling each node to the zero extension outside the domain.
    pub fn boundary_stiffness(&self) -> &[f64] {
        &self.boundary
    }

    /// Neighbours of `node` with their edge stiffness, sorted by index.
    pub fn neighbours(&self, node: usize) -> &[(usize, f64)] {
        &self.adj[self.adj_offsets[node]..self.adj_offsets[node + 1]]
    }

    /// Diagonal of the assembled Laplacian.
    pub fn laplacian_diagonal(&self, node: usize) -> f64 {
        self.boundary[node] + self.neighbours(node).iter().map(|&(_, s)| s).sum::<f64>()
    }

    /// Lattice indices of a planar node.
    pub fn lattice_index(&self, node: usize) -> Option<[usize; 2]> {
        match &self.layout {
            Layout::Planar { ij, .. } => Some(ij[node]),
            Layout::Radial { .. } => None,
        }
    }

    /// Lattice shape `(nx, ny)` of a planar grid.
    pub fn lattice_shape(&self) -> Option<(usize, usize)> {
        match &self.layout {
            Layout::Planar { nx, ny, .. } => Some((*nx, *ny)),
            Layout::Radial { .. } => None,
        }
    }

    /// Node at lattice position `(i, j)`, if it belongs to the grid.
    pub fn node_at(&self, i: isize, j: isize) -> Option<usize> {
        match &self.layout {
            Layout::Planar { nx, ny, lattice, .. } => {
                if i < 0 || j < 0 || i as usize >= *nx || j as usize >= *ny {
                    None
                } else {
                    lattice[i as usize * ny + j as usize]
                }
            }
            Layout::Radial { .. } => {
                if j == 0 && i >= 0 && (i as usize) < self.len() {
                    Some(i as usize)
                } else {
                    None
                }
            }
        }
    }

    /// Node closest to a point (radial grids use `|p|`).
    pub fn nearest_node(&self, p: [f64; 2]) -> usize {
        let target = if self.is_radial() { [dist(p, [0.0, 0.0]), 0.0] } else { p };
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (k, c) in self.coords.iter().enumerate() {
            let d = dist(*c, target);
            if d < best_d {
                best_d = d;
                best = k;
            }
        }
        best
    }

    /// Distance from the origin, i.e. `r` radially.
    pub fn radius_of(&self, node: usize) -> f64 {
        dist(self.coords[node], [0.0, 0.0])
    }

    pub fn field(&self, values: Vec<f64>) -> Result<ScalarField> {
        if values.len() != self.len() {
            return Err(LabError::InvalidArgument(format!(
                "field has {} values, grid has {} nodes",
                values.len(),
                self.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(LabError::InvalidArgument("field values must be finite".into()));
        }
        Ok(ScalarField { grid: self.id, values })
    }

    pub fn constant(&self, c: f64) -> ScalarField {
        ScalarField { grid: self.id, values: vec![c; self.len()] }
    }

    pub fn zeros(&self) -> ScalarField {
        self.constant(0.0)
    }

    pub fn from_fn(&self, f: impl Fn([f64; 2]) -> f64) -> ScalarField {
        ScalarField { grid: self.id, values: self.coords.iter().map(|&c| f(c)).collect() }
    }

    pub fn check(&self, f: &ScalarField) -> Result<()> {
        if f.grid != self.id || f.values.len() != self.len() {
            return Err(LabError::GridMismatch);
        }
        Ok(())
    }

    /// Measure of type `density * dx` with no atoms.
    pub fn density(&self, density: ScalarField) -> Result<DiscreteMeasure> {
        self.check(&density)?;
        Ok(DiscreteMeasure { density, atoms: Vec::new() })
    }

    /// Unit atom at `node`.
    pub fn dirac(&self, node: usize) -> Result<DiscreteMeasure> {
        if node >= self.len() {
            return Err(LabError::InactiveNode(node));
        }
        Ok(DiscreteMeasure { density: self.zeros(), atoms: vec![(node, 1.0)] })
    }

    /// `L x` for the stiffness Laplacian.
    pub fn apply_laplacian(&self, x: &[f64]) -> Vec<f64> {
        (0..self.len())
            .map(|k| {
                let mut y = self.boundary[k] * x[k];
                for &(j, s) in self.neighbours(k) {
                    y += s * (x[k] - x[j]);
                }
                y
            })
            .collect()
    }

    /// Structural M-matrix report of the assembled Laplacian.
    pub fn m_matrix_report(&self) -> MMatrixReport {
        let n = self.len();
        let mut positive_diagonal = true;
        let mut weakly_dominant = true;
        let mut strict_rows = 0;
        for k in 0..n {
            let off: f64 = self.neighbours(k).iter().map(|&(_, s)| s).sum();
            let diag = self.laplacian_diagonal(k);
            positive_diagonal &= diag > 0.0;
            weakly_dominant &= diag >= off * (1.0 - 1e-14);
            if self.boundary[k] > 0.0 {
                strict_rows += 1;
            }
        }
        let nonpositive_offdiagonal = self.edges.iter().all(|e| e.stiffness() > 0.0);
        let symmetric = (0..n).all(|k| {
            self.neighbours(k).iter().all(|&(j, s)| {
                self.neighbours(j).iter().any(|&(i, t)| i == k && t == s)
            })
        });
        MMatrixReport {
            symmetric,
            positive_diagonal,
            nonpositive_offdiagonal,
            weakly_dominant,
            strict_rows,
            irreducible: self.is_connected(),
        }
    }

    fn is_connected(&self) -> bool {
        if self.is_empty() {
            return false;
        }
        let mut seen = vec![false; self.len()];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(k) = stack.pop() {
            for &(j, _) in self.neighbours(k) {
                if !seen[j] {
                    seen[j] = true;
                    count += 1;
                    stack.push(j);
                }
            }
        }
        count == self.len()
    }

    /// JSON descriptor `{spec, h, node_count, edge_count}`.
    pub fn descriptor(&self) -> serde_json::Value {
        serde_json::json!({
            "spec": self.spec,
            "h": self.h,
            "node_count": self.len(),
            "edge_count": self.edges.len(),
        })
    }

    /// CSV with header; `x,y,value` on planar grids, `r,value` on radial grids.
    pub fn field_csv(&self, field: &ScalarField) -> Result<String> {
        self.check(field)?;
        let mut out = String::new();
        if self.is_radial() {
            out.push_str("r,value\n");
            for (c, v) in self.coords.iter().zip(&field.values) {
                let _ = writeln!(out, "{:.12e},{:.17e}", c[0], v);
            }
        } else {
            out.push_str("x,y,value\n");
            for (c, v) in self.coords.iter().zip(&field.values) {
                let _ = writeln!(out, "{:.12e},{:.12e},{:.17e}", c[0], c[1], v);
            }
        }
        Ok(out)
    }
}

/// Outcome of the structural M-matrix checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MMatrixReport {
    pub symmetric: bool,
    pub positive_diagonal: bool,
    pub nonpositive_offdiagonal: bool,
    pub weakly_dominant: bool,
    /// Rows with a link to the zero extension (strict dominance).
    pub strict_rows: usize,
    pub irreducible: bool,
}

impl MMatrixReport {
    pub fn is_m_matrix(&self) -> bool {
        self.symmetric
            && self.positive_diagonal
            && self.nonpositive_offdiagonal
            && self.weakly_dominant
            && self.strict_rows > 0
            && self.irreducible
    }
}

/// One real value per grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: GridId,
    pub values: Vec<f64>,
}

impl ScalarField {
    pub fn grid_id(&self) -> GridId {
        self.grid
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        ScalarField { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip_map(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Result<ScalarField> {
        if self.grid != other.grid || self.len() != other.len() {
            return Err(LabError::GridMismatch);
        }
        Ok(ScalarField {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub(crate) fn with_values(&self, values: Vec<f64>) -> ScalarField {
        debug_assert_eq!(values.len(), self.values.len());
        ScalarField { grid: self.grid, values }
    }
}

/// A datum: density with respect to the grid quadrature plus point atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    pub density: ScalarField,
    pub atoms: Vec<(usize, f64)>,
}

impl DiscreteMeasure {
    pub fn grid_id(&self) -> GridId {
        self.density.grid
    }

    pub fn with_atom(mut self, node: usize, mass: f64) -> Self {
        self.atoms.push((node, mass));
        self
    }

    /// Load vector: `quad_j * density_j` plus atom masses.
    pub fn load(&self, grid: &Grid) -> Result<Vec<f64>> {
        grid.check(&self.density)?;
        let mut b: Vec<f64> = self.density.values.iter().zip(grid.quad_weights()).map(|(d, w)| d * w).collect();
        for &(node, mass) in &self.atoms {
            if node >= b.len() {
                return Err(LabError::InactiveNode(node));
            }
            b[node] += mass;
        }
        Ok(b)
    }

    /// Restriction to the nodes where `keep` holds.
    pub fn restrict(&self, keep: impl Fn(usize) -> bool) -> DiscreteMeasure {
        let values = self
            .density
            .values
            .iter()
            .enumerate()
            .map(|(k, &v)| if keep(k) { v } else { 0.0 })
            .collect();
        DiscreteMeasure {
            density: self.density.with_values(values),
            atoms: self.atoms.iter().copied().filter(|&(k, _)| keep(k)).collect(),
        }
    }

    pub fn is_nonnegative(&self) -> bool {
        self.density.values.iter().all(|&v| v >= 0.0) && self.atoms.iter().all(|&(_, m)| m >= 0.0)
    }

    pub fn total_variation(&self, grid: &Grid) -> f64 {
        let dens: f64 = self.density.values.iter().zip(grid.quad_weights()).map(|(d, w)| d.abs() * w).sum();
        dens + self.atoms.iter().map(|(_, m)| m.abs()).sum::<f64>()
    }
}

/// Quadrature of `f`.
pub fn integrate(grid: &Grid, f: &ScalarField) -> Result<f64> {
    grid.check(f)?;
    Ok(f.values.iter().zip(&grid.quad).map(|(v, w)| v * w).sum())
}

/// Quadrature of `f g` (times `weight` when given).
pub fn inner(grid: &Grid, f: &ScalarField, g: &ScalarField, weight: Option<&ScalarField>) -> Result<f64> {
    grid.check(f)?;
    grid.check(g)?;
    match weight {
        Some(w) => {
            grid.check(w)?;
            Ok((0..grid.len()).map(|k| grid.quad[k] * w.values[k] * f.values[k] * g.values[k]).sum())
        }
        None => Ok((0..grid.len()).map(|k| grid.quad[k] * f.values[k] * g.values[k]).sum()),
    }
}

/// Dirichlet energy `xi^T L xi`, boundary links to the zero extension included.
pub fn gradient_energy(grid: &Grid, xi: &ScalarField) -> Result<f64> {
    grid.check(xi)?;
    let x = &xi.values;
    let edges: f64 = grid.edges.iter().map(|e| e.stiffness() * (x[e.a] - x[e.b]).powi(2)).sum();
    let bnd: f64 = grid.boundary.iter().zip(x).map(|(b, v)| b * v * v).sum();
    Ok(edges + bnd)
}

/// `∫ xi dnu`: density quadrature plus atom evaluations.
pub fn pair_measure(grid: &Grid, xi: &ScalarField, nu: &DiscreteMeasure) -> Result<f64> {
    grid.check(xi)?;
    let load = nu.load(grid)?;
    Ok(xi.values.iter().zip(&load).map(|(a, b)| a * b).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_square_quarter_mesh() {
        let g = build_grid(&DomainSpec::unit_square(), 0.25).unwrap();
        assert_eq!(g.len(), 9);
        assert_eq!(g.edges().len(), 12);
        for e in g.edges() {
            assert_eq!(e.coef, 16.0);
        }
        assert!(g.m_matrix_report().is_m_matrix());
    }

    #[test]
    fn radial_quarter_mesh() {
        let g = build_grid(&DomainSpec::radial_ball(3, 1.0), 0.25).unwrap();
        assert_eq!(g.len(), 3);
        let r: Vec<f64> = g.coords().iter().map(|c| c[0]).collect();
        assert_eq!(r, vec![0.25, 0.5, 0.75]);
        for (w, r) in g.quad_weights().iter().zip(&r) {
            assert!((w - 4.0 * PI * r * r * 0.25).abs() < 1e-15);
        }
        assert!(g.m_matrix_report().is_m_matrix());
    }

    #[test]
    fn disk_area() {
        let g = build_grid(&DomainSpec::unit_disk(), 1.0 / 64.0).unwrap();
        let area = integrate(&g, &g.constant(1.0)).unwrap();
        assert!((area - PI).abs() < 5e-2, "area {area}");
        assert!(g.m_matrix_report().is_m_matrix());
    }

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(2) - 2.0 * PI).abs() < 1e-14);
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-14);
        assert!((sphere_area(4) - 2.0 * PI * PI).abs() < 1e-13);
        assert!((sphere_area(5) - 8.0 * PI * PI / 3.0).abs() < 1e-13);
    }

    #[test]
    fn degenerate_specs_are_rejected() {
        assert!(matches!(build_grid(&DomainSpec::unit_square(), 0.5), Err(LabError::InvalidDomain(_))));
        assert!(matches!(build_grid(&DomainSpec::unit_square(), 0.3), Err(LabError::InvalidDomain(_))));
        assert!(build_grid(&DomainSpec::radial_ball(1, 1.0), 0.1).is_err());
        let touching = DomainSpec::unit_square().with_inner_region(Disk::new([0.5, 0.5], 0.49));
        let err = build_grid(&touching, 1.0 / 32.0).unwrap_err();
        assert!(err.to_string().contains("inner region"));
        let fine = DomainSpec::unit_square().with_inner_region(Disk::new([0.5, 0.5], 0.3));
        assert!(build_grid(&fine, 1.0 / 32.0).is_ok());
    }

    #[test]
    fn zero_field_has_zero_energy() {
        let g = build_grid(&DomainSpec::unit_square(), 1.0 / 8.0).unwrap();
        assert_eq!(gradient_energy(&g, &g.zeros()).unwrap(), 0.0);
    }

    #[test]
    fn radial_linear_profile_energy() {
        // |grad (1 - r)|^2 = 1, so the energy is the ball volume 4 pi / 3
        let exact = 4.0 * PI / 3.0;
        let mut errs = Vec::new();
        for h in [1.0 / 100.0, 1.0 / 200.0] {
            let g = build_grid(&DomainSpec::radial_ball(3, 1.0), h).unwrap();
            let xi = g.from_fn(|c| 1.0 - c[0]);
            errs.push((gradient_energy(&g, &xi).unwrap() - exact).abs());
        }
        assert!(errs[0] < 1e-3);
        assert!(errs[1] < errs[0] / 3.0, "{errs:?}");
    }

    #[test]
    fn quadrature_of_one() {
        // interior-node quadrature misses the boundary half-cells: (1 - h)^2 on the square
        let g = build_grid(&DomainSpec::unit_square(), 0.25).unwrap();
        assert_eq!(integrate(&g, &g.constant(1.0)).unwrap(), 0.5625);
        // radial: 4 pi h^3 sum j^2 = 4pi/3 - 2 pi h + 2 pi h^2 / 3
        let h = 1e-3;
        let g = build_grid(&DomainSpec::radial_ball(3, 1.0), h).unwrap();
        let vol = integrate(&g, &g.constant(1.0)).unwrap();
        let expected = 4.0 * PI / 3.0 - 2.0 * PI * h + 2.0 * PI * h * h / 3.0;
        assert!((vol - expected).abs() < 1e-10, "{vol} vs {expected}");
    }

    #[test]
    fn pairing_with_atoms_and_densities() {
        let g = build_grid(&DomainSpec::unit_square(), 0.125).unwrap();
        let xi = g.from_fn(|c| c[0] + 2.0 * c[1]);
        let node = 10;
        let atom = g.dirac(node).unwrap();
        assert_eq!(pair_measure(&g, &xi, &atom).unwrap(), xi.values[node]);
        let dens = g.density(g.from_fn(|c| c[0] * c[0])).unwrap();
        let via_inner = inner(&g, &xi, &dens.density, None).unwrap();
        assert!((pair_measure(&g, &xi, &dens).unwrap() - via_inner).abs() < 1e-15);
        let bad = DiscreteMeasure { density: g.zeros(), atoms: vec![(g.len(), 1.0)] };
        assert!(pair_measure(&g, &xi, &bad).is_err());
    }

    #[test]
    fn grid_mismatch_is_detected() {
        let a = build_grid(&DomainSpec::unit_square(), 0.125).unwrap();
        let b = build_grid(&DomainSpec::unit_square(), 0.25).unwrap();
        assert!(matches!(integrate(&a, &b.constant(1.0)), Err(LabError::GridMismatch)));
        assert!(matches!(gradient_energy(&b, &a.constant(1.0)), Err(LabError::GridMismatch)));
    }
}
