//! Closed-form references: the radial Hardy family `u_α`, `V_α`, `f_{α,β}`,
//! torsion functions without potential, the truncation energy scan and a
//! one-dimensional slab model of the defect measure.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{LabError, Result};
use crate::grid::{build_grid, sphere_area, DomainSpec, Grid, OriginClosure};

/// Parameters `N >= 3`, `0 < α < N - 2`, `(N - 2)/2 <= β < α`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HardyFamily {
    pub dimension: usize,
    pub alpha: f64,
    pub beta: f64,
}

impl HardyFamily {
    pub fn new(dimension: usize, alpha: f64, beta: f64) -> Result<Self> {
        check_family(dimension, alpha, beta)?;
        if !(beta < alpha) {
            return Err(LabError::InvalidArgument(format!("need beta < alpha, got beta = {beta}, alpha = {alpha}")));
        }
        Ok(HardyFamily { dimension, alpha, beta })
    }

    pub fn u(&self, r: f64) -> Result<f64> {
        u_alpha(self.alpha, r)
    }

    pub fn v(&self, r: f64) -> Result<f64> {
        v_alpha(self.dimension, self.alpha, r)
    }

    pub fn f(&self, r: f64) -> Result<f64> {
        f_alpha_beta(self.dimension, self.alpha, self.beta, r)
    }

    /// CSV `r,u,V,f` of `u_β`, `V_α` and `f_{α,β}` at the given radii.
    pub fn sweep_csv(&self, radii: &[f64]) -> Result<String> {
        let mut out = String::from("r,u,V,f\n");
        for &r in radii {
            let _ = writeln!(
                out,
                "{r:.12e},{:.12e},{:.12e},{:.12e}",
                u_alpha(self.beta, r)?,
                self.v(r)?,
                self.f(r)?
            );
        }
        Ok(out)
    }
}

fn check_family(n: usize, alpha: f64, beta: f64) -> Result<()> {
    let nf = n as f64;
    if n < 3 || !(alpha > 0.0 && alpha < nf - 2.0) || !(beta >= (nf - 2.0) / 2.0) || beta > alpha {
        return Err(LabError::InvalidArgument(format!(
            "Hardy family needs N >= 3, 0 < alpha < N - 2, (N - 2)/2 <= beta <= alpha; got N = {n}, alpha = {alpha}, beta = {beta}"
        )));
    }
    Ok(())
}

/// `r^{-α} - 1`, `+inf` at the origin.
pub fn u_alpha(alpha: f64, r: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&r) {
        return Err(LabError::InvalidArgument(format!("u_alpha needs 0 <= r <= 1, got {r}")));
    }
    if r == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(r.powf(-alpha) - 1.0)
}

/// `-α (N - 2 - α) / (r^2 (1 - r^α))` for `0 < r < 1`.
pub fn v_alpha(n: usize, alpha: f64, r: f64) -> Result<f64> {
    if !(r > 0.0 && r < 1.0) {
        return Err(LabError::InvalidArgument(format!("V_alpha needs 0 < r < 1, got {r}")));
    }
    Ok(-alpha * (n as f64 - 2.0 - alpha) / (r * r * (1.0 - r.powf(alpha))))
}

/// `[β(N-2-β)(1 - r^α) - α(N-2-α)(1 - r^β)] / (r^{β+2} (1 - r^α))`.
pub fn f_alpha_beta(n: usize, alpha: f64, beta: f64, r: f64) -> Result<f64> {
    check_family(n, alpha, beta)?;
    if !(r > 0.0 && r < 1.0) {
        return Err(LabError::InvalidArgument(format!("f_alpha_beta needs 0 < r < 1, got {r}")));
    }
    let m = n as f64 - 2.0;
    let (ra, rb) = (r.powf(alpha), r.powf(beta));
    Ok((beta * (m - beta) * (1.0 - ra) - alpha * (m - alpha) * (1.0 - rb)) / (r.powf(beta + 2.0) * (1.0 - ra)))
}

/// `α(N-2-α)(r^β - r^α) / (r^{β+2} (1 - r^α))`.
pub fn f_lower_bound(n: usize, alpha: f64, beta: f64, r: f64) -> Result<f64> {
    check_family(n, alpha, beta)?;
    if !(r > 0.0 && r < 1.0) {
        return Err(LabError::InvalidArgument(format!("f_lower_bound needs 0 < r < 1, got {r}")));
    }
    let m = n as f64 - 2.0;
    let (ra, rb) = (r.powf(alpha), r.powf(beta));
    Ok(alpha * (m - alpha) * (rb - ra) / (r.powf(beta + 2.0) * (1.0 - ra)))
}

fn radial_unit_ball(n: usize, h: f64) -> Result<Grid> {
    build_grid(&DomainSpec::RadialBall { dimension: n, radius: 1.0, origin: OriginClosure::Dirichlet }, h)
}

/// `max |(-Δ_h + V_α) u_β - f_{α,β}|` over nodes with `0.1 <= r <= 0.9`.
pub fn radial_residual(n: usize, alpha: f64, beta: f64, h: f64) -> Result<f64> {
    check_family(n, alpha, beta)?;
    let grid = radial_unit_ball(n, h)?;
    let u: Vec<f64> = grid.coords().iter().map(|c| u_alpha(beta, c[0])).collect::<Result<_>>()?;
    let lu = grid.apply_laplacian(&u);
    let quad = grid.quad_weights();
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for (k, c) in grid.coords().iter().enumerate() {
        let r = c[0];
        if !(0.1 - 1e-12..=0.9 + 1e-12).contains(&r) {
            continue;
        }
        count += 1;
        let residual = lu[k] / quad[k] + v_alpha(n, alpha, r)? * u[k] - f_alpha_beta(n, alpha, beta, r)?;
        worst = worst.max(residual.abs());
    }
    if count < 100 {
        return Err(LabError::InvalidArgument(format!("h = {h} leaves only {count} nodes in [0.1, 0.9]")));
    }
    Ok(worst)
}

/// Torsion function of `-Δ` at `p` (radial grids read `p[0]` as `r`).
pub fn torsion_exact(domain: &DomainSpec, p: [f64; 2]) -> Result<f64> {
    if domain.inner_region().is_some() {
        return Err(LabError::InvalidDomain("no closed form with an inner region".into()));
    }
    match *domain {
        DomainSpec::RadialBall { dimension, radius, .. } => {
            Ok(((radius * radius - p[0] * p[0]) / (2.0 * dimension as f64)).max(0.0))
        }
        DomainSpec::Disk { center, radius, .. } => {
            let d2 = (p[0] - center[0]).powi(2) + (p[1] - center[1]).powi(2);
            Ok(((radius * radius - d2) / 4.0).max(0.0))
        }
        DomainSpec::Rectangle { x0, x1, y0, y1, .. } => Ok(rectangle_torsion(x1 - x0, y1 - y0, p[0] - x0, p[1] - y0, 50)),
    }
}

/// `x(a-x)/2 - Σ_{n odd} 4a^2/(π^3 n^3) sin(nπx/a) cosh(nπ(y-b/2)/a) / cosh(nπb/(2a))`.
pub fn rectangle_torsion(a: f64, b: f64, x: f64, y: f64, terms: usize) -> f64 {
    if x <= 0.0 || x >= a || y <= 0.0 || y >= b {
        return 0.0;
    }
    let mut s = x * (a - x) / 2.0;
    for k in 0..terms {
        let n = (2 * k + 1) as f64;
        let ratio = cosh_ratio(n * PI * (y - b / 2.0) / a, n * PI * b / (2.0 * a));
        s -= 4.0 * a * a / (PI.powi(3) * n.powi(3)) * (n * PI * x / a).sin() * ratio;
    }
    s
}

/// `cosh(t) / cosh(s)` for `|t| <= s`, without overflow.
fn cosh_ratio(t: f64, s: f64) -> f64 {
    let t = t.abs();
    (t - s).exp() * (1.0 + (-2.0 * t).exp()) / (1.0 + (-2.0 * s).exp())
}

/// One row of the truncation energy scan.
#[derive(Debug, Clone, Serialize)]
pub struct ScanRow {
    pub k: f64,
    /// `ξ^T L ξ` for `ξ = T_k(u_α)`.
    pub dirichlet: f64,
    /// `Σ quad V_α ξ^2`.
    pub potential: f64,
    pub energy: f64,
}

/// Discrete energies `∫ |∇ T_k u_α|^2 + V_α T_k(u_α)^2` on a radial grid of width `h`.
pub fn truncation_energy_scan(n: usize, alpha: f64, ks: &[f64], h: f64) -> Result<Vec<ScanRow>> {
    let nf = n as f64;
    if n < 3 || !(alpha > 0.0 && alpha < nf - 2.0) {
        return Err(LabError::InvalidArgument(format!("scan needs N >= 3 and 0 < alpha < N - 2, got N = {n}, alpha = {alpha}")));
    }
    let grid = radial_unit_ball(n, h)?;
    let quad = grid.quad_weights();
    let v: Vec<f64> = grid.coords().iter().map(|c| v_alpha(n, alpha, c[0])).collect::<Result<_>>()?;
    let u: Vec<f64> = grid.coords().iter().map(|c| u_alpha(alpha, c[0])).collect::<Result<_>>()?;
    ks.iter()
        .map(|&k| {
            let xi: Vec<f64> = u.iter().map(|&x| x.min(k)).collect();
            let lx = grid.apply_laplacian(&xi);
            let dirichlet: f64 = lx.iter().zip(&xi).map(|(a, b)| a * b).sum();
            let potential: f64 = (0..xi.len()).map(|j| quad[j] * v[j] * xi[j] * xi[j]).sum();
            Ok(ScanRow { k, dirichlet, potential, energy: dirichlet + potential })
        })
        .collect()
}

/// `|S^{N-1}| α^2 log(1/ρ_k)`, `ρ_k = (k + 1)^{-1/α}`: Dirichlet energy of `T_k(u_α)` outside `B_{ρ_k}` at `α = (N-2)/2`.
pub fn critical_dirichlet_growth(n: usize, k: f64) -> f64 {
    let alpha = (n as f64 - 2.0) / 2.0;
    sphere_area(n) * alpha * (k + 1.0).ln()
}

/// One-dimensional model `-u'' + t^{-α} u = 1` on `(0, 1)`, `u(0) = u(1) = 0`.
#[derive(Debug, Clone, Serialize)]
pub struct SlabDefect {
    pub alpha: f64,
    pub h: f64,
    /// `2 u(h) / h`, the two one-sided quotients of the symmetric slab.
    pub tau: f64,
}

pub fn slab_defect(alpha: f64, h: f64) -> Result<SlabDefect> {
    let m = (1.0 / h).round() as usize;
    if m < 4 || ((m as f64) * h - 1.0).abs() > 1e-9 {
        return Err(LabError::InvalidArgument(format!("slab width must be 1/M with M >= 4, got {h}")));
    }
    let n = m - 1;
    // Thomas algorithm for the tridiagonal system scaled by h^2
    let mut diag: Vec<f64> = (1..=n).map(|j| 2.0 + h * h * (j as f64 * h).powf(-alpha)).collect();
    let mut rhs = vec![h * h; n];
    for j in 1..n {
        let w = -1.0 / diag[j - 1];
        diag[j] += w;
        rhs[j] -= w * rhs[j - 1];
    }
    let mut u = vec![0.0; n];
    u[n - 1] = rhs[n - 1] / diag[n - 1];
    for j in (0..n - 1).rev() {
        u[j] = (rhs[j] + u[j + 1]) / diag[j];
    }
    Ok(SlabDefect { alpha, h, tau: 2.0 * u[0] / h })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn u_alpha_values() {
        assert_eq!(u_alpha(1.0, 1.0).unwrap(), 0.0);
        assert!((u_alpha(1.0, 0.5).unwrap() - 1.0).abs() < 1e-15);
        assert!((u_alpha(0.5, 0.25).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(u_alpha(1.0, 0.0).unwrap(), f64::INFINITY);
        assert!(u_alpha(1.0, 1.5).is_err());
    }

    #[test]
    fn v_alpha_values() {
        let v = v_alpha(3, 0.5, 0.5).unwrap();
        assert!((v + 1.0 / (1.0 - 2f64.powf(-0.5))).abs() < 1e-12);
        assert!((v + 3.414_213_562).abs() < 1e-8);
        assert!(v_alpha(3, 0.5, 0.999_999).unwrap() < -1e5);
        assert!(v_alpha(3, 0.5, 0.0).is_err() && v_alpha(3, 0.5, 1.0).is_err());
    }

    #[test]
    fn f_positive_and_bounded_below() {
        let f = f_alpha_beta(5, 2.5, 1.5, 0.5).unwrap();
        let lb = f_lower_bound(5, 2.5, 1.5, 0.5).unwrap();
        assert!(f > 0.0 && f >= lb);
        assert_eq!(f_alpha_beta(5, 2.0, 2.0, 0.3).unwrap(), 0.0);
        assert!(f_alpha_beta(5, 2.5, 1.0, 0.5).is_err());
    }

    #[test]
    fn square_center_torsion() {
        let c = torsion_exact(&DomainSpec::unit_square(), [0.5, 0.5]).unwrap();
        assert!((c - 0.07367).abs() < 1e-5, "{c}");
        assert_eq!(torsion_exact(&DomainSpec::unit_square(), [0.0, 0.3]).unwrap(), 0.0);
        assert!((torsion_exact(&DomainSpec::radial_ball(3, 1.0), [0.0, 0.0]).unwrap() - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn slab_defect_dichotomy() {
        let a = slab_defect(1.5, 1e-4).unwrap();
        let b = slab_defect(2.5, 1e-4).unwrap();
        assert!(a.tau > 0.1);
        assert!(b.tau < 1e-3 * a.tau);
    }
}
