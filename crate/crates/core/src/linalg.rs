//! Sparse symmetric kernels: compressed storage over the active nodes,
//! Jacobi-preconditioned conjugate gradients and an envelope Cholesky
//! factorization used for direct solves and positive-definiteness probes.

use crate::error::{LabError, Result};

const NONE: usize = usize::MAX;

/// Symmetric matrix restricted to a subset of grid nodes.
///
/// Off-diagonal entries are stored with their sign (nonpositive for the
/// operators built here); the diagonal is kept separately.
#[derive(Debug, Clone)]
pub struct CsrSym {
    nodes: Vec<usize>,
    index: Vec<usize>,
    diag: Vec<f64>,
    offsets: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrSym {
    /// `nodes` must be increasing; `offdiag(k)` lists `(full index, value)` pairs.
    pub(crate) fn build<'a, F, I>(full_len: usize, nodes: Vec<usize>, diag: Vec<f64>, offdiag: F) -> Self
    where
        F: Fn(usize) -> I,
        I: Iterator<Item = (usize, f64)> + 'a,
    {
        let mut index = vec![NONE; full_len];
        for (c, &k) in nodes.iter().enumerate() {
            index[k] = c;
        }
        let mut offsets = Vec::with_capacity(nodes.len() + 1);
        offsets.push(0);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for &k in &nodes {
            for (j, v) in offdiag(k) {
                let c = index[j];
                if c != NONE && v != 0.0 {
                    cols.push(c);
                    vals.push(v);
                }
            }
            offsets.push(cols.len());
        }
        CsrSym { nodes, index, diag, offsets, cols, vals }
    }

    pub fn dim(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    /// Compressed index of a full node, if active.
    pub fn compressed(&self, node: usize) -> Option<usize> {
        match self.index.get(node) {
            Some(&c) if c != NONE => Some(c),
            _ => None,
        }
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.offsets[i]..self.offsets[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.dim() {
            let mut acc = self.diag[i] * x[i];
            for p in self.offsets[i]..self.offsets[i + 1] {
                acc += self.vals[p] * x[self.cols[p]];
            }
            y[i] = acc;
        }
    }

    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        let mut y = vec![0.0; self.dim()];
        self.apply(x, &mut y);
        dot(x, &y)
    }

    pub fn gather(&self, full: &[f64]) -> Vec<f64> {
        self.nodes.iter().map(|&k| full[k]).collect()
    }

    pub fn scatter(&self, compressed: &[f64], full_len: usize) -> Vec<f64> {
        let mut out = vec![0.0; full_len];
        for (c, &k) in self.nodes.iter().enumerate() {
            out[k] = compressed[c];
        }
        out
    }

    /// Gershgorin lower bound for the smallest eigenvalue of `(A, diag(mass))`.
    pub fn gershgorin_lower(&self, mass: &[f64]) -> f64 {
        (0..self.dim())
            .map(|i| {
                let off: f64 = self.row(i).map(|(_, v)| v.abs()).sum();
                (self.diag[i] - off) / mass[i]
            })
            .fold(f64::INFINITY, f64::min)
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Outcome of an iterative solve.
#[derive(Debug, Clone)]
pub struct CgOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

/// Jacobi-preconditioned conjugate gradients from a zero start.
///
/// Stops at relative residual `tol`; a nonpositive curvature `p^T A p`
/// means the matrix is not positive definite.
pub fn pcg(a: &CsrSym, b: &[f64], tol: f64, max_iter: usize) -> Result<CgOutcome> {
    let n = a.dim();
    let bnorm = norm(b);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok(CgOutcome { x, iterations: 0, residual: 0.0 });
    }
    if a.diag.iter().any(|&d| d <= 0.0) {
        return Err(LabError::Indefinite);
    }
    let inv_diag: Vec<f64> = a.diag.iter().map(|d| 1.0 / d).collect();
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let mut rel = 1.0;
    for it in 1..=max_iter {
        a.apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return Err(LabError::Indefinite);
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        rel = norm(&r) / bnorm;
        if rel <= tol {
            return Ok(CgOutcome { x, iterations: it, residual: rel });
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(LabError::NotConverged { iterations: max_iter, residual: rel })
}

/// Cholesky factor stored over the envelope (profile) of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct EnvelopeCholesky {
    first: Vec<usize>,
    offsets: Vec<usize>,
    data: Vec<f64>,
}

impl EnvelopeCholesky {
    /// Number of stored entries for `a`, used to decide whether a factorization is affordable.
    pub fn envelope_size(a: &CsrSym) -> usize {
        (0..a.dim())
            .map(|i| {
                let first = a.row(i).map(|(j, _)| j).filter(|&j| j < i).min().unwrap_or(i);
                i - first + 1
            })
            .sum()
    }

    /// Factor `a - shift * diag(mass)`; fails with `Indefinite` on a nonpositive pivot.
    pub fn factor(a: &CsrSym, shift: f64, mass: Option<&[f64]>) -> Result<Self> {
        let n = a.dim();
        let mut first = Vec::with_capacity(n);
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for i in 0..n {
            let f = a.row(i).map(|(j, _)| j).filter(|&j| j < i).min().unwrap_or(i);
            first.push(f);
            offsets.push(offsets[i] + (i - f + 1));
        }
        let mut data = vec![0.0; offsets[n]];
        for i in 0..n {
            let base = offsets[i];
            for (j, v) in a.row(i) {
                if j < i {
                    data[base + j - first[i]] = v;
                }
            }
            let shift_term = match mass {
                Some(m) => shift * m[i],
                None => shift,
            };
            data[base + i - first[i]] = a.diag[i] - shift_term;
        }
        for i in 0..n {
            let (before, rest) = data.split_at_mut(offsets[i]);
            let row_i = &mut rest[..i - first[i] + 1];
            let fi = first[i];
            for j in fi..i {
                let fj = first[j];
                let row_j = &before[offsets[j]..offsets[j + 1]];
                let k0 = fi.max(fj);
                let mut s = row_i[j - fi];
                if k0 < j {
                    let a_seg = &row_i[k0 - fi..j - fi];
                    let b_seg = &row_j[k0 - fj..j - fj];
                    s -= dot(a_seg, b_seg);
                }
                row_i[j - fi] = s / row_j[j - fj];
            }
            let off = &row_i[..i - fi];
            let d = row_i[i - fi] - dot(off, off);
            if !(d > 0.0) || !d.is_finite() {
                return Err(LabError::Indefinite);
            }
            row_i[i - fi] = d.sqrt();
        }
        Ok(EnvelopeCholesky { first, offsets, data })
    }

    pub fn dim(&self) -> usize {
        self.first.len()
    }

    /// Solve `L L^T x = b` in compressed indices.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut y = b.to_vec();
        for i in 0..n {
            let row = &self.data[self.offsets[i]..self.offsets[i + 1]];
            let fi = self.first[i];
            let s = dot(&row[..i - fi], &y[fi..i]);
            y[i] = (y[i] - s) / row[i - fi];
        }
        for i in (0..n).rev() {
            let row = &self.data[self.offsets[i]..self.offsets[i + 1]];
            let fi = self.first[i];
            y[i] /= row[i - fi];
            let xi = y[i];
            if xi != 0.0 {
                for (k, l) in (fi..i).zip(row) {
                    y[k] -= l * xi;
                }
            }
        }
        y
    }
}

/// Whether `a - shift * diag(mass)` is positive definite.
pub fn is_positive_definite(a: &CsrSym, shift: f64, mass: Option<&[f64]>) -> bool {
    EnvelopeCholesky::factor(a, shift, mass).is_ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_laplacian(n: usize, diag_extra: f64) -> CsrSym {
        let nodes: Vec<usize> = (0..n).collect();
        let diag = vec![2.0 + diag_extra; n];
        CsrSym::build(n, nodes, diag, move |k| {
            let mut v = Vec::new();
            if k > 0 {
                v.push((k - 1, -1.0));
            }
            if k + 1 < n {
                v.push((k + 1, -1.0));
            }
            v.into_iter()
        })
    }

    #[test]
    fn cg_and_cholesky_agree() {
        let a = path_laplacian(50, 0.01);
        let b: Vec<f64> = (0..50).map(|i| (i as f64 * 0.3).sin()).collect();
        let cg = pcg(&a, &b, 1e-12, 1000).unwrap();
        let chol = EnvelopeCholesky::factor(&a, 0.0, None).unwrap();
        let x = chol.solve(&b);
        for (p, q) in cg.x.iter().zip(&x) {
            assert!((p - q).abs() < 1e-9);
        }
        let mut ax = vec![0.0; 50];
        a.apply(&x, &mut ax);
        for (p, q) in ax.iter().zip(&b) {
            assert!((p - q).abs() < 1e-12);
        }
    }

    #[test]
    fn definiteness_probe_brackets_smallest_eigenvalue() {
        // eigenvalues 2 - 2 cos(k pi / (n + 1)); smallest for k = 1
        let n = 40;
        let a = path_laplacian(n, 0.0);
        let lam = 2.0 - 2.0 * (std::f64::consts::PI / (n as f64 + 1.0)).cos();
        assert!(is_positive_definite(&a, lam * (1.0 - 1e-6), None));
        assert!(!is_positive_definite(&a, lam * (1.0 + 1e-6), None));
    }

    #[test]
    fn cg_flags_indefinite() {
        let a = path_laplacian(10, -1.5);
        let b = vec![1.0; 10];
        assert!(matches!(pcg(&a, &b, 1e-10, 100), Err(LabError::Indefinite)));
    }
}
