//! Artifact writers: CSV text, pretty sorted-key JSON and 16-bit PGM images.
//! Existing files are never overwritten; a numeric suffix is appended instead.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Result;
use crate::grid::{Grid, ScalarField};

/// Output directory that refuses to clobber existing artifacts.
#[derive(Debug, Clone)]
pub struct ArtifactDir {
    root: PathBuf,
}

impl ArtifactDir {
    pub fn create(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        fs::create_dir_all(&root)?;
        Ok(ArtifactDir { root })
    }

    pub fn path(&self) -> &Path {
        &self.root
    }

    pub fn subdir(&self, name: &str) -> Result<ArtifactDir> {
        ArtifactDir::create(self.root.join(name))
    }

    /// Free path for `name`: `stem.ext`, then `stem-1.ext`, `stem-2.ext`, ...
    pub fn free_path(&self, name: &str) -> PathBuf {
        let first = self.root.join(name);
        if !first.exists() {
            return first;
        }
        let (stem, ext) = match name.rfind('.') {
            Some(i) => (&name[..i], &name[i..]),
            None => (name, ""),
        };
        (1..)
            .map(|i| self.root.join(format!("{stem}-{i}{ext}")))
            .find(|p| !p.exists())
            .expect("unbounded search")
    }

    pub fn write_bytes(&self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.free_path(name);
        fs::write(&path, bytes)?;
        Ok(path)
    }

    pub fn write_text(&self, name: &str, text: &str) -> Result<PathBuf> {
        self.write_bytes(name, text.as_bytes())
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<PathBuf> {
        self.write_text(name, &json_pretty(value)?)
    }

    pub fn write_field(&self, name: &str, grid: &Grid, field: &ScalarField) -> Result<PathBuf> {
        self.write_text(name, &grid.field_csv(field)?)
    }
}

/// Pretty JSON with object keys in sorted order and a trailing newline.
pub fn json_pretty<T: Serialize>(value: &T) -> Result<String> {
    // serde_json::Value keeps maps in a BTreeMap, which sorts keys
    let v = serde_json::to_value(value)?;
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}

/// Linear heatmap of a field as binary 16-bit PGM (min -> 0, max -> 65535).
///
/// Planar grids map to their lattice with the top row at the largest `y`;
/// off-domain pixels are 0. Radial grids give a single row.
pub fn field_pgm(grid: &Grid, field: &ScalarField) -> Result<Vec<u8>> {
    grid.check(field)?;
    let lo = field.min();
    let hi = field.max();
    let span = if hi > lo { hi - lo } else { 1.0 };
    let gray = |v: f64| (((v - lo) / span) * 65535.0).round().clamp(0.0, 65535.0) as u16;
    let (width, height, pixels) = match grid.lattice_shape() {
        Some((nx, ny)) => {
            let mut px = vec![0u16; nx * ny];
            for row in 0..ny {
                let j = ny - 1 - row;
                for i in 0..nx {
                    if let Some(k) = grid.node_at(i as isize, j as isize) {
                        px[row * nx + i] = gray(field.values[k]);
                    }
                }
            }
            (nx, ny, px)
        }
        None => (grid.len(), 1, field.values.iter().map(|&v| gray(v)).collect()),
    };
    Ok(pgm_bytes(width, height, &pixels))
}

pub fn pgm_bytes(width: usize, height: usize, pixels: &[u16]) -> Vec<u8> {
    let mut out = format!("P5\n{width} {height}\n65535\n").into_bytes();
    out.reserve(pixels.len() * 2);
    for p in pixels {
        out.extend_from_slice(&p.to_be_bytes());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, DomainSpec};

    #[test]
    fn collisions_get_suffixes() {
        let tmp = tempfile::tempdir().unwrap();
        let dir = ArtifactDir::create(tmp.path()).unwrap();
        let a = dir.write_text("out.csv", "a").unwrap();
        let b = dir.write_text("out.csv", "b").unwrap();
        let c = dir.write_text("out.csv", "c").unwrap();
        assert_eq!(a.file_name().unwrap(), "out.csv");
        assert_eq!(b.file_name().unwrap(), "out-1.csv");
        assert_eq!(c.file_name().unwrap(), "out-2.csv");
        assert_eq!(fs::read_to_string(a).unwrap(), "a");
    }

    #[test]
    fn json_keys_sorted() {
        let s = json_pretty(&serde_json::json!({"b": 1, "a": {"d": 2, "c": 3}})).unwrap();
        assert!(s.find("\"a\"").unwrap() < s.find("\"b\"").unwrap());
        assert!(s.find("\"c\"").unwrap() < s.find("\"d\"").unwrap());
    }

    #[test]
    fn pgm_layout() {
        let g = build_grid(&DomainSpec::unit_square(), 0.25).unwrap();
        let f = g.from_fn(|p| p[1]);
        let bytes = field_pgm(&g, &f).unwrap();
        let header = b"P5\n3 3\n65535\n";
        assert!(bytes.starts_with(header));
        let px: Vec<u16> = bytes[header.len()..].chunks(2).map(|c| u16::from_be_bytes([c[0], c[1]])).collect();
        assert_eq!(&px[..3], &[65535; 3]);
        assert_eq!(&px[6..], &[0; 3]);
    }
}
