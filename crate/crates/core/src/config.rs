//! Run configuration: one JSON document, dotted `--key=value` overrides,
//! unknown keys rejected.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{LabError, Result};
use crate::grid::{DiscreteMeasure, DomainSpec, Grid};
use crate::potential::{PotentialSpec, DEFAULT_CLIP, DEFAULT_SUBSAMPLES};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub domain: DomainSpec,
    pub h: f64,
    pub potential: PotentialSpec,
    pub clip: f64,
    pub subsamples: usize,
    pub theta_rel: f64,
    pub q: QConfig,
    pub scheme: SchemeConfig,
    pub weight: WeightConfig,
    pub datum: DatumConfig,
    pub green: GreenConfig,
    pub eigen: EigenConfig,
    pub kato: KatoConfig,
    pub oracle: OracleConfig,
    pub defect: DefectConfig,
    pub output_dir: Option<String>,
    pub workers: usize,
    pub seed: u64,
    /// Record elapsed wall-clock time in summaries (breaks byte-identical output).
    pub record_wall_clock: bool,
    /// Multiplier applied to the pinned acceptance tolerances.
    pub tolerance_scale: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            domain: DomainSpec::unit_square(),
            h: 1.0 / 32.0,
            potential: PotentialSpec::zero(),
            clip: DEFAULT_CLIP,
            subsamples: DEFAULT_SUBSAMPLES,
            theta_rel: 1e-3,
            q: QConfig::default(),
            scheme: SchemeConfig::default(),
            weight: WeightConfig::default(),
            datum: DatumConfig::default(),
            green: GreenConfig::default(),
            eigen: EigenConfig::default(),
            kato: KatoConfig::default(),
            oracle: OracleConfig::default(),
            defect: DefectConfig::default(),
            output_dir: None,
            workers: 1,
            seed: 0,
            record_wall_clock: false,
            tolerance_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QConfig {
    pub alpha: f64,
    pub probe_count: usize,
}

impl Default for QConfig {
    fn default() -> Self {
        QConfig { alpha: 2.0, probe_count: 3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SchemeConfig {
    pub n_max: usize,
    pub tol: f64,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        SchemeConfig { n_max: 200, tol: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WeightConfig {
    pub w_cap: f64,
    /// Component to weight; all components when absent.
    pub component: Option<usize>,
    pub certify_tol: f64,
}

impl Default for WeightConfig {
    fn default() -> Self {
        WeightConfig { w_cap: 1e6, component: None, certify_tol: 1e-6 }
    }
}

/// Density catalog entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityId {
    One,
    Zero,
    /// Uniform on `[0, 1)` from the run seed.
    Random,
    /// Indicator of the domain's inner region.
    InnerRegion,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomSpec {
    /// Snapped to the nearest node.
    pub at: [f64; 2],
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DatumConfig {
    pub density: DensityId,
    pub scale: f64,
    pub atoms: Vec<AtomSpec>,
}

impl Default for DatumConfig {
    fn default() -> Self {
        DatumConfig { density: DensityId::One, scale: 1.0, atoms: Vec::new() }
    }
}

impl DatumConfig {
    pub fn build(&self, grid: &Grid, seed: u64) -> Result<DiscreteMeasure> {
        let field = match self.density {
            DensityId::One => grid.constant(self.scale),
            DensityId::Zero => grid.zeros(),
            DensityId::Random => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                grid.field((0..grid.len()).map(|_| self.scale * rng.gen_range(0.0..1.0)).collect())?
            }
            DensityId::InnerRegion => {
                let disk = grid
                    .spec()
                    .inner_region()
                    .ok_or_else(|| LabError::Config("datum.density = inner_region needs domain.inner_region".into()))?;
                grid.from_fn(|p| if disk.contains(p) { self.scale } else { 0.0 })
            }
        };
        let mut nu = grid.density(field)?;
        for atom in &self.atoms {
            nu = nu.with_atom(grid.nearest_node(atom.at), atom.mass);
        }
        Ok(nu)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GreenConfig {
    /// Source points, snapped to the nearest node.
    pub points: Vec<[f64; 2]>,
}

impl Default for GreenConfig {
    fn default() -> Self {
        GreenConfig { points: vec![[0.25, 0.25], [0.5, 0.5], [0.75, 0.4]] }
    }
}

/// Region over which the Rayleigh quotient is minimized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenRegion {
    All,
    InnerRegion,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EigenConfig {
    pub region: EigenRegion,
}

impl Default for EigenConfig {
    fn default() -> Self {
        EigenConfig { region: EigenRegion::All }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KatoConfig {
    pub deltas: Vec<f64>,
    pub fraction: f64,
}

impl Default for KatoConfig {
    fn default() -> Self {
        KatoConfig { deltas: vec![0.2, 0.1, 0.05, 0.025], fraction: 0.2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleConfig {
    pub dimension: usize,
    pub alpha: f64,
    pub beta: f64,
    pub sweep_points: usize,
    pub residual_widths: Vec<f64>,
    pub scan_ks: Vec<f64>,
    pub scan_h: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            dimension: 5,
            alpha: 2.5,
            beta: 1.5,
            sweep_points: 99,
            residual_widths: vec![1.0 / 200.0, 1.0 / 400.0],
            scan_ks: vec![10.0, 100.0, 1000.0],
            scan_h: 1e-5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DefectConfig {
    pub widths: Vec<f64>,
}

impl Default for DefectConfig {
    fn default() -> Self {
        DefectConfig { widths: vec![1.0 / 64.0, 1.0 / 128.0, 1.0 / 256.0] }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text).map_err(|e| LabError::Config(e.to_string()))?;
        Self::from_value(value)
    }

    pub fn from_value(value: Value) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_value(value).map_err(|e| LabError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Load `path` (or defaults when `None`) and apply `key=value` overrides.
    pub fn load_with_overrides(path: Option<&Path>, overrides: &[(String, String)]) -> Result<Self> {
        let mut value = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| LabError::Config(format!("cannot read {}: {e}", p.display())))?;
                serde_json::from_str(&text).map_err(|e| LabError::Config(e.to_string()))?
            }
            None => Value::Object(Default::default()),
        };
        for (k, v) in overrides {
            apply_override(&mut value, k, v)?;
        }
        Self::from_value(value)
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(LabError::Config(m));
        if !(self.h > 0.0) {
            return bad(format!("h must be positive, got {}", self.h));
        }
        if !(self.clip > 0.0) {
            return bad(format!("clip must be positive, got {}", self.clip));
        }
        if self.subsamples == 0 || self.subsamples % 2 == 0 {
            return bad(format!("subsamples must be odd and positive, got {}", self.subsamples));
        }
        if !(self.theta_rel > 0.0 && self.theta_rel < 1.0) {
            return bad(format!("theta_rel must lie in (0, 1), got {}", self.theta_rel));
        }
        if self.workers == 0 {
            return bad("workers must be at least 1".into());
        }
        if !(self.tolerance_scale > 0.0) {
            return bad(format!("tolerance_scale must be positive, got {}", self.tolerance_scale));
        }
        Ok(())
    }

    /// Hex SHA-256 of the canonical (sorted-key) JSON form.
    pub fn hash(&self) -> String {
        let value = serde_json::to_value(self).expect("config serializes");
        let bytes = serde_json::to_vec(&value).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}

/// Set `path.to.key` in a JSON object; the value parses as JSON or falls back to a string.
pub fn apply_override(root: &mut Value, key: &str, raw: &str) -> Result<()> {
    let parsed = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut cur = root;
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(LabError::Config(format!("malformed override key `{key}`")));
    }
    for (i, part) in parts.iter().enumerate() {
        let obj = cur
            .as_object_mut()
            .ok_or_else(|| LabError::Config(format!("override `{key}`: `{part}` is not inside an object")))?;
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), parsed);
            return Ok(());
        }
        cur = obj.entry(part.to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = RunConfig::default();
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(RunConfig::from_json(&text).unwrap(), cfg);
        assert_eq!(RunConfig::from_json("{}").unwrap(), cfg);
    }

    #[test]
    fn unknown_key_is_named() {
        let err = RunConfig::from_json(r#"{"hh": 0.1}"#).unwrap_err().to_string();
        assert!(err.contains("hh"), "{err}");
        let err = RunConfig::from_json(r#"{"scheme": {"nmax": 3}}"#).unwrap_err().to_string();
        assert!(err.contains("nmax"), "{err}");
    }

    #[test]
    fn overrides() {
        let cfg = RunConfig::load_with_overrides(
            None,
            &[
                ("h".into(), "0.125".into()),
                ("scheme.n_max".into(), "7".into()),
                ("potential".into(), r#"{"type":"inverse_power_axis","alpha":1.5}"#.into()),
                ("datum.density".into(), "random".into()),
            ],
        )
        .unwrap();
        assert_eq!(cfg.h, 0.125);
        assert_eq!(cfg.scheme.n_max, 7);
        assert_eq!(cfg.potential, PotentialSpec::InversePowerAxis { alpha: 1.5 });
        assert_eq!(cfg.datum.density, DensityId::Random);
        assert!(RunConfig::load_with_overrides(None, &[("scheme.bogus".into(), "1".into())]).is_err());
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = RunConfig::default();
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.seed = 1;
        assert_ne!(a.hash(), b.hash());
    }
}
