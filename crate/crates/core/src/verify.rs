//! Acceptance suite: twelve criteria driven by a directory of run configs.
//!
//! Each criterion reads `cNN_*.json` from the config set, writes its
//! artifacts under `criteria/cNN/` and reports one or more checks. The
//! report is `report.csv` (`criterion,status,value,expected,tolerance`) plus
//! `report.json`. Tolerances are pinned here and multiplied by the config's
//! `tolerance_scale`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::config::RunConfig;
use crate::decomposition::{self, components, defect_estimate, detect_s};
use crate::error::{LabError, Result};
use crate::export::ArtifactDir;
use crate::grid::{self, build_grid, DiscreteMeasure, Disk, DomainSpec, Grid, ScalarField};
use crate::iteration::{self, SchemeOptions, WeightOptions};
use crate::oracle;
use crate::potential::{evaluate, kato_report, PotentialSpec, SplitPotential};
use crate::variational::{self, SchroedingerOperator};

pub const TORSION_BALL_TOL: f64 = 1e-5;
pub const TORSION_SQUARE_TOL: f64 = 1e-3;
pub const EIGEN_REL_TOL: f64 = 5e-3;
pub const SHIFT_TOL: f64 = 1e-8;
pub const IDENTITY_TOL: f64 = 1e-8;
pub const GROUND_STATE_TOL: f64 = 1e-10;
pub const LOCALIZATION_TOL: f64 = 1e-8;
pub const MONOTONE_TOL: f64 = 1e-12;
pub const UPPER_TOL: f64 = 1e-10;
pub const LIMIT_TOL: f64 = 1e-6;
pub const CERTIFY_TOL: f64 = 1e-6;
pub const DEFECT_SPREAD: f64 = 0.2;
pub const DEFECT_DECAY: f64 = 0.6;
pub const BREZIS_MARCUS_BOUND: f64 = 0.25;
pub const RESIDUAL_RATIO: (f64, f64) = (3.0, 5.0);
pub const LOWER_BOUND_TOL: f64 = 1e-12;
pub const SCAN_SPREAD: f64 = 0.25;
pub const DIRICHLET_DECADE_GROWTH: f64 = 2.0;
pub const KATO_RATIO: (f64, f64) = (0.35, 0.65);
pub const KATO_FLOOR: f64 = 0.5;

/// Config file of each criterion inside a config set directory.
pub const CONFIG_FILES: [&str; 12] = [
    "c01_torsion.json",
    "c02_eigen.json",
    "c03_identities.json",
    "c04_zeroset.json",
    "c05_localization.json",
    "c06_monotone.json",
    "c07_weight.json",
    "c08_defect.json",
    "c09_brezis_marcus.json",
    "c10_hardy_family.json",
    "c11_kato.json",
    "c12_determinism.json",
];

pub const TITLES: [&str; 12] = [
    "torsion oracle",
    "eigenvalue oracle",
    "exact discrete identities",
    "zero-set catalog",
    "exact localization",
    "monotone scheme",
    "weight construction",
    "defect measure",
    "Brezis-Marcus constant",
    "Hardy family residuals",
    "Kato estimator",
    "determinism",
];

pub fn bundled_config_dir() -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/configs/verify"))
}

/// One measured quantity against its expectation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub expected: String,
    pub tolerance: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub id: usize,
    pub title: String,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_seconds: Option<f64>,
}

impl CriterionResult {
    /// `criterion N (title): PASS|FAIL` with the failing checks listed.
    pub fn line(&self) -> String {
        let mut s = format!("criterion {:>2} ({}): {}", self.id, self.title, if self.passed { "PASS" } else { "FAIL" });
        if let Some(e) = &self.error {
            let _ = write!(s, " [error: {e}]");
        }
        for c in self.checks.iter().filter(|c| !c.passed) {
            let _ = write!(s, " [{} = {:.6e}, expected {}]", c.name, c.value, c.expected);
        }
        s
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub criteria: Vec<CriterionResult>,
}

impl SuiteReport {
    pub fn all_passed(&self) -> bool {
        self.criteria.iter().all(|c| c.passed)
    }

    pub fn criterion(&self, id: usize) -> Option<&CriterionResult> {
        self.criteria.iter().find(|c| c.id == id)
    }

    pub fn lines(&self) -> Vec<String> {
        self.criteria.iter().map(CriterionResult::line).collect()
    }

    pub fn csv(&self) -> String {
        let mut out = String::from("criterion,status,value,expected,tolerance\n");
        for c in &self.criteria {
            if let Some(e) = &c.error {
                let _ = writeln!(out, "{}:error,FAIL,NaN,\"{}\",0", c.id, e.replace('"', "'"));
            }
            for k in &c.checks {
                let _ = writeln!(
                    out,
                    "{}:{},{},{:.9e},\"{}\",{:.3e}",
                    c.id,
                    k.name,
                    if k.passed { "PASS" } else { "FAIL" },
                    k.value,
                    k.expected,
                    k.tolerance
                );
            }
        }
        out
    }
}

/// Check builder with the tolerance multiplier applied.
#[derive(Debug, Clone, Copy)]
pub struct Checker {
    pub scale: f64,
}

impl Checker {
    pub fn at_most(&self, name: &str, value: f64, tol: f64) -> Check {
        let tol = tol * self.scale;
        Check { name: name.into(), passed: value <= tol, value, expected: format!("<= {tol:.3e}"), tolerance: tol }
    }

    pub fn at_least(&self, name: &str, value: f64, bound: f64, tol: f64) -> Check {
        let tol = tol * self.scale;
        Check { name: name.into(), passed: value >= bound - tol, value, expected: format!(">= {bound}"), tolerance: tol }
    }

    pub fn within(&self, name: &str, value: f64, lo: f64, hi: f64) -> Check {
        Check {
            name: name.into(),
            passed: value >= lo && value <= hi,
            value,
            expected: format!("in [{lo}, {hi}]"),
            tolerance: 0.0,
        }
    }

    pub fn equals(&self, name: &str, value: usize, expected: usize) -> Check {
        Check {
            name: name.into(),
            passed: value == expected,
            value: value as f64,
            expected: format!("== {expected}"),
            tolerance: 0.0,
        }
    }

    pub fn holds(&self, name: &str, ok: bool) -> Check {
        Check { name: name.into(), passed: ok, value: if ok { 1.0 } else { 0.0 }, expected: "== 1".into(), tolerance: 0.0 }
    }
}

/// Loaded config set; every file is read before any criterion runs.
#[derive(Debug, Clone)]
pub struct ConfigSet {
    pub configs: Vec<RunConfig>,
}

impl ConfigSet {
    pub fn load(dir: &Path, overrides: &[(String, String)]) -> Result<Self> {
        let configs = CONFIG_FILES
            .iter()
            .map(|f| {
                let path = dir.join(f);
                RunConfig::load_with_overrides(Some(&path), overrides)
                    .map_err(|e| LabError::Config(format!("{}: {e}", path.display())))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ConfigSet { configs })
    }

    pub fn get(&self, id: usize) -> &RunConfig {
        &self.configs[id - 1]
    }
}

type Criterion = fn(&RunConfig, &ArtifactDir, &Checker) -> Result<Vec<Check>>;

const CRITERIA: [Criterion; 11] = [
    torsion_oracle,
    eigen_oracle,
    discrete_identities,
    zero_set_catalog,
    exact_localization,
    monotone_scheme,
    weight_construction,
    defect_measure,
    brezis_marcus,
    hardy_family,
    kato_estimator,
];

/// Run criteria 1..=11 from `set` into a fresh `criteria` tree under `out`.
pub fn run_criteria(set: &ConfigSet, out: &ArtifactDir, ids: &[usize]) -> Result<(Vec<CriterionResult>, PathBuf)> {
    let root = ArtifactDir::create(out.free_path("criteria"))?;
    let results = ids
        .par_iter()
        .map(|&id| {
            let cfg = set.get(id);
            let checker = Checker { scale: cfg.tolerance_scale };
            let clock = Instant::now();
            let outcome = root.subdir(&format!("c{id:02}")).and_then(|dir| CRITERIA[id - 1](cfg, &dir, &checker));
            let wall = cfg.record_wall_clock.then(|| clock.elapsed().as_secs_f64());
            finish(id, outcome, wall)
        })
        .collect();
    Ok((results, root.path().to_path_buf()))
}

fn finish(id: usize, outcome: Result<Vec<Check>>, wall_seconds: Option<f64>) -> CriterionResult {
    let title = TITLES[id - 1].to_string();
    match outcome {
        Ok(checks) => {
            let passed = !checks.is_empty() && checks.iter().all(|c| c.passed);
            CriterionResult { id, title, passed, checks, error: None, wall_seconds }
        }
        Err(e) => CriterionResult { id, title, passed: false, checks: Vec::new(), error: Some(e.to_string()), wall_seconds },
    }
}

/// The full suite: criteria 1..=11, then a second pass whose artifact tree is compared byte for byte.
pub fn run_suite(dir: &Path, overrides: &[(String, String)], out: &Path) -> Result<SuiteReport> {
    let set = ConfigSet::load(dir, overrides)?;
    let workers = set.get(12).workers;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| LabError::Config(format!("cannot start {workers} workers: {e}")))?;
    pool.install(|| {
        let out = ArtifactDir::create(out)?;
        let ids: Vec<usize> = (1..=11).collect();
        let (mut criteria, first) = run_criteria(&set, &out, &ids)?;
        let cfg = set.get(12);
        let clock = Instant::now();
        let determinism = determinism_check(&set, &out, &first, &Checker { scale: cfg.tolerance_scale });
        criteria.push(finish(12, determinism, cfg.record_wall_clock.then(|| clock.elapsed().as_secs_f64())));
        let report = SuiteReport { criteria };
        out.write_text("report.csv", &report.csv())?;
        out.write_json("report.json", &report)?;
        Ok(report)
    })
}

fn determinism_check(set: &ConfigSet, out: &ArtifactDir, first: &Path, checker: &Checker) -> Result<Vec<Check>> {
    let rerun_root = out.subdir(&file_name(&out.free_path("rerun")))?;
    let ids: Vec<usize> = (1..=11).collect();
    let (_, second) = run_criteria(set, &rerun_root, &ids)?;
    let a = tree_bytes(first)?;
    let b = tree_bytes(&second)?;
    let mut differing = a.keys().chain(b.keys()).filter(|k| a.get(*k) != b.get(*k)).cloned().collect::<Vec<_>>();
    differing.sort();
    differing.dedup();
    let dir = ArtifactDir::create(first.join("c12"))?;
    dir.write_json("result.json", &json!({ "files": a.len(), "differing": differing }))?;
    Ok(vec![
        checker.equals("differing_files", differing.len(), 0),
        checker.holds("nonempty_tree", !a.is_empty()),
    ])
}

fn file_name(p: &Path) -> String {
    p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Relative path to contents for every file below `root`.
pub fn tree_bytes(root: &Path) -> Result<BTreeMap<String, Vec<u8>>> {
    fn walk(root: &Path, dir: &Path, acc: &mut BTreeMap<String, Vec<u8>>) -> Result<()> {
        for entry in fs::read_dir(dir)? {
            let path = entry?.path();
            if path.is_dir() {
                walk(root, &path, acc)?;
            } else {
                let rel = path.strip_prefix(root).unwrap_or(&path).to_string_lossy().into_owned();
                acc.insert(rel, fs::read(&path)?);
            }
        }
        Ok(())
    }
    let mut acc = BTreeMap::new();
    walk(root, root, &mut acc)?;
    Ok(acc)
}

fn setup(cfg: &RunConfig, potential: &PotentialSpec) -> Result<(Grid, SplitPotential)> {
    let grid = build_grid(&cfg.domain, cfg.h)?;
    let v = evaluate(potential, &grid, cfg.subsamples, cfg.clip)?;
    Ok((grid, v))
}

fn random_field(grid: &Grid, rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> Result<ScalarField> {
    grid.field((0..grid.len()).map(|_| rng.gen_range(lo..hi)).collect())
}

fn random_node(op: &SchroedingerOperator, rng: &mut ChaCha8Rng) -> usize {
    let active: Vec<usize> = (0..op.active().len()).filter(|&k| op.is_active(k)).collect();
    active[rng.gen_range(0..active.len())]
}

fn random_measure(grid: &Grid, op: &SchroedingerOperator, rng: &mut ChaCha8Rng) -> Result<DiscreteMeasure> {
    let mut nu = grid.density(random_field(grid, rng, -1.0, 1.0)?)?;
    for _ in 0..3 {
        let node = random_node(op, rng);
        nu = nu.with_atom(node, rng.gen_range(-1.0..1.0));
    }
    Ok(nu)
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn torsion_oracle(cfg: &RunConfig, dir: &ArtifactDir, c: &Checker) -> Result<Vec<Check>> {
    let (grid, v) = setup(cfg, &cfg.potential)?;
    let op = SchroedingerOperator::positive(&grid, &v)?;
    let zeta = variational::torsion(&op, &grid)?.field;
    let exact = grid.coords().iter().map(|&p| oracle::torsion_exact(&cfg.domain, p)).collect::<Result<Vec<_>>>()?;
    let ball_err = max_abs_diff(&zeta.values, &exact);
    dir.write_field("torsion_ball.csv", &grid, &zeta)?;

    let square = build_grid(&DomainSpec::unit_square(), 1.0 / 128.0)?;
    let sq = variational::torsion(&SchroedingerOperator::laplacian(&square)?, &square)?.field;
    let center = square.nearest_node([0.5, 0.5]);
    let series = oracle::rectangle_torsion(1.0, 1.0, 0.5, 0.5, 50);
    let square_err = (sq.values[center] - series).abs();
    dir.write_json("result.json", &json!({ "ball_max_error": ball_err, "square_center": sq.values[center], "series": series }))?;
    Ok(vec![c.at_most("ball_max_error", ball_err, TORSION_BALL_TOL), c.at_most("square_center_error", square_err, TORSION_SQUARE_TOL)])
}

fn eigen_oracle(cfg: &RunConfig, dir: &ArtifactDir, c: &Checker) -> Result<Vec<Check>> {
    let (grid, v) = setup(cfg, &cfg.potential)?;
    let base = variational::rayleigh_lambda1(&SchroedingerOperator::signed(&grid, &v)?, &grid, None, None)?;
    let exact = 2.0 * std::f64::consts::PI.powi(2);
    let rel = (base.lambda1 - exact).abs() / exact;
    let shift = 3.7;
    let shifted_spec = cfg.potential.clone().plus(PotentialSpec::Constant { value: shift });
    let vs = evaluate(&shifted_spec, &grid, cfg.subsamples, cfg.clip)?;
    let shifted = variational::rayleigh_lambda1(&SchroedingerOperator::signed(&grid, &vs)?, &grid, None, None)?;
    let shift_gap = (shifted.lambda1 - base.lambda1 - shift).abs();
    dir.write_json("result.json", &json!({ "lambda1": base.lambda1, "shifted": shifted.lambda1, "shift": shift }))?;
    Ok(vec![c.at_most("lambda1_relative_error", rel, EIGEN_REL_TOL), c.at_most("shift_gap", shift_gap, SHIFT_TOL)])
}

fn discrete_identities(cfg: &RunConfig, dir: &ArtifactDir, c: &Checker) -> Result<Vec<Check>> {
    const TRIALS: usize = 100;
    let (grid, v) = setup(cfg, &cfg.potential)?;
    let op = SchroedingerOperator::positive(&grid, &v)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let zeta = variational::torsion(&op, &grid)?.field;
    let (mut recip, mut sym, mut repr, mut ground): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    for _ in 0..TRIALS {
        let f = random_field(&grid, &mut rng, -1.0, 1.0)?;
        let g = random_field(&grid, &mut rng, -1.0, 1.0)?;
        recip = recip.max(variational::reciprocity_check(&op, &grid, &f, &g)?);

        let (x, y) = (random_node(&op, &mut rng), random_node(&op, &mut rng));
        let gx = variational::green_column(&op, &grid, x)?.field;
        let gy = variational::green_column(&op, &grid, y)?.field;
        let (a, b) = (gx.values[y], gy.values[x]);
        sym = sym.max((a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE));

        let nu = random_measure(&grid, &op, &mut rng)?;
        let sample = random_node(&op, &mut rng);
        repr = repr.max(variational::representation_check(&op, &grid, &nu, &[sample])?);

        let xi = grid.field((0..grid.len()).map(|k| if op.is_active(k) { rng.gen_range(-1.0..1.0) } else { 0.0 }).collect())?;
        ground = ground.max(variational::ground_state_identity(&op, &grid, &zeta, &xi)?.relative_gap);
    }
    dir.write_json("result.json", &json!({ "reciprocity": recip, "green_symmetry": sym, "representation": repr, "ground_state": ground, "trials": TRIALS }))?;
    Ok(vec![
        c.at_most("reciprocity", recip, IDENTITY_TOL),
        c.at_most("green_symmetry", sym, IDENTITY_TOL),
        c.at_most("representation", repr, IDENTITY_TOL),
        c.at_most("ground_state_identity", ground, GROUND_STATE_TOL),
    ])
}

fn zero_set(cfg: &RunConfig, potential: &PotentialSpec) -> Result<(Grid, decomposition::DecompositionResult)> {
    let (grid, v) = setup(cfg, potential)?;
    let op = SchroedingerOperator::positive(&grid, &v)?;
    let zeta = variational::torsion(&op, &grid)?.field;
    let dec = detect_s(&grid, &zeta, &v.hard, cfg.theta_rel)?;
    Ok((grid, dec))
}

fn zero_set_catalog(cfg: &RunConfig, dir: &ArtifactDir, c: &Checker) -> Result<Vec<Check>> {
    let h = cfg.h;
    let a = [0.25, 0.1];
    let omega = Disk::new([0.0, 0.0], 0.5);
    let mut checks = Vec::new();
    let mut summary = BTreeMap::new();

    let (g, dec) = zero_set(cfg, &PotentialSpec::HardyPoint { center: a, kappa: 1.0 })?;
    let far = dec.s_nodes().iter().map(|&k| grid::dist(g.coord(k), a)).fold(0.0, f64::max);
    checks.push(c.holds("hardy_point_s_nonempty", dec.s_size() > 0));
    checks.push(c.at_most("hardy_point_s_radius_over_h", far / h, std::f64::consts::SQRT_2));
    checks.push(c.equals("hardy_point_components", dec.component_count, 1));
    summary.insert("hardy_point", dec.summary_json());

    let (g, dec) = zero_set(cfg, &PotentialSpec::DistBoundarySq { region: omega })?;
    let s = dec.s_nodes();
    let off_circle = s.iter().map(|&k| omega.boundary_distance(g.coord(k))).fold(0.0, f64::max);
    let uncovered = (0..720)
        .map(|i| {
            let t = i as f64 * std::f64::consts::PI / 360.0;
            let p = [omega.radius * t.cos(), omega.radius * t.sin()];
            s.iter().map(|&k| grid::dist(g.coord(k), p)).fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max);
    checks.push(c.at_most("dist_boundary_sq_hausdorff_over_h", off_circle.max(uncovered) / h, 2.0));
    checks.push(c.equals("dist_boundary_sq_components", dec.component_count, 2));
    summary.insert("dist_boundary_sq", dec.summary_json());
    dir.write_bytes("dist_boundary_sq_labels.pgm", &dec.label_pgm(&g))?;

    let (g, dec) = zero_set(cfg, &PotentialSpec::DistSetSq { region: omega })?;
    let missing = (0..g.len())
        .filter(|&k| omega.contains(g.coord(k)) && omega.boundary_distance(g.coord(k)) > h && !dec.s_mask[k])
        .count();
    checks.push(c.equals("dist_set_sq_interior_missing", missing, 0));
    summary.insert("dist_set_sq", dec.summary_json());

    let (g, dec) = zero_set(cfg, &PotentialSpec::InversePowerAxis { alpha: 1.5 })?;
    checks.push(c.equals("axis_1_5_components", dec.component_count, 2));
    summary.insert("inverse_power_axis_1_5", dec.summary_json());
    dir.write_bytes("axis_1_5_labels.pgm", &dec.label_pgm(&g))?;

    let (_, dec) = zero_set(cfg, &PotentialSpec::InversePowerAxis { alpha: 0.5 })?;
    checks.push(c.equals("axis_0_5_s_size", dec.s_size(), 0));
    checks.push(c.equals("axis_0_5_components", dec.component_count, 1));
    summary.insert("inverse_power_axis_0_5", dec.summary_json());

    dir.write_json("result.json", &summary)?;
    Ok(checks)
}

/// Potentials with barriers that split the disk of radius one.
pub fn barrier_catalog() -> Vec<PotentialSpec> {
    let omega = Disk::new([0.0, 0.0], 0.5);
    vec![
        PotentialSpec::HardyPoint { center: [0.25, 0.1], kappa: 1.0 },
        PotentialSpec::DistBoundarySq { region: omega },
        PotentialSpec::DistSetSq { region: omega },
        PotentialSpec::InversePowerAxis { alpha: 1.5 },
        PotentialSpec::BrezisMarcus { region: omega },
    ]
}

fn exact_localization(cfg: &RunConfig, dir: &ArtifactDir, c: &Checker) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut local_gap: f64 = 0.0;
    let mut recon_gap: f64 = 0.0;
    let mut rows = Vec::new();
    for spec in barrier_catalog() {
        let (grid, v) = setup(cfg, &spec)?;
        let op = SchroedingerOperator::positive(&grid, &v)?;
        let dec = components(&grid, &v.hard);
        for _ in 0..3 {
            let nu = random_measure(&grid, &op, &mut rng)?;
            let u = op.solve_measure(&grid, &nu)?.field;
            let scale = u.sup_abs().max(f64::MIN_POSITIVE);
            for id in 1..=dec.component_count {
                let ui = op.solve_measure(&grid, &decomposition::restrict_measure(&nu, &dec, id)?)?.field;
                let cut = decomposition::cutoff(&u, &dec, id)?;
                local_gap = local_gap.max(max_abs_diff(&ui.values, &cut.values) / scale);
            }
            recon_gap = recon_gap.max(decomposition::reconstruction_gap(&u, &dec)? / scale);
        }
        rows.push(json!({ "potential": spec.name(), "components": dec.component_count }));
    }
    dir.write_json("result.json", &json!({ "potentials": rows, "localization_gap": local_gap, "reconstruction_gap": recon_gap }))?;
    Ok(vec![c.at_most("localization_gap", local_gap, LOCALIZATION_TOL), c.at_most("reconstruction_gap", recon_gap, 0.0)])
}

/// A (potential, datum) pair of the monotone-scheme catalog.
#[derive(Debug, Clone)]
pub struct SchemeCase {
    pub name: &'static str,
    pub domain: DomainSpec,
    pub h: f64,
    pub potential: PotentialSpec,
    /// Density level, or a uniform random density in `[0, level)` when `random`.
    pub level: f64,
    pub random: bool,
    pub atom: Option<([f64; 2], f64)>,
}

/// Ten pairs with `V-` below the Dirichlet threshold so the signed minimizer exists.
pub fn scheme_catalog(domain: &DomainSpec, h: f64) -> Vec<SchemeCase> {
    let omega = Disk::new([0.0, 0.0], 0.5);
    let c = |v: f64| PotentialSpec::Constant { value: v };
    let ball = DomainSpec::radial_ball(3, 1.0);
    let rh = 1.0 / 100.0;
    let case = |name, domain: &DomainSpec, h, potential, level, random, atom| SchemeCase {
        name,
        domain: domain.clone(),
        h,
        potential,
        level,
        random,
        atom,
    };
    vec![
        case("constant", domain, h, c(-1.0), 1.0, false, None),
        case("constant_random", domain, h, c(-3.0), 2.0, true, None),
        case("hardy_point", domain, h, PotentialSpec::HardyPoint { center: [0.25, 0.1], kappa: 1.0 }.plus(c(-3.0)), 1.0, false, None),
        case("axis_1_5", domain, h, PotentialSpec::InversePowerAxis { alpha: 1.5 }.plus(c(-2.0)), 1.0, false, None),
        case("axis_0_5", domain, h, PotentialSpec::InversePowerAxis { alpha: 0.5 }.plus(c(-4.0)), 1.0, true, None),
        case("dist_boundary_sq", domain, h, PotentialSpec::DistBoundarySq { region: omega }.plus(c(-2.0)), 1.0, false, Some(([0.1, 0.1], 0.05))),
        case("dist_set_sq", domain, h, PotentialSpec::DistSetSq { region: omega }.plus(c(-3.0)), 1.0, false, None),
        case("brezis_marcus", domain, h, PotentialSpec::BrezisMarcus { region: omega }, 1.0, false, None),
        case("hardy_signed", &ball, rh, PotentialSpec::HardySigned { alpha: 0.6 }, 1.0, false, None),
        case("radial_power", &ball, rh, PotentialSpec::InversePowerRadial { beta: 1.0 }.plus(c(-5.0)), 1.0, false, None),
    ]
}

fn monotone_scheme(cfg: &RunConfig, dir: &ArtifactDir, c: &Checker) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (mut violation, mut upper, mut limit, mut super_gap): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    let mut unconverged = 0;
    let mut rows = Vec::new();
    for case in scheme_catalog(&cfg.domain, cfg.h) {
        let grid = build_grid(&case.domain, case.h)?;
        let v = evaluate(&case.potential, &grid, cfg.subsamples, cfg.clip)?;
        let density = if case.random { random_field(&grid, &mut rng, 0.0, case.level)? } else { grid.constant(case.level) };
        let mut mu = grid.density(density)?;
        if let Some((at, mass)) = case.atom {
            mu = mu.with_atom(grid.nearest_node(at), mass);
        }
        let theta = SchroedingerOperator::signed(&grid, &v)?.solve_measure(&grid, &mu)?.field;
        let options = SchemeOptions {
            n_max: cfg.scheme.n_max,
            tol: cfg.scheme.tol,
            upper: Some(theta.clone()),
            ..SchemeOptions::default()
        };
        let trace = iteration::monotone_scheme(&grid, &v, &mu, &options)?;
        let scale = theta.sup_abs().max(f64::MIN_POSITIVE);
        let case_violation = trace.steps.iter().map(|s| s.violation).fold(0.0, f64::max);
        let case_limit = max_abs_diff(&trace.field.values, &theta.values) / scale;
        violation = violation.max(case_violation);
        upper = upper.max(trace.upper_violation.unwrap_or(0.0));
        limit = limit.max(case_limit);
        unconverged += usize::from(!trace.converged);

        // ψ = level ζ / (1 - c max ζ) with (L + V+) ζ = 1 is a supersolution when V- <= c and c max ζ < 1
        let pos = SchroedingerOperator::positive(&grid, &v)?;
        let zeta = variational::torsion(&pos, &grid)?.field;
        let cbound = v.vminus.max();
        let applicable = case.atom.is_none() && cbound * zeta.max() < 1.0;
        if applicable {
            let psi = zeta.map(|z| case.level * z / (1.0 - cbound * zeta.max()));
            let excess = theta.values.iter().zip(&psi.values).map(|(t, p)| t - p).fold(0.0, f64::max);
            super_gap = super_gap.max(excess / scale);
        }
        rows.push(json!({
            "case": case.name,
            "iterations": trace.iterations(),
            "converged": trace.converged,
            "violation": case_violation,
            "limit_gap": case_limit,
            "supersolution_applicable": applicable,
        }));
        dir.write_text(&format!("{}_trace.csv", case.name), &trace.csv())?;
    }
    dir.write_json("result.json", &rows)?;
    Ok(vec![
        c.at_most("monotonicity_violation", violation, MONOTONE_TOL),
        c.at_most("upper_violation", upper, UPPER_TOL),
        c.at_most("supersolution_excess", super_gap, UPPER_TOL),
        c.equals("unconverged_cases", unconverged, 0),
        c.at_most("limit_gap", limit, LIMIT_TOL),
    ])
}

fn weight_construction(cfg: &RunConfig, dir: &ArtifactDir, c: &Checker) -> Result<Vec<Check>> {
    let (grid, v) = setup(cfg, &cfg.potential)?;
    let pos = SchroedingerOperator::positive(&grid, &v)?;
    let zeta = variational::torsion(&pos, &grid)?.field;
    let dec = detect_s(&grid, &zeta, &v.hard, cfg.theta_rel)?;
    let q = iteration::calibrate_q(&grid, &v.positive_part(), cfg.q.alpha, cfg.q.probe_count, cfg.seed)?;
    let mu = cfg.datum.build(&grid, cfg.seed)?;
    let options = WeightOptions {
        w_cap: cfg.weight.w_cap,
        scheme: SchemeOptions { n_max: cfg.scheme.n_max, tol: cfg.scheme.tol, ..SchemeOptions::default() },
        certify_tol: CERTIFY_TOL * c.scale,
    };
    let mut checks = Vec::new();
    let mut rows = Vec::new();
    for id in 1..=dec.component_count {
        let w = iteration::build_weight(&grid, &v, &mu, &dec, id, &q, &options)?;
        let mask = dec.component_mask(id)?;
        let wmin = (0..grid.len()).filter(|&k| mask[k]).map(|k| w.weight.values[k]).fold(f64::INFINITY, f64::min);
        checks.push(c.at_least(&format!("component_{id}_weighted_lambda"), w.certified_lambda, 1.0, CERTIFY_TOL));
        checks.push(c.holds(&format!("component_{id}_weight_positive"), wmin > 0.0));
        dir.write_field(&format!("weight_{id}.csv"), &grid, &w.weight)?;
        rows.push(json!({ "component": id, "certified_lambda": w.certified_lambda, "min_weight": wmin, "C": w.c, "scheme_iterations": w.scheme_iterations }));
    }

    // supercritical constant potential: certification must fail with a negative-energy direction
    let square = build_grid(&DomainSpec::unit_square(), 1.0 / 32.0)?;
    let lambda0 = variational::rayleigh_lambda1(&SchroedingerOperator::laplacian(&square)?, &square, None, None)?.lambda1;
    let vc = evaluate(&PotentialSpec::Constant { value: -1.01 * lambda0 }, &square, cfg.subsamples, cfg.clip)?;
    let zc = variational::torsion(&SchroedingerOperator::positive(&square, &vc)?, &square)?.field;
    let dc = detect_s(&square, &zc, &vc.hard, cfg.theta_rel)?;
    let centre = dc
        .component_of(square.nearest_node([0.5, 0.5]))
        .ok_or_else(|| LabError::Precondition("centre of the square fell in S".into()))?;
    let qc = iteration::calibrate_q(&square, &vc.positive_part(), cfg.q.alpha, cfg.q.probe_count, cfg.seed)?;
    let short = WeightOptions { scheme: SchemeOptions::default(), ..options };
    let wc = iteration::build_weight(&square, &vc, &square.density(square.constant(1.0))?, &dc, centre, &qc, &short)?;
    let energy = match &wc.certificate {
        Some(cert) => SchroedingerOperator::signed(&square, &vc)?.energy(&cert.values),
        None => f64::NAN,
    };
    checks.push(c.holds("supercritical_not_certified", !wc.certified));
    checks.push(c.holds("supercritical_certificate_negative_energy", energy < 0.0));
    rows.push(json!({ "supercritical_lambda": wc.certified_lambda, "certificate_energy": energy, "lambda0": lambda0 }));
    dir.write_json("result.json", &rows)?;
    Ok(checks)
}

fn defect_measure(cfg: &RunConfig, dir: &ArtifactDir, c: &Checker) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let mut out = BTreeMap::new();
    for alpha in [1.5, 2.5] {
        let spec = PotentialSpec::InversePowerAxis { alpha };
        let mut taus = Vec::new();
        let mut worst_excess: f64 = 0.0;
        for &h in &cfg.defect.widths {
            let grid = build_grid(&cfg.domain, h)?;
            let v = evaluate(&spec, &grid, cfg.subsamples, cfg.clip)?;
            let zeta = variational::torsion(&SchroedingerOperator::positive(&grid, &v)?, &grid)?.field;
            let dec = detect_s(&grid, &zeta, &v.hard, cfg.theta_rel)?;
            let est = defect_estimate(&grid, &zeta, &dec)?;
            // comparison with the slab {|x1| < 1}, which contains the disk
            let slab = oracle::slab_defect(alpha, h)?.tau;
            let densest = est.densities.iter().map(|d| d.1).fold(0.0, f64::max);
            worst_excess = worst_excess.max((densest - slab) / slab.max(f64::MIN_POSITIVE));
            taus.push((h, est.tau_mass, densest, slab));
        }
        let label = if alpha < 2.0 { "alpha_1_5" } else { "alpha_2_5" };
        let fine = oracle::slab_defect(alpha, 1e-5)?.tau;
        let (h_last, _, _, slab_last) = *taus.last().ok_or_else(|| LabError::Config("defect.widths is empty".into()))?;
        if alpha < 2.0 {
            let first = taus[0].1;
            let (lo, hi) = taus.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), t| (lo.min(t.1), hi.max(t.1)));
            checks.push(c.holds("alpha_1_5_tau_positive", lo > 0.0));
            checks.push(c.at_most("alpha_1_5_tau_spread", (hi - lo) / first, DEFECT_SPREAD));
            checks.push(c.at_most("alpha_1_5_slab_fine_vs_coarse", (fine - slab_last).abs() / fine, DEFECT_SPREAD));
        } else {
            let worst = taus.windows(2).map(|w| w[1].1 / w[0].1).fold(0.0, f64::max);
            checks.push(c.at_most("alpha_2_5_tau_halving_ratio", worst, DEFECT_DECAY));
            let halvings = (h_last / 1e-5).log2();
            checks.push(c.at_most("alpha_2_5_slab_fine_over_decay", fine / (slab_last * DEFECT_DECAY.powf(halvings)), 1.0));
        }
        checks.push(c.at_most(&format!("{label}_density_over_slab"), worst_excess, 1e-9));
        let mut csv = String::from("h,tau_mass,max_density,slab_tau\n");
        for (h, t, d, s) in &taus {
            let _ = writeln!(csv, "{h:.12e},{t:.12e},{d:.12e},{s:.12e}");
        }
        dir.write_text(&format!("{label}.csv"), &csv)?;
        out.insert(label, json!({ "trace": taus, "slab_fine": fine }));
    }
    dir.write_json("result.json", &out)?;
    Ok(checks)
}

fn brezis_marcus(cfg: &RunConfig, dir: &ArtifactDir, c: &Checker) -> Result<Vec<Check>> {
    let omega = match &cfg.potential {
        PotentialSpec::BrezisMarcus { region } => *region,
        other => return Err(LabError::Config(format!("potential must be brezis_marcus, got {}", other.name()))),
    };
    let (grid, v) = setup(cfg, &cfg.potential)?;
    let mask: Vec<bool> = grid.coords().iter().map(|&p| omega.contains(p)).collect();
    let spec = variational::rayleigh_lambda1(&SchroedingerOperator::signed(&grid, &v)?, &grid, None, Some(&mask))?;
    dir.write_json("result.json", &json!({ "lambda1": spec.lambda1, "diameter": 2.0 * omega.radius, "probes": spec.probes }))?;
    Ok(vec![c.at_least("restricted_lambda1", spec.lambda1, BREZIS_MARCUS_BOUND / (2.0 * omega.radius).powi(2), 0.0)])
}

fn hardy_family(cfg: &RunConfig, dir: &ArtifactDir, c: &Checker) -> Result<Vec<Check>> {
    let o = &cfg.oracle;
    let fam = oracle::HardyFamily::new(o.dimension, o.alpha, o.beta)?;
    let residuals = o
        .residual_widths
        .iter()
        .map(|&h| oracle::radial_residual(o.dimension, o.alpha, o.beta, h))
        .collect::<Result<Vec<_>>>()?;
    let ratios: Vec<f64> = residuals.windows(2).map(|w| w[0] / w[1]).collect();
    let (rlo, rhi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &r| (lo.min(r), hi.max(r)));

    let radii: Vec<f64> = (1..=o.sweep_points).map(|i| i as f64 / (o.sweep_points + 1) as f64).collect();
    let mut fmin = f64::INFINITY;
    let mut below: f64 = 0.0;
    for &r in &radii {
        let f = fam.f(r)?;
        fmin = fmin.min(f);
        below = below.max((oracle::f_lower_bound(o.dimension, o.alpha, o.beta, r)? - f) / f.abs().max(1.0));
    }
    dir.write_text("sweep.csv", &fam.sweep_csv(&radii)?)?;

    let n = 4;
    let critical = (n as f64 - 2.0) / 2.0;
    let scan = oracle::truncation_energy_scan(n, critical, &o.scan_ks, o.scan_h)?;
    let (elo, ehi) = scan.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), r| (lo.min(r.energy), hi.max(r.energy)));
    let growth = scan.windows(2).map(|w| w[1].dirichlet / w[0].dirichlet).fold(f64::INFINITY, f64::min);
    let mut csv = String::from("k,dirichlet,potential,energy,log_law\n");
    for r in &scan {
        let _ = writeln!(csv, "{},{:.12e},{:.12e},{:.12e},{:.12e}", r.k, r.dirichlet, r.potential, r.energy, oracle::critical_dirichlet_growth(n, r.k));
    }
    dir.write_text("critical_scan.csv", &csv)?;
    dir.write_json("result.json", &json!({ "residuals": residuals, "ratios": ratios, "f_min": fmin, "scan": scan }))?;
    Ok(vec![
        c.within("residual_min_halving_ratio", rlo, RESIDUAL_RATIO.0, RESIDUAL_RATIO.1),
        c.within("residual_max_halving_ratio", rhi, RESIDUAL_RATIO.0, RESIDUAL_RATIO.1),
        c.holds("f_positive", fmin > 0.0),
        c.at_most("f_below_lower_bound", below, LOWER_BOUND_TOL),
        c.at_most("critical_energy_spread", (ehi - elo) / ehi, SCAN_SPREAD),
        c.at_least("critical_dirichlet_decade_growth", growth, DIRICHLET_DECADE_GROWTH, 0.0),
    ])
}

fn kato_estimator(cfg: &RunConfig, dir: &ArtifactDir, c: &Checker) -> Result<Vec<Check>> {
    let (grid, v1) = setup(cfg, &cfg.potential)?;
    let dimension = grid.dimension();
    let r1 = kato_report(&v1, &grid, &cfg.kato.deltas, dimension, cfg.subsamples, cfg.kato.fraction)?;
    let v2 = evaluate(&PotentialSpec::InversePowerRadial { beta: 2.0 }, &grid, cfg.subsamples, cfg.clip)?;
    let r2 = kato_report(&v2, &grid, &cfg.kato.deltas, dimension, cfg.subsamples, cfg.kato.fraction)?;
    dir.write_text("beta_1.csv", &r1.csv())?;
    dir.write_text("beta_2.csv", &r2.csv())?;
    let ratios: Vec<f64> = r1.rows.windows(2).map(|w| w[1].1 / w[0].1).collect();
    let (rlo, rhi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &r| (lo.min(r), hi.max(r)));
    let floor = r2.rows.iter().map(|r| r.1).fold(f64::INFINITY, f64::min) / r2.rows[0].1;
    dir.write_json("result.json", &json!({ "beta_1": r1, "beta_2": r2, "ratios": ratios }))?;
    Ok(vec![
        c.within("beta_1_min_ratio", rlo, KATO_RATIO.0, KATO_RATIO.1),
        c.within("beta_1_max_ratio", rhi, KATO_RATIO.0, KATO_RATIO.1),
        c.at_least("beta_2_floor", floor, KATO_FLOOR, 0.0),
        c.holds("beta_1_vanishing", r1.vanishing),
        c.holds("beta_2_not_vanishing", !r2.vanishing),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checker_scales_tolerances() {
        let c = Checker { scale: 1.0 };
        assert!(c.at_most("x", 0.5, 1.0).passed);
        assert!(!Checker { scale: 0.1 }.at_most("x", 0.5, 1.0).passed);
        assert!(c.at_least("y", 1.0 - 1e-7, 1.0, 1e-6).passed);
        assert!(!c.within("z", 2.0, 3.0, 5.0).passed);
    }

    #[test]
    fn report_csv_rows() {
        let c = Checker { scale: 1.0 };
        let report = SuiteReport {
            criteria: vec![finish(1, Ok(vec![c.at_most("err", 2.0, 1.0)]), None), finish(2, Err(LabError::Indefinite), None)],
        };
        let csv = report.csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "criterion,status,value,expected,tolerance");
        assert!(lines[1].starts_with("1:err,FAIL,"));
        assert!(lines[2].starts_with("2:error,FAIL"));
        assert!(!report.all_passed());
    }

    #[test]
    fn bundled_configs_parse() {
        let set = ConfigSet::load(&bundled_config_dir(), &[]).unwrap();
        assert_eq!(set.configs.len(), 12);
    }
}
