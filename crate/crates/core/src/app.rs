//! Command-line front end: `torsionlab <command> --config PATH --out DIR [--key=value ...]`.
//!
//! Exit codes: 0 success, 2 configuration or precondition error, 3 failed
//! certification or numerical failure (artifacts are still written).

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{EigenRegion, RunConfig};
use crate::decomposition::{self, components, detect_s, DecompositionResult};
use crate::error::{LabError, Result};
use crate::export::{field_pgm, ArtifactDir};
use crate::grid::{build_grid, integrate, Grid};
use crate::iteration::{self, SchemeOptions, WeightOptions};
use crate::oracle;
use crate::potential::{evaluate, kato_report, SplitPotential};
use crate::variational::{self, SchroedingerOperator};
use crate::verify;

pub const COMMANDS: &[(&str, &str)] = &[
    ("torsion", "torsion function ζ1 of -Δ + V+ with hard nodes excised"),
    ("zeroset", "zero set S = {ζ1 = 0} (hard nodes plus torsion threshold)"),
    ("decompose", "components of Ω ∖ S, per-component cutoffs and localization gaps"),
    ("green", "Green columns G_x, symmetry and ∫G_x = ζ1(x)"),
    ("eigen", "smallest eigenvalue of -Δ + V (optionally on the inner region)"),
    ("poincare", "ground-state transform identity and supersolution/nonnegativity agreement"),
    ("iterate", "monotone truncation scheme u_n for the configured datum"),
    ("weight", "Poincaré weight w_i = Q(z_i)/ũ on each component and its certification"),
    ("kato", "Kato modulus η(δ) over the configured radii and vanishing verdict"),
    ("oracle", "Hardy family sweep, radial residuals and truncation energy scan"),
    ("defect", "defect mass carried by S over a refinement sequence"),
    ("verify-all", "run the acceptance suite over a config set directory"),
];

pub fn usage() -> String {
    let mut s = String::from(
        "usage: torsionlab <command> [--config PATH] [--out DIR] [--key=value ...]\n\n\
         Overrides use dotted keys (e.g. --scheme.n_max=500); values parse as JSON,\n\
         falling back to strings. For verify-all, --config names a config set directory.\n\n\
         commands:\n",
    );
    for (name, about) in COMMANDS {
        s.push_str(&format!("  {name:<11} {about}\n"));
    }
    s.push_str("\nexit codes: 0 success, 2 configuration/precondition error, 3 certification or numerical failure\n");
    s
}

/// Parsed command line.
#[derive(Debug, Clone, PartialEq)]
pub struct Invocation {
    pub command: String,
    pub config: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub overrides: Vec<(String, String)>,
}

pub fn parse_args(args: &[String]) -> Result<Invocation> {
    let mut it = args.iter();
    let command = it.next().ok_or_else(|| LabError::Config("missing command".into()))?.clone();
    if !COMMANDS.iter().any(|(c, _)| *c == command) {
        return Err(LabError::Config(format!("unknown command `{command}`")));
    }
    let mut inv = Invocation { command, config: None, out: None, overrides: Vec::new() };
    while let Some(arg) = it.next() {
        let body = arg
            .strip_prefix("--")
            .ok_or_else(|| LabError::Config(format!("unexpected argument `{arg}`")))?;
        let (key, value) = match body.split_once('=') {
            Some((k, v)) => (k.to_string(), v.to_string()),
            None => {
                let v = it.next().ok_or_else(|| LabError::Config(format!("missing value for --{body}")))?;
                (body.to_string(), v.clone())
            }
        };
        match key.as_str() {
            "config" => inv.config = Some(PathBuf::from(value)),
            "out" => inv.out = Some(PathBuf::from(value)),
            _ => inv.overrides.push((key, value)),
        }
    }
    Ok(inv)
}

/// Entry point used by the binary; returns the process exit code.
pub fn main_with_args(args: &[String]) -> i32 {
    if args.is_empty() || args.iter().any(|a| a == "--help" || a == "-h" || a == "help") {
        print!("{}", usage());
        return if args.is_empty() { 2 } else { 0 };
    }
    let inv = match parse_args(args) {
        Ok(inv) => inv,
        Err(e) => {
            eprintln!("error: {e}\n\n{}", usage());
            return 2;
        }
    };
    match run(&inv) {
        Ok(outcome) => {
            for line in &outcome.messages {
                println!("{line}");
            }
            if outcome.passed {
                0
            } else {
                eprintln!("certification failed");
                3
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &LabError) -> i32 {
    match e {
        LabError::SpectrumUnbounded { .. }
        | LabError::MonotonicityViolated { .. }
        | LabError::NotConverged { .. }
        | LabError::Indefinite
        | LabError::CalibrationFailed => 3,
        _ => 2,
    }
}

/// Result of a command run.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub passed: bool,
    pub summary: Value,
    pub messages: Vec<String>,
}

pub fn run(inv: &Invocation) -> Result<Outcome> {
    if inv.command == "verify-all" {
        let dir = inv.config.clone().unwrap_or_else(verify::bundled_config_dir);
        let out = inv.out.clone().unwrap_or_else(|| PathBuf::from("verify-out"));
        let report = verify::run_suite(&dir, &inv.overrides, &out)?;
        let messages = report.lines();
        return Ok(Outcome { passed: report.all_passed(), summary: serde_json::to_value(&report)?, messages });
    }
    let cfg = RunConfig::load_with_overrides(inv.config.as_deref(), &inv.overrides)?;
    let out = inv
        .out
        .clone()
        .or_else(|| cfg.output_dir.clone().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    run_command(&inv.command, &cfg, &out)
}

/// Run one command with a parsed configuration, writing artifacts under `out`.
pub fn run_command(command: &str, cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| LabError::Config(format!("cannot start {} workers: {e}", cfg.workers)))?;
    pool.install(|| {
        let dir = ArtifactDir::create(out)?;
        let clock = Instant::now();
        let mut ctx = Context { cfg, dir, work: Work::default() };
        let (passed, results) = match command {
            "torsion" => cmd_torsion(&mut ctx)?,
            "zeroset" => cmd_zeroset(&mut ctx)?,
            "decompose" => cmd_decompose(&mut ctx)?,
            "green" => cmd_green(&mut ctx)?,
            "eigen" => cmd_eigen(&mut ctx)?,
            "poincare" => cmd_poincare(&mut ctx)?,
            "iterate" => cmd_iterate(&mut ctx)?,
            "weight" => cmd_weight(&mut ctx)?,
            "kato" => cmd_kato(&mut ctx)?,
            "oracle" => cmd_oracle(&mut ctx)?,
            "defect" => cmd_defect(&mut ctx)?,
            other => return Err(LabError::Config(format!("unknown command `{other}`"))),
        };
        let mut timings = serde_json::to_value(&ctx.work)?;
        if cfg.record_wall_clock {
            timings["wall_seconds"] = json!(clock.elapsed().as_secs_f64());
        }
        let summary = json!({
            "command": command,
            "config_hash": cfg.hash(),
            "config": cfg,
            "passed": passed,
            "results": results,
            "timings": timings,
        });
        ctx.dir.write_json("summary.json", &summary)?;
        let messages = vec![format!("{command}: {}", if passed { "ok" } else { "failed" })];
        Ok(Outcome { passed, summary, messages })
    })
}

/// Deterministic work counters reported in place of wall-clock timings.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Work {
    pub solves: usize,
    pub iterations: usize,
}

struct Context<'a> {
    cfg: &'a RunConfig,
    dir: ArtifactDir,
    work: Work,
}

impl Context<'_> {
    fn setup(&self) -> Result<(Grid, SplitPotential)> {
        let grid = build_grid(&self.cfg.domain, self.cfg.h)?;
        let v = evaluate(&self.cfg.potential, &grid, self.cfg.subsamples, self.cfg.clip)?;
        Ok((grid, v))
    }

    fn grid_stats(&self, grid: &Grid, v: &SplitPotential) -> Value {
        let mut d = grid.descriptor();
        d["hard_count"] = json!(v.hard_count());
        d["config_hash"] = json!(self.cfg.hash());
        d
    }

    fn torsion(&mut self, grid: &Grid, op: &SchroedingerOperator) -> Result<crate::grid::ScalarField> {
        let sol = variational::torsion(op, grid)?;
        self.count(sol.iterations);
        Ok(sol.field)
    }

    fn count(&mut self, iterations: usize) {
        self.work.solves += 1;
        self.work.iterations += iterations;
    }

    fn decomposition(&mut self, grid: &Grid, v: &SplitPotential) -> Result<(crate::grid::ScalarField, DecompositionResult)> {
        let op = SchroedingerOperator::positive(grid, v)?;
        let zeta = self.torsion(grid, &op)?;
        let dec = detect_s(grid, &zeta, &v.hard, self.cfg.theta_rel)?;
        Ok((zeta, dec))
    }
}

type CmdResult = Result<(bool, Value)>;

fn cmd_torsion(ctx: &mut Context) -> CmdResult {
    let (grid, v) = ctx.setup()?;
    let op = SchroedingerOperator::positive(&grid, &v)?;
    let zeta = ctx.torsion(&grid, &op)?;
    ctx.dir.write_field("torsion.csv", &grid, &zeta)?;
    ctx.dir.write_bytes("torsion.pgm", &field_pgm(&grid, &zeta)?)?;
    let mut res = json!({
        "grid": ctx.grid_stats(&grid, &v),
        "max": zeta.max(),
        "integral": integrate(&grid, &zeta)?,
        "nonnegative": zeta.min() >= 0.0,
    });
    let free = v.hard_count() == 0 && v.vplus.sup_abs() == 0.0 && v.vminus.sup_abs() == 0.0;
    if free && ctx.cfg.domain.inner_region().is_none() {
        let mut err: f64 = 0.0;
        for (k, c) in grid.coords().iter().enumerate() {
            err = err.max((zeta.values[k] - oracle::torsion_exact(&ctx.cfg.domain, *c)?).abs());
        }
        res["max_error_vs_closed_form"] = json!(err);
    }
    Ok((true, res))
}

fn cmd_zeroset(ctx: &mut Context) -> CmdResult {
    let (grid, v) = ctx.setup()?;
    let (_, dec) = ctx.decomposition(&grid, &v)?;
    let mut csv = String::from("node,x,y,hard\n");
    for k in dec.s_nodes() {
        let c = grid.coord(k);
        csv.push_str(&format!("{k},{:.12e},{:.12e},{}\n", c[0], c[1], dec.hard[k]));
    }
    ctx.dir.write_text("zeroset.csv", &csv)?;
    let mut res = dec.summary_json();
    res["grid"] = ctx.grid_stats(&grid, &v);
    // resolution check for spurious splits of the threshold tier
    if let Ok(fine) = build_grid(&ctx.cfg.domain, ctx.cfg.h / 2.0) {
        let vf = evaluate(&ctx.cfg.potential, &fine, ctx.cfg.subsamples, ctx.cfg.clip)?;
        let (_, df) = ctx.decomposition(&fine, &vf)?;
        res["component_count_half_h"] = json!(df.component_count);
    }
    Ok((true, res))
}

fn cmd_decompose(ctx: &mut Context) -> CmdResult {
    let (grid, v) = ctx.setup()?;
    let (zeta, dec) = ctx.decomposition(&grid, &v)?;
    ctx.dir.write_bytes("labels.pgm", &dec.label_pgm(&grid))?;
    ctx.dir.write_json("decomposition.json", &dec.summary_json())?;
    let nu = ctx.cfg.datum.build(&grid, ctx.cfg.seed)?;
    let op = SchroedingerOperator::positive(&grid, &v)?;
    let u = op.solve_measure(&grid, &nu)?;
    ctx.count(u.iterations);
    let hard_dec = components(&grid, &v.hard);
    let mut per = Vec::new();
    for id in 1..=dec.component_count {
        let c = decomposition::cutoff(&zeta, &dec, id)?;
        ctx.dir.write_field(&format!("cutoff_{id}.csv"), &grid, &c)?;
        let smp = decomposition::strong_max_principle_check(&grid, &u.field, &nu, &dec, id)?;
        per.push(json!({ "id": id, "size": dec.component_sizes[id - 1], "max_principle": smp }));
    }
    let mut loc_gap: f64 = 0.0;
    for id in 1..=hard_dec.component_count {
        let local = decomposition::restrict_measure(&nu, &hard_dec, id)?;
        let ui = op.solve_measure(&grid, &local)?;
        ctx.count(ui.iterations);
        let cut = decomposition::cutoff(&u.field, &hard_dec, id)?;
        let scale = u.field.sup_abs().max(f64::MIN_POSITIVE);
        for (a, b) in ui.field.values.iter().zip(&cut.values) {
            loc_gap = loc_gap.max((a - b).abs() / scale);
        }
    }
    let res = json!({
        "grid": ctx.grid_stats(&grid, &v),
        "decomposition": dec.summary_json(),
        "components": per,
        "reconstruction_gap": decomposition::reconstruction_gap(&u.field, &dec)?,
        "hard_components": hard_dec.component_count,
        "localization_gap": loc_gap,
    });
    Ok((true, res))
}

fn cmd_green(ctx: &mut Context) -> CmdResult {
    let (grid, v) = ctx.setup()?;
    let op = SchroedingerOperator::positive(&grid, &v)?;
    let zeta = ctx.torsion(&grid, &op)?;
    let nodes: Vec<usize> = ctx.cfg.green.points.iter().map(|&p| grid.nearest_node(p)).collect();
    let mut columns = Vec::new();
    for (i, &x) in nodes.iter().enumerate() {
        let g = variational::green_column(&op, &grid, x)?;
        ctx.count(g.iterations);
        ctx.dir.write_field(&format!("green_{i}.csv"), &grid, &g.field)?;
        columns.push(g.field);
    }
    let mut symmetry: f64 = 0.0;
    let mut integral_gap: f64 = 0.0;
    for i in 0..nodes.len() {
        let zi = zeta.values[nodes[i]];
        integral_gap = integral_gap.max((integrate(&grid, &columns[i])? - zi).abs() / zi.abs().max(f64::MIN_POSITIVE));
        for j in 0..nodes.len() {
            let (a, b) = (columns[i].values[nodes[j]], columns[j].values[nodes[i]]);
            symmetry = symmetry.max((a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE));
        }
    }
    let res = json!({
        "grid": ctx.grid_stats(&grid, &v),
        "nodes": nodes,
        "symmetry_gap": symmetry,
        "integral_gap": integral_gap,
        "nonnegative": columns.iter().all(|c| c.min() >= 0.0),
    });
    Ok((true, res))
}

fn cmd_eigen(ctx: &mut Context) -> CmdResult {
    let (grid, v) = ctx.setup()?;
    let op = SchroedingerOperator::signed(&grid, &v)?;
    let mask: Option<Vec<bool>> = match ctx.cfg.eigen.region {
        EigenRegion::All => None,
        EigenRegion::InnerRegion => {
            let disk = ctx
                .cfg
                .domain
                .inner_region()
                .ok_or_else(|| LabError::Config("eigen.region = inner_region needs domain.inner_region".into()))?;
            Some(grid.coords().iter().map(|&p| disk.contains(p)).collect())
        }
    };
    let spec = variational::rayleigh_lambda1(&op, &grid, None, mask.as_deref())?;
    ctx.count(spec.iterations);
    ctx.dir.write_field("eigenfield.csv", &grid, &spec.eigenfield)?;
    ctx.dir.write_bytes("eigenfield.pgm", &field_pgm(&grid, &spec.abs_eigenfield)?)?;
    let res = json!({
        "grid": ctx.grid_stats(&grid, &v),
        "lambda1": spec.lambda1,
        "residual": spec.residual,
        "iterations": spec.iterations,
        "probes": spec.probes,
    });
    Ok((true, res))
}

fn cmd_poincare(ctx: &mut Context) -> CmdResult {
    use rand::{Rng, SeedableRng};
    let (grid, v) = ctx.setup()?;
    let pos = SchroedingerOperator::positive(&grid, &v)?;
    let u = ctx.torsion(&grid, &pos)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(ctx.cfg.seed);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let xi = grid.field((0..grid.len()).map(|k| if pos.is_active(k) { rng.gen_range(-1.0..1.0) } else { 0.0 }).collect())?;
        let rep = variational::ground_state_identity(&pos, &grid, &u, &xi)?;
        worst = worst.max(rep.relative_gap);
    }
    let mut res = json!({ "grid": ctx.grid_stats(&grid, &v), "identity_gap": worst });
    let mut passed = worst <= 1e-10;
    if v.hard_count() == 0 {
        let signed = SchroedingerOperator::signed(&grid, &v)?;
        let aap = variational::aap_check(&signed, &grid, ctx.cfg.seed)?;
        if let Some((w, _)) = &aap.witness {
            ctx.dir.write_field("witness.csv", &grid, w)?;
        }
        passed &= aap.agree;
        res["aap"] = serde_json::to_value(&aap)?;
    }
    Ok((passed, res))
}

fn scheme_options(cfg: &RunConfig) -> SchemeOptions {
    SchemeOptions { n_max: cfg.scheme.n_max, tol: cfg.scheme.tol, ..SchemeOptions::default() }
}

fn cmd_iterate(ctx: &mut Context) -> CmdResult {
    let (grid, v) = ctx.setup()?;
    let mu = ctx.cfg.datum.build(&grid, ctx.cfg.seed)?;
    let trace = iteration::monotone_scheme(&grid, &v, &mu, &scheme_options(ctx.cfg))?;
    ctx.work.solves += trace.iterations();
    ctx.dir.write_text("trace.csv", &trace.csv())?;
    ctx.dir.write_field("limit.csv", &grid, &trace.field)?;
    let res = json!({
        "grid": ctx.grid_stats(&grid, &v),
        "converged": trace.converged,
        "iterations": trace.iterations(),
        "sup": trace.field.max(),
        "monotone": trace.steps.iter().all(|s| s.monotone_ok),
    });
    Ok((true, res))
}

fn cmd_weight(ctx: &mut Context) -> CmdResult {
    let (grid, v) = ctx.setup()?;
    let (_, dec) = ctx.decomposition(&grid, &v)?;
    let q = iteration::calibrate_q(&grid, &v.positive_part(), ctx.cfg.q.alpha, ctx.cfg.q.probe_count, ctx.cfg.seed)?;
    let mu = ctx.cfg.datum.build(&grid, ctx.cfg.seed)?;
    let options = WeightOptions { w_cap: ctx.cfg.weight.w_cap, scheme: scheme_options(ctx.cfg), certify_tol: ctx.cfg.weight.certify_tol };
    let ids: Vec<usize> = match ctx.cfg.weight.component {
        Some(id) => vec![id],
        None => (1..=dec.component_count).collect(),
    };
    let mut passed = true;
    let mut results = Vec::new();
    for id in ids {
        let w = iteration::build_weight(&grid, &v, &mu, &dec, id, &q, &options)?;
        ctx.work.solves += w.scheme_iterations + 2;
        ctx.dir.write_field(&format!("weight_{id}.csv"), &grid, &w.weight)?;
        ctx.dir.write_field(&format!("z_{id}.csv"), &grid, &w.z)?;
        ctx.dir.write_field(&format!("u_tilde_{id}.csv"), &grid, &w.u_tilde)?;
        if let Some(c) = &w.certificate {
            ctx.dir.write_field(&format!("certificate_{id}.csv"), &grid, c)?;
        }
        ctx.dir.write_json(
            &format!("weight_{id}.json"),
            &json!({ "certified_lambda": w.certified_lambda, "C": w.c, "alpha": w.alpha, "certified": w.certified }),
        )?;
        passed &= w.certified;
        results.push(serde_json::to_value(&w)?);
    }
    Ok((passed, json!({ "grid": ctx.grid_stats(&grid, &v), "weights": results, "q": q })))
}

fn cmd_kato(ctx: &mut Context) -> CmdResult {
    let (grid, v) = ctx.setup()?;
    let rep = kato_report(&v, &grid, &ctx.cfg.kato.deltas, grid.dimension(), ctx.cfg.subsamples, ctx.cfg.kato.fraction)?;
    ctx.dir.write_text("kato.csv", &rep.csv())?;
    Ok((true, json!({ "grid": ctx.grid_stats(&grid, &v), "kato": rep })))
}

fn cmd_oracle(ctx: &mut Context) -> CmdResult {
    let o = &ctx.cfg.oracle;
    let fam = oracle::HardyFamily::new(o.dimension, o.alpha, o.beta)?;
    let radii: Vec<f64> = (1..=o.sweep_points).map(|i| i as f64 / (o.sweep_points + 1) as f64).collect();
    ctx.dir.write_text("sweep.csv", &fam.sweep_csv(&radii)?)?;
    let mut positive = true;
    let mut above = true;
    for &r in &radii {
        let f = fam.f(r)?;
        positive &= f > 0.0;
        above &= f - oracle::f_lower_bound(o.dimension, o.alpha, o.beta, r)? >= -1e-12 * f.abs();
    }
    let residuals = o
        .residual_widths
        .iter()
        .map(|&h| Ok(json!({ "h": h, "residual": oracle::radial_residual(o.dimension, o.alpha, o.beta, h)? })))
        .collect::<Result<Vec<_>>>()?;
    let critical = (o.dimension as f64 - 2.0) / 2.0;
    let scan = oracle::truncation_energy_scan(o.dimension, critical, &o.scan_ks, o.scan_h)?;
    let res = json!({
        "family": fam,
        "f_positive": positive,
        "f_above_lower_bound": above,
        "residuals": residuals,
        "critical_scan": scan,
    });
    Ok((positive && above, res))
}

fn cmd_defect(ctx: &mut Context) -> CmdResult {
    let est = decomposition::defect_refinement(
        &ctx.cfg.domain,
        &ctx.cfg.potential,
        &ctx.cfg.defect.widths,
        ctx.cfg.subsamples,
        ctx.cfg.clip,
        ctx.cfg.theta_rel,
    )?;
    ctx.work.solves += est.trace.len();
    ctx.dir.write_text("defect.csv", &est.trace_csv())?;
    Ok((true, json!({ "tau_mass": est.tau_mass, "trace": est.trace, "interface_nodes": est.densities.len() })))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn parses_grammar() {
        let inv = parse_args(&args("torsion --config a.json --out dir --h=0.25 --scheme.n_max 9")).unwrap();
        assert_eq!(inv.command, "torsion");
        assert_eq!(inv.config, Some(PathBuf::from("a.json")));
        assert_eq!(inv.out, Some(PathBuf::from("dir")));
        assert_eq!(inv.overrides, vec![("h".into(), "0.25".into()), ("scheme.n_max".into(), "9".into())]);
        assert!(parse_args(&args("bogus")).is_err());
        assert!(parse_args(&args("torsion stray")).is_err());
    }

    #[test]
    fn unknown_override_exits_two() {
        let tmp = tempfile::tempdir().unwrap();
        let out = tmp.path().to_str().unwrap();
        assert_eq!(main_with_args(&args(&format!("torsion --out {out} --hh=1"))), 2);
        assert_eq!(main_with_args(&args(&format!("torsion --out {out} --h=0.125"))), 0);
        assert!(tmp.path().join("summary.json").exists());
    }
}
