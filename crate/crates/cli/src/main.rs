//! Batch front end: sample a surface, run solver and theorem checks,
//! emit JSON/CSV/mesh artifacts, and run convergence studies.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use frame_lab::frame::{canonical_frame, frame_metrics, GaugeAngle};
use frame_lab::grid::make_grid;
use frame_lab::io;
use frame_lab::pde::wente_audit;
use frame_lab::surface::{sample_catalog, Immersion};
use frame_lab::theorems::{
    check_appendix_identities, check_gauge_invariance, conformal_factor_bound, cor18_check,
    thm110_verify, thm12_verify, thm17_check, CheckReport,
};
use frame_lab::Error;

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_SOLVER: u8 = 3;

const CATALOG: &[&str] = &["flat", "log_cylinder", "catenoid", "enneper"];
const CHECKS: &[&str] = &[
    "appendix",
    "gauge",
    "thm12",
    "thm17",
    "cor18",
    "thm110",
    "conformal_factor",
];

#[derive(Parser)]
#[command(name = "frame-lab", version, about = "Coulomb-frame laboratory on annuli")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// List catalog surfaces, or export one surface's fields and mesh
    Catalog {
        #[command(flatten)]
        scene: SceneArgs,
        /// Output directory for the exported artifacts
        #[arg(long)]
        out: Option<PathBuf>,
        /// Comma-separated subset of json,csv,mesh
        #[arg(long, default_value = "json,csv,mesh")]
        formats: String,
    },
    /// Run theorem/identity checks on one surface
    Verify {
        #[command(flatten)]
        scene: SceneArgs,
        /// Comma-separated check names (default: all)
        #[arg(long)]
        checks: Option<String>,
        /// Tolerance override for the residual verdicts
        #[arg(long)]
        tol: Option<f64>,
        /// Output directory for JSON reports and the summary CSV
        #[arg(long)]
        out: Option<PathBuf>,
        /// JSON run configuration; command-line flags override its entries
        #[arg(long)]
        config: Option<PathBuf>,
        /// RNG seed for randomized checks
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Audit the Wente constants on random band-limited pairs
    Wente {
        /// Number of random samples
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Grid as NSxNT
        #[arg(long, default_value = "128x256")]
        grid: String,
        /// Write the audit table here
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Convergence study: one check on a doubling sequence of grids
    Converge {
        #[command(flatten)]
        scene: SceneArgs,
        /// Check name (also: appendix-3.4, thm12-gamma)
        #[arg(long)]
        check: String,
        /// Comma-separated grid list, e.g. 64x128,128x256,256x512
        #[arg(long)]
        grids: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render a stored JSON report as a table
    Report {
        /// Path to a report written by `verify`
        input: PathBuf,
    },
}

#[derive(Args, Clone)]
struct SceneArgs {
    /// Catalog surface name
    #[arg(long)]
    surface: Option<String>,
    /// Surface parameter as key=value (h for catenoid, c for log_cylinder)
    #[arg(long = "param")]
    params: Vec<String>,
    /// Grid as NSxNT
    #[arg(long)]
    grid: Option<String>,
    /// Annulus radii as b,a (otherwise derived from the surface)
    #[arg(long)]
    annulus: Option<String>,
}

/// JSON run configuration; every field optional, flags take precedence.
#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RunConfig {
    surface: Option<String>,
    params: Option<BTreeMap<String, f64>>,
    grid: Option<String>,
    annulus: Option<String>,
    checks: Option<Vec<String>>,
    tolerance: Option<f64>,
    seed: Option<u64>,
    output: Option<PathBuf>,
    formats: Option<Vec<String>>,
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: message.into() }
    }

    fn check(message: impl Into<String>) -> Self {
        Self { code: EXIT_CHECK_FAILED, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidDomain { .. }
            | Error::InvalidResolution { .. }
            | Error::UnknownSurface(_)
            | Error::UnknownCheck(_) => EXIT_USAGE,
            _ => EXIT_SOLVER,
        };
        Self { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self { code: EXIT_SOLVER, message: format!("io error: {e}") }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.cmd {
        Cmd::Catalog { scene, out, formats } => cmd_catalog(scene, out, &formats),
        Cmd::Verify { scene, checks, tol, out, config, seed } => {
            cmd_verify(scene, checks, tol, out, config, seed)
        }
        Cmd::Wente { n, seed, grid, out } => cmd_wente(n, seed, &grid, out),
        Cmd::Converge { scene, check, grids, out } => cmd_converge(scene, &check, &grids, out),
        Cmd::Report { input } => cmd_report(&input),
    }
}

// ---------------------------------------------------------------------------
// scene construction

fn parse_resolution(text: &str) -> Result<(usize, usize), Failure> {
    let (ns, nt) = text
        .split_once(['x', 'X'])
        .ok_or_else(|| Failure::usage(format!("grid: expected NSxNT, got \"{text}\"")))?;
    let n_s = ns
        .trim()
        .parse()
        .map_err(|_| Failure::usage(format!("grid: bad node count \"{ns}\"")))?;
    let n_theta = nt
        .trim()
        .parse()
        .map_err(|_| Failure::usage(format!("grid: bad node count \"{nt}\"")))?;
    Ok((n_s, n_theta))
}

fn parse_annulus(text: &str) -> Result<(f64, f64), Failure> {
    let (b, a) = text
        .split_once(',')
        .ok_or_else(|| Failure::usage(format!("annulus: expected b,a, got \"{text}\"")))?;
    let b = b
        .trim()
        .parse()
        .map_err(|_| Failure::usage(format!("annulus: bad radius \"{b}\"")))?;
    let a = a
        .trim()
        .parse()
        .map_err(|_| Failure::usage(format!("annulus: bad radius \"{a}\"")))?;
    Ok((b, a))
}

fn parse_params(entries: &[String]) -> Result<BTreeMap<String, f64>, Failure> {
    let mut out = BTreeMap::new();
    for entry in entries {
        let (k, v) = entry
            .split_once('=')
            .ok_or_else(|| Failure::usage(format!("param: expected key=value, got \"{entry}\"")))?;
        let v = v
            .trim()
            .parse()
            .map_err(|_| Failure::usage(format!("param {k}: bad value \"{v}\"")))?;
        out.insert(k.trim().to_string(), v);
    }
    Ok(out)
}

#[derive(Debug)]
struct Scene {
    surface: String,
    imm: Immersion,
}

fn build_scene(
    surface: &str,
    params: &BTreeMap<String, f64>,
    grid: Option<&str>,
    annulus: Option<&str>,
) -> Result<Scene, Failure> {
    if !CATALOG.contains(&surface) {
        return Err(Failure::usage(format!("unknown surface: {surface}")));
    }
    let (n_s, n_theta) = parse_resolution(grid.unwrap_or("128x256"))?;
    let (b, a) = match annulus {
        Some(text) => parse_annulus(text)?,
        None if surface == "catenoid" => {
            let h = params.get("h").copied().unwrap_or(0.5);
            if !(h.is_finite() && h > 0.0) {
                return Err(Failure::usage(format!("param h: need h > 0, got {h}")));
            }
            ((-h).exp(), h.exp())
        }
        None => (1.0, 2.0),
    };
    let g = make_grid(b, a, n_s, n_theta)?;
    let c = params.get("c").copied().unwrap_or(0.0);
    let imm = sample_catalog(surface, c, g)?;
    Ok(Scene { surface: surface.to_string(), imm })
}

fn scene_from_args(scene: &SceneArgs, cfg: &RunConfig) -> Result<Scene, Failure> {
    let surface = scene
        .surface
        .clone()
        .or_else(|| cfg.surface.clone())
        .ok_or_else(|| Failure::usage("surface: required (flag --surface or config)"))?;
    let mut params = cfg.params.clone().unwrap_or_default();
    params.extend(parse_params(&scene.params)?);
    let grid = scene.grid.clone().or_else(|| cfg.grid.clone());
    let annulus = scene.annulus.clone().or_else(|| cfg.annulus.clone());
    build_scene(&surface, &params, grid.as_deref(), annulus.as_deref())
}

// ---------------------------------------------------------------------------
// catalog

fn cmd_catalog(scene: SceneArgs, out: Option<PathBuf>, formats: &str) -> Result<(), Failure> {
    if scene.surface.is_none() {
        for name in CATALOG {
            println!("{name}");
        }
        return Ok(());
    }
    let formats = parse_formats(formats)?;
    let sc = scene_from_args(&scene, &RunConfig::default())?;
    let imm = &sc.imm;
    let dir = out.unwrap_or_else(|| PathBuf::from("out"));
    if formats.contains(&"csv".to_string()) {
        io::atomic_write(
            &dir.join(format!("{}_points.csv", sc.surface)),
            &io::points_csv(&imm.f),
        )?;
        io::atomic_write(&dir.join(format!("{}_u.csv", sc.surface)), &io::scalar_csv(&imm.u))?;
        let frame = canonical_frame(imm)?;
        io::atomic_write(
            &dir.join(format!("{}_frame.csv", sc.surface)),
            &io::frame_csv(&frame),
        )?;
    }
    if formats.contains(&"mesh".to_string()) {
        io::atomic_write(&dir.join(format!("{}_mesh.obj", sc.surface)), &io::mesh_obj(imm))?;
    }
    if formats.contains(&"json".to_string()) {
        let frame = canonical_frame(imm)?;
        let metrics = frame_metrics(imm, &frame)?;
        let mut text = serde_json::to_string_pretty(&metrics).expect("metrics serialize");
        text.push('\n');
        io::atomic_write(&dir.join(format!("{}_metrics.json", sc.surface)), &text)?;
    }
    println!("wrote {} artifacts to {}", sc.surface, dir.display());
    Ok(())
}

fn parse_formats(text: &str) -> Result<Vec<String>, Failure> {
    let mut out = Vec::new();
    for f in text.split(',').map(str::trim).filter(|f| !f.is_empty()) {
        if !["json", "csv", "mesh"].contains(&f) {
            return Err(Failure::usage(format!("formats: unknown format \"{f}\"")));
        }
        out.push(f.to_string());
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// verify

fn run_check(name: &str, imm: &Immersion, seed: u64) -> frame_lab::Result<CheckReport> {
    match name {
        "appendix" => {
            let frame = canonical_frame(imm)?;
            check_appendix_identities(imm, &frame)
        }
        "gauge" => {
            let frame = canonical_frame(imm)?;
            let gauge = GaugeAngle::zero(imm.grid);
            let _ = seed;
            check_gauge_invariance(imm, &frame, &gauge, 10)
        }
        "thm12" => thm12_verify(imm),
        "thm17" => thm17_check(imm),
        "cor18" => cor18_check(imm),
        "thm110" => thm110_verify(imm),
        "conformal_factor" => conformal_factor_bound(imm),
        other => Err(Error::UnknownCheck(other.to_string())),
    }
}

fn worker_count() -> usize {
    std::env::var("FRAME_LAB_WORKERS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or(1)
}

fn run_checks(
    names: &[String],
    imm: &Immersion,
    seed: u64,
) -> Vec<frame_lab::Result<CheckReport>> {
    let workers = worker_count().min(names.len().max(1));
    if workers <= 1 {
        return names.iter().map(|n| run_check(n, imm, seed)).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<frame_lab::Result<CheckReport>>>> =
        Mutex::new((0..names.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::SeqCst);
                if k >= names.len() {
                    break;
                }
                let result = run_check(&names[k], imm, seed);
                slots.lock().unwrap()[k] = Some(result);
            });
        }
    });
    slots.into_inner().unwrap().into_iter().map(|r| r.unwrap()).collect()
}

fn cmd_verify(
    scene: SceneArgs,
    checks: Option<String>,
    tol: Option<f64>,
    out: Option<PathBuf>,
    config: Option<PathBuf>,
    seed: Option<u64>,
) -> Result<(), Failure> {
    let cfg = match config {
        Some(path) => {
            let text = std::fs::read_to_string(&path)
                .map_err(|e| Failure::usage(format!("config {}: {e}", path.display())))?;
            serde_json::from_str::<RunConfig>(&text)
                .map_err(|e| Failure::usage(format!("config {}: {e}", path.display())))?
        }
        None => RunConfig::default(),
    };
    let names: Vec<String> = match checks {
        Some(list) => list.split(',').map(|c| c.trim().to_string()).collect(),
        None => match &cfg.checks {
            Some(list) => list.clone(),
            None => CHECKS.iter().map(|c| c.to_string()).collect(),
        },
    };
    for name in &names {
        if !CHECKS.contains(&name.as_str()) {
            return Err(Failure::usage(format!("unknown check: {name}")));
        }
    }
    let tol = tol.or(cfg.tolerance);
    let seed = seed.or(cfg.seed).unwrap_or(7);
    let out = out.or_else(|| cfg.output.clone());
    let sc = scene_from_args(&scene, &cfg)?;

    let mut rows = Vec::new();
    let mut all_pass = true;
    for (name, result) in names.iter().zip(run_checks(&names, &sc.imm, seed)) {
        let mut report = result?;
        if let Some(t) = tol {
            report = report.with_tolerance(t);
        }
        print!("{}", io::render_report(&report));
        all_pass &= report.passed;
        if let Some(dir) = &out {
            io::atomic_write(
                &dir.join(format!("{}_{}.json", sc.surface, name)),
                &io::report_json(&report),
            )?;
        }
        rows.push((sc.surface.clone(), report));
    }
    if let Some(dir) = &out {
        io::atomic_write(&dir.join("summary.csv"), &io::batch_csv(&rows))?;
        let mesh_wanted = cfg
            .formats
            .as_ref()
            .is_some_and(|f| f.iter().any(|x| x == "mesh"));
        if mesh_wanted {
            io::atomic_write(
                &dir.join(format!("{}_mesh.obj", sc.surface)),
                &io::mesh_obj(&sc.imm),
            )?;
        }
    }
    if all_pass {
        Ok(())
    } else {
        Err(Failure::check("one or more checks failed"))
    }
}

// ---------------------------------------------------------------------------
// wente

fn cmd_wente(n: usize, seed: u64, grid: &str, out: Option<PathBuf>) -> Result<(), Failure> {
    if n < 1 {
        return Err(Failure::usage("n: need at least one sample"));
    }
    let (n_s, n_theta) = parse_resolution(grid)?;
    let g = make_grid(1.0, 2.0, n_s, n_theta)?;
    let audit = wente_audit(g, n, seed)?;
    if let Some(path) = &out {
        io::atomic_write(path, &io::audit_csv(&audit))?;
    }
    let c_inf = 0.5 / std::f64::consts::PI;
    let c_l2 = (3.0 / (64.0 * std::f64::consts::PI)).sqrt();
    println!(
        "samples {n}  max sup ratio {:.6} (limit {:.6})  max grad ratio {:.6} (limit {:.6})",
        audit.max_sup_ratio,
        c_inf + g.tau(),
        audit.max_grad_ratio,
        c_l2 + g.tau()
    );
    if audit.max_sup_ratio <= c_inf + g.tau() && audit.max_grad_ratio <= c_l2 + g.tau() {
        Ok(())
    } else {
        let worst = &audit.rows[audit.worst_sample];
        Err(Failure::check(format!(
            "Wente constant exceeded: worst sample {} (seed {})",
            worst.sample, worst.seed
        )))
    }
}

// ---------------------------------------------------------------------------
// converge

/// Residual measured for the convergence study; `None` means the check's
/// own worst residual.
fn study_residual(check: &str, imm: &Immersion, seed: u64) -> Result<f64, Failure> {
    if let Some(base) = check.strip_suffix("-3.4") {
        let report = run_check(base, imm, seed)?;
        return Ok(report.residuals["energy_equality"]);
    }
    if check == "thm12-gamma" {
        let report = run_check("thm12", imm, seed)?;
        let h = 0.5 * (imm.grid.a.ln() - imm.grid.b.ln());
        let oracle = 4.0 * std::f64::consts::PI * h.tanh();
        return Ok((report.quantities["gamma"] - oracle).abs());
    }
    let report = run_check(check, imm, seed)?;
    if report.not_applicable {
        return Err(Failure::check(format!(
            "{check}: not applicable on this surface; no residual to study"
        )));
    }
    Ok(report.max_residual())
}

fn cmd_converge(
    scene: SceneArgs,
    check: &str,
    grids: &str,
    out: Option<PathBuf>,
) -> Result<(), Failure> {
    let base_check = check.split('-').next().unwrap_or(check);
    if !CHECKS.contains(&base_check) && check != "thm12-gamma" {
        return Err(Failure::usage(format!("unknown check: {check}")));
    }
    let resolutions: Vec<(usize, usize)> = grids
        .split(',')
        .map(parse_resolution)
        .collect::<Result<_, _>>()?;
    if resolutions.len() < 3 {
        return Err(Failure::usage("grids: need at least three"));
    }
    for w in resolutions.windows(2) {
        if w[1].0 != 2 * w[0].0 || w[1].1 != 2 * w[0].1 {
            return Err(Failure::usage("grids: each grid must double the previous one"));
        }
    }

    const ROUND_OFF: f64 = 1e-11;
    let mut residuals = Vec::new();
    for (n_s, n_theta) in &resolutions {
        let sc = scene_from_args(
            &SceneArgs { grid: Some(format!("{n_s}x{n_theta}")), ..scene.clone() },
            &RunConfig::default(),
        )?;
        residuals.push(study_residual(check, &sc.imm, 7)?);
    }

    let mut csv = String::from("grid,residual,order\n");
    let mut pass = true;
    for (k, ((n_s, n_theta), res)) in resolutions.iter().zip(&residuals).enumerate() {
        let order = if k == 0 {
            "-".to_string()
        } else if *res < ROUND_OFF && residuals[k - 1] < ROUND_OFF {
            "exact".to_string()
        } else {
            let p = (residuals[k - 1] / res).log2();
            pass &= p >= 1.9;
            format!("{p:.3}")
        };
        csv.push_str(&format!("{n_s}x{n_theta},{res:.6e},{order}\n"));
    }
    print!("{csv}");
    if let Some(path) = &out {
        io::atomic_write(path, &csv)?;
    }
    if pass {
        Ok(())
    } else {
        Err(Failure::check("observed convergence order below 1.9"))
    }
}

// ---------------------------------------------------------------------------
// report

fn cmd_report(input: &Path) -> Result<(), Failure> {
    let text = std::fs::read_to_string(input)
        .map_err(|e| Failure::usage(format!("report {}: {e}", input.display())))?;
    let report: CheckReport = serde_json::from_str(&text)
        .map_err(|e| Failure::usage(format!("report {}: {e}", input.display())))?;
    print!("{}", io::render_report(&report));
    if report.passed {
        Ok(())
    } else {
        Err(Failure::check(format!("{}: failed", report.name)))
    }
}
