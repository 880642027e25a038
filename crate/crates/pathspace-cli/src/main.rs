//! `pathspace`: drive path-space geodesic computations from the shell.
//!
//! Subcommands mirror the library's operations: `interpolate` joins two
//! curves by a path-space geodesic (boundary-value problem), `geodesic`
//! flows a curve along a field (initial-value problem), `norm` evaluates
//! the C¹ chart norm, `curvature` evaluates the induced curvature
//! operator, `verify` runs the self-check battery, and
//! `probe-completeness` drives every transverse ray to a target
//! parameter. Grid outputs land in `--out` (JSON, or CSV with
//! `--format csv`); summary files are always JSON, written atomically.
//!
//! Exit statuses: 0 success, 2 usage or input error, 3 obstruction,
//! 4 numeric failure, 5 verification failure. `PATHSPACE_THREADS` caps
//! the parallel width of the per-t solves (0 or `auto` = one worker per
//! core, 1 = sequential).

use clap::{Args, Parser, Subcommand, ValueEnum};
use pathspace::homotopy::connection::induced_curvature;
use pathspace::homotopy::probe::completeness_probe_with;
use pathspace::homotopy::residual::{geodesic_residual, ResidualField};
use pathspace::homotopy::{
    antipodal_obstruction_scan, endpoint_residual, pathspace_geodesic_bvp_with,
    pathspace_geodesic_ivp_with, HomotopyError, HomotopyOptions, PathHomotopy,
};
use pathspace::io::{self, IoError, ManifoldRef};
use pathspace::manifold::{ChartId, Manifold, ManifoldError, ManifoldKind};
use pathspace::par::Parallelism;
use pathspace::path::norm::{c1_norm, norm_equivalence_bound, ChartCover};
use pathspace::{defaults, verify};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "pathspace",
    version,
    about = "Geodesic homotopies, chart norms, and curvature on spaces of paths"
)]
struct Cli {
    #[command(flatten)]
    config: Config,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Config {
    /// Manifold: builtin constructor (e.g. `sphere(2,r=1)`) or a JSON
    /// config path; must agree with the manifold named in input files.
    #[arg(long, global = true)]
    manifold: Option<String>,

    /// Number of t intervals (at least 16).
    #[arg(long, global = true, default_value_t = defaults::DEFAULT_GRID_N)]
    grid_n: usize,

    /// Number of s intervals (at least 8).
    #[arg(long, global = true, default_value_t = defaults::DEFAULT_GRID_M)]
    grid_m: usize,

    /// Transverse-integrator tolerance override.
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Seed for the randomized parts of `verify`.
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,

    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Format for grid files; summary files are always JSON.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Join two curves by a path-space geodesic (boundary-value problem).
    Interpolate { curve1: PathBuf, curve2: PathBuf },
    /// Flow a curve along a field (initial-value problem).
    Geodesic {
        curve: PathBuf,
        field: PathBuf,
        /// Flow parameter to integrate to.
        #[arg(long, default_value_t = 1.0)]
        s_max: f64,
    },
    /// C¹ chart norm of a field along a curve, with cover breakdown.
    Norm { curve: PathBuf, field: PathBuf },
    /// Induced curvature R(X, Y)Z along a curve, with a sectional track.
    Curvature {
        curve: PathBuf,
        x: PathBuf,
        y: PathBuf,
        z: PathBuf,
    },
    /// Run the self-check battery on a manifold (`--manifold` required).
    Verify,
    /// Drive every transverse geodesic to a target parameter.
    ProbeCompleteness {
        curve: PathBuf,
        field: PathBuf,
        /// Target parameter S.
        #[arg(long, default_value_t = 20.0)]
        s_target: f64,
    },
}

enum CliError {
    /// Bad usage, unreadable or inconsistent inputs → exit 2.
    Input(String),
    /// The boundary-value construction is obstructed → exit 3.
    Obstruction(String),
    /// A computation ran and failed numerically → exit 4.
    Numeric(String),
    /// The verification battery reported failures → exit 5.
    Verification(String),
}

impl CliError {
    fn status(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Obstruction(_) => 3,
            CliError::Numeric(_) => 4,
            CliError::Verification(_) => 5,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Input(s)
            | CliError::Obstruction(s)
            | CliError::Numeric(s)
            | CliError::Verification(s) => s,
        }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<HomotopyError> for CliError {
    fn from(e: HomotopyError) -> Self {
        match &e {
            HomotopyError::Obstruction(_) => CliError::Obstruction(e.to_string()),
            HomotopyError::RayFailure { .. }
            | HomotopyError::Manifold(_)
            | HomotopyError::Path(_) => CliError::Numeric(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("pathspace: {}", e.message());
            ExitCode::from(e.status())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = &cli.config;
    if cfg.grid_n < 16 {
        return Err(CliError::Input(format!(
            "--grid-n must be at least 16, got {}",
            cfg.grid_n
        )));
    }
    if cfg.grid_m < 8 {
        return Err(CliError::Input(format!(
            "--grid-m must be at least 8, got {}",
            cfg.grid_m
        )));
    }
    if let Some(t) = cfg.tol {
        if !(t > 0.0) {
            return Err(CliError::Input(format!("--tol must be positive, got {t}")));
        }
    }
    match &cli.command {
        Command::Interpolate { curve1, curve2 } => cmd_interpolate(cfg, curve1, curve2),
        Command::Geodesic {
            curve,
            field,
            s_max,
        } => cmd_geodesic(cfg, curve, field, *s_max),
        Command::Norm { curve, field } => cmd_norm(cfg, curve, field),
        Command::Curvature { curve, x, y, z } => cmd_curvature(cfg, curve, x, y, z),
        Command::Verify => cmd_verify(cfg),
        Command::ProbeCompleteness {
            curve,
            field,
            s_target,
        } => cmd_probe(cfg, curve, field, *s_target),
    }
}

/// Build the one manifold all sources agree on: the `--manifold` flag if
/// given, cross-checked against the manifold reference of every input
/// file by canonical string.
fn manifold_for(cfg: &Config, refs: &[(&Path, &ManifoldRef)]) -> Result<Manifold, CliError> {
    let mut resolved: Option<(String, Manifold)> = match &cfg.manifold {
        Some(spec) => {
            let m = io::resolve_manifold(spec)?;
            Some(("--manifold".to_string(), m))
        }
        None => None,
    };
    for (path, r) in refs {
        let m = io::build_manifold(r)?;
        match &resolved {
            Some((source, have)) => {
                if have.canonical_string() != m.canonical_string() {
                    return Err(CliError::Input(format!(
                        "manifold mismatch: {source} gives `{}`, {} names `{}`",
                        have.canonical_string(),
                        path.display(),
                        m.canonical_string()
                    )));
                }
            }
            None => resolved = Some((path.display().to_string(), m)),
        }
    }
    resolved
        .map(|(_, m)| m)
        .ok_or_else(|| CliError::Input("no manifold specified".to_string()))
}

fn options(cfg: &Config, default_tol: f64) -> Result<HomotopyOptions, CliError> {
    let par = Parallelism::from_env().map_err(CliError::Input)?;
    Ok(HomotopyOptions {
        tol: cfg.tol.unwrap_or(default_tol),
        par,
        ..HomotopyOptions::default()
    })
}

/// Write the homotopy grid in the configured format and return the path.
fn write_grid(
    cfg: &Config,
    m: &Manifold,
    hom: &PathHomotopy,
    residual: Option<&ResidualField>,
    file: &io::HomotopyFile,
) -> Result<PathBuf, CliError> {
    match cfg.format {
        Format::Json => {
            let p = cfg.out.join("homotopy.json");
            io::write_atomic(&p, &io::to_json_bytes(file)?)?;
            Ok(p)
        }
        Format::Csv => {
            let p = cfg.out.join("homotopy.csv");
            io::write_atomic(&p, io::homotopy_csv(m, hom, residual)?.as_bytes())?;
            Ok(p)
        }
    }
}

fn print_header(m: &Manifold, cfg: &Config) {
    println!("manifold: {} [{}]", m.canonical_string(), io::manifold_hash(m));
    println!("grid: N={} M={}", cfg.grid_n, cfg.grid_m);
}

fn cmd_interpolate(cfg: &Config, p1: &Path, p2: &Path) -> Result<(), CliError> {
    let c1 = io::load_curve(p1)?;
    let c2 = io::load_curve(p2)?;
    let m = manifold_for(cfg, &[(p1, &c1.manifold), (p2, &c2.manifold)])?;
    let g1 = io::curve_to_path(&m, &c1, cfg.grid_n)?;
    let g2 = io::curve_to_path(&m, &c2, cfg.grid_n)?;
    let opts = options(cfg, defaults::BVP_INTEGRATOR_TOL)?;
    print_header(&m, cfg);
    let mut hom = match pathspace_geodesic_bvp_with(&m, &g1, &g2, cfg.grid_m, &opts) {
        Ok(h) => h,
        Err(HomotopyError::Obstruction(report)) => {
            let p = cfg.out.join("obstruction.json");
            let file = io::ObstructionFile::from_report(&m, &report);
            io::write_atomic(&p, &io::to_json_bytes(&file)?)?;
            println!("offending t indices: {:?}", report.offending);
            println!("wrote {}", p.display());
            return Err(CliError::Obstruction(report.message));
        }
        Err(e) => return Err(e.into()),
    };
    let res = geodesic_residual(&m, &hom)?;
    hom.attach_residual(&res);
    let ep = endpoint_residual(&m, &hom, &g2)?;
    let mut file = io::HomotopyFile::from_homotopy(&m, &hom);
    file.residual_sup = Some(res.sup);
    file.residual_certified = Some(res.certified());
    file.endpoint_residual = Some(ep);
    let wrote = write_grid(cfg, &m, &hom, Some(&res), &file)?;
    println!("endpoint residual: {:.3e}", ep);
    println!(
        "geodesic residual sup: {:.3e} (threshold {:.1e}: {})",
        res.sup,
        defaults::RESIDUAL_CERTIFY_TOL,
        if res.certified() { "pass" } else { "FAIL" }
    );
    if matches!(m.kind(), ManifoldKind::Sphere { .. }) {
        let scan = antipodal_obstruction_scan(&m, &g1, &g2)?;
        println!("per-t antipodal margins (π − angle):");
        println!("{:>5}  {:>10}  {:>12}", "i", "t", "margin");
        for (i, margin) in scan.margins.iter().enumerate() {
            println!("{i:>5}  {:>10.6}  {margin:>12.6}", g1.t[i]);
        }
        for w in &scan.warnings {
            println!("warning: {w}");
        }
    }
    println!("wrote {}", wrote.display());
    if !res.certified() {
        return Err(CliError::Numeric(format!(
            "geodesic residual {:.3e} exceeds the certification threshold {:.1e}",
            res.sup,
            defaults::RESIDUAL_CERTIFY_TOL
        )));
    }
    Ok(())
}

fn cmd_geodesic(cfg: &Config, pc: &Path, pf: &Path, s_max: f64) -> Result<(), CliError> {
    let c = io::load_curve(pc)?;
    let f = io::load_field(pf)?;
    let m = manifold_for(cfg, &[(pc, &c.manifold), (pf, &f.manifold)])?;
    let path = io::curve_to_path(&m, &c, cfg.grid_n)?;
    let v = io::field_on_path(&m, &f, &path)?;
    let opts = options(cfg, defaults::HOMOTOPY_INTEGRATOR_TOL)?;
    print_header(&m, cfg);
    let mut hom = pathspace_geodesic_ivp_with(&m, &path, &v, s_max, cfg.grid_m, &opts)?;
    let res = geodesic_residual(&m, &hom)?;
    hom.attach_residual(&res);
    let mut file = io::HomotopyFile::from_homotopy(&m, &hom);
    file.residual_sup = Some(res.sup);
    file.residual_certified = Some(res.certified());
    let wrote = write_grid(cfg, &m, &hom, Some(&res), &file)?;
    println!("s max: {s_max}");
    println!(
        "geodesic residual sup: {:.3e} (threshold {:.1e}: {})",
        res.sup,
        defaults::RESIDUAL_CERTIFY_TOL,
        if res.certified() { "pass" } else { "FAIL" }
    );
    println!("wrote {}", wrote.display());
    if !res.certified() {
        return Err(CliError::Numeric(format!(
            "geodesic residual {:.3e} exceeds the certification threshold {:.1e}",
            res.sup,
            defaults::RESIDUAL_CERTIFY_TOL
        )));
    }
    Ok(())
}

fn cmd_norm(cfg: &Config, pc: &Path, pf: &Path) -> Result<(), CliError> {
    let c = io::load_curve(pc)?;
    let f = io::load_field(pf)?;
    let m = manifold_for(cfg, &[(pc, &c.manifold), (pf, &f.manifold)])?;
    let path = io::curve_to_path(&m, &c, cfg.grid_n)?;
    let v = io::field_on_path(&m, &f, &path)?;
    let numeric = |e: pathspace::path::PathError| CliError::Numeric(e.to_string());
    let cover = ChartCover::build(&m, &path).map_err(numeric)?;
    let total = c1_norm(&m, &path, &v, &cover).map_err(numeric)?;
    print_header(&m, cfg);
    println!("c1 norm: {total:.12e}");
    println!("cover ({} interval(s)):", cover.intervals.len());
    let mut intervals = Vec::new();
    for (k, iv) in cover.intervals.iter().enumerate() {
        // per-interval contribution: sup over the interval's grid samples
        // of max(|v|, |v'|) represented in the interval's chart
        let mut contribution = 0.0f64;
        for i in cover.indices(k, &path) {
            let (w, dw) = if path.chart[i] == iv.chart {
                (v.w[i].clone(), v.dw[i].clone())
            } else {
                let eval = m
                    .chart_transition(path.chart[i], iv.chart, &path.x[i])
                    .map_err(|e| CliError::Numeric(e.to_string()))?;
                (
                    eval.push_vector(&v.w[i]),
                    eval.push_derivative(&path.dx[i], &v.w[i], &v.dw[i]),
                )
            };
            contribution = contribution.max(w.norm().max(dw.norm()));
        }
        println!(
            "  [{:.6}, {:.6}] chart {} `{}`: {contribution:.12e}",
            iv.a,
            iv.b,
            iv.chart.0,
            m.charts()[iv.chart.0].name
        );
        intervals.push(serde_json::json!({
            "a": iv.a,
            "b": iv.b,
            "chart": iv.chart.0,
            "contribution": contribution,
        }));
    }
    let mut doc = serde_json::json!({
        "manifold": m.canonical_string(),
        "manifold_hash": io::manifold_hash(&m),
        "c1_norm": total,
        "cover": intervals,
    });
    if m.charts().len() == 2 {
        // equivalence constants between the two chart representations,
        // when the path sits inside their overlap; the reverse constant
        // needs the path represented in the other chart
        let from = path.chart[0];
        let to = ChartId(1 - from.0);
        let other = pathspace::path::path_in_chart(&m, &path, to);
        match (
            norm_equivalence_bound(&m, &path, from, to),
            other.and_then(|p| norm_equivalence_bound(&m, &p, to, from)),
        ) {
            (Ok(cf), Ok(cr)) => {
                println!("equivalence constants: c = {cf:.12e}, c' = {cr:.12e}");
                doc["equivalence_c"] = serde_json::json!(cf);
                doc["equivalence_c_rev"] = serde_json::json!(cr);
            }
            _ => println!("equivalence constants: unavailable (path leaves the chart overlap)"),
        }
    }
    let p = cfg.out.join("norm.json");
    io::write_atomic(&p, &io::to_json_bytes(&doc)?)?;
    println!("wrote {}", p.display());
    Ok(())
}

fn cmd_curvature(
    cfg: &Config,
    pc: &Path,
    px: &Path,
    py: &Path,
    pz: &Path,
) -> Result<(), CliError> {
    let c = io::load_curve(pc)?;
    let fx = io::load_field(px)?;
    let fy = io::load_field(py)?;
    let fz = io::load_field(pz)?;
    let m = manifold_for(
        cfg,
        &[
            (pc, &c.manifold),
            (px, &fx.manifold),
            (py, &fy.manifold),
            (pz, &fz.manifold),
        ],
    )?;
    let path = io::curve_to_path(&m, &c, cfg.grid_n)?;
    let x = io::field_on_path(&m, &fx, &path)?;
    let y = io::field_on_path(&m, &fy, &path)?;
    let z = io::field_on_path(&m, &fz, &path)?;
    let r = induced_curvature(&m, &path, &x, &y, &z)
        .map_err(|e| CliError::Numeric(e.to_string()))?;
    let mut sectional: Vec<Option<f64>> = Vec::with_capacity(path.len());
    for i in 0..path.len() {
        match m.sectional_curvature(path.chart[i], &path.x[i], &x.w[i], &y.w[i]) {
            Ok(k) => sectional.push(Some(k)),
            Err(ManifoldError::DegeneratePlane(_)) => sectional.push(None),
            Err(e) => return Err(CliError::Numeric(e.to_string())),
        }
    }
    let field = io::field_to_file(&m, &r);
    let doc = serde_json::json!({
        "manifold": m.canonical_string(),
        "manifold_hash": io::manifold_hash(&m),
        "chart": path.chart.iter().map(|c| c.0).collect::<Vec<_>>(),
        "curvature": field.samples,
        "sectional": sectional,
    });
    print_header(&m, cfg);
    println!("sup |R(X,Y)Z|: {:.12e}", r.sup_value_norm());
    let defined: Vec<f64> = sectional.iter().filter_map(|k| *k).collect();
    if defined.is_empty() {
        println!("sectional curvature: undefined along the whole path (degenerate spans)");
    } else {
        let lo = defined.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = defined.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        println!(
            "sectional curvature range: [{lo:.9}, {hi:.9}] over {} of {} samples",
            defined.len(),
            sectional.len()
        );
    }
    let p = cfg.out.join("curvature.json");
    io::write_atomic(&p, &io::to_json_bytes(&doc)?)?;
    println!("wrote {}", p.display());
    Ok(())
}

fn cmd_verify(cfg: &Config) -> Result<(), CliError> {
    let spec = cfg
        .manifold
        .as_ref()
        .ok_or_else(|| CliError::Input("verify needs --manifold".to_string()))?;
    let m = io::resolve_manifold(spec)?;
    let report = verify::run_battery(&m, cfg.seed);
    print!("{report}");
    let p = cfg.out.join("verify.json");
    io::write_atomic(&p, &io::to_json_bytes(&report)?)?;
    println!("wrote {}", p.display());
    if !report.passed {
        let failed = report.checks.iter().filter(|c| !c.passed).count();
        return Err(CliError::Verification(format!(
            "{failed} of {} checks failed on {}",
            report.checks.len(),
            m.canonical_string()
        )));
    }
    Ok(())
}

fn cmd_probe(cfg: &Config, pc: &Path, pf: &Path, s_target: f64) -> Result<(), CliError> {
    let c = io::load_curve(pc)?;
    let f = io::load_field(pf)?;
    let m = manifold_for(cfg, &[(pc, &c.manifold), (pf, &f.manifold)])?;
    let path = io::curve_to_path(&m, &c, cfg.grid_n)?;
    let v = io::field_on_path(&m, &f, &path)?;
    let opts = options(cfg, defaults::HOMOTOPY_INTEGRATOR_TOL)?;
    let report = completeness_probe_with(&m, &path, &v, s_target, &opts)?;
    print_header(&m, cfg);
    println!("probe target: S = {s_target}");
    if report.complete {
        println!("complete: all {} rays reached the target", report.reached.len());
    } else {
        let exited = report
            .reached
            .iter()
            .filter(|&&s| s < s_target || s.is_nan())
            .count();
        println!(
            "incomplete: {exited} of {} rays stopped early",
            report.reached.len()
        );
        println!("{:>5}  {:>10}  {:>12}", "i", "t", "reached");
        for (i, &s) in report.reached.iter().enumerate() {
            if s < s_target || s.is_nan() {
                println!("{i:>5}  {:>10.6}  {s:>12.6}", path.t[i]);
            }
        }
        if let Some(first) = report.failures.first() {
            println!(
                "reason: {first}{}",
                if report.failures.len() > 1 {
                    format!(" (and {} more)", report.failures.len() - 1)
                } else {
                    String::new()
                }
            );
        }
    }
    let p = cfg.out.join("probe.json");
    let file = io::ProbeFile::from_report(&m, &report);
    io::write_atomic(&p, &io::to_json_bytes(&file)?)?;
    println!("wrote {}", p.display());
    if let Some(hom) = &report.homotopy {
        let file = io::HomotopyFile::from_homotopy(&m, hom);
        let wrote = write_grid(cfg, &m, hom, None, &file)?;
        println!("wrote {}", wrote.display());
    }
    Ok(())
}
