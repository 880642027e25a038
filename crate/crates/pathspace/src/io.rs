//! Serialized forms of manifolds, curves, fields, and results.
//!
//! Everything on disk is JSON. Curves and fields name their manifold
//! either by a builtin constructor string (`"sphere(2,r=1)"`) or by an
//! inline expression-metric configuration; emitted grids carry the
//! manifold's canonical string and a hash of it so downstream files can
//! be matched to the geometry that produced them. Output files are
//! written atomically (temp file + rename) so a failed run never leaves
//! a partial artifact.

use crate::expr::parse_expr;
use crate::geodesic::GeodesicError;
use crate::homotopy::probe::CompletenessReport;
use crate::homotopy::{ObstructionReport, PathHomotopy};
use crate::manifold::builtin;
use crate::manifold::expression::ExprMetric;
use crate::manifold::transition::{TransMap, Transition};
use crate::manifold::{
    Chart, ChartId, Domain, Manifold, ManifoldError, ManifoldKind, MetricField,
};
use crate::path::{resample_path, spline::CubicSpline, DiscretePath, PathError, PathTangent};
use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("bad specification: {0}")]
    Spec(String),
    #[error(transparent)]
    Manifold(#[from] ManifoldError),
    #[error(transparent)]
    Path(#[from] PathError),
    #[error(transparent)]
    Geodesic(#[from] GeodesicError),
}

// ---------------------------------------------------------------- manifolds

/// A manifold named by builtin string or given inline.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ManifoldRef {
    Name(String),
    Inline(ManifoldConfig),
}

/// Inline expression-metric manifold. The `name` doubles as the
/// canonical string, so two configs with equal names are treated as the
/// same geometry by hash checks.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifoldConfig {
    pub name: String,
    pub dim: usize,
    pub charts: Vec<ChartConfig>,
    #[serde(default)]
    pub transitions: Vec<TransitionConfig>,
    /// Gate radius for pathwise exponential charts; unlimited if absent.
    #[serde(default)]
    pub epsilon: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChartConfig {
    pub name: String,
    /// Row-major metric entries in the expression language, variables
    /// `x1..xn`.
    pub metric: Vec<Vec<String>>,
    #[serde(default)]
    pub domain: Option<DomainConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase")]
pub enum DomainConfig {
    All,
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransitionConfig {
    pub from: String,
    pub to: String,
    /// Component expressions of the chart map, variables `x1..xn`.
    pub map: Vec<String>,
}

/// The open unit disk with the flat metric: the stock incomplete
/// manifold. Geodesics are straight lines that leave the chart in finite
/// parameter, which is exactly what completeness probes must detect.
pub fn open_disk() -> Manifold {
    let e = |s: &str| parse_expr(s).expect("fixed expression parses");
    let metric = ExprMetric::new(vec![vec![e("1"), e("0")], vec![e("0"), e("1")]])
        .expect("identity metric is a valid expression metric");
    Manifold::from_parts(
        ManifoldKind::Expression,
        2,
        vec![Chart {
            name: "disk".to_string(),
            domain: Domain::Ball {
                center: DVector::zeros(2),
                radius: 1.0,
            },
            metric: MetricField::Expression(metric),
        }],
        vec![],
        crate::defaults::EXPRESSION_EPSILON,
        "open-disk(2)".to_string(),
    )
}

/// Parse a builtin constructor string: `euclidean(n)`, `sphere(n,r=R)`
/// (or `sphere(n,R)`, or `sphere(n)` for the unit sphere),
/// `hyperbolic(n)`, `flat-torus(n)`, `open-disk(2)`.
pub fn parse_builtin(name: &str) -> Result<Manifold, IoError> {
    let s = name.trim();
    let open = s
        .find('(')
        .ok_or_else(|| IoError::Spec(format!("`{s}` is not a manifold constructor")))?;
    if !s.ends_with(')') {
        return Err(IoError::Spec(format!("`{s}` is missing a closing parenthesis")));
    }
    let head = &s[..open];
    let args: Vec<&str> = s[open + 1..s.len() - 1]
        .split(',')
        .map(str::trim)
        .filter(|a| !a.is_empty())
        .collect();
    let dim = |a: &str| -> Result<usize, IoError> {
        let n: usize = a
            .parse()
            .map_err(|_| IoError::Spec(format!("`{a}` is not a dimension")))?;
        if n == 0 {
            return Err(IoError::Spec("dimension must be positive".to_string()));
        }
        Ok(n)
    };
    match head {
        "euclidean" => {
            let [n] = args[..] else {
                return Err(IoError::Spec("euclidean takes one argument".to_string()));
            };
            Ok(builtin::euclidean(dim(n)?))
        }
        "hyperbolic" => {
            let [n] = args[..] else {
                return Err(IoError::Spec("hyperbolic takes one argument".to_string()));
            };
            Ok(builtin::hyperbolic(dim(n)?))
        }
        "flat-torus" => {
            let [n] = args[..] else {
                return Err(IoError::Spec("flat-torus takes one argument".to_string()));
            };
            Ok(builtin::flat_torus(dim(n)?))
        }
        "sphere" => {
            let (n, r) = match args[..] {
                [n] => (dim(n)?, 1.0),
                [n, r] => {
                    let r = r.strip_prefix("r=").unwrap_or(r);
                    let r: f64 = r
                        .parse()
                        .map_err(|_| IoError::Spec(format!("`{r}` is not a radius")))?;
                    (dim(n)?, r)
                }
                _ => {
                    return Err(IoError::Spec(
                        "sphere takes a dimension and an optional radius".to_string(),
                    ))
                }
            };
            if !(r > 0.0) {
                return Err(IoError::Spec(format!("sphere radius must be positive, got {r}")));
            }
            Ok(builtin::sphere(n, r))
        }
        "open-disk" => {
            let [n] = args[..] else {
                return Err(IoError::Spec("open-disk takes one argument".to_string()));
            };
            if dim(n)? != 2 {
                return Err(IoError::Spec("open-disk is two-dimensional".to_string()));
            }
            Ok(open_disk())
        }
        other => Err(IoError::Spec(format!("unknown manifold family `{other}`"))),
    }
}

fn build_domain(cfg: &Option<DomainConfig>, dim: usize) -> Result<Domain, IoError> {
    let Some(cfg) = cfg else {
        return Ok(Domain::All);
    };
    match cfg {
        DomainConfig::All => Ok(Domain::All),
        DomainConfig::Box { lo, hi } => {
            if lo.len() != dim || hi.len() != dim {
                return Err(IoError::Spec(format!(
                    "box domain bounds must have {dim} components"
                )));
            }
            if lo.iter().zip(hi).any(|(a, b)| !(a < b)) {
                return Err(IoError::Spec(
                    "box domain needs lo < hi componentwise".to_string(),
                ));
            }
            Ok(Domain::Box {
                lo: DVector::from_vec(lo.clone()),
                hi: DVector::from_vec(hi.clone()),
            })
        }
        DomainConfig::Ball { center, radius } => {
            if center.len() != dim {
                return Err(IoError::Spec(format!(
                    "ball domain center must have {dim} components"
                )));
            }
            if !(*radius > 0.0) {
                return Err(IoError::Spec("ball domain needs a positive radius".to_string()));
            }
            Ok(Domain::Ball {
                center: DVector::from_vec(center.clone()),
                radius: *radius,
            })
        }
    }
}

/// Build an expression manifold from an inline configuration and run the
/// kernel's validation pass over it.
pub fn build_inline(cfg: &ManifoldConfig) -> Result<Manifold, IoError> {
    if cfg.charts.is_empty() {
        return Err(IoError::Spec("a manifold needs at least one chart".to_string()));
    }
    let n = cfg.dim;
    let mut charts = Vec::with_capacity(cfg.charts.len());
    for c in &cfg.charts {
        if c.metric.len() != n || c.metric.iter().any(|row| row.len() != n) {
            return Err(IoError::Spec(format!(
                "chart `{}` needs an {n}x{n} metric entry matrix",
                c.name
            )));
        }
        let mut entries = Vec::with_capacity(n);
        for row in &c.metric {
            let mut out = Vec::with_capacity(n);
            for src in row {
                out.push(
                    parse_expr(src)
                        .map_err(|e| IoError::Spec(format!("metric entry `{src}`: {e}")))?,
                );
            }
            entries.push(out);
        }
        charts.push(Chart {
            name: c.name.clone(),
            domain: build_domain(&c.domain, n)?,
            metric: MetricField::Expression(ExprMetric::new(entries)?),
        });
    }
    let chart_id = |name: &str| -> Result<ChartId, IoError> {
        charts
            .iter()
            .position(|c| c.name == name)
            .map(ChartId)
            .ok_or_else(|| IoError::Spec(format!("transition names unknown chart `{name}`")))
    };
    let mut transitions = Vec::with_capacity(cfg.transitions.len());
    for t in &cfg.transitions {
        if t.map.len() != n {
            return Err(IoError::Spec(format!(
                "transition `{}`->`{}` needs {n} component expressions",
                t.from, t.to
            )));
        }
        let mut comps = Vec::with_capacity(n);
        for src in &t.map {
            comps.push(
                parse_expr(src)
                    .map_err(|e| IoError::Spec(format!("transition component `{src}`: {e}")))?,
            );
        }
        transitions.push(Transition {
            from: chart_id(&t.from)?,
            to: chart_id(&t.to)?,
            map: TransMap::from_exprs(comps, n),
        });
    }
    let m = Manifold::from_parts(
        ManifoldKind::Expression,
        n,
        charts,
        transitions,
        cfg.epsilon.unwrap_or(crate::defaults::EXPRESSION_EPSILON),
        cfg.name.clone(),
    );
    m.validate()?;
    Ok(m)
}

/// Resolve a manifold reference from a file.
pub fn build_manifold(r: &ManifoldRef) -> Result<Manifold, IoError> {
    match r {
        ManifoldRef::Name(s) => parse_builtin(s),
        ManifoldRef::Inline(cfg) => build_inline(cfg),
    }
}

/// Resolve a command-line manifold argument: a path to a JSON config if
/// one exists there, otherwise a builtin constructor string.
pub fn resolve_manifold(spec: &str) -> Result<Manifold, IoError> {
    let p = Path::new(spec);
    if p.is_file() {
        let cfg: ManifoldConfig = serde_json::from_str(&fs::read_to_string(p)?)?;
        build_inline(&cfg)
    } else {
        parse_builtin(spec)
    }
}

/// First 16 hex digits of the SHA-256 of the canonical string; stamped
/// onto every emitted grid.
pub fn manifold_hash(m: &Manifold) -> String {
    let digest = Sha256::digest(m.canonical_string().as_bytes());
    digest
        .iter()
        .take(8)
        .map(|b| format!("{b:02x}"))
        .collect()
}

// ------------------------------------------------------- curves and fields

/// Chart named by index or by chart name.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ChartRef {
    Index(usize),
    Name(String),
}

impl ChartRef {
    pub fn resolve(&self, m: &Manifold) -> Result<ChartId, IoError> {
        match self {
            ChartRef::Index(i) => {
                if *i >= m.charts().len() {
                    return Err(IoError::Manifold(ManifoldError::ChartIndex(*i)));
                }
                Ok(ChartId(*i))
            }
            ChartRef::Name(s) => Ok(m.chart_id_by_name(s)?),
        }
    }
}

impl fmt::Display for ChartRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChartRef::Index(i) => write!(f, "{i}"),
            ChartRef::Name(s) => write!(f, "{s}"),
        }
    }
}

/// A sampled curve: rows `[t, x1..xn]` in one chart.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurveFile {
    pub manifold: ManifoldRef,
    pub chart: ChartRef,
    pub samples: Vec<Vec<f64>>,
}

/// A sampled field along a curve: rows `[t, w1..wn]`, components in the
/// named chart.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FieldFile {
    pub manifold: ManifoldRef,
    pub chart: ChartRef,
    pub samples: Vec<Vec<f64>>,
}

pub fn load_curve(path: &Path) -> Result<CurveFile, IoError> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

pub fn load_field(path: &Path) -> Result<FieldFile, IoError> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

fn split_samples(samples: &[Vec<f64>], dim: usize) -> Result<(Vec<f64>, Vec<DVector<f64>>), IoError> {
    let mut ts = Vec::with_capacity(samples.len());
    let mut xs = Vec::with_capacity(samples.len());
    for (k, row) in samples.iter().enumerate() {
        if row.len() != dim + 1 {
            return Err(IoError::Spec(format!(
                "sample row {k} has {} entries, expected t plus {dim} components",
                row.len()
            )));
        }
        ts.push(row[0]);
        xs.push(DVector::from_vec(row[1..].to_vec()));
    }
    Ok((ts, xs))
}

/// Resample a curve file onto the uniform N-interval grid.
pub fn curve_to_path(m: &Manifold, file: &CurveFile, n: usize) -> Result<DiscretePath, IoError> {
    let chart = file.chart.resolve(m)?;
    let (ts, xs) = split_samples(&file.samples, m.dim())?;
    let samples: Vec<(f64, DVector<f64>)> = ts.into_iter().zip(xs).collect();
    Ok(resample_path(m, chart, &samples, n)?)
}

/// Interpolate field samples onto a path's grid: per-component cubic
/// splines through the file's rows, evaluated at the path's t values.
/// The file's chart must be the chart the path is represented in.
pub fn field_on_path(
    m: &Manifold,
    file: &FieldFile,
    path: &DiscretePath,
) -> Result<PathTangent, IoError> {
    let chart = file.chart.resolve(m)?;
    if let Some(i) = (0..path.len()).find(|&i| path.chart[i] != chart) {
        return Err(IoError::Path(PathError::ChartMismatch { index: i }));
    }
    let (ts, ws) = split_samples(&file.samples, m.dim())?;
    if ts.len() < 4 {
        return Err(IoError::Spec(format!(
            "field needs at least 4 sample rows, got {}",
            ts.len()
        )));
    }
    let eps = 1e-12;
    if ts[0].abs() > eps || (ts[ts.len() - 1] - 1.0).abs() > eps {
        return Err(IoError::Spec(
            "field samples must span t in [0, 1]".to_string(),
        ));
    }
    let mut w = vec![DVector::zeros(m.dim()); path.len()];
    for d in 0..m.dim() {
        let ys: Vec<f64> = ws.iter().map(|v| v[d]).collect();
        let spline = CubicSpline::fit(&ts, &ys).map_err(PathError::from)?;
        for (i, &t) in path.t.iter().enumerate() {
            w[i][d] = spline.eval(t.clamp(ts[0], ts[ts.len() - 1]));
        }
    }
    Ok(PathTangent::from_components(m, path, w)?)
}

/// Serialize a field along a path back to the file form.
pub fn field_to_file(m: &Manifold, v: &PathTangent) -> FieldFile {
    let samples = v
        .t
        .iter()
        .zip(&v.w)
        .map(|(&t, w)| {
            let mut row = Vec::with_capacity(w.len() + 1);
            row.push(t);
            row.extend(w.iter().copied());
            row
        })
        .collect();
    FieldFile {
        manifold: ManifoldRef::Name(m.canonical_string().to_string()),
        chart: ChartRef::Index(v.chart[0].0),
        samples,
    }
}

// ----------------------------------------------------------- result files

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t_index: usize,
    pub s_reached: f64,
    pub restarts: usize,
    pub chart_switches: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
}

/// Lossless homotopy grid with its summary block.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HomotopyFile {
    pub manifold: String,
    pub manifold_hash: String,
    /// t intervals (columns − 1) and s intervals (rows − 1).
    pub grid_n: usize,
    pub grid_m: usize,
    pub s: Vec<f64>,
    pub t: Vec<f64>,
    pub charts: Vec<Vec<usize>>,
    pub points: Vec<Vec<Vec<f64>>>,
    pub velocities: Vec<Vec<Vec<f64>>>,
    pub diagnostics: Vec<DiagnosticsRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual_sup: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual_certified: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub endpoint_residual: Option<f64>,
}

impl HomotopyFile {
    pub fn from_homotopy(m: &Manifold, hom: &PathHomotopy) -> HomotopyFile {
        HomotopyFile {
            manifold: m.canonical_string().to_string(),
            manifold_hash: manifold_hash(m),
            grid_n: hom.cols() - 1,
            grid_m: hom.rows() - 1,
            s: hom.s.clone(),
            t: hom.t.clone(),
            charts: hom
                .chart
                .iter()
                .map(|row| row.iter().map(|c| c.0).collect())
                .collect(),
            points: hom
                .x
                .iter()
                .map(|row| row.iter().map(|x| x.iter().copied().collect()).collect())
                .collect(),
            velocities: hom
                .v_s
                .iter()
                .map(|row| row.iter().map(|v| v.iter().copied().collect()).collect())
                .collect(),
            diagnostics: hom
                .diagnostics
                .iter()
                .map(|d| DiagnosticsRecord {
                    t_index: d.t_index,
                    s_reached: d.s_reached,
                    restarts: d.restarts,
                    chart_switches: d.chart_switches,
                    residual: d.residual,
                })
                .collect(),
            residual_sup: None,
            residual_certified: None,
            endpoint_residual: None,
        }
    }
}

/// Serialized obstruction, written in place of a homotopy when the
/// boundary-value construction is obstructed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObstructionFile {
    pub manifold: String,
    pub manifold_hash: String,
    pub feasible: bool,
    pub worst_margin: f64,
    pub offending: Vec<usize>,
    pub margins: Vec<f64>,
    pub angles: Vec<f64>,
    pub warnings: Vec<String>,
    pub message: String,
}

impl ObstructionFile {
    pub fn from_report(m: &Manifold, r: &ObstructionReport) -> ObstructionFile {
        ObstructionFile {
            manifold: m.canonical_string().to_string(),
            manifold_hash: manifold_hash(m),
            feasible: r.feasible,
            worst_margin: r.worst_margin,
            offending: r.offending.clone(),
            margins: r.margins.clone(),
            angles: r.angles.clone(),
            warnings: r.warnings.clone(),
            message: r.message.clone(),
        }
    }
}

/// Serialized completeness probe (grid omitted; the homotopy, when one
/// exists, is written separately).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProbeFile {
    pub manifold: String,
    pub manifold_hash: String,
    pub s_target: f64,
    pub complete: bool,
    pub reached: Vec<f64>,
    pub failures: Vec<String>,
}

impl ProbeFile {
    pub fn from_report(m: &Manifold, r: &CompletenessReport) -> ProbeFile {
        ProbeFile {
            manifold: m.canonical_string().to_string(),
            manifold_hash: manifold_hash(m),
            s_target: r.s_target,
            complete: r.complete,
            reached: r.reached.clone(),
            failures: r.failures.clone(),
        }
    }
}

/// Flatten a homotopy to CSV rows `s,t,x1..xn,speed,residual` for
/// plotting; `speed` is the metric norm of the transverse velocity.
pub fn homotopy_csv(
    m: &Manifold,
    hom: &PathHomotopy,
    residual: Option<&crate::homotopy::residual::ResidualField>,
) -> Result<String, IoError> {
    let dim = m.dim();
    let mut out = String::from("s,t");
    for d in 0..dim {
        out.push_str(&format!(",x{}", d + 1));
    }
    out.push_str(",speed,residual\n");
    for j in 0..hom.rows() {
        for i in 0..hom.cols() {
            let speed = m.g_norm(hom.chart[j][i], &hom.x[j][i], &hom.v_s[j][i])?;
            out.push_str(&format!("{},{}", hom.s[j], hom.t[i]));
            for d in 0..dim {
                out.push_str(&format!(",{}", hom.x[j][i][d]));
            }
            match residual {
                Some(r) => out.push_str(&format!(",{speed},{}\n", r.values[j][i])),
                None => out.push_str(&format!(",{speed},\n")),
            }
        }
    }
    Ok(out)
}

/// Write a file atomically: the content lands under a temporary name in
/// the destination directory and is renamed over the target, so readers
/// never observe a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), IoError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let mut tmp = match dir {
        Some(d) => {
            fs::create_dir_all(d)?;
            tempfile::NamedTempFile::new_in(d)?
        }
        None => tempfile::NamedTempFile::new_in(".")?,
    };
    tmp.write_all(contents)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| IoError::Io(e.error))?;
    Ok(())
}

/// Pretty JSON with a trailing newline — the one serialization used for
/// every emitted file, so byte-identity of reruns reduces to value
/// identity.
pub fn to_json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>, IoError> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s.into_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn open_disk_is_a_valid_incomplete_manifold() {
        let m = open_disk();
        assert_eq!(m.canonical_string(), "open-disk(2)");
        m.validate().unwrap();
        let inside = DVector::from_vec(vec![0.7, 0.0]);
        let outside = DVector::from_vec(vec![1.1, 0.0]);
        assert!(m.contains(ChartId(0), &inside).unwrap());
        assert!(!m.contains(ChartId(0), &outside).unwrap());
        // flat metric: christoffel symbols vanish identically
        let gamma = m.christoffel(ChartId(0), &inside).unwrap();
        let mut worst = 0.0f64;
        for k in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    worst = worst.max(gamma.get(k, i, j).abs());
                }
            }
        }
        assert!(worst <= 1e-12);
    }

    #[test]
    fn builtin_names_parse() {
        assert_eq!(parse_builtin("euclidean(2)").unwrap().canonical_string(), "euclidean(2)");
        assert_eq!(parse_builtin("sphere(2,1)").unwrap().canonical_string(), "sphere(2,r=1)");
        assert_eq!(
            parse_builtin("sphere(2, r=2.5)").unwrap().canonical_string(),
            "sphere(2,r=2.5)"
        );
        assert_eq!(parse_builtin("sphere(3)").unwrap().canonical_string(), "sphere(3,r=1)");
        assert_eq!(
            parse_builtin("hyperbolic(2)").unwrap().canonical_string(),
            "hyperbolic(2)"
        );
        assert_eq!(
            parse_builtin("flat-torus(3)").unwrap().canonical_string(),
            "flat-torus(3)"
        );
        assert_eq!(
            parse_builtin("open-disk(2)").unwrap().canonical_string(),
            "open-disk(2)"
        );
        for bad in [
            "mobius(2)",
            "sphere(2",
            "sphere(2,-1)",
            "euclidean(x)",
            "euclidean(0)",
            "open-disk(3)",
            "euclidean",
        ] {
            assert!(parse_builtin(bad).is_err(), "`{bad}` should not parse");
        }
    }

    #[test]
    fn inline_manifold_builds_and_validates() {
        let src = r#"{
            "name": "half-plane(2)",
            "dim": 2,
            "charts": [{
                "name": "upper",
                "metric": [["1/x2^2", "0"], ["0", "1/x2^2"]],
                "domain": {"shape": "box", "lo": [-10.0, 0.001], "hi": [10.0, 10.0]}
            }]
        }"#;
        let cfg: ManifoldConfig = serde_json::from_str(src).unwrap();
        let m = build_inline(&cfg).unwrap();
        assert_eq!(m.canonical_string(), "half-plane(2)");
        let x = DVector::from_vec(vec![0.0, 2.0]);
        let g = m.metric_at(ChartId(0), &x).unwrap();
        assert_relative_eq!(g[(0, 0)], 0.25, epsilon = 1e-15);
    }

    #[test]
    fn ball_domain_config_round_trips() {
        let cfg = DomainConfig::Ball {
            center: vec![0.0, 0.0],
            radius: 1.0,
        };
        let json = serde_json::to_string(&cfg).unwrap();
        assert!(json.contains("\"shape\":\"ball\""));
        let back: DomainConfig = serde_json::from_str(&json).unwrap();
        assert!(matches!(back, DomainConfig::Ball { radius, .. } if radius == 1.0));
    }

    #[test]
    fn bad_inline_configs_are_rejected() {
        let base = r#"{"name": "m", "dim": 2, "charts": [{"name": "c", "metric": [["1","0"],["0","1"]]}]}"#;
        let ok: ManifoldConfig = serde_json::from_str(base).unwrap();
        assert!(build_inline(&ok).is_ok());
        let mut wrong_size = ok.clone();
        wrong_size.charts[0].metric = vec![vec!["1".to_string()]];
        assert!(build_inline(&wrong_size).is_err());
        let mut bad_expr = ok.clone();
        bad_expr.charts[0].metric[0][0] = "1 +* x1".to_string();
        assert!(build_inline(&bad_expr).is_err());
        let mut bad_transition = ok;
        bad_transition.transitions.push(TransitionConfig {
            from: "c".to_string(),
            to: "nowhere".to_string(),
            map: vec!["x1".to_string(), "x2".to_string()],
        });
        assert!(build_inline(&bad_transition).is_err());
    }

    #[test]
    fn hash_is_short_stable_hex() {
        let m1 = builtin::euclidean(2);
        let m2 = builtin::sphere(2, 1.0);
        let h1 = manifold_hash(&m1);
        let h2 = manifold_hash(&m2);
        assert_eq!(h1.len(), 16);
        assert!(h1.chars().all(|c| c.is_ascii_hexdigit()));
        assert_ne!(h1, h2);
        assert_eq!(h1, manifold_hash(&builtin::euclidean(2)));
    }

    #[test]
    fn curve_files_load_and_resample() {
        let src = r#"{
            "manifold": "euclidean(2)",
            "chart": 0,
            "samples": [[0.0, 0.0, 0.0], [0.25, 0.25, 0.5], [0.5, 0.5, 1.0],
                        [0.75, 0.75, 1.5], [1.0, 1.0, 2.0]]
        }"#;
        let file: CurveFile = serde_json::from_str(src).unwrap();
        let m = build_manifold(&file.manifold).unwrap();
        let path = curve_to_path(&m, &file, 16).unwrap();
        assert_eq!(path.len(), 17);
        for (i, &t) in path.t.iter().enumerate() {
            assert!((path.x[i][0] - t).abs() <= 1e-10);
            assert!((path.x[i][1] - 2.0 * t).abs() <= 1e-10);
        }
    }

    #[test]
    fn chart_names_resolve_in_curve_files() {
        let src = r#"{
            "manifold": "sphere(2,r=1)",
            "chart": "north",
            "samples": [[0.0, 0.1, 0.0], [0.5, 0.2, 0.1], [1.0, 0.3, 0.2], [0.25, 0.0, 0.0]]
        }"#;
        let file: CurveFile = serde_json::from_str(src).unwrap();
        let m = build_manifold(&file.manifold).unwrap();
        assert_eq!(file.chart.resolve(&m).unwrap(), ChartId(0));
        assert!(ChartRef::Name("east".to_string()).resolve(&m).is_err());
        assert!(ChartRef::Index(7).resolve(&m).is_err());
    }

    #[test]
    fn fields_interpolate_onto_the_path_grid() {
        let m = builtin::euclidean(2);
        let curve = CurveFile {
            manifold: ManifoldRef::Name("euclidean(2)".to_string()),
            chart: ChartRef::Index(0),
            samples: (0..9)
                .map(|k| {
                    let t = k as f64 / 8.0;
                    vec![t, t, 0.5 * t]
                })
                .collect(),
        };
        let path = curve_to_path(&m, &curve, 20).unwrap();
        // components cubic in t: the spline reproduces them exactly
        let field = FieldFile {
            manifold: ManifoldRef::Name("euclidean(2)".to_string()),
            chart: ChartRef::Index(0),
            samples: (0..9)
                .map(|k| {
                    let t = k as f64 / 8.0;
                    vec![t, t * t * t - 0.5 * t, 1.0 + t * t]
                })
                .collect(),
        };
        let v = field_on_path(&m, &field, &path).unwrap();
        for (i, &t) in path.t.iter().enumerate() {
            assert!((v.w[i][0] - (t * t * t - 0.5 * t)).abs() <= 1e-12);
            assert!((v.w[i][1] - (1.0 + t * t)).abs() <= 1e-12);
        }
        // round trip back to the file form keeps the samples
        let out = field_to_file(&m, &v);
        assert_eq!(out.samples.len(), path.len());
        assert_eq!(out.samples[3][0], path.t[3]);
    }

    #[test]
    fn field_chart_must_match_the_path() {
        let m = builtin::sphere(2, 1.0);
        let curve = CurveFile {
            manifold: ManifoldRef::Name("sphere(2,r=1)".to_string()),
            chart: ChartRef::Index(0),
            samples: (0..9)
                .map(|k| {
                    let t = k as f64 / 8.0;
                    vec![t, 0.5 + 0.1 * t, 0.2 * t]
                })
                .collect(),
        };
        let path = curve_to_path(&m, &curve, 16).unwrap();
        let field = FieldFile {
            manifold: ManifoldRef::Name("sphere(2,r=1)".to_string()),
            chart: ChartRef::Index(1),
            samples: (0..5)
                .map(|k| vec![k as f64 / 4.0, 0.1, 0.2])
                .collect(),
        };
        assert!(matches!(
            field_on_path(&m, &field, &path),
            Err(IoError::Path(PathError::ChartMismatch { index: 0 }))
        ));
    }

    #[test]
    fn homotopy_files_round_trip() {
        use crate::homotopy::pathspace_geodesic_ivp;
        let m = builtin::euclidean(2);
        let curve = CurveFile {
            manifold: ManifoldRef::Name("euclidean(2)".to_string()),
            chart: ChartRef::Index(0),
            samples: (0..9)
                .map(|k| {
                    let t = k as f64 / 8.0;
                    vec![t, t, -t]
                })
                .collect(),
        };
        let path = curve_to_path(&m, &curve, 16).unwrap();
        let w: Vec<DVector<f64>> = path
            .t
            .iter()
            .map(|&t| DVector::from_vec(vec![t, 1.0 - t]))
            .collect();
        let v = PathTangent::from_components(&m, &path, w).unwrap();
        let hom = pathspace_geodesic_ivp(&m, &path, &v, 1.0, 8).unwrap();
        let file = HomotopyFile::from_homotopy(&m, &hom);
        let bytes = to_json_bytes(&file).unwrap();
        let back: HomotopyFile = serde_json::from_slice(&bytes).unwrap();
        assert_eq!(back.grid_n, 16);
        assert_eq!(back.grid_m, 8);
        assert_eq!(back.s, hom.s);
        assert_eq!(back.points.len(), hom.rows());
        assert_eq!(back.points[3][5][0], hom.x[3][5][0]);
        let csv = homotopy_csv(&m, &hom, None).unwrap();
        assert_eq!(csv.lines().count(), 1 + hom.rows() * hom.cols());
        assert!(csv.starts_with("s,t,x1,x2,speed,residual"));
    }

    #[test]
    fn atomic_writes_land_complete_and_overwrite() {
        let dir = tempfile::tempdir().unwrap();
        let target = dir.path().join("out/report.json");
        write_atomic(&target, b"{\"a\": 1}\n").unwrap();
        assert_eq!(fs::read(&target).unwrap(), b"{\"a\": 1}\n");
        write_atomic(&target, b"{\"a\": 2}\n").unwrap();
        assert_eq!(fs::read(&target).unwrap(), b"{\"a\": 2}\n");
    }
}
