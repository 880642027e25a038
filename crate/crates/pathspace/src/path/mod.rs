//! Discretized paths and vector fields along them.
//!
//! A path is sampled on the uniform grid t_i = i/N with a chart id per
//! sample, so paths may wander across the atlas. Every derivative taken
//! here is a fourth-order finite difference computed chart-aware: before
//! differencing at sample i, neighboring samples are re-represented in
//! sample i's chart through the transition maps, so stencil windows never
//! mix coordinate systems.

pub mod chart;
pub mod norm;
pub mod spline;

use crate::expr::MetricExpr;
use crate::geodesic::GeodesicError;
use crate::manifold::{ChartId, Manifold, ManifoldError, Point, TangentVector};
use crate::stencil;
use nalgebra::{DMatrix, DVector};
use spline::{CubicSpline, SplineError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PathError {
    #[error("too few samples: got {got}, need at least {need}")]
    TooFewSamples { got: usize, need: usize },
    #[error("grid too coarse: N = {got}, need at least {need}")]
    GridTooCoarse { got: usize, need: usize },
    #[error("bad parameterization: {0}")]
    BadParameterization(String),
    #[error("parameter {0} outside [0, 1]")]
    OutOfRangeT(f64),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("chart mismatch at sample {index}")]
    ChartMismatch { index: usize },
    #[error("sample {index} lies outside the atlas")]
    OutsideAtlas { index: usize },
    #[error("invalid chart cover: {0}")]
    CoverInvalid(String),
    #[error("field norm {norm:.6} at sample {index} exceeds the chart gate epsilon = {epsilon:.6}")]
    RadiusExceeded {
        index: usize,
        norm: f64,
        epsilon: f64,
    },
    #[error("antipodal degeneracy at sample {index} (angle {angle:.9})")]
    AntipodalDegeneracy { index: usize, angle: f64 },
    #[error("no convergence at sample {index}: {detail}")]
    NoConvergence { index: usize, detail: String },
    #[error("field undefined at sample {index}: {detail}")]
    FieldUndefined { index: usize, detail: String },
    #[error("geodesic failure at sample {index}: {source}")]
    Geodesic {
        index: usize,
        #[source]
        source: Box<GeodesicError>,
    },
    #[error(transparent)]
    Spline(#[from] SplineError),
    #[error(transparent)]
    Manifold(#[from] ManifoldError),
}

/// Wrap a per-sample geodesic failure, promoting the failure kinds that
/// carry contract meaning (gate violations, antipodal degeneracy).
pub(crate) fn sample_geodesic_error(index: usize, e: GeodesicError) -> PathError {
    match e {
        GeodesicError::RadiusExceeded { norm, epsilon } => PathError::RadiusExceeded {
            index,
            norm,
            epsilon,
        },
        GeodesicError::AntipodalDegeneracy { angle } => {
            PathError::AntipodalDegeneracy { index, angle }
        }
        GeodesicError::NoConvergence { iters, residual } => PathError::NoConvergence {
            index,
            detail: format!("{iters} iterations, residual {residual:.3e}"),
        },
        other => PathError::Geodesic {
            index,
            source: Box::new(other),
        },
    }
}

/// A path sampled on the uniform grid t_i = i/N.
#[derive(Debug, Clone)]
pub struct DiscretePath {
    pub t: Vec<f64>,
    pub chart: Vec<ChartId>,
    pub x: Vec<DVector<f64>>,
    /// Derivative samples γ′(t_i), components in the sample's chart.
    pub dx: Vec<DVector<f64>>,
}

/// A vector field along a path, sampled on the path's grid. Components
/// live in the path's chart at each sample.
#[derive(Debug, Clone)]
pub struct PathTangent {
    pub t: Vec<f64>,
    pub chart: Vec<ChartId>,
    pub w: Vec<DVector<f64>>,
    /// Derivative samples X′(t_i) of the chart representative.
    pub dw: Vec<DVector<f64>>,
}

fn check_uniform_unit_grid(t: &[f64]) -> Result<(), PathError> {
    let n = t.len() - 1;
    if n == 0 {
        return Err(PathError::TooFewSamples { got: 1, need: 5 });
    }
    for (i, &ti) in t.iter().enumerate() {
        let want = i as f64 / n as f64;
        if (ti - want).abs() > 1e-12 {
            return Err(PathError::BadParameterization(format!(
                "sample {i} at t = {ti} is not on the uniform grid i/{n}"
            )));
        }
    }
    Ok(())
}

/// Re-represent a position into `target`'s chart.
fn position_in(
    m: &Manifold,
    chart: ChartId,
    x: &DVector<f64>,
    target: ChartId,
) -> Result<DVector<f64>, ManifoldError> {
    if chart == target {
        Ok(x.clone())
    } else {
        Ok(m.chart_transition(chart, target, x)?.image)
    }
}

/// Re-represent tangent components at (chart, x) into `target`'s chart.
fn vector_in(
    m: &Manifold,
    chart: ChartId,
    x: &DVector<f64>,
    w: &DVector<f64>,
    target: ChartId,
) -> Result<DVector<f64>, ManifoldError> {
    if chart == target {
        Ok(w.clone())
    } else {
        Ok(m.chart_transition(chart, target, x)?.push_vector(w))
    }
}

/// Fourth-order derivative samples of positions, chart-aware: for each i
/// the stencil window is mapped into chart_i before differencing.
pub(crate) fn position_derivatives(
    m: &Manifold,
    t: &[f64],
    chart: &[ChartId],
    x: &[DVector<f64>],
) -> Result<Vec<DVector<f64>>, PathError> {
    let n = t.len();
    if n < 5 {
        return Err(PathError::TooFewSamples { got: n, need: 5 });
    }
    let h = t[1] - t[0];
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let (offs, coeffs) = stencil::d1_stencil(i, n);
        let mut acc = DVector::zeros(x[0].len());
        for (&o, &c) in offs.iter().zip(coeffs) {
            let j = (i as isize + o) as usize;
            let xj = position_in(m, chart[j], &x[j], chart[i])?;
            acc += xj * c;
        }
        out.push(acc / h);
    }
    Ok(out)
}

/// Fourth-order derivative samples of a field along a path, chart-aware.
pub(crate) fn field_derivatives(
    m: &Manifold,
    path: &DiscretePath,
    w: &[DVector<f64>],
) -> Result<Vec<DVector<f64>>, PathError> {
    let n = path.len();
    if n < 5 {
        return Err(PathError::TooFewSamples { got: n, need: 5 });
    }
    let h = path.grid_step();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let (offs, coeffs) = stencil::d1_stencil(i, n);
        let mut acc = DVector::zeros(w[0].len());
        for (&o, &c) in offs.iter().zip(coeffs) {
            let j = (i as isize + o) as usize;
            let wj = vector_in(m, path.chart[j], &path.x[j], &w[j], path.chart[i])?;
            acc += wj * c;
        }
        out.push(acc / h);
    }
    Ok(out)
}

impl DiscretePath {
    /// Number of samples (N + 1).
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn grid_step(&self) -> f64 {
        1.0 / (self.t.len() - 1) as f64
    }

    pub fn dim(&self) -> usize {
        self.x[0].len()
    }

    pub fn point(&self, i: usize) -> Point {
        Point::new(self.chart[i], self.x[i].clone())
    }

    pub fn single_chart(&self) -> Option<ChartId> {
        let c0 = self.chart[0];
        self.chart.iter().all(|&c| c == c0).then_some(c0)
    }

    /// Assemble from raw parts without derivative estimation; all
    /// invariants are the caller's responsibility.
    pub(crate) fn from_parts(
        t: Vec<f64>,
        chart: Vec<ChartId>,
        x: Vec<DVector<f64>>,
        dx: Vec<DVector<f64>>,
    ) -> DiscretePath {
        DiscretePath { t, chart, x, dx }
    }

    /// Build a path from uniform-grid samples, estimating derivatives by
    /// chart-aware fourth-order differences. Validates the grid, domain
    /// membership, and chart-break consistency (at a chart change the
    /// samples must sit in the overlap with round-trip agreement 1e-10).
    pub fn from_samples(
        m: &Manifold,
        t: Vec<f64>,
        chart: Vec<ChartId>,
        x: Vec<DVector<f64>>,
    ) -> Result<DiscretePath, PathError> {
        let n = t.len();
        if n < 5 {
            return Err(PathError::TooFewSamples { got: n, need: 5 });
        }
        if chart.len() != n || x.len() != n {
            return Err(PathError::GridMismatch(format!(
                "{n} t-samples, {} chart ids, {} points",
                chart.len(),
                x.len()
            )));
        }
        check_uniform_unit_grid(&t)?;
        for (i, (c, xi)) in chart.iter().zip(&x).enumerate() {
            if !m.contains(*c, xi)? {
                return Err(PathError::OutsideAtlas { index: i });
            }
        }
        for i in 0..n - 1 {
            if chart[i] != chart[i + 1] {
                for (c_from, c_to, pt) in [
                    (chart[i], chart[i + 1], &x[i]),
                    (chart[i + 1], chart[i], &x[i + 1]),
                ] {
                    let fwd = m.chart_transition(c_from, c_to, pt).map_err(|_| {
                        PathError::ChartMismatch { index: i }
                    })?;
                    let back = m.chart_transition(c_to, c_from, &fwd.image).map_err(|_| {
                        PathError::ChartMismatch { index: i }
                    })?;
                    if (&back.image - pt).norm() > 1e-10 {
                        return Err(PathError::ChartMismatch { index: i });
                    }
                }
            }
        }
        let dx = position_derivatives(m, &t, &chart, &x)?;
        Ok(DiscretePath { t, chart, x, dx })
    }
}

/// Cubic-spline resampling of scattered single-chart samples onto the
/// uniform grid t_i = i/N, with derivative samples from the spline.
pub fn resample_path(
    m: &Manifold,
    chart: ChartId,
    samples: &[(f64, DVector<f64>)],
    n: usize,
) -> Result<DiscretePath, PathError> {
    if samples.len() < 4 {
        return Err(PathError::TooFewSamples {
            got: samples.len(),
            need: 4,
        });
    }
    if n < 16 {
        return Err(PathError::GridTooCoarse { got: n, need: 16 });
    }
    let ts: Vec<f64> = samples.iter().map(|(t, _)| *t).collect();
    for i in 1..ts.len() {
        if !(ts[i] > ts[i - 1]) {
            return Err(PathError::BadParameterization(format!(
                "sample parameters must increase strictly (violated at index {i})"
            )));
        }
    }
    if ts[0].abs() > 1e-12 || (ts[ts.len() - 1] - 1.0).abs() > 1e-12 {
        return Err(PathError::BadParameterization(
            "sample parameters must start at 0 and end at 1".to_string(),
        ));
    }
    for (i, (_, p)) in samples.iter().enumerate() {
        if !m.contains(chart, p)? {
            return Err(PathError::OutsideAtlas { index: i });
        }
    }
    let dim = samples[0].1.len();
    let splines: Vec<CubicSpline> = (0..dim)
        .map(|d| {
            let ys: Vec<f64> = samples.iter().map(|(_, p)| p[d]).collect();
            CubicSpline::fit(&ts, &ys)
        })
        .collect::<Result<_, _>>()?;
    let t: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
    let mut x = Vec::with_capacity(n + 1);
    let mut dx = Vec::with_capacity(n + 1);
    for &ti in &t {
        let p = DVector::from_iterator(dim, splines.iter().map(|s| s.eval(ti)));
        let d = DVector::from_iterator(dim, splines.iter().map(|s| s.deriv(ti)));
        x.push(p);
        dx.push(d);
    }
    for (i, p) in x.iter().enumerate() {
        if !m.contains(chart, p)? {
            return Err(PathError::OutsideAtlas { index: i });
        }
    }
    Ok(DiscretePath {
        t,
        chart: vec![chart; n + 1],
        x,
        dx,
    })
}

/// Six-point Lagrange interpolation: value and derivative at `t`.
fn lagrange_window(ts: &[f64], ys: &[f64], t: f64) -> (f64, f64) {
    let k = ts.len();
    let mut value = 0.0;
    let mut deriv = 0.0;
    for j in 0..k {
        // basis value
        let mut lj = 1.0;
        for i in 0..k {
            if i != j {
                lj *= (t - ts[i]) / (ts[j] - ts[i]);
            }
        }
        // basis derivative: sum over holes of the product with one factor
        // replaced by 1/(ts[j]-ts[i])
        let mut dlj = 0.0;
        for i in 0..k {
            if i == j {
                continue;
            }
            let mut term = 1.0 / (ts[j] - ts[i]);
            for l in 0..k {
                if l != j && l != i {
                    term *= (t - ts[l]) / (ts[j] - ts[l]);
                }
            }
            dlj += term;
        }
        value += ys[j] * lj;
        deriv += ys[j] * dlj;
    }
    (value, deriv)
}

/// Window of up to 6 sample indices centered at the sample nearest `t`.
fn window_indices(n: usize, t: f64, h: f64) -> (usize, usize) {
    let center = (t / h).round() as usize;
    let half = 3usize;
    let lo = center.saturating_sub(half).min(n.saturating_sub(6));
    let hi = (lo + 6).min(n);
    (lo, hi)
}

/// The evaluation map ev_t: interpolate the path at an off-grid
/// parameter. Single-chart paths use a global cubic spline; multi-chart
/// paths use a local six-point window re-represented in the chart of the
/// nearest sample.
pub fn evaluate_at(m: &Manifold, path: &DiscretePath, t: f64) -> Result<Point, PathError> {
    if !(0.0..=1.0).contains(&t) {
        return Err(PathError::OutOfRangeT(t));
    }
    let n = path.len();
    if let Some(c) = path.single_chart() {
        let ys: Vec<Vec<f64>> = (0..path.dim())
            .map(|d| path.x.iter().map(|p| p[d]).collect())
            .collect();
        let coords = DVector::from_iterator(
            path.dim(),
            ys.iter()
                .map(|col| CubicSpline::fit(&path.t, col).map(|s| s.eval(t)))
                .collect::<Result<Vec<_>, _>>()?,
        );
        return Ok(Point::new(c, coords));
    }
    let h = path.grid_step();
    let (lo, hi) = window_indices(n - 1, t, h);
    let target = path.chart[((t / h).round() as usize).min(n - 1)];
    let ts = &path.t[lo..hi];
    let mut coords = DVector::zeros(path.dim());
    for d in 0..path.dim() {
        let mut ys = Vec::with_capacity(hi - lo);
        for j in lo..hi {
            let xj = position_in(m, path.chart[j], &path.x[j], target)?;
            ys.push(xj[d]);
        }
        coords[d] = lagrange_window(ts, &ys, t).0;
    }
    Ok(Point::new(target, coords))
}

/// Differential of the evaluation map: the field interpolated at `t`,
/// based at the interpolated path point.
pub fn d_evaluate_at(
    m: &Manifold,
    path: &DiscretePath,
    field: &PathTangent,
    t: f64,
) -> Result<TangentVector, PathError> {
    field.check_along(path)?;
    let base = evaluate_at(m, path, t)?;
    let n = path.len();
    let comps = if path.single_chart().is_some() {
        DVector::from_iterator(
            path.dim(),
            (0..path.dim())
                .map(|d| {
                    let col: Vec<f64> = field.w.iter().map(|w| w[d]).collect();
                    CubicSpline::fit(&path.t, &col).map(|s| s.eval(t))
                })
                .collect::<Result<Vec<_>, _>>()?,
        )
    } else {
        let h = path.grid_step();
        let (lo, hi) = window_indices(n - 1, t, h);
        let ts = &path.t[lo..hi];
        let mut comps = DVector::zeros(path.dim());
        for d in 0..path.dim() {
            let mut ys = Vec::with_capacity(hi - lo);
            for j in lo..hi {
                let wj = vector_in(m, path.chart[j], &path.x[j], &field.w[j], base.chart)?;
                ys.push(wj[d]);
            }
            comps[d] = lagrange_window(ts, &ys, t).0;
        }
        comps
    };
    Ok(TangentVector::new(base.chart, base.coords, comps))
}

impl PathTangent {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.w[0].len()
    }

    /// Zero field on a path's grid.
    pub fn zeros_along(path: &DiscretePath) -> PathTangent {
        let z = DVector::zeros(path.dim());
        PathTangent {
            t: path.t.clone(),
            chart: path.chart.clone(),
            w: vec![z.clone(); path.len()],
            dw: vec![z; path.len()],
        }
    }

    /// Build from component samples, estimating derivative samples by
    /// chart-aware fourth-order differences along the path.
    pub fn from_components(
        m: &Manifold,
        path: &DiscretePath,
        w: Vec<DVector<f64>>,
    ) -> Result<PathTangent, PathError> {
        if w.len() != path.len() {
            return Err(PathError::GridMismatch(format!(
                "{} field samples on a {}-sample path",
                w.len(),
                path.len()
            )));
        }
        let dw = field_derivatives(m, path, &w)?;
        Ok(PathTangent {
            t: path.t.clone(),
            chart: path.chart.clone(),
            w,
            dw,
        })
    }

    /// Verify this field rides on the given path's grid and charts.
    pub fn check_along(&self, path: &DiscretePath) -> Result<(), PathError> {
        if self.len() != path.len() {
            return Err(PathError::GridMismatch(format!(
                "field has {} samples, path has {}",
                self.len(),
                path.len()
            )));
        }
        for i in 0..self.len() {
            if self.chart[i] != path.chart[i] {
                return Err(PathError::ChartMismatch { index: i });
            }
        }
        Ok(())
    }

    /// a·X + b·Y on a shared grid.
    pub fn combine(&self, a: f64, other: &PathTangent, b: f64) -> Result<PathTangent, PathError> {
        if self.len() != other.len() {
            return Err(PathError::GridMismatch(format!(
                "{} vs {} samples",
                self.len(),
                other.len()
            )));
        }
        for i in 0..self.len() {
            if self.chart[i] != other.chart[i] {
                return Err(PathError::ChartMismatch { index: i });
            }
        }
        Ok(PathTangent {
            t: self.t.clone(),
            chart: self.chart.clone(),
            w: self
                .w
                .iter()
                .zip(&other.w)
                .map(|(x, y)| x * a + y * b)
                .collect(),
            dw: self
                .dw
                .iter()
                .zip(&other.dw)
                .map(|(x, y)| x * a + y * b)
                .collect(),
        })
    }

    pub fn scale(&self, a: f64) -> PathTangent {
        PathTangent {
            t: self.t.clone(),
            chart: self.chart.clone(),
            w: self.w.iter().map(|x| x * a).collect(),
            dw: self.dw.iter().map(|x| x * a).collect(),
        }
    }

    /// Sup over samples of the euclidean length of the value samples.
    pub fn sup_value_norm(&self) -> f64 {
        self.w.iter().map(|w| w.norm()).fold(0.0, f64::max)
    }
}

/// An ambient vector field given by component expressions per chart, with
/// a symbolically differentiated Jacobian for chain-rule derivatives.
#[derive(Debug, Clone)]
pub struct AmbientField {
    comps: Vec<Vec<MetricExpr>>,
    jac: Vec<Vec<Vec<MetricExpr>>>,
}

impl AmbientField {
    pub fn new(m: &Manifold, comps: Vec<Vec<MetricExpr>>) -> Result<AmbientField, PathError> {
        let n = m.dim();
        if comps.len() != m.charts().len() {
            return Err(PathError::GridMismatch(format!(
                "field defines {} chart blocks, manifold has {} charts",
                comps.len(),
                m.charts().len()
            )));
        }
        for block in &comps {
            if block.len() != n {
                return Err(PathError::GridMismatch(format!(
                    "field component count {} does not match dimension {n}",
                    block.len()
                )));
            }
            for e in block {
                if e.max_var() > n {
                    return Err(PathError::BadParameterization(format!(
                        "field expression uses x{} beyond dimension {n}",
                        e.max_var()
                    )));
                }
            }
        }
        let jac = comps
            .iter()
            .map(|block| {
                block
                    .iter()
                    .map(|e| (0..n).map(|v| e.diff(v)).collect())
                    .collect()
            })
            .collect();
        Ok(AmbientField { comps, jac })
    }

    pub fn from_strings(m: &Manifold, blocks: &[Vec<String>]) -> Result<AmbientField, PathError> {
        let comps = blocks
            .iter()
            .map(|block| {
                block
                    .iter()
                    .map(|s| crate::expr::parse_expr(s))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| PathError::BadParameterization(format!("field expression: {e}")))?;
        AmbientField::new(m, comps)
    }

    pub fn value(&self, chart: ChartId, x: &DVector<f64>) -> Result<DVector<f64>, crate::expr::EvalError> {
        let block = &self.comps[chart.0];
        let coords: Vec<f64> = x.iter().copied().collect();
        Ok(DVector::from_iterator(
            block.len(),
            block
                .iter()
                .map(|e| e.eval(&coords))
                .collect::<Result<Vec<_>, _>>()?,
        ))
    }

    pub fn jacobian(&self, chart: ChartId, x: &DVector<f64>) -> Result<DMatrix<f64>, crate::expr::EvalError> {
        let block = &self.jac[chart.0];
        let n = block.len();
        let coords: Vec<f64> = x.iter().copied().collect();
        let mut out = DMatrix::zeros(n, n);
        for (i, row) in block.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                out[(i, j)] = e.eval(&coords)?;
            }
        }
        Ok(out)
    }
}

/// Lift an ambient field to a field along the path: samples K(γ(t_i)),
/// derivative samples by the chain rule dK·γ′.
pub fn lift_vector_field(
    m: &Manifold,
    k: &AmbientField,
    path: &DiscretePath,
) -> Result<PathTangent, PathError> {
    if k.comps.len() != m.charts().len() {
        return Err(PathError::GridMismatch(format!(
            "ambient field defines {} chart blocks, manifold has {} charts",
            k.comps.len(),
            m.charts().len()
        )));
    }
    let mut w = Vec::with_capacity(path.len());
    let mut dw = Vec::with_capacity(path.len());
    for i in 0..path.len() {
        let value = k
            .value(path.chart[i], &path.x[i])
            .map_err(|e| PathError::FieldUndefined {
                index: i,
                detail: e.to_string(),
            })?;
        let jac = k
            .jacobian(path.chart[i], &path.x[i])
            .map_err(|e| PathError::FieldUndefined {
                index: i,
                detail: e.to_string(),
            })?;
        dw.push(&jac * &path.dx[i]);
        w.push(value);
    }
    Ok(PathTangent {
        t: path.t.clone(),
        chart: path.chart.clone(),
        w,
        dw,
    })
}

/// Re-represent an entire path in a single target chart (positions via
/// the transition map, derivatives via its Jacobian).
pub fn path_in_chart(
    m: &Manifold,
    path: &DiscretePath,
    target: ChartId,
) -> Result<DiscretePath, PathError> {
    let mut x = Vec::with_capacity(path.len());
    let mut dx = Vec::with_capacity(path.len());
    for i in 0..path.len() {
        if path.chart[i] == target {
            x.push(path.x[i].clone());
            dx.push(path.dx[i].clone());
        } else {
            let eval = m.chart_transition(path.chart[i], target, &path.x[i])?;
            dx.push(eval.push_vector(&path.dx[i]));
            x.push(eval.image);
        }
    }
    Ok(DiscretePath {
        t: path.t.clone(),
        chart: vec![target; path.len()],
        x,
        dx,
    })
}
