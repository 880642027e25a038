//! Finite-dimensional Riemannian manifolds presented as chart atlases.
//!
//! A manifold is a list of charts — each a coordinate domain with a metric
//! tensor — plus transition maps between overlapping charts. Built-in
//! constant-curvature families (euclidean, sphere, hyperbolic, flat torus)
//! carry closed-form metric data; user-defined manifolds supply metric
//! entries and transitions as [`crate::expr::MetricExpr`] strings, with all
//! derivatives taken symbolically.
//!
//! Everything downstream (geodesics, path norms, homotopies) consumes
//! manifolds only through the chart interface defined here: metric
//! evaluation, Christoffel symbols, domain membership, and transitions
//! with first and second derivatives.

pub mod builtin;
pub mod curvature;
pub mod expression;
pub mod tensor;
pub mod transition;

use crate::defaults;
use crate::expr::{EvalError, ParseError};
use expression::ExprMetric;
use nalgebra::{DMatrix, DVector};
use transition::{Transition, TransitionEval};

use thiserror::Error;

/// Index of a chart within its manifold's atlas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ChartId(pub usize);

/// A manifold point: chart index plus chart coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub chart: ChartId,
    pub coords: DVector<f64>,
}

impl Point {
    pub fn new(chart: ChartId, coords: DVector<f64>) -> Point {
        Point { chart, coords }
    }
}

/// A tangent vector: base point plus components in the base chart.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    pub chart: ChartId,
    pub base: DVector<f64>,
    pub components: DVector<f64>,
}

impl TangentVector {
    pub fn new(chart: ChartId, base: DVector<f64>, components: DVector<f64>) -> TangentVector {
        TangentVector {
            chart,
            base,
            components,
        }
    }

    pub fn base_point(&self) -> Point {
        Point::new(self.chart, self.base.clone())
    }
}

/// Chart coordinate domain.
#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    /// All of R^n.
    All,
    /// Axis-aligned open box.
    Box { lo: DVector<f64>, hi: DVector<f64> },
    /// Open ball.
    Ball { center: DVector<f64>, radius: f64 },
}

impl Domain {
    pub fn contains(&self, x: &DVector<f64>) -> bool {
        match self {
            Domain::All => true,
            Domain::Box { lo, hi } => x
                .iter()
                .enumerate()
                .all(|(i, &xi)| xi > lo[i] && xi < hi[i]),
            Domain::Ball { center, radius } => (x - center).norm() < *radius,
        }
    }

    /// Distance from `x` to the domain boundary; +inf for the whole space,
    /// negative when outside.
    pub fn margin(&self, x: &DVector<f64>) -> f64 {
        match self {
            Domain::All => f64::INFINITY,
            Domain::Box { lo, hi } => x
                .iter()
                .enumerate()
                .map(|(i, &xi)| (xi - lo[i]).min(hi[i] - xi))
                .fold(f64::INFINITY, f64::min),
            Domain::Ball { center, radius } => radius - (x - center).norm(),
        }
    }

    /// A length scale of the domain, used for switch-hint margins.
    pub fn scale(&self) -> f64 {
        match self {
            Domain::All => f64::INFINITY,
            Domain::Box { lo, hi } => (hi - lo).min() / 2.0,
            Domain::Ball { radius, .. } => *radius,
        }
    }
}

/// Metric provider for one chart.
#[derive(Debug, Clone)]
pub(crate) enum MetricField {
    /// Identity matrix everywhere.
    Euclidean,
    /// Round sphere of the given radius in a stereographic chart:
    /// g = 4r⁴/(r²+|x|²)² · I.
    SphereConformal { radius: f64 },
    /// Poincaré ball: g = 4/(1−|x|²)² · I.
    HyperbolicConformal,
    /// User-supplied matrix of expressions with symbolic-derivative caches.
    Expression(ExprMetric),
}

/// One chart: a name, a coordinate domain, and a metric.
#[derive(Debug, Clone)]
pub struct Chart {
    pub name: String,
    pub domain: Domain,
    pub(crate) metric: MetricField,
}

/// Which family the manifold belongs to; drives closed-form fast paths
/// (log maps, distances) and the epsilon policy.
#[derive(Debug, Clone, PartialEq)]
pub enum ManifoldKind {
    Euclidean,
    Sphere { radius: f64 },
    Hyperbolic,
    FlatTorus,
    Expression,
}

/// Error type for manifold construction and chart-level queries.
#[derive(Debug, Error)]
pub enum ManifoldError {
    #[error("invalid manifold specification: {0}")]
    InvalidSpec(String),
    #[error("unknown chart `{0}`")]
    UnknownChart(String),
    #[error("chart index {0} out of range")]
    ChartIndex(usize),
    #[error("point is outside the domain of chart `{chart}`")]
    OutOfDomain { chart: String },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("metric is not symmetric positive definite in chart `{chart}` (min eigenvalue {min_eig:.3e})")]
    MetricNotSpd { chart: String, min_eig: f64 },
    #[error("no transition from chart `{from}` to chart `{to}`")]
    MissingTransition { from: String, to: String },
    #[error("point is not in the overlap of charts `{from}` and `{to}`")]
    NotInOverlap { from: String, to: String },
    #[error("transition round trip deviates by {dev:.3e} between charts `{from}` and `{to}`")]
    TransitionRoundTrip { from: String, to: String, dev: f64 },
    #[error("plane spanned by the given vectors is degenerate (Gram determinant {0:.3e})")]
    DegeneratePlane(f64),
    #[error("metric expression error: {0}")]
    Eval(#[from] EvalError),
    #[error("metric expression parse error: {0}")]
    Parse(#[from] ParseError),
}

/// An immutable chart atlas with metric structure.
#[derive(Debug, Clone)]
pub struct Manifold {
    kind: ManifoldKind,
    dim: usize,
    charts: Vec<Chart>,
    transitions: Vec<Transition>,
    epsilon: f64,
    canonical: String,
}

impl Manifold {
    pub(crate) fn from_parts(
        kind: ManifoldKind,
        dim: usize,
        charts: Vec<Chart>,
        transitions: Vec<Transition>,
        epsilon: f64,
        canonical: String,
    ) -> Manifold {
        Manifold {
            kind,
            dim,
            charts,
            transitions,
            epsilon,
            canonical,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &ManifoldKind {
        &self.kind
    }

    /// Chart-operation gate: tangent vectors with metric norm at or above
    /// this are rejected by the exponential-chart operations.
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Canonical description string; hashing it identifies the manifold in
    /// output files.
    pub fn canonical_string(&self) -> &str {
        &self.canonical
    }

    pub fn charts(&self) -> &[Chart] {
        &self.charts
    }

    pub fn chart(&self, id: ChartId) -> Result<&Chart, ManifoldError> {
        self.charts.get(id.0).ok_or(ManifoldError::ChartIndex(id.0))
    }

    pub fn chart_id_by_name(&self, name: &str) -> Result<ChartId, ManifoldError> {
        self.charts
            .iter()
            .position(|c| c.name == name)
            .map(ChartId)
            .ok_or_else(|| ManifoldError::UnknownChart(name.to_string()))
    }

    pub fn chart_name(&self, id: ChartId) -> &str {
        &self.charts[id.0].name
    }

    pub fn contains(&self, chart: ChartId, x: &DVector<f64>) -> Result<bool, ManifoldError> {
        let c = self.chart(chart)?;
        self.check_dim(x)?;
        Ok(c.domain.contains(x))
    }

    fn check_dim(&self, x: &DVector<f64>) -> Result<(), ManifoldError> {
        if x.len() != self.dim {
            return Err(ManifoldError::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Metric matrix g(x) in the given chart.
    pub fn metric_at(&self, chart: ChartId, x: &DVector<f64>) -> Result<DMatrix<f64>, ManifoldError> {
        let c = self.chart(chart)?;
        self.check_dim(x)?;
        if !c.domain.contains(x) {
            return Err(ManifoldError::OutOfDomain {
                chart: c.name.clone(),
            });
        }
        self.metric_unchecked(chart, x)
    }

    /// Metric without the domain check; the integrator probes candidate
    /// states that may sit just outside during exit bisection.
    pub(crate) fn metric_unchecked(
        &self,
        chart: ChartId,
        x: &DVector<f64>,
    ) -> Result<DMatrix<f64>, ManifoldError> {
        let c = &self.charts[chart.0];
        let n = self.dim;
        match &c.metric {
            MetricField::Euclidean => Ok(DMatrix::identity(n, n)),
            MetricField::SphereConformal { radius } => {
                let f = builtin::sphere_factor(*radius, x);
                Ok(DMatrix::identity(n, n) * f)
            }
            MetricField::HyperbolicConformal => {
                let f = builtin::hyperbolic_factor(x)?;
                Ok(DMatrix::identity(n, n) * f)
            }
            MetricField::Expression(em) => Ok(em.metric(x)?),
        }
    }

    /// Metric inner product of tangent components at a chart point.
    pub fn g_inner(
        &self,
        chart: ChartId,
        x: &DVector<f64>,
        u: &DVector<f64>,
        w: &DVector<f64>,
    ) -> Result<f64, ManifoldError> {
        let g = self.metric_unchecked(chart, x)?;
        Ok((u.transpose() * &g * w)[(0, 0)])
    }

    /// Metric norm of tangent components at a chart point.
    pub fn g_norm(&self, chart: ChartId, x: &DVector<f64>, u: &DVector<f64>) -> Result<f64, ManifoldError> {
        Ok(self.g_inner(chart, x, u, u)?.max(0.0).sqrt())
    }

    pub fn tangent_norm(&self, v: &TangentVector) -> Result<f64, ManifoldError> {
        self.g_norm(v.chart, &v.base, &v.components)
    }

    pub(crate) fn transition(&self, from: ChartId, to: ChartId) -> Option<&Transition> {
        self.transitions
            .iter()
            .find(|t| t.from == from && t.to == to)
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    /// Transition map between overlapping charts: image point, Jacobian
    /// dλ, and Hessian d²λ at `x`.
    pub fn chart_transition(
        &self,
        from: ChartId,
        to: ChartId,
        x: &DVector<f64>,
    ) -> Result<TransitionEval, ManifoldError> {
        self.check_dim(x)?;
        if from == to {
            return Ok(TransitionEval::identity(x.clone()));
        }
        let from_name = self.chart_name(from).to_string();
        let to_name = self.chart_name(to).to_string();
        let tr = self
            .transition(from, to)
            .ok_or(ManifoldError::MissingTransition {
                from: from_name.clone(),
                to: to_name.clone(),
            })?;
        if !self.charts[from.0].domain.contains(x) {
            return Err(ManifoldError::NotInOverlap {
                from: from_name,
                to: to_name,
            });
        }
        let eval = tr.eval(x)?;
        if !self.charts[to.0].domain.contains(&eval.image) {
            return Err(ManifoldError::NotInOverlap {
                from: from_name,
                to: to_name,
            });
        }
        Ok(eval)
    }

    /// Move a point into a target chart (identity if already there).
    pub fn point_in_chart(&self, p: &Point, target: ChartId) -> Result<Point, ManifoldError> {
        if p.chart == target {
            return Ok(p.clone());
        }
        let eval = self.chart_transition(p.chart, target, &p.coords)?;
        Ok(Point::new(target, eval.image))
    }

    /// Normalize the chart representation of a point: wrap torus angles,
    /// switch sphere hemispheres when the coordinate norm exceeds the
    /// representation bound.
    pub fn canonicalize(&self, p: &Point) -> Result<Point, ManifoldError> {
        match &self.kind {
            ManifoldKind::FlatTorus => Ok(Point::new(p.chart, builtin::wrap_angles(&p.coords))),
            ManifoldKind::Sphere { radius } => {
                let bound = defaults::SPHERE_CHART_BOUND_FACTOR * radius;
                if p.coords.norm() > bound {
                    let other = ChartId(1 - p.chart.0);
                    let eval = self.chart_transition(p.chart, other, &p.coords)?;
                    Ok(Point::new(other, eval.image))
                } else {
                    Ok(p.clone())
                }
            }
            _ => Ok(p.clone()),
        }
    }

    /// Suggest a chart switch for the integrator: returns a target chart
    /// whose representation of `x` sits farther from trouble.
    pub(crate) fn switch_hint(&self, chart: ChartId, x: &DVector<f64>) -> Option<ChartId> {
        match &self.kind {
            ManifoldKind::Sphere { radius } => {
                if x.norm() > defaults::SPHERE_CHART_SWITCH_FACTOR * radius {
                    Some(ChartId(1 - chart.0))
                } else {
                    None
                }
            }
            ManifoldKind::Expression => {
                let dom = &self.charts[chart.0].domain;
                let margin = dom.margin(x);
                let scale = dom.scale();
                if !scale.is_finite() || margin > 0.1 * scale {
                    return None;
                }
                self.transitions
                    .iter()
                    .filter(|t| t.from == chart)
                    .filter_map(|t| {
                        let eval = t.eval(x).ok()?;
                        let m2 = self.charts[t.to.0].domain.margin(&eval.image);
                        (m2 > 2.0 * margin).then_some(t.to)
                    })
                    .next()
            }
            _ => None,
        }
    }

    /// Geodesic distance between points, by the closed form of the family
    /// (shooting for expression manifolds).
    pub fn distance(&self, p: &Point, q: &Point) -> Result<f64, ManifoldError> {
        match &self.kind {
            ManifoldKind::Euclidean => {
                let q0 = self.point_in_chart(q, p.chart)?;
                Ok((&q0.coords - &p.coords).norm())
            }
            ManifoldKind::FlatTorus => {
                Ok(builtin::wrap_angles(&(&q.coords - &p.coords)).norm())
            }
            ManifoldKind::Sphere { radius } => {
                let pe = builtin::sphere_embed(self, p)?;
                let qe = builtin::sphere_embed(self, q)?;
                let c = (pe.dot(&qe) / (radius * radius)).clamp(-1.0, 1.0);
                Ok(radius * c.acos())
            }
            ManifoldKind::Hyperbolic => {
                let q0 = self.point_in_chart(q, p.chart)?;
                Ok(builtin::hyperbolic_distance(&p.coords, &q0.coords))
            }
            ManifoldKind::Expression => {
                // metric norm of the shooting log; callers needing distances
                // on expression manifolds accept the shooting tolerance
                let v = crate::geodesic::log_map(self, p, q)
                    .map_err(|e| ManifoldError::InvalidSpec(format!("distance shooting failed: {e}")))?;
                self.tangent_norm(&v)
            }
        }
    }

    /// Deterministic interior sample points per chart, used by validation
    /// and the verification battery.
    pub fn sample_points(&self, chart: ChartId, per_axis: usize) -> Vec<DVector<f64>> {
        let c = &self.charts[chart.0];
        let n = self.dim;
        let levels: Vec<f64> = (0..per_axis)
            .map(|k| -0.8 + 1.6 * k as f64 / (per_axis.max(2) - 1) as f64)
            .collect();
        let mut pts = Vec::new();
        let mut idx = vec![0usize; n];
        loop {
            let unit: Vec<f64> = idx.iter().map(|&k| levels[k]).collect();
            let x = match &c.domain {
                Domain::All => DVector::from_vec(unit.clone()),
                Domain::Box { lo, hi } => DVector::from_iterator(
                    n,
                    unit.iter()
                        .enumerate()
                        .map(|(i, &u)| 0.5 * (lo[i] + hi[i]) + 0.5 * u * (hi[i] - lo[i]) * 0.9),
                ),
                Domain::Ball { center, radius } => {
                    let raw = DVector::from_vec(unit.clone());
                    let nrm = raw.norm();
                    let scaled = if nrm > 1.0 { raw / nrm * 0.9 } else { raw * 0.9 };
                    center + scaled * *radius
                }
            };
            if c.domain.contains(&x) {
                pts.push(x);
            }
            // odometer over the lattice
            let mut k = 0;
            loop {
                if k == n {
                    return pts;
                }
                idx[k] += 1;
                if idx[k] < per_axis {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
        }
    }

    /// Structural validation: SPD metric at sample points, transition
    /// round trips to identity on overlap samples.
    pub fn validate(&self) -> Result<(), ManifoldError> {
        for (ci, c) in self.charts.iter().enumerate() {
            for x in self.sample_points(ChartId(ci), 3) {
                let g = self.metric_unchecked(ChartId(ci), &x)?;
                let sym_dev = (&g - g.transpose()).abs().max();
                if sym_dev > 1e-12 {
                    return Err(ManifoldError::MetricNotSpd {
                        chart: c.name.clone(),
                        min_eig: f64::NAN,
                    });
                }
                let eig = g.clone().symmetric_eigen();
                let min_eig = eig.eigenvalues.min();
                if !(min_eig > 1e-12) {
                    return Err(ManifoldError::MetricNotSpd {
                        chart: c.name.clone(),
                        min_eig,
                    });
                }
            }
        }
        for tr in &self.transitions {
            let back = self.transition(tr.to, tr.from).ok_or_else(|| {
                ManifoldError::InvalidSpec(format!(
                    "transition `{}`->`{}` lacks a declared inverse",
                    self.chart_name(tr.from),
                    self.chart_name(tr.to)
                ))
            })?;
            for x in self.sample_points(tr.from, 3) {
                let Ok(fwd) = tr.eval(&x) else { continue };
                if !self.charts[tr.to.0].domain.contains(&fwd.image) {
                    continue;
                }
                let Ok(rev) = back.eval(&fwd.image) else { continue };
                let dev = (&rev.image - &x).norm();
                if dev > 1e-10 {
                    return Err(ManifoldError::TransitionRoundTrip {
                        from: self.chart_name(tr.from).to_string(),
                        to: self.chart_name(tr.to).to_string(),
                        dev,
                    });
                }
            }
        }
        Ok(())
    }
}

pub use transition::TransitionEval as ChartTransitionEval;
