//! Geodesics in path space as pointwise geodesic families.
//!
//! A path of paths Γ(s, t) is a geodesic in path space exactly when each
//! transverse path s ↦ Γ(s, t) is a geodesic in the base manifold, so
//! both the initial-value and the boundary-value problem decompose into
//! independent per-t integrations. The per-t problems share no state and
//! run under the configured parallelism policy; results are reduced in
//! index order, so output is identical under any thread count.

pub mod connection;
pub mod probe;
pub mod residual;

use crate::defaults;
use crate::geodesic::{self, GeodesicError, GeodesicOptions};
use crate::manifold::{ChartId, Manifold, ManifoldError, ManifoldKind, Point, TangentVector};
use crate::par::{self, Parallelism};
use crate::path::{
    field_derivatives, position_derivatives, DiscretePath, PathError, PathTangent,
};
use nalgebra::DVector;
use thiserror::Error;

/// Why two paths cannot be joined by a path-space geodesic: the per-t
/// logarithm fails somewhere. On the sphere this is the antipodal
/// obstruction; margins record π − angle per sample.
#[derive(Debug, Clone)]
pub struct ObstructionReport {
    pub feasible: bool,
    /// Per-t spherical angle between the endpoints (sphere scans only).
    pub angles: Vec<f64>,
    /// Per-t margin to the obstruction (π − angle on the sphere).
    pub margins: Vec<f64>,
    pub worst_margin: f64,
    /// t indices at which the connecting logarithm is obstructed.
    pub offending: Vec<usize>,
    /// Near-degenerate but not obstructed samples, with their margins.
    pub warnings: Vec<String>,
    pub message: String,
}

#[derive(Debug, Error)]
pub enum HomotopyError {
    #[error("{}", .0.message)]
    Obstruction(ObstructionReport),
    #[error("transverse ray at t index {t_index} failed at s = {s_reached}: {message}")]
    RayFailure {
        t_index: usize,
        s_reached: f64,
        message: String,
    },
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("s-grid too coarse: {got} rows, need at least {need}")]
    GridTooCoarse { got: usize, need: usize },
    #[error("chart mismatch at grid node (s {s_index}, t {t_index})")]
    ChartMismatch { s_index: usize, t_index: usize },
    #[error("wrong manifold: {0}")]
    WrongManifold(String),
    #[error(transparent)]
    Manifold(#[from] ManifoldError),
    #[error(transparent)]
    Path(#[from] PathError),
}

/// Per-t integration record. The residual slot is filled once a
/// residual field has been computed for the homotopy.
#[derive(Debug, Clone)]
pub struct TDiagnostics {
    pub t_index: usize,
    pub s_reached: f64,
    pub restarts: usize,
    pub chart_switches: usize,
    pub residual: Option<f64>,
}

/// A discretized homotopy Γ(s_j, t_i): point grid, chart grid, and the
/// transverse velocity grid ∂_sΓ, plus per-t integration diagnostics.
#[derive(Debug, Clone)]
pub struct PathHomotopy {
    pub s: Vec<f64>,
    pub t: Vec<f64>,
    /// chart[j][i] at (s_j, t_i)
    pub chart: Vec<Vec<ChartId>>,
    /// x[j][i]: coordinates of Γ(s_j, t_i) in chart[j][i]
    pub x: Vec<Vec<DVector<f64>>>,
    /// v_s[j][i]: components of ∂_sΓ(s_j, t_i) in chart[j][i]
    pub v_s: Vec<Vec<DVector<f64>>>,
    pub diagnostics: Vec<TDiagnostics>,
}

/// Controls for the per-t transverse integrations.
#[derive(Debug, Clone)]
pub struct HomotopyOptions {
    pub tol: f64,
    pub steps_per_unit: usize,
    pub par: Parallelism,
}

impl Default for HomotopyOptions {
    fn default() -> Self {
        HomotopyOptions {
            tol: defaults::HOMOTOPY_INTEGRATOR_TOL,
            steps_per_unit: 32,
            par: Parallelism::Auto,
        }
    }
}

impl PathHomotopy {
    /// Number of s samples (M + 1).
    pub fn rows(&self) -> usize {
        self.s.len()
    }

    /// Number of t samples (N + 1).
    pub fn cols(&self) -> usize {
        self.t.len()
    }

    pub fn s_step(&self) -> f64 {
        (self.s[self.rows() - 1] - self.s[0]) / (self.rows() - 1) as f64
    }

    pub fn point(&self, j: usize, i: usize) -> Point {
        Point::new(self.chart[j][i], self.x[j][i].clone())
    }

    /// The path Γ(s_j, ·) with t-derivatives estimated from the grid.
    pub fn row_path(&self, m: &Manifold, j: usize) -> Result<DiscretePath, PathError> {
        let dx = position_derivatives(m, &self.t, &self.chart[j], &self.x[j])?;
        Ok(DiscretePath::from_parts(
            self.t.clone(),
            self.chart[j].clone(),
            self.x[j].clone(),
            dx,
        ))
    }

    /// The transverse velocity field ∂_sΓ(s_j, ·) as a field along row j.
    pub fn row_velocity(&self, m: &Manifold, j: usize) -> Result<PathTangent, PathError> {
        let path = self.row_path(m, j)?;
        let dw = field_derivatives(m, &path, &self.v_s[j])?;
        Ok(PathTangent {
            t: self.t.clone(),
            chart: self.chart[j].clone(),
            w: self.v_s[j].clone(),
            dw,
        })
    }

    /// Record per-t residual suprema in the diagnostics.
    pub fn attach_residual(&mut self, field: &residual::ResidualField) {
        for d in self.diagnostics.iter_mut() {
            let i = d.t_index;
            d.residual = Some(
                field
                    .values
                    .iter()
                    .map(|row| row[i])
                    .fold(0.0f64, f64::max),
            );
        }
    }

    /// Assemble a homotopy from row paths on a shared t-grid with a
    /// uniform s-grid, estimating ∂_sΓ by fourth-order chart-aware
    /// s-differences. For building two-parameter families out of rows;
    /// geodesic homotopies come from the IVP/BVP constructors instead.
    pub fn from_grid(
        m: &Manifold,
        s: Vec<f64>,
        rows: Vec<DiscretePath>,
    ) -> Result<PathHomotopy, HomotopyError> {
        if s.len() != rows.len() {
            return Err(HomotopyError::GridMismatch(format!(
                "{} s values, {} row paths",
                s.len(),
                rows.len()
            )));
        }
        if s.len() < 5 {
            return Err(HomotopyError::GridTooCoarse {
                got: s.len(),
                need: 5,
            });
        }
        let hs = (s[s.len() - 1] - s[0]) / (s.len() - 1) as f64;
        if !(hs > 0.0) || s.windows(2).any(|w| (w[1] - w[0] - hs).abs() > 1e-12) {
            return Err(HomotopyError::GridMismatch(
                "s-grid is not uniformly increasing".to_string(),
            ));
        }
        let t = rows[0].t.clone();
        for (j, r) in rows.iter().enumerate() {
            if r.t != t {
                return Err(HomotopyError::GridMismatch(format!(
                    "row {j} has a different t-grid"
                )));
            }
        }
        let nrows = rows.len();
        let cols = t.len();
        let mut v_s = vec![Vec::with_capacity(cols); nrows];
        for j in 0..nrows {
            let (offs, coeffs) = crate::stencil::d1_stencil(j, nrows);
            for i in 0..cols {
                let target = rows[j].chart[i];
                let mut acc = DVector::zeros(m.dim());
                for (&o, &c) in offs.iter().zip(coeffs) {
                    let k = (j as isize + o) as usize;
                    let xk = if rows[k].chart[i] == target {
                        rows[k].x[i].clone()
                    } else {
                        m.chart_transition(rows[k].chart[i], target, &rows[k].x[i])?
                            .image
                    };
                    acc += xk * c;
                }
                v_s[j].push(acc / hs);
            }
        }
        let diagnostics = (0..cols)
            .map(|i| TDiagnostics {
                t_index: i,
                s_reached: s[nrows - 1],
                restarts: 0,
                chart_switches: 0,
                residual: None,
            })
            .collect();
        Ok(PathHomotopy {
            s,
            t,
            chart: rows.iter().map(|r| r.chart.clone()).collect(),
            x: rows.iter().map(|r| r.x.clone()).collect(),
            v_s,
            diagnostics,
        })
    }
}

/// One integrated transverse ray, sliced onto the row grid.
struct Ray {
    chart: Vec<ChartId>,
    x: Vec<DVector<f64>>,
    v: Vec<DVector<f64>>,
    diag: TDiagnostics,
}

fn integrate_ray(
    m: &Manifold,
    start: &TangentVector,
    s_max: f64,
    rows: usize,
    opts: &HomotopyOptions,
    t_index: usize,
) -> Result<Ray, HomotopyError> {
    let gopts = GeodesicOptions {
        tol: opts.tol,
        rows,
        steps_per_unit: opts.steps_per_unit,
    };
    let result = geodesic::integrate(m, start, &[], s_max, &gopts).map_err(|e| {
        let s_reached = match &e {
            GeodesicError::LeftDomain { s_reached, .. } => *s_reached,
            _ => f64::NAN,
        };
        HomotopyError::RayFailure {
            t_index,
            s_reached,
            message: e.to_string(),
        }
    })?;
    let arc = result.arc;
    let idx = arc.row_indices(rows);
    Ok(Ray {
        chart: idx.iter().map(|&k| arc.chart[k]).collect(),
        x: idx.iter().map(|&k| arc.x[k].clone()).collect(),
        v: idx.iter().map(|&k| arc.v[k].clone()).collect(),
        diag: TDiagnostics {
            t_index,
            s_reached: s_max,
            restarts: arc.restarts,
            chart_switches: arc.chart_switches,
            residual: None,
        },
    })
}

/// Transpose per-t rays into the row-major grids of a homotopy.
fn transpose_rays(rays: Vec<Ray>, t: Vec<f64>, s_max: f64, rows: usize) -> PathHomotopy {
    let s: Vec<f64> = (0..=rows)
        .map(|j| s_max * j as f64 / rows as f64)
        .collect();
    let cols = rays.len();
    let mut chart = vec![Vec::with_capacity(cols); rows + 1];
    let mut x = vec![Vec::with_capacity(cols); rows + 1];
    let mut v_s = vec![Vec::with_capacity(cols); rows + 1];
    for ray in &rays {
        for j in 0..=rows {
            chart[j].push(ray.chart[j]);
            x[j].push(ray.x[j].clone());
            v_s[j].push(ray.v[j].clone());
        }
    }
    PathHomotopy {
        s,
        t,
        chart,
        x,
        v_s,
        diagnostics: rays.into_iter().map(|r| r.diag).collect(),
    }
}

/// Deterministic assembly: integrate all rays (possibly in parallel),
/// surface the lowest-t failure, and transpose into row-major grids.
fn assemble(
    m: &Manifold,
    starts: Vec<TangentVector>,
    t: Vec<f64>,
    s_max: f64,
    rows: usize,
    opts: &HomotopyOptions,
) -> Result<PathHomotopy, HomotopyError> {
    let cols = starts.len();
    let rays = par::map_indexed(opts.par, cols, |i| {
        integrate_ray(m, &starts[i], s_max, rows, opts, i)
    });
    let mut cols_data = Vec::with_capacity(cols);
    for ray in rays {
        cols_data.push(ray?);
    }
    Ok(transpose_rays(cols_data, t, s_max, rows))
}

/// The initial-value problem: the unique path-space geodesic with
/// Γ(0) = γ and ∂_sΓ(0) = V, integrated per t to s_max on an M-row grid.
pub fn pathspace_geodesic_ivp(
    m: &Manifold,
    gamma: &DiscretePath,
    v: &PathTangent,
    s_max: f64,
    m_rows: usize,
) -> Result<PathHomotopy, HomotopyError> {
    pathspace_geodesic_ivp_with(m, gamma, v, s_max, m_rows, &HomotopyOptions::default())
}

pub fn pathspace_geodesic_ivp_with(
    m: &Manifold,
    gamma: &DiscretePath,
    v: &PathTangent,
    s_max: f64,
    m_rows: usize,
    opts: &HomotopyOptions,
) -> Result<PathHomotopy, HomotopyError> {
    v.check_along(gamma)?;
    if !(s_max > 0.0) {
        return Err(HomotopyError::GridMismatch(format!(
            "s_max must be positive, got {s_max}"
        )));
    }
    if m_rows < 1 {
        return Err(HomotopyError::GridTooCoarse { got: m_rows, need: 1 });
    }
    let starts: Vec<TangentVector> = (0..gamma.len())
        .map(|i| TangentVector::new(gamma.chart[i], gamma.x[i].clone(), v.w[i].clone()))
        .collect();
    assemble(m, starts, gamma.t.clone(), s_max, m_rows, opts)
}

/// The boundary-value problem: connect γ1 to γ2 by the pointwise
/// construction Γ(s, t_i) = exp_{γ1(t_i)}(s·V_i) with V_i the pointwise
/// logarithm. Any per-t log failure is returned as an obstruction
/// report; on the sphere the antipodal scan runs first so the report
/// carries the full angle profile.
pub fn pathspace_geodesic_bvp(
    m: &Manifold,
    gamma1: &DiscretePath,
    gamma2: &DiscretePath,
    m_rows: usize,
) -> Result<PathHomotopy, HomotopyError> {
    let opts = HomotopyOptions {
        tol: defaults::BVP_INTEGRATOR_TOL,
        ..HomotopyOptions::default()
    };
    pathspace_geodesic_bvp_with(m, gamma1, gamma2, m_rows, &opts)
}

pub fn pathspace_geodesic_bvp_with(
    m: &Manifold,
    gamma1: &DiscretePath,
    gamma2: &DiscretePath,
    m_rows: usize,
    opts: &HomotopyOptions,
) -> Result<PathHomotopy, HomotopyError> {
    if gamma1.t != gamma2.t {
        return Err(HomotopyError::GridMismatch(
            "boundary paths live on different t-grids".to_string(),
        ));
    }
    if m_rows < 1 {
        return Err(HomotopyError::GridTooCoarse { got: m_rows, need: 1 });
    }
    if matches!(m.kind(), ManifoldKind::Sphere { .. }) {
        let scan = antipodal_obstruction_scan(m, gamma1, gamma2)?;
        if !scan.feasible {
            return Err(HomotopyError::Obstruction(scan));
        }
    }
    // pointwise logarithms; failures become the obstruction report
    let cols = gamma1.len();
    let logs = par::map_indexed(opts.par, cols, |i| {
        geodesic::log_map(m, &gamma1.point(i), &gamma2.point(i))
    });
    let mut starts = Vec::with_capacity(cols);
    let mut offending = Vec::new();
    let mut first_error = String::new();
    for (i, l) in logs.into_iter().enumerate() {
        match l {
            Ok(v) => starts.push(v),
            Err(e) => {
                if offending.is_empty() {
                    first_error = e.to_string();
                }
                offending.push(i);
            }
        }
    }
    if !offending.is_empty() {
        let count = offending.len();
        return Err(HomotopyError::Obstruction(ObstructionReport {
            feasible: false,
            angles: Vec::new(),
            margins: Vec::new(),
            worst_margin: 0.0,
            offending,
            warnings: Vec::new(),
            message: format!(
                "pointwise logarithm failed at {count} t sample(s); first failure: {first_error}"
            ),
        }));
    }
    assemble(m, starts, gamma1.t.clone(), 1.0, m_rows, opts)
}

/// Largest endpoint gap max_i dist(Γ(s_max, t_i), γ2(t_i)) of a BVP
/// solution against its target path.
pub fn endpoint_residual(
    m: &Manifold,
    hom: &PathHomotopy,
    gamma2: &DiscretePath,
) -> Result<f64, HomotopyError> {
    if hom.cols() != gamma2.len() {
        return Err(HomotopyError::GridMismatch(format!(
            "homotopy has {} t samples, target path has {}",
            hom.cols(),
            gamma2.len()
        )));
    }
    let last = hom.rows() - 1;
    let mut worst = 0.0f64;
    for i in 0..hom.cols() {
        let d = m.distance(&hom.point(last, i), &gamma2.point(i))?;
        worst = worst.max(d);
    }
    Ok(worst)
}

/// Per-t antipodality scan on a sphere: the connecting logarithm is
/// obstructed where the endpoints subtend an angle within
/// [`defaults::ANTIPODAL_TOL`] of π. Uses the same angle computation and
/// threshold as the logarithm itself, so scan flags and BVP failures
/// pick out identical index sets.
pub fn antipodal_obstruction_scan(
    m: &Manifold,
    gamma1: &DiscretePath,
    gamma2: &DiscretePath,
) -> Result<ObstructionReport, HomotopyError> {
    if !matches!(m.kind(), ManifoldKind::Sphere { .. }) {
        return Err(HomotopyError::WrongManifold(format!(
            "antipodal scan requires a sphere, got `{}`",
            m.canonical_string()
        )));
    }
    if gamma1.t != gamma2.t {
        return Err(HomotopyError::GridMismatch(
            "paths live on different t-grids".to_string(),
        ));
    }
    let mut angles = Vec::with_capacity(gamma1.len());
    let mut margins = Vec::with_capacity(gamma1.len());
    let mut offending = Vec::new();
    let mut warnings = Vec::new();
    for i in 0..gamma1.len() {
        let angle = geodesic::sphere_angle(m, &gamma1.point(i), &gamma2.point(i))
            .map_err(|e| HomotopyError::RayFailure {
                t_index: i,
                s_reached: 0.0,
                message: e.to_string(),
            })?;
        let margin = std::f64::consts::PI - angle;
        if angle >= std::f64::consts::PI - defaults::ANTIPODAL_TOL {
            offending.push(i);
        } else if margin < defaults::NEAR_ANTIPODAL_WARN {
            warnings.push(format!(
                "t index {i}: near-antipodal endpoints (margin {margin:.3e}); \
                 the connecting logarithm is ill-conditioned"
            ));
        }
        angles.push(angle);
        margins.push(margin);
    }
    let feasible = offending.is_empty();
    let worst_margin = margins.iter().copied().fold(f64::INFINITY, f64::min);
    let message = if feasible {
        format!(
            "no antipodal obstruction; worst margin {worst_margin:.6e} over {} samples",
            gamma1.len()
        )
    } else {
        format!(
            "antipodal obstruction at {} t sample(s) {:?}: the endpoints cannot be joined \
             by a path-space geodesic",
            offending.len(),
            &offending
        )
    };
    Ok(ObstructionReport {
        feasible,
        angles,
        margins,
        worst_margin,
        offending,
        warnings,
        message,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::builtin::{euclidean, hyperbolic, sphere};
    use crate::oracle;
    use crate::path::resample_path;
    use nalgebra::DVector;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn euclid_path(m: &Manifold, a: (f64, f64), b: (f64, f64), n: usize) -> DiscretePath {
        let samples: Vec<(f64, DVector<f64>)> = (0..9)
            .map(|i| {
                let t = i as f64 / 8.0;
                (
                    t,
                    DVector::from_vec(vec![a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1)]),
                )
            })
            .collect();
        resample_path(m, ChartId(0), &samples, n).unwrap()
    }

    fn smooth_field(m: &Manifold, path: &DiscretePath, amp: f64) -> PathTangent {
        let w: Vec<DVector<f64>> = path
            .t
            .iter()
            .map(|&t| {
                DVector::from_vec(vec![amp * (1.0 + t).sin(), amp * (0.3 + 0.5 * t).cos()])
            })
            .collect();
        PathTangent::from_components(m, path, w).unwrap()
    }

    #[test]
    fn zero_velocity_gives_the_constant_homotopy() {
        let m = sphere(2, 1.0);
        let samples: Vec<(f64, DVector<f64>)> = (0..9)
            .map(|i| {
                let t = i as f64 / 8.0;
                let phi = 0.9 * t;
                (t, DVector::from_vec(vec![phi.cos(), phi.sin()]))
            })
            .collect();
        let path = resample_path(&m, ChartId(0), &samples, 20).unwrap();
        let hom = pathspace_geodesic_ivp(
            &m,
            &path,
            &PathTangent::zeros_along(&path),
            1.0,
            8,
        )
        .unwrap();
        for j in 0..hom.rows() {
            for i in 0..hom.cols() {
                assert_eq!(hom.chart[j][i], path.chart[i]);
                assert_eq!(hom.x[j][i], path.x[i]);
                assert_eq!(hom.v_s[j][i].norm(), 0.0);
            }
        }
    }

    #[test]
    fn euclidean_ivp_is_affine_in_s() {
        let m = euclidean(2);
        let path = euclid_path(&m, (0.0, 0.0), (1.0, 0.4), 24);
        let v = smooth_field(&m, &path, 0.7);
        let hom = pathspace_geodesic_ivp(&m, &path, &v, 2.0, 8).unwrap();
        assert_eq!(hom.rows(), 9);
        for j in 0..hom.rows() {
            let s = hom.s[j];
            for i in 0..hom.cols() {
                let expect = &path.x[i] + &v.w[i] * s;
                assert!((&hom.x[j][i] - expect).norm() < 1e-12, "({j},{i})");
                assert!((&hom.v_s[j][i] - &v.w[i]).norm() < 1e-12);
            }
        }
        // row 0 is the initial path, sample for sample
        assert_eq!(hom.x[0], path.x);
    }

    #[test]
    fn sphere_transverse_paths_match_the_great_circle_oracle() {
        let m = sphere(2, 1.0);
        let samples: Vec<(f64, DVector<f64>)> = (0..9)
            .map(|i| {
                let t = i as f64 / 8.0;
                let phi = 0.8 * t + 0.1;
                (t, DVector::from_vec(vec![phi.cos(), phi.sin()]))
            })
            .collect();
        let path = resample_path(&m, ChartId(0), &samples, 20).unwrap();
        let v = smooth_field(&m, &path, 0.5);
        let hom = pathspace_geodesic_ivp(&m, &path, &v, 1.5, 16).unwrap();
        for i in 0..hom.cols() {
            let start = TangentVector::new(path.chart[i], path.x[i].clone(), v.w[i].clone());
            for j in 0..hom.rows() {
                let expect = oracle::sphere_exp(&m, &start, hom.s[j]).unwrap();
                let got = m
                    .point_in_chart(&hom.point(j, i), expect.chart)
                    .unwrap();
                assert!(
                    (&got.coords - &expect.coords).norm() < 1e-8,
                    "({j},{i}): gap {}",
                    (&got.coords - &expect.coords).norm()
                );
            }
        }
    }

    #[test]
    fn transverse_speed_is_constant_along_every_ray() {
        let m = sphere(2, 1.0);
        let samples: Vec<(f64, DVector<f64>)> = (0..9)
            .map(|i| {
                let t = i as f64 / 8.0;
                let phi = 1.1 * t;
                (t, DVector::from_vec(vec![phi.cos(), phi.sin() + 0.1]))
            })
            .collect();
        let path = resample_path(&m, ChartId(0), &samples, 24).unwrap();
        let v = smooth_field(&m, &path, 0.8);
        let hom = pathspace_geodesic_ivp(&m, &path, &v, 2.0, 32).unwrap();
        for i in 0..hom.cols() {
            let s0 = m
                .g_norm(hom.chart[0][i], &hom.x[0][i], &hom.v_s[0][i])
                .unwrap();
            for j in 0..hom.rows() {
                let sj = m
                    .g_norm(hom.chart[j][i], &hom.x[j][i], &hom.v_s[j][i])
                    .unwrap();
                assert!(
                    (sj - s0).abs() <= 1e-7,
                    "ray {i}, row {j}: speed drift {}",
                    (sj - s0).abs()
                );
            }
        }
    }

    #[test]
    fn bvp_between_identical_paths_is_constant() {
        let m = hyperbolic(2);
        let samples: Vec<(f64, DVector<f64>)> = (0..9)
            .map(|i| {
                let t = i as f64 / 8.0;
                (t, DVector::from_vec(vec![0.3 * t - 0.2, 0.1 * t]))
            })
            .collect();
        let path = resample_path(&m, ChartId(0), &samples, 20).unwrap();
        let hom = pathspace_geodesic_bvp(&m, &path, &path, 8).unwrap();
        for j in 0..hom.rows() {
            for i in 0..hom.cols() {
                assert_eq!(hom.x[j][i], path.x[i], "({j},{i})");
            }
        }
    }

    #[test]
    fn euclidean_bvp_is_linear_interpolation() {
        let m = euclidean(2);
        let g1 = euclid_path(&m, (0.0, 0.0), (1.0, 0.0), 24);
        let g2 = euclid_path(&m, (0.2, 0.5), (0.8, -0.3), 24);
        let hom = pathspace_geodesic_bvp(&m, &g1, &g2, 8).unwrap();
        for j in 0..hom.rows() {
            let s = hom.s[j];
            for i in 0..hom.cols() {
                let expect = &g1.x[i] * (1.0 - s) + &g2.x[i] * s;
                assert!((&hom.x[j][i] - expect).norm() < 1e-12, "({j},{i})");
            }
        }
        assert!(endpoint_residual(&m, &hom, &g2).unwrap() <= 1e-12);
    }

    #[test]
    fn hyperbolic_bvp_hits_its_target() {
        let m = hyperbolic(2);
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..3 {
            let mut wiggly = |c: f64| -> DiscretePath {
                let a: f64 = rng.random_range(-0.3..0.3);
                let b: f64 = rng.random_range(-0.3..0.3);
                let samples: Vec<(f64, DVector<f64>)> = (0..9)
                    .map(|i| {
                        let t = i as f64 / 8.0;
                        (
                            t,
                            DVector::from_vec(vec![
                                a + 0.4 * t + c * (2.0 * t).sin() * 0.1,
                                b - 0.2 * t + 0.05 * (3.0 * t).cos(),
                            ]),
                        )
                    })
                    .collect();
                resample_path(&m, ChartId(0), &samples, 24).unwrap()
            };
            let g1 = wiggly(1.0);
            let g2 = wiggly(-1.0);
            let hom = pathspace_geodesic_bvp(&m, &g1, &g2, 16).unwrap();
            assert_eq!(hom.x[0], g1.x, "starts at γ1 exactly");
            let res = endpoint_residual(&m, &hom, &g2).unwrap();
            assert!(res <= 1e-8, "endpoint residual {res}");
        }
    }

    #[test]
    fn ivp_reproduces_the_bvp_from_its_initial_velocity() {
        let m = hyperbolic(2);
        let g1 = {
            let samples: Vec<(f64, DVector<f64>)> = (0..9)
                .map(|i| {
                    let t = i as f64 / 8.0;
                    (t, DVector::from_vec(vec![0.4 * t - 0.2, 0.1]))
                })
                .collect();
            resample_path(&m, ChartId(0), &samples, 20).unwrap()
        };
        let g2 = {
            let samples: Vec<(f64, DVector<f64>)> = (0..9)
                .map(|i| {
                    let t = i as f64 / 8.0;
                    (t, DVector::from_vec(vec![0.1 - 0.2 * t, 0.3 * t - 0.25]))
                })
                .collect();
            resample_path(&m, ChartId(0), &samples, 20).unwrap()
        };
        let bvp = pathspace_geodesic_bvp(&m, &g1, &g2, 16).unwrap();
        let v0 = bvp.row_velocity(&m, 0).unwrap();
        let ivp = pathspace_geodesic_ivp(&m, &g1, &v0, 1.0, 16).unwrap();
        for j in 0..bvp.rows() {
            for i in 0..bvp.cols() {
                assert_eq!(ivp.chart[j][i], bvp.chart[j][i]);
                assert!(
                    (&ivp.x[j][i] - &bvp.x[j][i]).norm() <= 1e-7,
                    "({j},{i}): gap {}",
                    (&ivp.x[j][i] - &bvp.x[j][i]).norm()
                );
            }
        }
    }

    #[test]
    fn identical_inputs_agree_across_integrator_baselines() {
        let m = hyperbolic(2);
        let path = {
            let samples: Vec<(f64, DVector<f64>)> = (0..9)
                .map(|i| {
                    let t = i as f64 / 8.0;
                    (t, DVector::from_vec(vec![0.3 * t, 0.2 - 0.3 * t]))
                })
                .collect();
            resample_path(&m, ChartId(0), &samples, 20).unwrap()
        };
        let v = smooth_field(&m, &path, 0.9);
        let coarse = HomotopyOptions {
            steps_per_unit: 32,
            ..HomotopyOptions::default()
        };
        let fine = HomotopyOptions {
            steps_per_unit: 128,
            ..HomotopyOptions::default()
        };
        let a = pathspace_geodesic_ivp_with(&m, &path, &v, 3.0, 16, &coarse).unwrap();
        let b = pathspace_geodesic_ivp_with(&m, &path, &v, 3.0, 16, &fine).unwrap();
        for j in 0..a.rows() {
            for i in 0..a.cols() {
                assert!(
                    (&a.x[j][i] - &b.x[j][i]).norm() <= 1e-7,
                    "({j},{i}): gap {}",
                    (&a.x[j][i] - &b.x[j][i]).norm()
                );
            }
        }
    }

    #[test]
    fn scan_accepts_identical_paths_with_margin_pi() {
        let m = sphere(2, 1.0);
        let samples: Vec<(f64, DVector<f64>)> = (0..9)
            .map(|i| {
                let t = i as f64 / 8.0;
                let phi = 0.5 * t;
                (t, DVector::from_vec(vec![phi.cos(), phi.sin()]))
            })
            .collect();
        let path = resample_path(&m, ChartId(0), &samples, 20).unwrap();
        let report = antipodal_obstruction_scan(&m, &path, &path).unwrap();
        assert!(report.feasible);
        assert!(report.offending.is_empty());
        assert!((report.worst_margin - std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn scan_flags_the_pointwise_antipode_everywhere() {
        let m = sphere(2, 1.0);
        let samples: Vec<(f64, DVector<f64>)> = (0..9)
            .map(|i| {
                let t = i as f64 / 8.0;
                let phi = 0.5 * t;
                (t, DVector::from_vec(vec![phi.cos(), phi.sin()]))
            })
            .collect();
        let g1 = resample_path(&m, ChartId(0), &samples, 20).unwrap();
        // equatorial antipode: same chart, negated coordinates
        let g2 = DiscretePath::from_samples(
            &m,
            g1.t.clone(),
            g1.chart.clone(),
            g1.x.iter().map(|p| -p).collect(),
        )
        .unwrap();
        let report = antipodal_obstruction_scan(&m, &g1, &g2).unwrap();
        assert!(!report.feasible);
        assert_eq!(report.offending.len(), g1.len());
        let err = pathspace_geodesic_bvp(&m, &g1, &g2, 8).unwrap_err();
        match err {
            HomotopyError::Obstruction(r) => assert_eq!(r.offending, report.offending),
            other => panic!("expected obstruction, got {other}"),
        }
    }

    #[test]
    fn scan_requires_a_sphere() {
        let m = euclidean(2);
        let g = euclid_path(&m, (0.0, 0.0), (1.0, 0.0), 20);
        assert!(matches!(
            antipodal_obstruction_scan(&m, &g, &g),
            Err(HomotopyError::WrongManifold(_))
        ));
    }
}
