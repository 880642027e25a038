//! Geodesic integration, exponential and logarithm maps, parallel
//! transport.
//!
//! The integrator is classical RK4 on the first-order system
//! (x, v)' = (v, −Γ(x)(v, v)) with step-halving error control: each step
//! of size h is compared against two steps of size h/2, and the whole arc
//! restarts with twice as many steps if any local-error estimate exceeds
//! the tolerance. All arcs use K uniform steps with K a power-of-two
//! multiple of the requested row count, so homotopy rows are exact sample
//! indices and reruns are bit-reproducible.
//!
//! `exp_map` always integrates the geodesic equation — closed-form
//! exponentials exist for the builtins but live in [`crate::oracle`] as an
//! independent check, never on the computation path. `log_map` is the
//! opposite: closed forms are the production route for builtins, and
//! damped-Newton shooting handles expression metrics.

use crate::defaults;
use crate::manifold::builtin;
use crate::manifold::tensor::Tensor3;
use crate::manifold::{ChartId, Manifold, ManifoldError, ManifoldKind, Point, TangentVector};
use nalgebra::DVector;
use thiserror::Error;

/// Hard cap on steps per arc; beyond this the tolerance is declared
/// unreachable.
const MAX_STEPS: usize = 1 << 22;

#[derive(Debug, Error)]
pub enum GeodesicError {
    #[error(transparent)]
    Manifold(#[from] ManifoldError),
    #[error("geodesic left the atlas at s = {s_reached:.9} (requested {s_requested})")]
    LeftDomain {
        s_reached: f64,
        s_requested: f64,
        last_inside: Point,
    },
    #[error("integrator cannot meet tolerance {tol:.3e} within {steps} steps")]
    StepLimit { tol: f64, steps: usize },
    #[error("tangent norm {norm:.6} exceeds the chart-operation gate epsilon = {epsilon:.6}")]
    RadiusExceeded { norm: f64, epsilon: f64 },
    #[error("antipodal degeneracy: spherical angle {angle:.9} is within tolerance of pi; the logarithm has no distinguished value")]
    AntipodalDegeneracy { angle: f64 },
    #[error("shooting failed to converge after {iters} iterations (residual {residual:.3e})")]
    NoConvergence { iters: usize, residual: f64 },
}

/// Integration policy knobs. `rows` forces the step count to be a multiple
/// of it so callers can slice uniform sub-grids; `steps_per_unit` sets the
/// initial step density baseline (doubled until the tolerance holds).
#[derive(Debug, Clone)]
pub struct GeodesicOptions {
    pub tol: f64,
    pub rows: usize,
    pub steps_per_unit: usize,
}

impl Default for GeodesicOptions {
    fn default() -> Self {
        GeodesicOptions {
            tol: defaults::INTEGRATOR_TOL,
            rows: 64,
            steps_per_unit: 32,
        }
    }
}

/// A solved geodesic: K+1 uniform samples of position and velocity, with
/// per-sample chart assignment.
#[derive(Debug, Clone)]
pub struct GeodesicArc {
    pub s: Vec<f64>,
    pub chart: Vec<ChartId>,
    pub x: Vec<DVector<f64>>,
    pub v: Vec<DVector<f64>>,
    pub tol: f64,
    pub restarts: usize,
    pub chart_switches: usize,
}

impl GeodesicArc {
    pub fn steps(&self) -> usize {
        self.s.len() - 1
    }

    pub fn s_max(&self) -> f64 {
        *self.s.last().expect("arc has samples")
    }

    pub fn start_point(&self) -> Point {
        Point::new(self.chart[0], self.x[0].clone())
    }

    pub fn end_point(&self) -> Point {
        Point::new(
            *self.chart.last().unwrap(),
            self.x.last().unwrap().clone(),
        )
    }

    pub fn end_tangent(&self) -> TangentVector {
        TangentVector::new(
            *self.chart.last().unwrap(),
            self.x.last().unwrap().clone(),
            self.v.last().unwrap().clone(),
        )
    }

    /// Sample indices that slice this arc into `rows` uniform intervals.
    /// Valid because the step count is kept a multiple of `rows`.
    pub fn row_indices(&self, rows: usize) -> Vec<usize> {
        let k = self.steps();
        assert!(k % rows == 0, "arc steps {k} not a multiple of rows {rows}");
        (0..=rows).map(|j| j * (k / rows)).collect()
    }

    /// Metric speed at a sample.
    pub fn speed(&self, m: &Manifold, i: usize) -> Result<f64, ManifoldError> {
        m.g_norm(self.chart[i], &self.x[i], &self.v[i])
    }
}

#[derive(Clone)]
struct State {
    chart: ChartId,
    x: DVector<f64>,
    v: DVector<f64>,
    /// Parallel-transported auxiliary vectors riding along.
    aux: Vec<DVector<f64>>,
}

struct Derivative {
    dx: DVector<f64>,
    dv: DVector<f64>,
    daux: Vec<DVector<f64>>,
}

fn rhs(m: &Manifold, chart: ChartId, x: &DVector<f64>, v: &DVector<f64>, aux: &[DVector<f64>]) -> Result<Derivative, ManifoldError> {
    let gamma: Tensor3 = m.christoffel(chart, x)?;
    let dv = -gamma.contract2(v, v);
    let daux = aux.iter().map(|w| -gamma.contract2(v, w)).collect();
    Ok(Derivative {
        dx: v.clone(),
        dv,
        daux,
    })
}

fn advance(s: &State, d: &Derivative, h: f64) -> State {
    State {
        chart: s.chart,
        x: &s.x + &d.dx * h,
        v: &s.v + &d.dv * h,
        aux: s
            .aux
            .iter()
            .zip(&d.daux)
            .map(|(w, dw)| w + dw * h)
            .collect(),
    }
}

fn rk4_step(m: &Manifold, s: &State, h: f64) -> Result<State, ManifoldError> {
    let k1 = rhs(m, s.chart, &s.x, &s.v, &s.aux)?;
    let s2 = advance(s, &k1, h / 2.0);
    let k2 = rhs(m, s.chart, &s2.x, &s2.v, &s2.aux)?;
    let s3 = advance(s, &k2, h / 2.0);
    let k3 = rhs(m, s.chart, &s3.x, &s3.v, &s3.aux)?;
    let s4 = advance(s, &k3, h);
    let k4 = rhs(m, s.chart, &s4.x, &s4.v, &s4.aux)?;
    let n = s.x.len();
    let mut out = s.clone();
    for i in 0..n {
        out.x[i] += h / 6.0 * (k1.dx[i] + 2.0 * k2.dx[i] + 2.0 * k3.dx[i] + k4.dx[i]);
        out.v[i] += h / 6.0 * (k1.dv[i] + 2.0 * k2.dv[i] + 2.0 * k3.dv[i] + k4.dv[i]);
    }
    for (j, w) in out.aux.iter_mut().enumerate() {
        for i in 0..n {
            w[i] += h / 6.0
                * (k1.daux[j][i] + 2.0 * k2.daux[j][i] + 2.0 * k3.daux[j][i] + k4.daux[j][i]);
        }
    }
    Ok(out)
}

/// One error-controlled step: h-step versus two h/2-steps. Returns the
/// fine solution and the Richardson local-error estimate.
fn controlled_step(m: &Manifold, s: &State, h: f64) -> Result<(State, f64), ManifoldError> {
    let big = rk4_step(m, s, h)?;
    let mid = rk4_step(m, s, h / 2.0)?;
    let fine = rk4_step(m, &mid, h / 2.0)?;
    let mut err = 0.0f64;
    for i in 0..s.x.len() {
        err = err.max((big.x[i] - fine.x[i]).abs());
        err = err.max((big.v[i] - fine.v[i]).abs());
    }
    Ok((fine, err / 15.0))
}

enum Attempt {
    Done(Integration),
    Restart,
}

pub(crate) struct Integration {
    pub arc: GeodesicArc,
    /// aux[j][sample] — transported vectors at every sample.
    pub aux: Vec<Vec<DVector<f64>>>,
}

fn try_integration(
    m: &Manifold,
    start: &State,
    s_max: f64,
    steps: usize,
    tol: f64,
    restarts: usize,
) -> Result<Attempt, GeodesicError> {
    let h = s_max / steps as f64;
    let n_aux = start.aux.len();
    let mut state = start.clone();
    let mut arc = GeodesicArc {
        s: Vec::with_capacity(steps + 1),
        chart: Vec::with_capacity(steps + 1),
        x: Vec::with_capacity(steps + 1),
        v: Vec::with_capacity(steps + 1),
        tol,
        restarts,
        chart_switches: 0,
    };
    let mut aux_samples: Vec<Vec<DVector<f64>>> = vec![Vec::with_capacity(steps + 1); n_aux];
    let push = |arc: &mut GeodesicArc, aux_samples: &mut Vec<Vec<DVector<f64>>>, s: f64, st: &State| {
        arc.s.push(s);
        arc.chart.push(st.chart);
        arc.x.push(st.x.clone());
        arc.v.push(st.v.clone());
        for (j, w) in st.aux.iter().enumerate() {
            aux_samples[j].push(w.clone());
        }
    };
    push(&mut arc, &mut aux_samples, 0.0, &state);

    for k in 0..steps {
        let s_here = k as f64 * h;
        let stepped = match controlled_step(m, &state, h) {
            Ok((fine, err)) => {
                if err > tol {
                    return Ok(Attempt::Restart);
                }
                fine
            }
            Err(_) => {
                // a stage left the territory where the metric evaluates;
                // either the trajectory exits the domain inside this step
                // (report the exit) or the step is simply too large
                return match bisect_exit(m, &state, h, s_here) {
                    Some(exit) => Err(exit_error(exit, s_max)),
                    None => Ok(Attempt::Restart),
                };
            }
        };
        let chart_domain = &m.chart(stepped.chart)?.domain;
        let mut state_next = stepped;
        if !chart_domain.contains(&state_next.x) {
            match rescue_by_transition(m, &state_next)? {
                Some(switched) => {
                    state_next = switched;
                    arc.chart_switches += 1;
                }
                None => {
                    let exit = bisect_exit(m, &state, h, s_here)
                        .unwrap_or((s_here, state.clone()));
                    return Err(exit_error(exit, s_max));
                }
            }
        } else if let Some(target) = m.switch_hint(state_next.chart, &state_next.x) {
            if let Ok(switched) = apply_transition(m, &state_next, target) {
                state_next = switched;
                arc.chart_switches += 1;
            }
        }
        state = state_next;
        push(&mut arc, &mut aux_samples, (k + 1) as f64 * h, &state);
    }
    Ok(Attempt::Done(Integration {
        arc,
        aux: aux_samples,
    }))
}

fn exit_error((s_reached, last): (f64, State), s_requested: f64) -> GeodesicError {
    GeodesicError::LeftDomain {
        s_reached,
        s_requested,
        last_inside: Point::new(last.chart, last.x),
    }
}

fn apply_transition(m: &Manifold, s: &State, target: ChartId) -> Result<State, ManifoldError> {
    let eval = m.chart_transition(s.chart, target, &s.x)?;
    Ok(State {
        chart: target,
        v: eval.push_vector(&s.v),
        aux: s.aux.iter().map(|w| eval.push_vector(w)).collect(),
        x: eval.image,
    })
}

fn rescue_by_transition(m: &Manifold, s: &State) -> Result<Option<State>, ManifoldError> {
    for tr in m.transitions().iter().filter(|t| t.from == s.chart) {
        if let Ok(eval) = tr.eval(&s.x) {
            if m.chart(tr.to)?.domain.contains(&eval.image) {
                return Ok(Some(State {
                    chart: tr.to,
                    v: eval.push_vector(&s.v),
                    aux: s.aux.iter().map(|w| eval.push_vector(w)).collect(),
                    x: eval.image,
                }));
            }
        }
    }
    Ok(None)
}

/// Locate the domain-exit parameter inside a step by bisection on the step
/// fraction. Returns (s_exit, last inside state), with the exit parameter
/// resolved well below the reporting tolerance.
fn bisect_exit(m: &Manifold, from: &State, h: f64, s_here: f64) -> Option<(f64, State)> {
    let inside = |tau: f64| -> Option<State> {
        if tau == 0.0 {
            return Some(from.clone());
        }
        let st = rk4_step(m, from, tau * h).ok()?;
        let dom = &m.chart(st.chart).ok()?.domain;
        if dom.contains(&st.x) {
            Some(st)
        } else {
            None
        }
    };
    // the full step must actually exit for bisection to make sense
    if inside(1.0).is_some() {
        return None;
    }
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    let mut best = from.clone();
    let tol_tau = (defaults::DOMAIN_EXIT_TOL / 4.0 / h).max(1e-15);
    while hi - lo > tol_tau {
        let mid = 0.5 * (lo + hi);
        match inside(mid) {
            Some(st) => {
                lo = mid;
                best = st;
            }
            None => hi = mid,
        }
    }
    Some((s_here + lo * h, best))
}

pub(crate) fn integrate(
    m: &Manifold,
    start: &TangentVector,
    aux0: &[DVector<f64>],
    s_max: f64,
    opts: &GeodesicOptions,
) -> Result<Integration, GeodesicError> {
    assert!(s_max > 0.0, "s_max must be positive");
    assert!(opts.rows >= 1 && opts.tol > 0.0);
    let state = State {
        chart: start.chart,
        x: start.base.clone(),
        v: start.components.clone(),
        aux: aux0.to_vec(),
    };
    if !m.chart(start.chart)?.domain.contains(&start.base) {
        return Err(ManifoldError::OutOfDomain {
            chart: m.chart_name(start.chart).to_string(),
        }
        .into());
    }
    let mut steps = opts.rows;
    let density_target = (opts.steps_per_unit as f64 * s_max).ceil() as usize;
    while steps < density_target {
        steps *= 2;
    }
    let mut restarts = 0usize;
    loop {
        match try_integration(m, &state, s_max, steps, opts.tol, restarts)? {
            Attempt::Done(result) => return Ok(result),
            Attempt::Restart => {
                steps *= 2;
                restarts += 1;
                if steps > MAX_STEPS {
                    return Err(GeodesicError::StepLimit {
                        tol: opts.tol,
                        steps,
                    });
                }
            }
        }
    }
}

/// Solve the geodesic initial-value problem from `start` out to `s_max`.
pub fn geodesic_ivp(
    m: &Manifold,
    start: &TangentVector,
    s_max: f64,
    tol: f64,
) -> Result<GeodesicArc, GeodesicError> {
    geodesic_ivp_with(
        m,
        start,
        s_max,
        &GeodesicOptions {
            tol,
            ..GeodesicOptions::default()
        },
    )
}

pub fn geodesic_ivp_with(
    m: &Manifold,
    start: &TangentVector,
    s_max: f64,
    opts: &GeodesicOptions,
) -> Result<GeodesicArc, GeodesicError> {
    Ok(integrate(m, start, &[], s_max, opts)?.arc)
}

/// Riemannian exponential: the endpoint at s = 1 of the geodesic with the
/// given initial data. Gated by the manifold's epsilon policy.
pub fn exp_map(m: &Manifold, v: &TangentVector) -> Result<Point, GeodesicError> {
    exp_map_with(m, v, &GeodesicOptions::default())
}

pub fn exp_map_with(
    m: &Manifold,
    v: &TangentVector,
    opts: &GeodesicOptions,
) -> Result<Point, GeodesicError> {
    let norm = m.tangent_norm(v)?;
    let epsilon = m.epsilon();
    if norm >= epsilon {
        return Err(GeodesicError::RadiusExceeded { norm, epsilon });
    }
    if norm == 0.0 {
        return Ok(v.base_point());
    }
    // flat kinds are affine in chart coordinates; the closed form keeps
    // exp exact to roundoff instead of carrying integrator noise
    match m.kind() {
        ManifoldKind::Euclidean => {
            return Ok(Point::new(v.chart, &v.base + &v.components));
        }
        ManifoldKind::FlatTorus => {
            return Ok(Point::new(
                v.chart,
                builtin::wrap_angles(&(&v.base + &v.components)),
            ));
        }
        _ => {}
    }
    let result = integrate(m, v, &[], 1.0, opts)?;
    Ok(m.canonicalize(&result.arc.end_point())?)
}

/// Endpoint of the unit-parameter geodesic without the epsilon gate; the
/// boundary-value construction and the shooting solver drive the flow
/// beyond the chart-operation radius deliberately.
pub(crate) fn flow_endpoint(
    m: &Manifold,
    v: &TangentVector,
    opts: &GeodesicOptions,
) -> Result<Point, GeodesicError> {
    if v.components.iter().all(|&c| c == 0.0) {
        return Ok(v.base_point());
    }
    let result = integrate(m, v, &[], 1.0, opts)?;
    Ok(m.canonicalize(&result.arc.end_point())?)
}

/// Riemannian logarithm: the minimal-norm tangent vector at `p` whose
/// exponential is `q`. Closed form for builtins, damped-Newton shooting
/// for expression metrics.
pub fn log_map(m: &Manifold, p: &Point, q: &Point) -> Result<TangentVector, GeodesicError> {
    match m.kind() {
        ManifoldKind::Euclidean => {
            let q0 = m.point_in_chart(q, p.chart)?;
            Ok(TangentVector::new(
                p.chart,
                p.coords.clone(),
                &q0.coords - &p.coords,
            ))
        }
        ManifoldKind::FlatTorus => {
            let diff = builtin::wrap_angles(&(&q.coords - &p.coords));
            Ok(TangentVector::new(p.chart, p.coords.clone(), diff))
        }
        ManifoldKind::Sphere { radius } => sphere_log(m, p, q, *radius),
        ManifoldKind::Hyperbolic => {
            let q0 = m.point_in_chart(q, p.chart)?;
            let v = builtin::hyperbolic_log(&p.coords, &q0.coords);
            Ok(TangentVector::new(p.chart, p.coords.clone(), v))
        }
        ManifoldKind::Expression => shooting_log(m, p, q),
    }
}

/// Spherical angle between two points, computed through the embedding.
pub fn sphere_angle(m: &Manifold, p: &Point, q: &Point) -> Result<f64, GeodesicError> {
    let ManifoldKind::Sphere { .. } = *m.kind() else {
        return Err(ManifoldError::InvalidSpec(
            "spherical angle requested on a non-sphere manifold".to_string(),
        )
        .into());
    };
    let pe = builtin::sphere_embed(m, p)?;
    let qe = builtin::sphere_embed(m, q)?;
    // 2·atan2(|p−q|, |p+q|) is well conditioned at both ends of [0, π],
    // where acos of the normalized dot product loses half the digits
    Ok(2.0 * (&pe - &qe).norm().atan2((&pe + &qe).norm()))
}

fn sphere_log(m: &Manifold, p: &Point, q: &Point, r: f64) -> Result<TangentVector, GeodesicError> {
    let pe = builtin::sphere_embed(m, p)?;
    let qe = builtin::sphere_embed(m, q)?;
    let cos_theta = (pe.dot(&qe) / (r * r)).clamp(-1.0, 1.0);
    let theta = 2.0 * (&pe - &qe).norm().atan2((&pe + &qe).norm());
    if theta >= std::f64::consts::PI - defaults::ANTIPODAL_TOL {
        return Err(GeodesicError::AntipodalDegeneracy { angle: theta });
    }
    // tangential part of q at p; |t| = r·sin(theta)
    let t = &qe - &pe * cos_theta;
    let tn = t.norm();
    let ambient = if tn < 1e-300 {
        DVector::zeros(pe.len())
    } else {
        // scale to metric length r·theta: v = (theta/sin theta)·t
        &t * (theta * r / tn)
    };
    let v = builtin::sphere_pullback(m, p.chart, &p.coords, &ambient)?;
    Ok(TangentVector::new(p.chart, p.coords.clone(), v))
}

/// Damped-Newton shooting for log on expression manifolds: solve
/// exp_p(v) = q in chart coordinates with a central-difference Jacobian.
fn shooting_log(m: &Manifold, p: &Point, q: &Point) -> Result<TangentVector, GeodesicError> {
    let q0 = m.point_in_chart(q, p.chart)?;
    let opts = GeodesicOptions {
        tol: defaults::SHOOTING_INTEGRATOR_TOL,
        rows: 1,
        steps_per_unit: 32,
    };
    let n = m.dim();
    let endpoint = |v: &DVector<f64>| -> Option<DVector<f64>> {
        let tv = TangentVector::new(p.chart, p.coords.clone(), v.clone());
        match flow_endpoint(m, &tv, &opts) {
            Ok(pt) if pt.chart == p.chart => Some(pt.coords),
            _ => None,
        }
    };
    let residual = |v: &DVector<f64>| -> Option<DVector<f64>> {
        endpoint(v).map(|e| e - &q0.coords)
    };
    let mut v = &q0.coords - &p.coords;
    let mut r = residual(&v).ok_or(GeodesicError::NoConvergence {
        iters: 0,
        residual: f64::INFINITY,
    })?;
    for iter in 0..defaults::SHOOTING_MAX_ITERS {
        let rn = r.norm();
        if rn <= defaults::SHOOTING_RESIDUAL_TOL {
            return Ok(TangentVector::new(p.chart, p.coords.clone(), v));
        }
        // central-difference Jacobian of the endpoint in v
        let delta = defaults::SHOOTING_FD_STEP * v.norm().max(1.0);
        let mut jac = nalgebra::DMatrix::zeros(n, n);
        for j in 0..n {
            let mut vp = v.clone();
            vp[j] += delta;
            let mut vm = v.clone();
            vm[j] -= delta;
            let (ep, em) = match (endpoint(&vp), endpoint(&vm)) {
                (Some(a), Some(b)) => (a, b),
                _ => {
                    return Err(GeodesicError::NoConvergence {
                        iters: iter,
                        residual: rn,
                    })
                }
            };
            let col = (ep - em) / (2.0 * delta);
            jac.set_column(j, &col);
        }
        let step = jac.lu().solve(&r).ok_or(GeodesicError::NoConvergence {
            iters: iter,
            residual: rn,
        })?;
        // backtracking damping on the residual norm
        let mut accepted = false;
        let mut lambda = 1.0;
        for _ in 0..8 {
            let cand = &v - &step * lambda;
            if let Some(rc) = residual(&cand) {
                if rc.norm() < rn {
                    v = cand;
                    r = rc;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            return Err(GeodesicError::NoConvergence {
                iters: iter,
                residual: rn,
            });
        }
    }
    Err(GeodesicError::NoConvergence {
        iters: defaults::SHOOTING_MAX_ITERS,
        residual: r.norm(),
    })
}

/// Parallel-transport `w` along a solved geodesic arc: integrates
/// ẇ^k + Γ^k_ij γ̇^i w^j = 0 over the same step grid the arc used.
pub fn parallel_transport(
    m: &Manifold,
    arc: &GeodesicArc,
    w: &TangentVector,
) -> Result<TangentVector, GeodesicError> {
    let out = parallel_transport_many(m, arc, std::slice::from_ref(&w.components))?;
    Ok(out.into_iter().next().expect("one vector in, one out"))
}

/// Transport several vectors simultaneously (one integration).
pub fn parallel_transport_many(
    m: &Manifold,
    arc: &GeodesicArc,
    ws: &[DVector<f64>],
) -> Result<Vec<TangentVector>, GeodesicError> {
    let start = TangentVector::new(arc.chart[0], arc.x[0].clone(), arc.v[0].clone());
    let opts = GeodesicOptions {
        tol: arc.tol,
        rows: arc.steps(),
        steps_per_unit: 1,
    };
    let result = integrate(m, &start, ws, arc.s_max(), &opts)?;
    let end_chart = *result.arc.chart.last().unwrap();
    let end_x = result.arc.x.last().unwrap().clone();
    Ok(result
        .aux
        .iter()
        .map(|samples| {
            TangentVector::new(end_chart, end_x.clone(), samples.last().unwrap().clone())
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::builtin::{euclidean, flat_torus, hyperbolic, sphere};
    use approx::assert_relative_eq;

    fn tv(chart: usize, base: Vec<f64>, comps: Vec<f64>) -> TangentVector {
        TangentVector::new(
            ChartId(chart),
            DVector::from_vec(base),
            DVector::from_vec(comps),
        )
    }

    #[test]
    fn euclidean_geodesics_are_straight_lines() {
        let m = euclidean(2);
        let arc = geodesic_ivp(&m, &tv(0, vec![1.0, 2.0], vec![0.5, -1.0]), 3.0, 1e-10).unwrap();
        let end = arc.end_point();
        assert_relative_eq!(end.coords[0], 2.5, epsilon = 1e-12);
        assert_relative_eq!(end.coords[1], -1.0, epsilon = 1e-12);
        // interior sample too
        let mid = arc.steps() / 2;
        assert_relative_eq!(arc.x[mid][0], 1.0 + 0.5 * 1.5, epsilon = 1e-12);
    }

    #[test]
    fn zero_velocity_is_a_constant_arc() {
        let m = sphere(2, 1.0);
        let arc = geodesic_ivp(&m, &tv(0, vec![0.3, 0.1], vec![0.0, 0.0]), 2.0, 1e-10).unwrap();
        for x in &arc.x {
            assert_relative_eq!((x - DVector::from_vec(vec![0.3, 0.1])).norm(), 0.0);
        }
    }

    #[test]
    fn sphere_equatorial_geodesic_reaches_the_antipode() {
        // start on the equator of the unit sphere heading along it with
        // unit speed; at s = pi the arc arrives at the antipodal point
        let m = sphere(2, 1.0);
        let x0 = DVector::from_vec(vec![1.0, 0.0]);
        // metric factor at |x|=1 is 1, so unit metric speed is unit
        // coordinate speed
        let v0 = DVector::from_vec(vec![0.0, 1.0]);
        let arc = geodesic_ivp(
            &m,
            &TangentVector::new(ChartId(0), x0.clone(), v0),
            std::f64::consts::PI,
            1e-10,
        )
        .unwrap();
        let end = arc.end_point();
        let start_e =
            builtin::sphere_embed(&m, &Point::new(ChartId(0), x0)).unwrap();
        let end_e = builtin::sphere_embed(&m, &end).unwrap();
        assert!((end_e + start_e).norm() < 1e-8, "antipode reached");
    }

    #[test]
    fn polar_geodesic_switches_charts_and_hits_the_south_pole() {
        let m = sphere(2, 1.0);
        // from the north pole (origin of chart 0) with unit speed; metric
        // factor 4 at the origin means coordinate speed 1/2
        let arc = geodesic_ivp(&m, &tv(0, vec![0.0, 0.0], vec![0.5, 0.0]), std::f64::consts::PI, 1e-10)
            .unwrap();
        assert!(arc.chart_switches >= 1);
        let end = arc.end_point();
        assert_eq!(end.chart, ChartId(1), "ends represented in the south chart");
        assert!(end.coords.norm() < 1e-8, "south pole is the south-chart origin");
    }

    #[test]
    fn arc_speed_is_conserved() {
        let m = hyperbolic(2);
        let start = tv(0, vec![0.2, -0.1], vec![0.4, 0.3]);
        let arc = geodesic_ivp(&m, &start, 2.0, 1e-10).unwrap();
        let s0 = arc.speed(&m, 0).unwrap();
        for i in 0..=arc.steps() {
            assert!(
                (arc.speed(&m, i).unwrap() - s0).abs() <= 10.0 * 1e-10,
                "speed drift at sample {i}"
            );
        }
    }

    #[test]
    fn exp_gate_rejects_large_vectors() {
        let m = sphere(2, 1.0);
        // metric norm 2·0.5·pi at origin... coordinate 0.9 pi/2 with factor
        // 2 at origin gives metric norm 0.9 pi — exactly the gate
        let err = exp_map(&m, &tv(0, vec![0.0, 0.0], vec![0.45 * std::f64::consts::PI, 0.0]))
            .unwrap_err();
        assert!(matches!(err, GeodesicError::RadiusExceeded { .. }));
    }

    #[test]
    fn exp_and_log_round_trip_on_builtins() {
        let cases: Vec<(Manifold, TangentVector)> = vec![
            (euclidean(2), tv(0, vec![1.0, -2.0], vec![3.0, 0.5])),
            (sphere(2, 1.0), tv(0, vec![0.4, 0.2], vec![0.3, -0.2])),
            (hyperbolic(2), tv(0, vec![0.1, 0.3], vec![0.2, 0.1])),
        ];
        for (m, v) in cases {
            let q = exp_map(&m, &v).unwrap();
            let back = log_map(&m, &v.base_point(), &q).unwrap();
            assert!(
                (&back.components - &v.components).norm() < 1e-9,
                "round trip on {}",
                m.canonical_string()
            );
        }
    }

    #[test]
    fn torus_log_wraps() {
        let m = flat_torus(2);
        let p = Point::new(ChartId(0), DVector::from_vec(vec![3.0, 0.0]));
        let q = Point::new(ChartId(0), DVector::from_vec(vec![-3.0, 0.5]));
        let v = log_map(&m, &p, &q).unwrap();
        // going +0.28… wraps through pi rather than crossing zero
        assert!(v.components[0] > 0.0);
        assert_relative_eq!(v.components[0], 2.0 * std::f64::consts::PI - 6.0, epsilon = 1e-12);
    }

    #[test]
    fn log_of_same_point_is_zero() {
        let m = hyperbolic(2);
        let p = Point::new(ChartId(0), DVector::from_vec(vec![0.3, -0.4]));
        let v = log_map(&m, &p, &p).unwrap();
        assert_eq!(v.components.norm(), 0.0);
    }

    #[test]
    fn sphere_log_norm_is_the_spherical_angle() {
        let m = sphere(2, 1.0);
        let p = Point::new(ChartId(0), DVector::zeros(2));
        let q = Point::new(ChartId(0), DVector::from_vec(vec![1.0, 0.0]));
        let v = log_map(&m, &p, &q).unwrap();
        let norm = m.tangent_norm(&v).unwrap();
        assert_relative_eq!(norm, std::f64::consts::FRAC_PI_2, epsilon = 1e-13);
    }

    #[test]
    fn antipodal_log_is_degenerate() {
        let m = sphere(2, 1.0);
        // north pole and south pole: chart origins of the two charts
        let p = Point::new(ChartId(0), DVector::zeros(2));
        let q = Point::new(ChartId(1), DVector::zeros(2));
        let err = log_map(&m, &p, &q).unwrap_err();
        assert!(matches!(err, GeodesicError::AntipodalDegeneracy { .. }));
    }

    #[test]
    fn euclidean_transport_is_identity() {
        let m = euclidean(2);
        let arc = geodesic_ivp(&m, &tv(0, vec![0.0, 0.0], vec![1.0, 0.0]), 1.0, 1e-10).unwrap();
        let w = tv(0, vec![0.0, 0.0], vec![0.3, 0.7]);
        let out = parallel_transport(&m, &arc, &w).unwrap();
        assert_relative_eq!(out.components[0], 0.3, epsilon = 1e-12);
        assert_relative_eq!(out.components[1], 0.7, epsilon = 1e-12);
    }

    #[test]
    fn transport_preserves_inner_products() {
        let m = sphere(2, 1.0);
        let start = tv(0, vec![0.2, 0.5], vec![0.4, -0.1]);
        let arc = geodesic_ivp(&m, &start, 1.5, 1e-10).unwrap();
        let w1 = DVector::from_vec(vec![0.8, 0.1]);
        let w2 = DVector::from_vec(vec![-0.2, 0.9]);
        let before = m
            .g_inner(ChartId(0), &start.base, &w1, &w2)
            .unwrap();
        let out = parallel_transport_many(&m, &arc, &[w1, w2]).unwrap();
        let after = m
            .g_inner(out[0].chart, &out[0].base, &out[0].components, &out[1].components)
            .unwrap();
        assert!((before - after).abs() < 1e-7);
    }

    #[test]
    fn right_angled_spherical_triangle_holonomy_is_a_quarter_turn() {
        // N → (equator, 0°) → (equator, 90°) → N encloses an octant of
        // the unit sphere (area pi/2), so transport rotates by pi/2
        let m = sphere(2, 1.0);
        let quarter = std::f64::consts::FRAC_PI_2;
        let n_pole = DVector::zeros(2);
        let a = DVector::from_vec(vec![1.0, 0.0]);
        let b = DVector::from_vec(vec![0.0, 1.0]);
        let p_n = Point::new(ChartId(0), n_pole.clone());
        let p_a = Point::new(ChartId(0), a.clone());
        let p_b = Point::new(ChartId(0), b.clone());

        let mut w = DVector::from_vec(vec![0.7, 0.4]);
        let w0 = w.clone();
        let legs = [(p_n.clone(), p_a.clone()), (p_a, p_b.clone()), (p_b, p_n.clone())];
        let mut here = p_n.clone();
        for (from, to) in legs {
            let v = log_map(&m, &from, &to).unwrap();
            let arc = geodesic_ivp(&m, &v, 1.0, 1e-11).unwrap();
            let moved = parallel_transport(
                &m,
                &arc,
                &TangentVector::new(from.chart, from.coords.clone(), w.clone()),
            )
            .unwrap();
            here = Point::new(moved.chart, moved.base.clone());
            w = moved.components;
            assert_relative_eq!(quarter, quarter); // legs all length pi/2 by construction
        }
        assert_eq!(here.chart, ChartId(0));
        // compare angles in the metric at the north pole
        let g_dot = m.g_inner(ChartId(0), &n_pole, &w0, &w).unwrap();
        let n0 = m.g_norm(ChartId(0), &n_pole, &w0).unwrap();
        let n1 = m.g_norm(ChartId(0), &n_pole, &w).unwrap();
        assert_relative_eq!(n0, n1, epsilon = 1e-7);
        let angle = (g_dot / (n0 * n1)).clamp(-1.0, 1.0).acos();
        assert!(
            (angle - quarter).abs() < 1e-6,
            "holonomy angle {angle} vs {quarter}"
        );
    }

    #[test]
    fn uniqueness_across_baselines() {
        let m = hyperbolic(2);
        let start = tv(0, vec![0.1, 0.2], vec![0.5, -0.3]);
        let a = geodesic_ivp_with(
            &m,
            &start,
            2.0,
            &GeodesicOptions {
                tol: 1e-10,
                rows: 64,
                steps_per_unit: 32,
            },
        )
        .unwrap();
        let b = geodesic_ivp_with(
            &m,
            &start,
            2.0,
            &GeodesicOptions {
                tol: 1e-11,
                rows: 64,
                steps_per_unit: 64,
            },
        )
        .unwrap();
        let rows_a = a.row_indices(64);
        let rows_b = b.row_indices(64);
        for (ia, ib) in rows_a.iter().zip(&rows_b) {
            assert!((&a.x[*ia] - &b.x[*ib]).norm() < 1e-7);
        }
    }

    #[test]
    fn left_domain_reports_the_exit_parameter() {
        // plain euclidean metric but confined to the open unit disk
        let m = crate::io::open_disk();
        let start = tv(0, vec![0.5, 0.0], vec![1.0, 0.0]);
        let err = geodesic_ivp(&m, &start, 2.0, 1e-10).unwrap_err();
        match err {
            GeodesicError::LeftDomain { s_reached, .. } => {
                assert!((s_reached - 0.5).abs() < 1e-6, "exit at s = {s_reached}");
            }
            other => panic!("expected LeftDomain, got {other:?}"),
        }
    }
}
