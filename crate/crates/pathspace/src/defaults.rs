//! Central numeric policy: tolerances, safety factors, and grid densities.
//!
//! Everything here is a contract with the test suite, not a free knob.
//! Each constant states what breaks if it moves.

/// Default adaptive-integrator local error tolerance. Richardson halving
/// accepts a step when the estimated local error is below this.
pub const INTEGRATOR_TOL: f64 = 1e-10;

/// Boundary-value solves integrate tighter than the residual they chase,
/// otherwise Newton stalls on integrator noise before reaching
/// [`SHOOTING_RESIDUAL_TOL`].
pub const SHOOTING_INTEGRATOR_TOL: f64 = 1e-12;

/// Endpoint residual (chart coordinates) at which shooting declares
/// convergence.
pub const SHOOTING_RESIDUAL_TOL: f64 = 1e-10;

/// Maximum damped-Newton iterations for the shooting solver.
pub const SHOOTING_MAX_ITERS: usize = 50;

/// Step for the finite-difference shooting Jacobian. Balances truncation
/// (~h^2) against subtraction noise (~tol/h) at the integrator tolerance.
pub const SHOOTING_FD_STEP: f64 = 1e-6;

/// A geodesic grid is certified when the max pointwise connection residual
/// falls below this. Fourth-order stencils on the documented grid densities
/// land one to two orders below it; a genuine defect lands far above.
pub const RESIDUAL_CERTIFY_TOL: f64 = 1e-5;

/// Colatitude within this of pi is treated as exactly antipodal: the
/// closed-form sphere log has no distinguished preimage there.
pub const ANTIPODAL_TOL: f64 = 1e-6;

/// Colatitude within this of pi (but beyond [`ANTIPODAL_TOL`]) still
/// returns a log, flagged as ill-conditioned.
pub const NEAR_ANTIPODAL_WARN: f64 = 1e-3;

/// Fraction of the sphere injectivity radius pi*r admitted by the default
/// chart-operation gate.
pub const SPHERE_EPSILON_FACTOR: f64 = 0.9;

/// Default chart-operation gate for expression manifolds when the config
/// does not set one.
pub const EXPRESSION_EPSILON: f64 = 1.0;

/// Stereographic coordinate norm (in units of the radius) beyond which the
/// integrator switches hemisphere charts. Conservative: the equator sits at
/// coordinate norm 1.0, the opposite pole at infinity.
pub const SPHERE_CHART_SWITCH_FACTOR: f64 = 1.9;

/// Hard cap on stereographic coordinate norm (units of radius) for points
/// accepted as chart representations; beyond this the other chart must be
/// used.
pub const SPHERE_CHART_BOUND_FACTOR: f64 = 2.0;

/// Bisection width (in the homotopy parameter) at which a domain exit is
/// reported.
pub const DOMAIN_EXIT_TOL: f64 = 1e-6;

/// Chart covers place switch points at this fraction of the distance to
/// the domain boundary, and adjacent chart intervals overlap by at least
/// [`COVER_MIN_OVERLAP`] of the parameter interval.
pub const COVER_SAFETY: f64 = 0.9;
pub const COVER_MIN_OVERLAP: f64 = 0.05;

/// Transverse sample density for completeness probes and residual
/// assessment: at least this many s-steps per unit of homotopy parameter.
pub const HOMOTOPY_STEPS_PER_UNIT_S: usize = 64;

/// Integrator tolerance for homotopy rays (initial-value sweeps and
/// completeness probes). Tighter than the plain geodesic default because
/// per-ray global drift grows like steps × tol, and probe-scale rays
/// (S = 20, a few thousand steps) must stay inside the 1e-7 uniqueness
/// and constant-transverse-speed budgets.
pub const HOMOTOPY_INTEGRATOR_TOL: f64 = 1e-11;

/// Integrator tolerance for boundary-value rays. The endpoint residual
/// target is 1e-8; global error ≈ steps × tol must sit well below it at
/// the few hundred steps a unit-parameter ray takes.
pub const BVP_INTEGRATOR_TOL: f64 = 1e-12;

/// Fiber-direction finite-difference step for the transition operator's
/// pointwise derivative D_y p, differenced at fourth order (two-scale
/// central stencil). The step splits two constraints: in the affine case
/// the gap against the exact derivative is pure subtraction noise
/// ~roundoff/step ≈ 3e-16/1e-3 per sample, safely under the 1e-12 gate;
/// on curved fibers the fourth-order bias ~step⁴ ≈ 1e-12 stays far below
/// the quadratic convergence signal being measured.
pub const FIBER_FD_STEP: f64 = 1e-3;

/// Finite-difference steps for cross-checking symbolic derivatives:
/// first-derivative and second-derivative stencil spacings, balancing
/// truncation against round-off.
pub const FD_STEP_FIRST: f64 = 1e-6;
pub const FD_STEP_SECOND: f64 = 1e-5;

/// Default t-grid interval count N for discrete paths (grids carry N+1
/// samples); all documented tolerances are quoted at this density.
pub const DEFAULT_GRID_N: usize = 100;

/// Default s-grid interval count M for homotopies.
pub const DEFAULT_GRID_M: usize = 64;
