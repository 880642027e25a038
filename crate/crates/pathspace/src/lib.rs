//! Geometry of spaces of smooth paths on a Riemannian manifold.
//!
//! A path space carries charts induced from the underlying manifold: a
//! smooth path is represented by sampled chart coordinates, a tangent
//! vector to the path space by a vector field along the path, and the
//! pointwise exponential map turns a neighborhood of the zero field into a
//! chart of the path space itself. This crate provides:
//!
//! - [`expr`]: the scalar expression language in which user-defined metric
//!   tensors and chart transitions are written;
//! - [`manifold`]: manifold descriptions (built-in constant-curvature
//!   families and expression metrics), metric evaluation, connection
//!   coefficients, curvature;
//! - [`geodesic`]: the adaptive geodesic integrator, exponential and
//!   logarithm maps, parallel transport;
//! - [`path`]: discrete paths and vector fields along them, the C1 chart
//!   norm, chart covers, chart changes, and the pathwise exponential chart
//!   with its transition operator;
//! - [`homotopy`]: geodesic homotopies (initial-value and boundary-value),
//!   residual certification, the induced connection and curvature on path
//!   space, obstruction scans, and completeness probes;
//! - [`verify`]: a self-check battery comparing computed quantities
//!   against independent closed forms;
//! - [`io`]: serialized forms of manifolds, curves, fields, and results.
//!
//! Numerical policy lives in [`defaults`]; parallel execution policy in
//! [`par`].

pub mod defaults;
pub mod expr;
pub mod geodesic;
pub mod homotopy;
pub mod io;
pub mod manifold;
pub mod oracle;
pub mod par;
pub mod path;
pub mod stencil;
pub mod verify;
