//! Built-in constant-curvature manifolds and their closed-form data.
//!
//! - `euclidean(n)`: single chart, identity metric.
//! - `sphere(n, r)`: two stereographic charts named `north` and `south`,
//!   each centered at its pole (the `north` chart projects from the south
//!   pole, so the north pole sits at the chart origin). Conformal factor
//!   4r⁴/(r²+|x|²)²; the transition is the coordinate inversion
//!   λ(x) = r²·x/|x|², its own inverse.
//! - `hyperbolic(n)`: Poincaré ball, factor 4/(1−|x|²)².
//! - `flat_torus(n)`: single angular chart, identity metric, with points
//!   canonically wrapped to (−π, π]ⁿ.
//!
//! The conformal families share one Christoffel closed form: for
//! g = e^{2φ}·I, Γ^k_ij = δ_ki a_j + δ_kj a_i − δ_ij a_k with a = ∇φ, and
//! ∂_l Γ^k_ij is the same expression in the Hessian of φ.

use super::transition::{TransMap, Transition};
use super::{Chart, ChartId, Domain, Manifold, ManifoldError, ManifoldKind, MetricField, Point};
use crate::defaults;
use nalgebra::{DMatrix, DVector};
use std::f64::consts::PI;

/// Flat R^n.
pub fn euclidean(n: usize) -> Manifold {
    Manifold::from_parts(
        ManifoldKind::Euclidean,
        n,
        vec![Chart {
            name: "main".to_string(),
            domain: Domain::All,
            metric: MetricField::Euclidean,
        }],
        vec![],
        f64::INFINITY,
        format!("euclidean({n})"),
    )
}

/// Round n-sphere of radius `r > 0` with two stereographic charts.
pub fn sphere(n: usize, r: f64) -> Manifold {
    assert!(r > 0.0, "sphere radius must be positive");
    let bound = defaults::SPHERE_CHART_BOUND_FACTOR * r;
    let chart = |name: &str| Chart {
        name: name.to_string(),
        domain: Domain::Ball {
            center: DVector::zeros(n),
            radius: bound,
        },
        metric: MetricField::SphereConformal { radius: r },
    };
    let transitions = vec![
        Transition {
            from: ChartId(0),
            to: ChartId(1),
            map: TransMap::SphereInversion { radius: r },
        },
        Transition {
            from: ChartId(1),
            to: ChartId(0),
            map: TransMap::SphereInversion { radius: r },
        },
    ];
    Manifold::from_parts(
        ManifoldKind::Sphere { radius: r },
        n,
        vec![chart("north"), chart("south")],
        transitions,
        defaults::SPHERE_EPSILON_FACTOR * PI * r,
        format!("sphere({n},r={r})"),
    )
}

/// Hyperbolic n-space as the Poincaré unit ball, curvature −1.
pub fn hyperbolic(n: usize) -> Manifold {
    Manifold::from_parts(
        ManifoldKind::Hyperbolic,
        n,
        vec![Chart {
            name: "ball".to_string(),
            domain: Domain::Ball {
                center: DVector::zeros(n),
                radius: 1.0,
            },
            metric: MetricField::HyperbolicConformal,
        }],
        vec![],
        f64::INFINITY,
        format!("hyperbolic({n})"),
    )
}

/// Flat n-torus with side 2π, single angular chart.
pub fn flat_torus(n: usize) -> Manifold {
    Manifold::from_parts(
        ManifoldKind::FlatTorus,
        n,
        vec![Chart {
            name: "angles".to_string(),
            domain: Domain::All,
            metric: MetricField::Euclidean,
        }],
        vec![],
        f64::INFINITY,
        format!("flat-torus({n})"),
    )
}

/// Sphere conformal factor 4r⁴/(r²+|x|²)².
pub fn sphere_factor(r: f64, x: &DVector<f64>) -> f64 {
    let d = r * r + x.norm_squared();
    4.0 * r.powi(4) / (d * d)
}

/// Hyperbolic conformal factor 4/(1−|x|²)²; errors at or beyond the ball
/// boundary where the metric blows up.
pub fn hyperbolic_factor(x: &DVector<f64>) -> Result<f64, ManifoldError> {
    let d = 1.0 - x.norm_squared();
    if d <= 0.0 {
        return Err(ManifoldError::OutOfDomain {
            chart: "ball".to_string(),
        });
    }
    Ok(4.0 / (d * d))
}

/// Gradient a = ∇φ and Hessian H = ∇²φ of the conformal exponent
/// φ = ½·log g₁₁ for the two conformal builtins.
pub(crate) fn conformal_gradient(
    metric: &MetricField,
    x: &DVector<f64>,
) -> Option<(DVector<f64>, DMatrix<f64>)> {
    let n = x.len();
    match metric {
        MetricField::SphereConformal { radius } => {
            // φ = log(2r²) − log(r²+ρ²): a_i = −2x_i/(r²+ρ²)
            let d = radius * radius + x.norm_squared();
            let a = x * (-2.0 / d);
            let mut h = DMatrix::identity(n, n) * (-2.0 / d);
            for i in 0..n {
                for l in 0..n {
                    h[(i, l)] += 4.0 * x[i] * x[l] / (d * d);
                }
            }
            Some((a, h))
        }
        MetricField::HyperbolicConformal => {
            // φ = log 2 − log(1−ρ²): a_i = 2x_i/(1−ρ²)
            let d = 1.0 - x.norm_squared();
            let a = x * (2.0 / d);
            let mut h = DMatrix::identity(n, n) * (2.0 / d);
            for i in 0..n {
                for l in 0..n {
                    h[(i, l)] += 4.0 * x[i] * x[l] / (d * d);
                }
            }
            Some((a, h))
        }
        _ => None,
    }
}

/// Wrap each angular coordinate into (−π, π].
pub fn wrap_angles(x: &DVector<f64>) -> DVector<f64> {
    DVector::from_iterator(
        x.len(),
        x.iter().map(|&xi| {
            let mut w = xi.rem_euclid(2.0 * PI);
            if w > PI {
                w -= 2.0 * PI;
            }
            w
        }),
    )
}

/// Ambient embedding of a sphere chart point into R^{n+1}. The last
/// ambient coordinate is +r(r²−ρ²)/(r²+ρ²) in the `north` chart (index 0)
/// and its negative in the `south` chart.
pub fn sphere_embed(m: &Manifold, p: &Point) -> Result<DVector<f64>, ManifoldError> {
    let ManifoldKind::Sphere { radius: r } = *m.kind() else {
        return Err(ManifoldError::InvalidSpec(
            "sphere embedding requested on a non-sphere manifold".to_string(),
        ));
    };
    let n = m.dim();
    let x = &p.coords;
    let d = r * r + x.norm_squared();
    let mut e = DVector::zeros(n + 1);
    for i in 0..n {
        e[i] = 2.0 * r * r * x[i] / d;
    }
    let pole = r * (r * r - x.norm_squared()) / d;
    e[n] = if p.chart.0 == 0 { pole } else { -pole };
    Ok(e)
}

/// Jacobian of the sphere embedding at a chart point: an (n+1)×n matrix
/// mapping chart tangent components to ambient vectors.
pub fn sphere_embed_jacobian(
    m: &Manifold,
    chart: ChartId,
    x: &DVector<f64>,
) -> Result<DMatrix<f64>, ManifoldError> {
    let ManifoldKind::Sphere { radius: r } = *m.kind() else {
        return Err(ManifoldError::InvalidSpec(
            "sphere embedding requested on a non-sphere manifold".to_string(),
        ));
    };
    let n = m.dim();
    let d = r * r + x.norm_squared();
    let mut jac = DMatrix::zeros(n + 1, n);
    for i in 0..n {
        for j in 0..n {
            let delta = if i == j { 1.0 } else { 0.0 };
            jac[(i, j)] = 2.0 * r * r * (delta * d - 2.0 * x[i] * x[j]) / (d * d);
        }
    }
    let sign = if chart.0 == 0 { 1.0 } else { -1.0 };
    for j in 0..n {
        jac[(n, j)] = sign * (-4.0) * r.powi(3) * x[j] / (d * d);
    }
    Ok(jac)
}

/// Pull an ambient tangent vector at the embedded point back to chart
/// components. Uses conformality: dσᵀdσ = F·I, so the pullback is
/// dσᵀ·w / F.
pub fn sphere_pullback(
    m: &Manifold,
    chart: ChartId,
    x: &DVector<f64>,
    ambient: &DVector<f64>,
) -> Result<DVector<f64>, ManifoldError> {
    let ManifoldKind::Sphere { radius: r } = *m.kind() else {
        return Err(ManifoldError::InvalidSpec(
            "sphere pullback requested on a non-sphere manifold".to_string(),
        ));
    };
    let jac = sphere_embed_jacobian(m, chart, x)?;
    let f = sphere_factor(r, x);
    Ok(jac.transpose() * ambient / f)
}

/// Möbius addition on the Poincaré ball.
pub fn mobius_add(a: &DVector<f64>, b: &DVector<f64>) -> DVector<f64> {
    let ab = a.dot(b);
    let na2 = a.norm_squared();
    let nb2 = b.norm_squared();
    let denom = 1.0 + 2.0 * ab + na2 * nb2;
    (a * (1.0 + 2.0 * ab + nb2) + b * (1.0 - na2)) / denom
}

/// Hyperbolic distance between Poincaré-ball points.
pub fn hyperbolic_distance(x: &DVector<f64>, y: &DVector<f64>) -> f64 {
    let num = 2.0 * (x - y).norm_squared();
    let den = (1.0 - x.norm_squared()) * (1.0 - y.norm_squared());
    (1.0 + num / den).acosh()
}

/// Closed-form hyperbolic logarithm in chart coordinates.
pub fn hyperbolic_log(x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
    let m = mobius_add(&(-x), y);
    let nm = m.norm();
    if nm == 0.0 {
        return DVector::zeros(x.len());
    }
    // ‖log‖_g equals the distance 2·artanh|m|; the conformal factor at x
    // scales chart components by (1−|x|²)/2
    let scale = (1.0 - x.norm_squared()) * nm.atanh() / nm;
    m * scale
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sphere_embedding_lands_on_the_sphere() {
        let m = sphere(2, 2.0);
        for (chart, coords) in [
            (0usize, vec![0.0, 0.0]),
            (0, vec![1.0, -0.5]),
            (1, vec![0.3, 2.2]),
        ] {
            let p = Point::new(ChartId(chart), DVector::from_vec(coords));
            let e = sphere_embed(&m, &p).unwrap();
            assert_relative_eq!(e.norm(), 2.0, epsilon = 1e-14);
        }
        // chart origins are the poles
        let n_pole = sphere_embed(&m, &Point::new(ChartId(0), DVector::zeros(2))).unwrap();
        assert_relative_eq!(n_pole[2], 2.0, epsilon = 1e-15);
        let s_pole = sphere_embed(&m, &Point::new(ChartId(1), DVector::zeros(2))).unwrap();
        assert_relative_eq!(s_pole[2], -2.0, epsilon = 1e-15);
    }

    #[test]
    fn embedding_jacobian_matches_finite_differences() {
        let m = sphere(2, 1.3);
        let x = DVector::from_vec(vec![0.4, -0.7]);
        for chart in [ChartId(0), ChartId(1)] {
            let jac = sphere_embed_jacobian(&m, chart, &x).unwrap();
            let h = 1e-6;
            for j in 0..2 {
                let mut xp = x.clone();
                xp[j] += h;
                let mut xm = x.clone();
                xm[j] -= h;
                let ep = sphere_embed(&m, &Point::new(chart, xp)).unwrap();
                let em = sphere_embed(&m, &Point::new(chart, xm)).unwrap();
                let fd = (ep - em) / (2.0 * h);
                for i in 0..3 {
                    assert_relative_eq!(jac[(i, j)], fd[i], epsilon = 1e-8);
                }
            }
        }
    }

    #[test]
    fn embedding_is_isometric_onto_the_metric() {
        // dσᵀdσ must equal the conformal factor times the identity
        let m = sphere(2, 1.0);
        let x = DVector::from_vec(vec![0.8, 0.3]);
        let jac = sphere_embed_jacobian(&m, ChartId(0), &x).unwrap();
        let gram = jac.transpose() * &jac;
        let f = sphere_factor(1.0, &x);
        assert_relative_eq!(gram[(0, 0)], f, epsilon = 1e-13);
        assert_relative_eq!(gram[(1, 1)], f, epsilon = 1e-13);
        assert!(gram[(0, 1)].abs() < 1e-13);
    }

    #[test]
    fn mobius_addition_identities() {
        let a = DVector::from_vec(vec![0.3, -0.2]);
        let zero = DVector::zeros(2);
        assert_relative_eq!((mobius_add(&zero, &a) - &a).norm(), 0.0, epsilon = 1e-15);
        assert_relative_eq!((mobius_add(&a, &zero) - &a).norm(), 0.0, epsilon = 1e-15);
        // left inverse: (−a) ⊕ a = 0
        assert!(mobius_add(&(-a.clone()), &a).norm() < 1e-15);
    }

    #[test]
    fn hyperbolic_distance_agrees_with_mobius_form() {
        let x = DVector::from_vec(vec![0.1, 0.4]);
        let y = DVector::from_vec(vec![-0.5, 0.2]);
        let d1 = hyperbolic_distance(&x, &y);
        let d2 = 2.0 * mobius_add(&(-x.clone()), &y).norm().atanh();
        assert_relative_eq!(d1, d2, epsilon = 1e-13);
    }

    #[test]
    fn hyperbolic_log_from_origin_is_radial() {
        // from the origin, log points straight at y with metric norm
        // equal to the distance 2·artanh|y|
        let y = DVector::from_vec(vec![0.6, 0.0]);
        let v = hyperbolic_log(&DVector::zeros(2), &y);
        assert_relative_eq!(v[0], 0.6f64.atanh(), epsilon = 1e-14);
        assert_relative_eq!(v[1], 0.0, epsilon = 1e-15);
        // metric norm at origin multiplies euclidean norm by 2
        assert_relative_eq!(2.0 * v.norm(), hyperbolic_distance(&DVector::zeros(2), &y), epsilon = 1e-13);
    }

    #[test]
    fn torus_wrapping() {
        let x = DVector::from_vec(vec![3.5 * PI, -PI]);
        let w = wrap_angles(&x);
        assert_relative_eq!(w[0], -0.5 * PI, epsilon = 1e-12);
        assert_relative_eq!(w[1], PI, epsilon = 1e-12);
    }
}
