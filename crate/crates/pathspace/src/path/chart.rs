//! Exponential charts on path space and the transition operator
//! between overlapping charts.
//!
//! A chart around γ sends a field X along γ to the path
//! t ↦ exp_{γ(t)}(X(t)); its inverse recovers the field by the pointwise
//! logarithm. The transition operator between the charts of γ1 and γ2 is
//! the composition P = Exp_{γ2}^{-1} ∘ Exp_{γ1}, which acts pointwise in
//! t through the fiber map p(t, ·) = exp_{γ2(t)}^{-1} ∘ exp_{γ1(t)}; its
//! derivative in the fiber argument is checked against a finite
//! difference of the full operator.

use super::{
    field_derivatives, position_derivatives, sample_geodesic_error, DiscretePath, PathError,
    PathTangent,
};
use crate::defaults;
use crate::geodesic::{self, GeodesicOptions};
use crate::manifold::{Manifold, TangentVector};
use nalgebra::DVector;

/// Exponential chart: the path t_i ↦ exp_{γ(t_i)}(X(t_i)).
pub fn path_exp_chart(
    m: &Manifold,
    path: &DiscretePath,
    x: &PathTangent,
) -> Result<DiscretePath, PathError> {
    path_exp_chart_with(m, path, x, &GeodesicOptions::default())
}

pub fn path_exp_chart_with(
    m: &Manifold,
    path: &DiscretePath,
    x: &PathTangent,
    opts: &GeodesicOptions,
) -> Result<DiscretePath, PathError> {
    x.check_along(path)?;
    let mut chart = Vec::with_capacity(path.len());
    let mut xs = Vec::with_capacity(path.len());
    for i in 0..path.len() {
        let v = TangentVector::new(path.chart[i], path.x[i].clone(), x.w[i].clone());
        let p = geodesic::exp_map_with(m, &v, opts).map_err(|e| sample_geodesic_error(i, e))?;
        chart.push(p.chart);
        xs.push(p.coords);
    }
    let dx = position_derivatives(m, &path.t, &chart, &xs)?;
    Ok(DiscretePath::from_parts(path.t.clone(), chart, xs, dx))
}

/// Inverse exponential chart: the field X along γ with
/// exp_{γ(t_i)}(X(t_i)) = σ(t_i), recovered by the pointwise logarithm.
pub fn path_log_chart(
    m: &Manifold,
    gamma: &DiscretePath,
    sigma: &DiscretePath,
) -> Result<PathTangent, PathError> {
    if gamma.len() != sigma.len() {
        return Err(PathError::GridMismatch(format!(
            "base path has {} samples, target path has {}",
            gamma.len(),
            sigma.len()
        )));
    }
    let mut w = Vec::with_capacity(gamma.len());
    for i in 0..gamma.len() {
        let v = geodesic::log_map(m, &gamma.point(i), &sigma.point(i))
            .map_err(|e| sample_geodesic_error(i, e))?;
        w.push(v.components);
    }
    let dw = field_derivatives(m, gamma, &w)?;
    Ok(PathTangent {
        t: gamma.t.clone(),
        chart: gamma.chart.clone(),
        w,
        dw,
    })
}

/// Transition operator between the path-space charts centered at γ1 and
/// γ2: P(X) = Exp_{γ2}^{-1}(Exp_{γ1}(X)).
pub fn transition_operator(
    m: &Manifold,
    gamma1: &DiscretePath,
    gamma2: &DiscretePath,
    x: &PathTangent,
) -> Result<PathTangent, PathError> {
    transition_operator_with(m, gamma1, gamma2, x, &GeodesicOptions::default())
}

pub fn transition_operator_with(
    m: &Manifold,
    gamma1: &DiscretePath,
    gamma2: &DiscretePath,
    x: &PathTangent,
    opts: &GeodesicOptions,
) -> Result<PathTangent, PathError> {
    let sigma = path_exp_chart_with(m, gamma1, x, opts)?;
    path_log_chart(m, gamma2, &sigma)
}

/// Result of checking the pointwise derivative law of the transition
/// operator: a central difference of the full operator against the
/// fiberwise derivative D_y p applied to the perturbation.
#[derive(Debug, Clone)]
pub struct TransitionCheck {
    pub fd: PathTangent,
    pub analytic: PathTangent,
    /// Sup over grid samples of the euclidean gap between the two value
    /// samples; O(step²) on curved fibers, roundoff-level on affine ones.
    pub max_gap: f64,
}

/// Compare (P(X + step·h) − P(X − step·h)) / (2·step) against the
/// pointwise fiber derivative D_y p(t_i, X(t_i))·h(t_i). The fiber
/// derivative is a fourth-order directional difference at scale
/// [`defaults::FIBER_FD_STEP`]; all exp evaluations inside run at the
/// tight boundary-value tolerance so integration noise stays below the
/// convergence signal.
pub fn transition_derivative_check(
    m: &Manifold,
    gamma1: &DiscretePath,
    gamma2: &DiscretePath,
    x: &PathTangent,
    h: &PathTangent,
    step: f64,
) -> Result<TransitionCheck, PathError> {
    if !(step > 0.0) {
        return Err(PathError::BadParameterization(format!(
            "finite-difference step must be positive, got {step}"
        )));
    }
    let tight = GeodesicOptions {
        tol: defaults::BVP_INTEGRATOR_TOL,
        ..GeodesicOptions::default()
    };
    let plus = transition_operator_with(m, gamma1, gamma2, &x.combine(1.0, h, step)?, &tight)?;
    let minus = transition_operator_with(m, gamma1, gamma2, &x.combine(1.0, h, -step)?, &tight)?;
    let fd = plus.combine(1.0 / (2.0 * step), &minus, -1.0 / (2.0 * step))?;

    let delta = defaults::FIBER_FD_STEP;
    let mut w = Vec::with_capacity(gamma1.len());
    for i in 0..gamma1.len() {
        let probe = |y: DVector<f64>| -> Result<DVector<f64>, PathError> {
            let v = TangentVector::new(gamma1.chart[i], gamma1.x[i].clone(), y);
            let q = geodesic::exp_map_with(m, &v, &tight)
                .map_err(|e| sample_geodesic_error(i, e))?;
            let l = geodesic::log_map(m, &gamma2.point(i), &q)
                .map_err(|e| sample_geodesic_error(i, e))?;
            Ok(l.components)
        };
        let p1 = probe(&x.w[i] + &h.w[i] * delta)?;
        let m1 = probe(&x.w[i] - &h.w[i] * delta)?;
        let p2 = probe(&x.w[i] + &h.w[i] * (2.0 * delta))?;
        let m2 = probe(&x.w[i] - &h.w[i] * (2.0 * delta))?;
        w.push(((p1 - m1) * 8.0 - (p2 - m2)) / (12.0 * delta));
    }
    let dw = field_derivatives(m, gamma2, &w)?;
    let analytic = PathTangent {
        t: gamma2.t.clone(),
        chart: gamma2.chart.clone(),
        w,
        dw,
    };
    let max_gap = fd
        .w
        .iter()
        .zip(&analytic.w)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    Ok(TransitionCheck {
        fd,
        analytic,
        max_gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::builtin::{euclidean, sphere};
    use crate::manifold::ChartId;
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
                    DVector::from_vec(vec![
                        a.0 + t * (b.0 - a.0),
                        a.1 + t * (b.1 - a.1),
                    ]),
                )
            })
            .collect();
        resample_path(m, ChartId(0), &samples, n).unwrap()
    }

    fn equatorial_sphere_path(m: &Manifold, lift: f64, sweep: f64, n: usize) -> DiscretePath {
        let samples: Vec<(f64, DVector<f64>)> = (0..17)
            .map(|i| {
                let t = i as f64 / 16.0;
                let phi = sweep * t;
                (
                    t,
                    DVector::from_vec(vec![phi.cos(), phi.sin() + lift * t * (1.0 - t)]),
                )
            })
            .collect();
        resample_path(m, ChartId(0), &samples, n).unwrap()
    }

    fn smooth_field(path: &DiscretePath, m: &Manifold, amp: f64) -> PathTangent {
        let w: Vec<DVector<f64>> = path
            .t
            .iter()
            .map(|&t| {
                DVector::from_vec(vec![
                    amp * (1.0 + 2.0 * t).sin(),
                    amp * (0.5 - t) * (2.0 * t).cos(),
                ])
            })
            .collect();
        PathTangent::from_components(m, path, w).unwrap()
    }

    #[test]
    fn exp_of_zero_field_is_the_path_itself() {
        let m = sphere(2, 1.0);
        let path = equatorial_sphere_path(&m, 0.1, 0.9, 32);
        let z = PathTangent::zeros_along(&path);
        let out = path_exp_chart(&m, &path, &z).unwrap();
        for i in 0..path.len() {
            assert_eq!(out.chart[i], path.chart[i]);
            assert_eq!(out.x[i], path.x[i]);
            assert!((&out.dx[i] - &path.dx[i]).norm() < 1e-6);
        }
    }

    #[test]
    fn euclidean_exp_is_pointwise_translation() {
        let m = euclidean(2);
        let path = euclid_path(&m, (0.0, 0.0), (1.0, 0.5), 32);
        let x = smooth_field(&path, &m, 0.4);
        let out = path_exp_chart(&m, &path, &x).unwrap();
        for i in 0..path.len() {
            let expect = &path.x[i] + &x.w[i];
            assert!((&out.x[i] - expect).norm() < 1e-12, "sample {i}");
        }
    }

    #[test]
    fn sphere_exp_matches_the_great_circle_oracle() {
        let m = sphere(2, 1.0);
        let path = equatorial_sphere_path(&m, 0.05, 1.1, 32);
        let x = smooth_field(&path, &m, 0.3);
        let out = path_exp_chart(&m, &path, &x).unwrap();
        for i in 0..path.len() {
            let v = TangentVector::new(path.chart[i], path.x[i].clone(), x.w[i].clone());
            let expect = oracle::sphere_exp(&m, &v, 1.0).unwrap();
            let got = m.point_in_chart(&out.point(i), expect.chart).unwrap();
            assert!(
                (&got.coords - &expect.coords).norm() < 1e-8,
                "sample {i}: {:?} vs {:?}",
                got.coords,
                expect.coords
            );
        }
    }

    #[test]
    fn log_of_the_path_against_itself_vanishes() {
        let m = sphere(2, 1.0);
        let path = equatorial_sphere_path(&m, 0.2, 1.0, 32);
        let x = path_log_chart(&m, &path, &path).unwrap();
        for w in &x.w {
            assert!(w.norm() <= 1e-12);
        }
    }

    #[test]
    fn euclidean_log_is_the_difference() {
        let m = euclidean(2);
        let g = euclid_path(&m, (0.0, 0.0), (1.0, 0.0), 32);
        let s = euclid_path(&m, (0.1, 0.3), (0.8, 0.6), 32);
        let x = path_log_chart(&m, &g, &s).unwrap();
        for i in 0..g.len() {
            let expect = &s.x[i] - &g.x[i];
            assert!((&x.w[i] - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn antipodal_sample_reports_its_index() {
        let m = sphere(2, 1.0);
        let path = equatorial_sphere_path(&m, 0.0, 0.7, 20);
        // antipodal map in stereographic coordinates: x ↦ −r²x/|x|²
        let mut coords = path.x.clone();
        coords[7] = -&coords[7] / coords[7].norm_squared();
        let sigma =
            DiscretePath::from_samples(&m, path.t.clone(), path.chart.clone(), coords).unwrap();
        let err = path_log_chart(&m, &path, &sigma).unwrap_err();
        match err {
            PathError::AntipodalDegeneracy { index, angle } => {
                assert_eq!(index, 7);
                assert!((angle - std::f64::consts::PI).abs() < 1e-9);
            }
            other => panic!("expected antipodal degeneracy, got {other}"),
        }
    }

    #[test]
    fn exp_log_round_trip_recovers_the_field() {
        let m = sphere(2, 1.0);
        let path = equatorial_sphere_path(&m, 0.1, 1.2, 100);
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..5 {
            // metric gate is 0.9π; euclidean amplitude 0.3 keeps the
            // metric norm at or under ~0.85 everywhere on the band
            let amp = 0.3;
            let w: Vec<DVector<f64>> = (0..path.len())
                .map(|_| DVector::from_fn(2, |_, _| rng.random_range(-amp..amp)))
                .collect();
            let x = PathTangent::from_components(&m, &path, w).unwrap();
            let sigma = path_exp_chart(&m, &path, &x).unwrap();
            let back = path_log_chart(&m, &path, &sigma).unwrap();
            for i in 0..path.len() {
                assert!(
                    (&back.w[i] - &x.w[i]).norm() <= 1e-7,
                    "sample {i}: gap {}",
                    (&back.w[i] - &x.w[i]).norm()
                );
            }
        }
    }

    #[test]
    fn transition_operator_is_identity_on_the_same_path() {
        let m = euclidean(2);
        let g = euclid_path(&m, (0.0, 0.0), (1.0, 0.2), 32);
        let x = smooth_field(&g, &m, 0.5);
        let p = transition_operator(&m, &g, &g, &x).unwrap();
        for i in 0..g.len() {
            assert!((&p.w[i] - &x.w[i]).norm() < 1e-9);
        }
    }

    #[test]
    fn euclidean_transition_shifts_by_the_path_difference() {
        let m = euclidean(2);
        let g1 = euclid_path(&m, (0.0, 0.0), (1.0, 0.0), 32);
        let g2 = euclid_path(&m, (0.2, -0.1), (0.9, 0.4), 32);
        let x = smooth_field(&g1, &m, 0.5);
        let p = transition_operator(&m, &g1, &g2, &x).unwrap();
        for i in 0..g1.len() {
            let expect = &x.w[i] + &g1.x[i] - &g2.x[i];
            assert!((&p.w[i] - expect).norm() < 1e-9, "sample {i}");
        }
    }

    #[test]
    fn sphere_transition_of_zero_is_the_pointwise_log() {
        let m = sphere(2, 1.0);
        let g1 = equatorial_sphere_path(&m, 0.15, 1.0, 48);
        let g2 = equatorial_sphere_path(&m, -0.1, 1.05, 48);
        let z = PathTangent::zeros_along(&g1);
        let p = transition_operator(&m, &g1, &g2, &z).unwrap();
        for i in 0..g1.len() {
            let expect = geodesic::log_map(&m, &g2.point(i), &g1.point(i)).unwrap();
            assert!(
                (&p.w[i] - &expect.components).norm() <= 1e-7,
                "sample {i}"
            );
        }
    }

    #[test]
    fn derivative_check_gap_is_roundoff_on_affine_fibers() {
        let m = euclidean(2);
        let g1 = euclid_path(&m, (0.0, 0.0), (1.0, 0.3), 32);
        let g2 = euclid_path(&m, (0.3, -0.2), (0.7, 0.5), 32);
        let x = smooth_field(&g1, &m, 0.4);
        let h = smooth_field(&g1, &m, 0.25);
        for step in [1e-2, 1e-3] {
            let check = transition_derivative_check(&m, &g1, &g2, &x, &h, step).unwrap();
            assert!(
                check.max_gap <= 1e-12,
                "step {step}: gap {}",
                check.max_gap
            );
        }
        // identity operator: analytic equals the perturbation itself
        let check = transition_derivative_check(&m, &g1, &g1, &x, &h, 1e-2).unwrap();
        for i in 0..g1.len() {
            assert!((&check.analytic.w[i] - &h.w[i]).norm() <= 1e-12);
        }
        assert!(check.max_gap <= 1e-12);
    }

    #[test]
    fn derivative_check_converges_quadratically_on_the_sphere() {
        let m = sphere(2, 1.0);
        let g1 = equatorial_sphere_path(&m, 0.1, 1.0, 48);
        let g2 = equatorial_sphere_path(&m, -0.05, 0.95, 48);
        let x = smooth_field(&g1, &m, 0.25);
        let h = smooth_field(&g1, &m, 0.2);
        let coarse = transition_derivative_check(&m, &g1, &g2, &x, &h, 1e-2).unwrap();
        let fine = transition_derivative_check(&m, &g1, &g2, &x, &h, 1e-3).unwrap();
        assert!(coarse.max_gap > 0.0 && fine.max_gap > 0.0);
        let slope = (coarse.max_gap / fine.max_gap).log10();
        assert!(
            (slope - 2.0).abs() <= 0.2,
            "slope {slope} (gaps {} / {})",
            coarse.max_gap,
            fine.max_gap
        );
    }
}
