//! Numerical completeness evidence: drive every transverse geodesic to a
//! target parameter and report how far each one got.
//!
//! On a complete manifold every ray reaches the target; on an incomplete
//! one the integrator detects the domain exit and bisects the exit
//! parameter, so per-t failure data localizes the incompleteness. Failure
//! here is data, not an error: the report carries it.

use super::{integrate_ray, transpose_rays, HomotopyError, HomotopyOptions, PathHomotopy};
use crate::defaults;
use crate::manifold::{Manifold, TangentVector};
use crate::par;
use crate::path::{DiscretePath, PathTangent};

/// Outcome of a completeness probe.
#[derive(Debug, Clone)]
pub struct CompletenessReport {
    pub s_target: f64,
    /// Per-t maximal parameter reached: `s_target` on success, the
    /// bisected exit parameter on a domain exit, NaN when a ray failed
    /// for a reason with no meaningful partial progress.
    pub reached: Vec<f64>,
    /// All rays reached the target.
    pub complete: bool,
    /// Per-failure descriptions, in t order.
    pub failures: Vec<String>,
    /// The assembled homotopy when the probe completed.
    pub homotopy: Option<PathHomotopy>,
}

/// Attempt the initial-value homotopy out to s = `s_target`.
pub fn completeness_probe(
    m: &Manifold,
    gamma: &DiscretePath,
    v: &PathTangent,
    s_target: f64,
) -> Result<CompletenessReport, HomotopyError> {
    completeness_probe_with(m, gamma, v, s_target, &HomotopyOptions::default())
}

pub fn completeness_probe_with(
    m: &Manifold,
    gamma: &DiscretePath,
    v: &PathTangent,
    s_target: f64,
    opts: &HomotopyOptions,
) -> Result<CompletenessReport, HomotopyError> {
    v.check_along(gamma)?;
    if !(s_target > 0.0) {
        return Err(HomotopyError::GridMismatch(format!(
            "probe target must be positive, got {s_target}"
        )));
    }
    // row density scales with the target so that a successful probe is
    // residual-certifiable at the same per-unit resolution as a default
    // homotopy
    let rows = (s_target * defaults::HOMOTOPY_STEPS_PER_UNIT_S as f64).ceil() as usize;
    let cols = gamma.len();
    let rays = par::map_indexed(opts.par, cols, |i| {
        let start = TangentVector::new(gamma.chart[i], gamma.x[i].clone(), v.w[i].clone());
        integrate_ray(m, &start, s_target, rows, opts, i)
    });
    let mut reached = Vec::with_capacity(cols);
    let mut failures = Vec::new();
    let mut completed = Vec::with_capacity(cols);
    for ray in rays {
        match ray {
            Ok(r) => {
                reached.push(s_target);
                completed.push(r);
            }
            Err(HomotopyError::RayFailure {
                t_index,
                s_reached,
                message,
            }) => {
                reached.push(s_reached);
                failures.push(format!("t index {t_index}: {message}"));
            }
            Err(other) => return Err(other),
        }
    }
    let complete = failures.is_empty();
    let homotopy = complete
        .then(|| transpose_rays(completed, gamma.t.clone(), s_target, rows));
    Ok(CompletenessReport {
        s_target,
        reached,
        complete,
        failures,
        homotopy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::builtin::{euclidean, hyperbolic};
    use crate::manifold::ChartId;
    use crate::oracle;
    use crate::path::resample_path;
    use nalgebra::DVector;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn flat_path(m: &Manifold, scale: f64, n: usize) -> DiscretePath {
        let samples: Vec<(f64, DVector<f64>)> = (0..9)
            .map(|i| {
                let t = i as f64 / 8.0;
                (
                    t,
                    DVector::from_vec(vec![
                        scale * (0.5 * t - 0.25),
                        scale * 0.2 * (2.0 * t).sin(),
                    ]),
                )
            })
            .collect();
        resample_path(m, ChartId(0), &samples, n).unwrap()
    }

    #[test]
    fn euclidean_rays_reach_any_target() {
        let m = euclidean(2);
        let path = flat_path(&m, 1.0, 20);
        let w: Vec<DVector<f64>> = path
            .t
            .iter()
            .map(|&t| DVector::from_vec(vec![(1.0 + t).cos(), 0.5 * t - 0.2]))
            .collect();
        let v = PathTangent::from_components(&m, &path, w).unwrap();
        let report = completeness_probe(&m, &path, &v, 100.0).unwrap();
        assert!(report.complete);
        assert!(report.failures.is_empty());
        assert!(report.reached.iter().all(|&s| s == 100.0));
        let hom = report.homotopy.expect("complete probe carries the homotopy");
        assert_eq!(hom.rows(), 6401);
        // affine rays: endpoint = start + S·V exactly up to integrator noise
        let last = hom.rows() - 1;
        for i in 0..hom.cols() {
            let expect = &path.x[i] + &v.w[i] * 100.0;
            assert!((&hom.x[last][i] - expect).norm() <= 1e-8);
        }
    }

    #[test]
    fn hyperbolic_rays_reach_deep_targets() {
        let m = hyperbolic(2);
        let path = flat_path(&m, 0.5, 16);
        let mut rng = ChaCha8Rng::seed_from_u64(97);
        let w: Vec<DVector<f64>> = path
            .x
            .iter()
            .map(|x| {
                // euclidean components scaled to metric speed ~1 at x
                let dir = DVector::from_vec(vec![
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                ]);
                let speed = m.g_norm(ChartId(0), x, &dir).unwrap();
                dir / speed
            })
            .collect();
        let v = PathTangent::from_components(&m, &path, w).unwrap();
        let report = completeness_probe(&m, &path, &v, 20.0).unwrap();
        assert!(report.complete, "failures: {:?}", report.failures);
        assert!(report.reached.iter().all(|&s| s == 20.0));
        let hom = report.homotopy.unwrap();
        // deep rays stay inside the unit ball chart
        let last = hom.rows() - 1;
        for i in 0..hom.cols() {
            assert!(hom.x[last][i].norm() < 1.0);
        }
    }

    #[test]
    fn open_disk_exits_match_the_straight_line_formula() {
        let m = crate::io::open_disk();
        let samples: Vec<(f64, DVector<f64>)> = (0..9)
            .map(|i| {
                let t = i as f64 / 8.0;
                (
                    t,
                    DVector::from_vec(vec![0.3 * (t - 0.5), 0.1 * (3.0 * t).sin()]),
                )
            })
            .collect();
        let path = resample_path(&m, ChartId(0), &samples, 16).unwrap();
        let w: Vec<DVector<f64>> = path
            .t
            .iter()
            .map(|&t| {
                let phi = 0.7 * t;
                DVector::from_vec(vec![phi.cos(), phi.sin()])
            })
            .collect();
        let v = PathTangent::from_components(&m, &path, w).unwrap();
        let report = completeness_probe(&m, &path, &v, 3.0).unwrap();
        assert!(!report.complete);
        assert!(report.homotopy.is_none());
        assert_eq!(report.failures.len(), path.len());
        for i in 0..path.len() {
            let expect = oracle::ball_exit_time(&path.x[i], &v.w[i], 1.0);
            assert!(
                (report.reached[i] - expect).abs() <= 1e-6,
                "t index {i}: reached {} vs exit {expect}",
                report.reached[i]
            );
        }
    }

    #[test]
    fn inward_rays_on_the_disk_survive_until_they_cross() {
        // rays pointing inward exit on the far side: s* > 1 for a start
        // near the rim aimed at the center
        let m = crate::io::open_disk();
        let samples: Vec<(f64, DVector<f64>)> = (0..9)
            .map(|i| {
                let t = i as f64 / 8.0;
                (t, DVector::from_vec(vec![0.8, 0.05 * t]))
            })
            .collect();
        let path = resample_path(&m, ChartId(0), &samples, 16).unwrap();
        let w: Vec<DVector<f64>> = (0..path.len())
            .map(|_| DVector::from_vec(vec![-1.0, 0.0]))
            .collect();
        let v = PathTangent::from_components(&m, &path, w).unwrap();
        let report = completeness_probe(&m, &path, &v, 3.0).unwrap();
        assert!(!report.complete);
        for i in 0..path.len() {
            let expect = oracle::ball_exit_time(&path.x[i], &v.w[i], 1.0);
            assert!(expect > 1.5, "fixture should exit on the far side");
            assert!((report.reached[i] - expect).abs() <= 1e-6);
        }
    }

    #[test]
    fn nonpositive_targets_are_rejected() {
        let m = euclidean(2);
        let path = flat_path(&m, 1.0, 16);
        let v = PathTangent::zeros_along(&path);
        assert!(completeness_probe(&m, &path, &v, 0.0).is_err());
    }
}
