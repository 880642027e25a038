//! Expression-defined metrics with symbolic derivative caches.
//!
//! Construction differentiates every metric entry twice symbolically, so
//! Christoffel symbols and their first derivatives (hence curvature) are
//! exact up to floating point at any chart point — no finite-difference
//! truncation enters the connection of a user-defined manifold.

use crate::expr::MetricExpr;
use crate::manifold::ManifoldError;
use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone)]
pub struct ExprMetric {
    n: usize,
    /// g[i][j]
    g: Vec<Vec<MetricExpr>>,
    /// dg[k][i][j] = ∂_k g_ij
    dg: Vec<Vec<Vec<MetricExpr>>>,
    /// d2g[l][k][i][j] = ∂_l ∂_k g_ij
    d2g: Vec<Vec<Vec<Vec<MetricExpr>>>>,
}

impl ExprMetric {
    /// `entries` is a row-major n×n matrix of expressions. Symmetry is the
    /// caller's responsibility and is validated by sampling.
    pub fn new(entries: Vec<Vec<MetricExpr>>) -> Result<ExprMetric, ManifoldError> {
        let n = entries.len();
        if n == 0 || entries.iter().any(|row| row.len() != n) {
            return Err(ManifoldError::InvalidSpec(
                "metric entry matrix must be square and non-empty".to_string(),
            ));
        }
        for row in &entries {
            for e in row {
                if e.max_var() > n {
                    return Err(ManifoldError::InvalidSpec(format!(
                        "metric entry uses x{} but the chart has dimension {n}",
                        e.max_var()
                    )));
                }
            }
        }
        let dg: Vec<Vec<Vec<MetricExpr>>> = (0..n)
            .map(|k| {
                entries
                    .iter()
                    .map(|row| row.iter().map(|e| e.diff(k)).collect())
                    .collect()
            })
            .collect();
        let d2g: Vec<Vec<Vec<Vec<MetricExpr>>>> = (0..n)
            .map(|l| {
                (0..n)
                    .map(|k| {
                        dg[k]
                            .iter()
                            .map(|row: &Vec<MetricExpr>| row.iter().map(|e| e.diff(l)).collect())
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Ok(ExprMetric {
            n,
            g: entries,
            dg,
            d2g,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &Vec<Vec<MetricExpr>> {
        &self.g
    }

    pub fn metric(&self, x: &DVector<f64>) -> Result<DMatrix<f64>, ManifoldError> {
        let pt: Vec<f64> = x.iter().copied().collect();
        let n = self.n;
        let mut g = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                g[(i, j)] = self.g[i][j].eval(&pt)?;
            }
        }
        Ok(g)
    }

    /// ∂_k g at x, one matrix per k.
    pub fn metric_gradient(&self, x: &DVector<f64>) -> Result<Vec<DMatrix<f64>>, ManifoldError> {
        let pt: Vec<f64> = x.iter().copied().collect();
        let n = self.n;
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            let mut m = DMatrix::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    m[(i, j)] = self.dg[k][i][j].eval(&pt)?;
                }
            }
            out.push(m);
        }
        Ok(out)
    }

    /// ∂_l ∂_k g at x, indexed [l][k].
    pub fn metric_hessian(&self, x: &DVector<f64>) -> Result<Vec<Vec<DMatrix<f64>>>, ManifoldError> {
        let pt: Vec<f64> = x.iter().copied().collect();
        let n = self.n;
        let mut out = Vec::with_capacity(n);
        for l in 0..n {
            let mut row = Vec::with_capacity(n);
            for k in 0..n {
                let mut m = DMatrix::zeros(n, n);
                for i in 0..n {
                    for j in 0..n {
                        m[(i, j)] = self.d2g[l][k][i][j].eval(&pt)?;
                    }
                }
                row.push(m);
            }
            out.push(row);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;
    use approx::assert_relative_eq;

    fn half_plane() -> ExprMetric {
        // upper half-plane: g = diag(1/x2², 1/x2²)
        let e = |s: &str| parse_expr(s).unwrap();
        ExprMetric::new(vec![
            vec![e("1/x2^2"), e("0")],
            vec![e("0"), e("1/x2^2")],
        ])
        .unwrap()
    }

    #[test]
    fn metric_and_gradient_values() {
        let m = half_plane();
        let x = DVector::from_vec(vec![0.0, 2.0]);
        let g = m.metric(&x).unwrap();
        assert_relative_eq!(g[(0, 0)], 0.25, epsilon = 1e-15);
        let dg = m.metric_gradient(&x).unwrap();
        // ∂_2 (1/x2²) = −2/x2³ = −0.25 at x2 = 2
        assert_relative_eq!(dg[1][(0, 0)], -0.25, epsilon = 1e-15);
        assert_eq!(dg[0][(0, 0)], 0.0);
    }

    #[test]
    fn hessian_matches_finite_differences_of_gradient() {
        let m = half_plane();
        let x = DVector::from_vec(vec![0.3, 1.5]);
        let hess = m.metric_hessian(&x).unwrap();
        let h = 1e-5;
        for l in 0..2 {
            let mut xp = x.clone();
            xp[l] += h;
            let mut xm = x.clone();
            xm[l] -= h;
            let gp = m.metric_gradient(&xp).unwrap();
            let gm = m.metric_gradient(&xm).unwrap();
            for k in 0..2 {
                let fd = (&gp[k] - &gm[k]) / (2.0 * h);
                for i in 0..2 {
                    for j in 0..2 {
                        assert_relative_eq!(
                            hess[l][k][(i, j)],
                            fd[(i, j)],
                            epsilon = 1e-6,
                            max_relative = 1e-6
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn rejects_non_square_and_overdimensioned_entries() {
        let e = |s: &str| parse_expr(s).unwrap();
        assert!(ExprMetric::new(vec![vec![e("1")], vec![e("0")]]).is_err());
        assert!(ExprMetric::new(vec![
            vec![e("x3"), e("0")],
            vec![e("0"), e("1")],
        ])
        .is_err());
    }
}
