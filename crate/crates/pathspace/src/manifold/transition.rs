//! Chart transition maps with first and second derivatives.
//!
//! A transition λ carries a tangent field along a path from one chart to
//! another: values transform by dλ and derivatives pick up the curvature
//! of the coordinate change through d²λ. Both derivatives are exact —
//! closed form for the sphere inversion, symbolic for expression maps.

use super::tensor::Tensor3;
use super::ChartId;
use crate::expr::MetricExpr;
use crate::manifold::ManifoldError;
use nalgebra::{DMatrix, DVector};

/// The map itself.
#[derive(Debug, Clone)]
pub enum TransMap {
    /// λ(x) = r²·x/|x|², the stereographic hemisphere swap; an involution.
    SphereInversion { radius: f64 },
    /// Component expressions with cached symbolic Jacobian and Hessian.
    Exprs {
        comps: Vec<MetricExpr>,
        jac: Vec<Vec<MetricExpr>>,
        hess: Vec<Vec<Vec<MetricExpr>>>,
    },
}

impl TransMap {
    /// Build an expression transition, differentiating the components
    /// symbolically. `n` is the manifold dimension.
    pub fn from_exprs(comps: Vec<MetricExpr>, n: usize) -> TransMap {
        let jac: Vec<Vec<MetricExpr>> = comps
            .iter()
            .map(|c| (0..n).map(|j| c.diff(j)).collect())
            .collect();
        let hess: Vec<Vec<Vec<MetricExpr>>> = jac
            .iter()
            .map(|row| {
                row.iter()
                    .map(|d| (0..n).map(|k| d.diff(k)).collect())
                    .collect()
            })
            .collect();
        TransMap::Exprs { comps, jac, hess }
    }
}

/// A directed transition between two charts of one manifold.
#[derive(Debug, Clone)]
pub struct Transition {
    pub from: ChartId,
    pub to: ChartId,
    pub map: TransMap,
}

/// Transition data at a point: image λ(x), Jacobian dλ (n×n), Hessian
/// d²λ indexed as `get(i, j, k)` = ∂_j ∂_k λ^i.
#[derive(Debug, Clone)]
pub struct TransitionEval {
    pub image: DVector<f64>,
    pub dlambda: DMatrix<f64>,
    pub d2lambda: Tensor3,
}

impl TransitionEval {
    pub fn identity(x: DVector<f64>) -> TransitionEval {
        let n = x.len();
        TransitionEval {
            image: x,
            dlambda: DMatrix::identity(n, n),
            d2lambda: Tensor3::zeros(n),
        }
    }

    /// Push tangent components forward: v = dλ·u.
    pub fn push_vector(&self, u: &DVector<f64>) -> DVector<f64> {
        &self.dlambda * u
    }

    /// Push a field derivative forward along a path with chart velocity
    /// `xdot`: v′ = dλ·u′ + d²λ(γ̇, u).
    pub fn push_derivative(
        &self,
        xdot: &DVector<f64>,
        u: &DVector<f64>,
        udot: &DVector<f64>,
    ) -> DVector<f64> {
        &self.dlambda * udot + self.d2lambda.contract2(xdot, u)
    }
}

impl Transition {
    pub fn eval(&self, x: &DVector<f64>) -> Result<TransitionEval, ManifoldError> {
        match &self.map {
            TransMap::SphereInversion { radius } => {
                let n = x.len();
                let r2 = radius * radius;
                let rho2 = x.norm_squared();
                if rho2 == 0.0 {
                    // the opposite pole is not in the image chart
                    return Err(ManifoldError::NotInOverlap {
                        from: format!("chart {}", self.from.0),
                        to: format!("chart {}", self.to.0),
                    });
                }
                let image = x * (r2 / rho2);
                let mut dl = DMatrix::zeros(n, n);
                for i in 0..n {
                    for j in 0..n {
                        let delta = if i == j { 1.0 } else { 0.0 };
                        dl[(i, j)] = r2 * (delta / rho2 - 2.0 * x[i] * x[j] / (rho2 * rho2));
                    }
                }
                let mut d2 = Tensor3::zeros(n);
                let r4 = rho2 * rho2;
                let r6 = r4 * rho2;
                for i in 0..n {
                    for j in 0..n {
                        for k in 0..n {
                            let dij = if i == j { 1.0 } else { 0.0 };
                            let dik = if i == k { 1.0 } else { 0.0 };
                            let djk = if j == k { 1.0 } else { 0.0 };
                            let val = r2
                                * (-2.0 * (dij * x[k] + dik * x[j] + djk * x[i]) / r4
                                    + 8.0 * x[i] * x[j] * x[k] / r6);
                            d2.set(i, j, k, val);
                        }
                    }
                }
                Ok(TransitionEval {
                    image,
                    dlambda: dl,
                    d2lambda: d2,
                })
            }
            TransMap::Exprs { comps, jac, hess } => {
                let n = x.len();
                let pt: Vec<f64> = x.iter().copied().collect();
                let mut image = DVector::zeros(comps.len());
                for (i, c) in comps.iter().enumerate() {
                    image[i] = c.eval(&pt)?;
                }
                let mut dl = DMatrix::zeros(n, n);
                for i in 0..n {
                    for j in 0..n {
                        dl[(i, j)] = jac[i][j].eval(&pt)?;
                    }
                }
                let mut d2 = Tensor3::zeros(n);
                for i in 0..n {
                    for j in 0..n {
                        for k in 0..n {
                            d2.set(i, j, k, hess[i][j][k].eval(&pt)?);
                        }
                    }
                }
                Ok(TransitionEval {
                    image,
                    dlambda: dl,
                    d2lambda: d2,
                })
            }
        }
    }
}
