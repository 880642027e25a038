//! Christoffel symbols, their derivatives, and the Riemann curvature.
//!
//! Conventions:
//! - Γ^k_ij = ½ g^{km} (∂_i g_mj + ∂_j g_mi − ∂_m g_ij), symmetric in (i,j).
//! - R(e_i, e_j) e_l = R^k_{lij} e_k with
//!   R^k_{lij} = ∂_i Γ^k_{jl} − ∂_j Γ^k_{il} + Γ^k_{im} Γ^m_{jl} − Γ^k_{jm} Γ^m_{il}.
//!   With this sign, the unit sphere satisfies R(X,Y)Z = ⟨Y,Z⟩X − ⟨X,Z⟩Y
//!   in metric inner products and has sectional curvature +1.
//!
//! Builtins use the conformal closed form (exact); expression metrics use
//! the cached symbolic metric derivatives (exact). The `_fd` variants
//! recompute everything from metric values by central differences and
//! exist as an independent cross-check route.

use super::tensor::{Tensor3, Tensor4};
use super::{ChartId, Manifold, ManifoldError, MetricField};
use crate::manifold::builtin::conformal_gradient;
use nalgebra::{DMatrix, DVector};

impl Manifold {
    /// Christoffel symbols Γ^k_ij at a chart point, indexed `get(k, i, j)`.
    pub fn christoffel(&self, chart: ChartId, x: &DVector<f64>) -> Result<Tensor3, ManifoldError> {
        let c = self.chart(chart)?;
        let n = self.dim();
        match &c.metric {
            MetricField::Euclidean => Ok(Tensor3::zeros(n)),
            MetricField::SphereConformal { .. } | MetricField::HyperbolicConformal => {
                let (a, _) = conformal_gradient(&c.metric, x)
                    .expect("conformal metric has gradient data");
                if a.iter().any(|v| !v.is_finite()) {
                    return Err(ManifoldError::OutOfDomain {
                        chart: c.name.clone(),
                    });
                }
                Ok(conformal_christoffel(&a))
            }
            MetricField::Expression(em) => {
                let g = em.metric(x)?;
                let ginv = invert_metric(&g, &c.name)?;
                let dg = em.metric_gradient(x)?;
                Ok(christoffel_from_derivatives(&ginv, &dg))
            }
        }
    }

    /// First derivatives ∂_l Γ^k_ij, indexed `get(k, i, j, l)`.
    pub fn christoffel_deriv(
        &self,
        chart: ChartId,
        x: &DVector<f64>,
    ) -> Result<Tensor4, ManifoldError> {
        let c = self.chart(chart)?;
        let n = self.dim();
        match &c.metric {
            MetricField::Euclidean => Ok(Tensor4::zeros(n)),
            MetricField::SphereConformal { .. } | MetricField::HyperbolicConformal => {
                let (_, h) = conformal_gradient(&c.metric, x)
                    .expect("conformal metric has gradient data");
                Ok(conformal_christoffel_deriv(&h))
            }
            MetricField::Expression(em) => {
                let g = em.metric(x)?;
                let ginv = invert_metric(&g, &c.name)?;
                let dg = em.metric_gradient(x)?;
                let d2g = em.metric_hessian(x)?;
                Ok(christoffel_deriv_from_derivatives(&ginv, &dg, &d2g))
            }
        }
    }

    /// Riemann tensor components R^k_{lij}, indexed `get(k, l, i, j)`.
    pub fn curvature_components(
        &self,
        chart: ChartId,
        x: &DVector<f64>,
    ) -> Result<Tensor4, ManifoldError> {
        let gamma = self.christoffel(chart, x)?;
        let dgamma = self.christoffel_deriv(chart, x)?;
        Ok(curvature_from_christoffel(&gamma, &dgamma))
    }

    /// Curvature applied to vectors: R(X, Y)Z at a chart point.
    pub fn curvature_tensor(
        &self,
        chart: ChartId,
        x: &DVector<f64>,
        xx: &DVector<f64>,
        yy: &DVector<f64>,
        zz: &DVector<f64>,
    ) -> Result<DVector<f64>, ManifoldError> {
        let r = self.curvature_components(chart, x)?;
        let n = self.dim();
        let mut out = DVector::zeros(n);
        for k in 0..n {
            let mut acc = 0.0;
            for l in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        acc += r.get(k, l, i, j) * zz[l] * xx[i] * yy[j];
                    }
                }
            }
            out[k] = acc;
        }
        Ok(out)
    }

    /// Sectional curvature of the plane spanned by X, Y:
    /// ⟨R(X,Y)Y, X⟩ / (‖X‖²‖Y‖² − ⟨X,Y⟩²), all in the metric at x.
    pub fn sectional_curvature(
        &self,
        chart: ChartId,
        x: &DVector<f64>,
        xx: &DVector<f64>,
        yy: &DVector<f64>,
    ) -> Result<f64, ManifoldError> {
        let gxx = self.g_inner(chart, x, xx, xx)?;
        let gyy = self.g_inner(chart, x, yy, yy)?;
        let gxy = self.g_inner(chart, x, xx, yy)?;
        let gram = gxx * gyy - gxy * gxy;
        if gram <= 1e-12 {
            return Err(ManifoldError::DegeneratePlane(gram));
        }
        let rxyy = self.curvature_tensor(chart, x, xx, yy, yy)?;
        let num = self.g_inner(chart, x, &rxyy, xx)?;
        Ok(num / gram)
    }

    /// Finite-difference Christoffels from metric values only (step `h`);
    /// an independent route used to cross-check the exact computations.
    pub fn christoffel_fd(
        &self,
        chart: ChartId,
        x: &DVector<f64>,
        h: f64,
    ) -> Result<Tensor3, ManifoldError> {
        let c = self.chart(chart)?;
        let n = self.dim();
        let g = self.metric_unchecked(chart, x)?;
        let ginv = invert_metric(&g, &c.name)?;
        let mut dg = Vec::with_capacity(n);
        for k in 0..n {
            let mut xp = x.clone();
            xp[k] += h;
            let mut xm = x.clone();
            xm[k] -= h;
            let gp = self.metric_unchecked(chart, &xp)?;
            let gm = self.metric_unchecked(chart, &xm)?;
            dg.push((gp - gm) / (2.0 * h));
        }
        Ok(christoffel_from_derivatives(&ginv, &dg))
    }

    /// Finite-difference ∂_l Γ^k_ij by differencing `christoffel` (step `h`).
    pub fn christoffel_deriv_fd(
        &self,
        chart: ChartId,
        x: &DVector<f64>,
        h: f64,
    ) -> Result<Tensor4, ManifoldError> {
        let n = self.dim();
        let mut out = Tensor4::zeros(n);
        for l in 0..n {
            let mut xp = x.clone();
            xp[l] += h;
            let mut xm = x.clone();
            xm[l] -= h;
            let gp = self.christoffel(chart, &xp)?;
            let gm = self.christoffel(chart, &xm)?;
            for k in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        out.set(k, i, j, l, (gp.get(k, i, j) - gm.get(k, i, j)) / (2.0 * h));
                    }
                }
            }
        }
        Ok(out)
    }
}

fn invert_metric(g: &DMatrix<f64>, chart: &str) -> Result<DMatrix<f64>, ManifoldError> {
    g.clone()
        .try_inverse()
        .ok_or_else(|| ManifoldError::MetricNotSpd {
            chart: chart.to_string(),
            min_eig: 0.0,
        })
}

/// Conformal closed form: Γ^k_ij = δ_ki a_j + δ_kj a_i − δ_ij a_k.
fn conformal_christoffel(a: &DVector<f64>) -> Tensor3 {
    let n = a.len();
    let mut t = Tensor3::zeros(n);
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let mut v = 0.0;
                if k == i {
                    v += a[j];
                }
                if k == j {
                    v += a[i];
                }
                if i == j {
                    v -= a[k];
                }
                t.set(k, i, j, v);
            }
        }
    }
    t
}

/// ∂_l Γ^k_ij = δ_ki H_jl + δ_kj H_il − δ_ij H_kl for conformal metrics.
fn conformal_christoffel_deriv(h: &DMatrix<f64>) -> Tensor4 {
    let n = h.nrows();
    let mut t = Tensor4::zeros(n);
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    let mut v = 0.0;
                    if k == i {
                        v += h[(j, l)];
                    }
                    if k == j {
                        v += h[(i, l)];
                    }
                    if i == j {
                        v -= h[(k, l)];
                    }
                    t.set(k, i, j, l, v);
                }
            }
        }
    }
    t
}

/// Γ^k_ij = ½ g^{km} (∂_i g_mj + ∂_j g_mi − ∂_m g_ij).
fn christoffel_from_derivatives(ginv: &DMatrix<f64>, dg: &[DMatrix<f64>]) -> Tensor3 {
    let n = ginv.nrows();
    let mut t = Tensor3::zeros(n);
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for m in 0..n {
                    acc += ginv[(k, m)] * (dg[i][(m, j)] + dg[j][(m, i)] - dg[m][(i, j)]);
                }
                t.set(k, i, j, 0.5 * acc);
            }
        }
    }
    t
}

/// Exact ∂_l Γ from metric first and second derivatives, using
/// ∂_l g^{km} = −g^{ka} (∂_l g_ab) g^{bm}.
fn christoffel_deriv_from_derivatives(
    ginv: &DMatrix<f64>,
    dg: &[DMatrix<f64>],
    d2g: &[Vec<DMatrix<f64>>],
) -> Tensor4 {
    let n = ginv.nrows();
    let mut out = Tensor4::zeros(n);
    for l in 0..n {
        let dginv = -(ginv * &dg[l] * ginv);
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut acc = 0.0;
                    for m in 0..n {
                        acc += dginv[(k, m)] * (dg[i][(m, j)] + dg[j][(m, i)] - dg[m][(i, j)]);
                        acc += ginv[(k, m)]
                            * (d2g[l][i][(m, j)] + d2g[l][j][(m, i)] - d2g[l][m][(i, j)]);
                    }
                    out.set(k, i, j, l, 0.5 * acc);
                }
            }
        }
    }
    out
}

/// R^k_{lij} = ∂_i Γ^k_{jl} − ∂_j Γ^k_{il} + Γ^k_{im} Γ^m_{jl} − Γ^k_{jm} Γ^m_{il}.
fn curvature_from_christoffel(gamma: &Tensor3, dgamma: &Tensor4) -> Tensor4 {
    let n = gamma.dim();
    let mut r = Tensor4::zeros(n);
    for k in 0..n {
        for l in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut v = dgamma.get(k, j, l, i) - dgamma.get(k, i, l, j);
                    for m in 0..n {
                        v += gamma.get(k, i, m) * gamma.get(m, j, l)
                            - gamma.get(k, j, m) * gamma.get(m, i, l);
                    }
                    r.set(k, l, i, j, v);
                }
            }
        }
    }
    r
}
