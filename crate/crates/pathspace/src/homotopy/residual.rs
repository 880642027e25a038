//! Certification that a homotopy is a pointwise geodesic family.
//!
//! A homotopy is a path-space geodesic exactly when every transverse
//! path satisfies the geodesic equation, so the certificate is the grid
//! supremum of |∂²_sΓᵏ + Γᵏ_ab ∂_sΓᵃ ∂_sΓᵇ|. The second s-derivative is
//! formed by fourth-order differences of chart representatives, with
//! neighbor rows re-expressed in the evaluation row's chart first.

use super::{HomotopyError, PathHomotopy};
use crate::defaults;
use crate::manifold::Manifold;
use crate::stencil;
use nalgebra::DVector;

/// Residual norms on the (s, t) grid, `values[j][i]` at (s_j, t_i).
#[derive(Debug, Clone)]
pub struct ResidualField {
    pub values: Vec<Vec<f64>>,
    pub sup: f64,
}

impl ResidualField {
    /// The homotopy passes geodesic certification.
    pub fn certified(&self) -> bool {
        self.sup <= defaults::RESIDUAL_CERTIFY_TOL
    }

    /// Per-t residual suprema (maximum over s rows).
    pub fn per_t(&self) -> Vec<f64> {
        let cols = self.values[0].len();
        (0..cols)
            .map(|i| self.values.iter().map(|row| row[i]).fold(0.0f64, f64::max))
            .collect()
    }
}

/// Evaluate the geodesic-equation residual over the grid of `hom`.
pub fn geodesic_residual(
    m: &Manifold,
    hom: &PathHomotopy,
) -> Result<ResidualField, HomotopyError> {
    let rows = hom.rows();
    if rows < 5 {
        return Err(HomotopyError::GridTooCoarse { got: rows, need: 5 });
    }
    let cols = hom.cols();
    let hs = hom.s_step();
    let mut values = vec![vec![0.0f64; cols]; rows];
    let mut sup = 0.0f64;
    for j in 0..rows {
        let (offs, coeffs) = stencil::d2_stencil(j, rows);
        for i in 0..cols {
            let target = hom.chart[j][i];
            let mut acc = DVector::zeros(m.dim());
            for (&o, &c) in offs.iter().zip(coeffs) {
                if c == 0.0 {
                    continue;
                }
                let k = (j as isize + o) as usize;
                let xk = if hom.chart[k][i] == target {
                    hom.x[k][i].clone()
                } else {
                    m.chart_transition(hom.chart[k][i], target, &hom.x[k][i])?
                        .image
                };
                acc += xk * c;
            }
            let d2 = acc / (hs * hs);
            let gamma = m.christoffel(target, &hom.x[j][i])?;
            let res = (d2 + gamma.contract2(&hom.v_s[j][i], &hom.v_s[j][i])).norm();
            values[j][i] = res;
            sup = sup.max(res);
        }
    }
    Ok(ResidualField { values, sup })
}
