//! The induced connection on path space, realized along homotopies.
//!
//! For a field V(s, t) along a homotopy Γ, the covariant s-derivative is
//! (∇̃_s V)ᵏ = ∂_sVᵏ + Γᵏ_ij ∂_sΓⁱ Vʲ, computed pointwise in t: the
//! derivative part of the connection acts as the plain s-derivative of
//! chart components, and the connector is the base manifold's Christoffel
//! contraction. Curvature of the induced connection is likewise pointwise,
//! which is what the commutator identity below verifies.

use super::{HomotopyError, PathHomotopy};
use crate::manifold::Manifold;
use crate::path::{field_derivatives, DiscretePath, PathError, PathTangent};
use crate::stencil;
use nalgebra::DVector;

/// Covariant s-derivative of a field along a homotopy, evaluated on the
/// row s_index. The field is given as one [`PathTangent`] per s row, in
/// the homotopy's charts row for row.
pub fn induced_covariant_derivative(
    m: &Manifold,
    hom: &PathHomotopy,
    field: &[PathTangent],
    s_index: usize,
) -> Result<PathTangent, HomotopyError> {
    let rows = hom.rows();
    let cols = hom.cols();
    if field.len() != rows {
        return Err(HomotopyError::GridMismatch(format!(
            "field has {} rows, homotopy has {rows}",
            field.len()
        )));
    }
    if s_index >= rows {
        return Err(HomotopyError::GridMismatch(format!(
            "s index {s_index} out of range for {rows} rows"
        )));
    }
    if rows < 5 {
        return Err(HomotopyError::GridTooCoarse { got: rows, need: 5 });
    }
    for (j, row) in field.iter().enumerate() {
        if row.t != hom.t {
            return Err(HomotopyError::GridMismatch(format!(
                "field row {j} is on a different t-grid"
            )));
        }
        for i in 0..cols {
            if row.chart[i] != hom.chart[j][i] {
                return Err(HomotopyError::ChartMismatch {
                    s_index: j,
                    t_index: i,
                });
            }
        }
    }
    let j = s_index;
    let hs = hom.s_step();
    let (offs, coeffs) = stencil::d1_stencil(j, rows);
    let mut w = Vec::with_capacity(cols);
    for i in 0..cols {
        let target = hom.chart[j][i];
        // ∂_sV in the evaluation chart: neighbor samples are vector
        // components at their own points, pushed chartwise before
        // differencing
        let mut acc = DVector::zeros(m.dim());
        for (&o, &c) in offs.iter().zip(coeffs) {
            if c == 0.0 {
                continue;
            }
            let k = (j as isize + o) as usize;
            let wk = if hom.chart[k][i] == target {
                field[k].w[i].clone()
            } else {
                m.chart_transition(hom.chart[k][i], target, &hom.x[k][i])?
                    .push_vector(&field[k].w[i])
            };
            acc += wk * c;
        }
        let ds = acc / hs;
        let gamma = m.christoffel(target, &hom.x[j][i])?;
        w.push(ds + gamma.contract2(&hom.v_s[j][i], &field[j].w[i]));
    }
    let row_path = hom.row_path(m, j)?;
    let dw = field_derivatives(m, &row_path, &w)?;
    Ok(PathTangent {
        t: hom.t.clone(),
        chart: hom.chart[j].clone(),
        w,
        dw,
    })
}

/// Covariant derivative of a field along its own path direction:
/// (∇_{γ′}V)ᵏ = V′ᵏ + Γᵏ_ij γ′ⁱ Vʲ. The t-derivative samples stored in
/// the field are exactly ∂_tV, so no further differencing happens here.
pub fn covariant_derivative_along(
    m: &Manifold,
    path: &DiscretePath,
    v: &PathTangent,
) -> Result<PathTangent, PathError> {
    v.check_along(path)?;
    let mut w = Vec::with_capacity(path.len());
    for i in 0..path.len() {
        let gamma = m.christoffel(path.chart[i], &path.x[i])?;
        w.push(&v.dw[i] + gamma.contract2(&path.dx[i], &v.w[i]));
    }
    let dw = field_derivatives(m, path, &w)?;
    Ok(PathTangent {
        t: path.t.clone(),
        chart: path.chart.clone(),
        w,
        dw,
    })
}

/// Pointwise curvature operator along a path: (R(X, Y)Z)(t_i) evaluated
/// at γ(t_i) from the stored field samples.
pub fn induced_curvature(
    m: &Manifold,
    path: &DiscretePath,
    x: &PathTangent,
    y: &PathTangent,
    z: &PathTangent,
) -> Result<PathTangent, PathError> {
    x.check_along(path)?;
    y.check_along(path)?;
    z.check_along(path)?;
    let mut w = Vec::with_capacity(path.len());
    for i in 0..path.len() {
        w.push(m.curvature_tensor(path.chart[i], &path.x[i], &x.w[i], &y.w[i], &z.w[i])?);
    }
    let dw = field_derivatives(m, path, &w)?;
    Ok(PathTangent {
        t: path.t.clone(),
        chart: path.chart.clone(),
        w,
        dw,
    })
}
