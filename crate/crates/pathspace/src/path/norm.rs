//! The C¹ norm on fields along a path, chart covers, and the
//! two-chart equivalence bound.
//!
//! The norm of a field X along γ is the sup over grid samples of
//! max(|X(t_i)|, |X′(t_i)|), with |·| the euclidean norm of the chart
//! representative. When the path needs several charts, the norm is
//! computed per cover interval and the interval norms are summed;
//! samples in an overlap count toward both intervals. The sum
//! over-counts slightly but lands in the same equivalence class, which
//! is the only structure the norm is asked to carry.

use super::{DiscretePath, PathError, PathTangent};
use crate::defaults;
use crate::manifold::{ChartId, Domain, Manifold};
use nalgebra::{DMatrix, DVector};

/// One closed parameter interval of a cover, assigned to a chart.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverInterval {
    pub a: f64,
    pub b: f64,
    pub chart: ChartId,
}

/// An ordered list of closed intervals covering [0,1], each mapped into
/// a single chart.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartCover {
    pub intervals: Vec<CoverInterval>,
}

/// Domain membership with a safety factor: the domain shrunk toward its
/// center (balls and boxes) by `safety`.
fn scaled_contains(dom: &Domain, x: &DVector<f64>, safety: f64) -> bool {
    match dom {
        Domain::All => true,
        Domain::Box { lo, hi } => {
            let center = (lo + hi) / 2.0;
            let half = (hi - lo) * (safety / 2.0);
            x.iter()
                .enumerate()
                .all(|(i, &xi)| (xi - center[i]).abs() < half[i])
        }
        Domain::Ball { center, radius } => (x - center).norm() < safety * radius,
    }
}

/// Whether grid sample `i` of the path can be represented in `chart`
/// inside the safety-scaled domain.
fn sample_safe(m: &Manifold, path: &DiscretePath, i: usize, chart: ChartId, safety: f64) -> bool {
    let x = if path.chart[i] == chart {
        path.x[i].clone()
    } else {
        match m.chart_transition(path.chart[i], chart, &path.x[i]) {
            Ok(eval) => eval.image,
            Err(_) => return false,
        }
    };
    scaled_contains(&m.charts()[chart.0].domain, &x, safety)
}

impl ChartCover {
    /// The whole of [0,1] in one chart.
    pub fn single(chart: ChartId) -> ChartCover {
        ChartCover {
            intervals: vec![CoverInterval {
                a: 0.0,
                b: 1.0,
                chart,
            }],
        }
    }

    /// Greedy sweep: extend the current interval while samples stay
    /// within the safety-scaled chart domain; hand over to the best
    /// available chart with at least a 5%-of-[0,1] overlap.
    pub fn build(m: &Manifold, path: &DiscretePath) -> Result<ChartCover, PathError> {
        let n = path.len();
        let last = n - 1;
        let safety = defaults::COVER_SAFETY;
        let overlap = ((defaults::COVER_MIN_OVERLAP * last as f64).ceil() as usize).max(1);

        // best chart at a sample: prefer the stored chart, then max margin
        let choose = |i: usize, exclude: Option<ChartId>| -> Option<ChartId> {
            let stored = path.chart[i];
            if Some(stored) != exclude && sample_safe(m, path, i, stored, safety) {
                return Some(stored);
            }
            let mut best: Option<(f64, ChartId)> = None;
            for c in 0..m.charts().len() {
                let cid = ChartId(c);
                if Some(cid) == exclude || !sample_safe(m, path, i, cid, safety) {
                    continue;
                }
                let x = if path.chart[i] == cid {
                    path.x[i].clone()
                } else {
                    m.chart_transition(path.chart[i], cid, &path.x[i]).ok()?.image
                };
                let margin = m.charts()[c].domain.margin(&x);
                if best.map_or(true, |(bm, _)| margin > bm) {
                    best = Some((margin, cid));
                }
            }
            best.map(|(_, c)| c)
        };

        let mut intervals = Vec::new();
        let mut start = 0usize;
        let mut chart = choose(0, None).ok_or_else(|| {
            PathError::CoverInvalid("sample 0 is not safely inside any chart".to_string())
        })?;
        loop {
            let mut end = start;
            while end < last && sample_safe(m, path, end + 1, chart, safety) {
                end += 1;
            }
            if end == last {
                intervals.push(CoverInterval {
                    a: path.t[start],
                    b: 1.0,
                    chart,
                });
                break;
            }
            let next = choose(end + 1, Some(chart)).ok_or_else(|| {
                PathError::CoverInvalid(format!(
                    "sample {} is not safely inside any chart other than {:?}",
                    end + 1,
                    chart
                ))
            })?;
            if end < overlap {
                return Err(PathError::CoverInvalid(format!(
                    "chart {:?} covers too little of the path to leave a {overlap}-sample overlap",
                    chart
                )));
            }
            let new_start = end - overlap;
            for i in new_start..=end {
                if !sample_safe(m, path, i, next, safety) {
                    return Err(PathError::CoverInvalid(format!(
                        "overlap sample {i} is not safely inside chart {:?}",
                        next
                    )));
                }
            }
            if new_start <= start && !intervals.is_empty() {
                return Err(PathError::CoverInvalid(
                    "cover construction makes no forward progress".to_string(),
                ));
            }
            intervals.push(CoverInterval {
                a: path.t[start],
                b: path.t[end],
                chart,
            });
            start = new_start;
            chart = next;
        }
        let cover = ChartCover { intervals };
        cover.validate(m, path)?;
        Ok(cover)
    }

    /// Grid indices of the path falling in interval `k` (closed, with a
    /// touch of slack for float grid values).
    pub fn indices(&self, k: usize, path: &DiscretePath) -> Vec<usize> {
        let iv = &self.intervals[k];
        path.t
            .iter()
            .enumerate()
            .filter(|(_, &t)| t >= iv.a - 1e-12 && t <= iv.b + 1e-12)
            .map(|(i, _)| i)
            .collect()
    }

    /// Check the cover invariants against a path: the intervals are
    /// ordered, jointly cover [0,1], and every grid sample of each
    /// interval is representable inside its chart's domain.
    pub fn validate(&self, m: &Manifold, path: &DiscretePath) -> Result<(), PathError> {
        if self.intervals.is_empty() {
            return Err(PathError::CoverInvalid("no intervals".to_string()));
        }
        if self.intervals[0].a > 1e-12 {
            return Err(PathError::CoverInvalid(
                "first interval does not start at 0".to_string(),
            ));
        }
        if self.intervals[self.intervals.len() - 1].b < 1.0 - 1e-12 {
            return Err(PathError::CoverInvalid(
                "last interval does not reach 1".to_string(),
            ));
        }
        for (k, iv) in self.intervals.iter().enumerate() {
            if !(iv.a < iv.b) {
                return Err(PathError::CoverInvalid(format!(
                    "interval {k} is empty ({} .. {})",
                    iv.a, iv.b
                )));
            }
            if k > 0 {
                let prev = &self.intervals[k - 1];
                if iv.a < prev.a || iv.a > prev.b + 1e-12 {
                    return Err(PathError::CoverInvalid(format!(
                        "interval {k} leaves a gap or is out of order"
                    )));
                }
            }
            let idx = self.indices(k, path);
            if idx.is_empty() {
                return Err(PathError::CoverInvalid(format!(
                    "interval {k} contains no grid samples"
                )));
            }
            for i in idx {
                let inside = if path.chart[i] == iv.chart {
                    m.contains(iv.chart, &path.x[i])?
                } else {
                    m.chart_transition(path.chart[i], iv.chart, &path.x[i])
                        .is_ok()
                };
                if !inside {
                    return Err(PathError::CoverInvalid(format!(
                        "sample {i} is not inside chart {:?} of interval {k}",
                        iv.chart
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Field and derivative samples of X at path sample i, re-represented
/// in `chart`.
fn field_sample_in(
    m: &Manifold,
    path: &DiscretePath,
    x: &PathTangent,
    i: usize,
    chart: ChartId,
) -> Result<(DVector<f64>, DVector<f64>), PathError> {
    if path.chart[i] == chart {
        Ok((x.w[i].clone(), x.dw[i].clone()))
    } else {
        let eval = m.chart_transition(path.chart[i], chart, &path.x[i])?;
        Ok((
            eval.push_vector(&x.w[i]),
            eval.push_derivative(&path.dx[i], &x.w[i], &x.dw[i]),
        ))
    }
}

/// The C¹ norm of a field along its path, with respect to a cover.
pub fn c1_norm(
    m: &Manifold,
    path: &DiscretePath,
    x: &PathTangent,
    cover: &ChartCover,
) -> Result<f64, PathError> {
    x.check_along(path)?;
    cover.validate(m, path)?;
    let mut total = 0.0;
    for k in 0..cover.intervals.len() {
        let chart = cover.intervals[k].chart;
        let mut interval_norm = 0.0f64;
        for i in cover.indices(k, path) {
            let (v, dv) = field_sample_in(m, path, x, i, chart)?;
            interval_norm = interval_norm.max(v.norm().max(dv.norm()));
        }
        total += interval_norm;
    }
    Ok(total)
}

/// Re-represent a whole field (and its derivative samples) from one
/// chart into another, via v = dλ·u and the product rule
/// v′ = dλ·u′ + d²λ(γ′, u).
pub fn chart_change_field(
    m: &Manifold,
    path: &DiscretePath,
    x: &PathTangent,
    from: ChartId,
    to: ChartId,
) -> Result<PathTangent, PathError> {
    x.check_along(path)?;
    let mut w = Vec::with_capacity(path.len());
    let mut dw = Vec::with_capacity(path.len());
    for i in 0..path.len() {
        if path.chart[i] != from {
            return Err(PathError::ChartMismatch { index: i });
        }
        let eval = m.chart_transition(from, to, &path.x[i])?;
        w.push(eval.push_vector(&x.w[i]));
        dw.push(eval.push_derivative(&path.dx[i], &x.w[i], &x.dw[i]));
    }
    Ok(PathTangent {
        t: path.t.clone(),
        chart: vec![to; path.len()],
        w,
        dw,
    })
}

/// Operator (spectral) norm of a matrix.
fn op_norm(a: &DMatrix<f64>) -> f64 {
    a.singular_values().max()
}

/// Norm of the Hessian stack: sqrt of the sum over output components of
/// the squared operator norms of the component Hessians.
fn hessian_norm(t: &crate::manifold::tensor::Tensor3) -> f64 {
    let n = t.dim();
    let mut sum = 0.0;
    for a in 0..n {
        let h = DMatrix::from_fn(n, n, |b, c| t.get(a, b, c));
        let s = op_norm(&h);
        sum += s * s;
    }
    sum.sqrt()
}

/// Per-sample transition data along a path represented in `from`.
fn transition_samples(
    m: &Manifold,
    path: &DiscretePath,
    from: ChartId,
    to: ChartId,
) -> Result<Vec<(f64, f64, f64)>, PathError> {
    let mut out = Vec::with_capacity(path.len());
    for i in 0..path.len() {
        if path.chart[i] != from {
            return Err(PathError::ChartMismatch { index: i });
        }
        let eval = m.chart_transition(from, to, &path.x[i])?;
        out.push((
            op_norm(&eval.dlambda),
            hessian_norm(&eval.d2lambda),
            path.dx[i].norm(),
        ));
    }
    Ok(out)
}

/// The equivalence constant c with ‖v‖ ≤ c·‖u‖ for fields re-represented
/// from `from` into `to` along the path:
/// c = max(sup|dλ|, sup|dλ| + sup|γ′|·sup|d²λ|), suprema over the grid.
pub fn norm_equivalence_bound(
    m: &Manifold,
    path: &DiscretePath,
    from: ChartId,
    to: ChartId,
) -> Result<f64, PathError> {
    let samples = transition_samples(m, path, from, to)?;
    let sup_dl = samples.iter().map(|s| s.0).fold(0.0, f64::max);
    let sup_d2 = samples.iter().map(|s| s.1).fold(0.0, f64::max);
    let sup_speed = samples.iter().map(|s| s.2).fold(0.0, f64::max);
    Ok(sup_dl.max(sup_dl + sup_speed * sup_d2))
}

/// Pointwise version of the equivalence bound: for each grid sample the
/// pair (max(|v|, |v′|), c_i · max(|u|, |u′|)) with c_i evaluated from
/// |dλ|, |d²λ|, |γ′| at that sample. The first component never exceeds
/// the second.
pub fn equivalence_bound_samples(
    m: &Manifold,
    path: &DiscretePath,
    x: &PathTangent,
    from: ChartId,
    to: ChartId,
) -> Result<Vec<(f64, f64)>, PathError> {
    x.check_along(path)?;
    let v = chart_change_field(m, path, x, from, to)?;
    let samples = transition_samples(m, path, from, to)?;
    let mut out = Vec::with_capacity(path.len());
    for i in 0..path.len() {
        let (a, b, s) = samples[i];
        let ci = a.max(a + s * b);
        let lhs = v.w[i].norm().max(v.dw[i].norm());
        let rhs = ci * x.w[i].norm().max(x.dw[i].norm());
        out.push((lhs, rhs));
    }
    Ok(out)
}
