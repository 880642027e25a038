//! Not-a-knot cubic spline interpolation on strictly increasing knots.
//!
//! Not-a-knot (third-derivative continuity across the second and
//! second-to-last knots) reproduces cubic polynomials exactly, which is
//! what makes resampling idempotent on already-smooth grids and keeps the
//! affine test cases exact to round-off.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SplineError {
    #[error("spline needs at least 4 knots, got {0}")]
    TooFewKnots(usize),
    #[error("knots must be strictly increasing (violated at index {0})")]
    KnotsNotIncreasing(usize),
    #[error("knot/value length mismatch: {knots} knots, {values} values")]
    LengthMismatch { knots: usize, values: usize },
}

/// One scalar cubic spline in moment (second-derivative) form.
#[derive(Debug, Clone)]
pub struct CubicSpline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    /// Second derivatives at the knots.
    m: Vec<f64>,
}

impl CubicSpline {
    pub fn fit(xs: &[f64], ys: &[f64]) -> Result<CubicSpline, SplineError> {
        let n = xs.len();
        if n < 4 {
            return Err(SplineError::TooFewKnots(n));
        }
        if ys.len() != n {
            return Err(SplineError::LengthMismatch {
                knots: n,
                values: ys.len(),
            });
        }
        for i in 1..n {
            if !(xs[i] > xs[i - 1]) {
                return Err(SplineError::KnotsNotIncreasing(i));
            }
        }
        let h: Vec<f64> = (0..n - 1).map(|i| xs[i + 1] - xs[i]).collect();
        // unknowns: moments m_0..m_{n-1}
        let mut a = DMatrix::<f64>::zeros(n, n);
        let mut b = DVector::<f64>::zeros(n);
        // interior second-derivative continuity rows
        for i in 1..n - 1 {
            a[(i, i - 1)] = h[i - 1] / 6.0;
            a[(i, i)] = (h[i - 1] + h[i]) / 3.0;
            a[(i, i + 1)] = h[i] / 6.0;
            b[i] = (ys[i + 1] - ys[i]) / h[i] - (ys[i] - ys[i - 1]) / h[i - 1];
        }
        // not-a-knot: third derivative continuous across x1 and x_{n-2}
        a[(0, 0)] = h[1];
        a[(0, 1)] = -(h[0] + h[1]);
        a[(0, 2)] = h[0];
        a[(n - 1, n - 3)] = h[n - 2];
        a[(n - 1, n - 2)] = -(h[n - 3] + h[n - 2]);
        a[(n - 1, n - 1)] = h[n - 3];
        let m = a
            .lu()
            .solve(&b)
            .expect("not-a-knot spline system is nonsingular for increasing knots");
        Ok(CubicSpline {
            xs: xs.to_vec(),
            ys: ys.to_vec(),
            m: m.iter().copied().collect(),
        })
    }

    /// Index of the interval containing `x` (clamped: queries outside the
    /// knot range extrapolate with the boundary cubic).
    fn interval(&self, x: f64) -> usize {
        let n = self.xs.len();
        match self
            .xs
            .binary_search_by(|probe| probe.partial_cmp(&x).expect("finite knots"))
        {
            Ok(i) => i.min(n - 2),
            Err(i) => i.saturating_sub(1).min(n - 2),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let i = self.interval(x);
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let h = x1 - x0;
        let (y0, y1) = (self.ys[i], self.ys[i + 1]);
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        let a = (x1 - x) / h;
        let b = (x - x0) / h;
        a * y0
            + b * y1
            + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0
    }

    pub fn deriv(&self, x: f64) -> f64 {
        let i = self.interval(x);
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let h = x1 - x0;
        let (y0, y1) = (self.ys[i], self.ys[i + 1]);
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        let a = (x1 - x) / h;
        let b = (x - x0) / h;
        (y1 - y0) / h + ((1.0 - 3.0 * a * a) * m0 + (3.0 * b * b - 1.0) * m1) * h / 6.0
    }
}
