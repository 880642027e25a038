//! Fourth-order finite-difference stencils on uniform grids.
//!
//! Interior points use central stencils; the two points nearest each end
//! use one-sided stencils of the same order, so derivative accuracy is
//! uniform across the grid. Fourth-order second-derivative edge stencils
//! need six points; a five-sample grid (the allowed minimum) degrades to
//! third order at the edges.
//!
//! Callers divide by `h` (first derivative) or `h^2` (second derivative)
//! themselves; the returned coefficients are pure numbers attached to
//! integer offsets from the evaluation index.

/// First-derivative stencil at index `i` of an `n`-point grid: integer
/// offsets and coefficients, to be divided by `h`. Requires `n >= 5`.
pub fn d1_stencil(i: usize, n: usize) -> (&'static [isize], &'static [f64]) {
    assert!(n >= 5, "first-derivative stencils need at least 5 samples");
    const C: f64 = 1.0 / 12.0;
    const INTERIOR: ([isize; 5], [f64; 5]) = (
        [-2, -1, 0, 1, 2],
        [C, -8.0 * C, 0.0, 8.0 * C, -C],
    );
    const LEFT0: ([isize; 5], [f64; 5]) = (
        [0, 1, 2, 3, 4],
        [-25.0 * C, 48.0 * C, -36.0 * C, 16.0 * C, -3.0 * C],
    );
    const LEFT1: ([isize; 5], [f64; 5]) = (
        [-1, 0, 1, 2, 3],
        [-3.0 * C, -10.0 * C, 18.0 * C, -6.0 * C, C],
    );
    // odd derivative: right-edge stencils are reversed and negated
    const RIGHT1: ([isize; 5], [f64; 5]) = (
        [-3, -2, -1, 0, 1],
        [-C, 6.0 * C, -18.0 * C, 10.0 * C, 3.0 * C],
    );
    const RIGHT0: ([isize; 5], [f64; 5]) = (
        [-4, -3, -2, -1, 0],
        [3.0 * C, -16.0 * C, 36.0 * C, -48.0 * C, 25.0 * C],
    );
    let (offsets, coeffs) = if i == 0 {
        &LEFT0
    } else if i == 1 {
        &LEFT1
    } else if i + 1 == n {
        &RIGHT0
    } else if i + 2 == n {
        &RIGHT1
    } else {
        &INTERIOR
    };
    (offsets, coeffs)
}

/// Second-derivative stencil at index `i` of an `n`-point grid: integer
/// offsets and coefficients, to be divided by `h^2`. Requires `n >= 5`;
/// a five-sample grid falls back to full-width five-point rows (the exact
/// second derivative of the interpolating quartic — third order at the
/// edges, which only ever serves minimum-size grids).
pub fn d2_stencil(i: usize, n: usize) -> (&'static [isize], &'static [f64]) {
    assert!(n >= 5, "second-derivative stencils need at least 5 samples");
    if n == 5 {
        return d2_stencil_5(i);
    }
    const C: f64 = 1.0 / 12.0;
    const INTERIOR: ([isize; 6], [f64; 6]) = (
        [-2, -1, 0, 1, 2, 0],
        [-C, 16.0 * C, -30.0 * C, 16.0 * C, -C, 0.0],
    );
    const LEFT0: ([isize; 6], [f64; 6]) = (
        [0, 1, 2, 3, 4, 5],
        [
            45.0 * C,
            -154.0 * C,
            214.0 * C,
            -156.0 * C,
            61.0 * C,
            -10.0 * C,
        ],
    );
    const LEFT1: ([isize; 6], [f64; 6]) = (
        [-1, 0, 1, 2, 3, 4],
        [10.0 * C, -15.0 * C, -4.0 * C, 14.0 * C, -6.0 * C, C],
    );
    // even derivative: right-edge stencils are reversed with the same signs
    const RIGHT1: ([isize; 6], [f64; 6]) = (
        [-4, -3, -2, -1, 0, 1],
        [C, -6.0 * C, 14.0 * C, -4.0 * C, -15.0 * C, 10.0 * C],
    );
    const RIGHT0: ([isize; 6], [f64; 6]) = (
        [-5, -4, -3, -2, -1, 0],
        [
            -10.0 * C,
            61.0 * C,
            -156.0 * C,
            214.0 * C,
            -154.0 * C,
            45.0 * C,
        ],
    );
    let (offsets, coeffs) = if i == 0 {
        &LEFT0
    } else if i == 1 {
        &LEFT1
    } else if i + 1 == n {
        &RIGHT0
    } else if i + 2 == n {
        &RIGHT1
    } else {
        &INTERIOR
    };
    // interior stencil is padded to 6 entries with a zero coefficient
    (&offsets[..], &coeffs[..])
}

/// Five-point second-derivative rows: every row differentiates the unique
/// quartic through all five samples, so all rows are exact through
/// degree 4.
fn d2_stencil_5(i: usize) -> (&'static [isize], &'static [f64]) {
    const C: f64 = 1.0 / 12.0;
    const ROWS: [([isize; 5], [f64; 5]); 5] = [
        (
            [0, 1, 2, 3, 4],
            [35.0 * C, -104.0 * C, 114.0 * C, -56.0 * C, 11.0 * C],
        ),
        (
            [-1, 0, 1, 2, 3],
            [11.0 * C, -20.0 * C, 6.0 * C, 4.0 * C, -C],
        ),
        (
            [-2, -1, 0, 1, 2],
            [-C, 16.0 * C, -30.0 * C, 16.0 * C, -C],
        ),
        (
            [-3, -2, -1, 0, 1],
            [-C, 4.0 * C, 6.0 * C, -20.0 * C, 11.0 * C],
        ),
        (
            [-4, -3, -2, -1, 0],
            [11.0 * C, -56.0 * C, 114.0 * C, -104.0 * C, 35.0 * C],
        ),
    ];
    let (offsets, coeffs) = &ROWS[i];
    (&offsets[..], &coeffs[..])
}

/// Differentiate a scalar series sampled at spacing `h`.
pub fn d1_series(y: &[f64], h: f64) -> Vec<f64> {
    let n = y.len();
    (0..n)
        .map(|i| {
            let (offs, coeffs) = d1_stencil(i, n);
            offs.iter()
                .zip(coeffs)
                .map(|(&o, &c)| c * y[(i as isize + o) as usize])
                .sum::<f64>()
                / h
        })
        .collect()
}

/// Second derivative of a scalar series sampled at spacing `h`.
pub fn d2_series(y: &[f64], h: f64) -> Vec<f64> {
    let n = y.len();
    (0..n)
        .map(|i| {
            let (offs, coeffs) = d2_stencil(i, n);
            offs.iter()
                .zip(coeffs)
                .map(|(&o, &c)| c * y[(i as isize + o) as usize])
                .sum::<f64>()
                / (h * h)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Every stencil must annihilate polynomials up to degree 4 (degree 5
    /// for the 6-point second-derivative rows) and reproduce the exact
    /// derivative of the monomials it is built from.
    #[test]
    fn stencils_are_exact_on_low_degree_polynomials() {
        let n = 12;
        let h = 0.1;
        for deg in 0..=4u32 {
            let y: Vec<f64> = (0..n).map(|i| (i as f64 * h).powi(deg as i32)).collect();
            let d1 = d1_series(&y, h);
            let d2 = d2_series(&y, h);
            for i in 0..n {
                let x = i as f64 * h;
                let want1 = if deg == 0 {
                    0.0
                } else {
                    deg as f64 * x.powi(deg as i32 - 1)
                };
                let want2 = if deg < 2 {
                    0.0
                } else {
                    (deg * (deg - 1)) as f64 * x.powi(deg as i32 - 2)
                };
                assert!(
                    (d1[i] - want1).abs() < 1e-9,
                    "d1 deg {deg} at {i}: {} vs {want1}",
                    d1[i]
                );
                assert!(
                    (d2[i] - want2).abs() < 1e-7,
                    "d2 deg {deg} at {i}: {} vs {want2}",
                    d2[i]
                );
            }
        }
    }

    #[test]
    fn fourth_order_convergence_on_sine() {
        // errors must shrink ~16x per grid doubling, including at edges
        let err = |n: usize| -> (f64, f64) {
            let h = 1.0 / (n - 1) as f64;
            let y: Vec<f64> = (0..n).map(|i| (i as f64 * h).sin()).collect();
            let d1 = d1_series(&y, h);
            let d2 = d2_series(&y, h);
            let mut e1 = 0.0f64;
            let mut e2 = 0.0f64;
            for i in 0..n {
                let x = i as f64 * h;
                e1 = e1.max((d1[i] - x.cos()).abs());
                e2 = e2.max((d2[i] + x.sin()).abs());
            }
            (e1, e2)
        };
        let (a1, a2) = err(33);
        let (b1, b2) = err(65);
        let r1 = a1 / b1;
        let r2 = a2 / b2;
        assert!(r1 > 10.0 && r1 < 24.0, "d1 convergence ratio {r1}");
        assert!(r2 > 10.0 && r2 < 24.0, "d2 convergence ratio {r2}");
    }

    #[test]
    fn five_point_second_derivative_is_exact_on_quartics() {
        let h = 0.2;
        for deg in 0..=4u32 {
            let y: Vec<f64> = (0..5).map(|i| (1.0 + i as f64 * h).powi(deg as i32)).collect();
            let d2 = d2_series(&y, h);
            for i in 0..5 {
                let x = 1.0 + i as f64 * h;
                let want = if deg < 2 {
                    0.0
                } else {
                    (deg * (deg - 1)) as f64 * x.powi(deg as i32 - 2)
                };
                assert!(
                    (d2[i] - want).abs() < 1e-10,
                    "deg {deg} at {i}: {} vs {want}",
                    d2[i]
                );
            }
        }
    }

    #[test]
    fn stencil_offsets_stay_in_bounds() {
        for n in [5usize, 6, 7, 12] {
            for i in 0..n {
                let (o1, _) = d1_stencil(i, n);
                let (o2, _) = d2_stencil(i, n);
                for &o in o1.iter().chain(o2) {
                    let j = i as isize + o;
                    assert!(j >= 0 && (j as usize) < n, "n {n} i {i} offset {o}");
                }
            }
        }
    }
}
