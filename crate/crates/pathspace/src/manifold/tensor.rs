//! Dense rank-3 and rank-4 tensors over a single small dimension.
//!
//! Index conventions used throughout the crate:
//! - `Tensor3` holds Christoffel symbols `Γ^k_ij` as `get(k, i, j)` and
//!   transition Hessians `d²λ^i_jk` as `get(i, j, k)`; both are symmetric
//!   in the last two slots.
//! - `Tensor4` holds either `∂_l Γ^k_ij` as `get(k, i, j, l)` or the
//!   curvature `R^k_{l i j}` as `get(k, l, i, j)`.

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    n: usize,
    data: Vec<f64>,
}

impl Tensor3 {
    pub fn zeros(n: usize) -> Tensor3 {
        Tensor3 {
            n,
            data: vec![0.0; n * n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, c: usize) -> f64 {
        self.data[(a * self.n + b) * self.n + c]
    }

    #[inline]
    pub fn set(&mut self, a: usize, b: usize, c: usize, value: f64) {
        self.data[(a * self.n + b) * self.n + c] = value;
    }

    /// Contract the middle slot with `u` and the last slot with `w`:
    /// `out_a = Σ_bc T_abc u_b w_c`.
    pub fn contract2(
        &self,
        u: &nalgebra::DVector<f64>,
        w: &nalgebra::DVector<f64>,
    ) -> nalgebra::DVector<f64> {
        let n = self.n;
        let mut out = nalgebra::DVector::zeros(n);
        for a in 0..n {
            let mut acc = 0.0;
            for b in 0..n {
                let ub = u[b];
                if ub == 0.0 {
                    continue;
                }
                for c in 0..n {
                    acc += self.get(a, b, c) * ub * w[c];
                }
            }
            out[a] = acc;
        }
        out
    }

    /// Contract the middle slot with `u`, leaving a matrix
    /// `M_ac = Σ_b T_abc u_b`.
    pub fn contract1(&self, u: &nalgebra::DVector<f64>) -> nalgebra::DMatrix<f64> {
        let n = self.n;
        let mut out = nalgebra::DMatrix::zeros(n, n);
        for a in 0..n {
            for c in 0..n {
                let mut acc = 0.0;
                for b in 0..n {
                    acc += self.get(a, b, c) * u[b];
                }
                out[(a, c)] = acc;
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor4 {
    n: usize,
    data: Vec<f64>,
}

impl Tensor4 {
    pub fn zeros(n: usize) -> Tensor4 {
        Tensor4 {
            n,
            data: vec![0.0; n * n * n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        self.data[((a * self.n + b) * self.n + c) * self.n + d]
    }

    #[inline]
    pub fn set(&mut self, a: usize, b: usize, c: usize, d: usize, value: f64) {
        self.data[((a * self.n + b) * self.n + c) * self.n + d] = value;
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    #[test]
    fn contraction_matches_hand_sums() {
        let mut t = Tensor3::zeros(2);
        t.set(0, 0, 1, 2.0);
        t.set(1, 1, 0, -3.0);
        let u = DVector::from_vec(vec![1.0, 2.0]);
        let w = DVector::from_vec(vec![4.0, 5.0]);
        let out = t.contract2(&u, &w);
        // out_0 = T_001 u_0 w_1 = 2*1*5 = 10; out_1 = T_110 u_1 w_0 = -3*2*4 = -24
        assert_eq!(out[0], 10.0);
        assert_eq!(out[1], -24.0);
        let m = t.contract1(&u);
        assert_eq!(m[(0, 1)], 2.0);
        assert_eq!(m[(1, 0)], -6.0);
    }
}
