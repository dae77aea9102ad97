//! Dense symmetric solves for the IRLS normal equations.

use alloc::vec;
use alloc::vec::Vec;

/// Relative size below which a Cholesky pivot counts as zero.
const RANK_TOL: f64 = 1e-10;

/// Lower Cholesky factor of a `p × p` symmetric positive definite matrix.
#[derive(Debug, Clone)]
pub(crate) struct Cholesky {
    p: usize,
    l: Vec<f64>,
}

impl Cholesky {
    /// Factors row-major `a`. On failure returns the first column that is
    /// (numerically) a linear combination of the columns before it.
    pub(crate) fn new(a: &[f64], p: usize) -> Result<Self, usize> {
        let mut l = vec![0.0; p * p];
        for j in 0..p {
            let mut d = a[j * p + j];
            for k in 0..j {
                d -= l[j * p + k] * l[j * p + k];
            }
            let scale = a[j * p + j].abs();
            // Written so that a NaN pivot also fails.
            #[allow(clippy::neg_cmp_op_on_partial_ord)]
            if !(d > RANK_TOL * scale) || !d.is_finite() {
                return Err(j);
            }
            let djj = libm::sqrt(d);
            l[j * p + j] = djj;
            for i in j + 1..p {
                let mut s = a[i * p + j];
                for k in 0..j {
                    s -= l[i * p + k] * l[j * p + k];
                }
                l[i * p + j] = s / djj;
            }
        }
        Ok(Cholesky { p, l })
    }

    pub(crate) fn solve(&self, b: &[f64]) -> Vec<f64> {
        let p = self.p;
        let mut y = b.to_vec();
        for i in 0..p {
            for k in 0..i {
                y[i] -= self.l[i * p + k] * y[k];
            }
            y[i] /= self.l[i * p + i];
        }
        for i in (0..p).rev() {
            for k in i + 1..p {
                y[i] -= self.l[k * p + i] * y[k];
            }
            y[i] /= self.l[i * p + i];
        }
        y
    }

    /// Full inverse, row-major.
    pub(crate) fn inverse(&self) -> Vec<f64> {
        let p = self.p;
        let mut inv = vec![0.0; p * p];
        let mut e = vec![0.0; p];
        for j in 0..p {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[j] = 1.0;
            let col = self.solve(&e);
            for i in 0..p {
                inv[i * p + j] = col[i];
            }
        }
        // Symmetrise away rounding.
        for i in 0..p {
            for j in 0..i {
                let m = 0.5 * (inv[i * p + j] + inv[j * p + i]);
                inv[i * p + j] = m;
                inv[j * p + i] = m;
            }
        }
        inv
    }
}
