//! Dense symmetric positive-definite solves for the small systems in the
//! model fitters.

use alloc::vec::Vec;

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// All-zero `n x n` matrix.
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: alloc::vec![0.0; n * n],
        }
    }

    /// Dimension.
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Entry `(i, j)`.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// Mutable entry `(i, j)`.
    pub fn get_mut(&mut self, i: usize, j: usize) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }

    /// Adds `lambda` to the diagonal.
    pub fn add_ridge(&mut self, lambda: f64) {
        for i in 0..self.n {
            *self.get_mut(i, i) += lambda;
        }
    }

    /// Adds `scale * v v^T`.
    pub fn add_outer(&mut self, v: &[f64], scale: f64) {
        for i in 0..self.n {
            for j in 0..self.n {
                *self.get_mut(i, j) += scale * v[i] * v[j];
            }
        }
    }

    /// Multiplies every entry by `s`.
    pub fn scale(&mut self, s: f64) {
        self.data.iter_mut().for_each(|v| *v *= s);
    }
}

/// Lower Cholesky factor of a symmetric positive-definite matrix.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: Matrix,
}

impl Cholesky {
    /// Factorizes `a`; `None` when a pivot falls below `1e-12` times the
    /// largest diagonal entry.
    pub fn factor(a: &Matrix) -> Option<Self> {
        let n = a.dim();
        let floor = 1e-12 * (0..n).map(|i| a.get(i, i).abs()).fold(0.0, f64::max);
        let mut l = Matrix::zeros(n);
        for j in 0..n {
            let mut d = a.get(j, j);
            for k in 0..j {
                d -= l.get(j, k) * l.get(j, k);
            }
            if !(d > floor) || !d.is_finite() {
                return None;
            }
            let d = libm::sqrt(d);
            *l.get_mut(j, j) = d;
            for i in j + 1..n {
                let mut s = a.get(i, j);
                for k in 0..j {
                    s -= l.get(i, k) * l.get(j, k);
                }
                *l.get_mut(i, j) = s / d;
            }
        }
        Some(Self { l })
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.l.dim();
        let mut y = b.to_vec();
        for i in 0..n {
            for k in 0..i {
                y[i] -= self.l.get(i, k) * y[k];
            }
            y[i] /= self.l.get(i, i);
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                y[i] -= self.l.get(k, i) * y[k];
            }
            y[i] /= self.l.get(i, i);
        }
        y
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_spd_system() {
        let mut a = Matrix::zeros(2);
        *a.get_mut(0, 0) = 4.0;
        *a.get_mut(0, 1) = 2.0;
        *a.get_mut(1, 0) = 2.0;
        *a.get_mut(1, 1) = 3.0;
        let x = Cholesky::factor(&a).unwrap().solve(&[2.0, 1.0]);
        assert!((4.0 * x[0] + 2.0 * x[1] - 2.0).abs() < 1e-14);
        assert!((2.0 * x[0] + 3.0 * x[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_singular() {
        let mut a = Matrix::zeros(2);
        a.add_outer(&[1.0, 1.0], 1.0);
        assert!(Cholesky::factor(&a).is_none());
    }
}
