//! Small dense linear algebra: a row-major matrix, a pivoted linear solver and
//! a cyclic Jacobi eigensolver for symmetric matrices.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// Convergence threshold on the off-diagonal Frobenius norm.
pub const JACOBI_OFF_DIAGONAL_TOL: f64 = 1e-13;
const JACOBI_MAX_SWEEPS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Builds a matrix from equally long rows.
    ///
    /// Panics if the rows are ragged.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend_from_slice(r);
        }
        Self { rows: rows.len(), cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.row(i).iter().sum()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn add_assign(&mut self, other: &Matrix) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    /// Row vector times matrix: `v · self`.
    pub fn left_mul(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (i, &vi) in v.iter().enumerate() {
            if vi == 0.0 {
                continue;
            }
            for (o, &m) in out.iter_mut().zip(self.row(i)) {
                *o += vi * m;
            }
        }
        out
    }

    /// Matrix times column vector: `self · v`.
    pub fn right_mul(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows).map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum()).collect()
    }

    /// Kronecker product; `self` provides the slow index.
    pub fn kron(&self, other: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(self.rows * other.rows, self.cols * other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)];
                if a == 0.0 {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out[(i * other.rows + k, j * other.cols + l)] = a * other[(k, l)];
                    }
                }
            }
        }
        out
    }

    /// Submatrix on the given row and column index lists.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Matrix {
        let mut out = Matrix::zeros(rows.len(), cols.len());
        for (a, &i) in rows.iter().enumerate() {
            for (b, &j) in cols.iter().enumerate() {
                out[(a, b)] = self[(i, j)];
            }
        }
        out
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    fn off_diagonal_norm(&self) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                if i != j {
                    acc += self[(i, j)] * self[(i, j)];
                }
            }
        }
        acc.sqrt()
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// Solves `a · x = b` by Gaussian elimination with partial pivoting.
///
/// Returns `None` when a pivot falls below `1e-14` (singular to working
/// precision).
pub fn solve(a: &Matrix, b: &[f64]) -> Option<Vec<f64>> {
    let n = a.rows();
    assert!(a.is_square() && b.len() == n);
    let mut m = a.clone();
    let mut x = b.to_vec();
    for col in 0..n {
        let pivot = (col..n).max_by(|&r, &s| m[(r, col)].abs().total_cmp(&m[(s, col)].abs())).unwrap();
        if m[(pivot, col)].abs() < 1e-14 {
            return None;
        }
        if pivot != col {
            for k in 0..n {
                m.data.swap(pivot * n + k, col * n + k);
            }
            x.swap(pivot, col);
        }
        for r in col + 1..n {
            let factor = m[(r, col)] / m[(col, col)];
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                let v = m[(col, k)];
                m[(r, k)] -= factor * v;
            }
            x[r] -= factor * x[col];
        }
    }
    for col in (0..n).rev() {
        let mut acc = x[col];
        for k in col + 1..n {
            acc -= m[(col, k)] * x[k];
        }
        x[col] = acc / m[(col, col)];
    }
    Some(x)
}

/// Eigen-decomposition of a real symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    /// Eigenvalues in descending order.
    pub values: Vec<f64>,
    /// Eigenvectors as columns, in the order of `values`.
    pub vectors: Matrix,
}

impl SymmetricEigen {
    /// Cyclic Jacobi rotations, sweeping the upper triangle row by row until
    /// the off-diagonal Frobenius norm drops below
    /// [`JACOBI_OFF_DIAGONAL_TOL`].
    pub fn new(a: &Matrix) -> Result<Self> {
        assert!(a.is_square(), "eigen-decomposition needs a square matrix");
        let n = a.rows();
        let mut a = a.clone();
        let mut v = Matrix::identity(n);
        for _ in 0..JACOBI_MAX_SWEEPS {
            if a.off_diagonal_norm() < JACOBI_OFF_DIAGONAL_TOL {
                return Ok(Self::sorted(&a, v));
            }
            for p in 0..n {
                for q in p + 1..n {
                    let apq = a[(p, q)];
                    if apq == 0.0 {
                        continue;
                    }
                    let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let (akp, akq) = (a[(k, p)], a[(k, q)]);
                        a[(k, p)] = c * akp - s * akq;
                        a[(k, q)] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                        a[(p, k)] = c * apk - s * aqk;
                        a[(q, k)] = s * apk + c * aqk;
                    }
                    for k in 0..n {
                        let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                        v[(k, p)] = c * vkp - s * vkq;
                        v[(k, q)] = s * vkp + c * vkq;
                    }
                }
            }
        }
        Err(Error::NoConvergence)
    }

    fn sorted(a: &Matrix, v: Matrix) -> Self {
        let n = a.rows();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]));
        let values = order.iter().map(|&i| a[(i, i)]).collect();
        let mut vectors = Matrix::zeros(n, n);
        for (col, &src) in order.iter().enumerate() {
            for k in 0..n {
                vectors[(k, col)] = v[(k, src)];
            }
        }
        Self { values, vectors }
    }

    /// Largest `‖A v − λ v‖₂` over all eigenpairs.
    pub fn max_residual(&self, a: &Matrix) -> f64 {
        let n = a.rows();
        (0..n)
            .map(|col| {
                let vcol: Vec<f64> = (0..n).map(|k| self.vectors[(k, col)]).collect();
                let av = a.right_mul(&vcol);
                av.iter().zip(&vcol).map(|(x, y)| (x - self.values[col] * y).powi(2)).sum::<f64>().sqrt()
            })
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_small_system() {
        let a = Matrix::from_rows(&[[2.0, 1.0], [1.0, 3.0]]);
        let x = solve(&a, &[3.0, 5.0]).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-14);
        assert!((x[1] - 1.4).abs() < 1e-14);
    }

    #[test]
    fn singular_system_is_rejected() {
        let a = Matrix::from_rows(&[[1.0, 2.0], [2.0, 4.0]]);
        assert!(solve(&a, &[1.0, 2.0]).is_none());
    }

    #[test]
    fn kron_uses_left_factor_as_slow_index() {
        let a = Matrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]);
        let b = Matrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]);
        let k = a.kron(&b);
        assert_eq!(k.row(0), &[0.0, 1.0, 0.0, 2.0]);
        assert_eq!(k.row(3), &[3.0, 0.0, 4.0, 0.0]);
    }

    #[test]
    fn jacobi_two_by_two() {
        let a = Matrix::from_rows(&[[2.0, 1.0], [1.0, 2.0]]);
        let eig = SymmetricEigen::new(&a).unwrap();
        assert!((eig.values[0] - 3.0).abs() < 1e-13);
        assert!((eig.values[1] - 1.0).abs() < 1e-13);
        assert!(eig.max_residual(&a) < 1e-12);
    }

    #[test]
    fn jacobi_diagonal_and_degenerate() {
        let a = Matrix::identity(4);
        let eig = SymmetricEigen::new(&a).unwrap();
        assert!(eig.values.iter().all(|v| (v - 1.0).abs() < 1e-15));

        let a = Matrix::from_rows(&[[1.0, 1.0, 1.0], [1.0, 1.0, 1.0], [1.0, 1.0, 1.0]]);
        let eig = SymmetricEigen::new(&a).unwrap();
        assert!((eig.values[0] - 3.0).abs() < 1e-12);
        assert!(eig.values[1].abs() < 1e-12 && eig.values[2].abs() < 1e-12);
        assert!(eig.max_residual(&a) < 1e-12);
    }

    #[test]
    fn jacobi_matches_trace_and_residual_on_dense_matrix() {
        let n = 12;
        let mut a = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let v = ((i * 7 + j * 3) % 11) as f64 / 11.0 - 0.4;
                a[(i, j)] = v;
                a[(j, i)] = v;
            }
        }
        let eig = SymmetricEigen::new(&a).unwrap();
        let sum: f64 = eig.values.iter().sum();
        assert!((sum - a.trace()).abs() < 1e-12);
        assert!(eig.max_residual(&a) < 1e-10);
        assert!(eig.values.windows(2).all(|w| w[0] >= w[1]));
    }
}
