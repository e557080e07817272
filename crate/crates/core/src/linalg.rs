//! Sparse storage, Hermitian eigensolvers and SPD linear solves.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{Cholesky, ComplexField, DMatrix, Dyn, SymmetricEigen};
use num_complex::Complex64;
use num_traits::{Float, Zero};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Dense eigensolves are used below this many rows.
pub const DENSE_EIGEN_LIMIT: usize = 2000;
/// Dense Cholesky is used below this many unknowns; preconditioned CG above.
pub const DENSE_SOLVE_LIMIT: usize = 500;

/// Field of matrix entries: `f64` or [`C64`].
pub trait Scalar: ComplexField<RealField = f64> + Copy + Zero {
    fn of_real(x: f64) -> Self;
    fn conj_val(self) -> Self;
    fn abs_val(self) -> f64;
    fn real_part(self) -> f64;
}

impl Scalar for f64 {
    fn of_real(x: f64) -> Self {
        x
    }
    fn conj_val(self) -> Self {
        self
    }
    fn abs_val(self) -> f64 {
        Float::abs(self)
    }
    fn real_part(self) -> f64 {
        self
    }
}

impl Scalar for C64 {
    fn of_real(x: f64) -> Self {
        C64::new(x, 0.0)
    }
    fn conj_val(self) -> Self {
        self.conj()
    }
    fn abs_val(self) -> f64 {
        self.norm()
    }
    fn real_part(self) -> f64 {
        self.re
    }
}

/// `⟨a, b⟩ = Σ conj(a_i) b_i`.
pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (&x, &y)| acc + x.conj_val() * y)
}

pub fn norm<T: Scalar>(a: &[T]) -> f64 {
    a.iter().map(|x| x.abs_val() * x.abs_val()).sum::<f64>().sqrt()
}

/// Compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix<T> {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<T>,
}

impl<T: Scalar> CsrMatrix<T> {
    /// Builds from `(row, col, value)` triplets; repeated positions are summed.
    pub fn from_triplets(rows: usize, cols: usize, mut triplets: Vec<(usize, usize, T)>) -> Self {
        triplets.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0; rows + 1];
        let mut col_idx: Vec<usize> = Vec::with_capacity(triplets.len());
        let mut values: Vec<T> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            debug_assert!(r < rows && c < cols);
            if last == Some((r, c)) {
                let end = values.len() - 1;
                values[end] += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..rows {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self {
            rows,
            cols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> T {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.col_idx[span.clone()].binary_search(&c) {
            Ok(i) => self.values[span.start + i],
            Err(_) => T::zero(),
        }
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).collect()
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        debug_assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|r| self.row(r).fold(T::zero(), |acc, (c, v)| acc + v * x[c]))
            .collect()
    }

    pub fn to_dense(&self) -> DMatrix<T> {
        let mut m = DMatrix::zeros(self.rows, self.cols);
        for r in 0..self.rows {
            for (c, v) in self.row(r) {
                m[(r, c)] = v;
            }
        }
        m
    }

    /// Largest `|a_ij - conj(a_ji)|` over stored entries.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..self.rows {
            for (c, v) in self.row(r) {
                worst = worst.max((v - self.get(c, r).conj_val()).abs_val());
            }
        }
        worst
    }

    /// Entrywise map, keeping the sparsity pattern.
    pub fn map<U: Scalar>(&self, f: impl Fn(usize, usize, T) -> U) -> CsrMatrix<U> {
        let mut values = Vec::with_capacity(self.values.len());
        for r in 0..self.rows {
            for (c, v) in self.row(r) {
                values.push(f(r, c, v));
            }
        }
        CsrMatrix {
            rows: self.rows,
            cols: self.cols,
            row_ptr: self.row_ptr.clone(),
            col_idx: self.col_idx.clone(),
            values,
        }
    }

    /// Principal submatrix on `idx` (in the given order).
    pub fn principal(&self, idx: &[usize]) -> CsrMatrix<T> {
        let mut position = vec![usize::MAX; self.cols];
        for (i, &x) in idx.iter().enumerate() {
            position[x] = i;
        }
        let mut triplets = Vec::new();
        for (i, &r) in idx.iter().enumerate() {
            for (c, v) in self.row(r) {
                if position[c] != usize::MAX {
                    triplets.push((i, position[c], v));
                }
            }
        }
        CsrMatrix::from_triplets(idx.len(), idx.len(), triplets)
    }

    /// Adds `shift[i]` to the `i`-th diagonal entry.
    pub fn add_diagonal(&self, shift: &[f64]) -> CsrMatrix<T> {
        let mut triplets: Vec<(usize, usize, T)> = Vec::with_capacity(self.nnz() + self.rows);
        for r in 0..self.rows {
            triplets.extend(self.row(r).map(|(c, v)| (r, c, v)));
            triplets.push((r, r, T::of_real(shift[r])));
        }
        CsrMatrix::from_triplets(self.rows, self.cols, triplets)
    }
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub fn hermitian_eigenvalues<T: Scalar>(m: DMatrix<T>) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let mut ev: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Eigenpairs of a Hermitian matrix, ascending; eigenvectors are the columns.
pub fn hermitian_eigh<T: Scalar>(m: DMatrix<T>) -> (Vec<f64>, DMatrix<T>) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), m);
    }
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Smallest eigenvalue of a Hermitian sparse matrix: dense solve below
/// [`DENSE_EIGEN_LIMIT`] rows, restarted Lanczos above.
pub fn smallest_eigenvalue<T: Scalar>(m: &CsrMatrix<T>, tol: f64) -> Result<f64> {
    if m.rows() == 0 {
        return Err(Error::BadParameter("empty operator".into()));
    }
    if m.rows() < DENSE_EIGEN_LIMIT {
        Ok(hermitian_eigenvalues(m.to_dense())[0])
    } else {
        lanczos_smallest(m, tol, 120, 200)
    }
}

/// Restarted Lanczos with full reorthogonalisation for the bottom of the
/// spectrum. Converged when the Ritz residual `β_k |s_k|` drops below
/// `tol · max(1, |θ|)`.
pub fn lanczos_smallest<T: Scalar>(
    m: &CsrMatrix<T>,
    tol: f64,
    basis: usize,
    restarts: usize,
) -> Result<f64> {
    let n = m.rows();
    let basis = basis.min(n).max(1);
    // deterministic start vector with no special symmetry
    let mut start: Vec<T> = (0..n)
        .map(|i| {
            let t = (i as f64 + 1.0) * 0.618_033_988_749_895;
            T::of_real(1.0 + 0.5 * (t - Float::floor(t)))
        })
        .collect();
    let mut last_theta = f64::NAN;
    for _ in 0..=restarts {
        let s = norm(&start);
        start.iter_mut().for_each(|x| *x = x.scale(1.0 / s));
        let mut vs: Vec<Vec<T>> = vec![start.clone()];
        let mut alphas: Vec<f64> = Vec::new();
        let mut betas: Vec<f64> = Vec::new();
        loop {
            let j = vs.len() - 1;
            let mut w = m.mul_vec(&vs[j]);
            let a = dot(&vs[j], &w).real_part();
            alphas.push(a);
            for _ in 0..2 {
                for v in &vs {
                    let c = dot(v, &w);
                    for (wi, &vi) in w.iter_mut().zip(v) {
                        *wi -= c * vi;
                    }
                }
            }
            let b = norm(&w);
            let k = alphas.len();
            let tri = DMatrix::from_fn(k, k, |r, c| {
                if r == c {
                    alphas[r]
                } else if r + 1 == c {
                    betas[r]
                } else if c + 1 == r {
                    betas[c]
                } else {
                    0.0
                }
            });
            let (theta, s_vec) = hermitian_eigh(tri);
            let residual = b * Float::abs(s_vec[(k - 1, 0)]);
            last_theta = theta[0];
            let done = residual <= tol * Float::max(1.0, Float::abs(theta[0]));
            if done || b < 1e-14 || k == n {
                return Ok(theta[0]);
            }
            if k == basis {
                // restart from the current Ritz vector
                let mut y = vec![T::zero(); n];
                for (i, v) in vs.iter().enumerate() {
                    let c = T::of_real(s_vec[(i, 0)]);
                    for (yi, &vi) in y.iter_mut().zip(v) {
                        *yi += c * vi;
                    }
                }
                start = y;
                break;
            }
            betas.push(b);
            vs.push(w.into_iter().map(|x| x.scale(1.0 / b)).collect());
        }
    }
    Err(Error::ConvergenceFailure(format!(
        "Lanczos did not reach tolerance {tol}; last estimate {last_theta}"
    )))
}

/// Solver for a fixed real symmetric positive definite system.
#[derive(Debug, Clone)]
pub enum SpdSolver {
    Dense(Cholesky<f64, Dyn>),
    Iterative { matrix: CsrMatrix<f64>, inv_diag: Vec<f64> },
}

impl SpdSolver {
    pub fn new(matrix: CsrMatrix<f64>) -> Result<Self> {
        if matrix.rows() < DENSE_SOLVE_LIMIT {
            Cholesky::new(matrix.to_dense())
                .map(SpdSolver::Dense)
                .ok_or_else(|| Error::SolveFailure("matrix is not positive definite".into()))
        } else {
            let diag = matrix.diagonal();
            if diag.iter().any(|&d| !(d > 0.0)) {
                return Err(Error::SolveFailure("non-positive diagonal entry".into()));
            }
            let inv_diag = diag.iter().map(|d| 1.0 / d).collect();
            Ok(SpdSolver::Iterative { matrix, inv_diag })
        }
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        match self {
            SpdSolver::Dense(ch) => {
                let b = nalgebra::DVector::from_column_slice(rhs);
                Ok(ch.solve(&b).iter().copied().collect())
            }
            SpdSolver::Iterative { matrix, inv_diag } => pcg(matrix, inv_diag, rhs),
        }
    }
}

/// Jacobi-preconditioned conjugate gradients to relative residual 1e-13.
fn pcg(a: &CsrMatrix<f64>, inv_diag: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    let n = b.len();
    let bnorm = norm(b);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok(x);
    }
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut rz: f64 = dot(&r, &z);
    for _ in 0..(20 * n).max(100) {
        let ap = a.mul_vec(&p);
        let pap: f64 = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::SolveFailure("matrix is not positive definite".into()));
        }
        let step = rz / pap;
        for i in 0..n {
            x[i] += step * p[i];
            r[i] -= step * ap[i];
        }
        if norm(&r) <= 1e-13 * bnorm {
            return Ok(x);
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new: f64 = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::SolveFailure("conjugate gradients did not converge".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_laplacian(n: usize, potential: impl Fn(usize) -> f64) -> CsrMatrix<f64> {
        let mut t = Vec::new();
        for i in 0..n {
            let deg = if i == 0 || i + 1 == n { 1.0 } else { 2.0 };
            t.push((i, i, deg + potential(i)));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        CsrMatrix::from_triplets(n, n, t)
    }

    /// Sturm-sequence bisection for the smallest eigenvalue of a symmetric
    /// tridiagonal matrix; independent of the Lanczos path.
    fn sturm_smallest(diag: &[f64], off: &[f64]) -> f64 {
        let count_below = |x: f64| {
            let mut count = 0;
            let mut q = diag[0] - x;
            if q < 0.0 {
                count += 1;
            }
            for i in 1..diag.len() {
                let denom = if q == 0.0 { 1e-300 } else { q };
                q = diag[i] - x - off[i - 1] * off[i - 1] / denom;
                if q < 0.0 {
                    count += 1;
                }
            }
            count
        };
        let (mut lo, mut hi) = (-1e6, 1e6);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if count_below(mid) >= 1 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn triplets_are_summed() {
        let m = CsrMatrix::from_triplets(2, 2, vec![(0, 0, 1.0), (0, 0, 2.0), (1, 0, -1.0)]);
        assert_eq!(m.get(0, 0), 3.0);
        assert_eq!(m.get(1, 0), -1.0);
        assert_eq!(m.get(0, 1), 0.0);
        assert_eq!(m.nnz(), 2);
    }

    #[test]
    fn two_vertex_laplacian_spectrum() {
        let ev = hermitian_eigenvalues(path_laplacian(2, |_| 0.0).to_dense());
        assert!(ev[0].abs() < 1e-14 && (ev[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn lanczos_agrees_with_sturm_bisection() {
        let n = 600;
        let pot = |i: usize| ((i as f64) - 300.0).powi(2) / 5000.0;
        let m = path_laplacian(n, pot);
        let diag: Vec<f64> = (0..n).map(|i| m.get(i, i)).collect();
        let expected = sturm_smallest(&diag, &vec![-1.0; n - 1]);
        let got = lanczos_smallest(&m, 1e-10, 120, 200).unwrap();
        assert!((got - expected).abs() < 1e-8, "{got} vs {expected}");
    }

    #[test]
    fn large_operator_takes_iterative_path() {
        let n = DENSE_EIGEN_LIMIT + 100;
        let pot = |i: usize| ((i as f64) - 1000.0).powi(2) / 2000.0;
        let m = path_laplacian(n, pot);
        let diag: Vec<f64> = (0..n).map(|i| m.get(i, i)).collect();
        let expected = sturm_smallest(&diag, &vec![-1.0; n - 1]);
        let got = smallest_eigenvalue(&m, 1e-10).unwrap();
        assert!((got - expected).abs() < 1e-8, "{got} vs {expected}");
    }

    #[test]
    fn dense_and_iterative_solves_agree() {
        let n = DENSE_SOLVE_LIMIT + 20;
        let m = path_laplacian(n, |_| 0.5);
        let rhs: Vec<f64> = (0..n).map(|i| ((i * 7) % 11) as f64 - 5.0).collect();
        let x = SpdSolver::new(m.clone()).unwrap().solve(&rhs).unwrap();
        let r = m.mul_vec(&x);
        let err = r.iter().zip(&rhs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-10);
        let small = path_laplacian(30, |_| 0.5);
        let rhs30 = &rhs[..30];
        let xd = SpdSolver::new(small.clone()).unwrap().solve(rhs30).unwrap();
        let rd = small.mul_vec(&xd);
        assert!(rd.iter().zip(rhs30).all(|(a, b)| (a - b).abs() < 1e-12));
    }

    #[test]
    fn indefinite_matrix_is_rejected() {
        let m = path_laplacian(3, |_| -5.0);
        assert!(matches!(SpdSolver::new(m), Err(Error::SolveFailure(_))));
    }

    #[test]
    fn complex_hermitian_defect() {
        let m = CsrMatrix::from_triplets(
            2,
            2,
            vec![(0, 1, C64::new(0.0, 1.0)), (1, 0, C64::new(0.0, -1.0))],
        );
        assert!(m.hermitian_defect() < 1e-15);
        let ev = hermitian_eigenvalues(m.to_dense());
        assert!((ev[0] + 1.0).abs() < 1e-14 && (ev[1] - 1.0).abs() < 1e-14);
    }
}
