//! Small dense matrices (at most 12×12 here) and the few factorizations the
//! geometry needs: pivoted LU, cyclic Jacobi for symmetric eigenvalues, and
//! one-sided Jacobi for singular values.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Index, IndexMut, Mul, Sub};

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut m = Matrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Matrix::from_fn(rows.len(), cols, |i, j| rows[i][j])
    }

    pub fn diagonal(d: &[f64]) -> Self {
        Matrix::from_fn(d.len(), d.len(), |i, j| if i == j { d[i] } else { 0.0 })
    }

    /// `[[a, b], [c, d]]` from four equally sized square blocks.
    pub fn from_blocks(a: &Matrix, b: &Matrix, c: &Matrix, d: &Matrix) -> Self {
        let n = a.rows;
        Matrix::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
            (true, true) => a[(i, j)],
            (true, false) => b[(i, j - n)],
            (false, true) => c[(i - n, j)],
            (false, false) => d[(i - n, j - n)],
        })
    }

    /// The `rows × cols` block starting at `(r0, c0)`.
    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Matrix {
        Matrix::from_fn(rows, cols, |i, j| self[(r0 + i, c0 + j)])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scale(&self, c: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * c).collect(),
        }
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len(), "dimension mismatch in matrix-vector product");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `uᵀ A v`.
    pub fn bilinear(&self, u: &[f64], v: &[f64]) -> f64 {
        u.iter().zip(self.mul_vec(v)).map(|(a, b)| a * b).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(libm::fabs(*v)))
    }

    /// Max-norm of `self - other`.
    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max(libm::fabs(a - b)))
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    /// Average with the transpose; removes roundoff asymmetry.
    pub fn symmetrized(&self) -> Matrix {
        Matrix::from_fn(self.rows, self.cols, |i, j| 0.5 * (self[(i, j)] + self[(j, i)]))
    }

    pub fn lu(&self) -> Lu {
        Lu::new(self)
    }

    pub fn determinant(&self) -> f64 {
        self.lu().determinant()
    }

    pub fn inverse(&self) -> Option<Matrix> {
        self.lu().inverse()
    }
}

/// Serialized as a list of rows.
#[cfg(feature = "serde")]
impl serde::Serialize for Matrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> core::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let mut seq = s.serialize_seq(Some(self.rows))?;
        for i in 0..self.rows {
            seq.serialize_element(self.row(i))?;
        }
        seq.end()
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

impl Mul for &Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch in matrix product");
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

impl Add for &Matrix {
    type Output = Matrix;
    fn add(self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &Matrix {
    type Output = Matrix;
    fn sub(self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

/// LU factorization with partial pivoting, `P A = L U`.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: Matrix,
    perm: Vec<usize>,
    sign: f64,
    singular: bool,
}

impl Lu {
    pub fn new(a: &Matrix) -> Lu {
        assert_eq!(a.rows, a.cols, "LU needs a square matrix");
        let n = a.rows;
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        let mut singular = false;
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| libm::fabs(lu[(i, k)]).total_cmp(&libm::fabs(lu[(j, k)])))
                .unwrap_or(k);
            if lu[(p, k)] == 0.0 {
                singular = true;
                continue;
            }
            if p != k {
                for j in 0..n {
                    let t = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = t;
                }
                perm.swap(k, p);
                sign = -sign;
            }
            for i in k + 1..n {
                let f = lu[(i, k)] / lu[(k, k)];
                lu[(i, k)] = f;
                if f != 0.0 {
                    for j in k + 1..n {
                        lu[(i, j)] -= f * lu[(k, j)];
                    }
                }
            }
        }
        Lu {
            lu,
            perm,
            sign,
            singular,
        }
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    pub fn determinant(&self) -> f64 {
        if self.singular {
            return 0.0;
        }
        (0..self.lu.rows).fold(self.sign, |d, i| d * self.lu[(i, i)])
    }

    pub fn solve(&self, b: &[f64]) -> Option<Vec<f64>> {
        if self.singular {
            return None;
        }
        let n = self.lu.rows;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                x[i] -= self.lu[(i, j)] * x[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                x[i] -= self.lu[(i, j)] * x[j];
            }
            x[i] /= self.lu[(i, i)];
        }
        Some(x)
    }

    pub fn inverse(&self) -> Option<Matrix> {
        let n = self.lu.rows;
        let mut inv = Matrix::zeros(n, n);
        for j in 0..n {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            let col = self.solve(&e)?;
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        Some(inv)
    }
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
pub fn symmetric_eigenvalues(a: &Matrix) -> Vec<f64> {
    assert_eq!(a.rows, a.cols, "eigenvalues need a square matrix");
    let n = a.rows;
    let mut m = a.symmetrized();
    let scale = m.max_abs();
    if scale == 0.0 {
        return vec![0.0; n];
    }
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)] * m[(i, j)])
            .sum();
        if off <= (f64::EPSILON * scale) * (f64::EPSILON * scale) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = libm::copysign(1.0, theta) / (libm::fabs(theta) + libm::sqrt(theta * theta + 1.0));
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (m[(k, p)], m[(k, q)]);
                    m[(k, p)] = c * akp - s * akq;
                    m[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (m[(p, k)], m[(q, k)]);
                    m[(p, k)] = c * apk - s * aqk;
                    m[(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| m[(i, i)]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Counts of positive, negative and zero eigenvalues, with zero meaning
/// `|λ| <= rel_zero · max|λ|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Signature {
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
}

pub fn signature(a: &Matrix, rel_zero: f64) -> Signature {
    signature_of(&symmetric_eigenvalues(a), rel_zero)
}

pub fn signature_of(eigenvalues: &[f64], rel_zero: f64) -> Signature {
    let largest = eigenvalues.iter().fold(0.0, |m: f64, v| m.max(libm::fabs(*v)));
    let threshold = rel_zero * largest;
    let mut s = Signature {
        positive: 0,
        negative: 0,
        zero: 0,
    };
    for &l in eigenvalues {
        if libm::fabs(l) <= threshold {
            s.zero += 1;
        } else if l > 0.0 {
            s.positive += 1;
        } else {
            s.negative += 1;
        }
    }
    s
}

/// Singular values by one-sided (Hestenes) Jacobi, descending.
pub fn singular_values(a: &Matrix) -> Vec<f64> {
    let mut u = a.clone();
    let (m, n) = (u.rows, u.cols);
    for _sweep in 0..100 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for i in 0..m {
                    alpha += u[(i, p)] * u[(i, p)];
                    beta += u[(i, q)] * u[(i, q)];
                    gamma += u[(i, p)] * u[(i, q)];
                }
                if gamma == 0.0 || libm::fabs(gamma) <= f64::EPSILON * libm::sqrt(alpha * beta) {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = libm::copysign(1.0, zeta) / (libm::fabs(zeta) + libm::sqrt(1.0 + zeta * zeta));
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = c * t;
                for i in 0..m {
                    let (up, uq) = (u[(i, p)], u[(i, q)]);
                    u[(i, p)] = c * up - s * uq;
                    u[(i, q)] = s * up + c * uq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = (0..n)
        .map(|j| libm::sqrt((0..m).map(|i| u[(i, j)] * u[(i, j)]).sum()))
        .collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Solve `A z = b` by Gaussian elimination with partial pivoting on the
/// values, for any [`Scalar`] (so derivatives of the solution propagate).
/// `a` is row-major `n × n`. Returns `None` on an exactly zero pivot.
pub fn solve_generic<T: Scalar>(a: &[T], b: &[T]) -> Option<Vec<T>> {
    let n = b.len();
    assert_eq!(a.len(), n * n, "solve_generic: shape mismatch");
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    for k in 0..n {
        let p =
            (k..n).max_by(|&i, &j| libm::fabs(a[i * n + k].value()).total_cmp(&libm::fabs(a[j * n + k].value())))?;
        if a[p * n + k].value() == 0.0 {
            return None;
        }
        if p != k {
            for j in 0..n {
                a.swap(k * n + j, p * n + j);
            }
            b.swap(k, p);
        }
        for i in k + 1..n {
            let f = a[i * n + k].divide(&a[k * n + k]);
            for j in k + 1..n {
                a[i * n + j] = a[i * n + j].minus(&f.times(&a[k * n + j]));
            }
            b[i] = b[i].minus(&f.times(&b[k]));
        }
    }
    let mut z: Vec<T> = b.clone();
    for i in (0..n).rev() {
        let mut acc = b[i].clone();
        for j in i + 1..n {
            acc = acc.minus(&a[i * n + j].times(&z[j]));
        }
        z[i] = acc.divide(&a[i * n + i]);
    }
    Some(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn lu_determinant_inverse_and_solve() {
        let a = Matrix::from_rows(&[&[0.0, 2.0, 1.0], &[1.0, 1.0, 0.0], &[3.0, 0.0, 1.0]]);
        assert_relative_eq!(a.determinant(), -5.0, max_relative = 1e-14);
        let inv = a.inverse().unwrap();
        assert!((&a * &inv).max_abs_diff(&Matrix::identity(3)) < 1e-14);
        let x = a.lu().solve(&[3.0, 2.0, 4.0]).unwrap();
        for (got, want) in x.iter().zip([1.0, 1.0, 1.0]) {
            assert_relative_eq!(*got, want, max_relative = 1e-14);
        }
        let s = Matrix::from_rows(&[&[1.0, 2.0], &[2.0, 4.0]]);
        assert!(s.lu().is_singular() || s.determinant().abs() < 1e-15);
    }

    #[test]
    fn jacobi_eigenvalues_agree_with_nalgebra() {
        let a = Matrix::from_rows(&[
            &[4.0, 1.0, -2.0, 0.5],
            &[1.0, -3.0, 0.0, 1.0],
            &[-2.0, 0.0, 1.0, 0.25],
            &[0.5, 1.0, 0.25, 2.0],
        ]);
        let ours = symmetric_eigenvalues(&a);
        let na = nalgebra::DMatrix::from_row_slice(4, 4, &a.data);
        let mut theirs: Vec<f64> = na.symmetric_eigen().eigenvalues.iter().copied().collect();
        theirs.sort_by(f64::total_cmp);
        for (o, t) in ours.iter().zip(&theirs) {
            assert_relative_eq!(*o, *t, epsilon = 1e-12);
        }
        let negative = theirs.iter().filter(|v| **v < 0.0).count();
        assert_eq!(
            signature(&a, 1e-8),
            Signature {
                positive: 4 - negative,
                negative,
                zero: 0
            }
        );
    }

    #[test]
    fn singular_values_agree_with_nalgebra_and_resolve_zeros() {
        let a = Matrix::from_rows(&[
            &[0.0, 0.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 0.0],
            &[1.3, -0.2, -2.0, 0.0],
            &[0.4, 2.2, 0.0, -2.0],
        ]);
        let ours = singular_values(&a);
        let na = nalgebra::DMatrix::from_row_slice(4, 4, &a.data);
        let mut theirs: Vec<f64> = na.singular_values().iter().copied().collect();
        theirs.sort_by(|x, y| y.total_cmp(x));
        for (o, t) in ours.iter().zip(&theirs) {
            assert_relative_eq!(*o, *t, epsilon = 1e-12);
        }
        assert!(ours[2] < 1e-14 && ours[3] < 1e-14);
    }

    #[test]
    fn generic_solve_matches_lu_on_plain_numbers() {
        let a = [2.0, 1.0, 0.5, 1.0, 3.0, -1.0, 0.0, 1.0, 4.0];
        let b = [1.0, -2.0, 0.5];
        let z = solve_generic(&a, &b).unwrap();
        let lu = Matrix::from_rows(&[&a[0..3], &a[3..6], &a[6..9]])
            .lu()
            .solve(&b)
            .unwrap();
        for (p, q) in z.iter().zip(&lu) {
            assert_relative_eq!(*p, *q, max_relative = 1e-14);
        }
        assert!(solve_generic(&[0.0, 0.0, 0.0, 0.0], &[1.0, 1.0]).is_none());
    }
}
