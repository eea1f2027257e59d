//! Dense row-major matrices over any [`Scalar`], with the elimination routines the
//! rest of the crate relies on: reduced row echelon form, null spaces, determinants,
//! leading principal minors and the exact inertia of symmetric matrices.

use std::fmt;
use std::ops::{Index, IndexMut};

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::{format_rational, Scalar};
use crate::Rational;

#[derive(Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut list = f.debug_list();
        for r in 0..self.rows {
            list.entry(&&self.data[r * self.cols..(r + 1) * self.cols]);
        }
        list.finish()
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    fn index(&self, (r, c): (usize, usize)) -> &T {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut T {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

impl<T: Clone> Matrix<T> {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn filled(rows: usize, cols: usize, value: T) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    /// Builds from row vectors; all rows must have equal length.
    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Matrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
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

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn entries(&self) -> impl Iterator<Item = &T> {
        self.data.iter()
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        Matrix::from_fn(self.cols, self.rows, |r, c| self[(c, r)].clone())
    }

    pub fn map<U: Clone>(&self, f: impl Fn(&T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    /// The top-left `k x k` block.
    pub fn leading_block(&self, k: usize) -> Self {
        Matrix::from_fn(k, k, |r, c| self[(r, c)].clone())
    }
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix::filled(rows, cols, T::zero())
    }

    pub fn identity(n: usize) -> Self {
        Matrix::from_fn(n, n, |r, c| if r == c { T::one() } else { T::zero() })
    }

    /// The all-ones matrix `J_{rows,cols}`.
    pub fn ones(rows: usize, cols: usize) -> Self {
        Matrix::filled(rows, cols, T::one())
    }

    pub fn scale(&self, k: &T) -> Self {
        self.map(|v| v.clone() * k.clone())
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.clone() + b.clone())
            .collect();
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-T::one()))
    }

    /// `self += k * other`.
    pub fn add_scaled(&mut self, k: &T, other: &Self) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += &(k.clone() * b.clone());
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        let mut out = Matrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(r, k)];
                if a.is_zero() {
                    continue;
                }
                for c in 0..other.cols {
                    let prod = a.clone() * other[(k, c)].clone();
                    out[(r, c)] += &prod;
                }
            }
        }
        out
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|r| {
                (r + 1..self.cols).all(|c| (self[(r, c)].clone() - self[(c, r)].clone()).is_negligible())
            })
    }

    /// True when every entry equals `value`.
    pub fn is_constant(&self, value: &T) -> bool {
        self.data.iter().all(|v| (v.clone() - value.clone()).is_negligible())
    }

    /// Reduced row echelon form; returns the reduced matrix and its pivot columns.
    ///
    /// Pivoting picks the first nonzero entry for exact scalars and the largest
    /// magnitude for floating point ones.
    pub fn rref(&self) -> (Self, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            let candidates = (row..m.rows).filter(|&r| !m[(r, col)].is_negligible());
            let chosen = if T::EXACT {
                candidates.into_iter().next()
            } else {
                candidates.max_by(|&a, &b| {
                    m[(a, col)]
                        .abs()
                        .partial_cmp(&m[(b, col)].abs())
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
            };
            let Some(p) = chosen else { continue };
            m.swap_rows(row, p);
            let inv = T::one() / m[(row, col)].clone();
            for c in col..m.cols {
                m[(row, c)] = m[(row, c)].clone() * inv.clone();
            }
            for r in 0..m.rows {
                if r == row || m[(r, col)].is_zero() {
                    continue;
                }
                let factor = m[(r, col)].clone();
                for c in col..m.cols {
                    let delta = factor.clone() * m[(row, c)].clone();
                    m[(r, c)] -= &delta;
                }
            }
            pivots.push(col);
            row += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// A basis of `{v : self * v = 0}`, one vector per free column.
    pub fn nullspace(&self) -> Vec<Vec<T>> {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![T::zero(); self.cols];
                v[f] = T::one();
                for (i, &p) in pivots.iter().enumerate() {
                    v[p] = -r[(i, f)].clone();
                }
                v
            })
            .collect()
    }

    pub fn determinant(&self) -> Result<T> {
        if !self.is_square() {
            return Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let mut m = self.clone();
        let mut det = T::one();
        for col in 0..m.cols {
            let Some(p) = (col..m.rows).find(|&r| !m[(r, col)].is_negligible()) else {
                return Ok(T::zero());
            };
            if p != col {
                m.swap_rows(p, col);
                det = -det;
            }
            let pivot = m[(col, col)].clone();
            det = det * pivot.clone();
            for r in col + 1..m.rows {
                if m[(r, col)].is_zero() {
                    continue;
                }
                let factor = m[(r, col)].clone() / pivot.clone();
                for c in col..m.cols {
                    let delta = factor.clone() * m[(col, c)].clone();
                    m[(r, c)] -= &delta;
                }
            }
        }
        Ok(det)
    }

    /// Determinants of the top-left `k x k` blocks, `k = 1..=n`.
    pub fn leading_principal_minors(&self) -> Result<Vec<T>> {
        if !self.is_square() {
            return Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        (1..=self.rows).map(|k| self.leading_block(k).determinant()).collect()
    }

    /// Counts of positive, negative and zero eigenvalues of a symmetric matrix,
    /// obtained by symmetric elimination (Sylvester's law of inertia), without
    /// computing eigenvalues.
    pub fn inertia(&self) -> Result<Inertia> {
        if !self.is_symmetric() {
            return Err(Error::NotSymmetric);
        }
        let mut a = self.clone();
        let n = a.rows;
        let mut inertia = Inertia::default();
        let mut k = 0;
        while k < n {
            if let Some(p) = (k..n).find(|&i| !a[(i, i)].is_negligible()) {
                a.swap_symmetric(k, p);
            } else {
                // Zero diagonal: a nonzero off-diagonal a_ij lets the congruence
                // row_i += row_j, col_i += col_j create the pivot 2*a_ij.
                let pair = (k..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).find(|&(i, j)| !a[(i, j)].is_negligible());
                let Some((i, j)) = pair else {
                    inertia.zero += n - k;
                    break;
                };
                for c in 0..n {
                    let v = a[(j, c)].clone();
                    a[(i, c)] += &v;
                }
                for r in 0..n {
                    let v = a[(r, j)].clone();
                    a[(r, i)] += &v;
                }
                a.swap_symmetric(k, i);
            }
            let pivot = a[(k, k)].clone();
            if pivot > T::zero() {
                inertia.positive += 1;
            } else {
                inertia.negative += 1;
            }
            for r in k + 1..n {
                if a[(r, k)].is_zero() {
                    continue;
                }
                let factor = a[(r, k)].clone() / pivot.clone();
                for c in k..n {
                    let delta = factor.clone() * a[(k, c)].clone();
                    a[(r, c)] -= &delta;
                }
            }
            for c in k + 1..n {
                a[(k, c)] = T::zero();
            }
            k += 1;
        }
        Ok(inertia)
    }

    /// Eigenvalues of a symmetric matrix in descending order, in `f64`.
    pub fn float_eigenvalues(&self) -> Result<Vec<f64>> {
        if !self.is_symmetric() {
            return Err(Error::NotSymmetric);
        }
        let n = self.rows;
        let dm = nalgebra::DMatrix::from_fn(n, n, |r, c| self[(r, c)].to_f64());
        let eig = nalgebra::SymmetricEigen::try_new(dm, 1e-14, 10_000)
            .ok_or_else(|| Error::IdentityViolated("symmetric eigen solver did not converge".into()))?;
        let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        values.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
        Ok(values)
    }

    pub fn to_f64(&self) -> Matrix<f64> {
        self.map(Scalar::to_f64)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    fn swap_symmetric(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        self.swap_rows(a, b);
        for r in 0..self.rows {
            self.data.swap(r * self.cols + a, r * self.cols + b);
        }
    }
}

impl Matrix<Rational> {
    pub fn to_string_rows(&self) -> Vec<Vec<String>> {
        (0..self.rows)
            .map(|r| self.row(r).iter().map(format_rational).collect())
            .collect()
    }
}

impl Serialize for Matrix<Rational> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_string_rows().serialize(s)
    }
}

impl Serialize for Matrix<f64> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Inertia {
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    fn rm(rows: &[&[i64]]) -> Matrix<Rational> {
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&v| int(v)).collect()).collect())
    }

    #[test]
    fn rref_and_nullspace() {
        let m = rm(&[&[1, 2, 3], &[2, 4, 6], &[1, 0, 1]]);
        assert_eq!(m.rank(), 2);
        let ns = m.nullspace();
        assert_eq!(ns.len(), 1);
        let v = Matrix::from_rows(ns[0].iter().map(|x| vec![x.clone()]).collect());
        assert!(m.mul(&v).is_constant(&int(0)));
    }

    #[test]
    fn determinant_and_minors() {
        let m = rm(&[&[2, 1], &[1, 3]]);
        assert_eq!(m.determinant().unwrap(), int(5));
        assert_eq!(m.leading_principal_minors().unwrap(), vec![int(2), int(5)]);
        let swap = rm(&[&[0, 1], &[1, 0]]);
        assert_eq!(swap.determinant().unwrap(), int(-1));
    }

    #[test]
    fn inertia_handles_zero_diagonal() {
        let m = rm(&[&[0, 1, 0], &[1, 0, 0], &[0, 0, 0]]);
        assert_eq!(
            m.inertia().unwrap(),
            Inertia {
                positive: 1,
                negative: 1,
                zero: 1
            }
        );
        let pd = Matrix::from_rows(vec![vec![rat(1, 2), int(0)], vec![int(0), int(3)]]);
        assert_eq!(pd.inertia().unwrap().positive, 2);
    }

    #[test]
    fn float_eigenvalues_sorted() {
        let m: Matrix<f64> = Matrix::from_rows(vec![vec![1.0, 0.0], vec![0.0, 2.0]]);
        assert_eq!(m.float_eigenvalues().unwrap(), vec![2.0, 1.0]);
        let asym: Matrix<f64> = Matrix::from_rows(vec![vec![1.0, 1.0], vec![0.0, 2.0]]);
        assert_eq!(asym.float_eigenvalues(), Err(Error::NotSymmetric));
    }

    #[test]
    fn inertia_matches_eigenvalue_signs_for_random_symmetric() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let n = rng.gen_range(1..7);
            let mut m = Matrix::<Rational>::zeros(n, n);
            for r in 0..n {
                for c in r..n {
                    let v = int(rng.gen_range(-3..4));
                    m[(r, c)] = v.clone();
                    m[(c, r)] = v;
                }
            }
            let eig = m.float_eigenvalues().unwrap();
            let inertia = m.inertia().unwrap();
            assert_eq!(inertia.positive, eig.iter().filter(|&&e| e > 1e-9).count());
            assert_eq!(inertia.negative, eig.iter().filter(|&&e| e < -1e-9).count());
        }
    }
}
