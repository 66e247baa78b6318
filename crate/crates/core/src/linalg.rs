//! Dense matrices over [`Scalar`]: determinants, elimination, solves.
//!
//! Exact matrices go through fraction-free or exact rational elimination.
//! As soon as one entry is a float the whole computation runs in floats at the
//! largest precision present, with partial pivoting.

use std::fmt;

use rug::{Float, Integer, Rational};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::scalar::{Scalar, DEFAULT_PRECISION};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LinalgError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is singular")]
    Singular,
    #[error("characteristic polynomial has fewer than {0} real roots")]
    NonRealSpectrum(usize),
    #[error("two eigenvalues share the same absolute value")]
    RepeatedModulus,
}

/// Row-major storage; semantically column `j` is the `j`-th basis vector.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Scalar>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self.get(i, j).to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![Scalar::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Scalar::one());
        }
        m
    }

    pub fn diag(values: &[Scalar]) -> Self {
        let n = values.len();
        let mut m = Matrix::zeros(n, n);
        for (i, v) in values.iter().enumerate() {
            m.set(i, i, v.clone());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Scalar>>) -> Result<Self, LinalgError> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(LinalgError::DimensionMismatch("ragged rows".into()));
        }
        Ok(Matrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    /// Convenience constructor from small integer entries, row-major.
    pub fn from_i64(rows: &[&[i64]]) -> Self {
        let rows = rows.iter().map(|r| r.iter().map(|&v| Scalar::int(v)).collect()).collect();
        Matrix::from_rows(rows).expect("rectangular literal")
    }

    pub fn from_columns(cols: &[Vec<Scalar>]) -> Result<Self, LinalgError> {
        let c = cols.len();
        let r = cols.first().map_or(0, |col| col.len());
        if cols.iter().any(|col| col.len() != r) {
            return Err(LinalgError::DimensionMismatch("ragged columns".into()));
        }
        let mut m = Matrix::zeros(r, c);
        for (j, col) in cols.iter().enumerate() {
            for (i, v) in col.iter().enumerate() {
                m.set(i, j, v.clone());
            }
        }
        Ok(m)
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

    pub fn get(&self, i: usize, j: usize) -> &Scalar {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Scalar) {
        self.data[i * self.cols + j] = v;
    }

    pub fn column(&self, j: usize) -> Vec<Scalar> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn row(&self, i: usize) -> Vec<Scalar> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn to_rows(&self) -> Vec<Vec<Scalar>> {
        (0..self.rows).map(|i| self.row(i)).collect()
    }

    pub fn entries(&self) -> &[Scalar] {
        &self.data
    }

    /// The first `k` columns as a `rows x k` matrix.
    pub fn leading_columns(&self, k: usize) -> Matrix {
        let cols: Vec<Vec<Scalar>> = (0..k).map(|j| self.column(j)).collect();
        Matrix::from_columns(&cols).unwrap_or_else(|_| Matrix::zeros(self.rows, 0))
    }

    pub fn is_exact(&self) -> bool {
        self.data.iter().all(Scalar::is_exact)
    }

    pub fn precision(&self) -> Option<u32> {
        Scalar::max_precision(&self.data)
    }

    pub fn to_float(&self, prec: u32) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|s| Scalar::Float(s.to_float(prec))).collect(),
        }
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn scale(&self, s: &Scalar) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|v| v * s).collect() }
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matrix product shape");
        let mut out = Matrix::zeros(self.rows, other.cols);
        if self.is_exact() && other.is_exact() {
            for i in 0..self.rows {
                for j in 0..other.cols {
                    let mut acc = Rational::new();
                    for k in 0..self.cols {
                        if let (Scalar::Exact(a), Scalar::Exact(b)) = (self.get(i, k), other.get(k, j)) {
                            acc += Rational::from(a * b);
                        }
                    }
                    out.set(i, j, Scalar::Exact(acc));
                }
            }
        } else {
            for i in 0..self.rows {
                for j in 0..other.cols {
                    let mut acc = Scalar::zero();
                    for k in 0..self.cols {
                        acc = acc + self.get(i, k) * other.get(k, j);
                    }
                    out.set(i, j, acc);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Scalar]) -> Vec<Scalar> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = Scalar::zero();
                for (k, x) in v.iter().enumerate() {
                    acc = acc + self.get(i, k) * x;
                }
                acc
            })
            .collect()
    }

    pub fn trace(&self) -> Scalar {
        let mut acc = Scalar::zero();
        for i in 0..self.rows.min(self.cols) {
            acc = acc + self.get(i, i);
        }
        acc
    }

    pub fn det(&self) -> Scalar {
        assert!(self.is_square(), "determinant of a non-square matrix");
        if self.rows == 0 {
            return Scalar::one();
        }
        if self.is_exact() {
            Scalar::Exact(self.det_bareiss())
        } else {
            self.det_float()
        }
    }

    /// Clears denominators row by row, then runs Bareiss over the integers.
    fn det_bareiss(&self) -> Rational {
        let n = self.rows;
        let mut scale = Integer::from(1);
        let mut a: Vec<Vec<Integer>> = Vec::with_capacity(n);
        for i in 0..n {
            let mut l = Integer::from(1);
            for j in 0..n {
                if let Scalar::Exact(r) = self.get(i, j) {
                    l.lcm_mut(r.denom());
                }
            }
            let row = (0..n)
                .map(|j| match self.get(i, j) {
                    Scalar::Exact(r) => r.numer() * Integer::from(&l / r.denom()),
                    Scalar::Float(_) => unreachable!(),
                })
                .collect();
            scale *= &l;
            a.push(row);
        }
        let mut sign = 1;
        let mut prev = Integer::from(1);
        for k in 0..n - 1 {
            if a[k][k] == 0 {
                match (k + 1..n).find(|&i| a[i][k] != 0) {
                    Some(p) => {
                        a.swap(k, p);
                        sign = -sign;
                    }
                    None => return Rational::new(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = Integer::from(&a[i][j] * &a[k][k]) - Integer::from(&a[i][k] * &a[k][j]);
                    a[i][j] = v.div_exact(&prev);
                }
            }
            prev = a[k][k].clone();
        }
        let d = Integer::from(&a[n - 1][n - 1] * sign);
        Rational::from((d, scale))
    }

    fn det_float(&self) -> Scalar {
        let n = self.rows;
        let prec = self.precision().unwrap_or(DEFAULT_PRECISION);
        let mut a: Vec<Vec<Float>> = (0..n).map(|i| (0..n).map(|j| self.get(i, j).to_float(prec)).collect()).collect();
        let mut det = Float::with_val(prec, 1);
        for k in 0..n {
            let p = (k..n).max_by(|&x, &y| a[x][k].clone().abs().partial_cmp(&a[y][k].clone().abs()).unwrap()).unwrap();
            if a[p][k].is_zero() {
                return Scalar::Float(Float::with_val(prec, 0));
            }
            if p != k {
                a.swap(p, k);
                det = -det;
            }
            det *= &a[k][k];
            for i in k + 1..n {
                let f = Float::with_val(prec, &a[i][k] / &a[k][k]);
                for j in k..n {
                    let t = Float::with_val(prec, &f * &a[k][j]);
                    a[i][j] -= t;
                }
            }
        }
        Scalar::Float(det)
    }

    /// Tolerance used to decide that a float pivot is zero: `2^(-prec/2)` times the
    /// largest entry.
    fn elimination_tolerance(&self) -> Float {
        let prec = self.precision().unwrap_or(DEFAULT_PRECISION);
        let mut max = Float::with_val(prec, 0);
        for v in &self.data {
            let a = v.to_float(prec).abs();
            if a > max {
                max = a;
            }
        }
        if max.is_zero() {
            max = Float::with_val(prec, 1);
        }
        let eps = Float::with_val(prec, Float::i_exp(1, -(prec as i32) / 2));
        max * eps
    }

    /// Reduced row echelon form. Returns the reduced matrix and the pivot columns.
    /// Exact matrices take the first nonzero pivot; float matrices take the
    /// largest pivot and treat entries below tolerance as zero.
    pub fn rref(&self) -> (Matrix, Vec<usize>) {
        let exact = self.is_exact();
        let tol = if exact { Float::new(2) } else { self.elimination_tolerance() };
        let mut m = if exact { self.clone() } else { self.to_float(self.precision().unwrap_or(DEFAULT_PRECISION)) };
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let pivot_row = if exact {
                (r..m.rows).find(|&i| !m.get(i, c).is_zero())
            } else {
                let best = (r..m.rows).max_by(|&x, &y| {
                    m.get(x, c).abs().partial_cmp(&m.get(y, c).abs()).unwrap_or(std::cmp::Ordering::Equal)
                });
                best.filter(|&i| !m.get(i, c).is_negligible(&tol))
            };
            let Some(p) = pivot_row else {
                if !exact {
                    for i in r..m.rows {
                        m.set(i, c, Scalar::Float(Float::with_val(tol.prec(), 0)));
                    }
                }
                continue;
            };
            m.swap_rows(r, p);
            let inv = m.get(r, c).recip();
            for j in 0..m.cols {
                let v = m.get(r, j) * &inv;
                m.set(r, j, v);
            }
            for i in 0..m.rows {
                if i == r || m.get(i, c).is_zero() {
                    continue;
                }
                let f = m.get(i, c).clone();
                for j in 0..m.cols {
                    let v = m.get(i, j) - &(&f * m.get(r, j));
                    m.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// A basis of the right nullspace, one vector per free column, with the free
    /// coordinate set to 1.
    pub fn nullspace(&self) -> Vec<Vec<Scalar>> {
        let (r, pivots) = self.rref();
        let mut basis = Vec::new();
        for free in (0..self.cols).filter(|c| !pivots.contains(c)) {
            let mut v = vec![Scalar::zero(); self.cols];
            v[free] = Scalar::one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -r.get(row, free);
            }
            basis.push(v);
        }
        basis
    }

    pub fn solve(&self, b: &[Scalar]) -> Result<Vec<Scalar>, LinalgError> {
        if !self.is_square() || b.len() != self.rows {
            return Err(LinalgError::DimensionMismatch("solve".into()));
        }
        let n = self.rows;
        let mut aug = Matrix::zeros(n, n + 1);
        for i in 0..n {
            for j in 0..n {
                aug.set(i, j, self.get(i, j).clone());
            }
            aug.set(i, n, b[i].clone());
        }
        let (r, pivots) = aug.rref();
        if pivots.len() != n || pivots.iter().any(|&p| p >= n) {
            return Err(LinalgError::Singular);
        }
        Ok((0..n).map(|i| r.get(i, n).clone()).collect())
    }

    pub fn inverse(&self) -> Result<Matrix, LinalgError> {
        if !self.is_square() {
            return Err(LinalgError::DimensionMismatch("inverse".into()));
        }
        let n = self.rows;
        let mut aug = Matrix::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug.set(i, j, self.get(i, j).clone());
            }
            aug.set(i, n + i, Scalar::one());
        }
        let (r, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] >= n {
            return Err(LinalgError::Singular);
        }
        let mut inv = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                inv.set(i, j, r.get(i, n + j).clone());
            }
        }
        Ok(inv)
    }

    /// True when the matrix is `c * I` for some nonzero `c`. Float entries are
    /// compared relative to `c` with the given tolerance.
    pub fn is_scalar_multiple_of_identity(&self, tol: Option<&Float>) -> bool {
        if !self.is_square() || self.rows == 0 {
            return false;
        }
        let c = self.get(0, 0).clone();
        if c.is_zero() {
            return false;
        }
        for i in 0..self.rows {
            for j in 0..self.cols {
                let expected = if i == j { c.clone() } else { Scalar::zero() };
                let diff = (self.get(i, j) - &expected) / &c;
                let ok = match tol {
                    Some(t) if !diff.is_exact() => diff.is_negligible(t),
                    _ => diff.is_zero(),
                };
                if !ok {
                    return false;
                }
            }
        }
        true
    }
}

impl Serialize for Matrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_rows().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Matrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Matrix, D::Error> {
        let rows = Vec::<Vec<Scalar>>::deserialize(deserializer)?;
        Matrix::from_rows(rows).map_err(serde::de::Error::custom)
    }
}
