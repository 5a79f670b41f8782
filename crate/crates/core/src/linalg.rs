//! Exact rational dense and sparse linear algebra.
//!
//! Every rank, kernel and determinant decision made elsewhere in the crate goes
//! through this module, so nothing here ever compares against a tolerance.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Arbitrary precision rational, always kept in lowest terms with a positive
/// denominator.
pub type Rational = BigRational;

/// Dense column vector.
pub type Vector = Vec<Rational>;

pub fn q(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn frac(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"p/q"`, `"p"` or `"-p/q"`.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(Rational::new(n, d))
        }
        None => Some(Rational::from_integer(s.parse().ok()?)),
    }
}

pub fn format_rational(x: &Rational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn to_f64(x: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    match (x.numer().to_f64(), x.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() && d != 0.0 => n / d,
        _ => {
            // Shift both to keep the quotient representable.
            let bits = x.numer().bits().max(x.denom().bits()) as i64 - 60;
            let shift = bits.max(0) as usize;
            let n = (x.numer() >> shift).to_f64().unwrap_or(0.0);
            let d = (x.denom() >> shift).to_f64().unwrap_or(1.0);
            n / d
        }
    }
}

pub fn is_zero_vec(v: &[Rational]) -> bool {
    v.iter().all(Zero::is_zero)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinalgError {
    #[error("matrix is {rows}x{cols}, expected a square matrix")]
    NonSquare { rows: usize, cols: usize },
    #[error("right-hand side is not in the image of the matrix")]
    NoSolution,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

/// Dense row-major matrix over the rationals.
#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols)
                .map(|j| format_rational(self.get(i, j)))
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Rational::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Matrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| q(x)).collect())
                .collect(),
        )
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(rows: usize, columns: &[Vector]) -> Self {
        let mut m = Self::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), rows, "column length mismatch");
            for (i, x) in col.iter().enumerate() {
                if !x.is_zero() {
                    m.set(i, j, x.clone());
                }
            }
        }
        m
    }

    pub fn diagonal(entries: &[Rational]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, x) in entries.iter().enumerate() {
            m.set(i, i, x.clone());
        }
        m
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

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, x: Rational) {
        self.data[i * self.cols + j] = x;
    }

    pub fn entries(&self) -> &[Rational] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vector {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn columns(&self) -> Vec<Vector> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
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

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "incompatible product");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        let v = out.get(i, j) + a * b;
                        out.set(i, j, v);
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Vector {
        assert_eq!(self.cols, v.len(), "incompatible matrix-vector product");
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                    .fold(Rational::zero(), |acc, (a, b)| acc + a * b)
            })
            .collect()
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

    pub fn scale(&self, c: &Rational) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * c).collect(),
        }
    }

    pub fn neg(&self) -> Matrix {
        self.scale(&-Rational::one())
    }

    /// Rows `row_idx` and columns `col_idx`, in the given order.
    pub fn select(&self, row_idx: &[usize], col_idx: &[usize]) -> Matrix {
        let mut m = Matrix::zeros(row_idx.len(), col_idx.len());
        for (a, &i) in row_idx.iter().enumerate() {
            for (b, &j) in col_idx.iter().enumerate() {
                let x = self.get(i, j);
                if !x.is_zero() {
                    m.set(a, b, x.clone());
                }
            }
        }
        m
    }

    pub fn block_diagonal(a: &Matrix, b: &Matrix) -> Matrix {
        let mut m = Matrix::zeros(a.rows + b.rows, a.cols + b.cols);
        for i in 0..a.rows {
            for j in 0..a.cols {
                m.set(i, j, a.get(i, j).clone());
            }
        }
        for i in 0..b.rows {
            for j in 0..b.cols {
                m.set(a.rows + i, a.cols + j, b.get(i, j).clone());
            }
        }
        m
    }

    /// Reduced row echelon form, pivot columns, and the determinant of the
    /// accumulated row-operation matrix `T` with `T * self = reduced`.
    pub fn rref(&self) -> (Matrix, Vec<usize>, Rational) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut transform_det = Rational::one();
        let mut row = 0;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            let Some(p) = (row..m.rows).find(|&i| !m.get(i, col).is_zero()) else {
                continue;
            };
            if p != row {
                m.swap_rows(p, row);
                transform_det = -transform_det;
            }
            let inv = m.get(row, col).recip();
            transform_det *= &inv;
            for j in col..m.cols {
                let v = m.get(row, j) * &inv;
                m.set(row, j, v);
            }
            for i in 0..m.rows {
                if i == row {
                    continue;
                }
                let f = m.get(i, col).clone();
                if f.is_zero() {
                    continue;
                }
                for j in col..m.cols {
                    let v = m.get(row, j);
                    if !v.is_zero() {
                        let nv = m.get(i, j) - &f * v;
                        m.set(i, j, nv);
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        (m, pivots, transform_det)
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

    /// A basis of the null space, one vector per free column.
    pub fn kernel_basis(&self) -> Vec<Vector> {
        let (r, pivots, _) = self.rref();
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        (0..self.cols)
            .filter(|&j| !is_pivot[j])
            .map(|free| {
                let mut v = vec![Rational::zero(); self.cols];
                v[free] = Rational::one();
                for (row, &p) in pivots.iter().enumerate() {
                    v[p] = -r.get(row, free).clone();
                }
                v
            })
            .collect()
    }

    /// The pivot columns of the matrix itself, a basis of its column space.
    pub fn image_basis(&self) -> Vec<Vector> {
        let (_, pivots, _) = self.rref();
        pivots.into_iter().map(|j| self.column(j)).collect()
    }

    /// Some `x` with `self * x = b`.
    pub fn solve(&self, b: &[Rational]) -> Result<Vector, LinalgError> {
        if b.len() != self.rows {
            return Err(LinalgError::DimensionMismatch(format!(
                "rhs has length {}, matrix has {} rows",
                b.len(),
                self.rows
            )));
        }
        let mut aug = Matrix::zeros(self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                aug.set(i, j, self.get(i, j).clone());
            }
            aug.set(i, self.cols, b[i].clone());
        }
        let (r, pivots, _) = aug.rref();
        if pivots.last() == Some(&self.cols) {
            return Err(LinalgError::NoSolution);
        }
        let mut x = vec![Rational::zero(); self.cols];
        for (row, &p) in pivots.iter().enumerate() {
            x[p] = r.get(row, self.cols).clone();
        }
        Ok(x)
    }

    /// Solves for several right-hand sides at once; the columns of the result
    /// are the solutions.
    pub fn solve_many(&self, rhs: &[Vector]) -> Result<Vec<Vector>, LinalgError> {
        if rhs.is_empty() {
            return Ok(Vec::new());
        }
        let k = rhs.len();
        let mut aug = Matrix::zeros(self.rows, self.cols + k);
        for i in 0..self.rows {
            for j in 0..self.cols {
                aug.set(i, j, self.get(i, j).clone());
            }
        }
        for (c, b) in rhs.iter().enumerate() {
            if b.len() != self.rows {
                return Err(LinalgError::DimensionMismatch("rhs length".into()));
            }
            for (i, x) in b.iter().enumerate() {
                aug.set(i, self.cols + c, x.clone());
            }
        }
        let (r, pivots, _) = aug.rref();
        if pivots.iter().any(|&p| p >= self.cols) {
            return Err(LinalgError::NoSolution);
        }
        Ok((0..k)
            .map(|c| {
                let mut x = vec![Rational::zero(); self.cols];
                for (row, &p) in pivots.iter().enumerate() {
                    x[p] = r.get(row, self.cols + c).clone();
                }
                x
            })
            .collect())
    }

    pub fn det(&self) -> Result<Rational, LinalgError> {
        if !self.is_square() {
            return Err(LinalgError::NonSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let n = self.rows;
        let mut m = self.clone();
        let mut det = Rational::one();
        for col in 0..n {
            let Some(p) = (col..n).find(|&i| !m.get(i, col).is_zero()) else {
                return Ok(Rational::zero());
            };
            if p != col {
                m.swap_rows(p, col);
                det = -det;
            }
            let pivot = m.get(col, col).clone();
            for i in col + 1..n {
                let f = m.get(i, col) / &pivot;
                if f.is_zero() {
                    continue;
                }
                for j in col..n {
                    let v = m.get(col, j);
                    if !v.is_zero() {
                        let nv = m.get(i, j) - &f * v;
                        m.set(i, j, nv);
                    }
                }
            }
            det *= pivot;
        }
        Ok(det)
    }

    pub fn inverse(&self) -> Option<Matrix> {
        if !self.is_square() {
            return None;
        }
        let n = self.rows;
        let cols = self
            .solve_many(&Matrix::identity(n).columns())
            .ok()?;
        let inv = Matrix::from_columns(n, &cols);
        (self.mul(&inv) == Matrix::identity(n)).then_some(inv)
    }
}

/// Rank of a set of vectors of common length `dim`.
pub fn rank_of(dim: usize, vectors: &[Vector]) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    Matrix::from_columns(dim, vectors).rank()
}

/// Coordinates of each `x` in terms of the basis `basis` (which must span
/// every `x`).
pub fn coordinates(dim: usize, basis: &[Vector], xs: &[Vector]) -> Result<Vec<Vector>, LinalgError> {
    if xs.is_empty() {
        return Ok(Vec::new());
    }
    if basis.is_empty() {
        return if xs.iter().all(|x| is_zero_vec(x)) {
            Ok(vec![Vec::new(); xs.len()])
        } else {
            Err(LinalgError::NoSolution)
        };
    }
    Matrix::from_columns(dim, basis).solve_many(xs)
}

/// Determinant of `T` where `xs = basis * T`; both families must be bases of
/// the same subspace.
pub fn change_of_basis_det(dim: usize, xs: &[Vector], basis: &[Vector]) -> Result<Rational, LinalgError> {
    if xs.len() != basis.len() {
        return Err(LinalgError::DimensionMismatch(format!(
            "{} vectors against a basis of {}",
            xs.len(),
            basis.len()
        )));
    }
    if xs.is_empty() {
        return Ok(Rational::one());
    }
    let t = coordinates(dim, basis, xs)?;
    Matrix::from_columns(basis.len(), &t).det()
}

/// Basis of the intersection of two subspaces given by spanning families.
pub fn intersection(dim: usize, u: &[Vector], w: &[Vector]) -> Vec<Vector> {
    if u.is_empty() || w.is_empty() {
        return Vec::new();
    }
    let mut cols: Vec<Vector> = u.to_vec();
    cols.extend(w.iter().map(|v| v.iter().map(|x| -x).collect::<Vector>()));
    let m = Matrix::from_columns(dim, &cols);
    let ker = m.kernel_basis();
    let raw: Vec<Vector> = ker
        .iter()
        .map(|k| {
            let mut v = vec![Rational::zero(); dim];
            for (c, coeff) in k[..u.len()].iter().enumerate() {
                if coeff.is_zero() {
                    continue;
                }
                for (i, x) in u[c].iter().enumerate() {
                    if !x.is_zero() {
                        v[i] += coeff * x;
                    }
                }
            }
            v
        })
        .collect();
    independent_subset(dim, &raw)
}

/// A maximal linearly independent subfamily, preserving order.
pub fn independent_subset(dim: usize, vs: &[Vector]) -> Vec<Vector> {
    if vs.is_empty() {
        return Vec::new();
    }
    let m = Matrix::from_columns(dim, vs);
    let (_, pivots, _) = m.rref();
    pivots.into_iter().map(|j| vs[j].clone()).collect()
}

/// Vectors from `candidates` extending `base` (assumed independent) to a
/// basis of `span(base, candidates)`.
pub fn extend_basis(dim: usize, base: &[Vector], candidates: &[Vector]) -> Vec<Vector> {
    let mut all = base.to_vec();
    all.extend_from_slice(candidates);
    if all.is_empty() {
        return Vec::new();
    }
    let (_, pivots, _) = Matrix::from_columns(dim, &all).rref();
    pivots
        .into_iter()
        .filter(|&j| j >= base.len())
        .map(|j| all[j].clone())
        .collect()
}

/// Sparse matrix stored by columns; each column is sorted by row index and
/// holds no explicit zeros.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    columns: Vec<Vec<(usize, Rational)>>,
}

impl SparseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        SparseMatrix {
            rows,
            cols,
            columns: vec![Vec::new(); cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Adds `x` to entry `(i, j)`.
    pub fn add_entry(&mut self, i: usize, j: usize, x: Rational) {
        if x.is_zero() {
            return;
        }
        let col = &mut self.columns[j];
        match col.binary_search_by_key(&i, |(r, _)| *r) {
            Ok(pos) => {
                col[pos].1 += x;
                if col[pos].1.is_zero() {
                    col.remove(pos);
                }
            }
            Err(pos) => col.insert(pos, (i, x)),
        }
    }

    pub fn column(&self, j: usize) -> &[(usize, Rational)] {
        &self.columns[j]
    }

    /// Column `j` as a dense vector.
    pub fn column_dense(&self, j: usize) -> Vector {
        let mut v = vec![Rational::zero(); self.rows];
        for (i, x) in &self.columns[j] {
            v[*i] = x.clone();
        }
        v
    }

    pub fn get(&self, i: usize, j: usize) -> Rational {
        self.columns[j]
            .binary_search_by_key(&i, |(r, _)| *r)
            .map(|p| self.columns[j][p].1.clone())
            .unwrap_or_else(|_| Rational::zero())
    }

    pub fn nnz(&self) -> usize {
        self.columns.iter().map(Vec::len).sum()
    }

    pub fn from_dense(m: &Matrix) -> Self {
        let mut s = SparseMatrix::zeros(m.rows(), m.cols());
        for j in 0..m.cols() {
            for i in 0..m.rows() {
                let x = m.get(i, j);
                if !x.is_zero() {
                    s.columns[j].push((i, x.clone()));
                }
            }
        }
        s
    }

    pub fn to_dense(&self) -> Matrix {
        let mut m = Matrix::zeros(self.rows, self.cols);
        for (j, col) in self.columns.iter().enumerate() {
            for (i, x) in col {
                m.set(*i, j, x.clone());
            }
        }
        m
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Vector {
        assert_eq!(v.len(), self.cols);
        let mut out = vec![Rational::zero(); self.rows];
        for (j, vj) in v.iter().enumerate() {
            if vj.is_zero() {
                continue;
            }
            for (i, x) in &self.columns[j] {
                out[*i] += x * vj;
            }
        }
        out
    }

    pub fn mul(&self, other: &SparseMatrix) -> SparseMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = SparseMatrix::zeros(self.rows, other.cols);
        for j in 0..other.cols {
            let mut acc: std::collections::BTreeMap<usize, Rational> = Default::default();
            for (k, b) in &other.columns[j] {
                for (i, a) in &self.columns[*k] {
                    *acc.entry(*i).or_insert_with(Rational::zero) += a * b;
                }
            }
            out.columns[j] = acc.into_iter().filter(|(_, x)| !x.is_zero()).collect();
        }
        out
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut t = SparseMatrix::zeros(self.cols, self.rows);
        for (j, col) in self.columns.iter().enumerate() {
            for (i, x) in col {
                t.columns[*i].push((j, x.clone()));
            }
        }
        t
    }

    pub fn is_zero(&self) -> bool {
        self.columns.iter().all(Vec::is_empty)
    }

    /// Block diagonal sum `self ⊕ other`.
    pub fn direct_sum(&self, other: &SparseMatrix) -> SparseMatrix {
        let mut out = SparseMatrix::zeros(self.rows + other.rows, self.cols + other.cols);
        for (j, col) in self.columns.iter().enumerate() {
            out.columns[j] = col.clone();
        }
        for (j, col) in other.columns.iter().enumerate() {
            out.columns[self.cols + j] = col.iter().map(|(i, x)| (i + self.rows, x.clone())).collect();
        }
        out
    }
}

pub fn abs(x: &Rational) -> Rational {
    x.abs()
}
