//! Dense exact matrices and the integer normal forms everything else is built on.
//!
//! Integer work happens on [`IntMatrix`] (arbitrary precision), rational work on
//! [`RatMatrix`]. Normal forms are row-style; the column-style variants used for
//! lattices are obtained by transposing.

use std::fmt;
use std::ops::{Index, IndexMut, Mul};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// A dense row-major matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

pub type IntMatrix = Matrix<BigInt>;
pub type RatMatrix = Matrix<BigRational>;

impl<T: Clone + Zero> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    /// Builds a matrix from rows; `cols` fixes the width when there are no rows.
    ///
    /// # Panics
    /// Panics if the rows are ragged.
    pub fn from_rows(rows: Vec<Vec<T>>, cols: usize) -> Self {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged matrix rows");
            data.extend(r);
        }
        Matrix { rows: n, cols, data }
    }

    pub fn from_columns(columns: &[Vec<T>], rows: usize) -> Self {
        Matrix::from_fn(rows, columns.len(), |i, j| columns[j][i].clone())
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

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    /// Columns of `self` followed by columns of `other`.
    pub fn hstack(&self, other: &Self) -> Self {
        assert_eq!(self.rows, other.rows);
        let c = self.cols;
        Matrix::from_fn(
            self.rows,
            c + other.cols,
            |i, j| {
                if j < c {
                    self[(i, j)].clone()
                } else {
                    other[(i, j - c)].clone()
                }
            },
        )
    }

    /// Rows of `self` followed by rows of `other`.
    pub fn vstack(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.cols);
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        Matrix { rows: self.rows + other.rows, cols: self.cols, data }
    }

    /// Block-diagonal sum.
    pub fn block_diag(&self, other: &Self) -> Self {
        let (r, c) = (self.rows, self.cols);
        Matrix::from_fn(r + other.rows, c + other.cols, |i, j| match (i < r, j < c) {
            (true, true) => self[(i, j)].clone(),
            (false, false) => other[(i - r, j - c)].clone(),
            _ => T::zero(),
        })
    }

    pub fn select_columns(&self, idx: &[usize]) -> Self {
        Matrix::from_fn(self.rows, idx.len(), |i, j| self[(i, idx[j])].clone())
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Matrix<U> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }
}

impl<T: Clone + Zero + One> Matrix<T> {
    pub fn identity(n: usize) -> Self {
        Matrix::from_fn(n, n, |i, j| if i == j { T::one() } else { T::zero() })
    }
}

impl<T> Matrix<T>
where
    T: Clone + Zero + One + PartialEq,
    for<'a> &'a T: Mul<&'a T, Output = T>,
{
    pub fn is_identity(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| {
                    let e = &self[(i, j)];
                    if i == j {
                        e.is_one()
                    } else {
                        e.is_zero()
                    }
                })
            })
    }

    pub fn scale(&self, s: &T) -> Self {
        self.map(|x| x * s)
    }

    pub fn trace(&self) -> T {
        let mut t = T::zero();
        for i in 0..self.rows.min(self.cols) {
            t = t + self[(i, i)].clone();
        }
        t
    }

    /// Kronecker product, `self` indexing the outer blocks.
    pub fn kronecker(&self, other: &Self) -> Self {
        let (r, c) = (other.rows, other.cols);
        Matrix::from_fn(self.rows * r, self.cols * c, |i, j| &self[(i / r, j / c)] * &other[(i % r, j % c)])
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = T::zero();
                for (a, b) in self.row(i).iter().zip(v) {
                    if !a.is_zero() {
                        acc = acc + a * b;
                    }
                }
                acc
            })
            .collect()
    }
}

impl<T> Matrix<T>
where
    T: Clone + Zero + std::ops::Sub<Output = T>,
{
    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a.clone() - b.clone()).collect(),
        }
    }
}

impl<T> Matrix<T>
where
    T: Clone + Zero + std::ops::Add<Output = T>,
{
    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a.clone() + b.clone()).collect(),
        }
    }
}

impl<'a, T> Mul<&'a Matrix<T>> for &'a Matrix<T>
where
    T: Clone + Zero,
    for<'b> &'b T: Mul<&'b T, Output = T>,
{
    type Output = Matrix<T>;

    fn mul(self, rhs: &'a Matrix<T>) -> Matrix<T> {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch in product");
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = &rhs[(k, j)];
                    if !b.is_zero() {
                        let idx = i * rhs.cols + j;
                        out.data[idx] = std::mem::replace(&mut out.data[idx], T::zero()) + a * b;
                    }
                }
            }
        }
        out
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl<T: fmt::Display> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", self.data[i * self.cols + j])?;
            }
        }
        write!(f, "]")
    }
}

impl IntMatrix {
    pub fn from_i64(rows: &[&[i64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect(), cols)
    }

    pub fn to_rational(&self) -> RatMatrix {
        self.map(|x| BigRational::from_integer(x.clone()))
    }
}

/// Result of a row-style Hermite normal form computation: `h = u * a`.
#[derive(Clone, Debug)]
pub struct RowHnf {
    /// Echelon form; the first `rank` rows are nonzero.
    pub h: IntMatrix,
    /// Unimodular transform.
    pub u: IntMatrix,
    pub rank: usize,
    /// Pivot column of each nonzero row.
    pub pivots: Vec<usize>,
}

fn sub_multiple(rows: &mut [Vec<BigInt>], target: usize, source: usize, q: &BigInt) {
    if q.is_zero() {
        return;
    }
    let src = rows[source].clone();
    for (t, s) in rows[target].iter_mut().zip(&src) {
        if !s.is_zero() {
            *t -= q * s;
        }
    }
}

/// Row-style Hermite normal form with pivots positive and entries above each
/// pivot reduced into `[0, pivot)`.
pub fn row_hnf(a: &IntMatrix) -> RowHnf {
    let (m, n) = (a.rows(), a.cols());
    let mut h = a.to_rows();
    let mut u = IntMatrix::identity(m).to_rows();
    let mut r = 0;
    let mut pivots = Vec::new();
    for c in 0..n {
        if r == m {
            break;
        }
        loop {
            let mut best: Option<usize> = None;
            for i in r..m {
                if !h[i][c].is_zero() && best.is_none_or(|b| h[i][c].abs() < h[b][c].abs()) {
                    best = Some(i);
                }
            }
            let Some(b) = best else { break };
            h.swap(r, b);
            u.swap(r, b);
            let mut clean = true;
            for i in r + 1..m {
                if !h[i][c].is_zero() {
                    let q = h[i][c].div_floor(&h[r][c]);
                    sub_multiple(&mut h, i, r, &q);
                    sub_multiple(&mut u, i, r, &q);
                    clean &= h[i][c].is_zero();
                }
            }
            if clean {
                break;
            }
        }
        if h[r][c].is_zero() {
            continue;
        }
        if h[r][c].is_negative() {
            for x in h[r].iter_mut().chain(u[r].iter_mut()) {
                *x = -std::mem::take(x);
            }
        }
        for i in 0..r {
            let q = h[i][c].div_floor(&h[r][c]);
            sub_multiple(&mut h, i, r, &q);
            sub_multiple(&mut u, i, r, &q);
        }
        pivots.push(c);
        r += 1;
    }
    RowHnf { h: Matrix::from_rows(h, n), u: Matrix::from_rows(u, m), rank: r, pivots }
}

/// Nonzero rows of the row Hermite normal form: a canonical basis of the row span.
pub fn hnf_rows(a: &IntMatrix) -> IntMatrix {
    let res = row_hnf(a);
    Matrix::from_rows(res.h.to_rows().into_iter().take(res.rank).collect(), a.cols())
}

/// Canonical basis (as columns) of the lattice spanned by the columns of `a`.
pub fn column_hnf(a: &IntMatrix) -> IntMatrix {
    hnf_rows(&a.transpose()).transpose()
}

/// Saturated basis (columns, canonical form) of `{x in Z^n : a x = 0}`.
pub fn kernel(a: &IntMatrix) -> IntMatrix {
    let n = a.cols();
    let res = row_hnf(&a.transpose());
    let rows: Vec<Vec<BigInt>> = res.u.to_rows().into_iter().skip(res.rank).collect();
    if rows.is_empty() {
        return IntMatrix::zeros(n, 0);
    }
    column_hnf(&Matrix::from_rows(rows, n).transpose())
}

/// Basis (columns) of `(Q-span of columns) ∩ Z^n`.
pub fn saturation(b: &IntMatrix) -> IntMatrix {
    let n = b.rows();
    let perp = kernel(&b.transpose());
    if perp.cols() == 0 {
        return IntMatrix::identity(n);
    }
    kernel(&perp.transpose())
}

pub fn rank(a: &IntMatrix) -> usize {
    row_hnf(a).rank
}

/// Nonzero invariant factors `d_1 | d_2 | ...` of the Smith normal form.
pub fn elementary_divisors(a: &IntMatrix) -> Vec<BigInt> {
    let mut m = hnf_rows(a);
    loop {
        let t = hnf_rows(&m.transpose());
        let diagonal = (0..t.rows()).all(|i| (0..t.cols()).all(|j| i == j || t[(i, j)].is_zero()));
        m = t;
        if diagonal {
            break;
        }
    }
    let mut d: Vec<BigInt> = (0..m.rows().min(m.cols())).map(|i| m[(i, i)].abs()).collect();
    d.retain(|x| !x.is_zero());
    for i in 0..d.len() {
        for j in i + 1..d.len() {
            let g = d[i].gcd(&d[j]);
            let l = &d[i] / &g * &d[j];
            d[i] = g;
            d[j] = l;
        }
    }
    d
}

/// Fraction-free (Bareiss) determinant.
pub fn det_int(a: &IntMatrix) -> BigInt {
    assert!(a.is_square(), "determinant of a non-square matrix");
    let n = a.rows();
    if n == 0 {
        return BigInt::one();
    }
    let mut m = a.to_rows();
    let mut negate = false;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                Some(i) => {
                    m.swap(k, i);
                    negate = !negate;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = v / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    let d = m[n - 1][n - 1].clone();
    if negate {
        -d
    } else {
        d
    }
}

/// Determinant over the rationals by clearing denominators.
pub fn det_rat(a: &RatMatrix) -> BigRational {
    assert!(a.is_square(), "determinant of a non-square matrix");
    let n = a.rows();
    let mut scale = BigRational::one();
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let l = a.row(i).iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
        scale /= BigRational::from_integer(l.clone());
        rows.push(a.row(i).iter().map(|x| (x * &l).to_integer()).collect());
    }
    scale * BigRational::from_integer(det_int(&Matrix::from_rows(rows, n)))
}

/// Inverse over the rationals, `None` when singular.
pub fn inverse_rat(a: &RatMatrix) -> Option<RatMatrix> {
    assert!(a.is_square());
    let n = a.rows();
    let mut m = a.to_rows();
    let mut inv = RatMatrix::identity(n).to_rows();
    for c in 0..n {
        let p = (c..n).find(|&i| !m[i][c].is_zero())?;
        m.swap(c, p);
        inv.swap(c, p);
        let pivot = m[c][c].clone();
        for x in m[c].iter_mut().chain(inv[c].iter_mut()) {
            *x /= &pivot;
        }
        for i in 0..n {
            if i != c && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                let (src_m, src_i) = (m[c].clone(), inv[c].clone());
                for (x, s) in m[i].iter_mut().zip(&src_m) {
                    *x -= &f * s;
                }
                for (x, s) in inv[i].iter_mut().zip(&src_i) {
                    *x -= &f * s;
                }
            }
        }
    }
    Some(Matrix::from_rows(inv, n))
}

/// Expresses vectors in a fixed lattice basis (the columns of `basis`).
///
/// Built once from a column HNF with transform, then each query is a triangular
/// solve with exact divisibility checks.
#[derive(Clone, Debug)]
pub struct LatticeCoordinates {
    echelon: IntMatrix,
    transform_t: IntMatrix,
    pivots: Vec<usize>,
}

impl LatticeCoordinates {
    /// # Panics
    /// Panics if the columns of `basis` are linearly dependent.
    pub fn new(basis: &IntMatrix) -> Self {
        let res = row_hnf(&basis.transpose());
        assert_eq!(res.rank, basis.cols(), "basis columns are dependent");
        LatticeCoordinates { echelon: res.h, transform_t: res.u.transpose(), pivots: res.pivots }
    }

    /// Rank of the lattice.
    pub fn dim(&self) -> usize {
        self.pivots.len()
    }

    /// Integer coordinates of `v`, or `None` when `v` is not in the lattice.
    pub fn coords(&self, v: &[BigInt]) -> Option<Vec<BigInt>> {
        let mut y: Vec<BigInt> = Vec::with_capacity(self.pivots.len());
        for (i, &p) in self.pivots.iter().enumerate() {
            let mut rest = v[p].clone();
            for (j, yj) in y.iter().enumerate() {
                rest -= &self.echelon[(j, p)] * yj;
            }
            let (q, r) = rest.div_rem(&self.echelon[(i, p)]);
            if !r.is_zero() {
                return None;
            }
            y.push(q);
        }
        // non-pivot coordinates must agree too
        for (c, vc) in v.iter().enumerate().take(self.echelon.cols()) {
            let mut s = BigInt::zero();
            for (j, yj) in y.iter().enumerate() {
                s += &self.echelon[(j, c)] * yj;
            }
            if &s != vc {
                return None;
            }
        }
        Some(self.transform_t.mul_vec(&y))
    }
}

/// Solves `basis * x = target` column by column over the integers.
pub fn solve_in_basis(basis: &IntMatrix, target: &IntMatrix) -> Option<IntMatrix> {
    let lc = LatticeCoordinates::new(basis);
    let mut cols = Vec::with_capacity(target.cols());
    for j in 0..target.cols() {
        cols.push(lc.coords(&target.column(j))?);
    }
    Some(Matrix::from_columns(&cols, basis.cols()))
}
