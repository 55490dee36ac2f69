//! Exact integer linear algebra: column Hermite reduction with a unimodular
//! transform, solving `A·x = b` over the integers, and Smith invariant
//! factors. Generic over any signed integer scalar; [`BigMatrix`] is the
//! arbitrary-precision instance used by the rest of the crate.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Signed;

use crate::error::{format_err, Error, Result};

/// Scalars usable by the reductions.
pub trait Scalar: Integer + Signed + Clone + fmt::Debug + fmt::Display {}
impl<T: Integer + Signed + Clone + fmt::Debug + fmt::Display> Scalar for T {}

/// Dense row-major integer matrix.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    /// Builds from rows; every row must have length `cols`.
    pub fn from_rows(rows: Vec<Vec<T>>, cols: usize) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * cols);
        for (i, r) in rows.into_iter().enumerate() {
            if r.len() != cols {
                return format_err(format!("row {i} has {} entries, expected {cols}", r.len()));
            }
            data.extend(r);
        }
        Ok(Matrix { rows: n, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> T) -> Self {
        let data = (0..rows).flat_map(|i| (0..cols).map(move |j| (i, j))).map(|(i, j)| f(i, j)).collect();
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn mul(&self, other: &Matrix<T>) -> Matrix<T> {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        Self::from_fn(self.rows, other.cols, |i, j| {
            (0..self.cols).fold(T::zero(), |acc, k| acc + self[(i, k)].clone() * other[(k, j)].clone())
        })
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len(), "dimension mismatch");
        (0..self.rows).map(|i| self.row(i).iter().zip(v).fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone())).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols && (0..self.rows).all(|i| (0..self.cols).all(|j| self[(i, j)] == if i == j { T::one() } else { T::zero() }))
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// column `dst += k · column src`
    fn add_col(&mut self, dst: usize, src: usize, k: &T) {
        for i in 0..self.rows {
            let v = self[(i, src)].clone() * k.clone();
            self[(i, dst)] = self[(i, dst)].clone() + v;
        }
    }

    fn negate_col(&mut self, c: usize) {
        for i in 0..self.rows {
            self[(i, c)] = -self[(i, c)].clone();
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn add_row(&mut self, dst: usize, src: usize, k: &T) {
        for j in 0..self.cols {
            let v = self[(src, j)].clone() * k.clone();
            self[(dst, j)] = self[(dst, j)].clone() + v;
        }
    }
}

impl<T> std::ops::Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

impl<T: fmt::Display> fmt::Display for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self.data[i * self.cols + j].to_string()).collect();
            writeln!(f, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

/// Column Hermite form: `a · u = h` with `u` unimodular and `h` in column
/// echelon form. Returns `(h, u, pivots)` where `pivots[k]` is the pivot row of
/// column `k`; columns past `pivots.len()` are zero and span the kernel in `u`.
pub fn column_hermite<T: Scalar>(a: &Matrix<T>) -> (Matrix<T>, Matrix<T>, Vec<usize>) {
    let mut h = a.clone();
    let mut u = Matrix::identity(a.cols);
    let mut pivots = Vec::new();
    let mut col = 0;
    for row in 0..a.rows {
        if col >= a.cols {
            break;
        }
        // Euclid across columns col.. on this row
        loop {
            let nz: Vec<usize> = (col..a.cols).filter(|&j| !h[(row, j)].is_zero()).collect();
            if nz.is_empty() {
                break;
            }
            let best = *nz.iter().min_by(|&&x, &&y| h[(row, x)].abs().cmp(&h[(row, y)].abs())).unwrap();
            if best != col {
                h.swap_cols(best, col);
                u.swap_cols(best, col);
            }
            let p = h[(row, col)].clone();
            let mut done = true;
            for j in col + 1..a.cols {
                if h[(row, j)].is_zero() {
                    continue;
                }
                let q = -h[(row, j)].div_floor(&p);
                h.add_col(j, col, &q);
                u.add_col(j, col, &q);
                if !h[(row, j)].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if h[(row, col)].is_zero() {
            continue;
        }
        if h[(row, col)].is_negative() {
            h.negate_col(col);
            u.negate_col(col);
        }
        let p = h[(row, col)].clone();
        for j in 0..col {
            let q = -h[(row, j)].div_floor(&p);
            h.add_col(j, col, &q);
            u.add_col(j, col, &q);
        }
        pivots.push(row);
        col += 1;
    }
    (h, u, pivots)
}

/// Integer solution of `a · x = b` and a basis of the integer kernel, or
/// `None` when no integer solution exists.
pub fn solve<T: Scalar>(a: &Matrix<T>, b: &[T]) -> Option<(Vec<T>, Vec<Vec<T>>)> {
    assert_eq!(a.rows, b.len(), "dimension mismatch");
    let (h, u, pivots) = column_hermite(a);
    // forward substitution on the echelon columns: h · y = b
    let mut y = vec![T::zero(); a.cols];
    let mut resid: Vec<T> = b.to_vec();
    for (k, &r) in pivots.iter().enumerate() {
        let p = &h[(r, k)];
        let (q, rem) = resid[r].div_rem(p);
        if !rem.is_zero() {
            return None;
        }
        for i in 0..a.rows {
            let v = h[(i, k)].clone() * q.clone();
            resid[i] = resid[i].clone() - v;
        }
        y[k] = q;
    }
    if resid.iter().any(|v| !v.is_zero()) {
        return None;
    }
    let x = u.mul_vec(&y);
    let kernel = (pivots.len()..a.cols).map(|j| (0..a.cols).map(|i| u[(i, j)].clone()).collect()).collect();
    Some((x, kernel))
}

/// Nonzero invariant factors `d₁ | d₂ | …` of the Smith normal form.
pub fn smith_invariants<T: Scalar>(a: &Matrix<T>) -> Vec<T> {
    let mut m = a.clone();
    let mut out = Vec::new();
    let mut t = 0;
    while t < m.rows.min(m.cols) {
        // pick the smallest nonzero entry of the remaining block
        let mut best: Option<(usize, usize)> = None;
        for i in t..m.rows {
            for j in t..m.cols {
                if !m[(i, j)].is_zero() && best.is_none_or(|(bi, bj)| m[(i, j)].abs() < m[(bi, bj)].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((bi, bj)) = best else { break };
        m.swap_rows(t, bi);
        m.swap_cols(t, bj);
        loop {
            let p = m[(t, t)].clone();
            let mut clean = true;
            for i in t + 1..m.rows {
                let q = -m[(i, t)].div_floor(&p);
                m.add_row(i, t, &q);
                if !m[(i, t)].is_zero() {
                    clean = false;
                }
            }
            for j in t + 1..m.cols {
                let q = -m[(t, j)].div_floor(&p);
                m.add_col(j, t, &q);
                if !m[(t, j)].is_zero() {
                    clean = false;
                }
            }
            if !clean {
                let mut best = (t, t);
                for i in t..m.rows {
                    if !m[(i, t)].is_zero() && m[(i, t)].abs() < m[best].abs() {
                        best = (i, t);
                    }
                }
                for j in t..m.cols {
                    if !m[(t, j)].is_zero() && m[(t, j)].abs() < m[best].abs() {
                        best = (t, j);
                    }
                }
                m.swap_rows(t, best.0);
                m.swap_cols(t, best.1);
                continue;
            }
            // divisibility of the rest of the block
            let bad = (t + 1..m.rows).flat_map(|i| (t + 1..m.cols).map(move |j| (i, j))).find(|&(i, j)| !m[(i, j)].is_multiple_of(&p));
            match bad {
                Some((i, _)) => {
                    let one = T::one();
                    m.add_row(t, i, &one);
                }
                None => break,
            }
        }
        out.push(m[(t, t)].abs());
        t += 1;
    }
    out
}

/// Arbitrary-precision integer matrix.
pub type BigMatrix = Matrix<BigInt>;

/// Parses whitespace-separated integer rows.
pub fn parse_rows(text: &str) -> Result<Vec<Vec<BigInt>>> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(|l| l.split_whitespace().map(|t| t.parse::<BigInt>().map_err(|_| Error::Format(format!("bad integer {t:?}")))).collect())
        .collect()
}
