//! Integer matrices: a sparse form for the up/down operators and a dense
//! form for elimination.
//!
//! All arithmetic is over [`BigInt`]; rational results are produced only at
//! the very end by dividing an integral numerator matrix by a determinant.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Sparse integer matrix stored row by row. Zero entries are never stored.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct SparseIntMatrix {
    n_rows: usize,
    n_cols: usize,
    rows: Vec<BTreeMap<usize, BigInt>>,
}

impl SparseIntMatrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        SparseIntMatrix { n_rows, n_cols, rows: vec![BTreeMap::new(); n_rows] }
    }

    pub fn identity(n: usize) -> Self {
        Self::scalar(n, BigInt::one())
    }

    pub fn scalar(n: usize, value: BigInt) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, value.clone());
        }
        m
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(BTreeMap::len).sum()
    }

    pub fn get(&self, row: usize, col: usize) -> BigInt {
        assert!(row < self.n_rows && col < self.n_cols, "index ({row}, {col}) out of range");
        self.rows[row].get(&col).cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn set(&mut self, row: usize, col: usize, value: BigInt) {
        assert!(row < self.n_rows && col < self.n_cols, "index ({row}, {col}) out of range");
        if value.is_zero() {
            self.rows[row].remove(&col);
        } else {
            self.rows[row].insert(col, value);
        }
    }

    fn add_at(&mut self, row: usize, col: usize, value: &BigInt) {
        let slot = self.rows[row].entry(col).or_insert_with(BigInt::zero);
        *slot += value;
        if slot.is_zero() {
            self.rows[row].remove(&col);
        }
    }

    /// Nonzero entries of one row, in increasing column order.
    pub fn row(&self, row: usize) -> impl Iterator<Item = (usize, &BigInt)> {
        self.rows[row].iter().map(|(&c, v)| (c, v))
    }

    /// All nonzero entries in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, &BigInt)> {
        self.rows.iter().enumerate().flat_map(|(r, row)| row.iter().map(move |(&c, v)| (r, c, v)))
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.n_cols, self.n_rows);
        for (r, c, v) in self.iter() {
            t.rows[c].insert(r, v.clone());
        }
        t
    }

    pub fn mul(&self, other: &SparseIntMatrix) -> Result<SparseIntMatrix> {
        if self.n_cols != other.n_rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.n_rows, self.n_cols, other.n_rows, other.n_cols
            )));
        }
        let mut out = Self::zeros(self.n_rows, other.n_cols);
        for (i, row) in self.rows.iter().enumerate() {
            for (&mid, a) in row {
                for (&j, b) in &other.rows[mid] {
                    out.add_at(i, j, &(a * b));
                }
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &SparseIntMatrix) -> Result<SparseIntMatrix> {
        if self.n_rows != other.n_rows || self.n_cols != other.n_cols {
            return Err(Error::Dimension(format!(
                "cannot subtract {}x{} from {}x{}",
                other.n_rows, other.n_cols, self.n_rows, self.n_cols
            )));
        }
        let mut out = self.clone();
        for (r, c, v) in other.iter() {
            out.add_at(r, c, &-v);
        }
        Ok(out)
    }

    /// `self + shift * I`; the matrix must be square.
    pub fn add_diagonal(&self, shift: &BigInt) -> Result<SparseIntMatrix> {
        if self.n_rows != self.n_cols {
            return Err(Error::Dimension(format!("{}x{} is not square", self.n_rows, self.n_cols)));
        }
        let mut out = self.clone();
        for i in 0..self.n_rows {
            out.add_at(i, i, shift);
        }
        Ok(out)
    }

    /// Multiply a sparse rational column vector (index -> coefficient).
    pub fn apply(&self, v: &BTreeMap<usize, BigRational>) -> BTreeMap<usize, BigRational> {
        let t = self.transpose();
        let mut out: BTreeMap<usize, BigRational> = BTreeMap::new();
        for (&col, coeff) in v {
            for (&row, a) in &t.rows[col] {
                let slot = out.entry(row).or_insert_with(BigRational::zero);
                *slot += coeff * BigRational::from_integer(a.clone());
            }
        }
        out.retain(|_, c| !c.is_zero());
        out
    }

    pub fn to_dense(&self) -> IntMatrix {
        let mut d = IntMatrix::zeros(self.n_rows, self.n_cols);
        for (r, c, v) in self.iter() {
            d.rows[r][c] = v.clone();
        }
        d
    }

    /// Rows and columns permuted: entry (i, j) moves to (row_perm[i], col_perm[j]).
    pub fn permute(&self, row_perm: &[usize], col_perm: &[usize]) -> SparseIntMatrix {
        let mut out = Self::zeros(self.n_rows, self.n_cols);
        for (r, c, v) in self.iter() {
            out.rows[row_perm[r]].insert(col_perm[c], v.clone());
        }
        out
    }
}

impl fmt::Display for SparseIntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.to_dense(), f)
    }
}

/// Dense integer matrix as a vector of rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntMatrix {
    pub(crate) n_rows: usize,
    pub(crate) n_cols: usize,
    pub(crate) rows: Vec<Vec<BigInt>>,
}

impl IntMatrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        IntMatrix { n_rows, n_cols, rows: vec![vec![BigInt::zero(); n_cols]; n_rows] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.rows[i][i] = BigInt::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<BigInt>>) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Ok(IntMatrix { n_rows, n_cols, rows })
    }

    pub fn from_i64(rows: &[Vec<i64>]) -> Result<Self> {
        Self::from_rows(rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect())
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn is_square(&self) -> bool {
        self.n_rows == self.n_cols
    }

    pub fn get(&self, row: usize, col: usize) -> &BigInt {
        &self.rows[row][col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: BigInt) {
        self.rows[row][col] = value;
    }

    pub fn rows(&self) -> &[Vec<BigInt>] {
        &self.rows
    }

    pub fn mul(&self, other: &IntMatrix) -> Result<IntMatrix> {
        if self.n_cols != other.n_rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.n_rows, self.n_cols, other.n_rows, other.n_cols
            )));
        }
        let mut out = Self::zeros(self.n_rows, other.n_cols);
        for (i, row) in self.rows.iter().enumerate() {
            for (k, a) in row.iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                for (j, b) in other.rows[k].iter().enumerate() {
                    if !b.is_zero() {
                        out.rows[i][j] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn is_diagonal(&self) -> bool {
        self.rows.iter().enumerate().all(|(i, row)| row.iter().enumerate().all(|(j, v)| i == j || v.is_zero()))
    }

    /// Determinant by Bareiss fraction-free elimination.
    pub fn determinant(&self) -> Result<BigInt> {
        if !self.is_square() {
            return Err(Error::Dimension(format!("{}x{} is not square", self.n_rows, self.n_cols)));
        }
        Ok(bareiss_determinant(self.rows.clone()))
    }

    /// Solve `self * X = rhs` without fractions.
    ///
    /// Returns `(d, Y)` with `self * Y = d * rhs` and `d = ±det(self)`,
    /// so that `X = Y / d`.
    pub fn solve_scaled(&self, rhs: &IntMatrix) -> Result<(BigInt, IntMatrix)> {
        if !self.is_square() {
            return Err(Error::Dimension(format!("{}x{} is not square", self.n_rows, self.n_cols)));
        }
        if rhs.n_rows != self.n_rows {
            return Err(Error::Dimension(format!("right-hand side has {} rows, expected {}", rhs.n_rows, self.n_rows)));
        }
        let n = self.n_rows;
        let width = n + rhs.n_cols;
        let mut m: Vec<Vec<BigInt>> =
            self.rows.iter().zip(&rhs.rows).map(|(a, b)| a.iter().chain(b.iter()).cloned().collect()).collect();

        let mut prev = BigInt::one();
        for k in 0..n {
            let pivot = (k..n).find(|&i| !m[i][k].is_zero()).ok_or(Error::Singular)?;
            m.swap(k, pivot);
            let (head, tail) = m.split_at_mut(k);
            let (pivot_row, tail) = tail.split_first_mut().expect("k < n");
            let pkk = pivot_row[k].clone();
            for row in head.iter_mut().chain(tail.iter_mut()) {
                let factor = std::mem::take(&mut row[k]);
                for j in k + 1..width {
                    let mut v = &pkk * &row[j];
                    if !factor.is_zero() && !pivot_row[j].is_zero() {
                        v -= &factor * &pivot_row[j];
                    }
                    row[j] = exact_div(v, &prev);
                }
            }
            // Rows above the pivot keep their (now rescaled) diagonal.
            for (i, row) in head.iter_mut().enumerate() {
                row[i] = pkk.clone();
            }
            prev = pkk;
        }
        let solution = m.into_iter().map(|row| row.into_iter().skip(n).collect()).collect::<Vec<Vec<BigInt>>>();
        Ok((prev, IntMatrix { n_rows: n, n_cols: rhs.n_cols, rows: solution }))
    }

    /// Exact inverse over the rationals.
    pub fn inverse(&self) -> Result<RationalMatrix> {
        let (d, adj) = self.solve_scaled(&IntMatrix::identity(self.n_rows))?;
        Ok(RationalMatrix::from_scaled(&adj, &d))
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(ToString::to_string).collect();
            writeln!(f, "[{}]", cells.join(" "))?;
        }
        Ok(())
    }
}

fn exact_div(v: BigInt, d: &BigInt) -> BigInt {
    if d.is_one() {
        return v;
    }
    let (q, r) = v.div_rem(d);
    debug_assert!(r.is_zero(), "fraction-free step produced a non-exact division");
    q
}

pub(crate) fn bareiss_determinant(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut sign = false;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        let Some(pivot) = (k..n).find(|&i| !m[i][k].is_zero()) else {
            return BigInt::zero();
        };
        if pivot != k {
            m.swap(k, pivot);
            sign = !sign;
        }
        let (top, bottom) = m.split_at_mut(k + 1);
        let pivot_row = &top[k];
        let pkk = &pivot_row[k];
        for row in bottom.iter_mut() {
            let factor = std::mem::take(&mut row[k]);
            for j in k + 1..n {
                let mut v = pkk * &row[j];
                if !factor.is_zero() && !pivot_row[j].is_zero() {
                    v -= &factor * &pivot_row[j];
                }
                row[j] = exact_div(v, &prev);
            }
        }
        prev = m[k][k].clone();
    }
    let det = m[n - 1][n - 1].clone();
    if sign {
        -det
    } else {
        det
    }
}

/// Dense rational matrix, used for exact inverses.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalMatrix {
    rows: Vec<Vec<BigRational>>,
}

impl RationalMatrix {
    pub fn from_scaled(numerators: &IntMatrix, denominator: &BigInt) -> Self {
        let rows = numerators
            .rows
            .iter()
            .map(|row| row.iter().map(|x| BigRational::new(x.clone(), denominator.clone())).collect())
            .collect();
        RationalMatrix { rows }
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    pub fn get(&self, row: usize, col: usize) -> &BigRational {
        &self.rows[row][col]
    }

    pub fn column(&self, col: usize) -> Vec<BigRational> {
        self.rows.iter().map(|row| row[col].clone()).collect()
    }

    pub fn entries(&self) -> impl Iterator<Item = &BigRational> {
        self.rows.iter().flatten()
    }

    /// Least positive `s` with `s * self` integral.
    pub fn denominator_lcm(&self) -> BigInt {
        denominator_lcm(self.entries())
    }
}

/// LCM of the reduced denominators of a collection of rationals (1 if empty).
pub fn denominator_lcm<'a>(values: impl IntoIterator<Item = &'a BigRational>) -> BigInt {
    values.into_iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom())).abs()
}
