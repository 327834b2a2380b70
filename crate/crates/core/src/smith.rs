//! Smith normal form over the integers, the inverse-denominator
//! characterization of the last Smith entry, and the divisibility bounds on
//! the last Smith entry of `DU_n + kI`.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::chains::ChainPair;
use crate::error::{Error, Result};
use crate::fundamental::{compute_v, divisor_bound, minimal_integral_multiplier};
use crate::matrix::{IntMatrix, RationalMatrix, SparseIntMatrix};
use crate::poset::GradedPoset;

/// `left * A * right = diag(diagonal)` with unimodular `left`, `right`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmithDecomposition {
    pub left: IntMatrix,
    pub right: IntMatrix,
    pub diagonal: Vec<BigInt>,
}

impl SmithDecomposition {
    pub fn last_entry(&self) -> Option<&BigInt> {
        self.diagonal.last()
    }

    /// The diagonal as an `n_rows x n_cols` matrix.
    pub fn diagonal_matrix(&self) -> IntMatrix {
        let mut d = IntMatrix::zeros(self.left.n_rows(), self.right.n_cols());
        for (i, v) in self.diagonal.iter().enumerate() {
            d.set(i, i, v.clone());
        }
        d
    }
}

/// Working state: the matrix being reduced plus optional transforms.
struct Reduction {
    a: Vec<Vec<BigInt>>,
    left: Option<Vec<Vec<BigInt>>>,
    right: Option<Vec<Vec<BigInt>>>,
    n_cols: usize,
}

impl Reduction {
    fn swap_rows(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        self.a.swap(i, j);
        if let Some(p) = &mut self.left {
            p.swap(i, j);
        }
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for row in &mut self.a {
            row.swap(i, j);
        }
        if let Some(q) = &mut self.right {
            for row in q.iter_mut() {
                row.swap(i, j);
            }
        }
    }

    /// row_i -= factor * row_t, touching only columns >= from in the working matrix.
    fn sub_row(&mut self, i: usize, t: usize, factor: &BigInt, from: usize) {
        let (src, dst) = two_rows(&mut self.a, t, i);
        for c in from..self.n_cols {
            if !src[c].is_zero() {
                dst[c] -= factor * &src[c];
            }
        }
        if let Some(p) = &mut self.left {
            let (src, dst) = two_rows(p, t, i);
            for (d, s) in dst.iter_mut().zip(src.iter()) {
                if !s.is_zero() {
                    *d -= factor * s;
                }
            }
        }
    }

    /// col_j -= factor * col_t, touching only rows >= from in the working matrix.
    fn sub_col(&mut self, j: usize, t: usize, factor: &BigInt, from: usize) {
        for row in &mut self.a[from..] {
            if !row[t].is_zero() {
                let delta = factor * &row[t];
                row[j] -= delta;
            }
        }
        if let Some(q) = &mut self.right {
            for row in q.iter_mut() {
                if !row[t].is_zero() {
                    let delta = factor * &row[t];
                    row[j] -= delta;
                }
            }
        }
    }

    /// Minimal-absolute-value pivot elimination to a diagonal matrix.
    fn diagonalize(&mut self) {
        let n_rows = self.a.len();
        let size = n_rows.min(self.n_cols);
        for t in 0..size {
            loop {
                let Some((pi, pj)) = self.min_abs_entry(t) else {
                    return;
                };
                self.swap_rows(t, pi);
                self.swap_cols(t, pj);
                let pivot = self.a[t][t].clone();
                let mut clean = true;
                for i in t + 1..n_rows {
                    if self.a[i][t].is_zero() {
                        continue;
                    }
                    let q = &self.a[i][t] / &pivot;
                    if !q.is_zero() {
                        self.sub_row(i, t, &q, t);
                    }
                    clean &= self.a[i][t].is_zero();
                }
                for j in t + 1..self.n_cols {
                    if self.a[t][j].is_zero() {
                        continue;
                    }
                    let q = &self.a[t][j] / &pivot;
                    if !q.is_zero() {
                        self.sub_col(j, t, &q, t);
                    }
                    clean &= self.a[t][j].is_zero();
                }
                if clean {
                    break;
                }
            }
        }
    }

    fn min_abs_entry(&self, t: usize) -> Option<(usize, usize)> {
        let mut best: Option<(usize, usize, BigInt)> = None;
        for (i, row) in self.a.iter().enumerate().skip(t) {
            for (j, v) in row.iter().enumerate().skip(t) {
                if v.is_zero() {
                    continue;
                }
                let mag = v.abs();
                if best.as_ref().is_none_or(|(_, _, b)| mag < *b) {
                    let unit = mag.is_one();
                    best = Some((i, j, mag));
                    if unit {
                        return best.map(|(i, j, _)| (i, j));
                    }
                }
            }
        }
        best.map(|(i, j, _)| (i, j))
    }

    fn normalize_signs(&mut self) {
        let size = self.a.len().min(self.n_cols);
        for i in 0..size {
            if self.a[i][i].is_negative() {
                for v in &mut self.a[i] {
                    *v = -std::mem::take(v);
                }
                if let Some(p) = &mut self.left {
                    for v in &mut p[i] {
                        *v = -std::mem::take(v);
                    }
                }
            }
        }
    }

    /// Replace `diag(a, b)` at positions i < j by `diag(gcd, lcm)`.
    fn repair_pair(&mut self, i: usize, j: usize) {
        let a = self.a[i][i].clone();
        let b = self.a[j][j].clone();
        let e = a.extended_gcd(&b);
        let (g, x, y) = (e.gcd, e.x, e.y);
        let b_g = &b / &g;
        let a_g = &a / &g;
        self.a[i][i] = g;
        self.a[j][j] = &a * &b_g;
        if let Some(p) = &mut self.left {
            // rows (i, j) <- [[x, y], [-b/g, a/g]] * rows (i, j)
            let (ri, rj) = two_rows(p, i, j);
            for (u, w) in ri.iter_mut().zip(rj.iter_mut()) {
                let new_u = &x * &*u + &y * &*w;
                let new_w = &a_g * &*w - &b_g * &*u;
                *u = new_u;
                *w = new_w;
            }
        }
        if let Some(q) = &mut self.right {
            // cols (i, j) <- cols (i, j) * [[1, -y b/g], [1, x a/g]]
            let yb = &y * &b_g;
            let xa = &x * &a_g;
            for row in q.iter_mut() {
                let u = row[i].clone();
                let w = row[j].clone();
                row[i] = &u + &w;
                row[j] = &xa * &w - &yb * &u;
            }
        }
    }

    fn enforce_divisibility(&mut self) {
        let size = self.a.len().min(self.n_cols);
        for i in 0..size {
            for j in i + 1..size {
                let (a, b) = (&self.a[i][i], &self.a[j][j]);
                let divides = if a.is_zero() { b.is_zero() } else { (b % a).is_zero() };
                if !divides {
                    self.repair_pair(i, j);
                }
            }
        }
    }

    fn diagonal(&self) -> Vec<BigInt> {
        let size = self.a.len().min(self.n_cols);
        (0..size).map(|i| self.a[i][i].clone()).collect()
    }
}

/// Mutable borrows of two distinct rows.
fn two_rows(m: &mut [Vec<BigInt>], a: usize, b: usize) -> (&mut Vec<BigInt>, &mut Vec<BigInt>) {
    assert_ne!(a, b);
    if a < b {
        let (lo, hi) = m.split_at_mut(b);
        (&mut lo[a], &mut hi[0])
    } else {
        let (lo, hi) = m.split_at_mut(a);
        (&mut hi[0], &mut lo[b])
    }
}

fn reduce(a: &IntMatrix, with_transforms: bool) -> Reduction {
    let mut red = Reduction {
        a: a.rows().to_vec(),
        left: with_transforms.then(|| IntMatrix::identity(a.n_rows()).rows().to_vec()),
        right: with_transforms.then(|| IntMatrix::identity(a.n_cols()).rows().to_vec()),
        n_cols: a.n_cols(),
    };
    red.diagonalize();
    red.normalize_signs();
    red.enforce_divisibility();
    red
}

/// Smith normal form with unimodular transforms.
pub fn smith_form(a: &SparseIntMatrix) -> SmithDecomposition {
    smith_form_dense(&a.to_dense())
}

pub fn smith_form_dense(a: &IntMatrix) -> SmithDecomposition {
    let red = reduce(a, true);
    let diagonal = red.diagonal();
    let left = IntMatrix::from_rows(red.left.expect("tracked")).expect("square");
    let right = IntMatrix::from_rows(red.right.expect("tracked")).expect("square");
    // from_rows loses the shape of 0-row/0-col matrices
    let left = if a.n_rows() == 0 { IntMatrix::zeros(0, 0) } else { left };
    let right = if a.n_cols() == 0 { IntMatrix::zeros(0, 0) } else { right };
    SmithDecomposition { left, right, diagonal }
}

/// Smith entries only; same pivot rule as [`smith_form`], no transforms.
pub fn smith_entries(a: &IntMatrix) -> Vec<BigInt> {
    reduce(a, false).diagonal()
}

/// Least positive `s` with `s * A^{-1}` integral, via the exact inverse.
pub fn last_entry_via_inverse(a: &SparseIntMatrix) -> Result<BigInt> {
    last_entry_via_inverse_dense(&a.to_dense())
}

pub fn last_entry_via_inverse_dense(a: &IntMatrix) -> Result<BigInt> {
    if !a.is_square() {
        return Err(Error::Dimension(format!("{}x{} is not square", a.n_rows(), a.n_cols())));
    }
    let inverse: RationalMatrix = a.inverse()?;
    Ok(inverse.denominator_lcm())
}

/// First column of `A^{-1}`, from solving `A x = e_0` exactly.
pub fn inverse_first_column(a: &IntMatrix) -> Result<Vec<BigRational>> {
    let mut e0 = IntMatrix::zeros(a.n_rows(), 1);
    if a.n_rows() > 0 {
        e0.set(0, 0, BigInt::one());
    }
    let (d, y) = a.solve_scaled(&e0)?;
    Ok((0..a.n_rows()).map(|i| BigRational::new(y.get(i, 0).clone(), d.clone())).collect())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DivisibilityReport {
    pub n: usize,
    pub k: u64,
    pub r: u64,
    pub smith_diagonal: Vec<String>,
    pub last_entry: String,
    pub bound: String,
    pub divides: bool,
    /// The bound equals the last entry exactly.
    pub exact: bool,
    pub inverse_oracle: String,
    pub oracle_agrees: bool,
    pub fundamental_multiplier: String,
    pub multiplier_equals_bound: bool,
}

impl DivisibilityReport {
    pub fn passed(&self) -> bool {
        self.divides && self.oracle_agrees && self.multiplier_equals_bound
    }
}

impl fmt::Display for DivisibilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DU_{} + {}I (r = {})", self.n, self.k, self.r)?;
        writeln!(f, "  smith diagonal: {}", self.smith_diagonal.join(" "))?;
        writeln!(f, "  last entry:     {}", self.last_entry)?;
        writeln!(
            f,
            "  bound:          {} ({}{})",
            self.bound,
            if self.divides { "divides" } else { "DOES NOT divide" },
            if self.exact { ", equal" } else { "" }
        )?;
        writeln!(
            f,
            "  inverse oracle: {} ({})",
            self.inverse_oracle,
            if self.oracle_agrees { "agrees" } else { "DISAGREES" }
        )?;
        write!(
            f,
            "  v_{{n,k}} multiplier: {} ({})",
            self.fundamental_multiplier,
            if self.multiplier_equals_bound { "equals bound" } else { "DIFFERS from bound" }
        )
    }
}

/// Last Smith entry of `DU_n + kI` against the predicted divisor, cross-checked
/// against the inverse oracle and the denominators of `v_{n,k}`.
pub fn check_divisibility_bound(poset: &GradedPoset, pair: &ChainPair, n: usize, k: u64) -> Result<DivisibilityReport> {
    let r = poset.r_or_infer()?;
    let matrix = poset.du_shifted(n, &BigInt::from(k))?.to_dense();
    let diagonal = smith_entries(&matrix);
    let last = diagonal.last().cloned().unwrap_or_else(BigInt::zero);
    let oracle = last_entry_via_inverse_dense(&matrix)?;
    let v = compute_v(poset, pair, n, k)?;
    let multiplier = minimal_integral_multiplier(&v);
    let bound = divisor_bound(r, n as u64, k);
    Ok(DivisibilityReport {
        n,
        k,
        r,
        smith_diagonal: diagonal.iter().map(ToString::to_string).collect(),
        divides: !last.is_zero() && (&last % &bound).is_zero(),
        exact: last == bound,
        oracle_agrees: oracle == last,
        multiplier_equals_bound: multiplier == bound,
        last_entry: last.to_string(),
        bound: bound.to_string(),
        inverse_oracle: oracle.to_string(),
        fundamental_multiplier: multiplier.to_string(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FirstColumnCheck {
    pub n: usize,
    pub k: u64,
    pub passed: bool,
    /// Indices where column 0 of the inverse differs from `v_{n,k}`.
    pub mismatches: Vec<usize>,
}

/// Compare column 0 of `(DU_n + kI)^{-1}` with `v_{n,k}`.
///
/// Column 0 is only the `t_n` column when the poset is indexed with `t_n`
/// first in every rank (see [`crate::chains::attach_chain_pair`]).
pub fn first_column_check(poset: &GradedPoset, pair: &ChainPair, n: usize, k: u64) -> Result<FirstColumnCheck> {
    let matrix = poset.du_shifted(n, &BigInt::from(k))?.to_dense();
    let column = inverse_first_column(&matrix)?;
    let v = compute_v(poset, pair, n, k)?;
    let mismatches: Vec<usize> =
        column.iter().enumerate().filter(|(i, c)| v.value.coeff(*i) != **c).map(|(i, _)| i).collect();
    Ok(FirstColumnCheck { n, k, passed: mismatches.is_empty(), mismatches })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OracleTrial {
    pub matrix: Vec<Vec<i64>>,
    pub smith_last: String,
    pub inverse_last: String,
    pub agrees: bool,
}

/// Random invertible `size x size` matrices with entries in `[-bound, bound]`,
/// comparing the last Smith entry with the inverse-denominator oracle.
/// Singular draws are discarded; the stream is fixed by `seed`.
pub fn random_oracle_trials(seed: u64, count: usize, size: usize, bound: i64) -> Vec<OracleTrial> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut trials = Vec::with_capacity(count);
    while trials.len() < count {
        let rows: Vec<Vec<i64>> =
            (0..size).map(|_| (0..size).map(|_| rng.gen_range(-bound..=bound)).collect()).collect();
        let a = IntMatrix::from_i64(&rows).expect("rectangular");
        let Ok(inverse_last) = last_entry_via_inverse_dense(&a) else {
            continue;
        };
        let smith_last = smith_form_dense(&a).diagonal.pop().expect("nonempty");
        trials.push(OracleTrial {
            matrix: rows,
            agrees: smith_last == inverse_last,
            smith_last: smith_last.to_string(),
            inverse_last: inverse_last.to_string(),
        });
    }
    trials
}
