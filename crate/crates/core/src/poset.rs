//! Truncated graded posets, their up/down operators, and the
//! differential-poset axiom certifier.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::SparseIntMatrix;

/// A graded poset with a minimum element, stored through rank `top_rank`.
///
/// Elements are identified by `(rank, index)` with rank-local indices
/// `0..rank_sizes[rank]`. Cover relations only ever join consecutive ranks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedPoset {
    rank_sizes: Vec<usize>,
    /// `up[n][i]`: sorted indices of the rank-(n+1) elements covering element i of rank n.
    up: Vec<Vec<Vec<usize>>>,
    /// `down[n][j]`: sorted indices of the rank-(n-1) elements covered by element j of rank n.
    /// `down[0]` is a single empty list.
    down: Vec<Vec<Vec<usize>>>,
    r: Option<u64>,
    labels: Vec<Vec<Option<String>>>,
}

impl GradedPoset {
    /// Build from rank sizes and per-level cover edges.
    ///
    /// `edges[n]` holds pairs `(i, j)` meaning element i of rank n is covered
    /// by element j of rank n+1, so `edges.len()` must be `rank_sizes.len() - 1`.
    ///
    /// Elements above rank 0 that cover nothing are accepted here and reported
    /// by [`GradedPoset::check_axioms`], so damaged inputs can still be diagnosed.
    pub fn new(rank_sizes: Vec<usize>, edges: Vec<Vec<(usize, usize)>>, r: Option<u64>) -> Result<Self> {
        if rank_sizes.is_empty() {
            return Err(Error::InvalidPoset("no ranks".into()));
        }
        if rank_sizes[0] != 1 {
            return Err(Error::InvalidPoset(format!("rank 0 must hold exactly one element, found {}", rank_sizes[0])));
        }
        if let Some(n) = rank_sizes.iter().position(|&p| p == 0) {
            return Err(Error::InvalidPoset(format!("rank {n} is empty")));
        }
        if edges.len() + 1 != rank_sizes.len() {
            return Err(Error::InvalidPoset(format!(
                "expected edge lists for {} levels, got {}",
                rank_sizes.len() - 1,
                edges.len()
            )));
        }
        if r == Some(0) {
            return Err(Error::InvalidParameter("r must be positive".into()));
        }
        let mut up: Vec<Vec<Vec<usize>>> = rank_sizes.iter().map(|&p| vec![Vec::new(); p]).collect();
        let mut down: Vec<Vec<Vec<usize>>> = rank_sizes.iter().map(|&p| vec![Vec::new(); p]).collect();
        for (n, level) in edges.iter().enumerate() {
            let mut seen = BTreeSet::new();
            for &(i, j) in level {
                if i >= rank_sizes[n] || j >= rank_sizes[n + 1] {
                    return Err(Error::InvalidPoset(format!(
                        "edge {n}:{i} {}:{j} out of range (rank sizes {} and {})",
                        n + 1,
                        rank_sizes[n],
                        rank_sizes[n + 1]
                    )));
                }
                if !seen.insert((i, j)) {
                    return Err(Error::InvalidPoset(format!("duplicate edge {n}:{i} {}:{j}", n + 1)));
                }
                up[n][i].push(j);
                down[n + 1][j].push(i);
            }
        }
        for lists in up.iter_mut().chain(down.iter_mut()) {
            for l in lists.iter_mut() {
                l.sort_unstable();
            }
        }
        let labels = rank_sizes.iter().map(|&p| vec![None; p]).collect();
        Ok(GradedPoset { rank_sizes, up, down, r, labels })
    }

    /// Attach human-readable names, one list per rank.
    pub fn with_labels(mut self, labels: Vec<Vec<Option<String>>>) -> Result<Self> {
        if labels.len() != self.rank_sizes.len() || labels.iter().zip(&self.rank_sizes).any(|(l, &p)| l.len() != p) {
            return Err(Error::InvalidPoset("label shape does not match rank sizes".into()));
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn with_r(mut self, r: Option<u64>) -> Self {
        self.r = r;
        self
    }

    pub fn top_rank(&self) -> usize {
        self.rank_sizes.len() - 1
    }

    pub fn rank_sizes(&self) -> &[usize] {
        &self.rank_sizes
    }

    pub fn rank_size(&self, n: usize) -> usize {
        self.rank_sizes[n]
    }

    /// Declared differential parameter, if any.
    pub fn r(&self) -> Option<u64> {
        self.r
    }

    pub fn label(&self, n: usize, i: usize) -> Option<&str> {
        self.labels[n][i].as_deref()
    }

    pub fn labels(&self) -> &[Vec<Option<String>>] {
        &self.labels
    }

    /// `n:i`, followed by the label when one is known.
    pub fn element_name(&self, n: usize, i: usize) -> String {
        match self.label(n, i) {
            Some(l) => format!("{n}:{i} {l}"),
            None => format!("{n}:{i}"),
        }
    }

    /// Elements of rank n+1 covering element i of rank n (empty at the top rank).
    pub fn upper_covers(&self, n: usize, i: usize) -> &[usize] {
        &self.up[n][i]
    }

    /// Elements of rank n-1 covered by element i of rank n.
    pub fn lower_covers(&self, n: usize, i: usize) -> &[usize] {
        &self.down[n][i]
    }

    /// Cover edges between rank n and rank n+1, in `(lower, upper)` order.
    pub fn edges(&self, n: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.up[n].iter().enumerate().flat_map(|(i, js)| js.iter().map(move |&j| (i, j)))
    }

    pub fn edge_lists(&self) -> Vec<Vec<(usize, usize)>> {
        (0..self.top_rank()).map(|n| self.edges(n).collect()).collect()
    }

    pub fn num_edges(&self) -> usize {
        (0..self.top_rank()).map(|n| self.edges(n).count()).sum()
    }

    fn check_rank(&self, n: usize, lo: usize, hi: usize) -> Result<()> {
        if n < lo || n > hi {
            return Err(Error::RankOutOfRange { rank: n, lo, hi });
        }
        Ok(())
    }

    /// Matrix of `U_n : ZP_n -> ZP_{n+1}`, of shape `p_{n+1} x p_n`.
    pub fn up_matrix(&self, n: usize) -> Result<SparseIntMatrix> {
        if self.top_rank() == 0 {
            return Err(Error::RankOutOfRange { rank: n, lo: 0, hi: 0 });
        }
        self.check_rank(n, 0, self.top_rank() - 1)?;
        let mut m = SparseIntMatrix::zeros(self.rank_sizes[n + 1], self.rank_sizes[n]);
        for (i, j) in self.edges(n) {
            m.set(j, i, BigInt::one());
        }
        Ok(m)
    }

    /// Matrix of `D_n : ZP_n -> ZP_{n-1}`, the transpose of `U_{n-1}`.
    pub fn down_matrix(&self, n: usize) -> Result<SparseIntMatrix> {
        self.check_rank(n, 1, self.top_rank())?;
        Ok(self.up_matrix(n - 1)?.transpose())
    }

    /// `DU_n = D_{n+1} U_n`, defined for `n < top_rank`.
    pub fn du(&self, n: usize) -> Result<SparseIntMatrix> {
        let u = self.up_matrix(n)?;
        u.transpose().mul(&u)
    }

    /// `UD_n = U_{n-1} D_n`; the zero 1x1 matrix at rank 0.
    pub fn ud(&self, n: usize) -> Result<SparseIntMatrix> {
        self.check_rank(n, 0, self.top_rank())?;
        if n == 0 {
            return Ok(SparseIntMatrix::zeros(1, 1));
        }
        let u = self.up_matrix(n - 1)?;
        u.mul(&u.transpose())
    }

    /// `DU_n + k I`.
    pub fn du_shifted(&self, n: usize, k: &BigInt) -> Result<SparseIntMatrix> {
        self.du(n)?.add_diagonal(k)
    }

    /// Candidate differential parameter: the number of atoms.
    pub fn infer_r(&self) -> Result<u64> {
        if self.top_rank() == 0 {
            return Err(Error::InvalidPoset("rank 1 is not stored; cannot count atoms".into()));
        }
        Ok(self.rank_sizes[1] as u64)
    }

    /// Declared r if present, otherwise the atom count.
    pub fn r_or_infer(&self) -> Result<u64> {
        match self.r {
            Some(r) => Ok(r),
            None => self.infer_r(),
        }
    }

    /// Relabel elements: element i of rank n becomes `perms[n][i]`.
    pub fn relabel(&self, perms: &[Vec<usize>]) -> Result<GradedPoset> {
        if perms.len() != self.rank_sizes.len() {
            return Err(Error::Dimension("one permutation per rank required".into()));
        }
        for (n, perm) in perms.iter().enumerate() {
            let mut sorted = perm.clone();
            sorted.sort_unstable();
            if sorted != (0..self.rank_sizes[n]).collect::<Vec<_>>() {
                return Err(Error::InvalidParameter(format!("rank {n}: not a permutation")));
            }
        }
        let edges = (0..self.top_rank())
            .map(|n| self.edges(n).map(|(i, j)| (perms[n][i], perms[n + 1][j])).collect())
            .collect();
        let mut labels: Vec<Vec<Option<String>>> = self.rank_sizes.iter().map(|&p| vec![None; p]).collect();
        for (n, perm) in perms.iter().enumerate() {
            for (old, &new) in perm.iter().enumerate() {
                labels[n][new] = self.labels[n][old].clone();
            }
        }
        GradedPoset::new(self.rank_sizes.clone(), edges, self.r)?.with_labels(labels)
    }

    /// `U` applied to a vector of rank n.
    pub fn apply_up(&self, v: &RankVector) -> Result<RankVector> {
        self.check_rank(v.rank, 0, self.top_rank().saturating_sub(1))?;
        if self.top_rank() == 0 {
            return Err(Error::RankOutOfRange { rank: v.rank, lo: 0, hi: 0 });
        }
        let mut out = RankVector::zero(v.rank + 1);
        for (&i, c) in &v.coeffs {
            for &j in &self.up[v.rank][i] {
                out.add_to(j, c);
            }
        }
        Ok(out)
    }

    /// `D` applied to a vector of rank n >= 1.
    pub fn apply_down(&self, v: &RankVector) -> Result<RankVector> {
        self.check_rank(v.rank, 1, self.top_rank())?;
        let mut out = RankVector::zero(v.rank - 1);
        for (&j, c) in &v.coeffs {
            for &i in &self.down[v.rank][j] {
                out.add_to(i, c);
            }
        }
        Ok(out)
    }

    /// Certify `DU_n - UD_n = rI` rank by rank, with direct (D1)/(D2)
    /// counterexamples for every failing rank.
    ///
    /// Ranks `0..top_rank` are checked; the top rank is never checkable
    /// because its upper covers are not stored.
    pub fn check_axioms(&self, r: u64) -> AxiomReport {
        let top = self.top_rank();
        let mut ranks = Vec::new();
        for n in 0..top {
            ranks.push(self.check_rank_axioms(n, r));
        }
        let orphans = self
            .orphans()
            .into_iter()
            .map(|(rank, i)| AxiomViolation::NoLowerCover { rank, element: self.element_name(rank, i) });
        AxiomReport { r, top_rank: top, ranks, orphans: orphans.collect() }
    }

    fn check_rank_axioms(&self, n: usize, r: u64) -> RankCheck {
        let du = self.du(n).expect("n < top rank");
        let ud = self.ud(n).expect("n <= top rank");
        let diff = du.sub(&ud).expect("square, same size");
        let expected = SparseIntMatrix::scalar(self.rank_sizes[n], BigInt::from(r));
        let identity_holds = diff == expected;

        let mut violations = Vec::new();
        if !identity_holds {
            // (D1): element covering m others is covered by m + r others.
            for i in 0..self.rank_sizes[n] {
                let below = self.down[n][i].len();
                let above = self.up[n][i].len();
                if above != below + r as usize {
                    violations.push(AxiomViolation::D1 {
                        rank: n,
                        element: self.element_name(n, i),
                        covers: below,
                        covered_by: above,
                    });
                }
            }
            // (D2): only pairs sharing a neighbour above or below can fail.
            let mut candidates = BTreeSet::new();
            for lowers in &self.down[n + 1] {
                push_pairs(lowers, &mut candidates);
            }
            if n >= 1 {
                for uppers in &self.up[n - 1] {
                    push_pairs(uppers, &mut candidates);
                }
            }
            for (a, b) in candidates {
                let common_below = if n == 0 { 0 } else { count_common(&self.down[n][a], &self.down[n][b]) };
                let common_above = count_common(&self.up[n][a], &self.up[n][b]);
                if common_below != common_above {
                    violations.push(AxiomViolation::D2 {
                        rank: n,
                        first: self.element_name(n, a),
                        second: self.element_name(n, b),
                        common_below,
                        common_above,
                    });
                }
            }
        }
        RankCheck { rank: n, identity_holds, violations }
    }

    /// Elements above rank 0 covering nothing; such a poset has no minimum.
    pub fn orphans(&self) -> Vec<(usize, usize)> {
        self.down
            .iter()
            .enumerate()
            .skip(1)
            .flat_map(|(n, lists)| lists.iter().enumerate().filter(|(_, l)| l.is_empty()).map(move |(i, _)| (n, i)))
            .collect()
    }

    /// `p_{n-1} <= p_n` for all stored ranks.
    pub fn weakly_increasing(&self) -> bool {
        self.rank_sizes.windows(2).all(|w| w[0] <= w[1])
    }
}

fn push_pairs(ids: &[usize], out: &mut BTreeSet<(usize, usize)>) {
    for (x, &a) in ids.iter().enumerate() {
        for &b in &ids[x + 1..] {
            out.insert((a.min(b), a.max(b)));
        }
    }
}

fn count_common(a: &[usize], b: &[usize]) -> usize {
    let (mut x, mut y, mut count) = (0, 0, 0);
    while x < a.len() && y < b.len() {
        match a[x].cmp(&b[y]) {
            std::cmp::Ordering::Less => x += 1,
            std::cmp::Ordering::Greater => y += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                x += 1;
                y += 1;
            }
        }
    }
    count
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "axiom")]
pub enum AxiomViolation {
    D1 { rank: usize, element: String, covers: usize, covered_by: usize },
    D2 { rank: usize, first: String, second: String, common_below: usize, common_above: usize },
    NoLowerCover { rank: usize, element: String },
}

impl fmt::Display for AxiomViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AxiomViolation::D1 { rank, element, covers, covered_by } => write!(
                f,
                "(D1) rank {rank}: element [{element}] covers {covers} but is covered by {covered_by}"
            ),
            AxiomViolation::D2 { rank, first, second, common_below, common_above } => write!(
                f,
                "(D2) rank {rank}: [{first}] and [{second}] share {common_below} lower covers but {common_above} upper covers"
            ),
            AxiomViolation::NoLowerCover { rank, element } => {
                write!(f, "rank {rank}: element [{element}] covers nothing, so the bottom is not a minimum")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RankCheck {
    pub rank: usize,
    /// Whether `DU_n - UD_n = rI` holds exactly.
    pub identity_holds: bool,
    pub violations: Vec<AxiomViolation>,
}

impl RankCheck {
    pub fn passed(&self) -> bool {
        self.identity_holds && self.violations.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AxiomReport {
    pub r: u64,
    pub top_rank: usize,
    pub ranks: Vec<RankCheck>,
    /// Elements above rank 0 that cover nothing.
    pub orphans: Vec<AxiomViolation>,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        !self.ranks.is_empty() && self.ranks.iter().all(RankCheck::passed) && self.orphans.is_empty()
    }

    /// Highest n such that every rank `0..=n` passes.
    pub fn highest_verified(&self) -> Option<usize> {
        self.ranks.iter().take_while(|c| c.passed()).last().map(|c| c.rank)
    }

    pub fn failed_ranks(&self) -> Vec<usize> {
        self.ranks.iter().filter(|c| !c.passed()).map(|c| c.rank).collect()
    }

    pub fn violations(&self) -> impl Iterator<Item = &AxiomViolation> {
        self.orphans.iter().chain(self.ranks.iter().flat_map(|c| c.violations.iter()))
    }
}

impl fmt::Display for AxiomReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "axioms for r = {}", self.r)?;
        for c in &self.ranks {
            let verdict = if c.passed() { "pass" } else { "FAIL" };
            writeln!(f, "  rank {:>3}: DU - UD = rI {verdict}", c.rank)?;
            for v in &c.violations {
                writeln!(f, "    {v}")?;
            }
        }
        for v in &self.orphans {
            writeln!(f, "  {v}")?;
        }
        match self.highest_verified() {
            Some(h) => writeln!(f, "  verified through rank {h}")?,
            None => writeln!(f, "  no rank verified")?,
        }
        write!(f, "  rank {} is the stored top and cannot be checked (its upper covers are not stored)", self.top_rank)
    }
}

/// A formal rational combination of the elements of one rank.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct RankVector {
    rank: usize,
    coeffs: BTreeMap<usize, BigRational>,
}

impl RankVector {
    pub fn zero(rank: usize) -> Self {
        RankVector { rank, coeffs: BTreeMap::new() }
    }

    /// The basis element for element `index` of rank `rank`.
    pub fn basis(rank: usize, index: usize) -> Self {
        let mut v = Self::zero(rank);
        v.coeffs.insert(index, BigRational::one());
        v
    }

    pub fn from_coeffs(rank: usize, coeffs: impl IntoIterator<Item = (usize, BigRational)>) -> Self {
        let mut v = Self::zero(rank);
        for (i, c) in coeffs {
            v.add_to(i, &c);
        }
        v
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn coeffs(&self) -> &BTreeMap<usize, BigRational> {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> BigRational {
        self.coeffs.get(&i).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add_to(&mut self, i: usize, c: &BigRational) {
        if c.is_zero() {
            return;
        }
        let slot = self.coeffs.entry(i).or_insert_with(BigRational::zero);
        *slot += c;
        if slot.is_zero() {
            self.coeffs.remove(&i);
        }
    }

    pub fn scaled(&self, c: &BigRational) -> RankVector {
        if c.is_zero() {
            return RankVector::zero(self.rank);
        }
        RankVector { rank: self.rank, coeffs: self.coeffs.iter().map(|(&i, x)| (i, x * c)).collect() }
    }

    pub fn add(&self, other: &RankVector) -> Result<RankVector> {
        if self.rank != other.rank {
            return Err(Error::RankMismatch(self.rank, other.rank));
        }
        let mut out = self.clone();
        for (&i, c) in &other.coeffs {
            out.add_to(i, c);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &RankVector) -> Result<RankVector> {
        self.add(&other.scaled(&-BigRational::one()))
    }

    /// The bilinear form with `<x, y> = delta_{x,y}` on basis elements.
    pub fn pairing(&self, other: &RankVector) -> Result<BigRational> {
        if self.rank != other.rank {
            return Err(Error::RankMismatch(self.rank, other.rank));
        }
        let mut acc = BigRational::zero();
        for (i, a) in &self.coeffs {
            if let Some(b) = other.coeffs.get(i) {
                acc += a * b;
            }
        }
        Ok(acc)
    }

    /// Least positive integer `s` with `s * self` integral.
    pub fn denominator_lcm(&self) -> BigInt {
        self.coeffs.values().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()))
    }

    /// Dense coefficient list of length `size`.
    pub fn to_dense(&self, size: usize) -> Vec<BigRational> {
        (0..size).map(|i| self.coeff(i)).collect()
    }

    pub fn max_index(&self) -> Option<usize> {
        self.coeffs.keys().next_back().copied()
    }
}

/// `<a, b>` as a free function.
pub fn pairing(a: &RankVector, b: &RankVector) -> Result<BigRational> {
    a.pairing(b)
}
