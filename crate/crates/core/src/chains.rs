//! The distinguished pair of saturated chains `t` and `s`.
//!
//! Every element on either chain covers at most one element. For `r = 1`
//! the chains share ranks 0 and 1 and split at rank 2; for `r > 1` they
//! split at rank 1.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::poset::GradedPoset;

/// Two saturated chains starting at the bottom element, one index per rank.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ChainPair {
    pub t: Vec<usize>,
    pub s: Vec<usize>,
}

impl ChainPair {
    /// Highest rank covered by both chains.
    pub fn top_rank(&self) -> usize {
        self.t.len().min(self.s.len()).saturating_sub(1)
    }

    pub fn describe(&self, poset: &GradedPoset) -> String {
        let render = |chain: &[usize]| -> String {
            chain.iter().enumerate().map(|(n, &i)| poset.element_name(n, i)).collect::<Vec<_>>().join("  <  ")
        };
        format!("t: {}\ns: {}", render(&self.t), render(&self.s))
    }
}

/// Extend a saturated chain upward to `target` rank, keeping every new
/// element covering exactly one element.
///
/// `chain[m]` is the element at rank `start_rank + m`. The last two
/// elements must each cover at most one element. Among admissible next
/// covers, the smallest index wins.
pub fn extend_chain(poset: &GradedPoset, start_rank: usize, chain: &[usize], target: usize) -> Result<Vec<usize>> {
    if chain.is_empty() {
        return Err(Error::InvalidChain("empty chain".into()));
    }
    let last_rank = start_rank + chain.len() - 1;
    if last_rank > poset.top_rank() {
        return Err(Error::RankOutOfRange { rank: last_rank, lo: 0, hi: poset.top_rank() });
    }
    if target > poset.top_rank() {
        return Err(Error::RankOutOfRange { rank: target, lo: last_rank, hi: poset.top_rank() });
    }
    for (m, pair) in chain.windows(2).enumerate() {
        let n = start_rank + m;
        if !poset.upper_covers(n, pair[0]).contains(&pair[1]) {
            return Err(Error::InvalidChain(format!(
                "{} is not covered by {}",
                poset.element_name(n, pair[0]),
                poset.element_name(n + 1, pair[1])
            )));
        }
    }
    for (m, &x) in chain.iter().enumerate().rev().take(2) {
        let n = start_rank + m;
        if x >= poset.rank_size(n) {
            return Err(Error::InvalidChain(format!("index {x} out of range at rank {n}")));
        }
        if poset.lower_covers(n, x).len() > 1 {
            return Err(Error::InvalidChain(format!("{} covers more than one element", poset.element_name(n, x))));
        }
    }

    let mut out = chain.to_vec();
    let mut rank = last_rank;
    while rank < target {
        let current = *out.last().expect("nonempty");
        let next = poset
            .upper_covers(rank, current)
            .iter()
            .copied()
            .find(|&y| poset.lower_covers(rank + 1, y).len() <= 1)
            .ok_or(Error::ChainStuck(rank))?;
        out.push(next);
        rank += 1;
    }
    Ok(out)
}

/// The lexicographically least chain pair under the current indexing,
/// extended through the top stored rank.
pub fn find_chain_pair(poset: &GradedPoset, r: u64) -> Result<ChainPair> {
    let top = poset.top_rank();
    if top < 2 {
        return Err(Error::RankOutOfRange { rank: top, lo: 2, hi: usize::MAX });
    }
    if r == 0 {
        return Err(Error::InvalidParameter("r must be positive".into()));
    }
    if poset.rank_size(1) as u64 != r {
        return Err(Error::InvalidChain(format!("expected {r} atoms, found {}", poset.rank_size(1))));
    }
    let (t_start, s_start, start_rank) = if r == 1 {
        let branches: Vec<usize> =
            poset.upper_covers(1, 0).iter().copied().filter(|&y| poset.lower_covers(2, y).len() == 1).collect();
        if branches.len() < 2 {
            return Err(Error::InvalidChain(format!(
                "r = 1 needs two rank-2 elements covering only the atom, found {}",
                branches.len()
            )));
        }
        (vec![0, 0, branches[0]], vec![0, 0, branches[1]], 0)
    } else {
        (vec![0, 0], vec![0, 1], 0)
    };
    let t = extend_chain(poset, start_rank, &t_start, top)?;
    let s = extend_chain(poset, start_rank, &s_start, top)?;
    Ok(ChainPair { t, s })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ChainProperty {
    /// Both chains have one element per rank, from the bottom up.
    Ranks,
    /// Consecutive entries are cover relations.
    Saturated,
    /// r = 1: equal at ranks 0 and 1, distinct from rank 2 on.
    BranchAtTwo,
    /// r > 1: equal at rank 0, distinct from rank 1 on.
    BranchAtOne,
    /// Every chain element covers at most one element.
    SingleLowerCover,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ChainViolation {
    pub property: ChainProperty,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ChainReport {
    pub violations: Vec<ChainViolation>,
}

impl ChainReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violates(&self, property: ChainProperty) -> bool {
        self.violations.iter().any(|v| v.property == property)
    }
}

impl fmt::Display for ChainReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.passed() {
            return write!(f, "chain pair: pass");
        }
        writeln!(f, "chain pair: FAIL")?;
        for v in &self.violations {
            writeln!(f, "  {:?}: {}", v.property, v.message)?;
        }
        Ok(())
    }
}

/// Check all chain-pair properties combinatorially, listing each violation.
pub fn verify_chain_pair(poset: &GradedPoset, pair: &ChainPair, r: u64) -> ChainReport {
    let mut violations = Vec::new();
    let mut push = |property, message: String| violations.push(ChainViolation { property, message });

    if pair.t.len() != pair.s.len() {
        push(ChainProperty::Ranks, format!("chain lengths differ: {} vs {}", pair.t.len(), pair.s.len()));
    }
    let mut in_range = true;
    for (name, chain) in [("t", &pair.t), ("s", &pair.s)] {
        if chain.is_empty() {
            push(ChainProperty::Ranks, format!("{name} is empty"));
            in_range = false;
        }
        if chain.len() > poset.top_rank() + 1 {
            push(ChainProperty::Ranks, format!("{name} extends past the top rank"));
            in_range = false;
            continue;
        }
        for (n, &x) in chain.iter().enumerate() {
            if x >= poset.rank_size(n) {
                push(ChainProperty::Ranks, format!("{name}_{n} = {x} is not an element of rank {n}"));
                in_range = false;
            }
        }
    }
    if !in_range {
        return ChainReport { violations };
    }

    for (name, chain) in [("t", &pair.t), ("s", &pair.s)] {
        for n in 1..chain.len() {
            if !poset.upper_covers(n - 1, chain[n - 1]).contains(&chain[n]) {
                push(
                    ChainProperty::Saturated,
                    format!(
                        "{name}_{n} = [{}] does not cover {name}_{} = [{}]",
                        poset.element_name(n, chain[n]),
                        n - 1,
                        poset.element_name(n - 1, chain[n - 1])
                    ),
                );
            }
        }
        for (n, &x) in chain.iter().enumerate() {
            let covers = poset.lower_covers(n, x).len();
            if covers > 1 {
                push(
                    ChainProperty::SingleLowerCover,
                    format!("{name}_{n} = [{}] covers {covers} elements", poset.element_name(n, x)),
                );
            }
        }
    }

    let (property, shared) = if r == 1 { (ChainProperty::BranchAtTwo, 2) } else { (ChainProperty::BranchAtOne, 1) };
    for (n, (&a, &b)) in pair.t.iter().zip(&pair.s).enumerate() {
        if n < shared && a != b {
            push(property, format!("t_{n} != s_{n} but they must coincide"));
        }
        if n >= shared && a == b {
            push(property, format!("t_{n} = s_{n} = [{}] but they must differ", poset.element_name(n, a)));
        }
    }
    ChainReport { violations }
}

/// A poset relabeled so that `t_n` has index 0 in every rank.
#[derive(Clone, Debug)]
pub struct AttachedPoset {
    pub poset: GradedPoset,
    pub pair: ChainPair,
    /// `permutation[n][old] = new`.
    pub permutation: Vec<Vec<usize>>,
}

impl AttachedPoset {
    /// Index in the original poset of element `new` of rank `n`.
    pub fn original_index(&self, n: usize, new: usize) -> usize {
        self.permutation[n].iter().position(|&x| x == new).expect("permutation")
    }
}

/// Reorder each rank by swapping `t_n` with index 0.
pub fn attach_chain_pair(poset: &GradedPoset, pair: &ChainPair) -> Result<AttachedPoset> {
    if pair.t.len() != poset.top_rank() + 1 || pair.s.len() != pair.t.len() {
        return Err(Error::InvalidChain("chain pair must span every stored rank".into()));
    }
    let permutation: Vec<Vec<usize>> = poset
        .rank_sizes()
        .iter()
        .enumerate()
        .map(|(n, &p)| {
            let mut perm: Vec<usize> = (0..p).collect();
            perm.swap(0, pair.t[n]);
            perm
        })
        .collect();
    let relabeled = poset.relabel(&permutation)?;
    let map = |chain: &[usize]| chain.iter().enumerate().map(|(n, &i)| permutation[n][i]).collect();
    let pair = ChainPair { t: map(&pair.t), s: map(&pair.s) };
    Ok(AttachedPoset { poset: relabeled, pair, permutation })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{build_young, build_young_fibonacci, FamilySpec};
    use crate::poset::RankVector;

    fn labels(p: &GradedPoset, chain: &[usize]) -> Vec<String> {
        chain.iter().enumerate().map(|(n, &i)| p.label(n, i).unwrap().to_string()).collect()
    }

    #[test]
    fn extend_single_row() {
        let y = build_young(6);
        let chain = extend_chain(&y, 0, &[0, 0], 5).unwrap();
        assert_eq!(labels(&y, &chain), ["∅", "(1)", "(2)", "(3)", "(4)", "(5)"]);
    }

    #[test]
    fn extend_single_column() {
        let y = build_young(6);
        // (1) ⋖ (1,1): rank 1 index 0, rank 2 index 1
        let chain = extend_chain(&y, 1, &[0, 1], 4).unwrap();
        let names: Vec<&str> = chain.iter().enumerate().map(|(m, &i)| y.label(m + 1, i).unwrap()).collect();
        assert_eq!(names, ["(1)", "(1,1)", "(1,1,1)", "(1,1,1,1)"]);
    }

    #[test]
    fn extend_to_current_rank_is_identity() {
        let y = build_young(4);
        assert_eq!(extend_chain(&y, 0, &[0, 0, 1], 2).unwrap(), vec![0, 0, 1]);
    }

    #[test]
    fn extend_rejects_bad_input() {
        let y = build_young(4);
        // (2,1) covers two elements
        assert!(matches!(extend_chain(&y, 2, &[0, 1], 4), Err(Error::InvalidChain(_))));
        assert!(matches!(extend_chain(&y, 0, &[0, 0], 9), Err(Error::RankOutOfRange { .. })));
    }

    #[test]
    fn extend_reports_stuck_rank() {
        // Only (1) covers ∅; (2) is missing its upward continuation that covers a single element.
        let p = GradedPoset::new(vec![1, 1, 1, 1], vec![vec![(0, 0)], vec![(0, 0)], vec![(0, 0)]], None).unwrap();
        assert!(extend_chain(&p, 0, &[0, 0], 3).is_ok());
        let q =
            GradedPoset::new(vec![1, 1, 2, 1], vec![vec![(0, 0)], vec![(0, 0), (0, 1)], vec![(0, 0), (1, 0)]], None)
                .unwrap();
        assert_eq!(extend_chain(&q, 0, &[0, 0, 0], 3), Err(Error::ChainStuck(2)));
    }

    #[test]
    fn young_pair_is_rows_and_columns() {
        let y = build_young(6);
        let pair = find_chain_pair(&y, 1).unwrap();
        assert_eq!(labels(&y, &pair.t)[6], "(6)");
        assert_eq!(labels(&y, &pair.s)[6], "(1,1,1,1,1,1)");
        assert_eq!(labels(&y, &pair.s)[3], "(1,1,1)");
        assert!(verify_chain_pair(&y, &pair, 1).passed());
        assert_eq!(pair.t[1], pair.s[1]);
        assert_ne!(pair.t[2], pair.s[2]);
    }

    #[test]
    fn product_pair_separates_factors() {
        let yy = FamilySpec::product_of("young,young").unwrap().build(4).unwrap();
        let pair = find_chain_pair(&yy, 2).unwrap();
        assert_eq!(yy.label(4, pair.t[4]), Some("((4), ∅)"));
        assert_eq!(yy.label(4, pair.s[4]), Some("(∅, (4))"));
        assert!(verify_chain_pair(&yy, &pair, 2).passed());
    }

    #[test]
    fn young_fibonacci_pair() {
        let yf = build_young_fibonacci(7);
        let pair = find_chain_pair(&yf, 1).unwrap();
        assert!(verify_chain_pair(&yf, &pair, 1).passed());
        // D t_n = t_{n-1}
        for n in 1..=7 {
            let down = yf.apply_down(&RankVector::basis(n, pair.t[n])).unwrap();
            assert_eq!(down, RankVector::basis(n - 1, pair.t[n - 1]));
        }
    }

    #[test]
    fn equal_chains_fail_branching() {
        let yy = FamilySpec::product_of("young,young").unwrap().build(4).unwrap();
        let pair = find_chain_pair(&yy, 2).unwrap();
        let same = ChainPair { t: pair.t.clone(), s: pair.t.clone() };
        let report = verify_chain_pair(&yy, &same, 2);
        assert!(report.violates(ChainProperty::BranchAtOne));
        assert!(!report.violates(ChainProperty::SingleLowerCover));
    }

    #[test]
    fn routing_through_two_one_fails_single_cover() {
        let y = build_young(4);
        let mut pair = find_chain_pair(&y, 1).unwrap();
        // ∅ ⋖ (1) ⋖ (2) ⋖ (2,1) ⋖ (2,2)
        pair.t = vec![0, 0, 0, 1, 2];
        assert_eq!(y.label(3, 1), Some("(2,1)"));
        assert_eq!(y.label(4, 2), Some("(2,2)"));
        let report = verify_chain_pair(&y, &pair, 1);
        assert!(report.violates(ChainProperty::SingleLowerCover));
        assert!(!report.violates(ChainProperty::Saturated));
    }

    #[test]
    fn attach_moves_t_to_front() {
        let yf = build_young_fibonacci(6);
        let pair = find_chain_pair(&yf, 1).unwrap();
        let attached = attach_chain_pair(&yf, &pair).unwrap();
        assert!(attached.pair.t.iter().all(|&i| i == 0));
        assert!(verify_chain_pair(&attached.poset, &attached.pair, 1).passed());
        for n in 0..=6 {
            assert_eq!(attached.original_index(n, 0), pair.t[n]);
            assert_eq!(attached.poset.label(n, 0), yf.label(n, pair.t[n]));
        }
    }
}
