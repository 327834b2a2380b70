//! Deterministic builders for the standard differential-poset families.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::poset::GradedPoset;

/// Which family to build; products nest.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FamilySpec {
    Young,
    YoungFibonacci,
    Product(Vec<FamilySpec>),
}

impl FamilySpec {
    pub fn build(&self, top_rank: usize) -> Result<GradedPoset> {
        match self {
            FamilySpec::Young => Ok(build_young(top_rank)),
            FamilySpec::YoungFibonacci => Ok(build_young_fibonacci(top_rank)),
            FamilySpec::Product(factors) => {
                if factors.len() < 2 {
                    return Err(Error::InvalidParameter("a product needs at least two factors".into()));
                }
                let built = factors.iter().map(|f| f.build(top_rank)).collect::<Result<Vec<_>>>()?;
                build_product(&built, top_rank)
            }
        }
    }

    /// Differential parameter of the family.
    pub fn r(&self) -> u64 {
        match self {
            FamilySpec::Young | FamilySpec::YoungFibonacci => 1,
            FamilySpec::Product(fs) => fs.iter().map(FamilySpec::r).sum(),
        }
    }

    /// `product` with a comma-separated factor list such as `young,yf`.
    pub fn product_of(factors: &str) -> Result<FamilySpec> {
        let fs = factors.split(',').map(|s| s.trim().parse()).collect::<Result<Vec<FamilySpec>>>()?;
        if fs.len() < 2 {
            return Err(Error::InvalidParameter(format!("product needs at least two factors, got '{factors}'")));
        }
        Ok(FamilySpec::Product(fs))
    }
}

impl FromStr for FamilySpec {
    type Err = Error;

    /// `young`, `yf`, or `AxB[xC...]` for products.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.contains(['x', '×']) {
            let parts = s.split(['x', '×']).map(str::parse).collect::<Result<Vec<FamilySpec>>>()?;
            return Ok(FamilySpec::Product(parts));
        }
        match s {
            "young" | "Y" => Ok(FamilySpec::Young),
            "yf" | "young_fibonacci" | "YF" => Ok(FamilySpec::YoungFibonacci),
            other => Err(Error::InvalidParameter(format!("unknown family '{other}'"))),
        }
    }
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilySpec::Young => f.write_str("young"),
            FamilySpec::YoungFibonacci => f.write_str("yf"),
            FamilySpec::Product(fs) => {
                let names: Vec<String> = fs.iter().map(ToString::to_string).collect();
                f.write_str(&names.join("x"))
            }
        }
    }
}

/// All partitions of `n` in lexicographically decreasing order.
pub fn partitions(n: usize) -> Vec<Vec<usize>> {
    fn go(remaining: usize, max_part: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if remaining == 0 {
            out.push(prefix.clone());
            return;
        }
        for part in (1..=remaining.min(max_part)).rev() {
            prefix.push(part);
            go(remaining - part, part, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(n, n, &mut Vec::new(), &mut out);
    out
}

fn partition_label(p: &[usize]) -> String {
    if p.is_empty() {
        return "∅".to_string();
    }
    let parts: Vec<String> = p.iter().map(ToString::to_string).collect();
    format!("({})", parts.join(","))
}

/// Young's lattice through rank `top_rank`: partitions ordered by containment
/// of Young diagrams. Covers add a single box.
pub fn build_young(top_rank: usize) -> GradedPoset {
    let ranks: Vec<Vec<Vec<usize>>> = (0..=top_rank).map(partitions).collect();
    let index: Vec<HashMap<&[usize], usize>> =
        ranks.iter().map(|rank| rank.iter().enumerate().map(|(i, p)| (p.as_slice(), i)).collect()).collect();

    let mut edges = Vec::with_capacity(top_rank);
    for n in 0..top_rank {
        let mut level = Vec::new();
        for (i, lambda) in ranks[n].iter().enumerate() {
            for row in 0..=lambda.len() {
                let current = lambda.get(row).copied().unwrap_or(0);
                if row > 0 && lambda[row - 1] <= current {
                    continue;
                }
                let mut mu = lambda.clone();
                if row == lambda.len() {
                    mu.push(1);
                } else {
                    mu[row] += 1;
                }
                level.push((i, index[n + 1][mu.as_slice()]));
            }
        }
        edges.push(level);
    }
    let sizes = ranks.iter().map(Vec::len).collect();
    let labels = ranks.iter().map(|rank| rank.iter().map(|p| Some(partition_label(p))).collect()).collect();
    GradedPoset::new(sizes, edges, Some(1)).and_then(|p| p.with_labels(labels)).expect("Young's lattice is well formed")
}

/// Words over {1, 2} with digit sum `n`, lexicographic with 1 < 2.
pub fn fibonacci_words(n: usize) -> Vec<Vec<u8>> {
    match n {
        0 => vec![vec![]],
        1 => vec![vec![1]],
        _ => {
            let mut out: Vec<Vec<u8>> =
                fibonacci_words(n - 1).into_iter().map(|w| std::iter::once(1).chain(w).collect()).collect();
            out.extend(fibonacci_words(n - 2).into_iter().map(|w| std::iter::once(2).chain(w).collect()));
            out
        }
    }
}

/// Elements covered by a Young–Fibonacci word: delete its leftmost 1, or
/// turn into a 1 any 2 that has only 2s to its left.
fn yf_lower_covers(word: &[u8]) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    for (pos, &letter) in word.iter().enumerate() {
        if letter == 1 {
            let mut w = word.to_vec();
            w.remove(pos);
            out.push(w);
            break;
        }
        let mut w = word.to_vec();
        w[pos] = 1;
        out.push(w);
    }
    out
}

fn word_label(w: &[u8]) -> String {
    if w.is_empty() {
        return "ε".to_string();
    }
    w.iter().map(|d| char::from(b'0' + d)).collect()
}

/// The Young–Fibonacci lattice through rank `top_rank`.
pub fn build_young_fibonacci(top_rank: usize) -> GradedPoset {
    let ranks: Vec<Vec<Vec<u8>>> = (0..=top_rank).map(fibonacci_words).collect();
    let index: Vec<HashMap<&[u8], usize>> =
        ranks.iter().map(|rank| rank.iter().enumerate().map(|(i, w)| (w.as_slice(), i)).collect()).collect();
    let mut edges = Vec::with_capacity(top_rank);
    for n in 0..top_rank {
        let mut level = Vec::new();
        for (j, word) in ranks[n + 1].iter().enumerate() {
            for lower in yf_lower_covers(word) {
                level.push((index[n][lower.as_slice()], j));
            }
        }
        level.sort_unstable();
        edges.push(level);
    }
    let sizes = ranks.iter().map(Vec::len).collect();
    let labels = ranks.iter().map(|rank| rank.iter().map(|w| Some(word_label(w))).collect()).collect();
    GradedPoset::new(sizes, edges, Some(1))
        .and_then(|p| p.with_labels(labels))
        .expect("Young-Fibonacci lattice is well formed")
}

/// Compositions of `n` into `parts` nonnegative parts, each at most the
/// matching cap, in lexicographically decreasing order.
fn compositions(n: usize, caps: &[usize]) -> Vec<Vec<usize>> {
    fn go(remaining: usize, caps: &[usize], prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let Some((&cap, rest)) = caps.split_first() else {
            if remaining == 0 {
                out.push(prefix.clone());
            }
            return;
        };
        let rest_capacity: usize = rest.iter().sum();
        for part in (0..=remaining.min(cap)).rev() {
            if remaining - part > rest_capacity {
                break;
            }
            prefix.push(part);
            go(remaining - part, rest, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(n, caps, &mut Vec::new(), &mut out);
    out
}

/// Cartesian product truncated at `top_rank`.
///
/// Rank n holds tuples whose factor ranks sum to n. They are ordered first by
/// the rank composition (lexicographically decreasing, so the first factor
/// carries the most rank), then by factor indices lexicographically.
pub fn build_product(factors: &[GradedPoset], top_rank: usize) -> Result<GradedPoset> {
    if factors.len() < 2 {
        return Err(Error::InvalidParameter("a product needs at least two factors".into()));
    }
    for (f, p) in factors.iter().enumerate() {
        if p.top_rank() < top_rank {
            return Err(Error::FactorTooShort { factor: f, have: p.top_rank(), need: top_rank });
        }
    }
    let caps: Vec<usize> = factors.iter().map(|_| top_rank).collect();
    // Element = list of (rank, index) per factor.
    type Elem = Vec<(usize, usize)>;
    let mut ranks: Vec<Vec<Elem>> = Vec::with_capacity(top_rank + 1);
    for n in 0..=top_rank {
        let mut elems = Vec::new();
        for comp in compositions(n, &caps) {
            let mut partial: Vec<Elem> = vec![Vec::new()];
            for (f, &rank) in comp.iter().enumerate() {
                let size = factors[f].rank_size(rank);
                partial = partial
                    .into_iter()
                    .flat_map(|prefix| {
                        (0..size).map(move |i| {
                            let mut e = prefix.clone();
                            e.push((rank, i));
                            e
                        })
                    })
                    .collect();
            }
            elems.extend(partial);
        }
        ranks.push(elems);
    }
    let index: Vec<HashMap<&Elem, usize>> =
        ranks.iter().map(|rank| rank.iter().enumerate().map(|(i, e)| (e, i)).collect()).collect();

    let mut edges = Vec::with_capacity(top_rank);
    for n in 0..top_rank {
        let mut level = Vec::new();
        for (i, elem) in ranks[n].iter().enumerate() {
            for (f, &(rank, idx)) in elem.iter().enumerate() {
                if rank >= factors[f].top_rank() {
                    continue;
                }
                for &up in factors[f].upper_covers(rank, idx) {
                    let mut next = elem.clone();
                    next[f] = (rank + 1, up);
                    level.push((i, index[n + 1][&next]));
                }
            }
        }
        level.sort_unstable();
        edges.push(level);
    }

    let r = factors.iter().map(GradedPoset::r).sum::<Option<u64>>();
    let labels = ranks
        .iter()
        .map(|rank| {
            rank.iter()
                .map(|elem| {
                    let parts: Option<Vec<&str>> =
                        elem.iter().enumerate().map(|(f, &(rk, i))| factors[f].label(rk, i)).collect();
                    parts.map(|ps| format!("({})", ps.join(", ")))
                })
                .collect()
        })
        .collect();
    let sizes = ranks.iter().map(Vec::len).collect();
    GradedPoset::new(sizes, edges, r)?.with_labels(labels)
}
