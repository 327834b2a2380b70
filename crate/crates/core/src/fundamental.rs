//! The modified factorial, the fundamental vector `v_{n,k}` and the identity
//! `(DU_n + kI) v_{n,k} = t_n`.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::chains::ChainPair;
use crate::error::{Error, Result};
use crate::poset::{GradedPoset, RankVector};

/// `ℓ!_{r,k} = (rℓ + k)(r(ℓ-1) + k)...(r + k)`, with `0!_{r,k} = 1`.
pub fn rising_factorial(r: u64, k: u64, l: u64) -> BigInt {
    (1..=l).fold(BigInt::one(), |acc, i| acc * (BigInt::from(r) * i + k))
}

/// The divisor of the last Smith entry of `DU_n + kI` predicted for an
/// r-differential poset: `(n+1)!_{r,k}` for `r >= 2` and
/// `(n-1)!_{1,k} (n+1+k)` for `r = 1`.
///
/// At `n = 0` both branches reduce to `r + k`.
pub fn divisor_bound(r: u64, n: u64, k: u64) -> BigInt {
    if r >= 2 || n == 0 {
        rising_factorial(r, k, n + 1)
    } else {
        rising_factorial(1, k, n - 1) * (n + 1 + k)
    }
}

/// Lazily computed `U^j t_m` (or `U^j s_m`) along one chain.
pub struct ChainPowers<'a> {
    poset: &'a GradedPoset,
    chain: &'a [usize],
    cache: HashMap<(usize, usize), RankVector>,
}

impl<'a> ChainPowers<'a> {
    pub fn new(poset: &'a GradedPoset, chain: &'a [usize]) -> Self {
        ChainPowers { poset, chain, cache: HashMap::new() }
    }

    /// `U^j` applied to the chain element of rank `m`.
    pub fn get(&mut self, m: usize, j: usize) -> Result<&RankVector> {
        if m >= self.chain.len() {
            return Err(Error::RankOutOfRange { rank: m, lo: 0, hi: self.chain.len().saturating_sub(1) });
        }
        if m + j > self.poset.top_rank() {
            return Err(Error::RankOutOfRange { rank: m + j, lo: 0, hi: self.poset.top_rank() });
        }
        if !self.cache.contains_key(&(m, j)) {
            let value = if j == 0 {
                RankVector::basis(m, self.chain[m])
            } else {
                let below = self.get(m, j - 1)?.clone();
                self.poset.apply_up(&below)?
            };
            self.cache.insert((m, j), value);
        }
        Ok(&self.cache[&(m, j)])
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FundamentalVector {
    pub n: usize,
    pub k: u64,
    pub r: u64,
    pub value: RankVector,
}

impl FundamentalVector {
    pub fn minimal_integral_multiplier(&self) -> BigInt {
        minimal_integral_multiplier(self)
    }
}

fn check_inputs(poset: &GradedPoset, pair: &ChainPair, n: usize, k: u64) -> Result<u64> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be a positive integer".into()));
    }
    if poset.top_rank() == 0 || n >= poset.top_rank() {
        return Err(Error::RankOutOfRange { rank: n, lo: 0, hi: poset.top_rank().saturating_sub(1) });
    }
    if pair.t.len() <= n {
        return Err(Error::InvalidChain(format!("t stops below rank {n}")));
    }
    poset.r_or_infer()
}

/// `v_{n,k} = Σ_{j=0}^{n} (-1)^j U^j t_{n-j} / (j+1)!_{r,k}`.
pub fn compute_v(poset: &GradedPoset, pair: &ChainPair, n: usize, k: u64) -> Result<FundamentalVector> {
    let r = check_inputs(poset, pair, n, k)?;
    let mut powers = ChainPowers::new(poset, &pair.t);
    compute_v_with(&mut powers, r, n, k)
}

/// [`compute_v`] reusing a shared cache of `U^j t_m`.
pub fn compute_v_with(powers: &mut ChainPowers<'_>, r: u64, n: usize, k: u64) -> Result<FundamentalVector> {
    let mut value = RankVector::zero(n);
    for j in 0..=n {
        let mut coeff = BigRational::new(BigInt::one(), rising_factorial(r, k, j as u64 + 1));
        if j % 2 == 1 {
            coeff = -coeff;
        }
        value = value.add(&powers.get(n - j, j)?.scaled(&coeff))?;
    }
    Ok(FundamentalVector { n, k, r, value })
}

/// The `r = 1` rewriting in which the last two terms merge:
/// `Σ_{j=0}^{n-2} (-1)^j U^j t_{n-j} / (j+1)!_{1,k} + (-1)^{n-1} U^n t_0 / ((n-1)!_{1,k} (n+1+k))`.
pub fn compute_v_r1_form(poset: &GradedPoset, pair: &ChainPair, n: usize, k: u64) -> Result<FundamentalVector> {
    let r = check_inputs(poset, pair, n, k)?;
    if r != 1 {
        return Err(Error::InvalidParameter(format!("the merged form needs r = 1, poset has r = {r}")));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("the merged form needs n >= 1".into()));
    }
    let mut powers = ChainPowers::new(poset, &pair.t);
    let mut value = RankVector::zero(n);
    for j in 0..n - 1 {
        let mut coeff = BigRational::new(BigInt::one(), rising_factorial(1, k, j as u64 + 1));
        if j % 2 == 1 {
            coeff = -coeff;
        }
        value = value.add(&powers.get(n - j, j)?.scaled(&coeff))?;
    }
    let denom = rising_factorial(1, k, n as u64 - 1) * (n as u64 + 1 + k);
    let mut coeff = BigRational::new(BigInt::one(), denom);
    if n.is_multiple_of(2) {
        coeff = -coeff;
    }
    value = value.add(&powers.get(0, n)?.scaled(&coeff))?;
    Ok(FundamentalVector { n, k, r, value })
}

/// `(DU_n + kI) x` for a vector of rank n.
pub fn apply_du_shifted(poset: &GradedPoset, x: &RankVector, k: u64) -> Result<RankVector> {
    let du = poset.apply_down(&poset.apply_up(x)?)?;
    du.add(&x.scaled(&BigRational::from_integer(BigInt::from(k))))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdentityCheck {
    pub n: usize,
    pub k: u64,
    pub passed: bool,
    /// `(DU_n + kI) v_{n,k} - t_n`; zero exactly when the check passes.
    pub residual: RankVector,
}

/// Check `(DU_n + kI) v_{n,k} = t_n` exactly.
pub fn verify_fundamental_identity(poset: &GradedPoset, pair: &ChainPair, n: usize, k: u64) -> Result<IdentityCheck> {
    let v = compute_v(poset, pair, n, k)?;
    identity_residual(poset, pair, &v)
}

pub fn identity_residual(poset: &GradedPoset, pair: &ChainPair, v: &FundamentalVector) -> Result<IdentityCheck> {
    let image = apply_du_shifted(poset, &v.value, v.k)?;
    let residual = image.sub(&RankVector::basis(v.n, pair.t[v.n]))?;
    Ok(IdentityCheck { n: v.n, k: v.k, passed: residual.is_zero(), residual })
}

/// Smallest positive `s` with `s * v` integral.
pub fn minimal_integral_multiplier(v: &FundamentalVector) -> BigInt {
    v.value.denominator_lcm()
}

/// `<U^j t_{n-j}, s_n>` for `j = 0..=n`.
pub fn chain_pairings(poset: &GradedPoset, pair: &ChainPair, n: usize) -> Result<Vec<BigRational>> {
    if n > pair.top_rank() {
        return Err(Error::RankOutOfRange { rank: n, lo: 0, hi: pair.top_rank() });
    }
    let mut powers = ChainPowers::new(poset, &pair.t);
    let s_n = RankVector::basis(n, pair.s[n]);
    (0..=n).map(|j| powers.get(n - j, j)?.pairing(&s_n)).collect()
}

/// The value `<U^j t_{n-j}, s_n>` must take: for `r >= 2` it is 1 exactly
/// when `j = n`; for `r = 1` it is 1 exactly when `j >= n - 1`.
pub fn expected_chain_pairing(r: u64, n: usize, j: usize) -> i64 {
    let hit = if r == 1 { j + 1 >= n } else { j == n };
    i64::from(hit)
}

/// Whether every coefficient of `v` is an integer.
pub fn is_integral(v: &RankVector) -> bool {
    v.coeffs().values().all(|c| c.is_integer())
}

/// Helper for reports: the coefficients of `v` in index order, as strings.
pub fn coefficient_strings(v: &RankVector) -> Vec<(usize, String)> {
    v.coeffs().iter().filter(|(_, c)| !c.is_zero()).map(|(&i, c)| (i, c.to_string())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chains::find_chain_pair;
    use crate::constructions::{build_young, build_young_fibonacci, FamilySpec};

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn rising_factorial_values() {
        assert_eq!(rising_factorial(1, 1, 3), BigInt::from(24));
        assert_eq!(rising_factorial(2, 1, 2), BigInt::from(15));
        for (r, k) in [(1, 1), (3, 7), (2, 5)] {
            assert_eq!(rising_factorial(r, k, 0), BigInt::one());
        }
        for l in 1..10u64 {
            assert_eq!(rising_factorial(3, 2, l), rising_factorial(3, 2, l - 1) * (3 * l + 2));
        }
    }

    #[test]
    fn divisor_bound_values() {
        assert_eq!(divisor_bound(1, 2, 1), BigInt::from(8));
        assert_eq!(divisor_bound(2, 1, 1), BigInt::from(15));
        assert_eq!(divisor_bound(1, 3, 1), BigInt::from(30));
        assert_eq!(divisor_bound(1, 2, 4), BigInt::from(35));
    }

    #[test]
    fn v_at_rank_zero() {
        let y = build_young(3);
        let pair = find_chain_pair(&y, 1).unwrap();
        for k in 1..5 {
            let v = compute_v(&y, &pair, 0, k).unwrap();
            assert_eq!(v.value, RankVector::basis(0, 0).scaled(&q(1, 1 + k as i64)));
        }
    }

    #[test]
    fn young_rank_one_collapses() {
        let y = build_young(3);
        let pair = find_chain_pair(&y, 1).unwrap();
        for k in 1..6i64 {
            let v = compute_v(&y, &pair, 1, k as u64).unwrap();
            assert_eq!(v.value, RankVector::basis(1, 0).scaled(&q(1, 2 + k)));
            let merged = compute_v_r1_form(&y, &pair, 1, k as u64).unwrap();
            assert_eq!(merged, v);
        }
    }

    #[test]
    fn young_rank_two_hand_expansion() {
        let y = build_young(3);
        let pair = find_chain_pair(&y, 1).unwrap();
        let v = compute_v(&y, &pair, 2, 1).unwrap();
        // t_2/2 - (U^2 t_0)/8 with U^2 t_0 = (2) + (1,1)
        assert_eq!(v.value.coeff(0), q(3, 8));
        assert_eq!(v.value.coeff(1), q(-1, 8));
        assert_eq!(minimal_integral_multiplier(&v), BigInt::from(8));
        assert_eq!(compute_v_r1_form(&y, &pair, 2, 1).unwrap(), v);
    }

    #[test]
    fn product_rank_one_multiplier() {
        let yy = FamilySpec::product_of("young,young").unwrap().build(3).unwrap();
        let pair = find_chain_pair(&yy, 2).unwrap();
        let v = compute_v(&yy, &pair, 1, 1).unwrap();
        assert_eq!(minimal_integral_multiplier(&v), BigInt::from(15));
        assert!(matches!(compute_v_r1_form(&yy, &pair, 1, 1), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn identity_holds_on_families() {
        let y = build_young(11);
        let pair = find_chain_pair(&y, 1).unwrap();
        for n in 0..=10 {
            for k in [1, 2, 3, 5] {
                let check = verify_fundamental_identity(&y, &pair, n, k).unwrap();
                assert!(check.passed, "young n={n} k={k}");
            }
        }
        let yy = FamilySpec::product_of("young,young").unwrap().build(8).unwrap();
        let pair = find_chain_pair(&yy, 2).unwrap();
        for n in 0..=7 {
            for k in [1, 2, 3] {
                assert!(verify_fundamental_identity(&yy, &pair, n, k).unwrap().passed, "yxy n={n} k={k}");
            }
        }
    }

    #[test]
    fn integral_vector_has_multiplier_one() {
        let v = FundamentalVector { n: 1, k: 1, r: 1, value: RankVector::basis(1, 0).scaled(&q(-4, 1)) };
        assert_eq!(minimal_integral_multiplier(&v), BigInt::one());
    }

    #[test]
    fn rejects_bad_parameters() {
        let y = build_young(4);
        let pair = find_chain_pair(&y, 1).unwrap();
        assert!(matches!(compute_v(&y, &pair, 2, 0), Err(Error::InvalidParameter(_))));
        assert!(matches!(compute_v(&y, &pair, 4, 1), Err(Error::RankOutOfRange { .. })));
    }

    #[test]
    fn pairings_follow_case_formula() {
        let yf = build_young_fibonacci(8);
        let pair = find_chain_pair(&yf, 1).unwrap();
        for n in 2..=8 {
            let values = chain_pairings(&yf, &pair, n).unwrap();
            for (j, v) in values.iter().enumerate() {
                assert_eq!(*v, BigRational::from_integer(expected_chain_pairing(1, n, j).into()), "n={n} j={j}");
            }
        }
    }

    #[test]
    fn perturbed_poset_leaves_residual() {
        // Young's lattice through rank 4 with (1,1) ⋖ (2,1) removed.
        let y = build_young(4);
        let mut edges = y.edge_lists();
        edges[2].retain(|&e| e != (1, 1));
        let broken = GradedPoset::new(y.rank_sizes().to_vec(), edges, Some(1)).unwrap();
        let pair = find_chain_pair(&y, 1).unwrap();
        let check = verify_fundamental_identity(&broken, &pair, 2, 1).unwrap();
        assert!(!check.passed);
        assert!(!check.residual.is_zero());
    }
}
