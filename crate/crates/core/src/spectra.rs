//! The spectrum of `DU_n`, weak growth of rank sizes, and certificates of
//! strict growth built from a prime dividing the last Smith entry.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fundamental::divisor_bound;
use crate::matrix::IntMatrix;
use crate::poset::GradedPoset;
use crate::smith::smith_entries;

/// Integer polynomial, coefficients in increasing degree, no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polynomial(Vec<BigInt>);

impl Polynomial {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Polynomial(coeffs)
    }

    pub fn one() -> Self {
        Polynomial(vec![BigInt::one()])
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.0
    }

    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    /// Multiply by `(t + root)`.
    fn mul_linear(&self, root: &BigInt) -> Self {
        let mut out = vec![BigInt::zero(); self.0.len() + 1];
        for (i, c) in self.0.iter().enumerate() {
            out[i] += c * root;
            out[i + 1] += c;
        }
        Polynomial::new(out)
    }

    pub fn eval(&self, t: &BigInt) -> BigInt {
        self.0.iter().rev().fold(BigInt::zero(), |acc, c| acc * t + c)
    }

    /// The unique polynomial of degree <= `values.len() - 1` taking
    /// `values[i]` at `t = i`, if its coefficients are integers.
    pub fn interpolate_at_naturals(values: &[BigInt]) -> Option<Self> {
        // Newton form on the points 0, 1, 2, ...: f(t) = Σ Δ^m f(0) * C(t, m).
        let mut diffs: Vec<BigInt> = values.to_vec();
        let mut leading = Vec::with_capacity(values.len());
        for m in 0..values.len() {
            leading.push(diffs[0].clone());
            for i in 0..values.len() - m - 1 {
                diffs[i] = &diffs[i + 1] - &diffs[i];
            }
        }
        let mut acc: Vec<BigRational> = vec![BigRational::zero(); values.len()];
        // falling = t (t - 1) ... (t - m + 1), factorial = m!
        let mut falling: Vec<BigInt> = vec![BigInt::one()];
        let mut factorial = BigInt::one();
        for (m, delta) in leading.iter().enumerate() {
            if m > 0 {
                factorial *= m;
                let shift = BigInt::from(m - 1);
                let mut next = vec![BigInt::zero(); falling.len() + 1];
                for (i, c) in falling.iter().enumerate() {
                    next[i] -= c * &shift;
                    next[i + 1] += c;
                }
                falling = next;
            }
            if delta.is_zero() {
                continue;
            }
            for (i, c) in falling.iter().enumerate() {
                acc[i] += BigRational::new(delta * c, factorial.clone());
            }
        }
        if acc.iter().any(|c| !c.is_integer()) {
            return None;
        }
        Some(Polynomial::new(acc.into_iter().map(|c| c.to_integer()).collect()))
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("0");
        }
        let mut terms = Vec::new();
        for (i, c) in self.0.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            let coeff = if mag.is_one() && i > 0 { String::new() } else { mag.to_string() };
            let var = match i {
                0 => String::new(),
                1 => "t".to_string(),
                _ => format!("t^{i}"),
            };
            let sign = if c.is_negative() { "-" } else { "+" };
            terms.push((sign, format!("{coeff}{var}")));
        }
        for (idx, (sign, body)) in terms.iter().enumerate() {
            match (idx, *sign) {
                (0, "-") => write!(f, "-{body}")?,
                (0, _) => write!(f, "{body}")?,
                (_, s) => write!(f, " {s} {body}")?,
            }
        }
        Ok(())
    }
}

/// The predicted factorization `Π_{i=0}^{n} (t + r(i+1))^{Δp_{n-i}}`,
/// with `Δp_0 = p_0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SpectrumFactorization {
    pub n: usize,
    pub r: u64,
    /// `(root, multiplicity)`: the factor `(t + root)^multiplicity`.
    pub factors: Vec<(u64, i64)>,
}

impl SpectrumFactorization {
    pub fn from_rank_sizes(sizes: &[usize], n: usize, r: u64) -> Self {
        let delta = |m: usize| -> i64 {
            let below = if m == 0 { 0 } else { sizes[m - 1] as i64 };
            sizes[m] as i64 - below
        };
        let factors = (0..=n).map(|i| (r * (i as u64 + 1), delta(n - i))).collect();
        SpectrumFactorization { n, r, factors }
    }

    pub fn multiplicities_nonnegative(&self) -> bool {
        self.factors.iter().all(|&(_, m)| m >= 0)
    }

    pub fn total_multiplicity(&self) -> i64 {
        self.factors.iter().map(|&(_, m)| m).sum()
    }

    /// Expanded polynomial, or `None` if some multiplicity is negative.
    pub fn expand(&self) -> Option<Polynomial> {
        if !self.multiplicities_nonnegative() {
            return None;
        }
        let mut poly = Polynomial::one();
        for &(root, mult) in &self.factors {
            let root = BigInt::from(root);
            for _ in 0..mult {
                poly = poly.mul_linear(&root);
            }
        }
        Some(poly)
    }

    /// Factor values `(t + root)` at `t`, paired with multiplicities.
    pub fn evaluate_factors(&self, t: u64) -> Vec<(BigInt, i64)> {
        self.factors.iter().map(|&(root, m)| (BigInt::from(root + t), m)).collect()
    }

    /// Product of the factors at `t`; `None` if a multiplicity is negative.
    pub fn evaluate(&self, t: u64) -> Option<BigInt> {
        if !self.multiplicities_nonnegative() {
            return None;
        }
        Some(self.evaluate_factors(t).iter().fold(BigInt::one(), |acc, (v, m)| acc * v.pow(*m as u32)))
    }
}

impl fmt::Display for SpectrumFactorization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.factors.iter().map(|(root, m)| format!("(t+{root})^{m}")).collect();
        f.write_str(&parts.join(" "))
    }
}

/// `det(DU_n + tI)` as a polynomial in t, by evaluating at `t = 0..=p_n`
/// and interpolating exactly.
pub fn char_poly_du(poset: &GradedPoset, n: usize) -> Result<Polynomial> {
    let du = poset.du(n)?.to_dense();
    let size = du.n_rows();
    let values = (0..=size).map(|t| shifted_determinant(&du, &BigInt::from(t))).collect::<Result<Vec<BigInt>>>()?;
    Polynomial::interpolate_at_naturals(&values)
        .ok_or_else(|| Error::Dimension("interpolated characteristic polynomial is not integral".into()))
}

fn shifted_determinant(m: &IntMatrix, t: &BigInt) -> Result<BigInt> {
    let mut shifted = m.clone();
    for i in 0..m.n_rows() {
        let v = m.get(i, i) + t;
        shifted.set(i, i, v);
    }
    shifted.determinant()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CharPolyReport {
    pub n: usize,
    pub computed: Polynomial,
    pub predicted: Option<Polynomial>,
    pub factorization: SpectrumFactorization,
    pub passed: bool,
}

impl fmt::Display for CharPolyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "det(DU_{} + tI) = {}", self.n, self.computed)?;
        writeln!(f, "  predicted     = {}", self.factorization)?;
        match &self.predicted {
            Some(p) => writeln!(f, "               = {p}")?,
            None => writeln!(f, "               (negative multiplicity: not a polynomial)")?,
        }
        write!(f, "  {}", if self.passed { "pass" } else { "FAIL" })
    }
}

/// Compare the characteristic polynomial of `DU_n` with the product formula.
pub fn char_poly_factor_check(poset: &GradedPoset, n: usize, r: u64) -> Result<CharPolyReport> {
    let computed = char_poly_du(poset, n)?;
    let factorization = SpectrumFactorization::from_rank_sizes(poset.rank_sizes(), n, r);
    let predicted = factorization.expand();
    let passed = predicted.as_ref() == Some(&computed);
    Ok(CharPolyReport { n, computed, predicted, factorization, passed })
}

/// `p_{n-1} <= p_n` for every stored rank; returns the first violating rank.
pub fn weak_growth_check(poset: &GradedPoset) -> std::result::Result<(), usize> {
    match poset.rank_sizes().windows(2).position(|w| w[0] > w[1]) {
        None => Ok(()),
        Some(i) => Err(i + 1),
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n.is_multiple_of(2) {
        return false;
    }
    let mut d = 3;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Smallest prime `p > (n+1) r` and `k = p - r`.
///
/// The returned `p` divides none of `2r + k, ..., (n+1)r + k`; this is
/// checked rather than assumed.
pub fn choose_prime_k(r: u64, n: u64) -> (u64, u64) {
    let mut p = (n + 1) * r + 1;
    loop {
        if is_prime(p) && (2..=n + 1).all(|i| !(i * r + p - r).is_multiple_of(p)) {
            return (p, p - r);
        }
        p += 1;
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GrowthCertificate {
    pub n: usize,
    pub r: u64,
    pub prime: u64,
    pub k: u64,
    /// Last Smith entry of `DU_n + kI`.
    pub last_entry: String,
    pub prime_divides_last_entry: bool,
    /// `det(DU_n + kI)` computed directly.
    pub determinant: String,
    /// `(factor value, multiplicity)` of the product formula at `t = k`.
    pub factors_at_k: Vec<(String, i64)>,
    pub determinant_matches_formula: bool,
    /// The prime divides the `(r + k)` factor and no other.
    pub prime_divides_only_first_factor: bool,
    /// Power of the prime in the determinant (equals `Δp_n`).
    pub prime_valuation: u64,
    pub delta_p_direct: i64,
    pub concludes_positive: bool,
}

impl GrowthCertificate {
    /// Re-derive every internal claim from the recorded numbers.
    pub fn recheck(&self) -> bool {
        let Ok(last) = self.last_entry.parse::<BigInt>() else { return false };
        let Ok(det) = self.determinant.parse::<BigInt>() else { return false };
        let p = BigInt::from(self.prime);
        let factors: Option<Vec<(BigInt, i64)>> =
            self.factors_at_k.iter().map(|(v, m)| v.parse::<BigInt>().ok().map(|v| (v, *m))).collect();
        let Some(factors) = factors else { return false };
        let product = factors.iter().fold(BigInt::one(), |acc, (v, m)| acc * v.pow(*m as u32));
        let only_first =
            factors.first().is_some_and(|(v, _)| *v == p) && factors.iter().skip(1).all(|(v, _)| !(v % &p).is_zero());
        is_prime(self.prime)
            && self.prime == self.r + self.k
            && self.prime as u128 > (self.n as u128 + 1) * self.r as u128
            && (&last % &p).is_zero()
            && (&det % &last).is_zero()
            && product == det
            && only_first
            && self.delta_p_direct > 0
            && self.prime_valuation as i64 == self.delta_p_direct
    }
}

impl fmt::Display for GrowthCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "rank {}: prime p = {}, k = p - r = {}", self.n, self.prime, self.k)?;
        writeln!(
            f,
            "  last Smith entry of DU_{} + {}I = {} ({} by {})",
            self.n,
            self.k,
            self.last_entry,
            if self.prime_divides_last_entry { "divisible" } else { "NOT divisible" },
            self.prime
        )?;
        let factors: Vec<String> = self.factors_at_k.iter().map(|(v, m)| format!("{v}^{m}")).collect();
        writeln!(f, "  det = {} = {}", self.determinant, factors.join(" * "))?;
        writeln!(
            f,
            "  {} divides {} determinant factor(s) besides the first",
            self.prime,
            if self.prime_divides_only_first_factor { "no" } else { "some" }
        )?;
        write!(
            f,
            "  => Δp_{} > 0 (direct count Δp_{} = {}, valuation {})",
            self.n, self.n, self.delta_p_direct, self.prime_valuation
        )
    }
}

fn valuation(mut x: BigInt, p: &BigInt) -> u64 {
    if x.is_zero() {
        return u64::MAX;
    }
    let mut v = 0;
    loop {
        let (q, rem) = x.div_rem(p);
        if !rem.is_zero() {
            return v;
        }
        x = q;
        v += 1;
    }
}

/// Run the strict-growth argument at rank n and return its trace.
pub fn certify_strict_growth(poset: &GradedPoset, r: u64, n: usize) -> Result<GrowthCertificate> {
    let fail = |reason: String| Error::Certificate { n, reason };
    if n < 2 {
        return Err(fail("strict growth is certified for n >= 2".into()));
    }
    if n >= poset.top_rank() {
        return Err(Error::RankOutOfRange { rank: n, lo: 2, hi: poset.top_rank().saturating_sub(1) });
    }
    let (prime, k) = choose_prime_k(r, n as u64);
    let p = BigInt::from(prime);
    let matrix = poset.du_shifted(n, &BigInt::from(k))?.to_dense();
    let last = smith_entries(&matrix).pop().unwrap_or_else(BigInt::zero);
    let prime_divides_last_entry = !last.is_zero() && (&last % &p).is_zero();
    if !prime_divides_last_entry {
        return Err(fail(format!("{prime} does not divide the last Smith entry {last}")));
    }
    // The predicted divisor is divisible by r + k = p; record consistency.
    debug_assert!((divisor_bound(r, n as u64, k) % &p).is_zero());

    let determinant = matrix.determinant()?;
    let factorization = SpectrumFactorization::from_rank_sizes(poset.rank_sizes(), n, r);
    let factors = factorization.evaluate_factors(k);
    let determinant_matches_formula = factorization.evaluate(k).as_ref() == Some(&determinant);
    if !determinant_matches_formula {
        return Err(fail(format!("det(DU_{n} + {k}I) = {determinant} disagrees with the product formula")));
    }
    let prime_divides_only_first_factor = factors[0].0 == p && factors.iter().skip(1).all(|(v, _)| !(v % &p).is_zero());
    if !prime_divides_only_first_factor {
        return Err(fail(format!("{prime} divides more than the first determinant factor")));
    }
    let prime_valuation = valuation(determinant.clone(), &p);
    let delta_p_direct = poset.rank_size(n) as i64 - poset.rank_size(n - 1) as i64;
    let concludes_positive = prime_valuation >= 1;
    if !concludes_positive || delta_p_direct <= 0 || prime_valuation as i64 != delta_p_direct {
        return Err(fail(format!(
            "conclusion Δp_{n} > 0 disagrees with the direct count {delta_p_direct} (valuation {prime_valuation})"
        )));
    }
    Ok(GrowthCertificate {
        n,
        r,
        prime,
        k,
        last_entry: last.to_string(),
        prime_divides_last_entry,
        determinant: determinant.to_string(),
        factors_at_k: factors.iter().map(|(v, m)| (v.to_string(), *m)).collect(),
        determinant_matches_formula,
        prime_divides_only_first_factor,
        prime_valuation,
        delta_p_direct,
        concludes_positive,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{build_young, build_young_fibonacci, FamilySpec};

    fn poly(xs: &[i64]) -> Polynomial {
        Polynomial::new(xs.iter().map(|&x| BigInt::from(x)).collect())
    }

    #[test]
    fn interpolation_recovers_polynomials() {
        let p = poly(&[3, -4, 0, 2, 1]);
        let values: Vec<BigInt> = (0..=4).map(|t| p.eval(&BigInt::from(t))).collect();
        assert_eq!(Polynomial::interpolate_at_naturals(&values), Some(p));
        // t/2 at t = 0, 1 is not integral
        assert_eq!(Polynomial::interpolate_at_naturals(&[BigInt::zero(), BigInt::one(), BigInt::from(1)]), None);
    }

    #[test]
    fn young_small_char_polys() {
        let y = build_young(4);
        let rep = char_poly_factor_check(&y, 1, 1).unwrap();
        assert_eq!(rep.computed, poly(&[2, 1]));
        assert!(rep.passed);
        assert_eq!(rep.factorization.factors, vec![(1, 0), (2, 1)]);

        let rep = char_poly_factor_check(&y, 2, 1).unwrap();
        assert_eq!(rep.computed, poly(&[3, 4, 1]));
        assert_eq!(rep.computed.to_string(), "t^2 + 4t + 3");
        assert_eq!(rep.factorization.factors, vec![(1, 1), (2, 0), (3, 1)]);
        assert!(rep.passed);
    }

    #[test]
    fn product_rank_one_char_poly() {
        let yy = FamilySpec::product_of("young,young").unwrap().build(3).unwrap();
        let rep = char_poly_factor_check(&yy, 1, 2).unwrap();
        assert_eq!(rep.computed, poly(&[8, 6, 1]));
        assert_eq!(rep.factorization.factors, vec![(2, 1), (4, 1)]);
        assert!(rep.passed);
    }

    #[test]
    fn wrong_r_fails() {
        let y = build_young(4);
        assert!(!char_poly_factor_check(&y, 3, 2).unwrap().passed);
    }

    #[test]
    fn weak_growth() {
        assert_eq!(weak_growth_check(&build_young(10)), Ok(()));
        let p =
            GradedPoset::new(vec![1, 1, 2, 1], vec![vec![(0, 0)], vec![(0, 0), (0, 1)], vec![(0, 0), (1, 0)]], None)
                .unwrap();
        assert_eq!(weak_growth_check(&p), Err(3));
        assert!(!p.check_axioms(1).passed());
    }

    #[test]
    fn prime_choice() {
        assert_eq!(choose_prime_k(1, 2), (5, 4));
        assert_eq!(choose_prime_k(2, 2), (7, 5));
        assert_eq!(choose_prime_k(1, 4), (7, 6));
        assert_eq!(choose_prime_k(3, 7), (29, 26));
        assert!(!is_prime(1) && is_prime(2) && is_prime(97) && !is_prime(91));
    }

    #[test]
    fn young_rank_two_certificate() {
        let y = build_young(4);
        let cert = certify_strict_growth(&y, 1, 2).unwrap();
        assert_eq!((cert.prime, cert.k), (5, 4));
        assert_eq!(cert.last_entry, "35");
        assert_eq!(cert.determinant, "35");
        assert_eq!(cert.delta_p_direct, 1);
        assert!(cert.recheck());
    }

    #[test]
    fn other_family_certificates() {
        let yy = FamilySpec::product_of("young,young").unwrap().build(4).unwrap();
        let cert = certify_strict_growth(&yy, 2, 2).unwrap();
        assert_eq!((cert.prime, cert.k, cert.delta_p_direct), (7, 5, 3));
        assert!(cert.recheck());

        let yf = build_young_fibonacci(5);
        let cert = certify_strict_growth(&yf, 1, 3).unwrap();
        assert_eq!(cert.delta_p_direct, 1);
        assert!(cert.recheck());
    }

    #[test]
    fn certificate_rejects_low_rank() {
        let y = build_young(4);
        assert!(matches!(certify_strict_growth(&y, 1, 1), Err(Error::Certificate { .. })));
        assert!(matches!(certify_strict_growth(&y, 1, 4), Err(Error::RankOutOfRange { .. })));
    }
}
