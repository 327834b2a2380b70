//! The full verification pipeline behind `diffposet verify-all`.

use std::ops::RangeInclusive;

use serde::Serialize;

use crate::chains::{attach_chain_pair, find_chain_pair, verify_chain_pair, AttachedPoset};
use crate::error::Result;
use crate::fundamental::{chain_pairings, expected_chain_pairing, verify_fundamental_identity};
use crate::poset::GradedPoset;
use crate::smith::{check_divisibility_bound, first_column_check};
use crate::spectra::{certify_strict_growth, char_poly_factor_check, weak_growth_check};

/// One line of a verification run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Record {
    pub check: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<u64>,
    pub passed: bool,
    pub detail: String,
}

impl Record {
    fn new(check: &'static str, n: Option<usize>, k: Option<u64>, passed: bool, detail: impl Into<String>) -> Self {
        Record { check, n, k, passed, detail: detail.into() }
    }

    fn from_result<T>(
        check: &'static str,
        n: Option<usize>,
        k: Option<u64>,
        res: Result<T>,
        f: impl FnOnce(T) -> (bool, String),
    ) -> Self {
        match res {
            Ok(v) => {
                let (passed, detail) = f(v);
                Record::new(check, n, k, passed, detail)
            }
            Err(e) => Record::new(check, n, k, false, format!("error: {e}")),
        }
    }
}

impl std::fmt::Display for Record {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{verdict}] {}", self.check)?;
        if let Some(n) = self.n {
            write!(f, " n={n}")?;
        }
        if let Some(k) = self.k {
            write!(f, " k={k}")?;
        }
        if !self.detail.is_empty() {
            write!(f, ": {}", self.detail)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct VerifyConfig {
    /// Overrides the declared or inferred r.
    pub r: Option<u64>,
    /// Ranks to verify; clipped to `0..top_rank`.
    pub ranks: Option<RangeInclusive<usize>>,
    pub k_values: Vec<u64>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { r: None, ranks: None, k_values: vec![1, 2, 3] }
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct VerifyReport {
    pub records: Vec<Record>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        !self.records.is_empty() && self.records.iter().all(|r| r.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Record> {
        self.records.iter().filter(|r| !r.passed)
    }
}

/// Axioms, chain pair, fundamental identity, first inverse column, Smith
/// divisibility, spectrum factorization and growth certificates, in that
/// order. Later stages still run after an earlier failure when their inputs
/// exist, so one report lists everything that is wrong.
pub fn verify_all(poset: &GradedPoset, config: &VerifyConfig) -> VerifyReport {
    let mut records = Vec::new();
    let r = match config.r.map_or_else(|| poset.r_or_infer(), Ok) {
        Ok(r) => r,
        Err(e) => {
            records.push(Record::new("parameters", None, None, false, format!("error: {e}")));
            return VerifyReport { records };
        }
    };
    let top = poset.top_rank();
    let (lo, hi) = match &config.ranks {
        Some(range) => (*range.start(), (*range.end()).min(top.saturating_sub(1))),
        None => (0, top.saturating_sub(1)),
    };

    let axioms = poset.check_axioms(r);
    let detail = match axioms.highest_verified() {
        _ if axioms.passed() => format!("DU - UD = {r}I through rank {}", top - 1),
        Some(h) => format!("verified only through rank {h}; failing ranks {:?}", axioms.failed_ranks()),
        None => format!("failing ranks {:?}", axioms.failed_ranks()),
    };
    records.push(Record::new("axioms", None, None, axioms.passed(), detail));
    for v in axioms.violations() {
        records.push(Record::new("axioms", None, None, false, v.to_string()));
    }

    let attached: Option<AttachedPoset> = match find_chain_pair(poset, r) {
        Ok(pair) => {
            let report = verify_chain_pair(poset, &pair, r);
            let detail = if report.passed() {
                pair.describe(poset).replace('\n', "; ")
            } else {
                report.to_string().replace('\n', "; ")
            };
            records.push(Record::new("chain_pair", None, None, report.passed(), detail));
            match attach_chain_pair(poset, &pair) {
                Ok(a) => Some(a),
                Err(e) => {
                    records.push(Record::new("chain_pair", None, None, false, format!("error: {e}")));
                    None
                }
            }
        }
        Err(e) => {
            records.push(Record::new("chain_pair", None, None, false, format!("error: {e}")));
            None
        }
    };

    if let Some(att) = &attached {
        let (p, pair) = (&att.poset, &att.pair);
        for n in lo..=hi {
            for &k in &config.k_values {
                records.push(Record::from_result(
                    "fundamental_identity",
                    Some(n),
                    Some(k),
                    verify_fundamental_identity(p, pair, n, k),
                    |c| {
                        let detail = if c.passed {
                            String::new()
                        } else {
                            format!("residual has {} nonzero entries", c.residual.coeffs().len())
                        };
                        (c.passed, detail)
                    },
                ));
            }
        }
        let first_branch = if r == 1 { 2 } else { 1 };
        for n in lo.max(first_branch)..=hi {
            records.push(Record::from_result("chain_pairings", Some(n), None, chain_pairings(p, pair, n), |vals| {
                let ok = vals.iter().enumerate().all(|(j, v)| {
                    *v == num_rational::BigRational::from_integer(expected_chain_pairing(r, n, j).into())
                });
                let rendered: Vec<String> = vals.iter().map(ToString::to_string).collect();
                (ok, format!("<U^j t_(n-j), s_n> for j=0..n: {}", rendered.join(" ")))
            }));
        }
        for n in lo..=hi {
            for &k in &config.k_values {
                records.push(Record::from_result(
                    "first_column",
                    Some(n),
                    Some(k),
                    first_column_check(p, pair, n, k),
                    |c| (c.passed, if c.passed { String::new() } else { format!("mismatch at {:?}", c.mismatches) }),
                ));
            }
        }
        for n in lo.max(1)..=hi {
            for &k in &config.k_values {
                records.push(Record::from_result(
                    "smith_divisibility",
                    Some(n),
                    Some(k),
                    check_divisibility_bound(p, pair, n, k),
                    |rep| {
                        let detail = format!(
                            "last entry {} bound {} divides={} oracle={} multiplier={}",
                            rep.last_entry, rep.bound, rep.divides, rep.inverse_oracle, rep.fundamental_multiplier
                        );
                        (rep.passed(), detail)
                    },
                ));
            }
        }
    }

    let weak = weak_growth_check(poset);
    records.push(Record::new(
        "weak_growth",
        None,
        None,
        weak.is_ok(),
        match weak {
            Ok(()) => String::new(),
            Err(n) => format!("p_{} > p_{n}", n - 1),
        },
    ));
    for n in lo..=hi {
        records.push(Record::from_result("spectrum", Some(n), None, char_poly_factor_check(poset, n, r), |rep| {
            (rep.passed, format!("{}", rep.factorization))
        }));
    }
    for n in lo.max(2)..=hi {
        records.push(Record::from_result(
            "growth_certificate",
            Some(n),
            None,
            certify_strict_growth(poset, r, n),
            |c| {
                let ok = c.recheck();
                (ok, format!("p={} k={} last={} Δp={}", c.prime, c.k, c.last_entry, c.delta_p_direct))
            },
        ));
    }
    VerifyReport { records }
}
