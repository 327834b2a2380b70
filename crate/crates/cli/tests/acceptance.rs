//! Acceptance suite: one PASS/FAIL line per criterion.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::sync::LazyLock;
use std::time::Instant;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use diffposet::chains::{attach_chain_pair, find_chain_pair, verify_chain_pair, AttachedPoset};
use diffposet::constructions::{build_young, build_young_fibonacci, FamilySpec};
use diffposet::fundamental::{chain_pairings, compute_v, compute_v_r1_form, verify_fundamental_identity};
use diffposet::hasse::write_hasse;
use diffposet::smith::{
    check_divisibility_bound, first_column_check, last_entry_via_inverse_dense, random_oracle_trials, smith_entries,
};
use diffposet::spectra::{certify_strict_growth, char_poly_du, char_poly_factor_check};
use diffposet::verify::{verify_all, VerifyConfig};
use diffposet::GradedPoset;

const K_VALUES: [u64; 5] = [1, 2, 3, 5, 11];

// ---------------------------------------------------------------- oracles

/// Partition numbers by Euler's pentagonal recurrence.
fn partition_counts(max: usize) -> Vec<u64> {
    let mut p = vec![0i64; max + 1];
    p[0] = 1;
    for n in 1..=max {
        let mut total = 0i64;
        for m in 1.. {
            let sign = if m % 2 == 1 { 1 } else { -1 };
            let g1 = m * (3 * m - 1) / 2;
            if g1 > n {
                break;
            }
            total += sign * p[n - g1];
            let g2 = m * (3 * m + 1) / 2;
            if g2 <= n {
                total += sign * p[n - g2];
            }
        }
        p[n] = total;
    }
    p.into_iter().map(|x| x as u64).collect()
}

/// Words over {1,2} of weight n: F_{n+1}.
fn fibonacci_counts(max: usize) -> Vec<u64> {
    let mut f = vec![1u64; max + 1];
    for n in 2..=max {
        f[n] = f[n - 1] + f[n - 2];
    }
    f
}

fn convolve(a: &[u64], b: &[u64], max: usize) -> Vec<u64> {
    (0..=max).map(|n| (0..=n).map(|i| a[i] * b[n - i]).sum()).collect()
}

fn delta(p: &[u64], n: usize) -> i64 {
    p[n] as i64 - if n == 0 { 0 } else { p[n - 1] as i64 }
}

/// `prod_{i=0}^{n} (t + r(i+1))^{Δp_{n-i}}`.
fn predicted_det(p: &[u64], r: u64, n: usize, t: u64) -> BigInt {
    (0..=n).fold(BigInt::one(), |acc, i| {
        let m = delta(p, n - i);
        assert!(m >= 0, "rank sizes decrease at {}", n - i);
        acc * BigInt::from(t + r * (i as u64 + 1)).pow(m as u32)
    })
}

/// `(n+1)!_{r,k}` for r >= 2, `(n-1)!_{1,k} (n+1+k)` for r = 1.
fn bound_oracle(r: u64, n: u64, k: u64) -> BigInt {
    let fact = |l: u64| (1..=l).map(|i| BigInt::from(r * i + k)).product::<BigInt>();
    if r >= 2 || n == 0 {
        fact(n + 1)
    } else {
        fact(n - 1) * BigInt::from(n + 1 + k)
    }
}

fn det_laplace(m: &[Vec<i128>]) -> i128 {
    match m.len() {
        0 => 1,
        1 => m[0][0],
        n => (0..n)
            .filter(|&j| m[0][j] != 0)
            .map(|j| {
                let minor: Vec<Vec<i128>> = m[1..]
                    .iter()
                    .map(|row| row.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, &x)| x).collect())
                    .collect();
                let sign = if j % 2 == 0 { 1 } else { -1 };
                sign * m[0][j] * det_laplace(&minor)
            })
            .sum(),
    }
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Last invariant factor as |det| / gcd of the (n-1)-minors.
fn last_invariant_by_minors(m: &[Vec<i128>]) -> i128 {
    let n = m.len();
    if n == 1 {
        return m[0][0].abs();
    }
    let mut g = 0;
    for skip_r in 0..n {
        for skip_c in 0..n {
            let minor: Vec<Vec<i128>> = m
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != skip_r)
                .map(|(_, row)| row.iter().enumerate().filter(|(j, _)| *j != skip_c).map(|(_, &x)| x).collect())
                .collect();
            g = gcd(g, det_laplace(&minor));
        }
    }
    det_laplace(m).abs() / g
}

// ---------------------------------------------------------------- families

struct Family {
    name: &'static str,
    r: u64,
    /// Rank sizes from the enumeration oracle, through `poset.top_rank()`.
    oracle: Vec<u64>,
    attached: AttachedPoset,
}

impl Family {
    fn poset(&self) -> &GradedPoset {
        &self.attached.poset
    }

    /// Ranks `0..top` where DU_n is defined.
    fn ranks(&self) -> std::ops::Range<usize> {
        0..self.poset().top_rank()
    }
}

fn family(name: &'static str, poset: GradedPoset, oracle: Vec<u64>) -> Family {
    let r = poset.r().expect("families declare r");
    let pair = find_chain_pair(&poset, r).expect("chain pair");
    let attached = attach_chain_pair(&poset, &pair).expect("attach");
    Family { name, r, oracle, attached }
}

/// Young and Young-Fibonacci through rank 11, Y x Y through rank 8.
static FAMILIES: LazyLock<Vec<Family>> = LazyLock::new(|| {
    let p = partition_counts(11);
    vec![
        family("Young", build_young(11), p.clone()),
        family("Young-Fibonacci", build_young_fibonacci(11), fibonacci_counts(11)),
        family("YxY", FamilySpec::product_of("young,young").unwrap().build(8).unwrap(), convolve(&p, &p, 8)),
    ]
});

// ---------------------------------------------------------------- criteria

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !($cond) {
            return Err(format!($($msg)+));
        }
    };
}

fn axioms() -> Outcome {
    let start = Instant::now();
    let p = partition_counts(15);
    ensure!(p[14] == 135, "partition oracle gives p_14 = {}", p[14]);
    let cases = [
        ("Young", build_young(15), 14, p.clone()),
        ("Young-Fibonacci", build_young_fibonacci(15), 14, fibonacci_counts(15)),
        ("YxY", FamilySpec::product_of("young,young").unwrap().build(9).unwrap(), 8, convolve(&p, &p, 9)),
    ];
    let mut notes = Vec::new();
    for (name, poset, through, oracle) in cases {
        let sizes: Vec<u64> = poset.rank_sizes().iter().map(|&s| s as u64).collect();
        ensure!(sizes == oracle, "{name}: rank sizes {sizes:?} differ from oracle {oracle:?}");
        let r = poset.r().unwrap();
        let report = poset.check_axioms(r);
        ensure!(report.passed(), "{name}: failing ranks {:?}", report.failed_ranks());
        ensure!(
            report.highest_verified() >= Some(through),
            "{name}: verified only through {:?}",
            report.highest_verified()
        );
        notes.push(format!("{name} r={r} through rank {through} (p_{through}={})", sizes[through]));
    }
    let secs = start.elapsed().as_secs_f64();
    ensure!(secs.total_cmp(&60.0).is_lt(), "took {secs:.1}s");
    Ok(format!("{}; {secs:.1}s", notes.join(", ")))
}

fn characteristic_polynomial() -> Outcome {
    let young2 = char_poly_du(&build_young(3), 2).map_err(|e| e.to_string())?;
    ensure!(young2.to_string() == "t^2 + 4t + 3", "Young n=2 gives {young2}");
    let mut checked = 0;
    for fam in FAMILIES.iter() {
        for n in fam.ranks() {
            let rep = char_poly_factor_check(fam.poset(), n, fam.r).map_err(|e| e.to_string())?;
            ensure!(rep.passed, "{} n={n}: {rep}", fam.name);
            let du = fam.poset().du(n).map_err(|e| e.to_string())?;
            for t in [0u64, 1, 5] {
                let det = du.add_diagonal(&BigInt::from(t)).unwrap().to_dense().determinant().unwrap();
                let want = predicted_det(&fam.oracle, fam.r, n, t);
                ensure!(det == want, "{} n={n} t={t}: det {det} vs oracle {want}", fam.name);
                ensure!(
                    rep.computed.eval(&BigInt::from(t)) == want,
                    "{} n={n}: polynomial disagrees at t={t}",
                    fam.name
                );
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} ranks; Young n=2: {young2} = (t+1)(t+3)"))
}

fn fundamental_vector() -> Outcome {
    let mut checked = 0;
    for fam in FAMILIES.iter() {
        for n in fam.ranks() {
            for k in K_VALUES {
                let id =
                    verify_fundamental_identity(fam.poset(), &fam.attached.pair, n, k).map_err(|e| e.to_string())?;
                ensure!(id.passed, "{} n={n} k={k}: (DU+kI)v != t_n", fam.name);
                let col = first_column_check(fam.poset(), &fam.attached.pair, n, k).map_err(|e| e.to_string())?;
                ensure!(col.passed, "{} n={n} k={k}: inverse column differs at {:?}", fam.name, col.mismatches);
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} (family, n, k) instances, k in {K_VALUES:?}"))
}

fn pairings() -> Outcome {
    let mut checked = 0;
    for fam in FAMILIES.iter() {
        let (p, pair) = (fam.poset(), &fam.attached.pair);
        ensure!(verify_chain_pair(p, pair, fam.r).passed(), "{}: chain pair invalid", fam.name);
        let first = if fam.r == 1 { 2 } else { 1 };
        for n in first..=p.top_rank() {
            let got = chain_pairings(p, pair, n).map_err(|e| e.to_string())?;
            for (j, v) in got.iter().enumerate() {
                let want = match fam.r {
                    1 if j == n || j + 1 == n => 1,
                    1 => 0,
                    _ if j == n => 1,
                    _ => 0,
                };
                ensure!(
                    *v == num_rational::BigRational::from_integer(want.into()),
                    "{} n={n} j={j}: pairing {v}, expected {want}",
                    fam.name
                );
                checked += 1;
            }
        }
        if fam.r == 1 {
            for n in 1..p.top_rank() {
                for k in K_VALUES {
                    let a = compute_v(p, pair, n, k).map_err(|e| e.to_string())?;
                    let b = compute_v_r1_form(p, pair, n, k).map_err(|e| e.to_string())?;
                    ensure!(a.value == b.value, "{} n={n} k={k}: r=1 form differs", fam.name);
                }
            }
        }
    }
    Ok(format!("{checked} pairings; r=1 form equal on Young and Young-Fibonacci"))
}

fn smith_oracle() -> Outcome {
    let trials = random_oracle_trials(20_140_101, 100, 5, 9);
    ensure!(trials.len() == 100, "only {} trials", trials.len());
    for t in &trials {
        ensure!(t.agrees, "{:?}: smith {} inverse {}", t.matrix, t.smith_last, t.inverse_last);
        ensure!(t.matrix.iter().flatten().all(|x| (-9..=9).contains(x)), "entry out of range");
        let m: Vec<Vec<i128>> = t.matrix.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
        let minors = last_invariant_by_minors(&m);
        ensure!(t.smith_last == minors.to_string(), "{:?}: smith {} minors {minors}", t.matrix, t.smith_last);
    }
    let mut instances = 0;
    for fam in FAMILIES.iter() {
        for n in fam.ranks() {
            for k in K_VALUES {
                let a = fam.poset().du_shifted(n, &BigInt::from(k)).unwrap().to_dense();
                let last = smith_entries(&a).pop().unwrap();
                let oracle = last_entry_via_inverse_dense(&a).map_err(|e| e.to_string())?;
                ensure!(last == oracle, "{} n={n} k={k}: smith {last} inverse {oracle}", fam.name);
                if a.n_rows() <= 6 {
                    let m: Vec<Vec<i128>> =
                        a.rows().iter().map(|r| r.iter().map(|x| i128::try_from(x).unwrap()).collect()).collect();
                    ensure!(
                        last == BigInt::from(last_invariant_by_minors(&m)),
                        "{} n={n} k={k}: minors oracle disagrees",
                        fam.name
                    );
                }
                instances += 1;
            }
        }
    }
    Ok(format!("100 random 5x5 matrices and {instances} DU_n+kI instances"))
}

fn divisibility_bound() -> Outcome {
    let young = FAMILIES.iter().find(|f| f.name == "Young").unwrap();
    let yy = FAMILIES.iter().find(|f| f.name == "YxY").unwrap();
    let rep = check_divisibility_bound(young.poset(), &young.attached.pair, 2, 1).map_err(|e| e.to_string())?;
    ensure!(rep.last_entry == "8" && rep.bound == "8", "Young n=2 k=1: last {} bound {}", rep.last_entry, rep.bound);
    ensure!(rep.smith_diagonal == ["1", "8"], "Young n=2 k=1: diagonal {:?}", rep.smith_diagonal);
    let rep = check_divisibility_bound(yy.poset(), &yy.attached.pair, 1, 1).map_err(|e| e.to_string())?;
    ensure!(rep.last_entry == "15" && rep.bound == "15", "YxY n=1 k=1: last {} bound {}", rep.last_entry, rep.bound);

    let (mut total, mut exact) = (0, 0);
    for fam in FAMILIES.iter() {
        for n in fam.ranks() {
            for k in K_VALUES {
                let rep = check_divisibility_bound(fam.poset(), &fam.attached.pair, n, k).map_err(|e| e.to_string())?;
                let want = bound_oracle(fam.r, n as u64, k);
                ensure!(rep.bound == want.to_string(), "{} n={n} k={k}: bound {} vs {want}", fam.name, rep.bound);
                let last: BigInt = rep.last_entry.parse().unwrap();
                ensure!(
                    !last.is_zero() && (&last % &want).is_zero(),
                    "{} n={n} k={k}: {want} does not divide {last}",
                    fam.name
                );
                ensure!(
                    rep.fundamental_multiplier == rep.bound,
                    "{} n={n} k={k}: multiplier {} vs bound {}",
                    fam.name,
                    rep.fundamental_multiplier,
                    rep.bound
                );
                total += 1;
                exact += usize::from(last == want);
            }
        }
    }
    Ok(format!("{total} instances, bound exact on {exact}; Young(2,1)=8, YxY(1,1)=15"))
}

fn strict_growth() -> Outcome {
    let young_delta: Vec<i64> = (2..=9).map(|n| delta(&partition_counts(9), n)).collect();
    ensure!(young_delta == [1, 1, 2, 2, 4, 4, 7, 8], "Young Δp oracle gives {young_delta:?}");
    let mut certs = 0;
    for fam in FAMILIES.iter() {
        for n in 2..fam.poset().top_rank() {
            let c = certify_strict_growth(fam.poset(), fam.r, n).map_err(|e| format!("{} n={n}: {e}", fam.name))?;
            let want = delta(&fam.oracle, n);
            ensure!(c.delta_p_direct == want, "{} n={n}: Δp {} vs oracle {want}", fam.name, c.delta_p_direct);
            ensure!(want > 0 && c.concludes_positive, "{} n={n}: no strict growth", fam.name);
            ensure!(c.prime_divides_last_entry, "{} n={n}: p={} does not divide {}", fam.name, c.prime, c.last_entry);
            ensure!(c.prime_divides_only_first_factor, "{} n={n}: p={} divides another factor", fam.name, c.prime);
            ensure!(c.determinant_matches_formula && c.recheck(), "{} n={n}: certificate does not recheck", fam.name);
            let last: BigInt = c.last_entry.parse().unwrap();
            ensure!((&last % c.prime).is_zero() && last.is_positive(), "{} n={n}: bad last entry", fam.name);
            certs += 1;
        }
    }
    Ok(format!("{certs} certificates; Young Δp_2..9 = {young_delta:?}"))
}

fn negative_controls() -> Outcome {
    let young = build_young(6);
    let dir = std::env::temp_dir().join(format!("diffposet-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let mut deletions = 0;
    // covers with an endpoint at rank 3
    for level in [2usize, 3] {
        for victim in 0..young.edges(level).count() {
            let mut edges = young.edge_lists();
            let (i, j) = edges[level].remove(victim);
            let label = format!("{}:{i} -> {}:{j}", level, level + 1);
            let broken = GradedPoset::new(young.rank_sizes().to_vec(), edges, Some(1)).map_err(|e| e.to_string())?;
            ensure!(!broken.check_axioms(1).passed(), "deleting {label} passes check_axioms");
            ensure!(!verify_all(&broken, &VerifyConfig::default()).passed(), "deleting {label} passes verify_all");

            let path = dir.join(format!("broken-{level}-{victim}.txt"));
            std::fs::write(&path, write_hasse(&broken)).map_err(|e| e.to_string())?;
            let status = Command::new(env!("CARGO_BIN_EXE_diffposet"))
                .args(["verify-all", "--in"])
                .arg(&path)
                .output()
                .map_err(|e| e.to_string())?
                .status;
            ensure!(!status.success(), "deleting {label}: verify-all exits {status}");
            deletions += 1;
        }
    }
    let _ = std::fs::remove_dir_all(&dir);
    let intact = verify_all(&young, &VerifyConfig::default());
    ensure!(intact.passed(), "the intact lattice fails verify_all");
    Ok(format!("all {deletions} single-edge deletions touching rank 3 rejected"))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("axioms DU - UD = rI", axioms),
        ("characteristic polynomial factorization", characteristic_polynomial),
        ("fundamental vector and first inverse column", fundamental_vector),
        ("chain pairings and r=1 form", pairings),
        ("Smith last entry vs inverse oracle", smith_oracle),
        ("divisibility bound and sharpness", divisibility_bound),
        ("strict growth certificates", strict_growth),
        ("negative controls", negative_controls),
    ];
    let mut failures = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {name} [{secs:.1}s]: {detail}"),
            Err(reason) => {
                failures += 1;
                println!("FAIL {name} [{secs:.1}s]: {reason}");
            }
        }
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
