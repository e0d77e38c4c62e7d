//! Six-fold products that are rational squares, their bounded-height census, and a
//! replay of the interval-partition counting argument on concrete progressions.
//!
//! A solution is a reduced fraction `x = p/q` with a tuple `0 = b_1 < ... < b_6 <= M-1`
//! such that `(x + b_1)...(x + b_6)` is the square of a rational. Clearing the `q^6`
//! denominator, this holds iff `(p + b_1 q)...(p + b_6 q)` is a perfect square.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer as _;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{is_square, is_square_i128, Integer};
use crate::error::{domain, violation, Error, Result};
use crate::square_count::{square_positions_fast, Ap};

pub type SixTuple = [u64; 6];

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct FaltingsSolution {
    #[serde(with = "crate::serde_int")]
    pub p: Integer,
    #[serde(with = "crate::serde_int")]
    pub q: Integer,
    pub b: SixTuple,
    pub product_zero: bool,
}

fn check_tuple(b: &SixTuple) -> Result<()> {
    if b[0] != 0 || b.windows(2).any(|w| w[0] >= w[1]) {
        return Err(domain(format!("shift tuple {b:?} must satisfy 0 = b1 < b2 < ... < b6")));
    }
    Ok(())
}

/// Whether `(p/q + b_1)...(p/q + b_6)` is the square of a rational (zero included).
pub fn product_is_rational_square(p: &Integer, q: &Integer, b: &SixTuple) -> Result<bool> {
    if !q.is_positive() {
        return Err(domain(format!("denominator must be >= 1, got {q}")));
    }
    if !p.gcd(q).is_one() {
        return Err(domain(format!("fraction {p}/{q} is not reduced")));
    }
    check_tuple(b)?;
    let product = b.iter().fold(Integer::one(), |acc, bi| acc * (p + q * *bi));
    Ok(is_square(&product))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BCountResult {
    pub m: u64,
    pub height: u64,
    pub include_zero: bool,
    pub count: u64,
    pub solutions: Vec<FaltingsSolution>,
}

/// Largest `height * m` accepted by [`b_count_search`]; keeps products inside `i128`
/// on the fast path and the box enumerable.
pub const B_COUNT_MAX_BOX: u64 = 1 << 24;

/// Bounded-height census: all reduced `p/q` with `|p| <= H*M`, `1 <= q <= H`, and all
/// tuples `0 = b_1 < ... < b_6 <= M-1`. Ordered by `q`, then `p`, then `b`.
pub fn b_count_search(m: u64, height: u64, include_zero: bool) -> Result<BCountResult> {
    if m < 6 {
        return Err(domain(format!("M must be >= 6, got {m}")));
    }
    if height == 0 {
        return Err(domain("height must be >= 1"));
    }
    let p_max = height.checked_mul(m).filter(|v| *v <= B_COUNT_MAX_BOX);
    let Some(p_max) = p_max else {
        return Err(Error::Overflow(format!("height * M must be <= {B_COUNT_MAX_BOX}")));
    };
    let p_max = p_max as i64;
    let per_q: Vec<Vec<FaltingsSolution>> = (1..=height)
        .into_par_iter()
        .map(|q| {
            let mut out = Vec::new();
            for p in -p_max..=p_max {
                if num_integer::gcd(p.unsigned_abs(), q) != 1 {
                    continue;
                }
                // values[j] = p + j q, the numerators of x + j
                let values: Vec<i128> = (0..m).map(|j| p as i128 + (j * q) as i128).collect();
                let mut tuple = [0u64; 6];
                collect_tuples(&values, 1, 1, values[0], &mut tuple, &mut |b, zero| {
                    if zero && !include_zero {
                        return;
                    }
                    out.push(FaltingsSolution { p: BigInt::from(p), q: BigInt::from(q), b: *b, product_zero: zero });
                });
            }
            out
        })
        .collect();
    let solutions: Vec<FaltingsSolution> = per_q.into_iter().flatten().collect();
    Ok(BCountResult { m, height, include_zero, count: solutions.len() as u64, solutions })
}

/// Extends `tuple[..depth]` with increasing shifts starting at `from`, carrying the
/// running product. `values` magnitudes stay below 2^26, so six factors fit in `i128`.
fn collect_tuples(
    values: &[i128],
    depth: usize,
    from: usize,
    product: i128,
    tuple: &mut SixTuple,
    emit: &mut impl FnMut(&SixTuple, bool),
) {
    if depth == 6 {
        if is_square_i128(product) {
            emit(tuple, product == 0);
        }
        return;
    }
    let remaining = 6 - depth;
    for j in from..=values.len() - remaining {
        tuple[depth] = j as u64;
        collect_tuples(values, depth + 1, j + 1, product * values[j], tuple, emit);
    }
}

/// `r <= 5 + C(r, 6)` for every `1 <= r <= r_max`.
pub fn r_binom_check(r_max: u64) -> bool {
    (1..=r_max).all(|r| BigInt::from(r) <= BigInt::from(5u32) + binom6(r))
}

pub fn binom6(r: u64) -> BigInt {
    if r < 6 {
        return BigInt::zero();
    }
    let num = (0..6u64).fold(BigInt::one(), |acc, i| acc * (r - i));
    num / 720u32
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GeneratedSolution {
    /// Positions `n_1 < ... < n_6` inside one interval.
    pub positions: SixTuple,
    pub interval: u64,
    pub solution: FaltingsSolution,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub name: String,
    pub lhs: String,
    pub rhs: String,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LedgerReport {
    pub ap: Ap,
    pub m: u64,
    /// Number of intervals `[jM, (j+1)M)`; `kM` is the smallest multiple of `M` above `N`.
    pub k: u64,
    pub square_count: u64,
    pub interval_sizes: Vec<u64>,
    /// Intervals holding six or more square positions.
    pub heavy_intervals: Vec<u64>,
    #[serde(with = "crate::serde_int")]
    pub binomial_sum: Integer,
    pub generated: Vec<GeneratedSolution>,
    pub distinct_solutions: u64,
    pub five_k: u64,
    /// `5k + (distinct generated solutions)`.
    pub final_bound: u64,
    pub verdicts: Vec<Verdict>,
    /// Whether `N >= M(B + 5)` with `B` the distinct solution count; when it holds the
    /// chain continues to `Q <= 6N/M`.
    pub large_n_premise: bool,
    pub delta: Option<f64>,
    /// With `delta` given: whether `M > 6/delta`, `N >= M(B+5)` and the count is `< delta N`.
    pub delta_conclusion: Option<bool>,
}

impl LedgerReport {
    pub fn all_hold(&self) -> bool {
        self.verdicts.iter().all(|v| v.holds)
    }
}

/// Upper limit on generated six-subsets in one ledger run.
pub const LEDGER_MAX_SUBSETS: u64 = 5_000_000;

fn verdict(name: impl Into<String>, lhs: impl ToString, rhs: impl ToString, holds: bool) -> Verdict {
    Verdict { name: name.into(), lhs: lhs.to_string(), rhs: rhs.to_string(), holds }
}

/// Replays the interval-partition count on the progression `a + n d`, `0 <= n < N`.
///
/// Every 6-subset of square positions within one interval becomes a solution
/// `x = a/d + n_1`, `b_i = n_i - n_1`; each is checked to be a rational-square product,
/// to satisfy `d (x + b_i) = a + n_i d`, and to be distinct from all others. Any failed
/// check or inequality is a contract violation.
pub fn ledger_run(a: &Integer, d: &Integer, n: u64, m: u64, delta: Option<f64>) -> Result<LedgerReport> {
    if m < 6 {
        return Err(domain(format!("M must be >= 6, got {m}")));
    }
    if let Some(delta) = delta {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(domain(format!("delta must be a positive number, got {delta}")));
        }
    }
    let ap = Ap::new(a.clone(), d.clone(), n)?;
    let squares = square_positions_fast(&ap);
    let k = n / m + 1;
    let mut buckets: Vec<Vec<u64>> = vec![Vec::new(); k as usize];
    for &pos in &squares.positions {
        buckets[(pos / m) as usize].push(pos);
    }
    let interval_sizes: Vec<u64> = buckets.iter().map(|b| b.len() as u64).collect();
    let heavy: Vec<u64> = (0..k).filter(|&j| interval_sizes[j as usize] >= 6).collect();
    let binomial_sum: BigInt = heavy.iter().map(|&j| binom6(interval_sizes[j as usize])).sum();
    if binomial_sum > BigInt::from(LEDGER_MAX_SUBSETS) {
        return Err(domain(format!("ledger would generate {binomial_sum} six-subsets (limit {LEDGER_MAX_SUBSETS})")));
    }

    let mut generated = Vec::new();
    for &j in &heavy {
        let bucket = &buckets[j as usize];
        for_each_six_subset(bucket, |subset| {
            let solution = solution_from_positions(a, d, subset)?;
            generated.push(GeneratedSolution { positions: *subset, interval: j, solution });
            Ok(())
        })?;
    }
    let mut seen = BTreeSet::new();
    for g in &generated {
        let key = (&g.solution.p, &g.solution.q, g.solution.b);
        if !seen.insert(key) {
            return Err(violation(format!("six-subset {:?} repeats an earlier solution", g.positions)));
        }
    }
    let distinct = seen.len() as u64;

    let count = squares.count() as u64;
    let five_k = 5 * k;
    let final_bound = five_k + distinct;
    let mut verdicts = Vec::new();
    verdicts.push(verdict("kM > N", k * m, n, k * m > n));
    verdicts.push(verdict("(k-1)M <= N", (k - 1) * m, n, (k - 1) * m <= n));
    for (j, &size) in interval_sizes.iter().enumerate() {
        let rhs = BigInt::from(5u32) + binom6(size);
        verdicts.push(verdict(format!("|N_{j}| <= 5 + C(|N_{j}|,6)"), size, &rhs, BigInt::from(size) <= rhs));
    }
    let sum_sizes: u64 = interval_sizes.iter().sum();
    verdicts.push(verdict("sum |N_j| = |N|", sum_sizes, count, sum_sizes == count));
    verdicts.push(verdict(
        "sum_J C(|N_j|,6) = generated",
        &binomial_sum,
        generated.len(),
        binomial_sum == BigInt::from(generated.len()),
    ));
    let chain = BigInt::from(five_k) + &binomial_sum;
    verdicts.push(verdict("|N| <= 5k + sum_J C(|N_j|,6)", count, &chain, BigInt::from(count) <= chain));
    verdicts.push(verdict("|N| <= 5k + B", count, final_bound, count <= final_bound));
    // 5k + B <= 5N/M + (B + 5)  <=>  kM <= N + M
    verdicts.push(verdict("5k + B <= 5N/M + B + 5", k * m, n + m, k * m <= n + m));

    let large_n_premise = n as u128 >= m as u128 * (distinct as u128 + 5);
    if large_n_premise {
        // 5N/M + B + 5 <= 6N/M  <=>  M(B + 5) <= N
        verdicts.push(verdict("|N| <= 6N/M", count as u128 * m as u128, 6 * n as u128, count as u128 * m as u128 <= 6 * n as u128));
    }
    let delta_conclusion = delta.map(|delta| {
        let m_large = m as f64 * delta > 6.0;
        m_large && large_n_premise && (count as f64) < delta * n as f64
    });

    let report = LedgerReport {
        ap,
        m,
        k,
        square_count: count,
        interval_sizes,
        heavy_intervals: heavy,
        binomial_sum,
        generated,
        distinct_solutions: distinct,
        five_k,
        final_bound,
        verdicts,
        large_n_premise,
        delta,
        delta_conclusion,
    };
    if let Some(bad) = report.verdicts.iter().find(|v| !v.holds) {
        return Err(violation(format!("ledger inequality `{}` failed: {} vs {}", bad.name, bad.lhs, bad.rhs)));
    }
    Ok(report)
}

fn solution_from_positions(a: &Integer, d: &Integer, n: &SixTuple) -> Result<FaltingsSolution> {
    let numerator = a + d * n[0];
    let g = numerator.gcd(d);
    let p = &numerator / &g;
    let q = d / &g;
    let b: SixTuple = std::array::from_fn(|i| n[i] - n[0]);
    if !product_is_rational_square(&p, &q, &b)? {
        return Err(violation(format!("six-subset {n:?} does not give a rational square product")));
    }
    // d (x + b_i) = a + n_i d, i.e. d (p + b_i q) = q (a + n_i d)
    for i in 0..6 {
        if d * (&p + &q * b[i]) != &q * (a + d * n[i]) {
            return Err(violation(format!("six-subset {n:?} fails the substitution identity at i = {i}")));
        }
    }
    let product_zero = b.iter().any(|bi| (&p + &q * *bi).is_zero());
    Ok(FaltingsSolution { p, q, b, product_zero })
}

fn for_each_six_subset(items: &[u64], mut f: impl FnMut(&SixTuple) -> Result<()>) -> Result<()> {
    let n = items.len();
    if n < 6 {
        return Ok(());
    }
    let mut idx = [0usize, 1, 2, 3, 4, 5];
    loop {
        let subset: SixTuple = std::array::from_fn(|i| items[idx[i]]);
        f(&subset)?;
        let mut i = 6;
        loop {
            if i == 0 {
                return Ok(());
            }
            i -= 1;
            if idx[i] < n - 6 + i {
                break;
            }
        }
        idx[i] += 1;
        for t in i + 1..6 {
            idx[t] = idx[t - 1] + 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CONSECUTIVE: SixTuple = [0, 1, 2, 3, 4, 5];

    fn int(v: i64) -> Integer {
        Integer::from(v)
    }

    #[test]
    fn product_examples() {
        assert!(product_is_rational_square(&int(-3), &int(1), &CONSECUTIVE).unwrap());
        assert!(!product_is_rational_square(&int(1), &int(1), &CONSECUTIVE).unwrap());
        // (-1)(1)(2)(3)(4)(5) < 0
        assert!(!product_is_rational_square(&int(-1), &int(1), &[0, 2, 3, 4, 5, 6]).unwrap());
        assert!(product_is_rational_square(&int(2), &int(4), &CONSECUTIVE).is_err());
        assert!(product_is_rational_square(&int(1), &int(0), &CONSECUTIVE).is_err());
        assert!(product_is_rational_square(&int(1), &int(1), &[0, 2, 1, 3, 4, 5]).is_err());
        assert!(product_is_rational_square(&int(1), &int(1), &[1, 2, 3, 4, 5, 6]).is_err());
    }

    #[test]
    fn zero_family_at_m6() {
        let r = b_count_search(6, 1, true).unwrap();
        for k in 0..=5 {
            assert!(r.solutions.iter().any(|s| s.p == int(-k) && s.q == int(1) && s.b == CONSECUTIVE && s.product_zero));
        }
        let nz = b_count_search(6, 1, false).unwrap();
        assert!(nz.solutions.iter().all(|s| !s.product_zero));
        assert_eq!(r.count - nz.count, 6);
        assert!(b_count_search(5, 1, true).is_err());
    }

    #[test]
    fn binomials() {
        assert_eq!(binom6(5), BigInt::zero());
        assert_eq!(binom6(6), BigInt::one());
        assert_eq!(binom6(10), BigInt::from(210));
        assert!(r_binom_check(6));
        assert!(r_binom_check(5));
        assert!(r_binom_check(10_000));
    }

    #[test]
    fn six_subsets_enumerated_in_order() {
        let items: Vec<u64> = (10..18).collect();
        let mut seen = Vec::new();
        for_each_six_subset(&items, |s| {
            seen.push(*s);
            Ok(())
        })
        .unwrap();
        assert_eq!(seen.len(), 28);
        assert_eq!(seen[0], [10, 11, 12, 13, 14, 15]);
        assert_eq!(seen[27], [12, 13, 14, 15, 16, 17]);
        assert!(seen.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn ledger_examples() {
        let r = ledger_run(&int(1), &int(24), 4, 6, None).unwrap();
        assert_eq!(r.k, 1);
        assert_eq!(r.interval_sizes, vec![3]);
        assert!(r.heavy_intervals.is_empty());
        assert_eq!(r.final_bound, 5);
        assert!(r.all_hold());

        let r = ledger_run(&int(0), &int(1), 36, 6, None).unwrap();
        assert_eq!(r.square_count, 6);
        // 36 is itself a multiple of 6, so the seventh interval [36, 42) is empty
        assert_eq!(r.k, 7);
        // squares 0,1,4 | 9 | 16 | - | 25 | - | -
        assert_eq!(r.interval_sizes, vec![3, 1, 1, 0, 1, 0, 0]);
        assert!(r.heavy_intervals.is_empty());
        assert!(r.all_hold());
    }

    #[test]
    fn ledger_generates_solutions() {
        // 24n + 1 has squares at n = 0, 1, 2, 5, 7, 12 inside [0, 13)
        let r = ledger_run(&int(1), &int(24), 13, 13, Some(0.5)).unwrap();
        assert_eq!(r.heavy_intervals, vec![0]);
        assert_eq!(r.generated.len(), 1);
        let s = &r.generated[0].solution;
        assert_eq!((s.p.clone(), s.q.clone(), s.b), (int(1), int(24), [0, 1, 2, 5, 7, 12]));
        assert!(!s.product_zero);
        assert_eq!(r.distinct_solutions, 1);
        assert!(!r.large_n_premise);
        assert_eq!(r.delta_conclusion, Some(false));
    }

    #[test]
    fn ledger_rejects_bad_input() {
        assert!(ledger_run(&int(0), &int(1), 10, 5, None).is_err());
        assert!(ledger_run(&int(0), &int(0), 10, 6, None).is_err());
        assert!(ledger_run(&int(0), &int(1), 10, 6, Some(-1.0)).is_err());
    }
}
