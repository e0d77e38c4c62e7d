//! Extremal and exhaustive searches around four-term progressions.

use std::cmp::Reverse;
use std::ops::{Add, Sub};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{is_square_u64, Integer};
use crate::congruence::solve_square_congruence;
use crate::error::{domain, violation, Error, Result};
use crate::square_count::{square_positions_naive, Ap, SquarePositions};

/// Some `(u, u+v, u+2v, u+3v)` with `v >= 1` inside `set`, or `None`.
///
/// Duplicates are ignored. The first hit in (smallest `u`, smallest `v`) order is
/// returned, so the answer does not depend on the input order.
pub fn find_4ap_in_set<T>(set: &[T]) -> Option<[T; 4]>
where
    T: Ord + Clone + Add<Output = T> + Sub<Output = T>,
{
    let mut sorted = set.to_vec();
    sorted.sort();
    sorted.dedup();
    for (i, u) in sorted.iter().enumerate() {
        for w in &sorted[i + 1..] {
            let v = w.clone() - u.clone();
            let third = w.clone() + v.clone();
            if sorted.binary_search(&third).is_err() {
                continue;
            }
            let fourth = third.clone() + v;
            if sorted.binary_search(&fourth).is_ok() {
                return Some([u.clone(), w.clone(), third, fourth]);
            }
        }
    }
    None
}

/// `floor((3N + 3) / 4)`.
pub fn fermat_upper_bound(n: u64) -> u64 {
    (3 * n as u128).div_ceil(4) as u64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ThreeSquareAp {
    /// `a < b < c` with `a^2, b^2, c^2` in arithmetic progression.
    pub roots: [u64; 3],
    pub difference: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FourSquareAp {
    pub roots: [u64; 4],
    pub difference: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FermatScanResult {
    pub bound: u64,
    pub pairs_checked: u64,
    pub four_ap_found: Option<FourSquareAp>,
    pub three_ap_census: u64,
    pub three_aps: Vec<ThreeSquareAp>,
}

/// Largest root bound the scan accepts; `3 b^2` must fit in a `u64`.
pub const FERMAT_SCAN_MAX_BOUND: u64 = 1 << 30;

/// Checks every pair `1 <= a < b <= bound` as the first two roots of a square
/// progression `a^2, b^2, 2b^2 - a^2, 3b^2 - 2a^2`.
pub fn fermat_scan(bound: u64) -> Result<FermatScanResult> {
    if bound < 2 {
        return Err(domain(format!("fermat scan needs bound >= 2, got {bound}")));
    }
    if bound > FERMAT_SCAN_MAX_BOUND {
        return Err(Error::Overflow(format!("fermat scan bound {bound} exceeds {FERMAT_SCAN_MAX_BOUND}")));
    }
    let per_b: Vec<(Vec<ThreeSquareAp>, Option<FourSquareAp>)> = (2..=bound)
        .into_par_iter()
        .map(|b| {
            let b2 = b * b;
            let mut threes = Vec::new();
            let mut four = None;
            for a in 1..b {
                let a2 = a * a;
                let third = 2 * b2 - a2;
                if !is_square_u64(third) {
                    continue;
                }
                let c = third.isqrt();
                let difference = b2 - a2;
                threes.push(ThreeSquareAp { roots: [a, b, c], difference });
                let fourth = third + difference;
                if four.is_none() && is_square_u64(fourth) {
                    four = Some(FourSquareAp { roots: [a, b, c, fourth.isqrt()], difference });
                }
            }
            (threes, four)
        })
        .collect();
    let mut three_aps = Vec::new();
    let mut four_ap_found = None;
    for (threes, four) in per_b {
        three_aps.extend(threes);
        if four_ap_found.is_none() {
            four_ap_found = four;
        }
    }
    Ok(FermatScanResult {
        bound,
        pairs_checked: bound * (bound - 1) / 2,
        four_ap_found,
        three_ap_census: three_aps.len() as u64,
        three_aps,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QnWitness {
    pub step: u64,
    /// Residue of the squares modulo `step`.
    pub residue: u64,
    /// The first term of the witness progression, itself a square.
    #[serde(with = "crate::serde_int")]
    pub start: Integer,
    /// Distance in steps from the first to the last counted square.
    pub span_steps: u64,
    /// Squares of the full witness progression, recomputed by the naive engine.
    pub positions: SquarePositions,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QnLowerResult {
    pub n: u64,
    pub d_max: u64,
    pub x_max: u64,
    /// Most squares `<= x_max^2` found in one progression of length `n` with step `<= d_max`.
    pub best_count: u64,
    pub witness: QnWitness,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct WindowKey {
    count: Reverse<u64>,
    span_steps: u64,
    step: u64,
    residue: u64,
    start: u128,
}

/// Lower bound for the largest number of squares in a length-`n` progression, searching
/// steps `d <= d_max` and squares `x^2` with `x <= x_max`.
///
/// For each step `d` and each residue class that contains squares, the squares of that
/// class are listed in increasing order and a two-pointer window of span `(n-1)d` is slid
/// across them. Ties are broken by the smallest span in steps (the most compact
/// placement), then smallest `d`, residue and start.
pub fn qn_lower_search(n: u64, d_max: u64, x_max: u64) -> Result<QnLowerResult> {
    if n < 2 {
        return Err(domain(format!("qn search needs n >= 2, got {n}")));
    }
    if d_max < 1 || x_max < 1 {
        return Err(domain("qn search needs d_max >= 1 and x_max >= 1"));
    }
    if x_max > u32::MAX as u64 || d_max > u32::MAX as u64 {
        return Err(Error::Overflow("qn search bounds must fit in 32 bits".into()));
    }
    let best = (1..=d_max)
        .into_par_iter()
        .map(|d| best_window_for_step(n, d, x_max))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .min()
        .expect("d = 1 always has a window");

    let ap = Ap::new(Integer::from(best.start), Integer::from(best.step), n)?;
    let positions = square_positions_naive(&ap);
    if (positions.count() as u64) < best.count.0 {
        return Err(violation(format!(
            "qn witness re-verification found {} squares, search claimed {}",
            positions.count(),
            best.count.0
        )));
    }
    if let Some(ap4) = find_4ap_in_set(&positions.positions) {
        return Err(violation(format!("square positions {ap4:?} form a 4-term progression")));
    }
    Ok(QnLowerResult {
        n,
        d_max,
        x_max,
        best_count: best.count.0,
        witness: QnWitness {
            step: best.step,
            residue: best.residue,
            start: Integer::from(best.start),
            span_steps: best.span_steps,
            positions,
        },
    })
}

fn best_window_for_step(n: u64, d: u64, x_max: u64) -> Result<Option<WindowKey>> {
    let span_limit = (n - 1) as u128 * d as u128;
    let modulus = Integer::from(d);
    let mut best: Option<WindowKey> = None;
    for r in 0..d {
        let roots = solve_square_congruence(&Integer::from(r), &modulus)?.roots;
        if roots.is_empty() {
            continue;
        }
        let roots: Vec<u64> = roots.iter().map(|x| x.to_u64().expect("root below d")).collect();
        // x in increasing order, so the squares come out sorted
        let squares: Vec<u128> = (0..=x_max / d)
            .flat_map(|block| roots.iter().map(move |root| block * d + root))
            .filter(|&x| x <= x_max)
            .map(|x| x as u128 * x as u128)
            .collect();
        let mut lo = 0;
        for hi in 0..squares.len() {
            while squares[hi] - squares[lo] > span_limit {
                lo += 1;
            }
            let key = WindowKey {
                count: Reverse((hi - lo + 1) as u64),
                span_steps: ((squares[hi] - squares[lo]) / d as u128) as u64,
                step: d,
                residue: r,
                start: squares[lo],
            };
            if best.is_none_or(|b| key < b) {
                best = Some(key);
            }
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct No4ApResult {
    pub n: u64,
    pub max_size: u64,
    /// Lexicographically first extremal set found.
    pub witness: Vec<u64>,
    /// True when every branch of the search finished inside its node budget.
    pub optimal: bool,
    /// Search nodes visited, counting branches up to the first success at each size.
    pub nodes: u64,
}

/// Largest universe the bitset search supports.
pub const NO4AP_MAX_N: u64 = 128;
pub const DEFAULT_NODE_BUDGET: u64 = 2_000_000_000;

pub fn no4ap_max(n: u64) -> Result<No4ApResult> {
    no4ap_max_with_budget(n, DEFAULT_NODE_BUDGET)
}

/// Maximum size of a subset of `{0, ..., n-1}` without a 4-term progression.
///
/// Works upward through `m = 1..=n`. With `r(m-1)` known, `r(m)` is either `r(m-1)` or
/// `r(m-1) + 1`, and a set of size `r(m-1) + 1` must contain both `0` and `m-1`. A
/// depth-first search in increasing element order keeps, for each chosen pair forming a
/// 3-term progression, the forbidden fourth term, and prunes when the elements chosen
/// plus `r(remaining window)` cannot reach the target.
///
/// The search branches on the second element; `node_budget` caps each branch at each `m`.
pub fn no4ap_max_with_budget(n: u64, node_budget: u64) -> Result<No4ApResult> {
    if n == 0 {
        return Err(domain("no4ap needs n >= 1"));
    }
    if n > NO4AP_MAX_N {
        return Err(domain(format!("no4ap supports n <= {NO4AP_MAX_N}, got {n}")));
    }
    let nodes = AtomicU64::new(0);
    // r[m] for m = 0..=n
    let mut r = vec![0u64];
    let mut witness: Vec<u64> = Vec::new();
    for m in 1..=n {
        let target = r[(m - 1) as usize] + 1;
        let search = Search { m, target, r: &r, nodes: &nodes, budget: node_budget };
        match search.run() {
            SearchOutcome::Found(set) => {
                r.push(target);
                witness = set;
            }
            SearchOutcome::Impossible => r.push(target - 1),
            SearchOutcome::Exhausted => {
                return Ok(No4ApResult {
                    n,
                    max_size: r[(m - 1) as usize],
                    witness,
                    optimal: false,
                    nodes: nodes.load(Ordering::Relaxed),
                });
            }
        }
    }
    Ok(No4ApResult { n, max_size: r[n as usize], witness, optimal: true, nodes: nodes.load(Ordering::Relaxed) })
}

enum SearchOutcome {
    Found(Vec<u64>),
    Impossible,
    Exhausted,
}

struct Search<'a> {
    m: u64,
    target: u64,
    r: &'a [u64],
    nodes: &'a AtomicU64,
    budget: u64,
}

#[derive(Clone, Copy)]
struct State {
    chosen: u128,
    forbidden: u128,
    size: u64,
}

impl State {
    /// Adds `x` (greater than every chosen element) and forbids the fourth terms it
    /// creates. Returns `None` if `x` itself is forbidden.
    fn with(self, x: u64, m: u64) -> Option<State> {
        if self.forbidden >> x & 1 == 1 {
            return None;
        }
        let mut forbidden = self.forbidden;
        let mut rest = self.chosen;
        while rest != 0 {
            let b = rest.trailing_zeros() as u64;
            rest &= rest - 1;
            let v = x - b;
            if b >= v && self.chosen >> (b - v) & 1 == 1 && x + v < m {
                forbidden |= 1u128 << (x + v);
            }
        }
        Some(State { chosen: self.chosen | 1u128 << x, forbidden, size: self.size + 1 })
    }
}

impl Search<'_> {
    fn run(&self) -> SearchOutcome {
        let m = self.m;
        if m == 1 {
            return SearchOutcome::Found(vec![0]);
        }
        let root = State { chosen: 0, forbidden: 0, size: 0 }.with(0, m).expect("empty set forbids nothing");
        if m == 2 {
            let s = root.with(1, m).expect("two points");
            return if s.size == self.target { SearchOutcome::Found(vec![0, 1]) } else { SearchOutcome::Impossible };
        }
        // Branch on the second element; the first success in ascending order is the
        // same set the sequential search would find. Each branch has its own node budget
        // and only branches up to the first success are tallied, so the outcome and the
        // node count do not depend on scheduling.
        let tallies: Vec<AtomicU64> = (0..m).map(|_| AtomicU64::new(0)).collect();
        let exhausted: Vec<AtomicBool> = (0..m).map(|_| AtomicBool::new(false)).collect();
        let found = (1..m).into_par_iter().find_map_first(|second| {
            let state = root.with(second, m)?;
            let mut nodes = 0;
            let result = self.dfs(state, second + 1, &mut nodes);
            tallies[second as usize].store(nodes, Ordering::Relaxed);
            match result {
                Ok(Some(set)) => Some((second, set)),
                Ok(None) => None,
                Err(()) => {
                    exhausted[second as usize].store(true, Ordering::Relaxed);
                    None
                }
            }
        });
        let last = found.map_or(m - 1, |(second, _)| second) as usize;
        self.nodes.fetch_add(tallies[..=last].iter().map(|t| t.load(Ordering::Relaxed)).sum(), Ordering::Relaxed);
        match found {
            Some((_, set)) => SearchOutcome::Found((0..m).filter(|i| set >> i & 1 == 1).collect()),
            None if exhausted.iter().any(|e| e.load(Ordering::Relaxed)) => SearchOutcome::Exhausted,
            None => SearchOutcome::Impossible,
        }
    }

    /// Decides elements `next..m`; `m - 1` must end up chosen.
    fn dfs(&self, state: State, next: u64, nodes: &mut u64) -> Result<Option<u128>, ()> {
        if *nodes >= self.budget {
            return Err(());
        }
        *nodes += 1;
        if state.size == self.target {
            return Ok((state.chosen >> (self.m - 1) & 1 == 1).then_some(state.chosen));
        }
        if next >= self.m {
            return Ok(None);
        }
        let window = self.m - next;
        let free_mask = !state.forbidden & (((1u128 << window) - 1) << next);
        let room = (free_mask.count_ones() as u64).min(self.r[window as usize]);
        if state.size + room < self.target {
            return Ok(None);
        }
        if let Some(with) = state.with(next, self.m) {
            if let Some(set) = self.dfs(with, next + 1, nodes)? {
                return Ok(Some(set));
            }
        }
        if next == self.m - 1 {
            return Ok(None);
        }
        self.dfs(state, next + 1, nodes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn has_4ap_mask(mask: u32, n: u32) -> bool {
        for a in 0..n {
            for v in 1..n {
                if a + 3 * v >= n {
                    break;
                }
                if (0..4).all(|i| mask >> (a + i * v) & 1 == 1) {
                    return true;
                }
            }
        }
        false
    }

    fn brute_no4ap(n: u32) -> u64 {
        (0u32..1 << n).filter(|&m| !has_4ap_mask(m, n)).map(|m| m.count_ones() as u64).max().unwrap()
    }

    #[test]
    fn find_4ap_examples() {
        assert_eq!(find_4ap_in_set(&[0, 2, 4, 6]), Some([0, 2, 4, 6]));
        assert_eq!(find_4ap_in_set(&[0, 1, 2, 4]), None);
        assert_eq!(find_4ap_in_set::<i64>(&[]), None);
        assert_eq!(find_4ap_in_set(&[9, 3, 6, 0, 6]), Some([0, 3, 6, 9]));
        let big: Vec<Integer> = [5, 1, 3, 7].into_iter().map(Integer::from).collect();
        assert!(find_4ap_in_set(&big).is_some());
    }

    #[test]
    fn find_4ap_agrees_with_subset_enumeration() {
        for mask in 0u32..1 << 12 {
            let set: Vec<u32> = (0..12).filter(|i| mask >> i & 1 == 1).collect();
            assert_eq!(find_4ap_in_set(&set).is_some(), has_4ap_mask(mask, 12), "{set:?}");
        }
    }

    #[test]
    fn bound_examples() {
        assert_eq!(fermat_upper_bound(4), 3);
        assert_eq!(fermat_upper_bound(1), 1);
        assert_eq!(fermat_upper_bound(99), 75);
    }

    #[test]
    fn fermat_scan_small() {
        let r = fermat_scan(10).unwrap();
        assert!(r.three_aps.iter().any(|t| t.roots == [1, 5, 7] && t.difference == 24));
        assert!(r.four_ap_found.is_none());
        let r = fermat_scan(20).unwrap();
        assert!(r.three_aps.iter().any(|t| t.roots == [7, 13, 17] && t.difference == 120));
        assert!(fermat_scan(1).is_err());
        assert!(fermat_scan(FERMAT_SCAN_MAX_BOUND + 1).is_err());
    }

    #[test]
    fn fermat_scan_census_matches_brute_force() {
        let bound = 150u64;
        let mut brute = 0;
        for b in 2..=bound {
            for a in 1..b {
                let c2 = 2 * b * b - a * a;
                let c = (c2 as f64).sqrt().round() as u64;
                if c * c == c2 {
                    brute += 1;
                }
            }
        }
        assert_eq!(fermat_scan(bound).unwrap().three_ap_census, brute);
    }

    #[test]
    fn fermat_scan_monotone_census() {
        let mut last = 0;
        for b in [2u64, 10, 40, 80, 160] {
            let r = fermat_scan(b).unwrap();
            assert!(r.three_ap_census >= last);
            assert!(r.four_ap_found.is_none());
            last = r.three_ap_census;
        }
    }

    #[test]
    fn no4ap_examples() {
        assert_eq!(no4ap_max(4).unwrap().max_size, 3);
        assert_eq!(no4ap_max(5).unwrap().max_size, 4);
        assert_eq!(no4ap_max(1).unwrap().max_size, 1);
        assert!(no4ap_max(0).is_err());
        assert!(no4ap_max(NO4AP_MAX_N + 1).is_err());
    }

    #[test]
    fn no4ap_matches_subset_oracle() {
        for n in 1..=18u32 {
            let got = no4ap_max(n as u64).unwrap();
            assert_eq!(got.max_size, brute_no4ap(n), "n = {n}");
            assert!(got.optimal);
            assert_eq!(got.witness.len() as u64, got.max_size);
            assert!(got.witness.iter().all(|&x| x < n as u64));
            assert!(find_4ap_in_set(&got.witness).is_none());
        }
    }

    #[test]
    fn no4ap_independent_of_thread_count() {
        let run = |threads| {
            rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| no4ap_max(36).unwrap())
        };
        let one = run(1);
        assert_eq!(one, run(8));
        assert_eq!(no4ap_max_with_budget(34, 200).unwrap(), rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| no4ap_max_with_budget(34, 200).unwrap()));
    }

    #[test]
    fn no4ap_budget_exhaustion() {
        let r = no4ap_max_with_budget(30, 50).unwrap();
        assert!(!r.optimal);
        assert!(find_4ap_in_set(&r.witness).is_none());
        assert_eq!(r.witness.len() as u64, r.max_size);
    }

    #[test]
    fn qn_examples() {
        let r = qn_lower_search(4, 30, 100).unwrap();
        assert_eq!(r.best_count, 3);
        assert_eq!(r.witness.step, 24);
        assert_eq!(r.witness.start, Integer::from(1));
        assert_eq!(r.witness.positions.positions, vec![0, 1, 2]);
        assert_eq!(qn_lower_search(2, 5, 10).unwrap().best_count, 2);
        assert!(qn_lower_search(1, 5, 10).is_err());
    }
}
