//! Perfect squares inside an arithmetic progression.
//!
//! Two engines share one output contract. The naive engine tests every term; the fast
//! engine solves `x^2 = first (mod step)` once and only visits `x` in admissible residue
//! classes. The naive engine is the oracle for the fast one.

use num_integer::Integer as _;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{is_square, is_square_i128, isqrt, Integer};
use crate::congruence::solve_square_congruence_budgeted;
use crate::error::{domain, Result};

/// Rho iterations allowed when factoring a step for the fast engine.
pub const FAST_ENGINE_FACTOR_BUDGET: u64 = 1 << 20;

/// `first, first + step, ..., first + (length - 1) * step`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Ap {
    #[serde(with = "crate::serde_int")]
    pub first: Integer,
    #[serde(with = "crate::serde_int")]
    pub step: Integer,
    pub length: u64,
}

impl Ap {
    pub fn new(first: Integer, step: Integer, length: u64) -> Result<Self> {
        if step < Integer::one() {
            return Err(domain(format!("progression step must be >= 1, got {step}")));
        }
        if length == 0 {
            return Err(domain("progression length must be >= 1"));
        }
        Ok(Ap { first, step, length })
    }

    pub fn term(&self, index: u64) -> Integer {
        &self.first + &self.step * index
    }

    pub fn last(&self) -> Integer {
        self.term(self.length - 1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SquarePositions {
    pub ap: Ap,
    /// Ascending indices `n` with `first + n * step` a perfect square.
    pub positions: Vec<u64>,
}

impl SquarePositions {
    pub fn count(&self) -> usize {
        self.positions.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Naive,
    Fast,
}

pub fn square_positions(ap: &Ap, engine: Engine) -> SquarePositions {
    match engine {
        Engine::Naive => square_positions_naive(ap),
        Engine::Fast => square_positions_fast(ap),
    }
}

pub fn square_positions_naive(ap: &Ap) -> SquarePositions {
    let small = (ap.first.to_i64(), ap.step.to_i64(), ap.last().to_i64());
    let positions: Vec<u64> = match small {
        (Some(first), Some(step), Some(_)) => {
            let (first, step) = (first as i128, step as i128);
            (0..ap.length)
                .into_par_iter()
                .filter(|&n| is_square_i128(first + step * n as i128))
                .collect()
        }
        _ => (0..ap.length).into_par_iter().filter(|&n| is_square(&ap.term(n))).collect(),
    };
    SquarePositions { ap: ap.clone(), positions }
}

/// Same contract as [`square_positions_naive`]. Falls back to it when `step == 1` or
/// when the step cannot be factored within [`FAST_ENGINE_FACTOR_BUDGET`].
pub fn square_positions_fast(ap: &Ap) -> SquarePositions {
    if ap.step.is_one() {
        return square_positions_naive(ap);
    }
    let last = ap.last();
    if last.is_negative() {
        return SquarePositions { ap: ap.clone(), positions: Vec::new() };
    }
    let residue = ap.first.mod_floor(&ap.step);
    let classes = match solve_square_congruence_budgeted(&residue, &ap.step, FAST_ENGINE_FACTOR_BUDGET) {
        Ok(Some(c)) => c,
        _ => return square_positions_naive(ap),
    };
    if classes.is_empty() {
        return SquarePositions { ap: ap.clone(), positions: Vec::new() };
    }

    let low = if ap.first.is_negative() { Integer::zero() } else { ap.first.clone() };
    let x_lo = ceil_sqrt(&low);
    let x_hi = isqrt(&last).expect("last >= 0");
    if x_lo > x_hi {
        return SquarePositions { ap: ap.clone(), positions: Vec::new() };
    }

    // Block b covers x in [b * step, (b + 1) * step); inside a block the admissible x are
    // b * step + root for the sorted roots, so x (and hence x^2) comes out increasing.
    let step = &ap.step;
    let first_block = x_lo.div_floor(step);
    let last_block = x_hi.div_floor(step);
    let blocks = (&last_block - &first_block + 1u32).to_u64().expect("block count fits in u64");
    let per_block = |offset: u64| -> Vec<u64> {
        let base = (&first_block + offset) * step;
        classes
            .roots
            .iter()
            .map(|r| &base + r)
            .filter(|x| *x >= x_lo && *x <= x_hi)
            .map(|x| {
                let (q, rem) = (&x * &x - &ap.first).div_rem(step);
                debug_assert!(rem.is_zero());
                q.to_u64().expect("position below length")
            })
            .collect()
    };
    let positions: Vec<u64> = if blocks > 1024 {
        (0..blocks).into_par_iter().flat_map_iter(per_block).collect()
    } else {
        (0..blocks).flat_map(per_block).collect()
    };
    SquarePositions { ap: ap.clone(), positions }
}

fn ceil_sqrt(n: &Integer) -> Integer {
    let r = isqrt(n).expect("non-negative");
    if &r * &r == *n {
        r
    } else {
        r + 1u32
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CensusRow {
    pub n: u64,
    pub count: u64,
    /// `count - sqrt(8n/3)`, in floating point; informational only.
    pub deviation: f64,
    /// Exact form of `|count - sqrt(8n/3)| <= 1`: `3(count-1)^2 <= 8n <= 3(count+1)^2`.
    pub within_one: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErdosRudinCensus {
    pub n_max: u64,
    pub max_abs_deviation: f64,
    pub max_abs_deviation_at: u64,
    /// Values of `n` where the exact `within_one` predicate fails.
    pub violations: Vec<u64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub rows: Vec<CensusRow>,
}

/// `3(count-1)^2 <= 8n <= 3(count+1)^2`, the squared form of `|count - sqrt(8n/3)| <= 1`.
pub fn within_one_of_root(count: u64, n: u64) -> bool {
    let eight_n = 8 * n as u128;
    let below = count.saturating_sub(1) as u128;
    let above = count as u128 + 1;
    3 * below * below <= eight_n && eight_n <= 3 * above * above
}

/// Counts the squares in `{24i + 1 : 0 <= i < n}` for every `n <= n_max`.
///
/// `x^2 = 1 (mod 24)` exactly when `gcd(x, 6) = 1`, so the squares are visited in order
/// by walking `x = 1, 5, 7, 11, ...`.
pub fn erdos_rudin_census(n_max: u64, keep_rows: bool) -> Result<ErdosRudinCensus> {
    if n_max == 0 {
        return Err(domain("n_max must be >= 1"));
    }
    let mut rows = Vec::new();
    let mut violations = Vec::new();
    let mut max_abs = 0f64;
    let mut max_at = 1;
    let mut x: u64 = 1;
    let mut count: u64 = 0;
    let next_x = |x: u64| if x % 6 == 1 { x + 4 } else { x + 2 };
    for n in 1..=n_max {
        // the index of x^2 in the progression is (x^2 - 1) / 24
        while (x as u128 * x as u128 - 1) / 24 <= (n - 1) as u128 {
            count += 1;
            x = next_x(x);
        }
        let deviation = count as f64 - (8.0 * n as f64 / 3.0).sqrt();
        let within_one = within_one_of_root(count, n);
        if !within_one {
            violations.push(n);
        }
        if deviation.abs() > max_abs {
            max_abs = deviation.abs();
            max_at = n;
        }
        if keep_rows {
            rows.push(CensusRow { n, count, deviation, within_one });
        }
    }
    Ok(ErdosRudinCensus { n_max, max_abs_deviation: max_abs, max_abs_deviation_at: max_at, violations, rows })
}
