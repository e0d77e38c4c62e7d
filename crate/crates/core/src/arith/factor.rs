//! Trial division followed by Brent's variant of Pollard's rho.
//!
//! The rho iteration uses a fixed sequence of polynomial constants (c = 1, 2, 3, ...)
//! and starting points, so factorizations are reproducible across runs and thread
//! counts.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer as _;
use num_traits::{One, ToPrimitive, Zero};

use super::primes::{is_prime, is_prime_u64, mul_mod, prime_table, sieve, DEFAULT_TRIAL_BOUND};
use super::Factorization;
use crate::error::{domain, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FactorConfig {
    /// Largest trial divisor.
    pub trial_bound: u64,
    /// Cap on rho iterations per split; `None` runs until a factor is found.
    pub rho_budget: Option<u64>,
}

impl Default for FactorConfig {
    fn default() -> Self {
        FactorConfig { trial_bound: DEFAULT_TRIAL_BOUND, rho_budget: None }
    }
}

const SEED_START: u64 = 2;
const BRENT_BATCH: u64 = 128;
const MIN_TRIAL_BOUND: u64 = 100;

fn rho_u64(n: u64, c: u64, budget: &mut Option<u64>) -> Option<u64> {
    let f = |x: u64| (mul_mod(x, x, n) + c) % n;
    let mut y = SEED_START % n;
    let mut r = 1u64;
    let mut q = 1u64;
    let mut g = 1u64;
    let mut x = y;
    let mut ys = y;
    while g == 1 {
        x = y;
        for _ in 0..r {
            y = f(y);
        }
        let mut k = 0;
        while k < r && g == 1 {
            ys = y;
            let steps = BRENT_BATCH.min(r - k);
            if let Some(b) = budget {
                if *b < steps {
                    return None;
                }
                *b -= steps;
            }
            for _ in 0..steps {
                y = f(y);
                q = mul_mod(q, x.abs_diff(y), n);
            }
            g = num_integer::gcd(q, n);
            k += steps;
        }
        r *= 2;
    }
    if g == n {
        // Batch overshot; retrace one step at a time.
        loop {
            ys = f(ys);
            g = num_integer::gcd(x.abs_diff(ys), n);
            if g > 1 {
                break;
            }
        }
    }
    (g != n).then_some(g)
}

fn rho_big(n: &BigUint, c: u64, budget: &mut Option<u64>) -> Option<BigUint> {
    let c = BigUint::from(c);
    let f = |x: &BigUint| (x * x + &c) % n;
    let mut y = BigUint::from(SEED_START) % n;
    let mut r = 1u64;
    let mut q = BigUint::one();
    let mut g = BigUint::one();
    let mut x = y.clone();
    let mut ys = y.clone();
    let diff = |a: &BigUint, b: &BigUint| if a > b { a - b } else { b - a };
    while g.is_one() {
        x = y.clone();
        for _ in 0..r {
            y = f(&y);
        }
        let mut k = 0;
        while k < r && g.is_one() {
            ys = y.clone();
            let steps = BRENT_BATCH.min(r - k);
            if let Some(b) = budget {
                if *b < steps {
                    return None;
                }
                *b -= steps;
            }
            for _ in 0..steps {
                y = f(&y);
                q = (&q * diff(&x, &y)) % n;
            }
            g = q.gcd(n);
            k += steps;
        }
        r *= 2;
    }
    if &g == n {
        loop {
            ys = f(&ys);
            g = diff(&x, &ys).gcd(n);
            if !g.is_one() {
                break;
            }
        }
    }
    (&g != n).then_some(g)
}

/// Finds a nontrivial divisor of the composite `n`, or `None` if the budget runs out.
fn split(n: &BigUint, budget: &mut Option<u64>) -> Option<BigUint> {
    for c in 1u64.. {
        if let Some(small) = n.to_u64() {
            if let Some(d) = rho_u64(small, c, budget) {
                return Some(BigUint::from(d));
            }
        } else if let Some(d) = rho_big(n, c, budget) {
            return Some(d);
        }
        if budget.is_some_and(|b| b == 0) {
            return None;
        }
    }
    unreachable!()
}

fn push_prime_factors(n: BigUint, budget: &mut Option<u64>, out: &mut Vec<BigUint>) -> bool {
    if n.is_one() {
        return true;
    }
    let as_int = BigInt::from_biguint(Sign::Plus, n.clone());
    let prime = match n.to_u64() {
        Some(small) => is_prime_u64(small),
        None => is_prime(&as_int),
    };
    if prime {
        out.push(n);
        return true;
    }
    // Perfect powers of a prime send rho into trivial cycles; peel square roots first.
    let root = n.sqrt();
    if &root * &root == n {
        return push_prime_factors(root.clone(), budget, out) && push_prime_factors(root, budget, out);
    }
    let Some(d) = split(&n, budget) else { return false };
    let other = &n / &d;
    push_prime_factors(d, budget, out) && push_prime_factors(other, budget, out)
}

pub fn factorize_with(n: &BigInt, config: FactorConfig) -> Result<Option<Factorization>> {
    if n.sign() != Sign::Plus {
        return Err(domain(format!("factorize requires n >= 1, got {n}")));
    }
    // rho cycles badly on inputs with tiny factors; always strip primes below 100
    let trial_bound = config.trial_bound.max(MIN_TRIAL_BOUND);
    let owned;
    let table: &[u64] = if trial_bound == DEFAULT_TRIAL_BOUND {
        prime_table()
    } else {
        owned = sieve(trial_bound);
        &owned
    };

    let mut pairs: Vec<(BigInt, u64)> = Vec::new();
    let mut rest = n.magnitude().clone();
    if let Some(mut small) = rest.to_u64() {
        for &p in table {
            if p.saturating_mul(p) > small {
                break;
            }
            if small % p == 0 {
                let mut e = 0;
                while small % p == 0 {
                    small /= p;
                    e += 1;
                }
                pairs.push((BigInt::from(p), e));
            }
        }
        rest = BigUint::from(small);
    } else {
        for &p in table {
            let pb = BigUint::from(p);
            if &pb * &pb > rest {
                break;
            }
            if (&rest % p).is_zero() {
                let mut e = 0;
                while (&rest % p).is_zero() {
                    rest /= p;
                    e += 1;
                }
                pairs.push((BigInt::from(p), e));
            }
        }
    }

    if !rest.is_one() {
        let mut budget = config.rho_budget;
        let mut big_factors = Vec::new();
        if !push_prime_factors(rest, &mut budget, &mut big_factors) {
            return Ok(None);
        }
        big_factors.sort();
        for f in big_factors {
            let f = BigInt::from_biguint(Sign::Plus, f);
            match pairs.last_mut() {
                Some((p, e)) if *p == f => *e += 1,
                _ => pairs.push((f, 1)),
            }
        }
    }
    pairs.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(Some(Factorization { value: n.clone(), pairs }))
}
