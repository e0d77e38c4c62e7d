//! Prime tables and primality testing.
//!
//! Inputs up to 2^64 use Miller-Rabin with the first twelve prime bases, which is
//! deterministic on that range. Larger inputs get the Baillie-PSW combination (strong
//! base-2 test, the remaining small bases, and a strong Lucas test with Selfridge
//! parameters); no BPSW pseudoprime is known, and the extra bases make the test
//! deterministic below 3.3 * 10^24.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer as _;
use num_traits::{One, ToPrimitive, Zero};
use once_cell::sync::Lazy;

use super::is_square;

pub const DEFAULT_TRIAL_BOUND: u64 = 1_000_000;

static DEFAULT_TABLE: Lazy<Vec<u64>> = Lazy::new(|| sieve(DEFAULT_TRIAL_BOUND));

const MR_BASES: [u64; 13] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];

/// All primes `<= limit`, ascending.
pub fn sieve(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let limit = limit as usize;
    let mut composite = vec![false; limit + 1];
    let mut out = Vec::new();
    for i in 2..=limit {
        if composite[i] {
            continue;
        }
        out.push(i as u64);
        let mut j = i * i;
        while j <= limit {
            composite[j] = true;
            j += i;
        }
    }
    out
}

/// Primes up to [`DEFAULT_TRIAL_BOUND`], computed once per process.
pub fn prime_table() -> &'static [u64] {
    &DEFAULT_TABLE
}

/// The first `k` primes (`p_1 = 2`).
pub fn first_primes(k: usize) -> Vec<u64> {
    let table = prime_table();
    if k <= table.len() {
        return table[..k].to_vec();
    }
    // p_k < k (ln k + ln ln k) for k >= 6
    let kf = k as f64;
    let mut limit = (kf * (kf.ln() + kf.ln().ln())) as u64 + 16;
    loop {
        let primes = sieve(limit);
        if primes.len() >= k {
            return primes[..k].to_vec();
        }
        limit *= 2;
    }
}

pub(crate) fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub(crate) fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

fn strong_probable_prime_u64(n: u64, base: u64) -> bool {
    let a = base % n;
    if a == 0 {
        return true;
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    let mut x = pow_mod(a, d, n);
    if x == 1 || x == n - 1 {
        return true;
    }
    for _ in 1..s {
        x = mul_mod(x, x, n);
        if x == n - 1 {
            return true;
        }
    }
    false
}

pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &MR_BASES[..12] {
        if n == p {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    if n < 41 * 41 {
        return true;
    }
    MR_BASES[..12].iter().all(|&b| strong_probable_prime_u64(n, b))
}

fn strong_probable_prime_big(n: &BigUint, base: u64) -> bool {
    let one = BigUint::one();
    let n_minus_1 = n - &one;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;
    let mut x = BigUint::from(base).modpow(&d, n);
    if x == one || x == n_minus_1 {
        return true;
    }
    for _ in 1..s {
        x = (&x * &x) % n;
        if x == n_minus_1 {
            return true;
        }
    }
    false
}

/// Jacobi symbol (a / n) for odd positive n.
fn jacobi(a: &BigInt, n: &BigUint) -> i32 {
    let n_int = BigInt::from_biguint(Sign::Plus, n.clone());
    let mut a = a.mod_floor(&n_int).to_biguint().expect("non-negative after mod_floor");
    let mut n = n.clone();
    let mut result = 1;
    let three = BigUint::from(3u32);
    let five = BigUint::from(5u32);
    let eight = BigUint::from(8u32);
    let four = BigUint::from(4u32);
    while !a.is_zero() {
        let tz = a.trailing_zeros().unwrap_or(0);
        a >>= tz;
        if tz % 2 == 1 {
            let r = &n % &eight;
            if r == three || r == five {
                result = -result;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if &a % &four == three && &n % &four == three {
            result = -result;
        }
        a %= &n;
    }
    if n.is_one() {
        result
    } else {
        0
    }
}

fn half_mod(x: BigInt, n: &BigInt) -> BigInt {
    let x = if x.is_odd() { x + n } else { x };
    (x >> 1u32).mod_floor(n)
}

/// Strong Lucas probable-prime test with Selfridge's parameter choice (P = 1).
fn strong_lucas(n: &BigUint) -> bool {
    let n_int = BigInt::from_biguint(Sign::Plus, n.clone());
    let mut d_param: i64 = 5;
    loop {
        match jacobi(&BigInt::from(d_param), n) {
            -1 => break,
            0
                if BigInt::from(d_param.abs()) != n_int => {
                    return false;
                }
            _ => {}
        }
        d_param = if d_param > 0 { -(d_param + 2) } else { -d_param + 2 };
    }
    let big_d = BigInt::from(d_param);
    let q = BigInt::from((1 - d_param) / 4);

    let delta = n + BigUint::one();
    let s = delta.trailing_zeros().unwrap_or(0);
    let d = &delta >> s;

    let mut u = BigInt::one();
    let mut v = BigInt::one();
    let mut qk = q.mod_floor(&n_int);
    let bits = d.bits();
    for i in (0..bits - 1).rev() {
        u = (&u * &v).mod_floor(&n_int);
        v = (&v * &v - (&qk << 1u32)).mod_floor(&n_int);
        qk = (&qk * &qk).mod_floor(&n_int);
        if d.bit(i) {
            let nu = half_mod(&u + &v, &n_int);
            let nv = half_mod(&big_d * &u + &v, &n_int);
            u = nu;
            v = nv;
            qk = (&qk * &q).mod_floor(&n_int);
        }
    }
    if u.is_zero() || v.is_zero() {
        return true;
    }
    for _ in 1..s {
        v = (&v * &v - (&qk << 1u32)).mod_floor(&n_int);
        if v.is_zero() {
            return true;
        }
        qk = (&qk * &qk).mod_floor(&n_int);
    }
    false
}

/// Primality check adequate for the whole desk-scale range (see module docs).
pub fn is_prime(n: &BigInt) -> bool {
    if n.sign() != Sign::Plus {
        return false;
    }
    if let Some(small) = n.to_u64() {
        return is_prime_u64(small);
    }
    let n = n.magnitude();
    for &p in &MR_BASES {
        if (n % p).is_zero() {
            return false;
        }
    }
    if !MR_BASES.iter().all(|&b| strong_probable_prime_big(n, b)) {
        return false;
    }
    // The Lucas step loops forever on perfect squares (no D with (D/n) = -1).
    if is_square(&BigInt::from_biguint(Sign::Plus, n.clone())) {
        return false;
    }
    strong_lucas(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sieve_small() {
        assert_eq!(sieve(30), vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
        assert!(sieve(1).is_empty());
    }

    #[test]
    fn first_primes_beyond_table() {
        let p = first_primes(100_000);
        assert_eq!(p.len(), 100_000);
        assert_eq!(p[99_999], 1_299_709);
        assert_eq!(first_primes(6), vec![2, 3, 5, 7, 11, 13]);
    }

    #[test]
    fn u64_matches_sieve() {
        let table = sieve(100_000);
        let mut idx = 0;
        for n in 0..=100_000u64 {
            let expected = idx < table.len() && table[idx] == n;
            if expected {
                idx += 1;
            }
            assert_eq!(is_prime_u64(n), expected, "n = {n}");
        }
    }

    #[test]
    fn strong_pseudoprimes_rejected() {
        // strong pseudoprimes to several small bases
        for n in [2047u64, 1_373_653, 25_326_001, 3_215_031_751, 3_825_123_056_546_413_051] {
            assert!(!is_prime_u64(n), "{n}");
        }
        assert!(is_prime_u64(18_446_744_073_709_551_557)); // largest 64-bit prime
    }

    #[test]
    fn big_primes_and_composites() {
        let m127 = (BigInt::one() << 127u32) - 1;
        assert!(is_prime(&m127));
        let m89 = (BigInt::one() << 89u32) - 1;
        assert!(is_prime(&m89));
        assert!(!is_prime(&(&m127 * &m89)));
        // 2^128 + 1 = 59649589127497217 * 5704689200685129054721
        let f7 = (BigInt::one() << 128u32) + 1;
        assert!(!is_prime(&f7));
        assert!(is_prime(&BigInt::from(5_704_689_200_685_129_054_721u128)));
        // square of a prime above 2^64
        let p = BigInt::from(18_446_744_073_709_551_629u128);
        assert!(is_prime(&p));
        assert!(!is_prime(&(&p * &p)));
    }

    #[test]
    fn lucas_agrees_on_u64_range() {
        // Exercise the Lucas path on odd values where it is cheap to cross-check.
        for n in (1_000_001u64..1_003_001).step_by(2) {
            let big = BigUint::from(n);
            let sq = (n as f64).sqrt() as u64;
            if sq * sq == n {
                continue;
            }
            let lucas = strong_lucas(&big) && strong_probable_prime_big(&big, 2);
            assert_eq!(lucas, is_prime_u64(n), "n = {n}");
        }
    }
}
