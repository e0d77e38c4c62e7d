//! All solutions of `x^2 = c (mod m)`.
//!
//! `m` is factored, each prime power is solved separately (Tonelli-Shanks plus Hensel
//! lifting for odd primes, the usual case split for powers of two, and a reduction for
//! residues sharing factors with the modulus), and the per-prime-power root sets are
//! glued together with the Chinese Remainder Theorem.

use num_bigint::BigInt;
use num_integer::Integer as _;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::arith::{factorize_with, FactorConfig, Factorization, Integer};
use crate::error::{domain, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ResidueClasses {
    #[serde(with = "crate::serde_int")]
    pub modulus: Integer,
    /// Sorted, duplicate-free roots in `[0, modulus)`.
    #[serde(with = "crate::serde_int::vec")]
    pub roots: Vec<Integer>,
}

impl ResidueClasses {
    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }
}

pub fn solve_square_congruence(c: &Integer, m: &Integer) -> Result<ResidueClasses> {
    if !m.is_positive() {
        return Err(domain(format!("modulus must be >= 1, got {m}")));
    }
    let f = factorize_with(m, FactorConfig::default())?.expect("unbounded factorization");
    Ok(solve_with_factorization(c, &f))
}

/// Same as [`solve_square_congruence`] but gives up (returns `None`) when factoring
/// the modulus exceeds `rho_budget` iterations.
pub fn solve_square_congruence_budgeted(c: &Integer, m: &Integer, rho_budget: u64) -> Result<Option<ResidueClasses>> {
    if !m.is_positive() {
        return Err(domain(format!("modulus must be >= 1, got {m}")));
    }
    let cfg = FactorConfig { rho_budget: Some(rho_budget), ..FactorConfig::default() };
    Ok(factorize_with(m, cfg)?.map(|f| solve_with_factorization(c, &f)))
}

pub(crate) fn solve_with_factorization(c: &Integer, f: &Factorization) -> ResidueClasses {
    let m = &f.value;
    let c = c.mod_floor(m);
    let mut modulus = Integer::one();
    let mut roots = vec![Integer::zero()];
    for (p, e) in &f.pairs {
        let pe = p.pow(*e as u32);
        let local = prime_power_roots(&c.mod_floor(&pe), p, *e);
        if local.is_empty() {
            return ResidueClasses { modulus: m.clone(), roots: Vec::new() };
        }
        roots = crt_product(&roots, &modulus, &local, &pe);
        modulus *= pe;
    }
    roots.sort();
    ResidueClasses { modulus: m.clone(), roots }
}

/// Combines every pair (x mod m1, y mod m2) into z mod m1*m2 (m1, m2 coprime).
fn crt_product(xs: &[Integer], m1: &Integer, ys: &[Integer], m2: &Integer) -> Vec<Integer> {
    let modulus = m1 * m2;
    // m1 * inv(m1 mod m2) = 1 (mod m2)
    let ext = m1.extended_gcd(m2);
    let inv = ext.x.mod_floor(m2);
    let mut out = Vec::with_capacity(xs.len() * ys.len());
    for x in xs {
        for y in ys {
            let t = ((y - x) * &inv).mod_floor(m2);
            out.push((x + m1 * t).mod_floor(&modulus));
        }
    }
    out
}

/// Roots of `x^2 = c (mod p^e)` with `0 <= c < p^e`, sorted.
fn prime_power_roots(c: &Integer, p: &Integer, e: u64) -> Vec<Integer> {
    let pe = p.pow(e as u32);
    if c.is_zero() {
        // x = 0 (mod p^ceil(e/2))
        let step = p.pow(e.div_ceil(2) as u32);
        let count = (&pe / &step).to_u64().expect("root count fits in memory");
        return (0..count).map(|i| &step * i).collect();
    }
    let mut v = 0u64;
    let mut unit = c.clone();
    while (&unit % p).is_zero() {
        unit /= p;
        v += 1;
    }
    if v % 2 == 1 {
        return Vec::new();
    }
    let half = v / 2;
    let k = e - v;
    let base = unit_roots(&unit, p, k);
    if half == 0 {
        let mut out = base;
        out.sort();
        return out;
    }
    // x = p^half * y with y^2 = unit (mod p^k); y matters modulo p^(e - half).
    let lift_step = p.pow(k as u32);
    let lifts = p.pow(half as u32).to_u64().expect("root count fits in memory");
    let scale = p.pow(half as u32);
    let mut out = Vec::with_capacity(base.len() * lifts as usize);
    for y0 in &base {
        for t in 0..lifts {
            out.push(((y0 + &lift_step * t) * &scale).mod_floor(&pe));
        }
    }
    out.sort();
    out.dedup();
    out
}

/// Roots of `y^2 = u (mod p^k)` for a unit `u`.
fn unit_roots(u: &Integer, p: &Integer, k: u64) -> Vec<Integer> {
    let pk = p.pow(k as u32);
    if *p == BigInt::from(2) {
        return two_adic_unit_roots(u, k);
    }
    let Some(r) = tonelli_shanks(&u.mod_floor(p), p) else {
        return Vec::new();
    };
    let r = hensel_lift(r, u, p, k);
    let neg = (&pk - &r).mod_floor(&pk);
    if neg == r {
        vec![r]
    } else {
        vec![r, neg]
    }
}

fn two_adic_unit_roots(u: &Integer, k: u64) -> Vec<Integer> {
    match k {
        1 => vec![BigInt::one()],
        2 if (u % 4u32).is_one() => vec![BigInt::from(1), BigInt::from(3)],
        2 => Vec::new(),
        _ => two_adic_unit_roots_big(u, k),
    }
}

fn two_adic_unit_roots_big(u: &Integer, k: u64) -> Vec<Integer> {
    if (u % 8u32) != BigInt::one() {
        return Vec::new();
    }
    let modulus = BigInt::one() << k;
    // r^2 = u (mod 2^i) for the current i; fix the next bit when needed.
    let mut r = BigInt::one();
    for i in 3..k {
        let next = BigInt::one() << (i + 1);
        if (&r * &r - u).mod_floor(&next) != BigInt::zero() {
            r += BigInt::one() << (i - 1);
        }
    }
    let half = BigInt::one() << (k - 1);
    let mut out: Vec<Integer> = [r.clone(), &modulus - &r, &r + &half, &modulus - &r + &half]
        .into_iter()
        .map(|x| x.mod_floor(&modulus))
        .collect();
    out.sort();
    out.dedup();
    out
}

/// Square root of `a` modulo an odd prime `p`, if one exists.
pub fn tonelli_shanks(a: &Integer, p: &Integer) -> Option<Integer> {
    let a = a.mod_floor(p);
    if a.is_zero() {
        return Some(a);
    }
    let one = BigInt::one();
    let p_minus_1: Integer = p - 1u32;
    let legendre_exp = &p_minus_1 >> 1u32;
    if a.modpow(&legendre_exp, p) != one {
        return None;
    }
    let s = p_minus_1.trailing_zeros().unwrap_or(0);
    let q = &p_minus_1 >> s;
    if s == 1 {
        return Some(a.modpow(&((p + 1) >> 2u32), p));
    }
    let mut z = BigInt::from(2);
    while z.modpow(&legendre_exp, p) != p_minus_1 {
        z += 1;
    }
    let mut m = s;
    let mut c = z.modpow(&q, p);
    let mut t = a.modpow(&q, p);
    let mut r = a.modpow(&((&q + 1) >> 1u32), p);
    while t != one {
        let mut i = 0;
        let mut t2 = t.clone();
        while t2 != one {
            t2 = (&t2 * &t2) % p;
            i += 1;
        }
        let b = c.modpow(&(BigInt::one() << (m - i - 1)), p);
        m = i;
        c = (&b * &b) % p;
        t = (&t * &c) % p;
        r = (&r * &b) % p;
    }
    Some(r)
}

/// Lifts `r^2 = u (mod p)` to `r^2 = u (mod p^k)` for odd `p` and unit `u`.
fn hensel_lift(mut r: Integer, u: &Integer, p: &Integer, k: u64) -> Integer {
    let mut modulus = p.clone();
    for _ in 1..k {
        modulus *= p;
        // r <- r - (r^2 - u) / (2r)
        let f = (&r * &r - u).mod_floor(&modulus);
        let deriv_inv = (BigInt::from(2) * &r).extended_gcd(&modulus).x;
        r = (&r - f * deriv_inv).mod_floor(&modulus);
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    fn roots(c: i64, m: i64) -> Vec<i64> {
        solve_square_congruence(&BigInt::from(c), &BigInt::from(m))
            .unwrap()
            .roots
            .iter()
            .map(|r| r.to_i64().unwrap())
            .collect()
    }

    fn brute(c: i64, m: i64) -> Vec<i64> {
        (0..m).filter(|x| (x * x - c).rem_euclid(m) == 0).collect()
    }

    #[test]
    fn examples() {
        assert_eq!(roots(1, 24), vec![1, 5, 7, 11, 13, 17, 19, 23]);
        assert_eq!(roots(0, 4), vec![0, 2]);
        assert!(roots(2, 4).is_empty());
        assert_eq!(roots(5, 1), vec![0]);
    }

    #[test]
    fn negative_residue_reduced() {
        assert_eq!(roots(-1, 5), vec![2, 3]);
        assert_eq!(roots(-1, 10), brute(-1, 10));
    }

    #[test]
    fn bad_modulus() {
        assert!(solve_square_congruence(&BigInt::from(1), &BigInt::zero()).is_err());
        assert!(solve_square_congruence(&BigInt::from(1), &BigInt::from(-3)).is_err());
    }

    #[test]
    fn high_prime_powers_match_brute_force() {
        for (p, e) in [(2i64, 12u32), (3, 7), (5, 5), (7, 4)] {
            let m = p.pow(e);
            for c in (0..m).step_by(if m > 3000 { 7 } else { 1 }) {
                assert_eq!(roots(c, m), brute(c, m), "c={c} m={m}");
            }
        }
    }

    #[test]
    fn tonelli_large_prime() {
        let p = BigInt::from(1_000_000_007u64);
        for a in [2u64, 3, 5, 10, 12345] {
            let a = BigInt::from(a);
            if let Some(r) = tonelli_shanks(&a, &p) {
                assert_eq!((&r * &r) % &p, a);
            }
        }
        // p = 1 (mod 2^k) exercises the full loop
        let p = BigInt::from(998_244_353u64); // 119 * 2^23 + 1
        let a = BigInt::from(3u64 * 3 * 17 * 17);
        let r = tonelli_shanks(&a, &p).unwrap();
        assert_eq!((&r * &r) % &p, a);
    }

    #[test]
    fn budgeted_solver_gives_up_on_hard_modulus() {
        let p = BigInt::from(1_099_511_627_791u64);
        let q = BigInt::from(1_099_511_628_401u64);
        let m = &p * &q;
        assert!(solve_square_congruence_budgeted(&BigInt::from(1), &m, 4).unwrap().is_none());
        let easy = solve_square_congruence_budgeted(&BigInt::from(1), &BigInt::from(24), 4).unwrap().unwrap();
        assert_eq!(easy.roots.len(), 8);
    }
}
