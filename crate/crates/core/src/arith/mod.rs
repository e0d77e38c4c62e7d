//! Exact integer primitives: square roots, square testing, factorization, valuations
//! and squarefree kernels.
//!
//! Every routine accepts arbitrary-precision [`Integer`]s. Word-sized inputs take a
//! native fast path; anything that does not fit is handled on the big-integer path,
//! so no result ever depends on a silent wrap-around.

mod factor;
mod primes;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer as _;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

pub use factor::{factorize_with, FactorConfig};
pub use primes::{first_primes, is_prime, is_prime_u64, prime_table, sieve, DEFAULT_TRIAL_BOUND};

use crate::error::{domain, Result};

/// Exact signed integer of unbounded magnitude.
pub type Integer = BigInt;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Factorization {
    #[serde(with = "crate::serde_int")]
    pub value: Integer,
    /// `(prime, exponent)` with primes strictly increasing.
    #[serde(serialize_with = "serialize_pairs")]
    pub pairs: Vec<(Integer, u64)>,
}

fn serialize_pairs<S: serde::Serializer>(pairs: &[(Integer, u64)], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(pairs.len()))?;
    for (p, e) in pairs {
        seq.serialize_element(&(p.to_string(), e))?;
    }
    seq.end()
}

impl Factorization {
    /// Multiplies the prime powers back together.
    pub fn recompose(&self) -> Integer {
        self.pairs.iter().fold(Integer::one(), |acc, (p, e)| acc * p.pow(*e as u32))
    }
}

/// `value = kernel * root^2` with `kernel` squarefree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SquarefreeDecomposition {
    #[serde(with = "crate::serde_int")]
    pub kernel: Integer,
    #[serde(with = "crate::serde_int")]
    pub root: Integer,
}

const fn residue_mask(modulus: u64) -> u64 {
    let mut mask = 0u64;
    let mut i = 0;
    while i < modulus {
        mask |= 1 << ((i * i) % modulus);
        i += 1;
    }
    mask
}

const SQUARES_MOD_64: u64 = residue_mask(64);
const SQUARES_MOD_63: u64 = residue_mask(63);

/// Newton's iteration on a big magnitude, started above the root so the sequence
/// decreases monotonically to the floor.
fn isqrt_biguint(n: &BigUint) -> BigUint {
    if n.is_zero() {
        return BigUint::zero();
    }
    let mut x = BigUint::one() << n.bits().div_ceil(2);
    loop {
        let y = (&x + n / &x) >> 1u32;
        if y >= x {
            break;
        }
        x = y;
    }
    while &x * &x > *n {
        x -= 1u32;
    }
    while (&x + 1u32) * (&x + 1u32) <= *n {
        x += 1u32;
    }
    x
}

/// `floor(sqrt(n))`. Negative input is a domain error.
pub fn isqrt(n: &Integer) -> Result<Integer> {
    if n.is_negative() {
        return Err(domain(format!("isqrt of negative number {n}")));
    }
    if let Some(small) = n.to_u128() {
        return Ok(Integer::from(small.isqrt()));
    }
    Ok(BigInt::from_biguint(Sign::Plus, isqrt_biguint(n.magnitude())))
}

#[inline]
pub fn is_square_u64(n: u64) -> bool {
    if SQUARES_MOD_64 >> (n & 63) & 1 == 0 || SQUARES_MOD_63 >> (n % 63) & 1 == 0 {
        return false;
    }
    let r = n.isqrt();
    r * r == n
}

#[inline]
pub fn is_square_u128(n: u128) -> bool {
    if let Ok(small) = u64::try_from(n) {
        return is_square_u64(small);
    }
    if SQUARES_MOD_64 >> (n & 63) & 1 == 0 {
        return false;
    }
    let r = n.isqrt();
    r * r == n
}

#[inline]
pub fn is_square_i128(n: i128) -> bool {
    n >= 0 && is_square_u128(n as u128)
}

/// True iff `n >= 0` and `n` is a perfect square. Zero is a square.
pub fn is_square(n: &Integer) -> bool {
    match n.sign() {
        Sign::Minus => false,
        Sign::NoSign => true,
        Sign::Plus => match n.to_u128() {
            Some(small) => is_square_u128(small),
            None => {
                let low = n.iter_u64_digits().next().unwrap_or(0);
                if SQUARES_MOD_64 >> (low & 63) & 1 == 0 {
                    return false;
                }
                let r = isqrt_biguint(n.magnitude());
                &r * &r == *n.magnitude()
            }
        },
    }
}

/// Complete factorization with the default configuration (trial division to 10^6,
/// then unbounded rho).
pub fn factorize(n: &Integer) -> Result<Factorization> {
    Ok(factorize_with(n, FactorConfig::default())?.expect("unbounded rho always completes"))
}

/// Largest `e` with `p^e | n`.
pub fn valuation(n: &Integer, p: &Integer) -> Result<u64> {
    if !n.is_positive() {
        return Err(domain(format!("valuation requires n >= 1, got {n}")));
    }
    if !is_prime(p) {
        return Err(domain(format!("valuation base {p} is not prime")));
    }
    if let (Some(mut small), Some(p)) = (n.to_u64(), p.to_u64()) {
        let mut e = 0;
        while small % p == 0 {
            small /= p;
            e += 1;
        }
        return Ok(e);
    }
    let mut rest = n.clone();
    let mut e = 0;
    loop {
        let (q, r) = rest.div_rem(p);
        if !r.is_zero() {
            return Ok(e);
        }
        rest = q;
        e += 1;
    }
}

pub fn squarefree_decompose(n: &Integer) -> Result<SquarefreeDecomposition> {
    let f = factorize(n)?;
    let mut kernel = Integer::one();
    let mut root = Integer::one();
    for (p, e) in &f.pairs {
        if e % 2 == 1 {
            kernel *= p;
        }
        root *= p.pow((*e / 2) as u32);
    }
    Ok(SquarefreeDecomposition { kernel, root })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn int(v: i64) -> Integer {
        Integer::from(v)
    }

    fn pairs(f: &Factorization) -> Vec<(u64, u64)> {
        f.pairs.iter().map(|(p, e)| (p.to_u64().unwrap(), *e)).collect()
    }

    #[test]
    fn isqrt_examples() {
        assert_eq!(isqrt(&int(49)).unwrap(), int(7));
        assert_eq!(isqrt(&int(48)).unwrap(), int(6));
        assert_eq!(isqrt(&int(0)).unwrap(), int(0));
        assert!(matches!(isqrt(&int(-1)), Err(crate::Error::Domain(_))));
    }

    #[test]
    fn isqrt_big_boundaries() {
        let r = (BigInt::one() << 200u32) + 12345;
        let sq = &r * &r;
        assert_eq!(isqrt(&sq).unwrap(), r);
        assert_eq!(isqrt(&(&sq - 1)).unwrap(), &r - 1);
        assert_eq!(isqrt(&(&sq + &r * 2)).unwrap(), r);
    }

    #[test]
    fn is_square_examples() {
        assert!(is_square(&int(121)));
        assert!(!is_square(&int(-4)));
        assert!(is_square(&int(0)));
        assert!(!is_square(&int(2)));
        let big = (BigInt::one() << 300u32) + 7;
        assert!(is_square(&(&big * &big)));
        assert!(!is_square(&(&big * &big + 1)));
    }

    #[test]
    fn is_square_u64_exhaustive_small() {
        let mut next_root = 0u64;
        for n in 0..200_000u64 {
            let expect = next_root * next_root == n;
            if expect {
                next_root += 1;
            }
            assert_eq!(is_square_u64(n), expect, "{n}");
        }
        assert!(is_square_u64(u32::MAX as u64 * u32::MAX as u64));
        assert!(!is_square_u64(u64::MAX));
    }

    #[test]
    fn factorize_examples() {
        assert_eq!(pairs(&factorize(&int(12)).unwrap()), vec![(2, 2), (3, 1)]);
        assert!(factorize(&int(1)).unwrap().pairs.is_empty());
        let n = int(1024 * 3 * 49);
        assert_eq!(pairs(&factorize(&n).unwrap()), vec![(2, 10), (3, 1), (7, 2)]);
        assert!(factorize(&int(0)).is_err());
        assert!(factorize(&int(-6)).is_err());
    }

    #[test]
    fn factorize_large_semiprime() {
        let p = BigInt::from(4_294_967_311u64);
        let q = BigInt::from(4_294_967_357u64);
        let f = factorize(&(&p * &q * &p)).unwrap();
        assert_eq!(f.pairs, vec![(p, 2), (q, 1)]);
    }

    #[test]
    fn valuation_examples() {
        assert_eq!(valuation(&int(12), &int(2)).unwrap(), 2);
        assert_eq!(valuation(&int(12), &int(5)).unwrap(), 0);
        assert_eq!(valuation(&int(1), &int(2)).unwrap(), 0);
        assert!(valuation(&int(12), &int(4)).is_err());
        assert!(valuation(&int(0), &int(2)).is_err());
        let big = BigInt::from(3).pow(90) * 7;
        assert_eq!(valuation(&big, &int(3)).unwrap(), 90);
    }

    #[test]
    fn squarefree_examples() {
        let d = squarefree_decompose(&int(12)).unwrap();
        assert_eq!((d.kernel, d.root), (int(3), int(2)));
        let d = squarefree_decompose(&int(1)).unwrap();
        assert_eq!((d.kernel, d.root), (int(1), int(1)));
        let d = squarefree_decompose(&int(360)).unwrap();
        assert_eq!((d.kernel, d.root), (int(10), int(6)));
        assert!(squarefree_decompose(&int(0)).is_err());
    }

    fn big_from_limbs(limbs: [u64; 4]) -> Integer {
        BigInt::from_biguint(Sign::Plus, BigUint::from_slice(&limbs.iter().flat_map(|l| [*l as u32, (*l >> 32) as u32]).collect::<Vec<_>>()))
    }

    proptest! {
        #[test]
        fn isqrt_brackets_256_bit(limbs in any::<[u64; 4]>()) {
            let n = big_from_limbs(limbs);
            let r = isqrt(&n).unwrap();
            prop_assert!(&r * &r <= n);
            prop_assert!((&r + 1) * (&r + 1) > n);
        }

        #[test]
        fn decomposition_recomposes(n in 1u64..u64::MAX) {
            let n = Integer::from(n);
            let f = factorize(&n).unwrap();
            prop_assert_eq!(f.recompose(), n.clone());
            for w in f.pairs.windows(2) {
                prop_assert!(w[0].0 < w[1].0);
            }
            for (p, e) in &f.pairs {
                prop_assert!(is_prime(p));
                prop_assert!(*e >= 1);
            }
            let d = squarefree_decompose(&n).unwrap();
            prop_assert_eq!(&d.kernel * &d.root * &d.root, n.clone());
            prop_assert!(factorize(&d.kernel).unwrap().pairs.iter().all(|(_, e)| *e == 1));
            prop_assert_eq!(is_square(&n), d.kernel.is_one());
        }

        #[test]
        fn square_test_matches_kernel(root in 1u64..u32::MAX as u64, k in 1u64..1000) {
            let n = Integer::from(root) * Integer::from(root) * Integer::from(k);
            let d = squarefree_decompose(&n).unwrap();
            prop_assert_eq!(is_square(&n), d.kernel.is_one());
        }
    }
}
