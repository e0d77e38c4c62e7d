//! Exponent-parity colorings and monochromatic progressions.
//!
//! An integer `n` gets the color `(v_{p_1}(n) mod 2, ..., v_{p_k}(n) mod 2)` over the
//! first `k` primes. If `A, A+D, ..., A+(l-1)D` share one color, the product `R` of the
//! primes with odd exponent divides every term, hence divides `D`, and each `term / R`
//! has only even exponents at `p_1..p_k`. When all terms are also `p_k`-smooth those
//! quotients are squares, so a smooth monochromatic 4-AP would be four squares in
//! arithmetic progression. [`witness_check`] measures exactly this chain.

use num_bigint::BigInt;
use num_integer::Integer as _;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::arith::{first_primes, Integer};
use crate::error::{domain, violation, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ParityColor {
    bits: Vec<bool>,
}

impl ParityColor {
    pub fn from_bits(bits: Vec<bool>) -> Self {
        ParityColor { bits }
    }

    pub fn k(&self) -> usize {
        self.bits.len()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// Product of the primes whose exponent parity is odd.
    pub fn kernel(&self) -> Integer {
        let primes = first_primes(self.k());
        self.bits
            .iter()
            .zip(primes)
            .filter(|(bit, _)| **bit)
            .fold(Integer::one(), |acc, (_, p)| acc * p)
    }
}

impl Serialize for ParityColor {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.bits.iter().map(|b| *b as u8))
    }
}

impl std::fmt::Display for ParityColor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, b) in self.bits.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", *b as u8)?;
        }
        write!(f, ")")
    }
}

/// Strips every factor `p` from `n`, returning the exponent.
fn strip(n: &mut Integer, p: u64) -> u64 {
    let mut e = 0;
    loop {
        let (q, r) = n.div_rem(&BigInt::from(p));
        if !r.is_zero() {
            return e;
        }
        *n = q;
        e += 1;
    }
}

pub fn parity_color(n: &Integer, k: usize) -> Result<ParityColor> {
    if !n.is_positive() {
        return Err(domain(format!("parity color requires n >= 1, got {n}")));
    }
    if k == 0 {
        return Err(domain("parity color requires k >= 1"));
    }
    let mut rest = n.clone();
    let bits = first_primes(k).into_iter().map(|p| strip(&mut rest, p) % 2 == 1).collect();
    Ok(ParityColor { bits })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MonoAp {
    #[serde(with = "crate::serde_int")]
    pub first: Integer,
    #[serde(with = "crate::serde_int")]
    pub step: Integer,
    pub length: u64,
    pub color: ParityColor,
}

impl MonoAp {
    pub fn terms(&self) -> impl Iterator<Item = Integer> + '_ {
        (0..self.length).map(move |i| &self.first + &self.step * i)
    }
}

/// Packed parity colors of `1..=n_max`, `words` machine words per entry.
pub struct ColorTable {
    k: usize,
    words: usize,
    data: Vec<u64>,
}

impl ColorTable {
    /// Sieves valuation parities: every prime power `p^i <= n_max` flips bit `p` on its
    /// multiples, so the final bit is `v_p(n) mod 2`.
    pub fn build(n_max: usize, k: usize) -> Self {
        let words = k.div_ceil(64).max(1);
        let mut data = vec![0u64; (n_max + 1) * words];
        for (j, p) in first_primes(k).into_iter().enumerate() {
            let p = p as usize;
            if p > n_max {
                break;
            }
            let (word, bit) = (j / 64, 1u64 << (j % 64));
            let mut pk = p;
            while pk <= n_max {
                for m in (pk..=n_max).step_by(pk) {
                    data[m * words + word] ^= bit;
                }
                pk = match pk.checked_mul(p) {
                    Some(v) => v,
                    None => break,
                };
            }
        }
        ColorTable { k, words, data }
    }

    #[inline]
    pub fn color_words(&self, n: usize) -> &[u64] {
        &self.data[n * self.words..(n + 1) * self.words]
    }

    pub fn color(&self, n: usize) -> ParityColor {
        let w = self.color_words(n);
        ParityColor { bits: (0..self.k).map(|j| w[j / 64] >> (j % 64) & 1 == 1).collect() }
    }
}

/// Smallest `(D, A)` (step first, then start) such that `A, A+D, ..., A+(len-1)D` lie in
/// `[1, n_max]` and share a parity color over the first `k` primes.
pub fn find_mono_ap(n_max: u64, len: u64, k: usize) -> Result<Option<MonoAp>> {
    if len < 3 {
        return Err(domain(format!("progression length must be >= 3, got {len}")));
    }
    if k == 0 {
        return Err(domain("k must be >= 1"));
    }
    if n_max < len {
        return Ok(None);
    }
    let n = usize::try_from(n_max).map_err(|_| domain("n_max too large for a color table"))?;
    let table = ColorTable::build(n, k);
    Ok(scan_mono(&table, n, len as usize).map(|(a, d)| MonoAp {
        first: Integer::from(a),
        step: Integer::from(d),
        length: len,
        color: table.color(a),
    }))
}

fn scan_mono(table: &ColorTable, n: usize, len: usize) -> Option<(usize, usize)> {
    let d_max = (n - 1) / (len - 1);
    (1..=d_max).into_par_iter().find_map_first(|d| {
        let a_max = n - (len - 1) * d;
        (1..=a_max).find_map(|a| {
            let c = table.color_words(a);
            (1..len).all(|i| table.color_words(a + i * d) == c).then_some((a, d))
        })
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TermCheck {
    #[serde(with = "crate::serde_int")]
    pub term: Integer,
    /// No prime factor above `p_k`.
    pub smooth: bool,
    /// `R | term` and `term / R` has even exponents at `p_1..p_k`.
    pub parity_even_after_kernel: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WitnessReport {
    #[serde(with = "crate::serde_int")]
    pub kernel: Integer,
    pub divides_first: bool,
    pub divides_step: bool,
    pub divides_all_terms: bool,
    pub per_term: Vec<TermCheck>,
    pub all_terms_smooth: bool,
}

pub fn witness_check(m: &MonoAp, k: usize) -> Result<WitnessReport> {
    if m.color.k() != k {
        return Err(violation(format!("color has {} bits but k = {k}", m.color.k())));
    }
    if m.length < 2 || !m.first.is_positive() || !m.step.is_positive() {
        return Err(violation("monochromatic progression needs first >= 1, step >= 1, length >= 2"));
    }
    let primes = first_primes(k);
    let kernel = m.color.kernel();
    let mut per_term = Vec::with_capacity(m.length as usize);
    for term in m.terms() {
        let color = parity_color(&term, k)?;
        if color != m.color {
            return Err(violation(format!("term {term} has color {color}, expected {}", m.color)));
        }
        let mut rest = term.clone();
        let mut even_after_kernel = true;
        for (j, &p) in primes.iter().enumerate() {
            let e = strip(&mut rest, p);
            // v_p(term / R) = e - bit_j, which must be even and non-negative
            let bit = m.color.bits()[j] as u64;
            if e < bit || (e - bit) % 2 == 1 {
                even_after_kernel = false;
            }
        }
        let smooth = rest.is_one();
        per_term.push(TermCheck {
            parity_even_after_kernel: even_after_kernel && (&term % &kernel).is_zero(),
            term,
            smooth,
        });
    }
    let divides_first = (&m.first % &kernel).is_zero();
    let divides_step = (&m.step % &kernel).is_zero();
    let divides_all_terms = m.terms().all(|t| (&t % &kernel).is_zero());
    let all_terms_smooth = per_term.iter().all(|t| t.smooth);
    Ok(WitnessReport { kernel, divides_first, divides_step, divides_all_terms, per_term, all_terms_smooth })
}
