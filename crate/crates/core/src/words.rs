//! Words over the norm alphabet: the forbidden families `F_n`, scanning for
//! them, and locating a word in the norm sequence through the Chinese
//! remainder theorem.

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::signature::{factor_signature_wide, is_prime, Budget};

/// A non-empty word of positive letters.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    letters: Vec<u32>,
}

impl Word {
    pub fn new(letters: Vec<u32>) -> Result<Self> {
        if letters.is_empty() {
            return Err(Error::domain("words are non-empty"));
        }
        if letters.contains(&0) {
            return Err(Error::domain("letters start at 1"));
        }
        Ok(Word { letters })
    }

    pub fn letters(&self) -> &[u32] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

impl FromStr for Word {
    type Err = Error;

    /// Accepts `1,2,2,1` or, for single-digit letters, `1221`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let letters = if s.contains(',') {
            s.split(',')
                .map(|t| {
                    t.trim()
                        .parse::<u32>()
                        .map_err(|e| Error::domain(format!("bad letter {t:?}: {e}")))
                })
                .collect::<Result<Vec<_>>>()?
        } else {
            s.chars()
                .map(|c| {
                    c.to_digit(10)
                        .ok_or_else(|| Error::domain(format!("bad letter {c:?}")))
                })
                .collect::<Result<Vec<_>>>()?
        };
        Word::new(letters)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let compact = self.letters.iter().all(|&l| l < 10);
        for (i, l) in self.letters.iter().enumerate() {
            if i > 0 && !compact {
                f.write_str(",")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// `F_n`: every word of length `2^{n+1}` with all letters at most `n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct ForbiddenFamily {
    pub n: u32,
}

impl ForbiddenFamily {
    pub fn new(n: u32) -> Result<Self> {
        if n == 0 || n > 62 {
            return Err(Error::domain(format!("family index {n} outside 1..=62")));
        }
        Ok(ForbiddenFamily { n })
    }

    pub fn window(self) -> usize {
        1usize << (self.n + 1)
    }

    pub fn contains(self, w: &Word) -> bool {
        w.len() == self.window() && w.letters().iter().all(|&l| l <= self.n)
    }
}

/// Whether `w` itself belongs to some `F_n`.
pub fn is_forbidden(w: &Word) -> bool {
    let len = w.len();
    if !len.is_power_of_two() || len < 4 {
        return false;
    }
    let n = len.trailing_zeros() - 1;
    w.letters().iter().all(|&l| l <= n)
}

/// Whether some contiguous subword of `w` is forbidden.
pub fn contains_forbidden(w: &Word) -> bool {
    let letters = w.letters();
    (1..)
        .take_while(|&n| (1usize << (n + 1)) <= letters.len())
        .any(|n| longest_run_at_most(letters, n) >= 1usize << (n + 1))
}

fn longest_run_at_most(letters: &[u32], n: u32) -> usize {
    let (mut best, mut run) = (0, 0);
    for &l in letters {
        run = if l <= n { run + 1 } else { 0 };
        best = best.max(run);
    }
    best
}

/// A forbidden window found in a sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub family: u32,
    /// Position of the window's first letter, offset by the sequence origin.
    pub start: u64,
}

/// Every window of a family `F_n`, `n ≤ n_max`, inside `letters`. `origin` is
/// the position of `letters[0]`.
pub fn scan_letters(letters: &[u8], origin: u64, n_max: u32) -> Vec<Violation> {
    let mut out = Vec::new();
    for n in 1..=n_max.min(62) {
        let window = 1u64 << (n + 1);
        if window > letters.len() as u64 {
            break;
        }
        let mut run = 0u64;
        for (i, &l) in letters.iter().enumerate() {
            run = if (l as u32) <= n { run + 1 } else { 0 };
            if run >= window {
                out.push(Violation {
                    family: n,
                    start: origin + i as u64 + 1 - window,
                });
            }
        }
    }
    out
}

/// Forbidden windows in the norms of a sieved segment, positioned by integer.
pub fn scan_forbidden(segment: &crate::signature::NormSegment, n_max: u32) -> Vec<Violation> {
    scan_letters(segment.norms(), segment.lo(), n_max)
}

fn check_primes(w: &Word, primes: &[u64]) -> Result<()> {
    if primes.len() != w.len() {
        return Err(Error::domain(format!(
            "{} primes given for a word of length {}",
            primes.len(),
            w.len()
        )));
    }
    for (i, &p) in primes.iter().enumerate() {
        if !is_prime(p as u128) {
            return Err(Error::domain(format!("{p} is not prime")));
        }
        if primes[..i].contains(&p) {
            return Err(Error::domain(format!("prime {p} repeated")));
        }
    }
    Ok(())
}

/// The unique `1 ≤ x ≤ M = ∏ p_i^{w_i}` with `p_i^{w_i} | x + i − 1` for
/// every `i`, together with `M`.
pub fn crt_locate(w: &Word, primes: &[u64]) -> Result<(BigUint, BigUint)> {
    check_primes(w, primes)?;
    let mut x = BigInt::zero();
    let mut m = BigInt::one();
    for (i, (&p, &e)) in primes.iter().zip(w.letters()).enumerate() {
        let mi = num_traits::pow(BigInt::from(p), e as usize);
        let ri = (-BigInt::from(i)).mod_floor(&mi);
        // x ≡ x (mod m), x ≡ ri (mod mi): x += m·((ri − x)·m⁻¹ mod mi)
        let ext = m.extended_gcd(&mi);
        debug_assert!(ext.gcd.is_one());
        let t = ((&ri - &x) * ext.x).mod_floor(&mi);
        x += &m * t;
        m *= mi;
        x = x.mod_floor(&m);
    }
    if x.is_zero() {
        x = m.clone();
    }
    Ok((
        x.to_biguint().expect("non-negative"),
        m.to_biguint().expect("positive"),
    ))
}

/// Outcome of [`search_word`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WordHit {
    pub location: BigUint,
    pub k: u64,
}

pub const DEFAULT_K_MAX: u64 = 1_000_000;

/// Smallest `k ≤ k_max` such that `‖x + kM + i − 1‖∞ = w_i` for every `i`.
/// Each candidate factorization gets `per_candidate` of wall-clock time.
pub fn search_word(
    w: &Word,
    primes: &[u64],
    k_max: u64,
    per_candidate: Option<Duration>,
) -> Result<Option<WordHit>> {
    let (x, m) = crt_locate(w, primes)?;
    let x = x
        .to_u128()
        .ok_or_else(|| Error::Resource("CRT solution exceeds 128 bits".into()))?;
    let m = m
        .to_u128()
        .ok_or_else(|| Error::Resource("CRT modulus exceeds 128 bits".into()))?;
    m.checked_mul(k_max as u128)
        .and_then(|v| v.checked_add(x))
        .and_then(|v| v.checked_add(w.len() as u128))
        .ok_or_else(|| Error::Resource("search range exceeds 128 bits".into()))?;
    let verdict = (0..=k_max)
        .into_par_iter()
        .map(|k| {
            let budget = per_candidate.map_or_else(Budget::unlimited, Budget::within);
            (k, matches_at(w, primes, x + k as u128 * m, &budget))
        })
        .find_first(|(_, r)| !matches!(r, Ok(false)));
    match verdict {
        None => Ok(None),
        Some((_, Err(e))) => Err(e),
        Some((k, Ok(_))) => Ok(Some(WordHit {
            location: BigUint::from(x + k as u128 * m),
            k,
        })),
    }
}

/// Whether the integers `start, start + 1, …` have norms exactly `w`.
pub fn matches_at(w: &Word, primes: &[u64], start: u128, budget: &Budget) -> Result<bool> {
    // cheap rejections first: the chosen prime's exponent and small-prime powers
    for (i, (&p, &e)) in primes.iter().zip(w.letters()).enumerate() {
        let n = start + i as u128;
        let pe = (p as u128).pow(e);
        if (n / pe) % p as u128 == 0 {
            return Ok(false);
        }
        for q in [2u128, 3, 5, 7, 11, 13] {
            if q.checked_pow(e + 1).is_some_and(|qe| n % qe == 0) {
                return Ok(false);
            }
        }
    }
    for (i, &e) in w.letters().iter().enumerate() {
        let sig = factor_signature_wide(start + i as u128, budget)?;
        if sig.norm_inf() != e {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Norms of `start, start + 1, …, start + len − 1` by full factorization.
pub fn norms_at(start: u128, len: usize, budget: &Budget) -> Result<Vec<u32>> {
    (0..len)
        .map(|i| factor_signature_wide(start + i as u128, budget).map(|s| s.norm_inf()))
        .collect()
}
