//! Segmented sieve computing `‖n‖∞` (and `‖n‖₁`) with primality for every
//! integer of a range.
//!
//! For each base prime `p ≤ √(hi−1)` and each power `p^e < hi`, every
//! multiple of `p^e` in the segment gets one more factor `p` divided out of
//! its residual and its exponent of `p` raised to `e`. A residual left above
//! 1 is a single prime factor larger than the base limit.

use std::sync::Arc;

use crate::error::{Error, Result};

/// Default number of integers per segment.
pub const DEFAULT_SEGMENT_SIZE: u64 = 1 << 22;

/// Largest admissible exclusive segment end.
pub const MAX_HI: u64 = 1 << 63;

pub(crate) fn isqrt(n: u64) -> u64 {
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as u64;
    while x.checked_mul(x).map_or(true, |s| s > n) {
        x -= 1;
    }
    while (x + 1).checked_mul(x + 1).is_some_and(|s| s <= n) {
        x += 1;
    }
    x
}

/// All primes `≤ limit`, from an odd-only bit-packed sieve of Eratosthenes.
pub fn base_primes(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    // bit i stands for the odd number 2i + 1
    let n_odd = (limit as usize).div_ceil(2);
    let mut composite = vec![0u64; n_odd.div_ceil(64)];
    let mut i = 1usize;
    while (2 * i + 1) * (2 * i + 1) <= limit as usize {
        if composite[i / 64] >> (i % 64) & 1 == 0 {
            let p = 2 * i + 1;
            let mut j = p * p / 2;
            while j < n_odd {
                composite[j / 64] |= 1 << (j % 64);
                j += p;
            }
        }
        i += 1;
    }
    let mut primes = vec![2];
    primes.extend(
        (1..n_odd)
            .filter(|&i| composite[i / 64] >> (i % 64) & 1 == 0)
            .map(|i| (2 * i + 1) as u64),
    );
    primes
}

/// Packed per-integer primality flags.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimeFlags {
    words: Vec<u64>,
    len: usize,
}

impl PrimeFlags {
    fn new(len: usize) -> Self {
        PrimeFlags {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    #[inline]
    fn set(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "flag index {i} out of range {}", self.len);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Offsets of the set flags, ascending.
    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let bit = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + bit)
            })
        })
    }
}

/// `‖n‖∞` and primality for every `n` in `[lo, hi)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormSegment {
    lo: u64,
    hi: u64,
    norms: Vec<u8>,
    prime_flags: PrimeFlags,
}

impl NormSegment {
    pub fn lo(&self) -> u64 {
        self.lo
    }

    pub fn hi(&self) -> u64 {
        self.hi
    }

    pub fn len(&self) -> usize {
        self.norms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.norms.is_empty()
    }

    pub fn norms(&self) -> &[u8] {
        &self.norms
    }

    pub fn prime_flags(&self) -> &PrimeFlags {
        &self.prime_flags
    }

    pub fn norm_of(&self, n: u64) -> Option<u8> {
        (self.lo..self.hi)
            .contains(&n)
            .then(|| self.norms[(n - self.lo) as usize])
    }

    pub fn is_prime(&self, n: u64) -> Option<bool> {
        (self.lo..self.hi)
            .contains(&n)
            .then(|| self.prime_flags.get((n - self.lo) as usize))
    }

    /// The primes of the segment, ascending.
    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.prime_flags.iter_ones().map(move |i| self.lo + i as u64)
    }

    /// Builds a segment from raw parts, for synthetic inputs and tests.
    pub fn from_parts(lo: u64, norms: Vec<u8>, primes: &[bool]) -> Result<Self> {
        if norms.len() != primes.len() {
            return Err(Error::domain("norms and prime flags differ in length"));
        }
        let mut prime_flags = PrimeFlags::new(norms.len());
        for (i, &is_p) in primes.iter().enumerate() {
            if is_p {
                prime_flags.set(i);
            }
        }
        Ok(NormSegment {
            lo,
            hi: lo + norms.len() as u64,
            norms,
            prime_flags,
        })
    }
}

/// Sieve sized for segments up to a fixed bound, sharing one immutable base
/// prime list across all segments and threads.
#[derive(Clone, Debug)]
pub struct NormSieve {
    base: Arc<[u64]>,
    max_hi: u64,
}

enum Accumulate {
    Max,
    Sum,
}

impl NormSieve {
    /// A sieve able to process any segment with `hi ≤ max_hi`.
    pub fn new(max_hi: u64) -> Result<Self> {
        if max_hi > MAX_HI {
            return Err(Error::domain(format!("segment end {max_hi} exceeds 2^63")));
        }
        let limit = isqrt(max_hi.saturating_sub(1));
        Ok(NormSieve {
            base: base_primes(limit).into(),
            max_hi,
        })
    }

    pub fn max_hi(&self) -> u64 {
        self.max_hi
    }

    fn check_range(&self, lo: u64, hi: u64) -> Result<()> {
        if lo == 0 {
            return Err(Error::domain("segments start at 1"));
        }
        if lo >= hi {
            return Err(Error::domain(format!("empty segment [{lo}, {hi})")));
        }
        if hi > self.max_hi {
            return Err(Error::domain(format!(
                "segment end {hi} beyond sieve bound {}",
                self.max_hi
            )));
        }
        Ok(())
    }

    /// Divides every base-prime power out of `[lo, hi)`, recording per-integer
    /// exponents in `acc`. Returns the residual cofactors.
    fn sieve_core(&self, lo: u64, hi: u64, acc: &mut [u8], mode: Accumulate) -> Vec<u64> {
        let len = (hi - lo) as usize;
        let mut rem: Vec<u64> = (lo..hi).collect();
        let top = hi - 1;
        for &p in self.base.iter() {
            if p * p > top {
                break;
            }
            let mut pk = p;
            let mut e = 1u8;
            loop {
                let first = lo.div_ceil(pk) * pk;
                let mut i = (first - lo) as usize;
                while i < len {
                    rem[i] /= p;
                    match mode {
                        Accumulate::Max => acc[i] = acc[i].max(e),
                        Accumulate::Sum => acc[i] += 1,
                    }
                    i += pk as usize;
                }
                match pk.checked_mul(p) {
                    Some(next) if next <= top => {
                        pk = next;
                        e += 1;
                    }
                    _ => break,
                }
            }
        }
        rem
    }

    /// `‖n‖∞` and primality over `[lo, hi)`.
    pub fn segment(&self, lo: u64, hi: u64) -> Result<NormSegment> {
        self.check_range(lo, hi)?;
        let len = (hi - lo) as usize;
        let mut norms = vec![0u8; len];
        let rem = self.sieve_core(lo, hi, &mut norms, Accumulate::Max);
        let mut prime_flags = PrimeFlags::new(len);
        let last_base = self.base.last().copied().unwrap_or(0);
        for (i, (&r, norm)) in rem.iter().zip(norms.iter_mut()).enumerate() {
            let n = lo + i as u64;
            if r > 1 {
                *norm = (*norm).max(1);
            }
            // base primes divide themselves out, so they need the list lookup
            let prime =
                n > 1 && (r == n || (n <= last_base && self.base.binary_search(&n).is_ok()));
            if prime {
                prime_flags.set(i);
            }
        }
        Ok(NormSegment {
            lo,
            hi,
            norms,
            prime_flags,
        })
    }

    /// `‖n‖₁ = Ω(n)` over `[lo, hi)`.
    pub fn norm_one_segment(&self, lo: u64, hi: u64) -> Result<Vec<u8>> {
        self.check_range(lo, hi)?;
        let mut counts = vec![0u8; (hi - lo) as usize];
        let rem = self.sieve_core(lo, hi, &mut counts, Accumulate::Sum);
        for (c, &r) in counts.iter_mut().zip(&rem) {
            if r > 1 {
                *c += 1;
            }
        }
        Ok(counts)
    }
}

/// `‖n‖∞` and primality for every `n ∈ [lo, hi)`.
pub fn sieve_norms(lo: u64, hi: u64) -> Result<NormSegment> {
    if lo >= hi {
        return Err(Error::domain(format!("empty segment [{lo}, {hi})")));
    }
    NormSieve::new(hi)?.segment(lo, hi)
}
