//! Prime signatures and their norms.

use std::fmt;

use crate::error::{Error, Result};

pub mod factor;
pub mod sieve;

pub use factor::{factorize, is_prime, is_prime_u64, Budget};
pub use sieve::{sieve_norms, NormSegment, NormSieve, PrimeFlags, DEFAULT_SEGMENT_SIZE};

/// Exponent vector of a positive integer, stored as sorted `(prime, exponent)`
/// pairs. The integer 1 has no entries.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct PrimeSignature {
    entries: Vec<(u128, u32)>,
}

impl PrimeSignature {
    /// Signature of 1.
    pub fn one() -> Self {
        Self::default()
    }

    /// Validates strictly increasing primes and positive exponents.
    pub fn from_entries(entries: Vec<(u128, u32)>) -> Result<Self> {
        for w in entries.windows(2) {
            if w[0].0 >= w[1].0 {
                return Err(Error::domain("signature primes must be strictly increasing"));
            }
        }
        for &(p, e) in &entries {
            if e == 0 {
                return Err(Error::domain(format!("zero exponent for prime {p}")));
            }
            if !is_prime(p) {
                return Err(Error::domain(format!("{p} is not prime")));
            }
        }
        Ok(PrimeSignature { entries })
    }

    pub fn entries(&self) -> &[(u128, u32)] {
        &self.entries
    }

    /// The integer this signature encodes, if it fits in 128 bits.
    pub fn value(&self) -> Option<u128> {
        self.entries.iter().try_fold(1u128, |acc, &(p, e)| {
            (0..e).try_fold(acc, |a, _| a.checked_mul(p))
        })
    }

    /// `‖N‖∞`: the largest exponent, 0 for N = 1.
    pub fn norm_inf(&self) -> u32 {
        self.entries.iter().map(|&(_, e)| e).max().unwrap_or(0)
    }

    /// `‖N‖₁ = Ω(N)`.
    pub fn norm_one(&self) -> u32 {
        self.entries.iter().map(|&(_, e)| e).sum()
    }

    /// ω(N), the number of distinct prime factors.
    pub fn omega(&self) -> u32 {
        self.entries.len() as u32
    }

    /// σ₀(N), the number of divisors.
    pub fn sigma0(&self) -> u64 {
        self.entries.iter().map(|&(_, e)| e as u64 + 1).product()
    }

    pub fn exponent_of(&self, p: u128) -> u32 {
        self.entries
            .binary_search_by_key(&p, |&(q, _)| q)
            .map_or(0, |i| self.entries[i].1)
    }
}

impl fmt::Display for PrimeSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (p, e)) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{p}:{e}")?;
        }
        f.write_str("}")
    }
}

/// Signature of a 64-bit integer.
pub fn factor_signature(n: u64) -> Result<PrimeSignature> {
    factor_signature_wide(n as u128, &Budget::unlimited())
}

/// Signature of a 128-bit integer; the budget bounds Pollard-rho work.
pub fn factor_signature_wide(n: u128, budget: &Budget) -> Result<PrimeSignature> {
    if n == 0 {
        return Err(Error::domain("0 has no prime signature"));
    }
    Ok(PrimeSignature {
        entries: factorize(n, budget)?,
    })
}

/// Chebyshev distance between two points of the prime grid.
pub fn chebyshev_distance(a: &PrimeSignature, b: &PrimeSignature) -> u32 {
    let (x, y) = (a.entries(), b.entries());
    let (mut i, mut j, mut d) = (0, 0, 0u32);
    while i < x.len() || j < y.len() {
        let diff = match (x.get(i), y.get(j)) {
            (Some(&(p, e)), Some(&(q, f))) if p == q => {
                i += 1;
                j += 1;
                e.abs_diff(f)
            }
            (Some(&(p, e)), Some(&(q, _))) if p < q => {
                i += 1;
                e
            }
            (Some(&(_, e)), None) => {
                i += 1;
                e
            }
            (_, Some(&(_, f))) => {
                j += 1;
                f
            }
            (None, None) => unreachable!(),
        };
        d = d.max(diff);
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig(n: u64) -> PrimeSignature {
        factor_signature(n).unwrap()
    }

    #[test]
    fn small_signatures() {
        assert!(sig(1).entries().is_empty());
        assert_eq!(sig(12).entries(), &[(2, 2), (3, 1)]);
        assert_eq!(sig(12).to_string(), "{2:2, 3:1}");
        assert!(matches!(factor_signature(0), Err(Error::Domain(_))));
    }

    #[test]
    fn norms() {
        assert_eq!(sig(1).norm_inf(), 0);
        assert_eq!(sig(8).norm_inf(), 3);
        assert_eq!(sig(180).norm_inf(), 2);
        let s = sig(12);
        assert_eq!((s.norm_one(), s.omega(), s.sigma0()), (3, 2, 6));
        let p = sig(101);
        assert_eq!((p.norm_one(), p.omega(), p.sigma0()), (1, 1, 2));
        assert_eq!(sig(1).norm_one(), 0);
    }

    #[test]
    fn distances() {
        assert_eq!(chebyshev_distance(&sig(360), &sig(360)), 0);
        assert_eq!(chebyshev_distance(&sig(2), &sig(3)), 1);
        assert_eq!(chebyshev_distance(&sig(8), &sig(9)), 3);
        assert_eq!(chebyshev_distance(&sig(1), &sig(32)), 5);
        assert_eq!(chebyshev_distance(&sig(12), &sig(18)), 1);
    }

    #[test]
    fn from_entries_validation() {
        assert!(PrimeSignature::from_entries(vec![(3, 1), (2, 1)]).is_err());
        assert!(PrimeSignature::from_entries(vec![(2, 0)]).is_err());
        assert!(PrimeSignature::from_entries(vec![(4, 1)]).is_err());
        let s = PrimeSignature::from_entries(vec![(2, 2), (5, 1)]).unwrap();
        assert_eq!(s.value(), Some(20));
        assert_eq!(s.exponent_of(5), 1);
        assert_eq!(s.exponent_of(3), 0);
    }

    #[test]
    fn located_word_17_30_is_divisible_by_two_to_the_17() {
        let n: u128 = 27699975238617792512;
        let s = factor_signature_wide(n, &Budget::unlimited()).unwrap();
        assert!(s.exponent_of(2) >= 17);
        assert_eq!(s.value(), Some(n));
    }
}
