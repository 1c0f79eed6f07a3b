//! Integer factorization for 64-bit inputs and the handful of 128-bit
//! witnesses needed to verify word locations.
//!
//! Trial division runs up to [`TRIAL_DIVISION_LIMIT`]; whatever survives is
//! split with Brent's variant of Pollard's rho and certified with
//! Miller–Rabin. The base set {2, …, 37} is deterministic below 3.3·10²⁴,
//! which covers every `u64` and every location this crate searches; above
//! that the test is a strong-probable-prime test.

use std::sync::OnceLock;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};

pub const TRIAL_DIVISION_LIMIT: u64 = 1_000_000;

const MR_BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Wall-clock allowance for a factorization.
#[derive(Clone, Copy, Debug, Default)]
pub struct Budget {
    deadline: Option<Instant>,
}

impl Budget {
    pub fn unlimited() -> Self {
        Budget { deadline: None }
    }

    pub fn within(limit: Duration) -> Self {
        Budget {
            deadline: Some(Instant::now() + limit),
        }
    }

    pub fn check(&self) -> Result<()> {
        match self.deadline {
            Some(d) if Instant::now() > d => Err(Error::Resource(
                "factorization exceeded its wall-clock budget".into(),
            )),
            _ => Ok(()),
        }
    }
}

fn small_primes() -> &'static [u64] {
    static PRIMES: OnceLock<Vec<u64>> = OnceLock::new();
    PRIMES.get_or_init(|| super::sieve::base_primes(TRIAL_DIVISION_LIMIT))
}

#[inline]
fn add_mod(a: u128, b: u128, m: u128) -> u128 {
    // a, b < m
    if a >= m - b {
        a - (m - b)
    } else {
        a + b
    }
}

#[inline]
pub(crate) fn mul_mod(a: u128, b: u128, m: u128) -> u128 {
    if m <= u64::MAX as u128 {
        return (a * b) % m;
    }
    let (mut a, mut b) = (a % m, b % m);
    let mut acc = 0u128;
    while b > 0 {
        if b & 1 == 1 {
            acc = add_mod(acc, a, m);
        }
        a = add_mod(a, a, m);
        b >>= 1;
    }
    acc
}

pub(crate) fn pow_mod(mut base: u128, mut exp: u128, m: u128) -> u128 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u128;
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

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Miller–Rabin with the fixed base set.
pub fn is_prime(n: u128) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &MR_BASES {
        let p = p as u128;
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d & 1 == 0 {
        d >>= 1;
        s += 1;
    }
    'bases: for &a in &MR_BASES {
        let mut x = pow_mod(a as u128, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

pub fn is_prime_u64(n: u64) -> bool {
    is_prime(n as u128)
}

/// Brent's cycle-finding variant of Pollard's rho. Returns a non-trivial
/// divisor of the odd composite `n`.
fn rho(n: u128, budget: &Budget) -> Result<u128> {
    let step = |x: u128, c: u128| add_mod(mul_mod(x, x, n), c, n);
    for c in 1u128..200 {
        let mut y = 2u128 % n;
        let (mut r, mut q, mut g) = (1u64, 1u128, 1u128);
        let mut x = y;
        let mut ys = y;
        const BLOCK: u64 = 128;
        while g == 1 {
            budget.check()?;
            x = y;
            for _ in 0..r {
                y = step(y, c);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..BLOCK.min(r - k) {
                    y = step(y, c);
                    q = mul_mod(q, x.abs_diff(y), n);
                }
                g = gcd(q, n);
                k += BLOCK;
            }
            r *= 2;
        }
        if g == n {
            loop {
                ys = step(ys, c);
                g = gcd(x.abs_diff(ys), n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != n {
            return Ok(g);
        }
    }
    Err(Error::Numeric(format!("Pollard rho failed to split {n}")))
}

fn split_large(n: u128, budget: &Budget, out: &mut Vec<u128>) -> Result<()> {
    if n == 1 {
        return Ok(());
    }
    if is_prime(n) {
        out.push(n);
        return Ok(());
    }
    let d = rho(n, budget)?;
    split_large(d, budget, out)?;
    split_large(n / d, budget, out)
}

/// Prime factorization of `n ≥ 1` as sorted `(prime, exponent)` pairs.
pub fn factorize(n: u128, budget: &Budget) -> Result<Vec<(u128, u32)>> {
    if n == 0 {
        return Err(Error::domain("cannot factor 0"));
    }
    let mut rem = n;
    let mut out: Vec<(u128, u32)> = Vec::new();

    for &p in small_primes() {
        let p = p as u128;
        if p * p > rem {
            break;
        }
        if rem <= u64::MAX as u128 {
            // narrow arithmetic is markedly faster for the bulk of the loop
            let (mut r, p64) = (rem as u64, p as u64);
            if r % p64 == 0 {
                let mut e = 0;
                while r % p64 == 0 {
                    r /= p64;
                    e += 1;
                }
                out.push((p, e));
            }
            rem = r as u128;
        } else if rem % p == 0 {
            let mut e = 0;
            while rem % p == 0 {
                rem /= p;
                e += 1;
            }
            out.push((p, e));
        }
    }
    if rem == 1 {
        return Ok(out);
    }
    let lim = TRIAL_DIVISION_LIMIT as u128;
    if rem < lim * lim {
        out.push((rem, 1));
        return Ok(out);
    }

    let mut large = Vec::new();
    split_large(rem, budget, &mut large)?;
    large.sort_unstable();
    for p in large {
        match out.last_mut() {
            Some((q, e)) if *q == p => *e += 1,
            _ => out.push((p, 1)),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primality_of_small_and_strong_pseudoprimes() {
        let primes: Vec<u128> = (0..200u128).filter(|&n| is_prime(n)).collect();
        assert_eq!(&primes[..10], &[2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
        assert_eq!(primes.len(), 46);
        // strong pseudoprime to bases 2, 3, 5, 7
        assert!(!is_prime(3_215_031_751));
        assert!(!is_prime(3_825_123_056_546_413_051));
        assert!(is_prime(18_446_744_073_709_551_557));
        assert!(is_prime(170_141_183_460_469_231_731_687_303_715_884_105_727));
    }

    #[test]
    fn factors_semiprimes_beyond_trial_limit() {
        let p = 1_000_000_007u128;
        let q = 998_244_353u128;
        assert_eq!(factorize(p * q, &Budget::unlimited()).unwrap(), vec![(q, 1), (p, 1)]);
        let big = 18_446_744_073_709_551_557u128 * 1_000_003;
        assert_eq!(
            factorize(big, &Budget::unlimited()).unwrap(),
            vec![(1_000_003, 1), (18_446_744_073_709_551_557, 1)]
        );
    }

    #[test]
    fn zero_is_rejected() {
        assert!(matches!(factorize(0, &Budget::unlimited()), Err(Error::Domain(_))));
    }

    #[test]
    fn expired_budget_is_reported() {
        let budget = Budget::within(Duration::from_secs(0));
        std::thread::sleep(Duration::from_millis(2));
        let n = 1_000_000_007u128 * 998_244_353;
        assert!(matches!(factorize(n, &budget), Err(Error::Resource(_))));
    }
}
