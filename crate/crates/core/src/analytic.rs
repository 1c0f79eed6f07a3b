//! ζ at integer arguments, the letter densities of the norm sequence and the
//! closed-form constants built from them.

use serde::Serialize;

use crate::error::{Error, Result};

/// Number of explicit letters before the aggregated ★ letter.
pub const ALPHABET_LETTERS: usize = 25;

const EM_CUTOFF: u32 = 16;

// B_2, B_4, …, B_16
const BERNOULLI_EVEN: [f64; 8] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
];

/// ζ(s) − 1 for integer `s ≥ 2`, summed directly below a cutoff and closed
/// with an Euler–Maclaurin tail. Kept separate from [`zeta`] so that large
/// arguments keep full relative precision.
pub fn zeta_minus_one(s: u32) -> Result<f64> {
    if s < 2 {
        return Err(Error::domain(format!("zeta({s}) is not defined here; need s >= 2")));
    }
    let sf = s as f64;
    let n = EM_CUTOFF as f64;
    // largest terms last would lose the small ones, so sum from the top down
    let mut sum = 0.0;
    for k in (2..EM_CUTOFF).rev() {
        sum += (k as f64).powf(-sf);
    }
    let mut tail = n.powf(1.0 - sf) / (sf - 1.0) + 0.5 * n.powf(-sf);
    // rising factorial s(s+1)…(s+2j−2) / (2j)! times N^{−s−2j+1}
    let mut coef = sf / 2.0;
    let mut power = n.powf(-sf - 1.0);
    for (j, b) in BERNOULLI_EVEN.iter().enumerate() {
        if j > 0 {
            let m = 2.0 * j as f64;
            coef *= (sf + m - 1.0) * (sf + m) / ((m + 1.0) * (m + 2.0));
            power /= n * n;
        }
        tail += b * coef * power;
    }
    Ok(sum + tail)
}

/// ζ(s) for integer `s ≥ 2`.
pub fn zeta(s: u32) -> Result<f64> {
    Ok(1.0 + zeta_minus_one(s)?)
}

/// 1/ζ(s) with the convention 1/ζ(1) = 0.
pub fn inv_zeta(s: u32) -> Result<f64> {
    match s {
        0 => Err(Error::domain("1/zeta(0) is not used")),
        1 => Ok(0.0),
        _ => Ok(1.0 / zeta(s)?),
    }
}

/// 1 − 1/ζ(s), accurate even when ζ(s) is within rounding of 1.
fn one_minus_inv_zeta(s: u32) -> f64 {
    if s == 1 {
        return 1.0;
    }
    let z = zeta_minus_one(s).expect("s >= 2");
    z / (1.0 + z)
}

/// `q_k = 1/ζ(k+1) − 1/ζ(k)`, the density of integers with `‖n‖∞ = k`.
pub fn q(k: u32) -> Result<f64> {
    if k == 0 {
        return Err(Error::domain("letters start at 1"));
    }
    // (1 − 1/ζ(k)) − (1 − 1/ζ(k+1)) avoids cancellation for large k
    Ok(one_minus_inv_zeta(k) - one_minus_inv_zeta(k + 1))
}

/// Letter densities `q_1 … q_kmax` plus the mass of every longer letter.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LetterDensity {
    q: Vec<f64>,
    tail: f64,
}

impl LetterDensity {
    pub fn k_max(&self) -> usize {
        self.q.len()
    }

    /// `q_k` for `1 ≤ k ≤ k_max`.
    pub fn q(&self, k: usize) -> f64 {
        self.q[k - 1]
    }

    pub fn values(&self) -> &[f64] {
        &self.q
    }

    /// `Σ_{k > k_max} q_k = 1 − 1/ζ(k_max + 1)`.
    pub fn tail(&self) -> f64 {
        self.tail
    }

    /// `q_1 … q_kmax` followed by the tail, a probability vector.
    pub fn with_tail(&self) -> Vec<f64> {
        let mut v = self.q.clone();
        v.push(self.tail);
        v
    }

    /// The density over the 25 letters and ★ used by the models.
    pub fn alphabet() -> Self {
        letter_density(ALPHABET_LETTERS).expect("k_max >= 1")
    }
}

pub fn letter_density(k_max: usize) -> Result<LetterDensity> {
    if k_max == 0 {
        return Err(Error::domain("k_max must be at least 1"));
    }
    let q = (1..=k_max as u32).map(q).collect::<Result<Vec<_>>>()?;
    let tail = one_minus_inv_zeta(k_max as u32 + 1);
    Ok(LetterDensity { q, tail })
}

const SERIES_TERMS: u32 = 80;

/// `c = Σ_{k≥1} (1 − 1/ζ(k))`, the lower bound on `liminf L∞(N)/N`.
pub fn constant_c() -> f64 {
    (1..=SERIES_TERMS).map(one_minus_inv_zeta).sum()
}

/// Lower bound obtained by packing each norm class into maximal runs.
pub fn bound_bunched() -> f64 {
    (1..=SERIES_TERMS)
        .map(|k| {
            let kf = k as f64;
            (kf + 1.0 / (2f64.powi(k as i32 + 1) - 1.0)) * q(k).expect("k >= 1")
        })
        .sum()
}

/// Upper bound `(3/2) c` for `limsup L∞(N)/N`.
pub fn bound_spread() -> f64 {
    1.5 * constant_c()
}

/// `E max(X, X′)` for two independent letters with law `q`:
/// `Σ k (1/ζ²(k+1) − 1/ζ²(k))`.
pub fn iid_expected_hop() -> f64 {
    (1..=SERIES_TERMS)
        .map(|k| {
            let hi = inv_zeta(k + 1).expect("k >= 1");
            let lo = inv_zeta(k).expect("k >= 1");
            // Q_k² − Q_{k−1}² = q_k (Q_k + Q_{k−1})
            k as f64 * q(k).expect("k >= 1") * (hi + lo)
        })
        .sum()
}

/// Offset logarithmic integral `Li(x) = ∫₂ˣ dy / ln y`.
pub fn li(x: f64) -> Result<f64> {
    if !(x >= 2.0) || !x.is_finite() {
        return Err(Error::domain(format!("Li({x}) needs finite x >= 2")));
    }
    if x == 2.0 {
        return Ok(0.0);
    }
    // y = e^t turns the integrand into e^t / t, smooth on [ln 2, ln x]
    let f = |t: f64| t.exp() / t;
    let (a, b) = (2f64.ln(), x.ln());
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = simpson(a, b, fa, fm, fb);
    let tol = 1e-12 * whole.abs().max(1.0);
    Ok(adaptive_simpson(&f, a, b, fa, fm, fb, whole, tol, 50))
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adaptive_simpson(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Every constant, as printed by the `constants` command.
#[derive(Clone, Debug, Serialize)]
pub struct ConstantsReport {
    pub c: f64,
    pub bound_bunched: f64,
    pub bound_spread: f64,
    pub iid_expected_hop: f64,
    pub zeta: Vec<(u32, f64)>,
    pub q: Vec<f64>,
    pub star_tail: f64,
    /// The last entry of `q` plus `star_tail` is read as the aggregate mass
    /// of every letter above 25.
    pub star_is_tail_assumption: bool,
}

pub fn constants_report() -> ConstantsReport {
    let d = LetterDensity::alphabet();
    ConstantsReport {
        c: constant_c(),
        bound_bunched: bound_bunched(),
        bound_spread: bound_spread(),
        iid_expected_hop: iid_expected_hop(),
        zeta: (2..=26).map(|k| (k, zeta(k).expect("k >= 2"))).collect(),
        q: d.values().to_vec(),
        star_tail: d.tail(),
        star_is_tail_assumption: true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn closed_forms() {
        assert!((zeta(2).unwrap() - PI * PI / 6.0).abs() < 1e-14);
        assert!((zeta(4).unwrap() - PI.powi(4) / 90.0).abs() < 1e-14);
        assert!((zeta(6).unwrap() - PI.powi(6) / 945.0).abs() < 1e-14);
        assert!(matches!(zeta(1), Err(Error::Domain(_))));
    }

    #[test]
    fn zeta_26_against_partial_sums() {
        // terms beyond n = 3 are below 3^-26 ≈ 4e-13 in total relative to 2^-26
        let direct: f64 = (2..200u32).rev().map(|n| (n as f64).powi(-26)).sum();
        let z = zeta_minus_one(26).unwrap();
        assert!(((z - direct) / direct).abs() < 1e-13);
    }

    #[test]
    fn density_sums_to_one() {
        let d = letter_density(25).unwrap();
        let total: f64 = d.values().iter().sum::<f64>() + d.tail();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(d.values().windows(2).all(|w| w[0] > w[1] && w[1] > 0.0));
    }

    #[test]
    fn two_term_partial_sum_of_c() {
        let partial = one_minus_inv_zeta(1) + one_minus_inv_zeta(2);
        assert!((partial - (2.0 - 6.0 / (PI * PI))).abs() < 1e-15);
    }

    #[test]
    fn iid_hop_matches_max_distribution() {
        // P(max ≤ k) = Q_k²; E max = Σ_k P(max ≥ k) = Σ_k (1 − Q_{k−1}²)
        let e: f64 = (1..=80u32)
            .map(|k| {
                let qk1 = inv_zeta(k).unwrap();
                1.0 - qk1 * qk1
            })
            .sum();
        assert!((e - iid_expected_hop()).abs() < 1e-12);
    }

    #[test]
    fn li_values() {
        assert_eq!(li(2.0).unwrap(), 0.0);
        assert!(li(1.5).is_err());
        assert!(li(10.0).unwrap() < li(10.5).unwrap());
    }
}
