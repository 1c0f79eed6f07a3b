//! Deterministic whole-range invariants of the engine.

use primegrid::analytic::{self, LetterDensity};
use primegrid::gaps::{self, GapKind};
use primegrid::seqgen::{self, GeneratorConfig, InputDistribution, Model};
use primegrid::shiftmodel::{self, Example};
use primegrid::signature::{factor_signature, sieve_norms};
use primegrid::trail::{self, compute_trail, compute_trail_segments};
use primegrid::words::{self, scan_forbidden, Word};

fn norm(n: u64) -> u32 {
    factor_signature(n).unwrap().norm_inf()
}

fn trial_division_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

#[test]
fn sieve_agrees_with_factorization_to_1e5() {
    let seg = sieve_norms(1, 100_001).unwrap();
    for n in 1..=100_000u64 {
        assert_eq!(seg.norm_of(n).unwrap() as u32, norm(n), "norm of {n}");
        assert_eq!(seg.is_prime(n).unwrap(), trial_division_prime(n), "primality of {n}");
    }
}

#[test]
fn norm_one_is_square_free() {
    let seg = sieve_norms(1, 100_001).unwrap();
    for n in 1..=100_000u64 {
        let square_free = n > 1 && (2..).take_while(|d| d * d <= n).all(|d| n % (d * d) != 0);
        assert_eq!(seg.norm_of(n).unwrap() == 1, square_free, "{n}");
    }
}

#[test]
fn norm_densities_at_1e7() {
    let n = 10_000_000u64;
    let seg = sieve_norms(1, n + 1).unwrap();
    let mut counts = [0u64; 4];
    for &v in seg.norms() {
        if (1..=3).contains(&v) {
            counts[v as usize] += 1;
        }
    }
    for k in 1..=3u32 {
        let empirical = counts[k as usize] as f64 / n as f64;
        let q = analytic::q(k).unwrap();
        assert!((empirical - q).abs() < 1e-3, "k = {k}: {empirical} vs {q}");
    }
}

#[test]
fn norm_sequence_has_no_forbidden_window_to_1e7() {
    let seg = sieve_norms(1, 10_000_001).unwrap();
    assert!(scan_forbidden(&seg, 5).is_empty());
}

#[test]
fn trail_lies_between_n_and_l1() {
    let run = compute_trail(100_000, 1 << 14).unwrap();
    // L∞ at every N from the norms directly
    let seg = sieve_norms(1, 100_001).unwrap();
    let norms = seg.norms();
    let mut linf = 0u64;
    let mut l1 = 0u64;
    for big_n in 2..=100_000u64 {
        let k = (big_n - 2) as usize;
        linf += norms[k].max(norms[k + 1]) as u64;
        // L∞(4) = 4; the inequality is strict from N = 5 on
        if big_n == 4 {
            assert_eq!(linf, 4);
        } else if big_n >= 5 {
            assert!(big_n < linf, "N = {big_n}");
        }
        if big_n % 997 == 0 || big_n == 100_000 {
            l1 = trail::l1_trail(big_n).unwrap();
            assert!(linf < l1, "N = {big_n}");
        }
    }
    assert_eq!(run.checkpoint.cumsum_linf, linf);
    assert!(l1 > 0);
}

#[test]
fn l1_sandwich() {
    let gamma = 0.577_215_664_901_532_9_f64;
    for big_n in [1_000u64, 10_000, 100_000] {
        let n = big_n as f64;
        let l1 = trail::l1_trail(big_n).unwrap() + factor_signature(big_n).unwrap().norm_one() as u64;
        let l1 = l1 as f64;
        let lower = 2.0 * n * (n.ln().ln() - (std::f64::consts::PI.powi(2) / 6.0).ln());
        let upper = 2.0 * n * n.ln() - 4.0 * (1.0 - gamma) * n + 50.0 * n.sqrt();
        assert!(lower <= l1 && l1 <= upper, "N = {big_n}: {lower} <= {l1} <= {upper}");
    }
}

#[test]
fn linear_growth_at_1e7() {
    let run = compute_trail(10_000_000, 1 << 20).unwrap();
    let ratio = run.checkpoint.cumsum_linf as f64 / 1e7;
    let c = analytic::constant_c();
    assert!(c - 0.01 < ratio && ratio < 2.0 * c + 0.01, "{ratio}");
}

#[test]
fn segmentation_does_not_change_the_trail() {
    let one = compute_trail_segments(&[(2, 1_000_001)]).unwrap();
    // 97 segments of uneven length
    let mut bounds = Vec::new();
    let mut lo = 2u64;
    for i in 0..97u64 {
        let hi = if i == 96 { 1_000_001 } else { lo + 1_000 + (i * 7_919) % 19_000 };
        bounds.push((lo, hi));
        lo = hi;
    }
    let many = compute_trail_segments(&bounds).unwrap();
    assert_eq!(one.checkpoint, many.checkpoint);
    assert!(one.stops == many.stops && one.primes == many.primes);
}

struct Gaps {
    primes: Vec<u64>,
    d1: Vec<i16>,
    dd1: Vec<i16>,
}

fn gaps_to(n: u64) -> Gaps {
    let run = compute_trail(n, 1 << 18).unwrap();
    Gaps {
        d1: gaps::gap_series(&run.primes, false, 1).unwrap().values,
        dd1: gaps::gap_series(run.stops.values(), true, 1).unwrap().values,
        primes: run.primes,
    }
}

#[test]
fn trail_gaps_dominate_classical_gaps_and_twin_formula() {
    let g = gaps_to(1_000_000);
    for k in 0..g.d1.len() {
        assert!(g.dd1[k] >= g.d1[k], "k = {}", k + 1);
        if g.d1[k] == 2 {
            assert_eq!(g.dd1[k] as u32, 2 * norm(g.primes[k] + 1), "p = {}", g.primes[k]);
        }
    }
}

#[test]
fn small_trail_gap_characterization() {
    let g = gaps_to(100_000);
    for k in 0..g.d1.len() {
        let p = g.primes[k];
        let twin = g.d1[k] == 2;
        let v = g.dd1[k];
        assert_eq!(v == 2, twin && norm(p + 1) == 1, "p = {p}");
        assert_eq!(v == 4, twin && norm(p + 1) == 2, "p = {p}");
        // exact form of the gap-4 branch: {‖p+1‖, ‖p+3‖} = {1, 2}
        let four = g.d1[k] == 4 && norm(p + 2) == 1 && norm(p + 1) + norm(p + 3) == 3;
        assert_eq!(v == 6, (twin && norm(p + 1) == 3) || four, "p = {p}");
        if v == 6 && !twin {
            assert!((p + 1) % 4 == 0 || (p + 3) % 4 == 0);
        }
    }
}

#[test]
fn gap_parity() {
    let g = gaps_to(100_000);
    assert!(g.d1[1..].iter().all(|d| d % 2 == 0));
    let first_odd = g.dd1.iter().position(|d| d % 2 == 1 && *d > 1).unwrap();
    assert_eq!((g.primes[first_odd], g.dd1[first_odd]), (7, 9));
    let seven = g.dd1.iter().position(|&d| d == 7).unwrap();
    assert_eq!((g.primes[seven], g.primes[seven + 1]), (43, 47));
}

fn histogram_columns() -> Vec<(i64, [u64; 5])> {
    include_str!("data/dd1_histogram_columns.csv")
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<u64> = l.split(',').map(|x| x.parse().unwrap()).collect();
            (f[0] as i64, [f[1], f[2], f[3], f[4], f[5]])
        })
        .collect()
}

#[test]
fn histograms_match_reference_columns() {
    let run = compute_trail(1_000_000, 1 << 18).unwrap();
    let table = histogram_columns();
    for (col, n_max) in [100u64, 1_000, 10_000, 100_000, 1_000_000].into_iter().enumerate() {
        let count = gaps::primes_up_to(&run.primes, n_max);
        let series = gaps::gap_series(&run.stops.values()[..count], true, 1).unwrap();
        assert_eq!(series.kind, GapKind::TrailD1);
        let hist = gaps::histogram(&series).unwrap();
        for (value, counts) in &table {
            assert_eq!(hist.count(*value), counts[col], "N <= {n_max}, value {value}");
        }
    }
}

#[test]
fn densities_match_norm_frequencies() {
    let n = 10_000_000u64;
    let seg = sieve_norms(2, n + 1).unwrap();
    let d = LetterDensity::alphabet();
    for k in 1..=3usize {
        let f = seg.norms().iter().filter(|&&v| v as usize == k).count() as f64 / n as f64;
        assert!((f - d.q(k)).abs() < 1e-3);
    }
}

#[test]
fn located_word_has_exact_norms() {
    let w: Word = "1,2,2,1".parse().unwrap();
    let primes = [3, 2, 5, 7];
    let hit = words::search_word(&w, &primes, 1_000_000, None).unwrap().expect("found");
    let start: u64 = hit.location.try_into().unwrap();
    for (i, &l) in w.letters().iter().enumerate() {
        assert_eq!(norm(start + i as u64), l);
    }
    let seg = sieve_norms(start, start + 4).unwrap();
    assert_eq!(seg.norms(), &[1, 2, 2, 1]);
}

#[test]
fn example_hops_are_monotone_and_bounded() {
    let hops: Vec<f64> = [Example::Empty, Example::Single, Example::Double]
        .into_iter()
        .map(|e| shiftmodel::calibrate_example(e).unwrap().shift.expected_hop())
        .collect();
    assert!(hops[0] < hops[1] && hops[1] < hops[2], "{hops:?}");
    assert!(hops.iter().all(|&h| h <= 2.0 * analytic::constant_c()));
}

#[test]
fn generators_never_emit_forbidden_words() {
    for model in [Model::One, Model::Two] {
        let p = match model {
            Model::One => InputDistribution::table3_p1(),
            Model::Two => InputDistribution::table3_p2(),
        };
        for seed in 0..20 {
            let (_, violations) =
                seqgen::run_stats_checked(GeneratorConfig::standard(model), &p, 1_000_000, seed)
                    .unwrap();
            assert_eq!(violations, 0, "{model:?} seed {seed}");
        }
    }
}

#[test]
fn iid_marginals_converge_to_input() {
    let p = InputDistribution::table3_p2();
    let len = 1_000_000u64;
    let r = seqgen::run_stats(GeneratorConfig::no_elimination(), &p, len, 17).unwrap();
    let ms: f64 = r
        .marginals
        .iter()
        .zip(p.as_slice())
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        / 26.0;
    assert!(ms.sqrt() < 3.0 / (len as f64).sqrt());
}
