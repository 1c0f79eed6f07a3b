//! Generators of letter sequences that never contain a forbidden word, and
//! the statistics computed from them.
//!
//! Letters are stored one-based (`1..=25`, with 26 standing for ★). The
//! generator works on zero-based character indices internally.

use rand::SeedableRng;
use rand_distr::{Distribution, WeightedAliasIndex};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::Serialize;

use crate::analytic::LetterDensity;
use crate::error::{Error, Result};

/// Alphabet size: 25 letters and ★.
pub const ALPHABET: usize = 26;

/// Value of ★ in sequences and in [`c0_estimate`].
pub const STAR: u8 = 26;

/// Highest forbidden family the generators eliminate, `F_25`.
pub const MAX_FAMILY: u32 = 25;

/// PRNG behind every generator.
pub type SeqRng = Xoshiro256PlusPlus;

pub const RNG_NAME: &str = "xoshiro256++ (seed_from_u64)";

/// Probabilities of letters 1…25 and ★.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InputDistribution {
    p: [f64; ALPHABET],
}

/// Input distribution `p⁽¹⁾` for Model 1.
pub const TABLE3_P1: [f64; ALPHABET] = [
    0.778066482,
    0.1808120958,
    0.0344511792,
    0.005501330873,
    0.0008606020801,
    0.0001788032959,
    5.589433871e-05,
    2.736073937e-05,
    1.31193597e-05,
    7.594988824e-06,
    4.286503901e-06,
    3.540683918e-06,
    2.973346931e-06,
    2.403969944e-06,
    2.812292935e-06,
    3.03521793e-06,
    2.459252943e-06,
    2.294506947e-06,
    1.121315974e-06,
    1.70937596e-07,
    2.59843894e-07,
    9.695063776e-08,
    5.074703883e-08,
    1.579332963e-08,
    6.098237859e-09,
    9.831509773e-09,
];

/// Input distribution `p⁽²⁾` for Model 2.
pub const TABLE3_P2: [f64; ALPHABET] = [
    0.7791783767,
    0.166204795,
    0.03914430883,
    0.01075578968,
    0.003211510904,
    0.0009983211701,
    0.0003228213903,
    0.000100454897,
    3.482384896e-05,
    1.119959966e-05,
    5.66707383e-06,
    6.236370813e-06,
    6.553250804e-06,
    6.186574815e-06,
    5.746875828e-06,
    3.470847896e-06,
    1.430745957e-06,
    1.018855969e-06,
    7.578192773e-07,
    1.379581959e-07,
    2.503132925e-07,
    5.449547837e-08,
    5.148644846e-08,
    2.473640926e-08,
    5.160489846e-09,
    5.419687838e-09,
];

impl InputDistribution {
    /// Requires non-negative entries summing to 1 within 1e-9.
    pub fn new(p: [f64; ALPHABET]) -> Result<Self> {
        if p.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
            return Err(Error::domain("probabilities must be finite and non-negative"));
        }
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::domain(format!("probabilities sum to {sum}")));
        }
        Ok(InputDistribution { p })
    }

    /// Clamps at 0 and divides by the sum.
    pub fn normalized(raw: &[f64]) -> Result<Self> {
        if raw.len() != ALPHABET {
            return Err(Error::domain(format!("need {ALPHABET} weights, got {}", raw.len())));
        }
        let mut p = [0.0; ALPHABET];
        for (d, &v) in p.iter_mut().zip(raw) {
            *d = if v.is_finite() { v.max(0.0) } else { 0.0 };
        }
        let sum: f64 = p.iter().sum();
        if !(sum > 0.0) {
            return Err(Error::domain("all weights are zero"));
        }
        p.iter_mut().for_each(|v| *v /= sum);
        Ok(InputDistribution { p })
    }

    pub fn table3_p1() -> Self {
        Self::new(TABLE3_P1).expect("table values sum to 1")
    }

    pub fn table3_p2() -> Self {
        Self::new(TABLE3_P2).expect("table values sum to 1")
    }

    /// `q_1 … q_25` and the tail mass for ★.
    pub fn from_density(q: &LetterDensity) -> Result<Self> {
        let v = q.with_tail();
        Self::normalized(&v)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.p
    }

    /// One probability per line, 26 lines.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("letter,p\n");
        for (i, v) in self.p.iter().enumerate() {
            let name = if i + 1 == ALPHABET { "*".to_string() } else { (i + 1).to_string() };
            s.push_str(&format!("{name},{v:e}\n"));
        }
        s
    }

    /// Reads the `letter,p` layout of [`to_csv`](Self::to_csv), or 26 bare
    /// numbers one per line.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut values = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (i == 0 && line.starts_with("letter")) {
                continue;
            }
            let field = line.rsplit(',').next().unwrap_or(line);
            values.push(
                field
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::format(format!("line {}: {e}", i + 1)))?,
            );
        }
        let arr: [f64; ALPHABET] = values
            .try_into()
            .map_err(|v: Vec<f64>| Error::format(format!("expected 26 rows, got {}", v.len())))?;
        Self::new(arr)
    }
}

/// How a letter that would complete a forbidden word is replaced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Model {
    /// Resample from the tail of `p` above the offending family.
    One,
    /// Take the smallest letter that breaks the word.
    Two,
}

impl std::str::FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1" => Ok(Model::One),
            "2" => Ok(Model::Two),
            _ => Err(Error::domain(format!("model must be 1 or 2, got {s:?}"))),
        }
    }
}

/// Generator variant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct GeneratorConfig {
    pub model: Model,
    /// Families `F_1 … F_eliminate` are removed; 0 disables elimination.
    pub eliminate: u32,
    /// Letters above `⌊log₂(i+1)⌋` are withheld at position `i`.
    pub growing_alphabet: bool,
}

impl GeneratorConfig {
    pub fn standard(model: Model) -> Self {
        GeneratorConfig {
            model,
            eliminate: MAX_FAMILY,
            growing_alphabet: true,
        }
    }

    /// Plain i.i.d. sampling from `p`.
    pub fn no_elimination() -> Self {
        GeneratorConfig {
            model: Model::One,
            eliminate: 0,
            growing_alphabet: false,
        }
    }
}

/// Largest character index allowed at zero-based position `i`.
pub fn max_char_at(i: u64) -> usize {
    if i == 0 {
        return 0;
    }
    let m = (63 - (i + 1).leading_zeros()) as i64 - 1;
    m.clamp(0, ALPHABET as i64 - 1) as usize
}

/// Alias samplers for every normalized slice `p[i..=j]`.
struct SliceTables {
    tables: Vec<Option<WeightedAliasIndex<f64>>>,
}

impl SliceTables {
    fn new(p: &InputDistribution) -> Self {
        let mut tables = Vec::with_capacity(ALPHABET * ALPHABET);
        for i in 0..ALPHABET {
            for j in 0..ALPHABET {
                tables.push(if i <= j {
                    WeightedAliasIndex::new(p.p[i..=j].to_vec()).ok()
                } else {
                    None
                });
            }
        }
        SliceTables { tables }
    }

    /// A character index in `lo..=hi` drawn from the normalized slice.
    fn sample(&self, lo: usize, hi: usize, rng: &mut SeqRng) -> Result<usize> {
        match self.tables.get(lo * ALPHABET + hi).and_then(Option::as_ref) {
            Some(t) => Ok(lo + t.sample(rng)),
            None => Err(Error::Generation(format!(
                "no probability mass on characters {lo}..={hi}"
            ))),
        }
    }
}

/// Running state of one generator.
pub struct Generator {
    config: GeneratorConfig,
    tables: SliceTables,
    rng: SeqRng,
    /// `index[k]`: length of the current run of characters `≤ k`.
    index: [u64; ALPHABET],
    position: u64,
    counts: [u64; ALPHABET],
    max_char: usize,
}

impl Generator {
    pub fn new(config: GeneratorConfig, p: &InputDistribution, seed: u64) -> Result<Self> {
        if config.eliminate > MAX_FAMILY {
            return Err(Error::domain(format!(
                "families above F_{MAX_FAMILY} cannot be eliminated"
            )));
        }
        let mut g = Generator {
            config,
            tables: SliceTables::new(p),
            rng: SeqRng::seed_from_u64(seed),
            index: [0; ALPHABET],
            position: 0,
            counts: [0; ALPHABET],
            max_char: 0,
        };
        g.max_char = g.ceiling();
        Ok(g)
    }

    fn ceiling(&self) -> usize {
        if self.config.growing_alphabet {
            max_char_at(self.position)
        } else {
            ALPHABET - 1
        }
    }

    pub fn position(&self) -> u64 {
        self.position
    }

    pub fn max_char(&self) -> usize {
        self.max_char
    }

    pub fn counts(&self) -> &[u64; ALPHABET] {
        &self.counts
    }

    pub fn run_lengths(&self) -> &[u64; ALPHABET] {
        &self.index
    }

    /// Next zero-based character index.
    pub fn next_index(&mut self) -> Result<usize> {
        let max_char = self.max_char;
        let mut x = self.tables.sample(0, max_char, &mut self.rng)?;
        // run type k covers characters 0..=k; family F_{k+1} is a run of 2^{k+2}
        let tracked = self.config.eliminate as usize;
        let mut k = tracked;
        while k > x {
            k -= 1;
            self.index[k] += 1;
            // types above the alphabet ceiling keep counting but cannot be hit
            // yet: no window that long fits before the ceiling rises
            if k <= max_char && self.index[k] >= 1u64 << (k + 2) {
                x = match self.config.model {
                    Model::One => self.tables.sample(k + 1, max_char, &mut self.rng)?,
                    Model::Two => {
                        if k + 1 > max_char {
                            return Err(Error::Generation(format!(
                                "no letter above {} below the ceiling {max_char}",
                                k + 1
                            )));
                        }
                        k + 1
                    }
                };
                break;
            }
        }
        for v in &mut self.index[..x.min(tracked)] {
            *v = 0;
        }
        self.counts[x] += 1;
        self.position += 1;
        self.max_char = self.ceiling();
        Ok(x)
    }

    /// Next letter, one-based, ★ as 26.
    pub fn next_letter(&mut self) -> Result<u8> {
        self.next_index().map(|x| x as u8 + 1)
    }
}

/// A sequence of `length` letters.
pub fn generate(
    config: GeneratorConfig,
    p: &InputDistribution,
    length: usize,
    seed: u64,
) -> Result<Vec<u8>> {
    if length == 0 {
        return Err(Error::domain("length must be at least 1"));
    }
    let mut g = Generator::new(config, p, seed)?;
    (0..length).map(|_| g.next_letter()).collect()
}

/// Statistics of one generated sequence, computed while streaming.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunStats {
    pub seed: u64,
    pub length: u64,
    pub c0: f64,
    pub marginals: Vec<f64>,
}

/// Streams `length` letters, returning `c0` and the letter frequencies
/// without keeping the sequence.
pub fn run_stats(
    config: GeneratorConfig,
    p: &InputDistribution,
    length: u64,
    seed: u64,
) -> Result<RunStats> {
    if length < 2 {
        return Err(Error::domain("length must be at least 2"));
    }
    let mut g = Generator::new(config, p, seed)?;
    let mut prev = g.next_letter()?;
    let mut sum = 0u64;
    for _ in 1..length {
        let x = g.next_letter()?;
        sum += prev.max(x) as u64;
        prev = x;
    }
    let marginals = g.counts().iter().map(|&c| c as f64 / length as f64).collect();
    Ok(RunStats {
        seed,
        length,
        c0: sum as f64 / (length - 1) as f64,
        marginals,
    })
}

/// [`run_stats`] on a materialized sequence, also counting windows of the
/// forbidden families `F_1 … F_25`.
pub fn run_stats_checked(
    config: GeneratorConfig,
    p: &InputDistribution,
    length: u64,
    seed: u64,
) -> Result<(RunStats, usize)> {
    if length < 2 {
        return Err(Error::domain("length must be at least 2"));
    }
    let n = usize::try_from(length).map_err(|_| Error::Resource("length exceeds memory".into()))?;
    let seq = generate(config, p, n, seed)?;
    let violations = crate::words::scan_letters(&seq, 1, MAX_FAMILY).len();
    let stats = RunStats {
        seed,
        length,
        c0: c0_estimate(&seq)?,
        marginals: empirical_marginals(&seq)?.to_vec(),
    };
    Ok((stats, violations))
}

/// Relative frequency of each letter 1…25 and ★.
pub fn empirical_marginals(seq: &[u8]) -> Result<[f64; ALPHABET]> {
    if seq.is_empty() {
        return Err(Error::domain("empty sequence"));
    }
    let mut counts = [0u64; ALPHABET];
    for &l in seq {
        if !(1..=STAR).contains(&l) {
            return Err(Error::domain(format!("letter {l} outside 1..=26")));
        }
        counts[l as usize - 1] += 1;
    }
    let n = seq.len() as f64;
    Ok(counts.map(|c| c as f64 / n))
}

/// `√((1/26) Σ (Π_i − q_i)²)`, ★ compared with the tail of `q`.
pub fn rms(marginals: &[f64], q: &LetterDensity) -> f64 {
    let target = q.with_tail();
    let sq: f64 = marginals
        .iter()
        .zip(target.iter().chain(std::iter::repeat(&0.0)))
        .map(|(a, b)| (a - b).powi(2))
        .sum();
    (sq / ALPHABET as f64).sqrt()
}

/// Mean of `max(X_i, X_{i+1})` over consecutive letters.
pub fn c0_estimate(seq: &[u8]) -> Result<f64> {
    if seq.len() < 2 {
        return Err(Error::domain("c0 needs at least two letters"));
    }
    let sum: u64 = seq.windows(2).map(|w| w[0].max(w[1]) as u64).sum();
    Ok(sum as f64 / (seq.len() - 1) as f64)
}

/// Sequence whose block `n` (positions `2^n+1 … 2^{n+1}`, with block 1
/// covering positions 1…4) comes from a chain eliminating `F_1 … F_n`.
///
/// Each block is drawn by a fixed-alphabet Model 1 generator with input `q`,
/// run for a burn-in as long as the block before it is kept so that the
/// block starts close to stationarity.
pub fn generate_blocked(q: &LetterDensity, n_max: u32, seed: u64) -> Result<Vec<u8>> {
    if n_max == 0 || n_max > MAX_FAMILY {
        return Err(Error::domain(format!("n_max must be in 1..={MAX_FAMILY}")));
    }
    let p = InputDistribution::from_density(q)?;
    let mut out = Vec::with_capacity(1usize << (n_max + 1));
    let mut seeder = SeqRng::seed_from_u64(seed);
    for n in 1..=n_max {
        let len = if n == 1 { 4 } else { 1usize << n };
        let config = GeneratorConfig {
            model: Model::One,
            eliminate: n,
            growing_alphabet: false,
        };
        let mut g = Generator::new(config, &p, rand::Rng::gen(&mut seeder))?;
        for _ in 0..len {
            g.next_letter()?;
        }
        for _ in 0..len {
            out.push(g.next_letter()?);
        }
    }
    Ok(out)
}

/// Boundaries `4, 8, 16, …, 2^{n_max+1}` of the blocks of [`generate_blocked`].
pub fn block_ends(n_max: u32) -> Vec<usize> {
    (1..=n_max).map(|n| 1usize << (n + 1)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::scan_letters;

    #[test]
    fn max_char_table() {
        // ⌊log₂(i+1)⌋ − 1, traced by hand
        let expect = |i: u64| -> usize {
            if i == 0 {
                return 0;
            }
            let mut m = 0i64;
            while (1u64 << (m + 1)) <= i + 1 {
                m += 1;
            }
            (m - 1).clamp(0, 25) as usize
        };
        for i in 0..=64 {
            assert_eq!(max_char_at(i), expect(i), "i = {i}");
        }
        assert_eq!(max_char_at(2), 0);
        assert_eq!(max_char_at(3), 1);
        assert_eq!(max_char_at(7), 2);
        assert_eq!(max_char_at(u64::MAX - 1), 25);
    }

    #[test]
    fn first_letter_is_one() {
        for seed in 0..20 {
            for model in [Model::One, Model::Two] {
                let s = generate(GeneratorConfig::standard(model), &InputDistribution::table3_p1(), 1, seed)
                    .unwrap();
                assert_eq!(s, vec![1]);
            }
        }
    }

    #[test]
    fn outputs_are_free_of_forbidden_words() {
        for model in [Model::One, Model::Two] {
            for seed in 0..3 {
                let s = generate(GeneratorConfig::standard(model), &InputDistribution::table3_p2(), 200_000, seed)
                    .unwrap();
                assert!(scan_letters(&s, 0, 25).is_empty(), "{model:?} seed {seed}");
            }
        }
    }

    #[test]
    fn run_lengths_stay_below_threshold() {
        let mut g = Generator::new(GeneratorConfig::standard(Model::One), &InputDistribution::table3_p1(), 5)
            .unwrap();
        for _ in 0..100_000 {
            g.next_index().unwrap();
            for k in 0..=g.max_char().min(24) {
                assert!(g.run_lengths()[k] < 1 << (k + 2));
            }
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let p = InputDistribution::table3_p1();
        let cfg = GeneratorConfig::standard(Model::One);
        assert_eq!(generate(cfg, &p, 10_000, 42).unwrap(), generate(cfg, &p, 10_000, 42).unwrap());
        assert_ne!(generate(cfg, &p, 10_000, 42).unwrap(), generate(cfg, &p, 10_000, 43).unwrap());
    }

    #[test]
    fn streaming_stats_match_sequence() {
        let p = InputDistribution::table3_p2();
        let cfg = GeneratorConfig::standard(Model::Two);
        let s = generate(cfg, &p, 50_000, 9).unwrap();
        let r = run_stats(cfg, &p, 50_000, 9).unwrap();
        assert_eq!(r.c0, c0_estimate(&s).unwrap());
        assert_eq!(r.marginals, empirical_marginals(&s).unwrap().to_vec());
    }

    #[test]
    fn simple_statistics() {
        assert_eq!(c0_estimate(&[3, 3, 3, 3]).unwrap(), 3.0);
        assert!(c0_estimate(&[3]).is_err());
        let m = empirical_marginals(&[1, 1, 1]).unwrap();
        assert_eq!(m[0], 1.0);
        let q = LetterDensity::alphabet();
        assert!(rms(&q.with_tail(), &q) < 1e-15);
    }

    #[test]
    fn empty_tail_is_a_generation_error() {
        let mut p = [0.0; ALPHABET];
        p[0] = 1.0;
        let p = InputDistribution::new(p).unwrap();
        let err = generate(GeneratorConfig::standard(Model::One), &p, 100, 1).unwrap_err();
        assert!(matches!(err, Error::Generation(_)));
    }

    #[test]
    fn csv_round_trip() {
        let p = InputDistribution::table3_p1();
        let csv = p.to_csv();
        assert_eq!(InputDistribution::from_csv(&csv).unwrap(), p);
        assert!(InputDistribution::from_csv("0.5\n0.5\n").is_err());
    }

    #[test]
    fn blocks_avoid_their_families() {
        let q = LetterDensity::alphabet();
        let s = generate_blocked(&q, 12, 3).unwrap();
        assert_eq!(s.len(), 1 << 13);
        let mut start = 0;
        for (n, end) in (1..=12).zip(block_ends(12)) {
            assert!(scan_letters(&s[start..end], 0, n).is_empty(), "block {n}");
            start = end;
        }
    }

    #[test]
    fn checked_run_agrees_with_streaming() {
        let cfg = GeneratorConfig::standard(Model::Two);
        let p = InputDistribution::table3_p2();
        let a = run_stats(cfg, &p, 50_000, 9).unwrap();
        let (b, v) = run_stats_checked(cfg, &p, 50_000, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(v, 0);
    }
}
