//! Markov shifts supported on vertex shifts of finite type: the chains that
//! eliminate a chosen set of forbidden words while reproducing the letter
//! densities `q_k`.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::fmt;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::Serialize;

use crate::analytic::{self, LetterDensity};
use crate::error::{Error, Result};
use crate::words::Word;

/// Largest letter used when expanding ★ into concrete values.
const STAR_EXPANSION_MAX: u32 = 80;

/// States up to this count are solved by a dense LU factorization.
pub const DENSE_LIMIT: usize = 1000;

const POWER_TOL: f64 = 1e-12;
const POWER_MAX_ITER: usize = 1_000_000;

/// A symbol of the alphabet: a concrete norm, or ★ for every norm above the
/// explicit letters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Letter {
    Sym(u32),
    Star,
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Letter::Sym(k) => write!(f, "{k}"),
            Letter::Star => f.write_str("*"),
        }
    }
}

/// Sparse row-stochastic matrix: `rows[i]` lists `(j, P_ij)` with `P_ij > 0`.
pub type Transitions = Vec<Vec<(usize, f64)>>;

/// The allowed words of length `n` and their overlap graph.
#[derive(Clone, Debug)]
pub struct VertexShift {
    pub word_length: usize,
    pub alphabet: Vec<Letter>,
    pub states: Vec<Vec<Letter>>,
    /// `successors[i]` lists `(j, a)`: state `j` follows `i` by appending `a`.
    pub successors: Vec<Vec<(usize, Letter)>>,
}

fn contains_subword(hay: &[Letter], needle: &[Letter]) -> bool {
    needle.len() <= hay.len() && hay.windows(needle.len()).any(|w| w == needle)
}

fn word_letters(w: &Word) -> Vec<Letter> {
    w.letters().iter().map(|&l| Letter::Sym(l)).collect()
}

/// Vertex shift on `alphabet` excluding every word of `eliminated`.
pub fn build_vertex_shift(eliminated: &[Word], alphabet: &[Letter]) -> Result<VertexShift> {
    if alphabet.is_empty() {
        return Err(Error::domain("empty alphabet"));
    }
    let mut alphabet = alphabet.to_vec();
    alphabet.sort();
    alphabet.dedup();
    let banned: Vec<Vec<Letter>> = eliminated.iter().map(word_letters).collect();
    let n = banned.iter().map(Vec::len).max().unwrap_or(1).max(1);
    let total = (alphabet.len() as f64).powi(n as i32);
    if total > 5e6 {
        return Err(Error::Resource(format!("{total} candidate states")));
    }
    // enumerate words of length n in lexicographic order over the alphabet
    let mut states = Vec::new();
    let mut idx = vec![0usize; n];
    loop {
        let word: Vec<Letter> = idx.iter().map(|&i| alphabet[i]).collect();
        if !banned.iter().any(|b| contains_subword(&word, b)) {
            states.push(word);
        }
        let mut pos = n;
        loop {
            if pos == 0 {
                break;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < alphabet.len() {
                break;
            }
            idx[pos] = 0;
        }
        if idx.iter().all(|&i| i == 0) {
            break;
        }
    }
    let index: HashMap<&[Letter], usize> = states
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_slice(), i))
        .collect();
    let mut successors = Vec::with_capacity(states.len());
    let mut buf = Vec::with_capacity(n);
    for s in &states {
        let mut row = Vec::new();
        for &a in &alphabet {
            buf.clear();
            buf.extend_from_slice(&s[1..]);
            buf.push(a);
            if let Some(&j) = index.get(buf.as_slice()) {
                row.push((j, a));
            }
        }
        successors.push(row);
    }
    Ok(VertexShift {
        word_length: n,
        alphabet,
        states,
        successors,
    })
}

fn check_stochastic(p: &Transitions) -> Result<()> {
    for (i, row) in p.iter().enumerate() {
        let mut sum = 0.0;
        for &(j, v) in row {
            if j >= p.len() || !(v >= 0.0) {
                return Err(Error::domain(format!("row {i}: bad entry ({j}, {v})")));
            }
            sum += v;
        }
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::domain(format!("row {i} sums to {sum}")));
        }
    }
    Ok(())
}

fn reach_all(adj: &[Vec<usize>]) -> bool {
    let mut seen = vec![false; adj.len()];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    let mut count = 1;
    while let Some(i) = queue.pop_front() {
        for &j in &adj[i] {
            if !seen[j] {
                seen[j] = true;
                count += 1;
                queue.push_back(j);
            }
        }
    }
    count == adj.len()
}

fn is_irreducible(p: &Transitions) -> bool {
    let n = p.len();
    let mut fwd = vec![Vec::new(); n];
    let mut bwd = vec![Vec::new(); n];
    for (i, row) in p.iter().enumerate() {
        for &(j, v) in row {
            if v > 0.0 {
                fwd[i].push(j);
                bwd[j].push(i);
            }
        }
    }
    reach_all(&fwd) && reach_all(&bwd)
}

/// Stationary row vector of an irreducible stochastic matrix.
pub fn stationary(p: &Transitions) -> Result<Vec<f64>> {
    if p.is_empty() {
        return Err(Error::domain("empty chain"));
    }
    check_stochastic(p)?;
    if !is_irreducible(p) {
        return Err(Error::domain("chain is reducible"));
    }
    let pi = if p.len() <= DENSE_LIMIT {
        stationary_dense(p)?
    } else {
        stationary_power(p)?
    };
    Ok(pi)
}

/// Solves `(Pᵀ − I) π = 0` with the last equation replaced by `Σ π = 1`.
fn stationary_dense(p: &Transitions) -> Result<Vec<f64>> {
    let n = p.len();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for (i, row) in p.iter().enumerate() {
        for &(j, v) in row {
            a[(j, i)] += v;
        }
    }
    for i in 0..n {
        a[(i, i)] -= 1.0;
    }
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let mut b = DVector::<f64>::zeros(n);
    b[n - 1] = 1.0;
    let x = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::Numeric("singular stationary system".into()))?;
    Ok(x.iter().map(|v| v.max(0.0)).collect())
}

/// Power iteration on the lazy chain `(P + I)/2`, which shares `π` with `P`
/// and is aperiodic.
fn stationary_power(p: &Transitions) -> Result<Vec<f64>> {
    let n = p.len();
    let mut pi = vec![1.0 / n as f64; n];
    let mut next = vec![0.0; n];
    for _ in 0..POWER_MAX_ITER {
        next.iter_mut().zip(&pi).for_each(|(x, &v)| *x = 0.5 * v);
        for (i, row) in p.iter().enumerate() {
            let w = 0.5 * pi[i];
            for &(j, v) in row {
                next[j] += w * v;
            }
        }
        let s: f64 = next.iter().sum();
        let mut diff = 0.0f64;
        for (a, b) in next.iter_mut().zip(&pi) {
            *a /= s;
            diff = diff.max((*a - b).abs());
        }
        std::mem::swap(&mut pi, &mut next);
        if diff < POWER_TOL {
            return Ok(pi);
        }
    }
    Err(Error::Numeric("power iteration did not converge".into()))
}

/// Letter → probability.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LetterMarginals {
    pub entries: BTreeMap<Letter, f64>,
}

impl LetterMarginals {
    pub fn get(&self, l: Letter) -> f64 {
        self.entries.get(&l).copied().unwrap_or(0.0)
    }
}

/// A stationary Markov chain whose states each emit one letter.
#[derive(Clone, Debug)]
pub struct MarkovShift {
    pub labels: Vec<String>,
    pub emits: Vec<Letter>,
    pub transitions: Transitions,
    pub pi: Vec<f64>,
    /// Law of the concrete value behind ★: `(k, P)` for the letters ★ covers.
    pub star_law: Vec<(u32, f64)>,
    /// Words the chain never produces.
    pub eliminated: Vec<Word>,
}

/// `q_k` restricted to `k ≥ first` and renormalized, the value law of ★.
pub fn star_law(first: u32) -> Vec<(u32, f64)> {
    let qs: Vec<(u32, f64)> = (first..=STAR_EXPANSION_MAX)
        .map(|k| (k, analytic::q(k).expect("k >= 1")))
        .collect();
    let total: f64 = qs.iter().map(|p| p.1).sum();
    qs.into_iter().map(|(k, v)| (k, v / total)).collect()
}

fn star_first_letter(emits: &[Letter]) -> u32 {
    emits
        .iter()
        .filter_map(|l| match l {
            Letter::Sym(k) => Some(*k),
            Letter::Star => None,
        })
        .max()
        .unwrap_or(0)
        + 1
}

impl MarkovShift {
    /// Checks the chain, solves for `π` and attaches the ★ law.
    pub fn new(
        labels: Vec<String>,
        emits: Vec<Letter>,
        transitions: Transitions,
        eliminated: Vec<Word>,
    ) -> Result<Self> {
        if labels.len() != emits.len() || emits.len() != transitions.len() {
            return Err(Error::domain("labels, emissions and rows differ in count"));
        }
        let pi = stationary(&transitions)?;
        let star_law = star_law(star_first_letter(&emits));
        Ok(MarkovShift {
            labels,
            emits,
            transitions,
            pi,
            star_law,
            eliminated,
        })
    }

    /// Chain on a vertex shift that draws the next letter from `weights`
    /// renormalized over the letters allowed after the current state.
    pub fn on_vertex_shift(
        shift: &VertexShift,
        weights: &BTreeMap<Letter, f64>,
        eliminated: Vec<Word>,
    ) -> Result<Self> {
        let mut transitions = Vec::with_capacity(shift.states.len());
        for (i, row) in shift.successors.iter().enumerate() {
            let total: f64 = row.iter().map(|(_, a)| weights.get(a).copied().unwrap_or(0.0)).sum();
            if !(total > 0.0) {
                return Err(Error::domain(format!("state {i} has no weighted successor")));
            }
            transitions.push(
                row.iter()
                    .filter_map(|&(j, a)| {
                        let w = weights.get(&a).copied().unwrap_or(0.0);
                        (w > 0.0).then_some((j, w / total))
                    })
                    .collect(),
            );
        }
        let labels = shift
            .states
            .iter()
            .map(|s| s.iter().map(Letter::to_string).collect::<String>())
            .collect();
        let emits = shift.states.iter().map(|s| *s.last().expect("n >= 1")).collect();
        Self::new(labels, emits, transitions, eliminated)
    }

    pub fn marginals(&self) -> LetterMarginals {
        let mut entries = BTreeMap::new();
        for (&l, &p) in self.emits.iter().zip(&self.pi) {
            *entries.entry(l).or_insert(0.0) += p;
        }
        LetterMarginals { entries }
    }

    fn star_mean(&self) -> f64 {
        self.star_law.iter().map(|&(k, p)| k as f64 * p).sum()
    }

    /// `E max(X, X′)` for independent draws from the ★ law.
    fn star_star_max(&self) -> f64 {
        let mut cdf_prev = 0.0;
        let mut e = 0.0;
        for &(k, p) in &self.star_law {
            let cdf = cdf_prev + p;
            e += k as f64 * (cdf * cdf - cdf_prev * cdf_prev);
            cdf_prev = cdf;
        }
        e
    }

    /// `E Y = Σ π(s) P(s, s′) E max(val s, val s′)`, ★ expanded by its law.
    pub fn expected_hop(&self) -> f64 {
        let star = self.star_mean();
        let star_star = self.star_star_max();
        let mut e = 0.0;
        for (i, row) in self.transitions.iter().enumerate() {
            for &(j, p) in row {
                let m = match (self.emits[i], self.emits[j]) {
                    (Letter::Sym(a), Letter::Sym(b)) => a.max(b) as f64,
                    (Letter::Star, Letter::Star) => star_star,
                    // ★ always exceeds the explicit letters
                    _ => star,
                };
                e += self.pi[i] * p * m;
            }
        }
        e
    }

    /// Draws a letter sequence from the stationary chain, ★ expanded.
    pub fn sample<R: Rng>(&self, len: usize, rng: &mut R) -> Vec<u32> {
        let pick = |rng: &mut R, items: &mut dyn Iterator<Item = (usize, f64)>| {
            let u: f64 = rng.gen();
            let mut acc = 0.0;
            let mut last = 0;
            for (i, p) in items {
                acc += p;
                last = i;
                if u < acc {
                    return i;
                }
            }
            last
        };
        let mut out = Vec::with_capacity(len);
        let mut s = pick(rng, &mut self.pi.iter().copied().enumerate());
        for _ in 0..len {
            out.push(match self.emits[s] {
                Letter::Sym(k) => k,
                Letter::Star => {
                    let i = pick(rng, &mut self.star_law.iter().map(|p| p.1).enumerate());
                    self.star_law[i].0
                }
            });
            s = pick(rng, &mut self.transitions[s].iter().copied());
        }
        out
    }
}

/// RMS of `Π − q` over the chain's letters, ★ compared with the mass of every
/// letter it covers.
pub fn residual(ms: &MarkovShift, q: &LetterDensity) -> f64 {
    let m = ms.marginals();
    let star_first = star_first_letter(&ms.emits);
    let mut sq = 0.0;
    for (&l, &v) in &m.entries {
        let target = match l {
            Letter::Sym(k) if (k as usize) <= q.k_max() => q.q(k as usize),
            Letter::Sym(_) => 0.0,
            Letter::Star => {
                1.0 - (1..star_first as usize)
                    .map(|k| if k <= q.k_max() { q.q(k) } else { 0.0 })
                    .sum::<f64>()
            }
        };
        sq += (v - target).powi(2);
    }
    (sq / m.entries.len() as f64).sqrt()
}

/// The three worked examples of eliminated words.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Example {
    /// Nothing eliminated: an i.i.d. sequence.
    Empty,
    /// `E = {1111}`.
    Single,
    /// `E = {1111, 11121112}`.
    Double,
}

impl std::str::FromStr for Example {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "empty" => Ok(Example::Empty),
            "single" => Ok(Example::Single),
            "double" => Ok(Example::Double),
            _ => Err(Error::domain(format!("unknown example {s:?}"))),
        }
    }
}

impl Example {
    pub fn eliminated(self) -> Vec<Word> {
        let words: &[&str] = match self {
            Example::Empty => &[],
            Example::Single => &["1111"],
            Example::Double => &["1111", "11121112"],
        };
        words.iter().map(|w| w.parse().expect("valid word")).collect()
    }
}

/// A calibrated example chain with its free parameters.
#[derive(Clone, Debug)]
pub struct Calibrated {
    pub which: Example,
    pub p1: f64,
    pub p2: f64,
    pub p_star: f64,
    pub shift: MarkovShift,
}

const S: Letter = Letter::Star;
const L1: Letter = Letter::Sym(1);
const L2: Letter = Letter::Sym(2);

fn labelled(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

/// Compressed chain for `E = ∅`, states 1, 2, ★.
pub fn empty_chain(p1: f64, p2: f64) -> Result<MarkovShift> {
    let ps = 1.0 - p1 - p2;
    let row = vec![(0, p1), (1, p2), (2, ps)];
    MarkovShift::new(
        labelled(&["1", "2", "*"]),
        vec![L1, L2, S],
        vec![row.clone(), row.clone(), row],
        Vec::new(),
    )
}

/// Compressed chain for `E = {1111}`, states 1, 11, 111, 2, ★.
pub fn single_chain(p1: f64, p2: f64) -> Result<MarkovShift> {
    let ps = 1.0 - p1 - p2;
    let after = vec![(0, p1), (3, p2), (4, ps)];
    let p = vec![
        vec![(1, p1), (3, p2), (4, ps)],
        vec![(2, p1), (3, p2), (4, ps)],
        vec![(3, p2 / (1.0 - p1)), (4, ps / (1.0 - p1))],
        after.clone(),
        after,
    ];
    MarkovShift::new(
        labelled(&["1", "11", "111", "2", "*"]),
        vec![L1, L1, L1, L2, S],
        p,
        Example::Single.eliminated(),
    )
}

/// Compressed chain for `E = {1111, 11121112}`.
pub fn double_chain(p1: f64, p2: f64) -> Result<MarkovShift> {
    let ps = 1.0 - p1 - p2;
    // 0:1 1:11 2:111 3:1112 4:11121 5:111211 6:1112111 7:2 8:★
    let p = vec![
        vec![(1, p1), (7, p2), (8, ps)],
        vec![(2, p1), (7, p2), (8, ps)],
        vec![(3, p2 / (1.0 - p1)), (8, ps / (1.0 - p1))],
        vec![(4, p1), (7, p2), (8, ps)],
        vec![(5, p1), (7, p2), (8, ps)],
        vec![(6, p1), (7, p2), (8, ps)],
        vec![(8, 1.0)],
        vec![(0, p1), (7, p2), (8, ps)],
        vec![(0, p1), (7, p2), (8, ps)],
    ];
    MarkovShift::new(
        labelled(&["1", "11", "111", "1112", "11121", "111211", "1112111", "2", "*"]),
        vec![L1, L1, L1, L2, L1, L1, L1, L2, S],
        p,
        Example::Double.eliminated(),
    )
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    let (mut flo, fhi) = (f(lo), f(hi));
    if flo.signum() == fhi.signum() {
        return Err(Error::Numeric(format!("root not bracketed in [{lo}, {hi}]")));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Solves for the parameters that make the chain's letter marginals equal
/// the densities `q_k`.
pub fn calibrate_example(which: Example) -> Result<Calibrated> {
    let q = LetterDensity::alphabet();
    let (q1, q2) = (q.q(1), q.q(2));
    let (p1, p2, shift) = match which {
        Example::Empty => (q1, q2, empty_chain(q1, q2)?),
        Example::Single => {
            let p1 = bisect(
                |p| (p + p * p + p * p * p) * (1.0 - p) / (1.0 - p.powi(4)) - q1,
                1e-9,
                1.0 - 1e-9,
                1e-14,
            )?;
            let p2 = (1.0 - p1.powi(4)) * q2;
            (p1, p2, single_chain(p1, p2)?)
        }
        Example::Double => {
            let (p1, p2) = newton2(
                |x| {
                    let m = double_chain(x[0], x[1])?.marginals();
                    Ok([m.get(L1) - q1, m.get(L2) - q2])
                },
                [q1 + 0.1, q2],
            )?;
            (p1, p2, double_chain(p1, p2)?)
        }
    };
    Ok(Calibrated {
        which,
        p1,
        p2,
        p_star: 1.0 - p1 - p2,
        shift,
    })
}

/// Newton's method in two variables with a forward-difference Jacobian.
fn newton2(f: impl Fn([f64; 2]) -> Result<[f64; 2]>, mut x: [f64; 2]) -> Result<(f64, f64)> {
    const H: f64 = 1e-7;
    for _ in 0..100 {
        let fx = f(x)?;
        if fx[0].abs().max(fx[1].abs()) < 1e-13 {
            return Ok((x[0], x[1]));
        }
        let f0 = f([x[0] + H, x[1]])?;
        let f1 = f([x[0], x[1] + H])?;
        let j = [
            [(f0[0] - fx[0]) / H, (f1[0] - fx[0]) / H],
            [(f0[1] - fx[1]) / H, (f1[1] - fx[1]) / H],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det.abs() < 1e-300 {
            return Err(Error::Numeric("singular Jacobian".into()));
        }
        let dx0 = (fx[0] * j[1][1] - fx[1] * j[0][1]) / det;
        let dx1 = (fx[1] * j[0][0] - fx[0] * j[1][0]) / det;
        x = [x[0] - dx0, x[1] - dx1];
        if !(x[0] > 0.0 && x[1] > 0.0 && x[0] + x[1] < 1.0) {
            return Err(Error::Numeric("Newton step left the simplex".into()));
        }
    }
    Err(Error::Numeric("Newton iteration did not converge".into()))
}

/// The same calibrated chain built on the full vertex shift over {1, 2, ★}.
pub fn vertex_shift_chain(cal: &Calibrated) -> Result<MarkovShift> {
    let eliminated = cal.which.eliminated();
    let shift = build_vertex_shift(&eliminated, &[L1, L2, S])?;
    let weights = BTreeMap::from([(L1, cal.p1), (L2, cal.p2), (S, cal.p_star)]);
    MarkovShift::on_vertex_shift(&shift, &weights, eliminated)
}

/// Whether `seq` contains any of `words` as a factor.
pub fn contains_any(seq: &[u32], words: &[Word]) -> bool {
    let lens: HashSet<usize> = words.iter().map(Word::len).collect();
    let set: HashSet<&[u32]> = words.iter().map(Word::letters).collect();
    lens.into_iter()
        .any(|n| n <= seq.len() && seq.windows(n).any(|w| set.contains(w)))
}
