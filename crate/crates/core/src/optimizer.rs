//! Differential evolution and the inverse fit of generator input
//! distributions to the target letter densities.

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use rayon::prelude::*;
use serde::Serialize;

use crate::analytic::LetterDensity;
use crate::error::{Error, Result};
use crate::seqgen::{self, GeneratorConfig, InputDistribution, Model, ALPHABET};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Strategy {
    /// `v = x_r0 + F (x_r1 − x_r2)`
    Rand1Bin,
    /// `v = x_best + F (x_r1 − x_r2)`
    Best1Bin,
}

/// How stochastic objectives are seeded.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum EvalSeedPolicy {
    /// Every evaluation uses the same seed (common random numbers).
    Fixed,
    /// A fresh seed per generation; the population is re-scored with it.
    PerGeneration,
}

#[derive(Clone, Debug, Serialize)]
pub struct DeConfig {
    pub population: usize,
    pub weight: f64,
    pub crossover: f64,
    pub strategy: Strategy,
    pub generations: usize,
    pub bounds: Vec<(f64, f64)>,
    /// Sequence length per fitness evaluation, for stochastic objectives.
    pub eval_length: u64,
    pub eval_seed_policy: EvalSeedPolicy,
    /// Search `ln x` instead of `x`; requires positive bounds.
    pub log_scale: bool,
    /// Vectors placed in the first population slots.
    pub initial: Vec<Vec<f64>>,
}

impl DeConfig {
    pub fn new(bounds: Vec<(f64, f64)>) -> Self {
        DeConfig {
            population: 40,
            weight: 0.5,
            crossover: 0.9,
            strategy: Strategy::Rand1Bin,
            generations: 200,
            bounds,
            eval_length: 1_000_000,
            eval_seed_policy: EvalSeedPolicy::Fixed,
            log_scale: false,
            initial: Vec::new(),
        }
    }

    /// The box `[1e-10, 1]^26` used for input distributions.
    pub fn for_distribution() -> Self {
        Self::new(vec![(1e-10, 1.0); ALPHABET])
    }

    fn validate(&self) -> Result<()> {
        if self.population < 4 {
            return Err(Error::domain("population must be at least 4"));
        }
        if !(self.weight > 0.0 && self.weight < 2.0) {
            return Err(Error::domain("weight F must lie in (0, 2)"));
        }
        if !(0.0..=1.0).contains(&self.crossover) {
            return Err(Error::domain("crossover CR must lie in [0, 1]"));
        }
        if self.bounds.is_empty() {
            return Err(Error::domain("no decision variables"));
        }
        for &(lo, hi) in &self.bounds {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::domain(format!("bad bounds [{lo}, {hi}]")));
            }
            if self.log_scale && lo <= 0.0 {
                return Err(Error::domain("log-scaled search needs positive bounds"));
            }
        }
        for v in &self.initial {
            if v.len() != self.bounds.len() {
                return Err(Error::domain("initial vector has the wrong dimension"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DeResult {
    pub best: Vec<f64>,
    pub value: f64,
    /// Best value after each generation, starting with the initial population.
    pub history: Vec<f64>,
}

/// Minimizes `objective` over the box in `config.bounds`.
pub fn de_minimize<F>(objective: F, config: &DeConfig, seed: u64) -> Result<DeResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    de_core(&|x: &[f64], _| objective(x), config, seed, false)
}

fn score(v: f64) -> f64 {
    if v.is_finite() {
        v
    } else {
        f64::INFINITY
    }
}

/// DE loop. `objective` also receives the generation number; with `rescore`
/// the whole population is re-evaluated at every generation.
fn de_core(
    objective: &(dyn Fn(&[f64], usize) -> f64 + Sync),
    config: &DeConfig,
    seed: u64,
    rescore: bool,
) -> Result<DeResult> {
    config.validate()?;
    let dim = config.bounds.len();
    let np = config.population;
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let to_inner = |x: f64| if config.log_scale { x.ln() } else { x };
    let to_outer = |u: f64| if config.log_scale { u.exp() } else { u };
    let lo: Vec<f64> = config.bounds.iter().map(|b| to_inner(b.0)).collect();
    let hi: Vec<f64> = config.bounds.iter().map(|b| to_inner(b.1)).collect();
    let outer = |u: &[f64]| -> Vec<f64> { u.iter().map(|&v| to_outer(v)).collect() };

    let mut pop: Vec<Vec<f64>> = Vec::with_capacity(np);
    for v in config.initial.iter().take(np) {
        pop.push(
            v.iter()
                .enumerate()
                .map(|(d, &x)| to_inner(x.clamp(config.bounds[d].0, config.bounds[d].1)))
                .collect(),
        );
    }
    while pop.len() < np {
        pop.push((0..dim).map(|d| rng.gen_range(lo[d]..hi[d])).collect());
    }
    let eval_all = |vs: &[Vec<f64>], gen: usize| -> Vec<f64> {
        vs.par_iter().map(|u| score(objective(&outer(u), gen))).collect()
    };
    let mut fit = eval_all(&pop, 0);
    let best_of = |fit: &[f64]| -> usize {
        (0..fit.len())
            .min_by(|&a, &b| fit[a].total_cmp(&fit[b]))
            .expect("population is non-empty")
    };
    let mut history = vec![fit[best_of(&fit)]];

    for gen in 1..=config.generations {
        if rescore {
            fit = eval_all(&pop, gen);
        }
        let best = best_of(&fit);
        let mut trials = Vec::with_capacity(np);
        for i in 0..np {
            let mut pick = |exclude: &[usize]| loop {
                let r = rng.gen_range(0..np);
                if !exclude.contains(&r) {
                    break r;
                }
            };
            let r0 = pick(&[i]);
            let r1 = pick(&[i, r0]);
            let r2 = pick(&[i, r0, r1]);
            let base = match config.strategy {
                Strategy::Rand1Bin => r0,
                Strategy::Best1Bin => best,
            };
            let jrand = rng.gen_range(0..dim);
            let trial: Vec<f64> = (0..dim)
                .map(|d| {
                    if d == jrand || rng.gen::<f64>() < config.crossover {
                        let v = pop[base][d] + config.weight * (pop[r1][d] - pop[r2][d]);
                        if v < lo[d] || v > hi[d] {
                            // resample between the base point and the violated bound
                            let b = pop[base][d];
                            let edge = if v < lo[d] { lo[d] } else { hi[d] };
                            b + rng.gen::<f64>() * (edge - b)
                        } else {
                            v
                        }
                    } else {
                        pop[i][d]
                    }
                })
                .collect();
            trials.push(trial);
        }
        let trial_fit = eval_all(&trials, gen);
        for (i, (t, f)) in trials.into_iter().zip(trial_fit).enumerate() {
            if f <= fit[i] {
                pop[i] = t;
                fit[i] = f;
            }
        }
        history.push(fit[best_of(&fit)]);
    }
    let b = best_of(&fit);
    Ok(DeResult {
        best: outer(&pop[b]),
        value: fit[b],
        history,
    })
}

/// Generator whose input distribution is fitted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FitModel {
    Model1,
    Model2,
    /// i.i.d. sampling, for which the output marginals equal the input.
    NoElimination,
}

impl FitModel {
    pub fn generator(self) -> GeneratorConfig {
        match self {
            FitModel::Model1 => GeneratorConfig::standard(Model::One),
            FitModel::Model2 => GeneratorConfig::standard(Model::Two),
            FitModel::NoElimination => GeneratorConfig::no_elimination(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FitResult {
    pub distribution: InputDistribution,
    /// Objective value of the returned distribution.
    pub rms: f64,
    pub history: Vec<f64>,
}

fn eval_seed(seed: u64, policy: EvalSeedPolicy, gen: usize) -> u64 {
    let mix = |x: u64| {
        // splitmix64 finalizer
        let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    };
    match policy {
        EvalSeedPolicy::Fixed => mix(seed),
        EvalSeedPolicy::PerGeneration => mix(seed ^ mix(gen as u64 + 1)),
    }
}

/// RMS between the letter frequencies of a generated sequence and `q`.
pub fn fit_objective(
    model: FitModel,
    raw: &[f64],
    q: &LetterDensity,
    length: u64,
    seed: u64,
) -> f64 {
    let Ok(p) = InputDistribution::normalized(raw) else {
        return f64::INFINITY;
    };
    match seqgen::run_stats(model.generator(), &p, length, seed) {
        Ok(r) => seqgen::rms(&r.marginals, q),
        Err(_) => f64::INFINITY,
    }
}

/// Searches for an input distribution whose generated marginals match `q`.
pub fn inverse_fit(
    model: FitModel,
    q: &LetterDensity,
    config: &DeConfig,
    seed: u64,
) -> Result<FitResult> {
    if config.bounds.len() != ALPHABET {
        return Err(Error::domain(format!("need {ALPHABET} bounds")));
    }
    if q.k_max() + 1 != ALPHABET {
        return Err(Error::domain("q must cover 25 letters and the tail"));
    }
    let policy = config.eval_seed_policy;
    let objective = |x: &[f64], gen: usize| {
        fit_objective(model, x, q, config.eval_length, eval_seed(seed, policy, gen))
    };
    let res = de_core(&objective, config, seed, policy == EvalSeedPolicy::PerGeneration)?;
    Ok(FitResult {
        distribution: InputDistribution::normalized(&res.best)?,
        rms: res.value,
        history: res.history,
    })
}
