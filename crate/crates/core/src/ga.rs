//! Generational GA with windowing-scaled roulette selection, one-point
//! crossover and per-bit mutation.
//!
//! Each generation draws `P/2` parent pairs (with replacement), crosses each
//! pair with probability `p_c`, mutates both children at the scheduled rate
//! and replaces the whole population with the offspring. There is no
//! survivor elitism; the best individual seen so far is tracked separately.
//!
//! RNG draw order, all from one seeded stream:
//!
//! 1. initialisation: `P * L` bit draws, individual by individual;
//! 2. per generation, per pair: two selection draws, one crossover coin, a
//!    cut-point draw if the pair crosses, then `L` mutation draws for the
//!    first child and `L` for the second;
//! 3. injection draws (see [`neoteny::inject`]) after the offspring exist.

use std::time::{Duration, Instant};

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::neoteny::{self, InjectionEvent, NeotenyArchive, NeotenyConfig};
use crate::objective::{self, Assignment, Chromosome, Evaluator, ProblemInstance};
use crate::schedules::MutationSchedule;

pub const DEFAULT_POPULATION: usize = 100;
pub const DEFAULT_GENERATIONS: usize = 3000;
pub const DEFAULT_CROSSOVER: f64 = 0.8;
pub const DEFAULT_WINDOW_EPSILON: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct GaConfig {
    pub population: usize,
    pub generations: usize,
    pub crossover: f64,
    pub schedule: MutationSchedule,
    pub seed: u64,
    pub window_epsilon: f64,
    /// Abort the run if a single generation takes longer than this.
    pub generation_budget: Option<Duration>,
}

impl GaConfig {
    pub fn new(schedule: MutationSchedule, seed: u64) -> Self {
        Self {
            population: DEFAULT_POPULATION,
            generations: DEFAULT_GENERATIONS,
            crossover: DEFAULT_CROSSOVER,
            schedule,
            seed,
            window_epsilon: DEFAULT_WINDOW_EPSILON,
            generation_budget: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.population < 2 || !self.population.is_multiple_of(2) {
            return Err(Error::config(format!(
                "population size {} must be even and >= 2",
                self.population
            )));
        }
        if !(0.0..=1.0).contains(&self.crossover) {
            return Err(Error::config(format!(
                "crossover probability {} outside [0, 1]",
                self.crossover
            )));
        }
        if !(self.window_epsilon > 0.0 && self.window_epsilon.is_finite()) {
            return Err(Error::config("window epsilon must be positive"));
        }
        if let Some(last) = self.schedule.last_generation() {
            if self.generations > 0 && self.generations - 1 > last {
                return Err(Error::config(format!(
                    "schedule defined up to generation {last}, run needs {}",
                    self.generations - 1
                )));
            }
        }
        Ok(())
    }
}

/// Summary statistics of one population's fitness values.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PopulationStats {
    pub best: f64,
    pub worst: f64,
    pub mean: f64,
    /// Population (not sample) standard deviation.
    pub stddev: f64,
    pub sum: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Population {
    pub individuals: Vec<Chromosome>,
    pub fitnesses: Vec<f64>,
}

impl Population {
    pub fn evaluate(individuals: Vec<Chromosome>, evaluator: &mut Evaluator<'_>) -> Result<Self> {
        let fitnesses = individuals
            .iter()
            .map(|c| evaluator.fitness(c))
            .collect::<Result<_>>()?;
        Ok(Self {
            individuals,
            fitnesses,
        })
    }

    pub fn random(
        size: usize,
        n_bits: usize,
        evaluator: &mut Evaluator<'_>,
        rng: &mut crate::Rng,
    ) -> Result<Self> {
        let individuals = (0..size).map(|_| Chromosome::random(n_bits, rng)).collect();
        Self::evaluate(individuals, evaluator)
    }

    pub fn len(&self) -> usize {
        self.individuals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.individuals.is_empty()
    }

    /// Index of the fittest individual, lowest index on ties.
    pub fn best_index(&self) -> usize {
        let mut best = 0;
        for (i, &f) in self.fitnesses.iter().enumerate() {
            if f > self.fitnesses[best] {
                best = i;
            }
        }
        best
    }

    pub fn stats(&self) -> PopulationStats {
        let n = self.fitnesses.len() as f64;
        let sum: f64 = self.fitnesses.iter().sum();
        let mean = sum / n;
        let var = self.fitnesses.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / n;
        PopulationStats {
            best: self.fitnesses.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            worst: self.fitnesses.iter().copied().fold(f64::INFINITY, f64::min),
            mean,
            stddev: var.sqrt(),
            sum,
        }
    }
}

pub fn init_population(
    cfg: &GaConfig,
    evaluator: &mut Evaluator<'_>,
    rng: &mut crate::Rng,
) -> Result<Population> {
    let n_bits = evaluator.instance().n_bits();
    if n_bits < 3 {
        return Err(Error::arg("chromosomes need at least 3 bits"));
    }
    Population::random(cfg.population, n_bits, evaluator, rng)
}

/// Selection weights `f_i - min(f) + epsilon`.
pub fn scale_windowing(fitnesses: &[f64], epsilon: f64) -> Vec<f64> {
    let min = fitnesses.iter().copied().fold(f64::INFINITY, f64::min);
    fitnesses.iter().map(|f| f - min + epsilon).collect()
}

/// Cumulative roulette wheel over positive weights.
#[derive(Clone, Debug)]
pub struct Roulette {
    cumulative: Vec<f64>,
}

impl Roulette {
    pub fn new(weights: &[f64]) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Invariant("roulette over no weights".into()));
        }
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
            return Err(Error::Invariant(format!("non-positive roulette weight {w}")));
        }
        let mut acc = 0.0;
        let cumulative = weights
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        Ok(Self { cumulative })
    }

    /// One uniform draw.
    pub fn spin(&self, rng: &mut crate::Rng) -> usize {
        let total = *self.cumulative.last().expect("non-empty");
        let r = rng.random::<f64>() * total;
        self.cumulative
            .partition_point(|&c| c <= r)
            .min(self.cumulative.len() - 1)
    }
}

pub fn roulette_select(weights: &[f64], rng: &mut crate::Rng) -> Result<usize> {
    Ok(Roulette::new(weights)?.spin(rng))
}

/// With probability `p_c` swaps tails at a uniform cut in `[1, L-1]`.
pub fn one_point_crossover(
    a: &Chromosome,
    b: &Chromosome,
    p_c: f64,
    rng: &mut crate::Rng,
) -> Result<(Chromosome, Chromosome)> {
    if a.len() != b.len() {
        return Err(Error::arg(format!(
            "crossover parents differ in length: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    if a.len() < 2 {
        return Err(Error::arg("crossover needs chromosomes of length >= 2"));
    }
    if rng.random::<f64>() >= p_c {
        return Ok((a.clone(), b.clone()));
    }
    let cut = rng.random_range(1..a.len());
    Ok(cross_at(a, b, cut))
}

pub(crate) fn cross_at(a: &Chromosome, b: &Chromosome, cut: usize) -> (Chromosome, Chromosome) {
    let (a, b) = (a.bits(), b.bits());
    let child = |head: &[bool], tail: &[bool]| {
        Chromosome::from_bits(head[..cut].iter().chain(&tail[cut..]).copied().collect())
    };
    (child(a, b), child(b, a))
}

/// Flips each bit with probability `p_m`, one draw per bit in index order.
pub fn mutate(chrom: &mut Chromosome, p_m: f64, rng: &mut crate::Rng) {
    for bit in chrom.bits_mut() {
        if rng.random::<f64>() < p_m {
            *bit = !*bit;
        }
    }
}

/// Breeds the offspring population from `pop` at mutation rate `p_m`.
pub fn breed(
    pop: &Population,
    cfg: &GaConfig,
    p_m: f64,
    evaluator: &mut Evaluator<'_>,
    rng: &mut crate::Rng,
) -> Result<Population> {
    let wheel = Roulette::new(&scale_windowing(&pop.fitnesses, cfg.window_epsilon))?;
    let mut offspring = Vec::with_capacity(pop.len());
    for _ in 0..pop.len() / 2 {
        let i = wheel.spin(rng);
        let j = wheel.spin(rng);
        let (mut a, mut b) =
            one_point_crossover(&pop.individuals[i], &pop.individuals[j], cfg.crossover, rng)?;
        mutate(&mut a, p_m, rng);
        mutate(&mut b, p_m, rng);
        offspring.push(a);
        offspring.push(b);
    }
    Population::evaluate(offspring, evaluator)
}

/// Neoteny state threaded through the generation loop.
#[derive(Clone, Debug)]
pub struct NeotenyHooks {
    pub config: NeotenyConfig,
    pub archive: NeotenyArchive,
    pub events: Vec<InjectionEvent>,
}

impl NeotenyHooks {
    pub fn new(config: NeotenyConfig) -> Self {
        Self {
            config,
            archive: NeotenyArchive::new(),
            events: Vec::new(),
        }
    }

    fn capture(&mut self, g: usize, pop: &Population) {
        self.archive.capture(&self.config.capture, g, pop);
    }
}

/// Produces generation `g` from generation `g - 1`, then runs the capture
/// and injection hooks for `g`.
pub fn step_generation(
    pop: &Population,
    g: usize,
    cfg: &GaConfig,
    evaluator: &mut Evaluator<'_>,
    hooks: Option<&mut NeotenyHooks>,
    rng: &mut crate::Rng,
) -> Result<Population> {
    debug_assert!(g >= 1);
    let p_m = cfg.schedule.rate(g - 1)?;
    let mut next = breed(pop, cfg, p_m, evaluator, rng)?;
    if let Some(hooks) = hooks {
        hooks.capture(g, &next);
        let events = neoteny::inject(&mut next, &hooks.archive, &hooks.config, g, evaluator, rng)?;
        hooks.events.extend(events);
    }
    Ok(next)
}

/// One row of the convergence trace.
///
/// `mutation_rate` is the rate used to breed generation `g + 1` from `g`
/// (held at its final value past a bounded schedule).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceRow {
    pub generation: usize,
    pub best: f64,
    pub mean: f64,
    pub stddev: f64,
    pub mutation_rate: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BestEver {
    pub chromosome: Chromosome,
    pub fitness: f64,
    pub generation: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunTrace {
    pub rows: Vec<TraceRow>,
    pub best_ever: BestEver,
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub trace: RunTrace,
    pub initial_stats: PopulationStats,
    pub best_assignment: Assignment,
    pub best_j: f64,
    pub final_population: Population,
    /// Present when neoteny was enabled.
    pub neoteny: Option<NeotenyHooks>,
}

fn row(g: usize, pop: &Population, schedule: &MutationSchedule) -> TraceRow {
    let s = pop.stats();
    TraceRow {
        generation: g,
        best: s.best,
        mean: s.mean,
        stddev: s.stddev,
        mutation_rate: schedule.rate_saturating(g),
    }
}

/// Runs `cfg.generations` generations from a seeded random population.
///
/// The trace holds `generations + 1` rows, row 0 being the initial
/// population. A disabled `neoteny` config behaves exactly like `None`.
pub fn run(cfg: &GaConfig, inst: &ProblemInstance, neoteny: Option<&NeotenyConfig>) -> Result<RunResult> {
    cfg.validate()?;
    let mut hooks = match neoteny {
        Some(n) if n.enabled => {
            n.validate(cfg.population, cfg.generations)?;
            Some(NeotenyHooks::new(*n))
        }
        _ => None,
    };

    let mut rng = crate::rng_from_seed(cfg.seed);
    let mut evaluator = Evaluator::new(inst);
    let mut pop = init_population(cfg, &mut evaluator, &mut rng)?;
    if let Some(h) = hooks.as_mut() {
        h.capture(0, &pop);
    }
    let initial_stats = pop.stats();

    let mut rows = Vec::with_capacity(cfg.generations + 1);
    rows.push(row(0, &pop, &cfg.schedule));
    let b = pop.best_index();
    let mut best_ever = BestEver {
        chromosome: pop.individuals[b].clone(),
        fitness: pop.fitnesses[b],
        generation: 0,
    };

    for g in 1..=cfg.generations {
        let started = Instant::now();
        pop = step_generation(&pop, g, cfg, &mut evaluator, hooks.as_mut(), &mut rng)?;
        if let Some(budget) = cfg.generation_budget {
            let elapsed = started.elapsed();
            if elapsed > budget {
                return Err(Error::TimeBudget {
                    generation: g,
                    elapsed_ms: elapsed.as_millis(),
                    budget_ms: budget.as_millis(),
                });
            }
        }
        let r = row(g, &pop, &cfg.schedule);
        if r.best > best_ever.fitness {
            let b = pop.best_index();
            best_ever = BestEver {
                chromosome: pop.individuals[b].clone(),
                fitness: pop.fitnesses[b],
                generation: g,
            };
        }
        rows.push(r);
    }

    let best_assignment = objective::decode(&best_ever.chromosome, inst)?;
    let best_j = objective::objective_j(&best_assignment, inst)?;
    Ok(RunResult {
        trace: RunTrace { rows, best_ever },
        initial_stats,
        best_assignment,
        best_j,
        final_population: pop,
        neoteny: hooks,
    })
}
