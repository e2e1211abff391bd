//! Neotenic re-injection.
//!
//! During the capture window the best individual of every generation is
//! copied into an archive. During the later injection window, each
//! generation overwrites randomly chosen population slots with randomly
//! chosen archive entries, on average `rate` times per generation. The
//! `with_random` variant pairs each neotenic injection with a freshly
//! randomised chromosome written to a second, distinct slot.

use std::fmt;
use std::str::FromStr;

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::ga::Population;
use crate::objective::{Chromosome, Evaluator};

/// Inclusive range of generations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GenerationWindow {
    pub first: usize,
    pub last: usize,
}

impl GenerationWindow {
    pub fn new(first: usize, last: usize) -> Result<Self> {
        if first > last {
            return Err(Error::arg(format!("empty generation window [{first},{last}]")));
        }
        Ok(Self { first, last })
    }

    pub fn contains(&self, g: usize) -> bool {
        (self.first..=self.last).contains(&g)
    }

    pub fn len(&self) -> usize {
        self.last - self.first + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Parses `A:B` (or `[A,B]`).
impl FromStr for GenerationWindow {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::arg(format!("bad generation window {s:?}, expected A:B"));
        let t = s.trim().trim_start_matches('[').trim_end_matches(']');
        let (a, b) = t.split_once([':', ',']).ok_or_else(bad)?;
        let a = a.trim().parse().map_err(|_| bad())?;
        let b = b.trim().parse().map_err(|_| bad())?;
        Self::new(a, b)
    }
}

impl fmt::Display for GenerationWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", self.first, self.last)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NeotenyConfig {
    pub enabled: bool,
    pub capture: GenerationWindow,
    pub inject: GenerationWindow,
    /// Expected number of injection events per generation.
    pub rate: f64,
    pub with_random: bool,
}

impl Default for NeotenyConfig {
    fn default() -> Self {
        Self {
            enabled: false,
            capture: GenerationWindow { first: 1, last: 100 },
            inject: GenerationWindow {
                first: 1000,
                last: 3000,
            },
            rate: 1.0,
            with_random: false,
        }
    }
}

impl NeotenyConfig {
    pub fn enabled() -> Self {
        Self {
            enabled: true,
            ..Self::default()
        }
    }

    /// Checks window ordering and that injection can always draw from a
    /// non-empty archive within `generations`.
    pub fn validate(&self, population: usize, generations: usize) -> Result<()> {
        if !self.enabled {
            return Ok(());
        }
        if self.capture.first > self.capture.last || self.inject.first > self.inject.last {
            return Err(Error::config("neoteny window has first > last"));
        }
        if self.capture.last >= self.inject.first {
            return Err(Error::config(format!(
                "capture window {} must end before injection window {} starts",
                self.capture, self.inject
            )));
        }
        if !(self.rate >= 0.0 && self.rate.is_finite()) {
            return Err(Error::config(format!("injection rate {} must be >= 0", self.rate)));
        }
        if self.inject.first <= generations && self.capture.first > generations {
            return Err(Error::config("injection window reachable but archive would be empty"));
        }
        if self.with_random && population < 2 {
            return Err(Error::config("random companion injection needs population >= 2"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ArchiveEntry {
    pub generation: usize,
    pub chromosome: Chromosome,
    pub fitness: f64,
}

/// Best-of-generation genotypes captured during the capture window.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct NeotenyArchive {
    entries: Vec<ArchiveEntry>,
}

impl NeotenyArchive {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn entries(&self) -> &[ArchiveEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Archives the population's best individual (lowest index on ties) if
    /// `g` lies in `window`. Returns whether an entry was added.
    pub fn capture(&mut self, window: &GenerationWindow, g: usize, pop: &Population) -> bool {
        if !window.contains(g) {
            return false;
        }
        let best = pop.best_index();
        self.entries.push(ArchiveEntry {
            generation: g,
            chromosome: pop.individuals[best].clone(),
            fitness: pop.fitnesses[best],
        });
        true
    }
}

/// `floor(rate)` plus one more with probability `frac(rate)`.
///
/// Consumes one uniform draw only when `rate` has a fractional part.
pub fn injection_count(rate: f64, rng: &mut crate::Rng) -> usize {
    let whole = rate.floor();
    let frac = rate - whole;
    let extra = frac > 0.0 && rng.random::<f64>() < frac;
    whole as usize + usize::from(extra)
}

/// One overwrite performed by [`inject`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InjectionEvent {
    pub generation: usize,
    pub slot: usize,
    pub archive_index: usize,
    /// Slot that received a fresh random chromosome, for the paired variant.
    pub random_slot: Option<usize>,
}

/// Overwrites population slots with archived genotypes for generation `g`.
///
/// Draw order per generation: the count draw (fractional rates only), then
/// per event the target slot, the archive entry, and for the paired variant
/// the companion slot followed by its chromosome bits.
pub fn inject(
    pop: &mut Population,
    archive: &NeotenyArchive,
    cfg: &NeotenyConfig,
    g: usize,
    evaluator: &mut Evaluator<'_>,
    rng: &mut crate::Rng,
) -> Result<Vec<InjectionEvent>> {
    if !cfg.enabled || !cfg.inject.contains(g) {
        return Ok(Vec::new());
    }
    if archive.is_empty() {
        return Err(Error::config(format!(
            "neotenic archive is empty at injection generation {g}"
        )));
    }
    let size = pop.len();
    let n_bits = pop.individuals[0].len();
    let count = injection_count(cfg.rate, rng);
    let mut events = Vec::with_capacity(count);
    for _ in 0..count {
        let slot = rng.random_range(0..size);
        let archive_index = rng.random_range(0..archive.len());
        let entry = &archive.entries[archive_index];
        pop.individuals[slot] = entry.chromosome.clone();
        pop.fitnesses[slot] = evaluator.fitness(&pop.individuals[slot])?;

        let random_slot = if cfg.with_random {
            let mut other = rng.random_range(0..size - 1);
            if other >= slot {
                other += 1;
            }
            pop.individuals[other] = Chromosome::random(n_bits, rng);
            pop.fitnesses[other] = evaluator.fitness(&pop.individuals[other])?;
            Some(other)
        } else {
            None
        };
        events.push(InjectionEvent {
            generation: g,
            slot,
            archive_index,
            random_slot,
        });
    }
    Ok(events)
}
