//! Genetic-algorithm clustering for color image segmentation.
//!
//! The pipeline is: decode a PPM image ([`image_io`]), collapse its color
//! histogram into at most 512 weighted cube cells ([`prepartition`]), and
//! search cluster assignments of those cells with a generational GA
//! ([`ga`]) that minimises the frequency-weighted K-means objective
//! ([`objective`]). Mutation rates follow one of the time-dependent
//! [`schedules`], and early elites can be archived and re-injected late in
//! the run ([`neoteny`]). [`oracle`] provides exhaustive and Lloyd baselines
//! for small instances, and [`harness`] drives experiments and writes the
//! CSV / PGM artifacts.

pub mod error;
pub mod ga;
pub mod harness;
pub mod image_io;
pub mod neoteny;
pub mod objective;
pub mod oracle;
pub mod prepartition;
pub mod schedules;

pub use error::{Error, Result};
pub use ga::{GaConfig, Population, RunResult, RunTrace, TraceRow};
pub use image_io::{ImageRgb, LabelImage};
pub use neoteny::{NeotenyArchive, NeotenyConfig};
pub use objective::{Assignment, Chromosome, ProblemInstance, WeightedPoint};
pub use prepartition::{ColorHistogram, WeightedCell};
pub use schedules::{MutationSchedule, ScheduleSpec};

/// Deterministic generator used for every stochastic step.
///
/// ChaCha8 seeded through `seed_from_u64`; the stream is stable across
/// platforms and crate versions pinned in the lockfile.
pub type Rng = rand_chacha::ChaCha8Rng;

/// Builds the run generator for `seed`.
pub fn rng_from_seed(seed: u64) -> Rng {
    use rand::SeedableRng;
    Rng::seed_from_u64(seed)
}
