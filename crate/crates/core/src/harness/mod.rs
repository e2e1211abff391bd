//! Experiment driver: single runs, seed sweeps and strategy grids, with
//! CSV traces and PGM segmentations written to disk.
//!
//! Layout of one run directory:
//!
//! ```text
//! trace.csv      g,best,avg,stddev,pm   (one row per generation, g = 0..=g_max)
//! initial.txt    R=<seed>  best=… worst=… avg=… std=… sum=…
//! summary.txt    key=value lines
//! labels.pgm     label map of the best assignment
//! mask_<i>.pgm   binary mask of cluster i
//! ```

mod batch;
mod synthetic;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;

pub use batch::{batch, BatchSpec, Strategy, SummaryRow, SummaryTable};
pub use synthetic::{make_synthetic_image, SyntheticSpec, PALETTE};

use crate::error::{Error, Result};
use crate::ga::{self, GaConfig, PopulationStats, RunResult, RunTrace};
use crate::image_io::{self, ImageRgb, LabelImage};
use crate::neoteny::NeotenyConfig;
use crate::objective::{Assignment, ProblemInstance};
use crate::prepartition::{self, WeightedCell, DEFAULT_CUBE_SIDE};
use crate::schedules::ScheduleSpec;

/// Seconds per generation reported for a 100 × 531-bit population on the
/// original hardware; the harness guard scales it by instance size.
pub const REFERENCE_GENERATION_SECONDS: f64 = 0.0693;
/// A generation slower than this multiple of the scaled reference aborts.
pub const GENERATION_BUDGET_FACTOR: f64 = 100.0;

#[derive(Clone, Debug, PartialEq)]
pub enum ImageSource {
    Path(PathBuf),
    Synthetic(SyntheticSpec),
}

impl ImageSource {
    pub fn load(&self) -> Result<ImageRgb> {
        match self {
            Self::Path(p) => {
                let bytes = fs::read(p).map_err(|e| {
                    Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", p.display())))
                })?;
                image_io::read_ppm(&bytes)
            }
            Self::Synthetic(s) => make_synthetic_image(s),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub image: ImageSource,
    pub seeds: Vec<u64>,
    pub population: usize,
    pub generations: usize,
    pub crossover: f64,
    pub schedule: ScheduleSpec,
    pub clusters: usize,
    pub neoteny: NeotenyConfig,
    pub cube_side: u32,
    pub window_epsilon: f64,
    pub out_dir: PathBuf,
}

impl ExperimentSpec {
    pub fn new(image: ImageSource, out_dir: impl Into<PathBuf>) -> Self {
        Self {
            image,
            seeds: vec![9],
            population: ga::DEFAULT_POPULATION,
            generations: ga::DEFAULT_GENERATIONS,
            crossover: ga::DEFAULT_CROSSOVER,
            schedule: ScheduleSpec::Linear {
                p0: crate::schedules::DEFAULT_P0,
                cut: crate::schedules::DEFAULT_CUT,
            },
            clusters: 6,
            neoteny: NeotenyConfig::default(),
            cube_side: DEFAULT_CUBE_SIDE,
            window_epsilon: ga::DEFAULT_WINDOW_EPSILON,
            out_dir: out_dir.into(),
        }
    }

    /// Builds the GA configuration for one seed over an `n_bits` chromosome.
    pub fn ga_config(&self, seed: u64, n_bits: usize) -> Result<GaConfig> {
        let schedule = self.schedule.bind(n_bits, self.generations.max(2))?;
        let cfg = GaConfig {
            population: self.population,
            generations: self.generations,
            crossover: self.crossover,
            schedule,
            seed,
            window_epsilon: self.window_epsilon,
            generation_budget: Some(generation_budget(self.population, n_bits)),
        };
        cfg.validate()?;
        self.neoteny.validate(self.population, self.generations)?;
        Ok(cfg)
    }
}

/// Wall-clock ceiling for one generation.
pub fn generation_budget(population: usize, n_bits: usize) -> Duration {
    let scaled = REFERENCE_GENERATION_SECONDS * (population as f64 / 100.0) * (n_bits as f64 / 531.0);
    Duration::from_secs_f64((scaled * GENERATION_BUDGET_FACTOR).max(1.0))
}

/// Image reduced to its clustering instance.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub image: ImageRgb,
    pub cells: Vec<WeightedCell>,
    pub instance: ProblemInstance,
    pub cube_side: u32,
}

pub fn prepare(image: ImageRgb, clusters: usize, cube_side: u32) -> Result<Prepared> {
    let hist = prepartition::build_histogram(&image);
    let cells = prepartition::partition_cells_with(&hist, cube_side)?;
    let instance = ProblemInstance::from_cells(&cells, clusters)?;
    Ok(Prepared {
        image,
        cells,
        instance,
        cube_side,
    })
}

/// Labels every pixel with the cluster of its cube cell.
pub fn segment_image(
    image: &ImageRgb,
    assignment: &Assignment,
    cells: &[WeightedCell],
    cube_side: u32,
) -> Result<LabelImage> {
    if assignment.cluster_of.len() != cells.len() {
        return Err(Error::arg("assignment does not match the cell list"));
    }
    let labels = image
        .pixels()
        .iter()
        .map(|&px| {
            prepartition::cell_position(cells, px, cube_side)
                .map(|i| assignment.cluster_of[i])
                .ok_or_else(|| Error::Invariant(format!("pixel {px:?} falls in no known cell")))
        })
        .collect::<Result<_>>()?;
    LabelImage::new(image.width(), image.height(), labels)
}

/// Formats `x` with 9 significant digits.
pub fn sig9(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..15).contains(&exp) {
        format!("{:.*}", (8 - exp).max(0) as usize, x)
    } else {
        format!("{x:.8e}")
    }
}

pub fn trace_csv(trace: &RunTrace) -> String {
    let mut out = String::from("g,best,avg,stddev,pm\n");
    for r in &trace.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.generation,
            sig9(r.best),
            sig9(r.mean),
            sig9(r.stddev),
            sig9(r.mutation_rate)
        );
    }
    out
}

/// Initial-population line: `R=<seed>  best=… worst=… avg=… std=… sum=…`.
pub fn initial_stats_line(seed: u64, s: &PopulationStats) -> String {
    format!(
        "R={seed}  best={} worst={} avg={} std={} sum={}",
        sig9(s.best),
        sig9(s.worst),
        sig9(s.mean),
        sig9(s.stddev),
        sig9(s.sum)
    )
}

pub fn cells_csv(cells: &[WeightedCell]) -> String {
    let mut out = String::from("i,j,k,r,g,b,weight\n");
    for c in cells {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            c.index[0], c.index[1], c.index[2], c.center[0], c.center[1], c.center[2], c.weight
        );
    }
    out
}

/// What one seed's run left behind.
#[derive(Clone, Debug)]
pub struct SeedOutcome {
    pub seed: u64,
    pub dir: PathBuf,
    pub final_fitness: f64,
    pub best_j: f64,
    pub best_generation: usize,
    pub wall_time: Duration,
    pub result: RunResult,
}

/// Runs one seed on a prepared instance and writes its artifacts to `dir`.
pub fn run_seed(
    spec: &ExperimentSpec,
    prepared: &Prepared,
    seed: u64,
    dir: &Path,
) -> Result<SeedOutcome> {
    let cfg = spec.ga_config(seed, prepared.instance.n_bits())?;
    let started = Instant::now();
    let result = ga::run(&cfg, &prepared.instance, Some(&spec.neoteny))?;
    let wall_time = started.elapsed();

    fs::create_dir_all(dir)?;
    fs::write(dir.join("trace.csv"), trace_csv(&result.trace))?;
    fs::write(
        dir.join("initial.txt"),
        initial_stats_line(seed, &result.initial_stats) + "\n",
    )?;

    let labels = segment_image(
        &prepared.image,
        &result.best_assignment,
        &prepared.cells,
        prepared.cube_side,
    )?;
    let clusters = prepared.instance.clusters();
    fs::write(dir.join("labels.pgm"), image_io::write_label_pgm(&labels, clusters)?)?;
    for c in 0..clusters {
        fs::write(
            dir.join(format!("mask_{c}.pgm")),
            image_io::write_cluster_mask(&labels, c, clusters)?,
        )?;
    }

    let best = &result.trace.best_ever;
    let (archive, injections) = result
        .neoteny
        .as_ref()
        .map_or((0, 0), |h| (h.archive.len(), h.events.len()));
    let summary = format!(
        "seed={seed}\nschedule={}\nneoteny={}\ngenerations={}\npopulation={}\ncells={}\nbits={}\n\
         final_fitness={}\nbest_j={}\nbest_generation={}\nbest_chromosome={}\n\
         archive_size={archive}\ninjections={injections}\nwall_time_s={:.3}\n",
        spec.schedule,
        if spec.neoteny.enabled {
            format!(
                "rate={} capture={} inject={} with_random={}",
                spec.neoteny.rate, spec.neoteny.capture, spec.neoteny.inject, spec.neoteny.with_random
            )
        } else {
            "off".into()
        },
        spec.generations,
        spec.population,
        prepared.cells.len(),
        prepared.instance.n_bits(),
        sig9(best.fitness),
        sig9(result.best_j),
        best.generation,
        best.chromosome.to_str01(),
        wall_time.as_secs_f64(),
    );
    fs::write(dir.join("summary.txt"), summary)?;

    Ok(SeedOutcome {
        seed,
        dir: dir.to_path_buf(),
        final_fitness: best.fitness,
        best_j: result.best_j,
        best_generation: best.generation,
        wall_time,
        result,
    })
}

/// Runs every seed of `spec` (concurrently) into `out_dir/seed_<s>/`.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<SeedOutcome>> {
    if spec.seeds.is_empty() {
        return Err(Error::config("at least one seed is required"));
    }
    let prepared = prepare(spec.image.load()?, spec.clusters, spec.cube_side)?;
    // Reject bad configurations before any output is written.
    spec.ga_config(spec.seeds[0], prepared.instance.n_bits())?;
    fs::create_dir_all(&spec.out_dir)?;
    fs::write(spec.out_dir.join("cells.csv"), cells_csv(&prepared.cells))?;
    spec.seeds
        .par_iter()
        .map(|&seed| run_seed(spec, &prepared, seed, &spec.out_dir.join(format!("seed_{seed}"))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(sig9(201.611623), "201.611623");
        assert_eq!(sig9(0.15), "0.150000000");
        assert_eq!(sig9(0.0015), "0.00150000000");
        assert_eq!(sig9(1e18), "1.00000000e18");
        assert_eq!(sig9(0.0), "0");
        assert_eq!(sig9(-2.5), "-2.50000000");
    }

    #[test]
    fn segmentation_cases() {
        let uniform = ImageRgb::new(3, 2, vec![[10, 20, 30]; 6]).unwrap();
        let p = prepare(uniform.clone(), 2, 32).unwrap();
        let a = Assignment { cluster_of: vec![1] };
        let l = segment_image(&uniform, &a, &p.cells, 32).unwrap();
        assert_eq!(l.labels, vec![1; 6]);

        let two = ImageRgb::new(2, 1, vec![[0, 0, 0], [200, 200, 200]]).unwrap();
        let p = prepare(two.clone(), 2, 32).unwrap();
        let l = segment_image(&two, &Assignment { cluster_of: vec![0, 1] }, &p.cells, 32).unwrap();
        assert_eq!(l.labels, vec![0, 1]);

        let same_cell = ImageRgb::new(2, 1, vec![[0, 0, 0], [31, 5, 9]]).unwrap();
        let p = prepare(same_cell.clone(), 3, 32).unwrap();
        for c in 0..3 {
            let l = segment_image(&same_cell, &Assignment { cluster_of: vec![c] }, &p.cells, 32).unwrap();
            assert_eq!(l.labels, vec![c, c]);
        }

        let foreign = ImageRgb::new(1, 1, vec![[255, 255, 255]]).unwrap();
        assert!(matches!(
            segment_image(&foreign, &Assignment { cluster_of: vec![0] }, &p.cells, 32),
            Err(Error::Invariant(_))
        ));
    }

    #[test]
    fn budget_scales_with_floor() {
        assert_eq!(generation_budget(10, 12), Duration::from_secs(1));
        let big = generation_budget(100, 531);
        assert!((big.as_secs_f64() - 6.93).abs() < 1e-9);
    }
}
