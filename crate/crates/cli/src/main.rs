//! `neoseg` command-line front end.

use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use neoseg_core::harness::{
    self, BatchSpec, ExperimentSpec, ImageSource, Strategy, SyntheticSpec,
};
use neoseg_core::neoteny::{GenerationWindow, NeotenyConfig};
use neoseg_core::schedules::ScheduleSpec;
use neoseg_core::{image_io, oracle, ProblemInstance};

#[derive(Parser, Debug)]
#[command(name = "neoseg", version, about = "GA color clustering with neotenic re-injection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one configuration for each --seed.
    Run(RunArgs),
    /// Run a strategy × seed grid and write summary.csv.
    Batch(BatchArgs),
    /// Exhaustive optimum (and Lloyd baseline) for a small instance.
    Oracle(OracleArgs),
    /// Write a synthetic test image as PPM.
    Synth(SynthArgs),
}

#[derive(Args, Debug)]
struct ImageArgs {
    /// Input PPM (P3 or P6, maxval 255).
    #[arg(long, conflicts_with = "synthetic", required_unless_present = "synthetic")]
    image: Option<PathBuf>,
    /// Synthetic image instead of a file: k,w,h,noise,seed.
    #[arg(long)]
    synthetic: Option<SyntheticSpec>,
}

impl ImageArgs {
    fn source(&self) -> Result<ImageSource> {
        match (&self.image, &self.synthetic) {
            (Some(p), None) => Ok(ImageSource::Path(p.clone())),
            (None, Some(s)) => Ok(ImageSource::Synthetic(*s)),
            _ => bail!("exactly one of --image or --synthetic is required"),
        }
    }
}

#[derive(Args, Debug)]
struct GaArgs {
    #[command(flatten)]
    image: ImageArgs,
    /// Random seed; repeat for several runs.
    #[arg(long = "seed", default_values_t = [9u64])]
    seeds: Vec<u64>,
    #[arg(long, default_value_t = 3000)]
    generations: usize,
    /// Crossover probability.
    #[arg(long, default_value_t = 0.8)]
    pc: f64,
    #[arg(long, default_value_t = 6)]
    clusters: usize,
    #[arg(long, default_value_t = 100)]
    pop: usize,
    /// Enable neotenic capture and re-injection.
    #[arg(long)]
    neoteny: bool,
    /// Average injections per generation.
    #[arg(long, default_value_t = 1.0)]
    neoteny_rate: f64,
    /// Capture window A:B (inclusive).
    #[arg(long, default_value = "1:100")]
    capture: GenerationWindow,
    /// Injection window A:B (inclusive).
    #[arg(long, default_value = "1000:3000")]
    inject: GenerationWindow,
    /// Pair every injection with a freshly random individual.
    #[arg(long)]
    with_random: bool,
    /// Pre-partition cube side (power of two).
    #[arg(long, default_value_t = 32)]
    cube_side: u32,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

impl GaArgs {
    fn spec(&self, schedule: ScheduleSpec) -> Result<ExperimentSpec> {
        Ok(ExperimentSpec {
            image: self.image.source()?,
            seeds: self.seeds.clone(),
            population: self.pop,
            generations: self.generations,
            crossover: self.pc,
            schedule,
            clusters: self.clusters,
            neoteny: NeotenyConfig {
                enabled: self.neoteny,
                capture: self.capture,
                inject: self.inject,
                rate: self.neoteny_rate,
                with_random: self.with_random,
            },
            cube_side: self.cube_side,
            window_epsilon: neoseg_core::ga::DEFAULT_WINDOW_EPSILON,
            out_dir: self.out.clone(),
        })
    }
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    ga: GaArgs,
    /// Mutation schedule: c[:p0], ld[:p0[:cut]], qd[:p0[:cut]], back[:p0].
    #[arg(long, default_value = "ld")]
    pm: ScheduleSpec,
}

#[derive(Args, Debug)]
struct BatchArgs {
    #[command(flatten)]
    ga: GaArgs,
    /// Strategy preset (C, LD, QD, LD/N, QD/N, LD/N+R, QD/N+R, B0.15, B0.50)
    /// or label=schedule[+n][+r]. Defaults to the seven classic rows.
    #[arg(long = "strategy")]
    strategies: Vec<Strategy>,
}

#[derive(Args, Debug)]
struct OracleArgs {
    /// Comma-separated coordinates on one color axis.
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["image", "synthetic"])]
    axis: Vec<f64>,
    /// Weights for --axis points (default all 1).
    #[arg(long, value_delimiter = ',')]
    weights: Vec<f64>,
    #[arg(long)]
    image: Option<PathBuf>,
    #[arg(long)]
    synthetic: Option<SyntheticSpec>,
    #[arg(long, default_value_t = 2)]
    clusters: usize,
    /// Also report the best of this many Lloyd descents.
    #[arg(long, default_value_t = 10)]
    lloyd_restarts: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args, Debug)]
struct SynthArgs {
    /// k,w,h,noise,seed
    #[arg(long, default_value_t = SyntheticSpec::FIXTURE)]
    spec: SyntheticSpec,
    /// Write ASCII P3 instead of binary P6.
    #[arg(long)]
    ascii: bool,
    #[arg(long)]
    out: PathBuf,
}

fn run(args: RunArgs) -> Result<()> {
    let spec = args.ga.spec(args.pm)?;
    let mut out = io::stdout().lock();
    for o in harness::run_experiment(&spec)? {
        writeln!(
            out,
            "seed={} final_fitness={} best_j={} best_generation={} wall_time_s={:.3} dir={}",
            o.seed,
            harness::sig9(o.final_fitness),
            harness::sig9(o.best_j),
            o.best_generation,
            o.wall_time.as_secs_f64(),
            o.dir.display()
        )?;
        writeln!(out, "{}", harness::initial_stats_line(o.seed, &o.result.initial_stats))?;
    }
    Ok(())
}

fn batch(args: BatchArgs) -> Result<()> {
    let strategies = if args.strategies.is_empty() {
        Strategy::table_presets()
    } else {
        args.strategies
    };
    let base = args.ga.spec(ScheduleSpec::Linear { p0: 0.15, cut: 100 })?;
    let table = harness::batch(&BatchSpec { base, strategies })?;
    io::stdout().lock().write_all(table.to_csv().as_bytes())?;
    for (label, seed, err) in table.errors() {
        eprintln!("cell {label} R={seed} failed: {err}");
    }
    Ok(())
}

fn oracle_cmd(args: OracleArgs) -> Result<()> {
    let inst = if !args.axis.is_empty() {
        let weights = if args.weights.is_empty() {
            vec![1.0; args.axis.len()]
        } else {
            args.weights.clone()
        };
        ProblemInstance::on_axis(&args.axis, &weights, args.clusters)?
    } else {
        let source = ImageArgs {
            image: args.image.clone(),
            synthetic: args.synthetic,
        }
        .source()
        .context("oracle needs --axis, --image or --synthetic")?;
        harness::prepare(source.load()?, args.clusters, 32)?.instance
    };
    let r = oracle::exhaustive_min_j(&inst)?;
    let mut out = io::stdout().lock();
    writeln!(out, "optimal_j={}", harness::sig9(r.optimal_j))?;
    writeln!(
        out,
        "assignment={}",
        r.optimal_assignment
            .cluster_of
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join(",")
    )?;
    writeln!(out, "assignments_evaluated={}", r.assignments_evaluated)?;
    if args.lloyd_restarts > 0 {
        let mut rng = neoseg_core::rng_from_seed(args.seed);
        let j = oracle::lloyd_kmeans(&inst, &mut rng, args.lloyd_restarts)?;
        writeln!(out, "lloyd_j={}", harness::sig9(j))?;
    }
    Ok(())
}

fn synth(args: SynthArgs) -> Result<()> {
    let img = harness::make_synthetic_image(&args.spec)?;
    let bytes = if args.ascii {
        image_io::encode_p3(&img)
    } else {
        image_io::encode_p6(&img)
    };
    std::fs::write(&args.out, bytes).with_context(|| format!("writing {}", args.out.display()))?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(a) => run(a),
        Command::Batch(a) => batch(a),
        Command::Oracle(a) => oracle_cmd(a),
        Command::Synth(a) => synth(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        // A closed downstream pipe (e.g. `| head`) is not a failure.
        Err(e) if e.downcast_ref::<io::Error>().is_some_and(|e| e.kind() == io::ErrorKind::BrokenPipe) => {
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
