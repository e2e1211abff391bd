use criterion::{criterion_group, criterion_main, BatchSize, Criterion};

use neoseg_bench::fixture_instance;
use neoseg_core::ga::{self, GaConfig};
use neoseg_core::objective::Evaluator;
use neoseg_core::schedules::MutationSchedule;
use neoseg_core::{rng_from_seed, Chromosome};

fn evaluate(c: &mut Criterion) {
    let inst = fixture_instance();
    let mut rng = rng_from_seed(1);
    let chrom = Chromosome::random(inst.n_bits(), &mut rng);
    let mut ev = Evaluator::new(&inst);
    c.bench_function("fitness/fixture", |b| b.iter(|| ev.fitness(&chrom).unwrap()));
}

fn generation(c: &mut Criterion) {
    let inst = fixture_instance();
    let cfg = GaConfig::new(MutationSchedule::linear(0.15, 100).unwrap(), 9);
    let mut ev = Evaluator::new(&inst);
    let mut rng = rng_from_seed(9);
    let pop = ga::init_population(&cfg, &mut ev, &mut rng).unwrap();
    c.bench_function("step_generation/P100", |b| {
        b.iter_batched(
            || rng_from_seed(3),
            |mut rng| ga::step_generation(&pop, 1, &cfg, &mut ev, None, &mut rng).unwrap(),
            BatchSize::SmallInput,
        )
    });
}

fn short_run(c: &mut Criterion) {
    let inst = fixture_instance();
    let mut cfg = GaConfig::new(MutationSchedule::linear(0.15, 100).unwrap(), 9);
    cfg.generations = 100;
    let mut group = c.benchmark_group("run");
    group.sample_size(10);
    group.bench_function("ld/100_generations", |b| b.iter(|| ga::run(&cfg, &inst, None).unwrap()));
    group.finish();
}

criterion_group!(benches, evaluate, generation, short_run);
criterion_main!(benches);
