use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, BenchmarkId, Criterion};
use mtcgp::{
    contributions, decode, evaluate_outputs, fitness, mutate, node_weights, random_genome,
    run_multibehavior, run_single_task_suite, EsConfig, FitnessMode, GenomeParams, MutationWeights,
    TaskSuite, WeightScheme,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn genomes(n_nodes: usize, n_outputs: usize, count: usize) -> Vec<mtcgp::Genome> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    (0..count)
        .map(|_| random_genome(GenomeParams::new(2, n_nodes, n_outputs), &mut rng).unwrap())
        .collect()
}

fn bench_evaluate(c: &mut Criterion) {
    let mut group = c.benchmark_group("evaluate");
    for n in [20, 50, 100] {
        let gs = genomes(n, 9, 64);
        group.bench_with_input(BenchmarkId::new("outputs", n), &gs, |b, gs| {
            b.iter(|| {
                for g in gs {
                    black_box(evaluate_outputs(g).unwrap());
                }
            })
        });
        let suite = TaskSuite::canonical();
        let assignment = suite.full_assignment();
        group.bench_with_input(BenchmarkId::new("fitness", n), &gs, |b, gs| {
            b.iter(|| {
                for g in gs {
                    black_box(fitness(g, &suite, &assignment).unwrap());
                }
            })
        });
    }
    group.finish();
}

fn bench_decode(c: &mut Criterion) {
    let mut group = c.benchmark_group("decode");
    for n in [20, 50, 100] {
        let gs = genomes(n, 9, 64);
        group.bench_with_input(BenchmarkId::new("active_set", n), &gs, |b, gs| {
            b.iter(|| {
                for g in gs {
                    black_box(decode(g));
                }
            })
        });
        let suite = TaskSuite::canonical();
        let assignment = suite.full_assignment();
        let scheme = WeightScheme::exponential(5.0, 0.0);
        group.bench_with_input(BenchmarkId::new("weights", n), &gs, |b, gs| {
            b.iter(|| {
                for g in gs {
                    let cmap = contributions(g, &assignment).unwrap();
                    let f = fitness(g, &suite, &assignment).unwrap();
                    black_box(node_weights(&cmap, &f, &scheme).unwrap());
                }
            })
        });
    }
    group.finish();
}

fn bench_mutate(c: &mut Criterion) {
    let mut group = c.benchmark_group("mutate");
    for rate in [0.05, 0.5] {
        let g = genomes(50, 9, 1).pop().unwrap();
        let w = MutationWeights::uniform(&g.params, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        group.bench_function(BenchmarkId::new("n50", rate), |b| {
            b.iter(|| black_box(mutate(&g, rate, &w, &mut rng).unwrap()))
        });
    }
    group.finish();
}

fn bench_runs(c: &mut Criterion) {
    let suite = TaskSuite::canonical();
    let mut group = c.benchmark_group("run");
    group.sample_size(20);
    let mut seed = 0u64;
    group.bench_function("single_task_suite_n20", |b| {
        b.iter_batched(
            || {
                seed += 1;
                EsConfig::new(GenomeParams::new(2, 20, 1), 0.3, 50_000_000, seed)
            },
            |cfg| black_box(run_single_task_suite(&cfg, &suite).unwrap()),
            BatchSize::SmallInput,
        )
    });
    group.bench_function("multi_exponential_n50_binary", |b| {
        b.iter_batched(
            || {
                seed += 1;
                let mut cfg = EsConfig::new(GenomeParams::new(2, 50, 9), 0.9, 50_000_000, seed)
                    .with_scheme(WeightScheme::exponential(10.0, 0.0));
                cfg.fitness_mode = FitnessMode::Binary;
                cfg
            },
            |cfg| black_box(run_multibehavior(&cfg, &suite).unwrap()),
            BatchSize::SmallInput,
        )
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_evaluate,
    bench_decode,
    bench_mutate,
    bench_runs
);
criterion_main!(benches);
