use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use reusable_alloc::assortment::{probability_match, run_astalg, run_astgalg};
use reusable_alloc::benchmarks::{clairvoyant_dp, run_greedy, run_ib};
use reusable_alloc::fluid::fluid_availability;
use reusable_alloc::harness::random::random_point_spec;
use reusable_alloc::model::draw_sample_path;
use reusable_alloc::rounding::{run_alg, DeltaSchedule};
use reusable_alloc::run_galg;
use reusable_alloc_bench::{assortment, dense, pmatch_cases, tiny};

fn guide(c: &mut Criterion) {
    let mut group = c.benchmark_group("galg");
    for cap in [1u32, 10, 100] {
        let inst = dense(10, 500, cap, "mixed");
        group.bench_with_input(BenchmarkId::from_parameter(cap), &inst, |b, inst| {
            b.iter(|| run_galg(black_box(inst)).unwrap())
        });
    }
    group.finish();
}

fn online(c: &mut Criterion) {
    let inst = dense(10, 500, 25, "mixed");
    let (plan, _) = run_galg(&inst).unwrap();
    let deltas = DeltaSchedule::standard(&inst);
    let path = draw_sample_path(&inst, 1);
    let mut group = c.benchmark_group("online");
    group.bench_function("alg", |b| {
        b.iter(|| run_alg(&inst, &plan, &deltas, black_box(&path)).unwrap())
    });
    group.bench_function("greedy", |b| b.iter(|| run_greedy(&inst, black_box(&path)).unwrap()));
    group.bench_function("ib", |b| b.iter(|| run_ib(&inst, black_box(&path)).unwrap()));
    group.bench_function("sample_path", |b| b.iter(|| draw_sample_path(black_box(&inst), 7)));
    group.finish();
}

fn fluid(c: &mut Criterion) {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
    let specs: Vec<_> = (0..64).map(|_| random_point_spec(&mut rng, 20)).collect();
    c.bench_function("fluid_recursion", |b| {
        b.iter(|| {
            specs
                .iter()
                .map(|s| fluid_availability(black_box(s)).reward)
                .sum::<f64>()
        })
    });
}

fn assortments(c: &mut Criterion) {
    let cases = pmatch_cases(64, 12);
    c.bench_function("probability_match", |b| {
        b.iter(|| {
            for (set, model, targets) in &cases {
                black_box(probability_match(set, model, targets).unwrap());
            }
        })
    });
    let inst = assortment(8, 200, 5, 3);
    c.bench_function("astgalg", |b| b.iter(|| run_astgalg(black_box(&inst)).unwrap()));
    let (plan, _) = run_astgalg(&inst).unwrap();
    let deltas = DeltaSchedule::standard(&inst);
    let path = draw_sample_path(&inst, 1);
    c.bench_function("astalg", |b| {
        b.iter(|| run_astalg(&inst, &plan, &deltas, black_box(&path)).unwrap())
    });
}

fn exact(c: &mut Criterion) {
    let instances = tiny(8);
    let mut group = c.benchmark_group("dp");
    group.sample_size(10);
    group.bench_function("tiny_x8", |b| {
        b.iter(|| {
            instances
                .iter()
                .filter_map(|i| clairvoyant_dp(black_box(i)).ok())
                .sum::<f64>()
        })
    });
    group.finish();
}

criterion_group!(benches, guide, online, fluid, assortments, exact);
criterion_main!(benches);
