use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;

use telefit::{
    phase1, phase3, simulate_dataset, summarize, ExpSumParams, McmcConfig, PriorSpec,
    ScheduleRule, TelescopeSchedule,
};

fn table_params() -> ExpSumParams {
    ExpSumParams::new(vec![0.8, 0.6, 0.4, 0.2, 0.1], 0.9, 0.5).unwrap()
}

fn bench_model(c: &mut Criterion) {
    let params = table_params();
    c.bench_function("eval_correlator_t12", |b| {
        b.iter(|| black_box(params.eval(black_box(12))))
    });
    let times: Vec<u32> = (1..=12).collect();
    c.bench_function("select_times_k3", |b| {
        b.iter(|| TelescopeSchedule::select(black_box(&times), 3, ScheduleRule::Ratio).unwrap())
    });
}

fn bench_phase1(c: &mut Criterion) {
    let ds = simulate_dataset(&table_params(), 12, 0.001, 23).unwrap();
    let y1 = *ds.point_at(12).unwrap();
    let priors = PriorSpec::default();
    let cfg = McmcConfig::new(1);
    c.bench_function("phase1_1000_iters", |b| {
        b.iter(|| phase1(black_box(&y1), &priors, &cfg, &[]).unwrap())
    });
}

fn bench_phase3(c: &mut Criterion) {
    let ds = simulate_dataset(&table_params(), 12, 0.001, 23).unwrap();
    let sched = TelescopeSchedule::select(&ds.times(), 2, ScheduleRule::Ratio).unwrap();
    let priors = PriorSpec::default();
    let mut cfg = McmcConfig::new(1);
    cfg.m = 50;
    cfg.c0 = 0.4;
    let mut group = c.benchmark_group("phase3");
    group.sample_size(10);
    group.bench_function("m50", |b| {
        b.iter(|| phase3(black_box(&ds), &sched, &priors, &cfg).unwrap())
    });
    group.finish();
}

fn bench_summarize(c: &mut Criterion) {
    let mut rng = telefit::rng::seeded(3);
    let draws: Vec<f64> = (0..10_000).map(|_| rand::Rng::gen::<f64>(&mut rng)).collect();
    c.bench_function("summarize_10k_draws", |b| {
        b.iter_batched(
            || draws.clone(),
            |d| summarize(&d, 50, 0.95).unwrap(),
            BatchSize::SmallInput,
        )
    });
}

criterion_group!(benches, bench_model, bench_phase1, bench_phase3, bench_summarize);
criterion_main!(benches);
