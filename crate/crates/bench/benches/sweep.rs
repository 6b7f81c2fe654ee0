use criterion::{criterion_group, criterion_main, Criterion};
use lsgd_core::experiments::{experiment_config, sweep_serial, Example};
use lsgd_core::{sweep, PolarGrid, SigmaSchedule};

fn grid() -> PolarGrid {
    PolarGrid {
        r_min: 0.1,
        r_max: 0.5,
        r_step: 0.1,
        theta_min_deg: -180.0,
        theta_max_deg: 180.0,
        theta_step_deg: 1.0,
    }
}

fn sweeps(c: &mut Criterion) {
    let objective = Example::Two.objective();
    let cfg = experiment_config();
    let sched = SigmaSchedule::RatioMonotone { offset: 1 };
    let mut group = c.benchmark_group("polar_sweep");
    group.sample_size(10);
    group.bench_function("parallel", |b| {
        b.iter(|| sweep(&objective, &grid(), &cfg, &sched).unwrap())
    });
    group.bench_function("serial", |b| {
        b.iter(|| sweep_serial(&objective, &grid(), &cfg, &sched).unwrap())
    });
    group.bench_function("gd_serial", |b| {
        b.iter(|| sweep_serial(&objective, &grid(), &cfg, &SigmaSchedule::GD).unwrap())
    });
    group.finish();
}

criterion_group!(benches, sweeps);
criterion_main!(benches);
