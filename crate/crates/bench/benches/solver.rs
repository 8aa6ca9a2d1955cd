use criterion::{criterion_group, criterion_main, BatchSize, Criterion};

use compfw_bench::tasks;
use compfw_core::solver::run;
use compfw_core::{Schedule, SolverConfig, Variant};

const K: usize = 64;

// Whole runs with recording only at the end, so the time is dominated by the
// per-step oracle calls, tracker updates and GLMO solves.
fn steps(c: &mut Criterion) {
    let mut group = c.benchmark_group("solver_steps");
    group.sample_size(10);
    let problem = tasks().swap_remove(0);
    let y0 = problem.domain.default_start();
    for (variant, schedule) in [
        (Variant::Variant1, Schedule::nonconvex_constant(K, 2.0).unwrap()),
        (Variant::Variant2, Schedule::nonconvex_constant(K, 2.0).unwrap()),
        (Variant::Storm, Schedule::storm_constant(K, 2.0).unwrap()),
        (Variant::VanillaScfw, Schedule::nonconvex_constant(K, 2.0).unwrap()),
    ] {
        let cfg = SolverConfig::new(variant, schedule, K, 1).with_record_every(K);
        group.bench_function(format!("{}_K{K}", variant.name()), |b| {
            b.iter_batched(|| cfg.clone(), |cfg| run(&problem, &cfg, &y0).unwrap(), BatchSize::SmallInput)
        });
    }
    group.finish();
}

criterion_group!(benches, steps);
criterion_main!(benches);
