//! Parallel against sequential execution of the same batched workloads.
//! Both modes produce identical bits, so only the wall time differs.
//! Without the `parallel` feature only the sequential rows are measured.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use chaos_core::charlier::{charlier_eval, CreationOperator};
use chaos_core::gamma::{gamma_inner_partition, LaguerreKernel, RankDecomposedKernel};
use chaos_core::mc::{Execution, McPlan};
use chaos_core::measures::{sample_compound_poisson, sample_poisson, IntensityMeasure, LevyMeasure, TestFunction, Window};
use chaos_core::rng::StreamKey;

fn modes() -> Vec<(&'static str, Execution)> {
    let mut v = vec![("sequential", Execution::Sequential)];
    #[cfg(feature = "parallel")]
    v.push(("parallel", Execution::Parallel));
    v
}

fn monte_carlo(c: &mut Criterion) {
    let sigma = IntensityMeasure::uniform(Window::interval(0.0, 1.0).unwrap(), 3.0);
    let phi = TestFunction::poly([0.5, -0.4]);
    let op = CreationOperator::new(phi.clone(), &sigma);
    let mut g = c.benchmark_group("creation_iterate_20k");
    g.sample_size(10);
    for (name, exec) in modes() {
        let plan = McPlan::new(20_000, StreamKey::new(7, 0)).with_exec(exec);
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                plan.estimate_one(|rng| {
                    let gamma = sample_poisson(&sigma, rng);
                    op.iterate_on_one(5, &gamma).unwrap() - charlier_eval(&gamma, &phi, 5, &sigma).unwrap()
                })
            })
        });
    }
    g.finish();

    let lebesgue = IntensityMeasure::lebesgue(Window::interval(0.0, 1.0).unwrap());
    let rho = LevyMeasure::gamma(1e-3).unwrap();
    let kernel = LaguerreKernel::new(TestFunction::poly([0.3, 0.4]), 3, &lebesgue).unwrap();
    let mut g = c.benchmark_group("laguerre_moment_100k");
    g.sample_size(10);
    for (name, exec) in modes() {
        let plan = McPlan::new(100_000, StreamKey::new(8, 0)).with_exec(exec);
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                plan.estimate_one(|rng| {
                    let l = kernel.levels(&sample_compound_poisson(&rho, &lebesgue, rng));
                    l[3] * l[3]
                })
            })
        });
    }
    g.finish();
}

// the set-partition route always uses the default execution; this row
// tracks its cost at the largest supported level
fn partitions(c: &mut Criterion) {
    let sigma = IntensityMeasure::lebesgue(Window::interval(0.0, 1.0).unwrap());
    let f = RankDecomposedKernel::rank_one(TestFunction::poly([0.5, -1.0, 0.25]), 8);
    let g = RankDecomposedKernel::rank_one(TestFunction::poly([1.0, 0.75]), 8);
    c.bench_function("gamma_inner_partition_n8", |b| b.iter(|| gamma_inner_partition(black_box(&f), black_box(&g), &sigma).unwrap()));
}

criterion_group!(benches, monte_carlo, partitions);
criterion_main!(benches);
