//! Parallel vs single-worker timings of the hot kernels.
//!
//! Each kernel runs under `with_jobs(1, ..)` and `with_jobs(all, ..)`. Built
//! with `--no-default-features` both variants take the sequential path.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use sphavg::averages::SlicedAverager;
use sphavg::par::with_jobs;
use sphavg::pushforward::{histogram, total_mass, PushforwardSpec};
use sphavg::spherequad::monte_carlo;
use sphavg::{sample_grid, Evaluate, Seed, TestFunction};

fn workers() -> Vec<usize> {
    let all = std::thread::available_parallelism().map_or(1, |n| n.get());
    if all > 1 {
        vec![1, all]
    } else {
        vec![1]
    }
}

fn bench_kernels(c: &mut Criterion) {
    let f = TestFunction::gaussian(2.0, vec![0.1, -0.2]).unwrap();
    let g = TestFunction::bump(1.2, 2, vec![-0.3, 0.1]).unwrap();
    let spec = PushforwardSpec::new(2, 2).unwrap();
    let sliced = SlicedAverager::with_defaults(2).unwrap();
    let xs: Vec<f64> = (0..64).flat_map(|i| [i as f64 / 64.0 - 0.5, 0.25]).collect();

    let mut group = c.benchmark_group("kernels");
    group.sample_size(10);
    for jobs in workers() {
        group.bench_with_input(BenchmarkId::new("monte_carlo_s3_200k", jobs), &jobs, |b, &j| {
            b.iter(|| {
                with_jobs(j, || {
                    monte_carlo(4, 200_000, Seed(3), |y| {
                        f.value(&[-y[0], -y[1]]) * g.value(&[-y[2], -y[3]])
                    })
                    .unwrap()
                })
            })
        });
        group.bench_with_input(BenchmarkId::new("sliced_64_points", jobs), &jobs, |b, &j| {
            b.iter(|| with_jobs(j, || sliced.eval_many(&[&f, &g], 1.0, black_box(&xs)).unwrap()))
        });
        group.bench_with_input(BenchmarkId::new("density_mass_256", jobs), &jobs, |b, &j| {
            b.iter(|| with_jobs(j, || total_mass(spec, 256).unwrap()))
        });
        group.bench_with_input(BenchmarkId::new("histogram_1m", jobs), &jobs, |b, &j| {
            b.iter(|| with_jobs(j, || histogram(spec, 1_000_000, 0.05, 1.5, Seed(9)).unwrap()))
        });
        group.bench_with_input(BenchmarkId::new("sample_grid_512", jobs), &jobs, |b, &j| {
            b.iter(|| with_jobs(j, || sample_grid(&f, 4.0, 512).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, bench_kernels);
criterion_main!(benches);
