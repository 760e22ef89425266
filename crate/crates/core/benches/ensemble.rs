use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use ensemble_su2::analysis::chebyshev_grid;
use ensemble_su2::parallel;
use ensemble_su2::simulator::Propagator;
use ensemble_su2::simulator::PulseTrain;
use ensemble_su2::{Axis, BumpParams, ControlSchedule, FourierKernel, TargetProfile, Unitary2};

fn ensemble(c: &mut Criterion) {
    let profile = TargetProfile::new(BumpParams::standard(), "pi/2").unwrap();
    let kernel = FourierKernel::new(profile.clone()).unwrap();
    let sched = ControlSchedule::build(profile, 0.5, 3, Axis::Y).unwrap();
    let prop = Propagator::new(&PulseTrain::from_schedule(&sched), &kernel, 0.02).unwrap();

    let mut group = c.benchmark_group("ensemble_finals");
    group.sample_size(10);
    for size in [8usize, 32, 128] {
        let grid = chebyshev_grid(&BumpParams::standard(), size);
        group.bench_with_input(BenchmarkId::new("parallel", size), &grid, |b, g| {
            b.iter(|| parallel::map(black_box(g), |&w| prop.final_state(w, Unitary2::identity())))
        });
        group.bench_with_input(BenchmarkId::new("sequential", size), &grid, |b, g| {
            b.iter(|| {
                parallel::map_sequential(black_box(g), |&w| {
                    prop.final_state(w, Unitary2::identity())
                })
            })
        });
    }
    group.finish();
}

criterion_group!(benches, ensemble);
criterion_main!(benches);
