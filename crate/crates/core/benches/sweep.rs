use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use tcgl_core::batch::{run_sequential, solve_point, SweepPoint};
use tcgl_core::model::{CouplingParameters, ProblemSpec};
use tcgl_core::shoot::SolverControls;
use tcgl_core::verify::VerifyTolerances;

fn points(count: usize) -> Vec<SweepPoint> {
    let spec = ProblemSpec::two_vev(1, 1).unwrap();
    (0..count)
        .map(|k| SweepPoint {
            params: CouplingParameters::new(2.0, 2.0, 0.8 * k as f64 / count as f64, 1.5),
            spec,
        })
        .collect()
}

fn sweep(c: &mut Criterion) {
    let controls = SolverControls {
        fp_tol: 1e-6,
        ..SolverControls::default().with_r_max(20.0)
    };
    let tol = VerifyTolerances::default();
    let mut group = c.benchmark_group("sweep");
    group.sample_size(10);
    for count in [4, 8] {
        let pts = points(count);
        group.bench_with_input(BenchmarkId::new("sequential", count), &pts, |b, pts| {
            b.iter(|| run_sequential(pts, |p| solve_point(p, &controls, &tol).result.is_ok()))
        });
        #[cfg(feature = "parallel")]
        group.bench_with_input(BenchmarkId::new("parallel", count), &pts, |b, pts| {
            b.iter(|| tcgl_core::batch::run_parallel(pts, 0, |p| solve_point(p, &controls, &tol).result.is_ok()))
        });
    }
    group.finish();
}

criterion_group!(benches, sweep);
criterion_main!(benches);
