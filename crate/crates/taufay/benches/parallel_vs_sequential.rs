use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use num_complex::Complex64;

use taufay::exec::Exec;
use taufay::matrix_tau::{MatrixTauContext, PotentialSpec};
use taufay::riemann_geometry::Theta;

fn modes() -> Vec<(&'static str, Exec)> {
    let mut m = vec![("sequential", Exec::Sequential)];
    if Exec::parallel_available() {
        m.push(("parallel", Exec::Parallel));
    }
    m
}

fn theta_batch(c: &mut Criterion) {
    let th = Theta::new(Complex64::new(0.3, 0.8), 1e-15).unwrap();
    let us: Vec<Complex64> = (0..4096)
        .map(|k| {
            let s = k as f64 / 4096.0;
            Complex64::new(s - 0.5, 0.4 * (7.0 * s).sin())
        })
        .collect();
    let mut g = c.benchmark_group("theta_eval_batch");
    for (name, exec) in modes() {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| black_box(th.eval_batch(exec, &us)))
        });
    }
    g.finish();
}

fn eigenvalue_integral(c: &mut Criterion) {
    let mut g = c.benchmark_group("matrix_eigenvalue_integral_n3");
    g.sample_size(10);
    for (name, exec) in modes() {
        let ctx = MatrixTauContext::new(3, PotentialSpec::quartic()).unwrap().with_exec(exec);
        g.bench_with_input(BenchmarkId::from_parameter(name), &ctx, |b, ctx| {
            b.iter(|| black_box(ctx.eigenvalue_integral(60, |_| Complex64::new(1.0, 0.0)).unwrap()))
        });
    }
    g.finish();
}

criterion_group!(benches, theta_batch, eigenvalue_integral);
criterion_main!(benches);
