use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use shellfem::problem::discretize;
use shellfem::solve::Method;
use shellfem_bench::cylinder_problem;

fn solve(c: &mut Criterion) {
    let mut g = c.benchmark_group("factor_and_solve");
    g.sample_size(10);
    for n in [8, 16] {
        let p = cylinder_problem(n, 1e-3);
        for method in [Method::Mixed, Method::Dg] {
            let disc = discretize(&p, method).unwrap();
            g.bench_with_input(BenchmarkId::new(method.name(), n), &disc, |b, disc| {
                b.iter(|| disc.solve(black_box(p.epsilon)).unwrap())
            });
        }
    }
    g.finish();
}

criterion_group!(benches, solve);
criterion_main!(benches);
