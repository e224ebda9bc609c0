use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use sepnmf_bench::{dirichlet_instance, hottopixx_fixture, normalized, rho_lp_fixture};
use sepnmf_core::baselines::{spa, xray_max};
use sepnmf_core::nnls::nnls_fro;
use sepnmf_core::{solve, Rng, SolveOptions};

fn lp_engines(c: &mut Criterion) {
    let mut group = c.benchmark_group("rho_lp");
    group.sample_size(10);
    for &n in &[12usize, 24, 40] {
        let lp = rho_lp_fixture(10, n, 4, 0.02).assemble();
        group.bench_with_input(BenchmarkId::new("simplex", n), &lp, |b, lp| {
            b.iter(|| solve(lp, &SolveOptions::simplex()).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("pdhg", n), &lp, |b, lp| {
            b.iter(|| solve(lp, &SolveOptions::pdhg()).unwrap())
        });
    }
    group.finish();

    let mut group = c.benchmark_group("hottopixx");
    group.sample_size(10);
    let lp = hottopixx_fixture(10, 24, 4, 0.02).assemble();
    group.bench_function("simplex_24", |b| b.iter(|| solve(&lp, &SolveOptions::simplex()).unwrap()));
    group.finish();
}

fn baselines(c: &mut Criterion) {
    let inst = dirichlet_instance(50, 100, 10, 0.05);
    let mn = normalized(&inst);
    c.bench_function("spa_50x100", |b| b.iter(|| spa(&mn, 10).unwrap()));
    c.bench_function("xray_50x100", |b| b.iter(|| xray_max(&inst.m_tilde, 10, &mut Rng::new(1)).unwrap()));
    let w = inst.m_tilde.select_columns(&inst.true_indices).unwrap();
    c.bench_function("nnls_fro_50x100", |b| b.iter(|| nnls_fro(&inst.m_tilde, &w).unwrap()));
}

criterion_group!(benches, lp_engines, baselines);
criterion_main!(benches);
