use az_bench::probe;
use az_core::bases::fast::FourierOperator;
use az_core::galerkin::{assemble_galerkin, default_quad_order, esg2_solve, EllipticProblem, SingularTerm};
use az_core::linalg::{qr_least_squares, LinearOperator};
use az_core::studies::{fl_case, FlVariant};
use az_core::{enriched_az_solve, TsvdConfig};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn fourier_apply(c: &mut Criterion) {
    let mut g = c.benchmark_group("fourier_apply");
    for n in [257, 1025, 4097] {
        let op = FourierOperator::new(n, 2 * n).unwrap();
        let x = probe(n, 1);
        let y = probe(2 * n, 2);
        g.bench_with_input(BenchmarkId::new("forward", n), &n, |b, _| b.iter(|| op.apply(&x)));
        g.bench_with_input(BenchmarkId::new("adjoint", n), &n, |b, _| b.iter(|| op.apply_adjoint(&y)));
    }
    g.finish();
}

fn fourier_legendre(c: &mut Criterion) {
    let cfg = TsvdConfig::default();
    let mut g = c.benchmark_group("fourier_legendre");
    g.sample_size(20);
    for n in [257, 1025, 4097] {
        let case = fl_case(n, 5, FlVariant::Oversampled, 2).unwrap();
        g.bench_with_input(BenchmarkId::new("enriched_az", n), &n, |b, _| {
            b.iter(|| enriched_az_solve(&case.sys, &case.z11, &case.b, &cfg).unwrap())
        });
    }
    for n in [129, 257] {
        let case = fl_case(n, 5, FlVariant::Oversampled, 2).unwrap();
        let dense = case.sys.to_dense();
        g.bench_with_input(BenchmarkId::new("dense_qr", n), &n, |b, _| {
            b.iter(|| qr_least_squares(&dense, &case.b).unwrap())
        });
    }
    g.finish();
}

fn galerkin(c: &mut Criterion) {
    let cfg = TsvdConfig::default();
    let prob = EllipticProblem::manufactured(SingularTerm::CornerPower { alpha: 0.5 });
    let mut g = c.benchmark_group("galerkin");
    g.sample_size(10);
    for sqrt_n in [8, 12] {
        let q = default_quad_order(sqrt_n);
        g.bench_with_input(BenchmarkId::new("assemble", sqrt_n), &sqrt_n, |b, &s| {
            b.iter(|| assemble_galerkin(&prob, s, q).unwrap())
        });
        let sys = assemble_galerkin(&prob, sqrt_n, q).unwrap();
        g.bench_with_input(BenchmarkId::new("esg2_solve", sqrt_n), &sqrt_n, |b, _| {
            b.iter(|| esg2_solve(&sys, 2, &cfg).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, fourier_apply, fourier_legendre, galerkin);
criterion_main!(benches);
