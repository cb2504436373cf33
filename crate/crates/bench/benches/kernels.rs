use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use num_complex::Complex64;
use rhaly_core::dynamics::{power_bound_witness, PowerBox};
use rhaly_core::holomorphic::{apply_rg_integral, extract_theta, AnalyticFunction, QuadratureSpec};
use rhaly_core::koethe::seminorm;
use rhaly_core::{
    CoefficientSequence, ExponentSequence, RhalyOperator, TruncationPolicy, WeightGrid,
};

fn apply(c: &mut Criterion) {
    let op = RhalyOperator::cesaro();
    let x = CoefficientSequence::geometric(1.0, 0.99);
    let mut g = c.benchmark_group("apply");
    for n in [200usize, 2_000, 20_000] {
        let p = TruncationPolicy::default().with_n_max(n);
        g.bench_with_input(BenchmarkId::from_parameter(n), &p, |b, p| {
            b.iter(|| op.apply(black_box(&x), p))
        });
    }
    g.finish();
}

fn power_coefficient(c: &mut Criterion) {
    let op = RhalyOperator::new(CoefficientSequence::geometric(1.0, 0.5));
    c.bench_function("power_coefficient n=1 m=12 k=4", |b| {
        b.iter(|| op.power_coefficient(black_box(1), black_box(12), black_box(4)))
    });
}

fn seminorms(c: &mut Criterion) {
    let grid = WeightGrid::infinite_type(ExponentSequence::linear(1.0));
    let x = CoefficientSequence::exp_of_exponent(1.0, 1.0, ExponentSequence::power(1.0, 2.0));
    let p = TruncationPolicy::default();
    c.bench_function("seminorm Λ_∞ grade 6", |b| {
        b.iter(|| seminorm(black_box(&x), &grid, 6, &p))
    });
}

fn extraction(c: &mut Criterion) {
    let g = AnalyticFunction::exp();
    let mut grp = c.benchmark_group("extract_theta");
    for m in [64usize, 256, 1024] {
        let spec = QuadratureSpec::circle(1.0, m);
        grp.bench_with_input(BenchmarkId::from_parameter(m), &spec, |b, s| {
            b.iter(|| extract_theta(&g, 20, s))
        });
    }
    grp.finish();
    let f = AnalyticFunction::polynomial(&[1.0, 1.0]);
    let spec = QuadratureSpec::circle(0.5, 64);
    c.bench_function("apply_rg_integral exp", |b| {
        b.iter(|| apply_rg_integral(&g, &f, black_box(Complex64::new(0.3, 0.2)), &spec))
    });
}

fn power_bound_box(c: &mut Criterion) {
    let grid = WeightGrid::finite_type(ExponentSequence::linear(1.0));
    let theta = CoefficientSequence::geometric(0.5, 0.5);
    let p = TruncationPolicy::default();
    let mut g = c.benchmark_group("power_bound");
    g.sample_size(20);
    g.bench_function("Σ=1/2 box 32x100x4", |b| {
        b.iter(|| power_bound_witness(&theta, &grid, &p, PowerBox::new(32, 100, 4)))
    });
    g.finish();
}

criterion_group!(
    benches,
    apply,
    power_coefficient,
    seminorms,
    extraction,
    power_bound_box
);
criterion_main!(benches);
