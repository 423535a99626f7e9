use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hsearch_bench::{generic_params, uniform_problem};
use hsearch_core::experiments::DEFAULT_N_LIST;
use hsearch_core::{
    coefficients_eq3, evolve_full, probability_eq2, probability_trace, propagator_2x2, readout_time, reduced_matrix,
    scaling_study, ClosedForm, Family, Tolerances,
};

fn reduced(c: &mut Criterion) {
    let p = generic_params();
    let h = reduced_matrix(&p, 0.1).unwrap();
    c.bench_function("propagator_2x2", |b| b.iter(|| propagator_2x2(black_box(&h), black_box(3.7))));
    c.bench_function("probability_trace/1000", |b| {
        b.iter(|| probability_trace(black_box(&p), 0.1, 20.0, 1000).unwrap())
    });
}

fn closed_forms(c: &mut Criterion) {
    let p = generic_params();
    c.bench_function("closed_form", |b| b.iter(|| ClosedForm::evaluate(black_box(&p), black_box(0.1)).unwrap()));
    c.bench_function("coefficients", |b| b.iter(|| coefficients_eq3(black_box(&p))));
    c.bench_function("rational_probability", |b| b.iter(|| probability_eq2(black_box(&p), black_box(0.1)).unwrap()));
}

fn full_space(c: &mut Criterion) {
    let p = generic_params();
    let tol = Tolerances::default();
    let mut group = c.benchmark_group("evolve_full");
    group.sample_size(10);
    for dim in [64, 256] {
        let prob = uniform_problem(dim);
        let t = readout_time(&p, prob.overlap()).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(dim), &prob, |b, prob| {
            b.iter(|| evolve_full(&p, prob, t, &tol).unwrap())
        });
    }
    group.finish();
}

fn scaling(c: &mut Criterion) {
    c.bench_function("scaling_study/farhi", |b| {
        b.iter(|| scaling_study(Family::Farhi, black_box(&DEFAULT_N_LIST), 1.0).unwrap())
    });
}

criterion_group!(benches, reduced, closed_forms, full_space, scaling);
criterion_main!(benches);
