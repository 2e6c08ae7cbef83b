use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ncspectra_bench::{even_problem, inverse_problem};
use ncspectra_core::evenpower::{closed_form_energy, solve_consistent_b, PrefactorExponents, SignMode};
use ncspectra_core::invpower::{spectrum, ConstraintForm};
use ncspectra_core::oracle::solve_auto;

fn even_closed_form(c: &mut Criterion) {
    let base = even_problem(0.05, 1);
    let mut group = c.benchmark_group("even_closed_form");
    for n in [0usize, 1, 3] {
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| {
                let p = solve_consistent_b(black_box(&base), SignMode::Normalizable, n).unwrap();
                let pre = PrefactorExponents::new(&p, SignMode::Normalizable).unwrap();
                closed_form_energy(&p, &pre, n).unwrap().energy_physical
            })
        });
    }
    group.finish();
}

fn inverse_spectrum(c: &mut Criterion) {
    let mut group = c.benchmark_group("inverse_spectrum");
    for degree in [1usize, 2, 3] {
        let base = inverse_problem(0.01, 1);
        group.bench_with_input(BenchmarkId::from_parameter(degree), &degree, |b, &k| {
            b.iter(|| spectrum(black_box(&base), k, ConstraintForm::Rederived).unwrap().len())
        });
    }
    group.finish();
}

fn oracle(c: &mut Criterion) {
    let mut group = c.benchmark_group("oracle");
    group.sample_size(10);
    let problem = inverse_problem(0.01, 1);
    for points in [1000usize, 4000] {
        group.bench_with_input(BenchmarkId::from_parameter(points), &points, |b, &n| {
            b.iter(|| solve_auto(black_box(&problem), 6, n).unwrap().eigenvalues[0])
        });
    }
    group.finish();
}

criterion_group!(benches, even_closed_form, inverse_spectrum, oracle);
criterion_main!(benches);
