use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use optobell_bench::representative_params;
use optobell_core::model::ClosedForm;
use optobell_core::optimizer::optimize_chsh;
use optobell_core::oracle::{build_state, oracle_probabilities, TruncationPolicy};
use optobell_core::{Complex64, OptimizerConfig};

fn closed_form(c: &mut Criterion) {
    let quad = [
        Complex64::new(0.3, 0.0),
        Complex64::new(-0.7, 0.1),
        Complex64::new(-0.2, 0.0),
        Complex64::new(0.6, -0.2),
    ];
    let mut group = c.benchmark_group("closed_form_chsh");
    for (name, params) in representative_params() {
        let form = ClosedForm::new(&params).unwrap();
        group.bench_function(name, |b| b.iter(|| form.chsh(black_box(quad))));
    }
    group.finish();
}

fn optimizer(c: &mut Criterion) {
    let mut group = c.benchmark_group("optimize_chsh");
    group.sample_size(10);
    let cfg = OptimizerConfig::default();
    for (name, params) in representative_params() {
        group.bench_function(name, |b| b.iter(|| optimize_chsh(black_box(&params), &cfg)));
    }
    group.finish();
}

fn oracle(c: &mut Criterion) {
    let policy = TruncationPolicy::default();
    let mut group = c.benchmark_group("oracle");
    group.sample_size(10);
    for (name, m) in representative_params() {
        group.bench_with_input(BenchmarkId::new("build_state", name), &m, |b, m| {
            b.iter(|| build_state(m.p, m.n0, m.t, &policy).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("probabilities", name), &m, |b, m| {
            b.iter(|| {
                oracle_probabilities(
                    m.p,
                    m.n0,
                    m.t,
                    m.eta,
                    Complex64::new(0.4, 0.1),
                    Complex64::new(-0.3 * m.t, 0.0),
                    &policy,
                )
                .unwrap()
            })
        });
    }
    group.finish();
}

criterion_group!(benches, closed_form, optimizer, oracle);
criterion_main!(benches);
