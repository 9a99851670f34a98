use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use ergrates_core::catalog::{standard_catalog, two_circle_model};
use ergrates_core::classes::{class_membership, ClassId};
use ergrates_core::flows::{mult_average_norm, periodic_eval, trajectory_average_norm, y_norm_sq, PiecewisePowerFunction};
use ergrates_core::kernels::rho;
use ergrates_core::rates::{decay_norm, lemma1_upper, singularity_norm};

fn bench_rho(c: &mut Criterion) {
    c.bench_function("rho/alpha=1", |b| b.iter(|| rho(black_box(1.0)).unwrap()));
}

fn bench_decay(c: &mut Criterion) {
    let mut g = c.benchmark_group("decay_norm");
    for e in standard_catalog() {
        for tau in [1.0, 1e3] {
            g.bench_with_input(BenchmarkId::new(e.name, tau), &tau, |b, &t| {
                b.iter(|| decay_norm(&e.measure, black_box(t)).unwrap())
            });
        }
    }
    g.finish();
}

fn bench_bounds(c: &mut Criterion) {
    let cat = standard_catalog();
    let mut g = c.benchmark_group("bounds");
    for name in ["cantor", "mixed", "power-log"] {
        let m = &cat.iter().find(|e| e.name == name).unwrap().measure;
        g.bench_function(BenchmarkId::new("singularity_norm", name), |b| b.iter(|| singularity_norm(m, black_box(1.0)).unwrap()));
        g.bench_function(BenchmarkId::new("lemma1_upper", name), |b| b.iter(|| lemma1_upper(m, black_box(50.0)).unwrap()));
    }
    g.finish();
}

fn bench_classes(c: &mut Criterion) {
    let cat = standard_catalog();
    let m = &cat.iter().find(|e| e.name == "power-log").unwrap().measure;
    let mut g = c.benchmark_group("class_membership");
    g.sample_size(10);
    for id in [ClassId::K2, ClassId::K3, ClassId::K4] {
        g.bench_function(id.to_string(), |b| b.iter(|| class_membership(m, black_box(1.0), id).unwrap()));
    }
    g.finish();
}

fn bench_flows(c: &mut Criterion) {
    let f = PiecewisePowerFunction::window(1.0, 2.0, 0.5).unwrap();
    let model = two_circle_model();
    let mut g = c.benchmark_group("flows");
    g.bench_function("mult_average_norm/tau=100", |b| b.iter(|| mult_average_norm(&f, black_box(100.0), 0.0).unwrap()));
    g.bench_function("periodic_eval", |b| b.iter(|| periodic_eval(&model, black_box(37.0), 0.0).unwrap()));
    g.sample_size(10);
    g.bench_function("y_norm_sq", |b| b.iter(|| y_norm_sq(black_box(&f))));
    g.bench_function("trajectory_average_norm", |b| b.iter(|| trajectory_average_norm(&model, black_box(37.0), 0.0).unwrap()));
    g.finish();
}

criterion_group!(benches, bench_rho, bench_decay, bench_bounds, bench_classes, bench_flows);
criterion_main!(benches);
