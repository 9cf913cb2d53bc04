use std::hint::black_box;

use boolflow::{integrate, FlowKind, FlowSpec, IntegrationOptions, NetworkSpec, Scheme};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn ring(scheme: Scheme, kind: FlowKind) -> FlowSpec {
    let spec = NetworkSpec::from_formulas(3, &["!s3", "s1", "s2"]).unwrap();
    FlowSpec::from_network(&spec, scheme, kind, None).unwrap()
}

fn rhs(c: &mut Criterion) {
    let mut group = c.benchmark_group("rhs");
    for scheme in Scheme::ALL.into_iter().filter(|s| *s != Scheme::RF) {
        for kind in [FlowKind::D1, FlowKind::D2] {
            let flow = ring(scheme, kind);
            let x: Vec<f64> = (0..flow.dim()).map(|j| 0.3 * j as f64 - 0.7).collect();
            let mut out = vec![0.0; flow.dim()];
            group.bench_function(BenchmarkId::new(scheme.name(), kind), |b| b.iter(|| flow.rhs_into(black_box(&x), &mut out)));
        }
    }
    group.finish();
}

fn integration(c: &mut Criterion) {
    let mut group = c.benchmark_group("integrate");
    let copy = FlowSpec::from_network(&NetworkSpec::from_formulas(2, &["!s2", "s1"]).unwrap(), Scheme::W, FlowKind::D1, None).unwrap();
    let opts = IntegrationOptions::default().with_t_end(50.0);
    group.bench_function("copy-negation D1 dopri5 t=50", |b| b.iter(|| integrate(&copy, black_box(&[1.5, -0.3]), &opts).unwrap()));
    let rk4 = IntegrationOptions::rk4(0.01, 50.0);
    group.bench_function("copy-negation D1 rk4 h=0.01 t=50", |b| b.iter(|| integrate(&copy, black_box(&[1.5, -0.3]), &rk4).unwrap()));
    let d2 = ring(Scheme::W, FlowKind::D2);
    group
        .bench_function("ring D2 dopri5 t=50", |b| b.iter(|| integrate(&d2, black_box(&[-1.2, 0.4, 1.1, -0.5, 0.2, 0.9]), &opts).unwrap()));
    group.finish();
}

criterion_group!(benches, rhs, integration);
criterion_main!(benches);
