use std::hint::black_box;

use boolflow::{to_anf, BooleanFunction};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

/// Deterministic pseudo-random table (xorshift) so runs are comparable.
fn table(n: usize) -> Vec<u64> {
    let mut state = 0x9e37_79b9_7f4a_7c15u64;
    (0..1u64 << n)
        .map(|_| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state % (1 << n)
        })
        .collect()
}

fn anf(c: &mut Criterion) {
    let mut group = c.benchmark_group("anf");
    for n in [4, 8, 12, 16] {
        let f = BooleanFunction::from_table(n, table(n)).unwrap();
        let column = f.column(0);
        group.bench_with_input(BenchmarkId::from_parameter(n), &column, |b, col| b.iter(|| to_anf(n, black_box(col))));
    }
    group.finish();
}

fn derrida(c: &mut Criterion) {
    let mut group = c.benchmark_group("derrida_slope");
    for n in [4, 8, 12, 16] {
        let f = BooleanFunction::from_table(n, table(n)).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &f, |b, f| b.iter(|| black_box(f).derrida_slope()));
    }
    group.finish();
}

criterion_group!(benches, anf, derrida);
criterion_main!(benches);
