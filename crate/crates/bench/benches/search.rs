use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qset_core::pairs::{profile, search_pattern, sieve_witnesses, Pattern};

fn pattern_search(c: &mut Criterion) {
    let pattern = Pattern::parse("T,T,F,F").unwrap();
    let mut group = c.benchmark_group("search_pattern");
    group.sample_size(10);
    for workers in [1usize, 2, 4] {
        group.bench_with_input(BenchmarkId::new("limit_2000", workers), &workers, |b, &w| {
            b.iter(|| search_pattern(black_box(&pattern), 2000, w).unwrap())
        });
    }
    group.finish();
}

fn single_profile(c: &mut Criterion) {
    c.bench_function("profile_1999_1997", |b| b.iter(|| profile(black_box(1997), black_box(1999)).unwrap()));
}

fn sieve(c: &mut Criterion) {
    let mut group = c.benchmark_group("sieve_witnesses");
    group.sample_size(10);
    group.bench_function("p_213623_h_1000", |b| b.iter(|| sieve_witnesses(213_623, black_box(1000), 1).unwrap()));
    group.finish();
}

criterion_group!(benches, pattern_search, single_profile, sieve);
criterion_main!(benches);
