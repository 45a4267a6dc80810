//! Throughput of the data-parallel hot paths.
//!
//! The `parallel` feature is a compile-time switch, so the comparison is
//! between two builds of the same benchmarks:
//!
//! ```text
//! cargo bench                            # rayon pool (baseline saved)
//! cargo bench --no-default-features      # sequential, reported vs baseline
//! ```
//!
//! Benchmark IDs are identical in both builds, so criterion's change report
//! is the parallel-versus-sequential comparison.

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use padic_forms::classifier::Verdict;
use padic_forms::finite::{char_fn, CyclicGroup, FiniteDistribution};
use padic_forms::sweep::{run_sweep, SweepConfig};
use padic_forms::verifier::{
    functional_eq_check, independence_exact, search_counterexample, warm_candidate_pool,
    FiniteForms,
};

fn random_distribution(group: CyclicGroup, rng: &mut ChaCha8Rng) -> FiniteDistribution {
    let ord = group.order();
    let mut weights = vec![BigRational::from_integer(BigInt::from(0)); ord as usize];
    let mut total = BigRational::from_integer(BigInt::from(0));
    for _ in 0..8 {
        let pos = rng.random_range(0..ord) as usize;
        let w = BigRational::from_integer(BigInt::from(rng.random_range(1..=4u32)));
        weights[pos] += &w;
        total += w;
    }
    let probs = weights.into_iter().map(|w| w / &total).collect();
    FiniteDistribution::new(group, probs).expect("weights normalize")
}

/// Exact joint-law factorization on Z/3^4 with scattered-atom inputs (the
/// dense/slab engine; the parallel slab scan is the hot loop).
fn bench_independence_exact(c: &mut Criterion) {
    let group = CyclicGroup::new(3, 4);
    let forms = FiniteForms::new(group, [[1, 1, 1], [1, 3, 9], [1, 6, 18]]);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mus: Vec<_> = (0..3).map(|_| random_distribution(group, &mut rng)).collect();
    c.bench_function("independence_exact/scattered_z3^4", |b| {
        b.iter(|| {
            let rep = independence_exact(black_box(&forms), [&mus[0], &mus[1], &mus[2]])
                .expect("groups match");
            black_box(rep.independent)
        })
    });
}

/// Floating-point functional-equation scan on Z/3^4 (map-reduce over the
/// first argument plane).
fn bench_functional_eq(c: &mut Criterion) {
    let group = CyclicGroup::new(3, 4);
    let forms = FiniteForms::new(group, [[1, 1, 1], [1, 3, 9], [1, 6, 18]]);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let chars: Vec<_> = (0..3)
        .map(|_| char_fn(&random_distribution(group, &mut rng)))
        .collect();
    c.bench_function("functional_eq_check/float_z3^4", |b| {
        b.iter(|| {
            let rep = functional_eq_check(
                black_box(&forms),
                [&chars[0], &chars[1], &chars[2]],
                1e-9,
            )
            .expect("groups match");
            black_box(rep.max_residual)
        })
    });
}

/// One forced-verdict counterexample search (family sweep plus 100 random
/// candidates) on a deep idempotent-forced instance.
fn bench_search(c: &mut Criterion) {
    let group = CyclicGroup::new(3, 4);
    warm_candidate_pool(group, 100);
    let forms = FiniteForms::new(group, [[1, 1, 1], [1, 3, 9], [1, 9, 3]]);
    c.bench_function("search_counterexample/forced_z3^4", |b| {
        b.iter(|| {
            let out =
                search_counterexample(black_box(&forms), Verdict::IdempotentForced, 100, 42)
                    .expect("nonsingular");
            assert!(out.violation.is_none());
            black_box(out.candidates_checked)
        })
    });
}

/// A small full-pipeline sweep (instances fan out across the pool).
fn bench_sweep(c: &mut Criterion) {
    let mut cfg = SweepConfig::new(2, 1);
    cfg.budget = 4;
    for n in 2..=3 {
        warm_candidate_pool(CyclicGroup::new(2, n), cfg.budget);
    }
    let mut g = c.benchmark_group("sweep");
    g.sample_size(10);
    g.bench_function("p2_v1_full_grid", |b| {
        b.iter(|| {
            let report = run_sweep(black_box(&cfg));
            assert!(report.failures.is_empty());
            black_box(report.instances)
        })
    });
    g.finish();
}

criterion_group!(
    benches,
    bench_independence_exact,
    bench_functional_eq,
    bench_search,
    bench_sweep
);
criterion_main!(benches);
