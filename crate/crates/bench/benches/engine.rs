use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use polarsim_bench::{two_clusters, uniform, SEED};
use polarsim_core::dynamics::{stream_rng, PairDist};
use polarsim_core::lab::{delta_prime_drift_exact, run_two_chain, TwoChainParams};
use polarsim_core::*;

fn interactions(c: &mut Criterion) {
    let rule = UpdateRule::linear(1.0).unwrap();
    for (n, d) in [(6, 3), (64, 8)] {
        let start = uniform(n, d);
        c.bench_function(&format!("apply_1000_steps_n{n}_d{d}"), |b| {
            b.iter_batched(
                || (start.clone(), stream_rng(SEED, 0)),
                |(mut cfg, mut rng)| {
                    for _ in 0..1000 {
                        let x = PairDist::Uniform.sample(n, &mut rng);
                        cfg.apply_in_place(x, &rule).unwrap();
                    }
                    cfg
                },
                BatchSize::SmallInput,
            )
        });
    }
}

fn analysis(c: &mut Criterion) {
    let cfg = two_clusters(16, 4);
    c.bench_function("correlation_and_potentials_n16", |b| {
        b.iter(|| {
            let a = correlation(black_box(&cfg));
            let p = clusters(&a).unwrap();
            potentials(&a, &p)
        })
    });
    let rule = UpdateRule::linear(1.0).unwrap();
    let u = uniform(8, 4);
    c.bench_function("delta_prime_drift_exact_n8", |b| {
        b.iter(|| delta_prime_drift_exact(black_box(&u), &rule).unwrap())
    });
}

fn simulation(c: &mut Criterion) {
    let mut p = ProcessParams::new(6, 3, 1.0, SEED).unwrap();
    p.stop.max_steps = 20_000;
    p.sample_every = 1000;
    let start = uniform(6, 3);
    c.bench_function("simulate_n6_to_polarization", |b| {
        b.iter(|| simulate(&p, black_box(&start)).unwrap())
    });
}

fn constructions(c: &mut Criterion) {
    let rule = UpdateRule::linear(1.0).unwrap();
    let u = uniform(12, 4);
    let eps = epsilon_base(4, 1.0);
    c.bench_function("path_to_inactive_n12", |b| {
        b.iter(|| path_to_inactive(black_box(&u), eps, &rule).unwrap())
    });
    let cl = two_clusters(8, 4);
    c.bench_function("reach_consistency_adaptive_n8", |b| {
        b.iter(|| {
            reach_consistency(black_box(&cl), &rule, None, ConsistencyMode::Adaptive).unwrap()
        })
    });
}

fn lab(c: &mut Criterion) {
    let p = TwoChainParams::shipped(200, SEED).unwrap();
    let mut g = c.benchmark_group("lab");
    g.sample_size(20);
    g.bench_function("two_chain_200_trials", |b| {
        b.iter(|| run_two_chain(black_box(&p)).unwrap())
    });
    g.finish();
}

criterion_group!(
    benches,
    interactions,
    analysis,
    simulation,
    constructions,
    lab
);
criterion_main!(benches);
