mod common;

use polarsim_core::dynamics::{read_trace, stream_rng, write_trace, ActivityStop};
use polarsim_core::*;

use common::*;

fn params(n: usize, d: usize, seed: u64) -> ProcessParams {
    let mut p = ProcessParams::new(n, d, 1.0, seed).unwrap();
    p.sample_every = 50;
    p.stop.max_steps = 20_000;
    p
}

#[test]
fn same_seed_same_trajectory() {
    let p = params(6, 3, 5);
    let c0 = sample_initial(6, 3, &InitKind::UniformSphere, 5).unwrap();
    let a = simulate(&p, &c0).unwrap();
    let b = simulate(&p, &c0).unwrap();
    assert_eq!(a.config, b.config);
    assert_eq!(a.trace, b.trace);
    assert_eq!(a.steps, b.steps);

    let mut other = p.clone();
    other.stream = 1;
    let c = simulate(&other, &c0).unwrap();
    assert_ne!(a.trace, c.trace);
}

#[test]
fn trace_round_trips_through_csv() {
    let p = params(5, 3, 9);
    let c0 = sample_initial(5, 3, &InitKind::UniformSphere, 9).unwrap();
    let out = simulate(&p, &c0).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("trace.csv");
    write_trace(std::fs::File::create(&path).unwrap(), &out.trace).unwrap();
    let back = read_trace(std::fs::File::open(&path).unwrap()).unwrap();
    assert_eq!(back.len(), out.trace.len());
    for (x, y) in back.iter().zip(&out.trace) {
        assert_eq!(x.t, y.t);
        assert_eq!(x.potentials, y.potentials);
        assert_eq!(x.delta_prime, y.delta_prime);
        assert_eq!(x.num_clusters, y.num_clusters);
        assert_eq!(x.interaction, y.interaction);
        assert_eq!(x.inactive, y.inactive);
    }
}

#[test]
fn trace_samples_every_period_and_the_last_step() {
    let p = params(4, 2, 3);
    let c0 = sample_initial(4, 2, &InitKind::UniformSphere, 3).unwrap();
    let out = simulate(&p, &c0).unwrap();
    let ts: Vec<u64> = out.trace.iter().map(|r| r.t).collect();
    assert_eq!(ts[0], 0);
    assert_eq!(*ts.last().unwrap(), out.steps);
    for &t in &ts[..ts.len() - 1] {
        assert_eq!(t % 50, 0);
    }
}

#[test]
fn generic_starts_polarize() {
    let mut polarized = 0;
    for s in 0..20 {
        let p = params(5, 3, 100 + s);
        let c0 = sample_initial(5, 3, &InitKind::UniformSphere, 100 + s).unwrap();
        let out = simulate(&p, &c0).unwrap();
        if out.reason == StopReason::Polarized {
            assert!(is_polarized(&out.config, 1e-6));
            polarized += 1;
        }
    }
    assert_eq!(polarized, 20);
}

#[test]
fn activity_stop_fires_on_active_states() {
    let mut p = params(4, 3, 1);
    p.stop.activity = Some(ActivityStop {
        eps: 1e-3,
        eps1: 1e-3,
        period: 1,
    });
    let c0 = sample_initial(4, 3, &InitKind::UniformSphere, 1).unwrap();
    let out = simulate(&p, &c0).unwrap();
    assert_eq!(out.reason, StopReason::Active);
}

#[test]
fn scripted_run_matches_manual_updates() {
    let mut rng = stream_rng(4, 0);
    let c0 = uniform_config(&mut rng, 4, 3);
    let rule = UpdateRule::linear(0.7).unwrap();
    let sched = [
        Interaction::new(0, 1),
        Interaction::new(2, 3),
        Interaction::new(1, 2),
    ];
    let (end, pots) = run_scripted(&c0, &sched, &rule).unwrap();
    let mut c = c0.clone();
    for &x in &sched {
        c = apply_interaction(&c, x, &rule).unwrap();
    }
    assert_eq!(end, c);
    assert_eq!(pots.len(), 3);
}

#[test]
fn explicit_pair_distribution_only_draws_its_support() {
    let mut rows = vec![vec![0.0; 3]; 3];
    rows[0][1] = 1.0;
    let dist = PairDist::explicit(&rows).unwrap();
    assert!(!dist.full_support());
    let mut rng = stream_rng(2, 0);
    for _ in 0..100 {
        assert_eq!(dist.sample(3, &mut rng), Interaction::new(0, 1));
    }
}
