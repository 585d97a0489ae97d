mod common;

use polarsim_core::dynamics::stream_rng;
use polarsim_core::lab::*;
use polarsim_core::*;
use proptest::prelude::*;
use rand::Rng;

use common::*;

#[test]
fn drift_enumeration_agrees_with_sampling() {
    for s in 0..20u64 {
        let mut rng = stream_rng(90, s);
        let n = rng.random_range(2..=6);
        let d = rng.random_range(2..=4);
        let rule = UpdateRule::linear(rng.random_range(0.25..=3.0)).unwrap();
        let c = uniform_config(&mut rng, n, d);
        let exact = delta_prime_drift_exact(&c, &rule).unwrap();
        let (mean, se) = delta_prime_drift_mc(&c, &rule, 100_000, s).unwrap();
        assert!(
            (mean - exact).abs() <= 5.0 * se + 1e-12,
            "config {s}: exact {exact}, mc {mean} +- {se}"
        );
    }
}

#[test]
fn default_kernels_never_violate_the_step_bounds() {
    let p = TwoChainParams::shipped(30_000, 20261016).unwrap();
    let out = run_two_chain(&p).unwrap();
    let steps: u64 = out.iter().map(|o| o.t0).sum();
    assert!(steps >= 1_000_000, "only {steps} steps");
    let capped = out.iter().filter(|o| o.capped).count() as f64 / out.len() as f64;
    assert!(capped <= 1e-3);
    let summary = summarize_two_chain(&out);
    assert_eq!(summary.trials, 30_000);
    let report = two_chain_report(&p, &out);
    assert!(report.violations.is_empty());
    let [lo, hi] = report.wilson_interval.unwrap();
    assert!(lo <= report.estimate && report.estimate <= hi);
}

#[test]
fn escapes_cross_their_thresholds() {
    let p = TwoChainParams::shipped(500, 3).unwrap();
    for o in run_two_chain(&p).unwrap() {
        match o.escaped_via {
            Some(Escape::P1Crossed) => assert!(o.p1 <= p.c_min),
            Some(Escape::P0Crossed) => assert!(o.p0 <= p.c_start() && o.p1 > p.c_min),
            None => assert!(o.capped),
        }
    }
}

#[test]
fn azuma_tail_stays_under_its_bound() {
    let mut last = f64::INFINITY;
    for t in [50u64, 200, 800, 3200] {
        let r = azuma_tail(&AzumaParams {
            c1: 1.0,
            c2: 0.5,
            t,
            trials: 20_000,
            seed: 5,
            kernel: AzumaKernel::TwoPoint,
        })
        .unwrap();
        let se = (r.bound * (1.0 - r.bound) / r.trials as f64).sqrt();
        assert!(r.empirical <= r.bound + 3.0 * se, "t = {t}");
        assert!(r.bound < last);
        last = r.bound;
    }
}

#[test]
fn deterministic_azuma_walk_never_hits() {
    let r = azuma_tail(&AzumaParams {
        c1: 2.0,
        c2: 1.0,
        t: 10,
        trials: 3,
        seed: 0,
        kernel: AzumaKernel::Deterministic,
    })
    .unwrap();
    assert_eq!(r.hits, 0);
}

#[test]
fn small_dprime_scan_finds_nothing() {
    let scan = dprime_scan(&DprimeScanParams {
        configs: 300,
        n: (2, 6),
        d: (2, 4),
        alpha: 1.0,
        tol: 1e-12,
        seed: 8,
    })
    .unwrap();
    assert!(scan.findings.is_empty());
    assert!(scan.min_drift >= -1e-12);
}

proptest! {
    #[test]
    fn wilson_interval_brackets_the_estimate(n in 1u64..10_000, frac in 0.0f64..=1.0) {
        let k = ((n as f64) * frac).floor() as u64;
        let w = wilson(k, n, Z95);
        let p = k as f64 / n as f64;
        prop_assert!(w.lo >= 0.0 && w.hi <= 1.0);
        prop_assert!(w.lo <= p + 1e-12 && p <= w.hi + 1e-12);
        prop_assert!((w.half_width - (w.hi - w.lo) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn azuma_bound_shrinks_with_time(c1 in 0.1f64..10.0, ratio in 0.01f64..=1.0, t in 1u64..10_000) {
        let c2 = c1 * ratio;
        prop_assert!(azuma_bound(c1, c2, t + 1) <= azuma_bound(c1, c2, t));
        prop_assert!(azuma_bound(c1, c2, t) <= 1.0);
    }
}
