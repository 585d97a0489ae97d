//! Many independent runs of the process and their summary.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{clusters, epochs, potentials};
use crate::dynamics::{
    derive_seed, sample_initial_with, simulate, stream_rng, InitKind, ProcessParams, StopReason,
    TAG_INIT,
};
use crate::error::Result;
use crate::geometry::{correlation, Configuration};

/// What one run left behind.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub run: u64,
    pub reason: StopReason,
    pub steps: u64,
    /// Sizes of the two groups `{i : ⟨u_0, u_i⟩ ≥ 0}` and the rest, larger first.
    pub split: [usize; 2],
    /// Cluster counts of the successive epochs.
    pub epoch_nc: Vec<usize>,
    /// For runs stopped by activity, see [`cross_activation`].
    pub cross_activation: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub runs: u64,
    pub polarized_fraction: f64,
    /// Median over polarized runs; absent when none polarized.
    pub median_steps: Option<f64>,
    pub split_sizes: Vec<[usize; 2]>,
    /// Count of runs by smaller group size.
    pub split_histogram: BTreeMap<usize, u64>,
    /// Median of `smaller group / n`.
    pub median_min_group_fraction: f64,
    /// Count of consecutive epoch cluster counts, keyed `"a->b"`.
    pub nc_transitions: BTreeMap<String, u64>,
    pub nc_sequences: Vec<Vec<usize>>,
    /// Fraction of activity-stopped runs with `cross_activation = true`.
    pub cross_activation_fraction: Option<f64>,
    pub results: Vec<RunResult>,
}

/// Sign split relative to agent 0.
pub fn split_sizes(config: &Configuration) -> [usize; 2] {
    let n = config.n();
    let plus = (0..n).filter(|&i| config.corr(0, i) >= 0.0).count();
    [plus.max(n - plus), plus.min(n - plus)]
}

fn median(xs: &mut [f64]) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    Some(if xs.len() % 2 == 1 {
        xs[m]
    } else {
        (xs[m - 1] + xs[m]) / 2.0
    })
}

/// Whether activity at `end` came from the cross correlations: with the
/// clusters of `start`, `δ₁(end) < ε₁`. False when `start` has no partition.
pub fn cross_activation(start: &Configuration, end: &Configuration, eps1: f64) -> bool {
    match clusters(&correlation(start)) {
        Ok(p) => potentials(&correlation(end), &p).delta1 < eps1,
        Err(_) => false,
    }
}

/// Runs `runs` trajectories; run `r` draws its start from stream `r` of the
/// init seed and its interactions from stream `r` of the step seed.
pub fn run_ensemble(
    template: &ProcessParams,
    init: &InitKind,
    runs: u64,
) -> Result<EnsembleSummary> {
    template.validate()?;
    let (eps, eps1) = template.record_eps;
    let results: Vec<RunResult> = (0..runs)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream_rng(derive_seed(template.seed, TAG_INIT), r);
            let c0 = sample_initial_with(template.n, template.d, init, &mut rng)?;
            let params = ProcessParams {
                stream: r,
                ..template.clone()
            };
            let out = simulate(&params, &c0)?;
            let cross_activation = match (out.reason, params.stop.activity) {
                (StopReason::Active, Some(act)) => {
                    Some(cross_activation(&c0, &out.config, act.eps1))
                }
                _ => None,
            };
            Ok(RunResult {
                run: r,
                reason: out.reason,
                steps: out.steps,
                split: split_sizes(&out.config),
                epoch_nc: epochs(&out.trace, eps, eps1).iter().map(|e| e.nc).collect(),
                cross_activation,
            })
        })
        .collect::<Result<_>>()?;
    Ok(summarize(template.n, results))
}

pub fn summarize(n: usize, results: Vec<RunResult>) -> EnsembleSummary {
    let runs = results.len() as u64;
    let polarized: Vec<&RunResult> = results
        .iter()
        .filter(|r| r.reason == StopReason::Polarized)
        .collect();
    let mut steps: Vec<f64> = polarized.iter().map(|r| r.steps as f64).collect();
    let mut split_histogram = BTreeMap::new();
    for r in &results {
        *split_histogram.entry(r.split[1]).or_insert(0) += 1;
    }
    let mut mins: Vec<f64> = results
        .iter()
        .map(|r| r.split[1] as f64 / n as f64)
        .collect();
    let mut nc_transitions = BTreeMap::new();
    for r in &results {
        for w in r.epoch_nc.windows(2) {
            *nc_transitions
                .entry(format!("{}->{}", w[0], w[1]))
                .or_insert(0) += 1;
        }
    }
    let act: Vec<bool> = results.iter().filter_map(|r| r.cross_activation).collect();
    EnsembleSummary {
        runs,
        polarized_fraction: polarized.len() as f64 / runs.max(1) as f64,
        median_steps: median(&mut steps),
        split_sizes: results.iter().map(|r| r.split).collect(),
        split_histogram,
        median_min_group_fraction: median(&mut mins).unwrap_or(0.0),
        nc_transitions,
        nc_sequences: results.iter().map(|r| r.epoch_nc.clone()).collect(),
        cross_activation_fraction: (!act.is_empty())
            .then(|| act.iter().filter(|&&x| x).count() as f64 / act.len() as f64),
        results,
    }
}
