//! Monte Carlo checks of the probabilistic statements: the two-chain escape
//! bound, the drift version of Azuma's inequality, the per-block properties
//! of `(Q₀, Q₁)` and the conditional drift of `δ′`.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{clusters, delta_prime, is_inactive, potentials, ClusterPartition};
use crate::constants::{Constants, ShippedTable};
use crate::dynamics::{derive_seed, random_unit, stream_rng, SimRng};
use crate::error::{Error, Result};
use crate::geometry::{correlation, predicted_row, Configuration, Interaction, UpdateRule};
use crate::sampler::{sample_inactive, InactiveSpec, ScatterMode};

pub const TAG_TWO_CHAIN: u64 = 3;
pub const TAG_AZUMA: u64 = 4;
pub const TAG_BLOCK_INIT: u64 = 5;
pub const TAG_BLOCK_PATH: u64 = 6;
pub const TAG_REPLICA: u64 = 7;
pub const TAG_DPRIME: u64 = 8;

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959964;

/// Wilson score interval for `k` successes in `n` trials.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Wilson {
    pub lo: f64,
    pub hi: f64,
    pub half_width: f64,
}

pub fn wilson(k: u64, n: u64, z: f64) -> Wilson {
    if n == 0 {
        return Wilson {
            lo: 0.0,
            hi: 1.0,
            half_width: 0.5,
        };
    }
    let (k, n) = (k as f64, n as f64);
    let p = k / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let hw = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    Wilson {
        lo: (center - hw).max(0.0),
        hi: (center + hw).min(1.0),
        half_width: hw,
    }
}

/// Common JSON layout of lab outputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabReport {
    pub estimate: f64,
    pub wilson_interval: Option<[f64; 2]>,
    pub bound: f64,
    pub trials: u64,
    pub seed: u64,
    pub kernel_id: String,
    pub violations: Vec<serde_json::Value>,
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    pub details: serde_json::Value,
}

// ---------------------------------------------------------------- two chains

/// Step law for `(P₀, P₁)`. Implementations must keep
/// `|ΔP₀| ≤ C`, `E ΔP₀ ≤ −1/C`, `P₁' ≥ min(P₀, P₁) − C`, and when
/// `P₁ ≤ P₀ − C` also `|ΔP₁| ≤ C`, `E ΔP₁ ≥ 1/C`.
pub trait ChainKernel: Sync {
    fn id(&self) -> String;
    fn step(&self, p0: f64, p1: f64, c: f64, rng: &mut SimRng) -> (f64, f64);
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum P0Law {
    /// `−C` or `C − 2/C`, each with probability ½.
    TwoPoint,
    /// Always `−1/C`.
    Deterministic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum P1Law {
    /// Below `P₀ − C`: `+C` or `−C + 2/C`. Otherwise drops to `min(P₀, P₁) − C`
    /// with probability ½ and stays put otherwise.
    Compliant,
    /// Always `+C`.
    AlwaysUp,
}

/// The built-in kernels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StdKernel {
    pub p0: P0Law,
    pub p1: P1Law,
}

impl Default for StdKernel {
    fn default() -> Self {
        StdKernel {
            p0: P0Law::TwoPoint,
            p1: P1Law::Compliant,
        }
    }
}

impl ChainKernel for StdKernel {
    fn id(&self) -> String {
        let p0 = match self.p0 {
            P0Law::TwoPoint => "two-point",
            P0Law::Deterministic => "deterministic",
        };
        let p1 = match self.p1 {
            P1Law::Compliant => "compliant",
            P1Law::AlwaysUp => "always-up",
        };
        format!("p0={p0},p1={p1}")
    }

    fn step(&self, p0: f64, p1: f64, c: f64, rng: &mut SimRng) -> (f64, f64) {
        let n0 = match self.p0 {
            P0Law::TwoPoint => {
                if rng.random_bool(0.5) {
                    p0 - c
                } else {
                    p0 + c - 2.0 / c
                }
            }
            P0Law::Deterministic => p0 - 1.0 / c,
        };
        let n1 = match self.p1 {
            P1Law::AlwaysUp => p1 + c,
            P1Law::Compliant if p1 <= p0 - c => {
                if rng.random_bool(0.5) {
                    p1 + c
                } else {
                    p1 - c + 2.0 / c
                }
            }
            P1Law::Compliant => {
                if rng.random_bool(0.5) {
                    p0.min(p1) - c
                } else {
                    p1
                }
            }
        };
        (n0, n1)
    }
}

const BOUND_SLACK: f64 = 1e-9;

/// Checks the almost-sure conditions on one step.
fn check_step(p0: f64, p1: f64, n0: f64, n1: f64, c: f64) -> Option<String> {
    let lim = c * (1.0 + BOUND_SLACK);
    if (n0 - p0).abs() > lim {
        return Some(format!("|dP0| = {} exceeds C = {c}", (n0 - p0).abs()));
    }
    if n1 < p0.min(p1) - lim {
        return Some(format!(
            "P1' = {n1} below min(P0, P1) - C = {}",
            p0.min(p1) - c
        ));
    }
    if p1 <= p0 - c && (n1 - p1).abs() > lim {
        return Some(format!(
            "|dP1| = {} exceeds C = {c} while P1 <= P0 - C",
            (n1 - p1).abs()
        ));
    }
    None
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoChainParams {
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "C_min")]
    pub c_min: f64,
    #[serde(rename = "C_tilde")]
    pub c_tilde: f64,
    /// Defaults to `C_start + 10·C`.
    pub p0_init: Option<f64>,
    /// Defaults to `P₀(0)`.
    pub p1_init: Option<f64>,
    pub kernel: StdKernel,
    pub t_max: u64,
    pub trials: u64,
    pub seed: u64,
}

impl TwoChainParams {
    /// Shipped `C`, `C_min`, `C̃` with the default kernels.
    pub fn shipped(trials: u64, seed: u64) -> Result<Self> {
        let t = ShippedTable::load()?.two_chain;
        Ok(TwoChainParams {
            c: t.c,
            c_min: t.c_min,
            c_tilde: t.c_tilde,
            p0_init: None,
            p1_init: None,
            kernel: StdKernel::default(),
            t_max: 1_000_000,
            trials,
            seed,
        })
    }

    pub fn c_start(&self) -> f64 {
        self.c_min + self.c_tilde
    }

    pub fn initial(&self) -> (f64, f64) {
        let p0 = self.p0_init.unwrap_or(self.c_start() + 10.0 * self.c);
        (p0, self.p1_init.unwrap_or(p0))
    }

    fn validate(&self) -> Result<()> {
        if !(self.c >= 1.0) || !self.c_min.is_finite() || !(self.c_tilde > 0.0) {
            return Err(Error::InvalidParameter(
                "two-chain needs C >= 1, finite C_min, C_tilde > 0".into(),
            ));
        }
        let (p0, p1) = self.initial();
        if !(p0.min(p1) > self.c_start()) {
            return Err(Error::InvalidParameter(format!(
                "initial values ({p0}, {p1}) must exceed C_start = {}",
                self.c_start()
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Escape {
    P0Crossed,
    P1Crossed,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub t0: u64,
    /// `None` when the trial hit `t_max`.
    pub escaped_via: Option<Escape>,
    pub capped: bool,
    pub p0: f64,
    pub p1: f64,
}

fn run_trial(p: &TwoChainParams, kernel: &dyn ChainKernel, trial: u64) -> Result<TrialOutcome> {
    let mut rng = stream_rng(derive_seed(p.seed, TAG_TWO_CHAIN), trial);
    let (mut p0, mut p1) = p.initial();
    let c_start = p.c_start();
    let mut t = 0u64;
    loop {
        // Reaching a threshold exactly counts as crossing it.
        let escaped = if p1 <= p.c_min {
            Some(Escape::P1Crossed)
        } else if p0 <= c_start {
            Some(Escape::P0Crossed)
        } else {
            None
        };
        if escaped.is_some() || t >= p.t_max {
            return Ok(TrialOutcome {
                t0: t,
                escaped_via: escaped,
                capped: escaped.is_none(),
                p0,
                p1,
            });
        }
        let (n0, n1) = kernel.step(p0, p1, p.c, &mut rng);
        if let Some(detail) = check_step(p0, p1, n0, n1, p.c) {
            return Err(Error::KernelViolation {
                step: t,
                detail: format!("trial {trial}: {detail}"),
            });
        }
        p0 = n0;
        p1 = n1;
        t += 1;
    }
}

/// Runs `params.trials` independent trials with the given kernel.
pub fn run_two_chain_with(
    params: &TwoChainParams,
    kernel: &dyn ChainKernel,
) -> Result<Vec<TrialOutcome>> {
    params.validate()?;
    (0..params.trials)
        .into_par_iter()
        .map(|k| run_trial(params, kernel, k))
        .collect()
}

pub fn run_two_chain(params: &TwoChainParams) -> Result<Vec<TrialOutcome>> {
    run_two_chain_with(params, &params.kernel)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoChainSummary {
    pub trials: u64,
    pub p1_crossed: u64,
    pub capped: u64,
    pub estimate: f64,
    pub wilson: Wilson,
    pub capped_fraction: f64,
    pub mean_t0: f64,
    pub max_t0: u64,
}

pub fn summarize_two_chain(outcomes: &[TrialOutcome]) -> TwoChainSummary {
    let trials = outcomes.len() as u64;
    let p1 = outcomes
        .iter()
        .filter(|o| o.escaped_via == Some(Escape::P1Crossed))
        .count() as u64;
    let capped = outcomes.iter().filter(|o| o.capped).count() as u64;
    let tf = trials.max(1) as f64;
    TwoChainSummary {
        trials,
        p1_crossed: p1,
        capped,
        estimate: p1 as f64 / tf,
        wilson: wilson(p1, trials, Z95),
        capped_fraction: capped as f64 / tf,
        mean_t0: outcomes.iter().map(|o| o.t0 as f64).sum::<f64>() / tf,
        max_t0: outcomes.iter().map(|o| o.t0).max().unwrap_or(0),
    }
}

pub fn two_chain_report(params: &TwoChainParams, outcomes: &[TrialOutcome]) -> LabReport {
    let s = summarize_two_chain(outcomes);
    LabReport {
        estimate: s.estimate,
        wilson_interval: Some([s.wilson.lo, s.wilson.hi]),
        bound: 0.3,
        trials: s.trials,
        seed: params.seed,
        kernel_id: params.kernel.id(),
        violations: Vec::new(),
        details: serde_json::json!({
            "params": params,
            "C_start": params.c_start(),
            "p1_crossed": s.p1_crossed,
            "capped": s.capped,
            "capped_fraction": s.capped_fraction,
            "wilson_half_width": s.wilson.half_width,
            "mean_t0": s.mean_t0,
            "max_t0": s.max_t0,
        }),
    }
}

/// One row of a `C̃` calibration sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRow {
    pub c_tilde: f64,
    pub estimate: f64,
    pub half_width: f64,
}

/// Smallest multiple `m·C` (`m ≤ max_multiple`) whose P₁-escape estimate plus
/// three Wilson half-widths is at most `target`; returns it with the sweep.
pub fn calibrate_c_tilde(
    c: f64,
    c_min: f64,
    trials: u64,
    seed: u64,
    target: f64,
    max_multiple: u32,
) -> Result<(Option<f64>, Vec<CalibrationRow>)> {
    let mut rows = Vec::new();
    for m in 1..=max_multiple {
        let p = TwoChainParams {
            c,
            c_min,
            c_tilde: m as f64 * c,
            p0_init: None,
            p1_init: None,
            kernel: StdKernel::default(),
            t_max: 1_000_000,
            trials,
            seed,
        };
        let s = summarize_two_chain(&run_two_chain(&p)?);
        rows.push(CalibrationRow {
            c_tilde: p.c_tilde,
            estimate: s.estimate,
            half_width: s.wilson.half_width,
        });
        if s.estimate + 3.0 * s.wilson.half_width <= target {
            return Ok((Some(p.c_tilde), rows));
        }
    }
    Ok((None, rows))
}

// ---------------------------------------------------------------- Azuma

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AzumaKernel {
    /// `−c₁` or `c₁ − 2c₂`, each with probability ½ (mean `−c₂`).
    TwoPoint,
    /// Always `−c₂`.
    Deterministic,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AzumaParams {
    pub c1: f64,
    pub c2: f64,
    pub t: u64,
    pub trials: u64,
    pub seed: u64,
    pub kernel: AzumaKernel,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AzumaResult {
    pub t: u64,
    /// Empirical `Pr[X(t) ≥ X(0) − c₂t/2]`.
    pub empirical: f64,
    /// `exp(−c₂²t/(32c₁²))`.
    pub bound: f64,
    pub hits: u64,
    pub trials: u64,
}

pub fn azuma_bound(c1: f64, c2: f64, t: u64) -> f64 {
    (-(c2 * c2) * t as f64 / (32.0 * c1 * c1)).exp()
}

pub fn azuma_tail(p: &AzumaParams) -> Result<AzumaResult> {
    if !(p.c1 > 0.0 && p.c2 > 0.0 && p.c2 <= p.c1) || p.trials == 0 {
        return Err(Error::InvalidParameter(format!(
            "azuma needs 0 < c2 <= c1 and trials >= 1; got c1={}, c2={}, trials={}",
            p.c1, p.c2, p.trials
        )));
    }
    let threshold = -p.c2 * p.t as f64 / 2.0;
    let (down, up) = (-p.c1, p.c1 - 2.0 * p.c2);
    let hits: u64 = (0..p.trials)
        .into_par_iter()
        .map(|k| {
            let x = match p.kernel {
                AzumaKernel::Deterministic => -p.c2 * p.t as f64,
                AzumaKernel::TwoPoint => {
                    let mut rng = stream_rng(derive_seed(p.seed, TAG_AZUMA), k);
                    (0..p.t)
                        .map(|_| if rng.random_bool(0.5) { up } else { down })
                        .sum()
                }
            };
            u64::from(x >= threshold)
        })
        .sum();
    Ok(AzumaResult {
        t: p.t,
        empirical: hits as f64 / p.trials as f64,
        bound: azuma_bound(p.c1, p.c2, p.t),
        hits,
        trials: p.trials,
    })
}

// ---------------------------------------------------------------- δ′ drift

/// `E[δ′(t+1) | U^t] − δ′(t)` under uniform pairs, by enumerating all `n²`
/// ordered pairs through the closed-form row update.
pub fn delta_prime_drift_exact(config: &Configuration, rule: &UpdateRule) -> Result<f64> {
    let a = correlation(config);
    let n = a.n();
    let mut total = 0.0;
    for i in 0..n {
        let old: f64 = (0..n)
            .filter(|&k| k != i)
            .map(|k| a.get(i, k).powi(2))
            .sum();
        for ell in 0..n {
            if ell == i {
                continue;
            }
            let row = predicted_row(&a, i, ell, rule)?;
            let new: f64 = (0..n).filter(|&k| k != i).map(|k| row[k] * row[k]).sum();
            total += 2.0 * (new - old);
        }
    }
    Ok(total / (n * n) as f64)
}

/// Monte Carlo estimate of the same drift: `(mean, standard error)`.
pub fn delta_prime_drift_mc(
    config: &Configuration,
    rule: &UpdateRule,
    samples: u64,
    seed: u64,
) -> Result<(f64, f64)> {
    let base = delta_prime(&correlation(config));
    let n = config.n();
    let mut rng = stream_rng(derive_seed(seed, TAG_DPRIME), u64::MAX);
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    let mut c = config.clone();
    for _ in 0..samples {
        let k = rng.random_range(0..n * n);
        let x = Interaction::new(k / n, k % n);
        c.clone_from(config);
        c.apply_in_place(x, rule)?;
        let v = delta_prime(&correlation(&c)) - base;
        sum += v;
        sum_sq += v * v;
    }
    let m = samples as f64;
    let mean = sum / m;
    let var = (sum_sq / m - mean * mean).max(0.0);
    Ok((mean, (var / m).sqrt()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriftFinding {
    pub index: u64,
    pub n: usize,
    pub d: usize,
    pub drift: f64,
    pub opinions: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DprimeScanParams {
    pub configs: u64,
    /// Inclusive range for `n`.
    pub n: (usize, usize),
    /// Inclusive range for `d`.
    pub d: (usize, usize),
    pub alpha: f64,
    /// A drift below `−tol` is a finding.
    pub tol: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DprimeScan {
    pub configs: u64,
    pub min_drift: f64,
    pub findings: Vec<DriftFinding>,
}

/// Exact drift on uniformly random configurations with `n`, `d` drawn uniformly from their ranges.
pub fn dprime_scan(p: &DprimeScanParams) -> Result<DprimeScan> {
    if p.n.0 < 2 || p.n.1 < p.n.0 || p.d.0 < 2 || p.d.1 < p.d.0 {
        return Err(Error::InvalidParameter(format!(
            "bad n/d ranges {:?}, {:?}",
            p.n, p.d
        )));
    }
    let rule = UpdateRule::linear(p.alpha)?;
    let rows: Vec<(f64, Option<DriftFinding>)> = (0..p.configs)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream_rng(derive_seed(p.seed, TAG_DPRIME), k);
            let n = rng.random_range(p.n.0..=p.n.1);
            let d = rng.random_range(p.d.0..=p.d.1);
            let c = Configuration::from_rows((0..n).map(|_| random_unit(d, &mut rng)).collect())?;
            let drift = delta_prime_drift_exact(&c, &rule)?;
            let finding = (drift < -p.tol).then(|| DriftFinding {
                index: k,
                n,
                d,
                drift,
                opinions: c.rows(),
            });
            Ok((drift, finding))
        })
        .collect::<Result<_>>()?;
    Ok(DprimeScan {
        configs: p.configs,
        min_drift: rows.iter().map(|r| r.0).fold(f64::INFINITY, f64::min),
        findings: rows.into_iter().filter_map(|r| r.1).collect(),
    })
}

// ---------------------------------------------------------------- block properties

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockCheckParams {
    pub n: usize,
    pub d: usize,
    pub alpha: f64,
    /// Probe states must be `(eps, eps)`-inactive.
    pub eps: f64,
    /// Every state inside a block must stay `(eps_stay, eps_stay)`-inactive.
    pub eps_stay: f64,
    pub t_block: u64,
    #[serde(rename = "C")]
    pub c: f64,
    pub replicas: u64,
    /// Number of block boundaries to probe.
    pub probes: usize,
    /// Blocks walked along one trajectory before a fresh start is drawn.
    pub max_blocks_per_trajectory: usize,
    pub init: InactiveSpec,
    pub seed: u64,
}

impl BlockCheckParams {
    /// Table values of `ε`, `T`, `C` for `(n, d, α)`; two equal clusters with
    /// axis-aligned scatter, so `d ≥ 4`.
    pub fn from_constants(n: usize, d: usize, alpha: f64, seed: u64) -> Result<Self> {
        let k = Constants::derive(n, d, alpha)?;
        let sizes = vec![n / 2, n - n / 2];
        Ok(BlockCheckParams {
            n,
            d,
            alpha,
            eps: k.eps_block,
            eps_stay: k.eps_base,
            t_block: k.t,
            c: k.c_block,
            replicas: 2000,
            probes: 1000,
            max_blocks_per_trajectory: 20,
            init: InactiveSpec {
                sizes,
                cross: (1e-40, k.eps_block / 4.0),
                within: (1e-30, k.eps_block / 4.0),
                scatter: ScatterMode::Axes,
                require: Some((k.eps_block, k.eps_block)),
                shuffle: true,
            },
            seed,
        })
    }
}

/// A probe state may be checked when it is `(ε, ε)`-inactive, clusterable and has `P₀ < ∞`.
pub fn probe_eligible(config: &Configuration, eps: f64) -> Option<ClusterPartition> {
    let a = correlation(config);
    if !is_inactive(&a, eps, eps).inactive {
        return None;
    }
    let p = clusters(&a).ok()?;
    (potentials(&a, &p).delta0 > 0.0).then_some(p)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockViolation {
    pub probe: usize,
    pub replica: u64,
    pub check: String,
    pub detail: String,
    pub opinions: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeResult {
    pub trajectory: u64,
    pub block: usize,
    #[serde(rename = "P0", with = "crate::serde_inf")]
    pub p0: f64,
    #[serde(rename = "P1", with = "crate::serde_inf")]
    pub p1: f64,
    pub mean_dp0: f64,
    pub se_dp0: f64,
    /// Present when `P₁ ≤ P₀ − C`.
    pub mean_dp1: Option<f64>,
    pub se_dp1: Option<f64>,
    pub max_abs_dp0: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockCheckReport {
    pub params: BlockCheckParams,
    pub probed: usize,
    pub trajectories: u64,
    pub deterministic_checks: u64,
    pub deterministic_violations: u64,
    /// First few violations with snapshots.
    pub violations: Vec<BlockViolation>,
    /// Probes whose mean `ΔP₀` is not significantly positive (within 4σ).
    pub p0_sign_ok: usize,
    /// Probes with mean `ΔP₀ ≤ −1/C` within 4σ.
    pub p0_margin_ok: usize,
    pub p1_probed: usize,
    pub p1_sign_ok: usize,
    pub p1_margin_ok: usize,
    pub max_abs_dp0: f64,
    pub probes: Vec<ProbeResult>,
}

impl BlockCheckReport {
    pub fn p0_sign_fraction(&self) -> f64 {
        self.p0_sign_ok as f64 / self.probed.max(1) as f64
    }

    pub fn p1_sign_fraction(&self) -> f64 {
        if self.p1_probed == 0 {
            1.0
        } else {
            self.p1_sign_ok as f64 / self.p1_probed as f64
        }
    }
}

const MAX_SNAPSHOTS: usize = 20;

/// Walks `max_blocks` blocks from a fresh inactive start and returns the eligible boundaries.
fn collect_probes(
    p: &BlockCheckParams,
    rule: &UpdateRule,
    traj: u64,
) -> Result<Vec<(u64, usize, Configuration)>> {
    let mut rng = stream_rng(derive_seed(p.seed, TAG_BLOCK_INIT), traj);
    let mut config = sample_inactive(p.d, &p.init, &mut rng)?;
    let mut path = stream_rng(derive_seed(p.seed, TAG_BLOCK_PATH), traj);
    let n = p.n;
    let mut out = Vec::new();
    for b in 0..p.max_blocks_per_trajectory {
        if probe_eligible(&config, p.eps).is_none() {
            break;
        }
        out.push((traj, b, config.clone()));
        for _ in 0..p.t_block {
            let k = path.random_range(0..n * n);
            config.apply_in_place(Interaction::new(k / n, k % n), rule)?;
        }
    }
    Ok(out)
}

struct ProbeStats {
    result: ProbeResult,
    checks: u64,
    violations: Vec<BlockViolation>,
    violation_count: u64,
}

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let m = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / m;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0).max(1.0);
    (mean, (var / m).sqrt())
}

fn check_probe(
    p: &BlockCheckParams,
    rule: &UpdateRule,
    idx: usize,
    traj: u64,
    block: usize,
    config: &Configuration,
) -> Result<ProbeStats> {
    let part = probe_eligible(config, p.eps).expect("probe states are filtered");
    let pot = potentials(&correlation(config), &part);
    let (p0, p1) = (pot.q0, pot.q1);
    let p1_regime = p1.is_finite() && p1 <= p0 - p.c;
    let lim = p.c * (1.0 + BOUND_SLACK);
    let n = p.n;
    let seed = derive_seed(derive_seed(p.seed, TAG_REPLICA), idx as u64);
    let mut dp0 = Vec::with_capacity(p.replicas as usize);
    let mut dp1 = Vec::new();
    let mut violations = Vec::new();
    let mut violation_count = 0u64;
    let mut checks = 0u64;
    let mut c = config.clone();
    for m in 0..p.replicas {
        let mut rng = stream_rng(seed, m);
        c.clone_from(config);
        let mut stay_fail = None;
        for s in 0..p.t_block {
            let k = rng.random_range(0..n * n);
            c.apply_in_place(Interaction::new(k / n, k % n), rule)?;
            if stay_fail.is_none()
                && !is_inactive(&correlation(&c), p.eps_stay, p.eps_stay).inactive
            {
                stay_fail = Some(s + 1);
            }
        }
        let after = potentials(&correlation(&c), &part);
        let (n0, n1) = (after.q0, after.q1);
        let mut fails: Vec<(&str, String)> = Vec::new();
        if let Some(s) = stay_fail {
            fails.push((
                "stays-inactive",
                format!("left ({0}, {0})-inactivity at step {s}", p.eps_stay),
            ));
        }
        if !((n0 - p0).abs() <= lim) {
            fails.push(("p0-bounded", format!("P0 {p0} -> {n0}")));
        }
        if !(n1 >= p0.min(p1) - lim) {
            fails.push(("p1-lower-bound", format!("P1 {p1} -> {n1}, P0 = {p0}")));
        }
        checks += 3;
        if p1_regime {
            checks += 1;
            if !((n1 - p1).abs() <= lim) {
                fails.push(("p1-bounded", format!("P1 {p1} -> {n1}")));
            }
            // An exactly collapsed cluster gives P1 = ∞; count it as the largest allowed gain.
            dp1.push((n1 - p1).min(p.c));
        }
        dp0.push(n0 - p0);
        for (check, detail) in fails {
            violation_count += 1;
            if violations.len() < MAX_SNAPSHOTS {
                violations.push(BlockViolation {
                    probe: idx,
                    replica: m,
                    check: check.into(),
                    detail,
                    opinions: config.rows(),
                });
            }
        }
    }
    let (mean_dp0, se_dp0) = mean_se(&dp0);
    let (mean_dp1, se_dp1) = if p1_regime {
        let (a, b) = mean_se(&dp1);
        (Some(a), Some(b))
    } else {
        (None, None)
    };
    Ok(ProbeStats {
        result: ProbeResult {
            trajectory: traj,
            block,
            p0,
            p1,
            mean_dp0,
            se_dp0,
            mean_dp1,
            se_dp1,
            max_abs_dp0: dp0.iter().fold(0.0f64, |m, x| m.max(x.abs())),
        },
        checks,
        violations,
        violation_count,
    })
}

/// Probes block boundaries along simulated trajectories; see [`BlockCheckReport`].
pub fn verify_block_properties(p: &BlockCheckParams) -> Result<BlockCheckReport> {
    if p.init.n() != p.n || p.replicas < 2 || p.t_block == 0 || !(p.c > 0.0) {
        return Err(Error::InvalidParameter(
            "block check needs init of size n, >= 2 replicas, T >= 1 and C > 0".into(),
        ));
    }
    let rule = UpdateRule::linear(p.alpha)?;
    let mut states: Vec<(u64, usize, Configuration)> = Vec::new();
    let mut next_traj = 0u64;
    const BATCH: u64 = 64;
    while states.len() < p.probes {
        let batch: Vec<Vec<(u64, usize, Configuration)>> = (next_traj..next_traj + BATCH)
            .into_par_iter()
            .map(|r| collect_probes(p, &rule, r))
            .collect::<Result<_>>()?;
        next_traj += BATCH;
        states.extend(batch.into_iter().flatten());
        if next_traj > 1_000_000 {
            return Err(Error::InvalidParameter(
                "no eligible block boundaries found".into(),
            ));
        }
    }
    states.truncate(p.probes);
    let trajectories = states.last().map_or(0, |s| s.0 + 1);
    let stats: Vec<ProbeStats> = states
        .par_iter()
        .enumerate()
        .map(|(idx, (traj, block, c))| check_probe(p, &rule, idx, *traj, *block, c))
        .collect::<Result<_>>()?;

    let inv_c = 1.0 / p.c;
    let mut r = BlockCheckReport {
        params: p.clone(),
        probed: stats.len(),
        trajectories,
        deterministic_checks: 0,
        deterministic_violations: 0,
        violations: Vec::new(),
        p0_sign_ok: 0,
        p0_margin_ok: 0,
        p1_probed: 0,
        p1_sign_ok: 0,
        p1_margin_ok: 0,
        max_abs_dp0: 0.0,
        probes: Vec::with_capacity(stats.len()),
    };
    for s in stats {
        r.deterministic_checks += s.checks;
        r.deterministic_violations += s.violation_count;
        for v in s.violations {
            if r.violations.len() < MAX_SNAPSHOTS {
                r.violations.push(v);
            }
        }
        let pr = s.result;
        r.p0_sign_ok += usize::from(pr.mean_dp0 <= 4.0 * pr.se_dp0);
        r.p0_margin_ok += usize::from(pr.mean_dp0 <= -inv_c + 4.0 * pr.se_dp0);
        if let (Some(m), Some(se)) = (pr.mean_dp1, pr.se_dp1) {
            r.p1_probed += 1;
            r.p1_sign_ok += usize::from(m >= -4.0 * se);
            r.p1_margin_ok += usize::from(m >= inv_c - 4.0 * se);
        }
        r.max_abs_dp0 = r.max_abs_dp0.max(pr.max_abs_dp0);
        r.probes.push(pr);
    }
    Ok(r)
}
