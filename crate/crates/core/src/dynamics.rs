//! The random process: pair sampling, stepping, stopping rules and traces.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::analysis::{
    clusters, delta_prime, epsilon_base, is_inactive, is_separable, potentials, Potentials,
};
use crate::error::{Error, Result};
use crate::geometry::{correlation, ConfigFile, Configuration, Interaction, UpdateRule};
use crate::sampler::{sample_inactive, InactiveSpec};
use crate::serde_inf::{fmt_f64, parse_f64};

/// Identifier of the generator behind every random stream, stored in metadata.
pub const RNG_ID: &str = "rand_chacha::ChaCha8Rng(seed_from_u64, stream=trajectory)";

pub type SimRng = ChaCha8Rng;

/// Generator for trajectory `stream` under `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// SplitMix64 finalizer; used to derive independent seeds for sub-purposes.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed tag for initial-configuration sampling.
pub const TAG_INIT: u64 = 1;
/// Seed tag for the interaction sequence.
pub const TAG_STEPS: u64 = 2;

/// Distribution of the ordered pair `(influenced, influencer)`.
#[derive(Clone, Debug)]
pub enum PairDist {
    Uniform,
    Explicit {
        n: usize,
        probs: Vec<f64>,
        index: WeightedIndex<f64>,
        full_support: bool,
    },
}

impl PartialEq for PairDist {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (PairDist::Uniform, PairDist::Uniform) => true,
            (PairDist::Explicit { n, probs, .. }, PairDist::Explicit { n: m, probs: q, .. }) => {
                n == m && probs == q
            }
            _ => false,
        }
    }
}

impl PairDist {
    /// `probs[i][j]` is the probability that `j` influences `i`.
    pub fn explicit(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n < 2 || rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidParameter(
                "pair distribution must be a square n x n matrix".into(),
            ));
        }
        let probs: Vec<f64> = rows.iter().flatten().copied().collect();
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidParameter(
                "pair probabilities must be nonnegative".into(),
            ));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "pair probabilities sum to {total}, not 1"
            )));
        }
        let index =
            WeightedIndex::new(&probs).map_err(|e| Error::InvalidParameter(e.to_string()))?;
        let full_support = probs.iter().all(|&p| p > 0.0);
        Ok(PairDist::Explicit {
            n,
            probs,
            index,
            full_support,
        })
    }

    /// Reads a JSON `n x n` matrix.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let rows: Vec<Vec<f64>> = serde_json::from_str(&text)
            .map_err(|e| Error::BadFile(format!("{}: {e}", path.display())))?;
        PairDist::explicit(&rows).map_err(|e| Error::BadFile(e.to_string()))
    }

    pub fn full_support(&self) -> bool {
        match self {
            PairDist::Uniform => true,
            PairDist::Explicit { full_support, .. } => *full_support,
        }
    }

    pub fn label(&self) -> String {
        match self {
            PairDist::Uniform => "uniform".into(),
            PairDist::Explicit { full_support, .. } => {
                format!("explicit(full_support={full_support})")
            }
        }
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Interaction {
        let k = match self {
            PairDist::Uniform => rng.random_range(0..n * n),
            PairDist::Explicit { index, .. } => index.sample(rng),
        };
        Interaction::new(k / n, k % n)
    }

    fn check_n(&self, n: usize) -> Result<()> {
        match self {
            PairDist::Explicit { n: m, .. } if *m != n => Err(Error::DimensionMismatch {
                expected: n,
                found: *m,
            }),
            _ => Ok(()),
        }
    }
}

/// Stop when, at a multiple of `period`, the state is not `(eps, eps1)`-inactive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActivityStop {
    pub eps: f64,
    pub eps1: f64,
    pub period: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StopCriteria {
    pub polarization_tol: Option<f64>,
    pub activity: Option<ActivityStop>,
    pub max_steps: u64,
}

impl Default for StopCriteria {
    fn default() -> Self {
        StopCriteria {
            polarization_tol: Some(1e-6),
            activity: None,
            max_steps: 1_000_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Polarized,
    Active,
    BudgetExhausted,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProcessParams {
    pub n: usize,
    pub d: usize,
    pub rule: UpdateRule,
    pub pair_dist: PairDist,
    pub seed: u64,
    /// Trajectory index; selects the RNG stream.
    pub stream: u64,
    /// Record every `sample_every` steps (plus `t = 0` and the final step).
    pub sample_every: u64,
    pub stop: StopCriteria,
    /// Thresholds for the `inactive` column of the trace.
    pub record_eps: (f64, f64),
    /// When set, each record also carries the separability flag at this tolerance.
    pub separability_tol: Option<f64>,
}

impl ProcessParams {
    /// Uniform pairs, linear rule, defaults elsewhere.
    pub fn new(n: usize, d: usize, alpha: f64, seed: u64) -> Result<Self> {
        let eb = epsilon_base(d, alpha);
        Ok(ProcessParams {
            n,
            d,
            rule: UpdateRule::linear(alpha)?,
            pair_dist: PairDist::Uniform,
            seed,
            stream: 0,
            sample_every: 1000,
            stop: StopCriteria::default(),
            record_eps: (eb, eb),
            separability_tol: None,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || self.d < 2 {
            return Err(Error::InvalidParameter(format!(
                "need n >= 2 and d >= 2, got n={}, d={}",
                self.n, self.d
            )));
        }
        self.rule.validate()?;
        self.pair_dist.check_n(self.n)?;
        if self.sample_every == 0 {
            return Err(Error::InvalidParameter(
                "sample_every must be positive".into(),
            ));
        }
        if let Some(a) = self.stop.activity {
            if a.period == 0 || !(a.eps > 0.0 && a.eps1 > 0.0) {
                return Err(Error::InvalidParameter(
                    "activity stop needs eps, eps1 > 0 and period >= 1".into(),
                ));
            }
        }
        if let Some(tol) = self.stop.polarization_tol {
            if !(tol > 0.0) {
                return Err(Error::InvalidParameter(
                    "polarization tolerance must be positive".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn alpha(&self) -> f64 {
        match self.rule {
            UpdateRule::Linear { alpha } | UpdateRule::Piecewise { alpha, .. } => alpha,
            UpdateRule::Tabulated { .. } => f64::NAN,
        }
    }
}

/// One row of a trace.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRecord {
    pub t: u64,
    /// Present when the configuration has a cluster partition.
    pub potentials: Option<Potentials>,
    pub delta_prime: f64,
    pub num_clusters: Option<usize>,
    /// The interaction that produced this state; absent at `t = 0`.
    pub interaction: Option<Interaction>,
    pub inactive: bool,
    /// Not persisted in the CSV.
    pub separable: Option<bool>,
}

impl TraceRecord {
    pub fn of(
        t: u64,
        config: &Configuration,
        interaction: Option<Interaction>,
        eps: (f64, f64),
        separability_tol: Option<f64>,
    ) -> Self {
        let a = correlation(config);
        let part = clusters(&a).ok();
        TraceRecord {
            t,
            potentials: part.as_ref().map(|p| potentials(&a, p)),
            delta_prime: delta_prime(&a),
            num_clusters: part.as_ref().map(|p| p.len()),
            interaction,
            inactive: is_inactive(&a, eps.0, eps.1).inactive,
            separable: separability_tol.map(|tol| is_separable(&a, tol).separable),
        }
    }
}

/// Initial-state families.
#[derive(Clone, Debug, PartialEq)]
pub enum InitKind {
    /// Normalized standard Gaussian vectors.
    UniformSphere,
    /// `±normalize(c + spread·g)` around one random axis `c`, each sign with probability ½.
    Antipodal { spread: f64 },
    /// Clustered inactive states.
    Inactive(InactiveSpec),
    File {
        path: std::path::PathBuf,
        renormalize: bool,
    },
}

pub(crate) fn gaussian_vec<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<f64> {
    (0..d)
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect()
}

/// A uniformly random point on the sphere in `R^d`.
pub fn random_unit<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let mut g = gaussian_vec(d, rng);
        let nrm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nrm > 1e-8 {
            g.iter_mut().for_each(|x| *x /= nrm);
            return g;
        }
    }
}

/// Draws an initial configuration using `rng`.
pub fn sample_initial_with<R: Rng + ?Sized>(
    n: usize,
    d: usize,
    kind: &InitKind,
    rng: &mut R,
) -> Result<Configuration> {
    if n < 2 || d < 2 {
        return Err(Error::InvalidParameter(format!(
            "need n >= 2 and d >= 2, got n={n}, d={d}"
        )));
    }
    match kind {
        InitKind::UniformSphere => {
            Configuration::from_rows((0..n).map(|_| random_unit(d, rng)).collect())
        }
        InitKind::Antipodal { spread } => {
            let c = random_unit(d, rng);
            let rows = (0..n)
                .map(|_| {
                    let s = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                    let g = gaussian_vec(d, rng);
                    c.iter()
                        .zip(&g)
                        .map(|(ci, gi)| s * (ci + spread * gi))
                        .collect()
                })
                .collect();
            Configuration::from_rows_renormalized(rows)
        }
        InitKind::Inactive(spec) => {
            if spec.n() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: spec.n(),
                });
            }
            sample_inactive(d, spec, rng)
        }
        InitKind::File { path, renormalize } => {
            let c = ConfigFile::load(path)?.to_config(*renormalize)?;
            if c.n() != n || c.dim() != d {
                return Err(Error::BadFile(format!(
                    "file holds n={}, d={} but n={n}, d={d} was requested",
                    c.n(),
                    c.dim()
                )));
            }
            Ok(c)
        }
    }
}

/// Draws an initial configuration; deterministic in `seed`.
pub fn sample_initial(n: usize, d: usize, kind: &InitKind, seed: u64) -> Result<Configuration> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, TAG_INIT));
    sample_initial_with(n, d, kind, &mut rng)
}

/// Draws one interaction from the pair distribution and applies it in place.
#[inline]
pub fn step<R: Rng + ?Sized>(
    config: &mut Configuration,
    rng: &mut R,
    params: &ProcessParams,
) -> Result<Interaction> {
    let x = params.pair_dist.sample(config.n(), rng);
    config.apply_in_place(x, &params.rule)?;
    Ok(x)
}

/// Tracks which pairs are within `tol` of parallel or antiparallel.
struct PolarizationTracker {
    tol_sq: f64,
    n: usize,
    settled: Vec<bool>,
    unsettled: usize,
}

impl PolarizationTracker {
    fn new(config: &Configuration, tol: f64) -> Self {
        let n = config.n();
        let mut t = PolarizationTracker {
            tol_sq: tol * tol,
            n,
            settled: vec![true; n * n],
            unsettled: 0,
        };
        for i in 0..n {
            for j in (i + 1)..n {
                let s = t.pair_settled(config, i, j);
                t.settled[i * n + j] = s;
                t.settled[j * n + i] = s;
                t.unsettled += usize::from(!s);
            }
        }
        t
    }

    #[inline]
    fn pair_settled(&self, config: &Configuration, i: usize, j: usize) -> bool {
        let (a, b) = (config.opinion(i), config.opinion(j));
        let (mut m, mut p) = (0.0, 0.0);
        for k in 0..a.len() {
            m += (a[k] - b[k]) * (a[k] - b[k]);
            p += (a[k] + b[k]) * (a[k] + b[k]);
        }
        f64::min(m, p) <= self.tol_sq
    }

    fn refresh_row(&mut self, config: &Configuration, i: usize) {
        let n = self.n;
        for j in 0..n {
            if j == i {
                continue;
            }
            let s = self.pair_settled(config, i, j);
            let old = self.settled[i * n + j];
            if s != old {
                if s {
                    self.unsettled -= 1;
                } else {
                    self.unsettled += 1;
                }
                self.settled[i * n + j] = s;
                self.settled[j * n + i] = s;
            }
        }
    }

    fn polarized(&self) -> bool {
        self.unsettled == 0
    }
}

#[derive(Clone, Debug)]
pub struct SimOutcome {
    pub config: Configuration,
    pub trace: Vec<TraceRecord>,
    pub reason: StopReason,
    /// Number of interactions performed.
    pub steps: u64,
}

/// Runs the process from `config0` until a stop criterion fires.
pub fn simulate(params: &ProcessParams, config0: &Configuration) -> Result<SimOutcome> {
    simulate_with(params, config0, |_, _| {})
}

/// As [`simulate`], calling `observe(t, config)` after every step.
pub fn simulate_with<F>(
    params: &ProcessParams,
    config0: &Configuration,
    mut observe: F,
) -> Result<SimOutcome>
where
    F: FnMut(u64, &Configuration),
{
    params.validate()?;
    if config0.n() != params.n || config0.dim() != params.d {
        return Err(Error::DimensionMismatch {
            expected: params.n,
            found: config0.n(),
        });
    }
    let mut rng = stream_rng(derive_seed(params.seed, TAG_STEPS), params.stream);
    let mut config = config0.clone();
    let mut tracker = params
        .stop
        .polarization_tol
        .map(|tol| PolarizationTracker::new(&config, tol));
    let record = |t: u64, c: &Configuration, x: Option<Interaction>| {
        TraceRecord::of(t, c, x, params.record_eps, params.separability_tol)
    };
    let mut trace = vec![record(0, &config, None)];
    let mut last = None;
    let mut t = 0u64;
    let reason = loop {
        if tracker.as_ref().is_some_and(|tr| tr.polarized()) {
            break StopReason::Polarized;
        }
        if let Some(act) = params.stop.activity {
            if t % act.period == 0
                && !is_inactive(&correlation(&config), act.eps, act.eps1).inactive
            {
                break StopReason::Active;
            }
        }
        if t >= params.stop.max_steps {
            break StopReason::BudgetExhausted;
        }
        let x = step(&mut config, &mut rng, params)?;
        t += 1;
        last = Some(x);
        if let Some(tr) = tracker.as_mut() {
            if !x.is_noop() {
                tr.refresh_row(&config, x.influenced);
            }
        }
        observe(t, &config);
        if t % params.sample_every == 0 {
            trace.push(record(t, &config, last));
        }
    };
    if trace.last().map(|r| r.t) != Some(t) {
        trace.push(record(t, &config, last));
    }
    Ok(SimOutcome {
        config,
        trace,
        reason,
        steps: t,
    })
}

/// Applies `schedule` in order without bookkeeping.
pub fn execute(
    config: &Configuration,
    schedule: &[Interaction],
    rule: &UpdateRule,
) -> Result<Configuration> {
    let mut c = config.clone();
    for &x in schedule {
        c.apply_in_place(x, rule)?;
    }
    Ok(c)
}

/// Applies `schedule` in order; element `k` of the potentials is taken after step `k`
/// (`None` when that state has no cluster partition).
pub fn run_scripted(
    config: &Configuration,
    schedule: &[Interaction],
    rule: &UpdateRule,
) -> Result<(Configuration, Vec<Option<Potentials>>)> {
    let mut c = config.clone();
    let mut pots = Vec::with_capacity(schedule.len());
    for &x in schedule {
        c.apply_in_place(x, rule)?;
        let a = correlation(&c);
        pots.push(clusters(&a).ok().map(|p| potentials(&a, &p)));
    }
    Ok((c, pots))
}

/// Header of the trace CSV.
pub const TRACE_HEADER: [&str; 10] = [
    "t",
    "delta0",
    "delta1",
    "Q0",
    "Q1",
    "delta_prime",
    "num_clusters",
    "inactive",
    "i",
    "j",
];

/// Writes a trace as CSV; missing values are empty fields.
pub fn write_trace<W: Write>(w: W, trace: &[TraceRecord]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(TRACE_HEADER)?;
    let opt = |x: Option<f64>| x.map(fmt_f64).unwrap_or_default();
    for r in trace {
        let p = r.potentials;
        out.write_record([
            r.t.to_string(),
            opt(p.map(|p| p.delta0)),
            opt(p.map(|p| p.delta1)),
            opt(p.map(|p| p.q0)),
            opt(p.map(|p| p.q1)),
            fmt_f64(r.delta_prime),
            r.num_clusters.map(|k| k.to_string()).unwrap_or_default(),
            r.inactive.to_string(),
            r.interaction
                .map(|x| x.influenced.to_string())
                .unwrap_or_default(),
            r.interaction
                .map(|x| x.influencer.to_string())
                .unwrap_or_default(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a trace written by [`write_trace`].
pub fn read_trace<R: Read>(r: R) -> Result<Vec<TraceRecord>> {
    let mut rdr = csv::Reader::from_reader(r);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header != TRACE_HEADER {
        return Err(Error::BadFile(format!(
            "unexpected trace header {header:?}"
        )));
    }
    let bad = |what: &str, v: &str| Error::BadFile(format!("bad {what} field {v:?}"));
    let num = |v: &str| -> Result<Option<f64>> {
        if v.is_empty() {
            Ok(None)
        } else {
            parse_f64(v).map(Some).ok_or_else(|| bad("numeric", v))
        }
    };
    let int = |v: &str| -> Result<Option<usize>> {
        if v.is_empty() {
            Ok(None)
        } else {
            v.parse().map(Some).map_err(|_| bad("integer", v))
        }
    };
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let f = |k: usize| rec.get(k).unwrap_or("");
        let t = f(0).parse().map_err(|_| bad("t", f(0)))?;
        let fields = [num(f(1))?, num(f(2))?, num(f(3))?, num(f(4))?];
        let potentials = match fields {
            [Some(delta0), Some(delta1), Some(q0), Some(q1)] => Some(Potentials {
                delta0,
                delta1,
                q0,
                q1,
                delta_prime: 0.0,
            }),
            _ => None,
        };
        let delta_prime = num(f(5))?.ok_or_else(|| bad("delta_prime", f(5)))?;
        let potentials = potentials.map(|p| Potentials { delta_prime, ..p });
        let inactive = f(7).parse().map_err(|_| bad("inactive", f(7)))?;
        let interaction = match (int(f(8))?, int(f(9))?) {
            (Some(i), Some(j)) => Some(Interaction::new(i, j)),
            _ => None,
        };
        out.push(TraceRecord {
            t,
            potentials,
            delta_prime,
            num_clusters: int(f(6))?,
            interaction,
            inactive,
            separable: None,
        });
    }
    Ok(out)
}

/// Sidecar describing how a trace was produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceMeta {
    pub seed: u64,
    pub stream: u64,
    pub n: usize,
    pub d: usize,
    pub alpha: f64,
    pub rule: UpdateRule,
    pub pair_dist: String,
    pub full_support: bool,
    #[serde(rename = "T_rec")]
    pub t_rec: u64,
    pub stop: StopCriteria,
    pub rng: String,
    pub reason: StopReason,
    pub steps: u64,
}

impl TraceMeta {
    pub fn new(params: &ProcessParams, outcome: &SimOutcome) -> Self {
        TraceMeta {
            seed: params.seed,
            stream: params.stream,
            n: params.n,
            d: params.d,
            alpha: params.alpha(),
            rule: params.rule.clone(),
            pair_dist: params.pair_dist.label(),
            full_support: params.pair_dist.full_support(),
            t_rec: params.sample_every,
            stop: params.stop,
            rng: RNG_ID.to_string(),
            reason: outcome.reason,
            steps: outcome.steps,
        }
    }
}
