//! Deterministic interaction schedules that drive a configuration into a
//! target state: inactivity, consistency between two clusters, growth of the
//! cross correlations, tighter clusters, and merging two clusters.
//!
//! Every builder only reads the configuration; run the result with
//! [`Schedule::execute`] and check the post-condition with the analysis module.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analysis::{clusters, is_consistent, realizing_pair, ClusterPartition};
use crate::constants::Constants;
use crate::dynamics::execute;
use crate::error::{Error, Result};
use crate::geometry::{
    correlation, self_reinforced, Configuration, CorrelationMatrix, Interaction, UpdateRule,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    PathToInactive,
    ReachConsistency,
    IncreaseDelta,
    Tighten,
    Collapse,
    Random,
}

/// A note attached to the steps `from..to`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Annotation {
    pub from: usize,
    pub to: usize,
    pub note: String,
}

/// An ordered list of interactions; `[i, j]` on disk means `j` influences `i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub provenance: Provenance,
    #[serde(with = "pairs")]
    pub steps: Vec<Interaction>,
    #[serde(default)]
    pub annotations: Vec<Annotation>,
}

mod pairs {
    use crate::geometry::Interaction;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(steps: &[Interaction], s: S) -> Result<S::Ok, S::Error> {
        let v: Vec<[usize; 2]> = steps.iter().map(|x| [x.influenced, x.influencer]).collect();
        v.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Interaction>, D::Error> {
        let v = Vec::<[usize; 2]>::deserialize(d)?;
        Ok(v.into_iter().map(|[i, j]| Interaction::new(i, j)).collect())
    }
}

impl Schedule {
    pub fn new(provenance: Provenance) -> Self {
        Schedule {
            provenance,
            steps: Vec::new(),
            annotations: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// `influencer` influences `influenced`, `times` times in a row.
    fn push_n(&mut self, influenced: usize, influencer: usize, times: u64) {
        if influenced == influencer {
            return;
        }
        for _ in 0..times {
            self.steps.push(Interaction::new(influenced, influencer));
        }
    }

    fn annotate(&mut self, from: usize, note: impl Into<String>) {
        let to = self.steps.len();
        if to > from {
            self.annotations.push(Annotation {
                from,
                to,
                note: note.into(),
            });
        }
    }

    /// Pads with `(0, 0)` no-ops up to `len`.
    fn pad_to(&mut self, len: usize) {
        let from = self.steps.len();
        while self.steps.len() < len {
            self.steps.push(Interaction::new(0, 0));
        }
        self.annotate(from, "padding");
    }

    fn append(&mut self, other: Schedule) {
        let offset = self.steps.len();
        self.steps.extend(other.steps);
        self.annotations
            .extend(other.annotations.into_iter().map(|a| Annotation {
                from: a.from + offset,
                to: a.to + offset,
                note: a.note,
            }));
    }

    pub fn execute(&self, config: &Configuration, rule: &UpdateRule) -> Result<Configuration> {
        for x in &self.steps {
            config.check_index(x.influenced)?;
            config.check_index(x.influencer)?;
        }
        execute(config, &self.steps, rule)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::BadFile(format!("{}: {e}", path.display())))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, serde_json::to_string(self)? + "\n")?;
        Ok(())
    }
}

/// Smallest `k` with `x_k ≥ target`, where `x_{m+1} = (1+α)x_m/√(1+(2α+α²)x_m²)`.
pub fn k0_needed(x0: f64, target: f64, alpha: f64) -> Result<u64> {
    if !(alpha > 0.0) || !(0.0..1.0).contains(&target) || !(0.0..=1.0).contains(&x0) {
        return Err(Error::InvalidParameter(format!(
            "k0_needed needs 0 <= x0 <= 1, 0 <= target < 1, alpha > 0; got {x0}, {target}, {alpha}"
        )));
    }
    if x0 >= target {
        return Ok(0);
    }
    if x0 == 0.0 {
        return Err(Error::NonConvergent { x0, target });
    }
    let mut x = x0;
    let mut k = 0u64;
    while x < target {
        let next = self_reinforced(x, alpha);
        if next <= x {
            return Err(Error::NonConvergent { x0, target });
        }
        x = next;
        k += 1;
    }
    Ok(k)
}

/// Rounds an influencer needs so that any start with `|A| ≥ lo` ends above
/// `1 − gap_target²`. One extra round absorbs rounding in the executed updates.
fn rounds_to_align(lo: f64, gap_target: f64, alpha: f64) -> Result<u64> {
    Ok(k0_needed(lo, 1.0 - gap_target * gap_target, alpha)? + 1)
}

fn linear_alpha(rule: &UpdateRule) -> Result<f64> {
    rule.alpha().ok_or_else(|| {
        Error::InvalidParameter("constructions are defined for the linear rule only".into())
    })
}

/// Anchor recursion on the agents in `pool` (sorted): the lowest agent anchors
/// every pool member with `|A| ≥ ε/64`, then the rest recurse.
fn anchor_recursion(
    a: &CorrelationMatrix,
    pool: &[usize],
    eps: f64,
    alpha: f64,
    out: &mut Schedule,
) -> Result<()> {
    let k0 = rounds_to_align(eps / 64.0, eps / 64.0, alpha)?;
    let mut rest: Vec<usize> = pool.to_vec();
    while let Some(&anchor) = rest.first() {
        let (members, others): (Vec<usize>, Vec<usize>) = rest
            .iter()
            .partition(|&&i| i == anchor || a.get(anchor, i).abs() >= eps / 64.0);
        let from = out.len();
        for &i in &members {
            out.push_n(i, anchor, k0);
        }
        out.annotate(from, format!("anchor {anchor} over {members:?}"));
        // Members' rows change but the rest never interacts with them again,
        // and anchors never move, so the pool's correlations stay valid.
        rest = others;
    }
    Ok(())
}

/// Schedule after which the configuration is `(ε, ε)`-inactive.
pub fn path_to_inactive(config: &Configuration, eps: f64, rule: &UpdateRule) -> Result<Schedule> {
    let alpha = linear_alpha(rule)?;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "eps must lie in (0, 1), got {eps}"
        )));
    }
    let a = correlation(config);
    let mut s = Schedule::new(Provenance::PathToInactive);
    let pool: Vec<usize> = (0..config.n()).collect();
    anchor_recursion(&a, &pool, eps, alpha, &mut s)?;
    Ok(s)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConsistencyMode {
    /// Fixed `K₀`/`K₁` rounds padded to `n(K₀ + K₁)`.
    WorstCase,
    /// Stops as soon as the configuration is consistent.
    Adaptive,
}

/// Cross pair `(i0, j0)` with the largest `|A|` between blocks `ba` and `bb`.
pub fn max_cross_pair(
    a: &CorrelationMatrix,
    p: &ClusterPartition,
    ba: usize,
    bb: usize,
) -> Result<(usize, usize)> {
    let mut best: Option<(f64, usize, usize)> = None;
    for &i in p.block(ba) {
        for &j in p.block(bb) {
            let v = a.get(i, j).abs();
            if best.is_none_or(|(bv, _, _)| v > bv) {
                best = Some((v, i, j));
            }
        }
    }
    match best {
        Some((v, i, j)) if v > 0.0 => Ok((i, j)),
        _ => Err(Error::NoCrossPair),
    }
}

/// `min over i ∈ S_a, j ∈ S_b of σ·b_i·b_j·A_ij / |A_i0j0|`, where `b` are signs
/// relative to `i0` (on `S_a`) and `j0` (on `S_b`) and `σ = sign A_i0j0` are
/// taken from `frame`. Positive iff the signs agree with that frame.
pub fn signed_margin(
    a: &CorrelationMatrix,
    frame: &CorrelationMatrix,
    p: &ClusterPartition,
    ba: usize,
    bb: usize,
    i0: usize,
    j0: usize,
) -> f64 {
    let sg = |x: f64| if x < 0.0 { -1.0 } else { 1.0 };
    let sigma = sg(frame.get(i0, j0));
    let scale = frame.get(i0, j0).abs();
    let mut m = f64::INFINITY;
    for &i in p.block(ba) {
        for &j in p.block(bb) {
            let v = sigma * sg(frame.get(i, i0)) * sg(frame.get(j, j0)) * a.get(i, j) / scale;
            m = m.min(v);
        }
    }
    m
}

/// Result of [`reach_consistency`].
#[derive(Clone, Debug, PartialEq)]
pub struct ConsistencyPlan {
    pub schedule: Schedule,
    pub a: usize,
    pub b: usize,
    pub i0: usize,
    pub j0: usize,
}

/// Schedule after which the configuration is `(a, b, c_cons)`-consistent.
///
/// `blocks` picks the pair of clusters; by default the pair realizing `δ₀`.
/// `i0` then influences every member of `S_a` `K₀` times and `j0` influences
/// every member of `S_b` in rounds.
pub fn reach_consistency(
    config: &Configuration,
    rule: &UpdateRule,
    blocks: Option<(usize, usize)>,
    mode: ConsistencyMode,
) -> Result<ConsistencyPlan> {
    let alpha = linear_alpha(rule)?;
    let a = correlation(config);
    let p = clusters(&a)?;
    let consts = Constants::derive(config.n(), config.dim(), alpha)?;
    let (ba, bb) = match blocks {
        Some((x, y)) => {
            if x == y || x >= p.len() || y >= p.len() {
                return Err(Error::InvalidParameter(format!(
                    "invalid block pair ({x}, {y})"
                )));
            }
            (x, y)
        }
        None => {
            let r = realizing_pair(&a, &p)?;
            (r.a, r.b)
        }
    };
    let (i0, j0) = max_cross_pair(&a, &p, ba, bb)?;
    let mut s = Schedule::new(Provenance::ReachConsistency);
    let plan = |schedule| ConsistencyPlan {
        schedule,
        a: ba,
        b: bb,
        i0,
        j0,
    };
    let sa: Vec<usize> = p.block(ba).to_vec();
    let sb: Vec<usize> = p.block(bb).to_vec();
    match mode {
        ConsistencyMode::WorstCase => {
            let total = consts.k;
            if total > 1e8 {
                return Err(Error::InvalidParameter(format!(
                    "worst-case schedule has {total:.3e} steps; use the adaptive mode"
                )));
            }
            for &i in &sa {
                s.push_n(i, i0, consts.k0);
            }
            s.annotate(0, format!("i0 = {i0} over S_a, K0 = {}", consts.k0));
            let from = s.len();
            for &j in &sb {
                s.push_n(j, j0, consts.k1 as u64);
            }
            s.annotate(from, format!("j0 = {j0} over S_b, K1 = {}", consts.k1));
            s.pad_to(total as usize);
            Ok(plan(s))
        }
        ConsistencyMode::Adaptive => {
            let c_cons = consts.c_cons();
            if is_consistent(&a, &p, ba, bb, c_cons).consistent {
                return Ok(plan(s));
            }
            for &i in &sa {
                s.push_n(i, i0, consts.k0);
            }
            s.annotate(0, format!("i0 = {i0} over S_a, K0 = {}", consts.k0));
            let mut cur = execute(config, &s.steps, rule)?;
            let from = s.len();
            let cap = consts.k1.min(1e6) as u64;
            for _ in 0..cap {
                let a_cur = correlation(&cur);
                if is_consistent(&a_cur, &p, ba, bb, c_cons).consistent {
                    break;
                }
                for &j in &sb {
                    if j != j0 {
                        s.steps.push(Interaction::new(j, j0));
                        cur.apply_in_place(Interaction::new(j, j0), rule)?;
                    }
                }
            }
            s.annotate(from, format!("j0 = {j0} over S_b until consistent"));
            Ok(plan(s))
        }
    }
}

/// Each `i ∈ S_a` influences each `j ∈ S_b` and vice versa, cycled to length `n²`.
pub fn increase_delta_schedule(p: &ClusterPartition, ba: usize, bb: usize) -> Result<Schedule> {
    if ba == bb || ba >= p.len() || bb >= p.len() {
        return Err(Error::InvalidParameter(format!(
            "invalid block pair ({ba}, {bb})"
        )));
    }
    let mut cycle = Vec::new();
    for &i in p.block(ba) {
        for &j in p.block(bb) {
            cycle.push(Interaction::new(j, i));
            cycle.push(Interaction::new(i, j));
        }
    }
    let n = p.n();
    let mut s = Schedule::new(Provenance::IncreaseDelta);
    s.steps = cycle.iter().copied().cycle().take(n * n).collect();
    Ok(s)
}

/// Every unordered pair of the block once, the lower index influencing, in lexicographic order.
pub fn tighten_cluster_schedule(
    config: &Configuration,
    p: &ClusterPartition,
    block: usize,
) -> Result<Schedule> {
    if block >= p.len() {
        return Err(Error::InvalidParameter(format!("no block {block}")));
    }
    let members = p.block(block);
    if members.len() < 2 {
        return Err(Error::PreconditionViolated(format!(
            "block {block} has a single agent"
        )));
    }
    let a = correlation(config);
    let floor = std::f64::consts::FRAC_1_SQRT_2;
    let mut s = Schedule::new(Provenance::Tighten);
    for (x, &i) in members.iter().enumerate() {
        for &j in &members[x + 1..] {
            if a.get(i, j).abs() <= floor {
                return Err(Error::PreconditionViolated(format!(
                    "|A_{i}{j}| = {} is not above sqrt(2)/2",
                    a.get(i, j).abs()
                )));
            }
            s.steps.push(Interaction::new(j, i));
        }
    }
    Ok(s)
}

/// `max (1 − |A'_ij|) / max (1 − |A_ij|)` over pairs in `members`; 0 when both vanish.
pub fn contraction_factor(before: &Configuration, after: &Configuration, members: &[usize]) -> f64 {
    let worst = |c: &Configuration| {
        let mut w = 0.0f64;
        for (x, &i) in members.iter().enumerate() {
            for &j in &members[x + 1..] {
                w = w.max(c.gap(i, j));
            }
        }
        w
    };
    let (b, a) = (worst(before), worst(after));
    if b == 0.0 {
        if a == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        a / b
    }
}

/// Schedule merging the clusters of `i0` and `j0` and re-inactivating the rest.
pub fn collapse_clusters(
    config: &Configuration,
    rule: &UpdateRule,
    eps: f64,
    i0: usize,
    j0: usize,
) -> Result<Schedule> {
    let alpha = linear_alpha(rule)?;
    config.check_index(i0)?;
    config.check_index(j0)?;
    let a = correlation(config);
    let p = clusters(&a)?;
    let (ba, bb) = (p.block_of(i0), p.block_of(j0));
    if ba == bb {
        return Err(Error::PreconditionViolated(format!(
            "agents {i0} and {j0} share a cluster"
        )));
    }
    if a.get(i0, j0).abs() < eps {
        return Err(Error::PreconditionViolated(format!(
            "|A_{i0}{j0}| = {} is below eps = {eps}",
            a.get(i0, j0).abs()
        )));
    }
    let mut s = Schedule::new(Provenance::Collapse);
    for &i in p.block(ba) {
        if a.get(i, j0).abs() < alpha * eps / 4.0 {
            s.push_n(i, i0, 1);
        }
    }
    s.annotate(0, format!("i0 = {i0} lifts weak members of S_a"));
    let mid = execute(config, &s.steps, rule)?;
    let a_mid = correlation(&mid);
    let eps_prime = (alpha * eps / (4.0 * (1.0 + alpha))).min(eps / 64.0);
    let (merged, rest): (Vec<usize>, Vec<usize>) =
        (0..config.n()).partition(|&i| i == j0 || a_mid.get(i, j0).abs() >= eps_prime);
    let k0 = rounds_to_align(eps_prime, eps / 64.0, alpha)?;
    let from = s.len();
    for &i in &merged {
        s.push_n(i, j0, k0);
    }
    s.annotate(from, format!("j0 = {j0} over {merged:?}, K0 = {k0}"));
    let mut tail = Schedule::new(Provenance::Collapse);
    anchor_recursion(&a_mid, &rest, eps, alpha, &mut tail)?;
    s.append(tail);
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{is_inactive, ClusterPartition};

    #[test]
    fn k0_examples() {
        assert_eq!(k0_needed(0.5, 0.4, 1.0), Ok(0));
        assert!(matches!(
            k0_needed(0.0, 0.9, 1.0),
            Err(Error::NonConvergent { .. })
        ));
        // In the plane, tan of the angle to the influencer shrinks by 1+α per round,
        // so k = ceil(ln(tan θ0 / tan θ*) / ln(1+α)) = ceil(log2(20.544)) = 5.
        assert_eq!(k0_needed(0.1, 0.9, 1.0), Ok(5));
    }

    #[test]
    fn schedule_json_layout() {
        let mut s = Schedule::new(Provenance::Tighten);
        s.steps = vec![Interaction::new(1, 0), Interaction::new(2, 0)];
        let json = serde_json::to_value(&s).unwrap();
        assert_eq!(json["provenance"], "tighten");
        assert_eq!(json["steps"], serde_json::json!([[1, 0], [2, 0]]));
        let back: Schedule = serde_json::from_value(json).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn two_agent_path_to_inactive() {
        let eps = 1.0 / 256.0;
        let c = Configuration::from_rows(vec![vec![1.0, 0.0], vec![0.6, 0.8]]).unwrap();
        let rule = UpdateRule::linear(1.0).unwrap();
        let s = path_to_inactive(&c, eps, &rule).unwrap();
        assert!(s.steps.iter().all(|&x| x == Interaction::new(1, 0)));
        let out = s.execute(&c, &rule).unwrap();
        assert!(out.gap(0, 1) < (eps / 64.0) * (eps / 64.0));
        assert_eq!(out.opinion(0), c.opinion(0));
    }

    #[test]
    fn orthogonal_singletons_need_no_steps() {
        let c = Configuration::from_rows(vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ])
        .unwrap();
        let rule = UpdateRule::linear(1.0).unwrap();
        assert!(path_to_inactive(&c, 1.0 / 256.0, &rule).unwrap().is_empty());
    }

    #[test]
    fn three_agent_blocks() {
        let eps = 1.0 / 256.0;
        let t = 1e-5;
        let c = Configuration::from_rows_renormalized(vec![
            vec![1.0, 0.0, 0.0],
            vec![0.3, 1.0, 0.0],
            vec![t, 0.0, 1.0],
        ])
        .unwrap();
        let rule = UpdateRule::linear(1.0).unwrap();
        let s = path_to_inactive(&c, eps, &rule).unwrap();
        let out = s.execute(&c, &rule).unwrap();
        let a = correlation(&out);
        assert!(is_inactive(&a, eps, eps).inactive);
        assert_eq!(clusters(&a).unwrap().blocks(), &[vec![0, 1], vec![2]]);
    }

    #[test]
    fn increase_delta_shapes() {
        let p = ClusterPartition::from_blocks(2, vec![vec![0], vec![1]]).unwrap();
        let s = increase_delta_schedule(&p, 0, 1).unwrap();
        assert_eq!(s.len(), 4);
        assert_eq!(
            s.steps,
            vec![
                Interaction::new(1, 0),
                Interaction::new(0, 1),
                Interaction::new(1, 0),
                Interaction::new(0, 1)
            ]
        );
        let p = ClusterPartition::from_blocks(3, vec![vec![0, 1], vec![2]]).unwrap();
        let s = increase_delta_schedule(&p, 0, 1).unwrap();
        assert_eq!(s.len(), 9);
        for x in [(2, 0), (0, 2), (2, 1), (1, 2)] {
            assert!(s.steps.contains(&Interaction::new(x.0, x.1)));
        }
    }

    #[test]
    fn tighten_pair_and_precondition() {
        let rule = UpdateRule::linear(1.0).unwrap();
        let c =
            Configuration::from_rows_renormalized(vec![vec![1.0, 0.1], vec![1.0, -0.1]]).unwrap();
        let p = clusters(&correlation(&c)).unwrap();
        let s = tighten_cluster_schedule(&c, &p, 0).unwrap();
        assert_eq!(s.steps, vec![Interaction::new(1, 0)]);
        let out = s.execute(&c, &rule).unwrap();
        assert!(out.gap(0, 1) < c.gap(0, 1));
        assert!(contraction_factor(&c, &out, &[0, 1]) < 1.0);

        let c = Configuration::from_rows_renormalized(vec![
            vec![1.0, 0.0],
            vec![0.6, 0.8],
            vec![0.8, 0.6],
        ])
        .unwrap();
        let p = ClusterPartition::from_blocks(3, vec![vec![0, 1, 2]]).unwrap();
        assert!(matches!(
            tighten_cluster_schedule(&c, &p, 0),
            Err(Error::PreconditionViolated(_))
        ));

        let c = Configuration::from_rows(vec![vec![1.0, 0.0], vec![-1.0, 0.0]]).unwrap();
        let p = clusters(&correlation(&c)).unwrap();
        let s = tighten_cluster_schedule(&c, &p, 0).unwrap();
        assert_eq!(
            contraction_factor(&c, &s.execute(&c, &rule).unwrap(), &[0, 1]),
            0.0
        );
    }

    #[test]
    fn collapse_two_singletons() {
        let eps = 1.0 / 512.0;
        let rule = UpdateRule::linear(1.0).unwrap();
        let c =
            Configuration::from_rows_renormalized(vec![vec![1.0, 0.003], vec![0.0, 1.0]]).unwrap();
        let s = collapse_clusters(&c, &rule, eps, 0, 1).unwrap();
        let out = s.execute(&c, &rule).unwrap();
        let a = correlation(&out);
        assert_eq!(clusters(&a).unwrap().len(), 1);
        assert!(is_inactive(&a, eps, eps).inactive);
        let one = Configuration::from_rows(vec![vec![1.0, 0.0], vec![1.0, 0.0]]).unwrap();
        assert!(matches!(
            collapse_clusters(&one, &rule, eps, 0, 1),
            Err(Error::PreconditionViolated(_))
        ));
    }

    #[test]
    fn singleton_blocks_are_already_consistent() {
        let rule = UpdateRule::linear(1.0).unwrap();
        let c =
            Configuration::from_rows_renormalized(vec![vec![1.0, 0.001], vec![0.0, 1.0]]).unwrap();
        let plan = reach_consistency(&c, &rule, None, ConsistencyMode::Adaptive).unwrap();
        assert!(plan.schedule.is_empty());
        let orth = Configuration::from_rows(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!(matches!(
            reach_consistency(&orth, &rule, None, ConsistencyMode::Adaptive),
            Err(Error::NoCrossPair)
        ));
    }
}
