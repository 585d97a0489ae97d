//! Structural predicates and potentials read off a correlation matrix.

use serde::{Deserialize, Serialize};

use crate::dynamics::TraceRecord;
use crate::error::{Error, Result};
use crate::geometry::{correlation, Configuration, CorrelationMatrix};

/// `min(1/256, 1/(2d(d+1)), 1/(4(2+α)²))`.
pub fn epsilon_base(d: usize, alpha: f64) -> f64 {
    let d = d as f64;
    (1.0f64 / 256.0)
        .min(1.0 / (2.0 * d * (d + 1.0)))
        .min(1.0 / (4.0 * (2.0 + alpha) * (2.0 + alpha)))
}

/// Tiny union-find; `n` is at most a few hundred here.
struct Dsu(Vec<usize>);

impl Dsu {
    fn new(n: usize) -> Self {
        Dsu((0..n).collect())
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // Keep the smaller index as root so components sort naturally.
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.0[hi] = lo;
        }
    }

    /// Components as sorted index lists, ordered by smallest member.
    fn components(mut self) -> Vec<Vec<usize>> {
        let n = self.0.len();
        let mut slot = vec![usize::MAX; n];
        let mut out: Vec<Vec<usize>> = Vec::new();
        for i in 0..n {
            let r = self.find(i);
            if slot[r] == usize::MAX {
                slot[r] = out.len();
                out.push(Vec::new());
            }
            out[slot[r]].push(i);
        }
        out
    }
}

fn threshold_components(a: &CorrelationMatrix, above: f64) -> Vec<Vec<usize>> {
    let n = a.n();
    let mut dsu = Dsu::new(n);
    for i in 0..n {
        for j in (i + 1)..n {
            if a.get(i, j).abs() > above {
                dsu.union(i, j);
            }
        }
    }
    dsu.components()
}

/// Partition of the agents into clusters: `|A| > 1/2` inside a block, `< 1/2` across.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClusterPartition {
    blocks: Vec<Vec<usize>>,
    block_of: Vec<usize>,
}

impl ClusterPartition {
    /// Builds a partition from disjoint blocks covering `0..n`, without checking correlations.
    pub fn from_blocks(n: usize, mut blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut block_of = vec![usize::MAX; n];
        for b in blocks.iter_mut() {
            if b.is_empty() {
                return Err(Error::InvalidParameter("empty block".into()));
            }
            b.sort_unstable();
        }
        blocks.sort_by_key(|b| b[0]);
        for (k, b) in blocks.iter().enumerate() {
            for &i in b {
                if i >= n {
                    return Err(Error::IndexOutOfRange { index: i, n });
                }
                if block_of[i] != usize::MAX {
                    return Err(Error::InvalidParameter(format!(
                        "agent {i} appears in two blocks"
                    )));
                }
                block_of[i] = k;
            }
        }
        if let Some(i) = block_of.iter().position(|&b| b == usize::MAX) {
            return Err(Error::InvalidParameter(format!("agent {i} is in no block")));
        }
        Ok(ClusterPartition { blocks, block_of })
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block(&self, a: usize) -> &[usize] {
        &self.blocks[a]
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn n(&self) -> usize {
        self.block_of.len()
    }

    pub fn block_of(&self, i: usize) -> usize {
        self.block_of[i]
    }

    pub fn same_block(&self, i: usize, j: usize) -> bool {
        self.block_of[i] == self.block_of[j]
    }
}

/// The cluster partition of `a`, if one exists.
///
/// Blocks are the connected components of `{|A_ij| > 1/2}`; the partition is
/// rejected when a component contains a pair with `|A_ij| ≤ 1/2` or two
/// components touch at exactly `1/2`.
pub fn clusters(a: &CorrelationMatrix) -> Result<ClusterPartition> {
    let n = a.n();
    let blocks = threshold_components(a, 0.5);
    let part = ClusterPartition::from_blocks(n, blocks)?;
    for i in 0..n {
        for j in (i + 1)..n {
            let v = a.get(i, j).abs();
            if part.same_block(i, j) && v <= 0.5 {
                return Err(Error::NotClusterable(format!(
                    "agents {i} and {j} are linked but |A| = {v}"
                )));
            }
            if !part.same_block(i, j) && v >= 0.5 {
                return Err(Error::NotClusterable(format!(
                    "|A_{i}{j}| = 1/2 sits on the boundary"
                )));
            }
        }
    }
    Ok(part)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InactivityReport {
    pub eps0: f64,
    pub eps1: f64,
    pub inactive: bool,
    /// First pair `(i, j)`, `i < j`, with `ε₀ ≤ |A_ij| ≤ 1 − ε₁²`.
    pub witness: Option<(usize, usize)>,
}

/// Whether the pair is settled: `|A| < ε₀` or `√(1 − |A|) < ε₁`.
#[inline]
fn pair_settled(a: &CorrelationMatrix, i: usize, j: usize, eps0: f64, eps1: f64) -> bool {
    a.get(i, j).abs() < eps0 || a.gap(i, j).sqrt() < eps1
}

/// `(ε₀, ε₁)`-inactivity: every pair has `|A_ij| < ε₀` or `|A_ij| > 1 − ε₁²`.
pub fn is_inactive(a: &CorrelationMatrix, eps0: f64, eps1: f64) -> InactivityReport {
    let n = a.n();
    let mut witness = None;
    'outer: for i in 0..n {
        for j in (i + 1)..n {
            if !pair_settled(a, i, j, eps0, eps1) {
                witness = Some((i, j));
                break 'outer;
            }
        }
    }
    InactivityReport {
        eps0,
        eps1,
        inactive: witness.is_none(),
        witness,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeparabilityReport {
    pub separable: bool,
    /// The component containing agent 0 when separable, otherwise everyone.
    pub s: Vec<usize>,
    pub t: Vec<usize>,
}

/// Separable iff the graph `{|A_ij| > tol_orth}` is disconnected.
pub fn is_separable(a: &CorrelationMatrix, tol_orth: f64) -> SeparabilityReport {
    let mut comps = threshold_components(a, tol_orth);
    if comps.len() <= 1 {
        return SeparabilityReport {
            separable: false,
            s: (0..a.n()).collect(),
            t: Vec::new(),
        };
    }
    let s = comps.remove(0);
    let mut t: Vec<usize> = comps.into_iter().flatten().collect();
    t.sort_unstable();
    SeparabilityReport {
        separable: true,
        s,
        t,
    }
}

/// `δ₀, δ₁, Q₀ = −ln δ₀, Q₁ = −ln δ₁` and `δ′ = Σ_{i,j} A_ij²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Potentials {
    pub delta0: f64,
    pub delta1: f64,
    #[serde(rename = "Q0", with = "crate::serde_inf")]
    pub q0: f64,
    #[serde(rename = "Q1", with = "crate::serde_inf")]
    pub q1: f64,
    pub delta_prime: f64,
}

/// `−ln δ`, with `Q = ∞` at `δ = 0`.
#[inline]
pub fn q_of(delta: f64) -> f64 {
    if delta > 0.0 {
        -delta.ln()
    } else {
        f64::INFINITY
    }
}

/// `Σ_{i,j} A_ij²`, diagonal included.
pub fn delta_prime(a: &CorrelationMatrix) -> f64 {
    a.entries().iter().map(|x| x * x).sum()
}

pub fn potentials(a: &CorrelationMatrix, p: &ClusterPartition) -> Potentials {
    let n = a.n();
    let (mut d0, mut d1sq) = (0.0f64, 0.0f64);
    for i in 0..n {
        for j in (i + 1)..n {
            if p.same_block(i, j) {
                d1sq = d1sq.max(a.gap(i, j));
            } else {
                d0 = d0.max(a.get(i, j).abs());
            }
        }
    }
    let d1 = d1sq.sqrt();
    Potentials {
        delta0: d0,
        delta1: d1,
        q0: q_of(d0),
        q1: q_of(d1),
        delta_prime: delta_prime(a),
    }
}

/// `min_{i ∈ S_a, j ∈ S_b} |A_ij|`.
pub fn delta_ab(a: &CorrelationMatrix, p: &ClusterPartition, ba: usize, bb: usize) -> f64 {
    let mut m = f64::INFINITY;
    for &i in p.block(ba) {
        for &j in p.block(bb) {
            m = m.min(a.get(i, j).abs());
        }
    }
    m
}

#[inline]
fn sign(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

/// `sign A_ij = sign A_iℓ · sign A_jℓ`; a zero entry is an error.
pub fn sign_triple_consistent(a: &CorrelationMatrix, i: usize, j: usize, l: usize) -> Result<bool> {
    let (sij, sil, sjl) = (sign(a.get(i, j)), sign(a.get(i, l)), sign(a.get(j, l)));
    if sij == 0 || sil == 0 || sjl == 0 {
        return Err(Error::ZeroSign(i, j, l));
    }
    Ok(sij == sil * sjl)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationReason {
    Sign,
    Magnitude,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConsistencyViolation {
    pub i: usize,
    pub i_prime: usize,
    pub j: usize,
    pub j_prime: usize,
    pub reason: ViolationReason,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub a: usize,
    pub b: usize,
    pub m: f64,
    pub consistent: bool,
    pub violation: Option<ConsistencyViolation>,
}

/// `(a, b, m)`-consistency: for all `i, i′ ∈ S_a`, `j, j′ ∈ S_b`,
/// `sign A_i′j′ = sign A_ii′ · sign A_ij · sign A_jj′ ≠ 0` and `|A_i′j′| ≥ m·δ₀`.
pub fn is_consistent(
    a: &CorrelationMatrix,
    p: &ClusterPartition,
    ba: usize,
    bb: usize,
    m: f64,
) -> ConsistencyReport {
    let floor = m * potentials_delta0(a, p);
    let mut violation = None;
    'outer: for &i in p.block(ba) {
        for &ip in p.block(ba) {
            for &j in p.block(bb) {
                for &jp in p.block(bb) {
                    let lhs = sign(a.get(ip, jp));
                    let rhs = sign(a.get(i, ip)) * sign(a.get(i, j)) * sign(a.get(j, jp));
                    let reason = if lhs == 0 || lhs != rhs {
                        Some(ViolationReason::Sign)
                    } else if a.get(ip, jp).abs() < floor {
                        Some(ViolationReason::Magnitude)
                    } else {
                        None
                    };
                    if let Some(reason) = reason {
                        violation = Some(ConsistencyViolation {
                            i,
                            i_prime: ip,
                            j,
                            j_prime: jp,
                            reason,
                        });
                        break 'outer;
                    }
                }
            }
        }
    }
    ConsistencyReport {
        a: ba,
        b: bb,
        m,
        consistent: violation.is_none(),
        violation,
    }
}

fn potentials_delta0(a: &CorrelationMatrix, p: &ClusterPartition) -> f64 {
    let n = a.n();
    let mut d0 = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            if !p.same_block(i, j) {
                d0 = d0.max(a.get(i, j).abs());
            }
        }
    }
    d0
}

/// The cross pair realizing `δ₀`, with its blocks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RealizingPair {
    pub a: usize,
    pub b: usize,
    pub i: usize,
    pub j: usize,
}

/// The cross-block pair `i < j` maximizing `|A_ij|`; ties go to the smaller `(i, j)`.
pub fn realizing_pair(a: &CorrelationMatrix, p: &ClusterPartition) -> Result<RealizingPair> {
    let n = a.n();
    let mut best: Option<(f64, usize, usize)> = None;
    for i in 0..n {
        for j in (i + 1)..n {
            if p.same_block(i, j) {
                continue;
            }
            let v = a.get(i, j).abs();
            if best.is_none_or(|(bv, _, _)| v > bv) {
                best = Some((v, i, j));
            }
        }
    }
    match best {
        Some((v, i, j)) if v > 0.0 => Ok(RealizingPair {
            a: p.block_of(i),
            b: p.block_of(j),
            i,
            j,
        }),
        _ => Err(Error::NoCrossPair),
    }
}

/// A maximal inactive stretch of a trace and its cluster count.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Epoch {
    pub t_start: u64,
    /// First recorded time at which the state is no longer `(ε, ε₁)`-inactive.
    pub t_end: Option<u64>,
    pub nc: usize,
}

fn record_inactive(r: &TraceRecord, eps0: f64, eps1: f64) -> bool {
    match r.potentials {
        Some(p) => r.num_clusters.is_some() && p.delta0 < eps0 && p.delta1 < eps1,
        None => false,
    }
}

/// Splits a trace into epochs: each starts at the first `(ε, ε)`-inactive record
/// and ends at the first later record that is not `(ε, ε₁)`-inactive. An epoch
/// with a single cluster is final.
pub fn epochs(trace: &[TraceRecord], eps: f64, eps1: f64) -> Vec<Epoch> {
    let mut out = Vec::new();
    let mut k = 0;
    while k < trace.len() {
        let Some(start) = (k..trace.len()).find(|&s| record_inactive(&trace[s], eps, eps)) else {
            break;
        };
        let nc = trace[start].num_clusters.unwrap_or(0);
        if nc <= 1 {
            out.push(Epoch {
                t_start: trace[start].t,
                t_end: None,
                nc,
            });
            break;
        }
        let end = (start..trace.len()).find(|&s| !record_inactive(&trace[s], eps, eps1));
        out.push(Epoch {
            t_start: trace[start].t,
            t_end: end.map(|e| trace[e].t),
            nc,
        });
        match end {
            Some(e) => k = e + 1,
            None => break,
        }
    }
    out
}

/// Serialized summary of one configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub inactive: bool,
    pub clusters: Option<Vec<Vec<usize>>>,
    #[serde(with = "crate::serde_inf::opt")]
    pub delta0: Option<f64>,
    #[serde(with = "crate::serde_inf::opt")]
    pub delta1: Option<f64>,
    #[serde(rename = "Q0", with = "crate::serde_inf::opt")]
    pub q0: Option<f64>,
    #[serde(rename = "Q1", with = "crate::serde_inf::opt")]
    pub q1: Option<f64>,
    pub delta_prime: f64,
    pub separable: bool,
}

/// Everything at once: inactivity at `(eps0, eps1)`, clusters, potentials, separability.
pub fn analyze(config: &Configuration, eps0: f64, eps1: f64, tol_orth: f64) -> AnalysisReport {
    let a = correlation(config);
    let part = clusters(&a).ok();
    let pot = part.as_ref().map(|p| potentials(&a, p));
    AnalysisReport {
        inactive: is_inactive(&a, eps0, eps1).inactive,
        clusters: part.map(|p| p.blocks().to_vec()),
        delta0: pot.map(|p| p.delta0),
        delta1: pot.map(|p| p.delta1),
        q0: pot.map(|p| p.q0),
        q1: pot.map(|p| p.q1),
        delta_prime: delta_prime(&a),
        separable: is_separable(&a, tol_orth).separable,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: &[&[f64]]) -> CorrelationMatrix {
        CorrelationMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn basis(n: usize) -> CorrelationMatrix {
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        CorrelationMatrix::from_rows(&rows).unwrap()
    }

    #[test]
    fn epsilon_base_examples() {
        assert_eq!(epsilon_base(3, 1.0), 1.0 / 256.0);
        assert_eq!(epsilon_base(12, 1.0), 1.0 / 312.0);
        assert_eq!(epsilon_base(2, 6.0), 1.0 / 256.0);
    }

    #[test]
    fn cluster_examples() {
        let ones = mat(&[&[1.0, 1.0, 1.0], &[1.0, 1.0, 1.0], &[1.0, 1.0, 1.0]]);
        assert_eq!(clusters(&ones).unwrap().blocks(), &[vec![0, 1, 2]]);
        assert_eq!(
            clusters(&basis(3)).unwrap().blocks(),
            &[vec![0], vec![1], vec![2]]
        );
        let m = mat(&[&[1.0, 0.99, 0.01], &[0.99, 1.0, 0.01], &[0.01, 0.01, 1.0]]);
        assert_eq!(clusters(&m).unwrap().blocks(), &[vec![0, 1], vec![2]]);
    }

    #[test]
    fn chained_component_is_not_clusterable() {
        let m = mat(&[&[1.0, 0.6, 0.2], &[0.6, 1.0, 0.6], &[0.2, 0.6, 1.0]]);
        assert!(matches!(clusters(&m), Err(Error::NotClusterable(_))));
        let m = mat(&[&[1.0, 0.5], &[0.5, 1.0]]);
        assert!(matches!(clusters(&m), Err(Error::NotClusterable(_))));
    }

    #[test]
    fn inactivity_examples() {
        let ones = mat(&[&[1.0, -1.0], &[-1.0, 1.0]]);
        assert!(is_inactive(&ones, 1e-9, 1e-9).inactive);
        assert!(is_inactive(&basis(3), 0.01, 0.1).inactive);
        let m = mat(&[&[1.0, 0.5], &[0.5, 1.0]]);
        let r = is_inactive(&m, 0.01, 0.1);
        assert!(!r.inactive);
        assert_eq!(r.witness, Some((0, 1)));
    }

    #[test]
    fn separability_examples() {
        let r = is_separable(&basis(3), 0.0);
        assert!(r.separable);
        assert_eq!(r.s, vec![0]);
        let m = mat(&[&[1.0, 0.1], &[0.1, 1.0]]);
        assert!(!is_separable(&m, 0.0).separable);
        let m = mat(&[&[1.0, 1.0, 0.0], &[1.0, 1.0, 0.0], &[0.0, 0.0, 1.0]]);
        let r = is_separable(&m, 0.0);
        assert_eq!((r.s, r.t), (vec![0, 1], vec![2]));
    }

    #[test]
    fn potentials_examples() {
        let m = mat(&[&[1.0, 0.99, 0.01], &[0.99, 1.0, 0.0], &[0.01, 0.0, 1.0]]);
        let p = clusters(&m).unwrap();
        let pot = potentials(&m, &p);
        assert_eq!(pot.delta0, 0.01);
        assert!((pot.delta1 - 0.1).abs() < 1e-15);
        // 3 + 2(0.99² + 0.01²)
        assert!((pot.delta_prime - 4.9604).abs() < 1e-12);
        assert_eq!(pot.q0, -(0.01f64).ln());

        let pot = potentials(&basis(3), &clusters(&basis(3)).unwrap());
        assert_eq!(pot.delta1, 0.0);
        assert_eq!(pot.q1, f64::INFINITY);
        assert_eq!(pot.q0, f64::INFINITY);

        let ones = mat(&[&[1.0, 1.0], &[1.0, 1.0]]);
        let pot = potentials(&ones, &clusters(&ones).unwrap());
        assert_eq!(
            (pot.delta0, pot.q0, pot.delta_prime),
            (0.0, f64::INFINITY, 4.0)
        );
    }

    #[test]
    fn delta_ab_examples() {
        let m = mat(&[&[1.0, 0.99, 0.03], &[0.99, 1.0, -0.01], &[0.03, -0.01, 1.0]]);
        let p = clusters(&m).unwrap();
        assert_eq!(delta_ab(&m, &p, 0, 1), 0.01);
        let m = mat(&[&[1.0, 0.2], &[0.2, 1.0]]);
        assert_eq!(delta_ab(&m, &clusters(&m).unwrap(), 0, 1), 0.2);
        assert_eq!(
            delta_ab(&basis(2), &clusters(&basis(2)).unwrap(), 0, 1),
            0.0
        );
    }

    #[test]
    fn sign_triples() {
        let m = mat(&[&[1.0, 0.9, 0.9], &[0.9, 1.0, 0.9], &[0.9, 0.9, 1.0]]);
        assert_eq!(sign_triple_consistent(&m, 0, 1, 2), Ok(true));
        let m = mat(&[&[1.0, -0.9, 0.9], &[-0.9, 1.0, 0.9], &[0.9, 0.9, 1.0]]);
        assert_eq!(sign_triple_consistent(&m, 0, 1, 2), Ok(false));
        assert!(matches!(
            sign_triple_consistent(&basis(3), 0, 1, 2),
            Err(Error::ZeroSign(..))
        ));
    }

    #[test]
    fn consistency_examples() {
        let m = mat(&[&[1.0, 0.99, 0.02], &[0.99, 1.0, 0.03], &[0.02, 0.03, 1.0]]);
        let p = clusters(&m).unwrap();
        assert!(is_consistent(&m, &p, 0, 1, 0.0).consistent);

        let m = mat(&[&[1.0, 0.1], &[0.1, 1.0]]);
        assert!(is_consistent(&m, &clusters(&m).unwrap(), 0, 1, 0.0).consistent);

        let m = mat(&[&[1.0, 0.99, 0.02], &[0.99, 1.0, -0.02], &[0.02, -0.02, 1.0]]);
        let r = is_consistent(&m, &clusters(&m).unwrap(), 0, 1, 0.0);
        assert!(!r.consistent);
        let v = r.violation.unwrap();
        assert_eq!(v.reason, ViolationReason::Sign);
        assert_eq!((v.i, v.i_prime, v.j, v.j_prime), (0, 1, 2, 2));

        let m = mat(&[&[1.0, 0.99, 0.02], &[0.99, 1.0, 0.001], &[0.02, 0.001, 1.0]]);
        let r = is_consistent(&m, &clusters(&m).unwrap(), 0, 1, 0.5);
        assert_eq!(r.violation.unwrap().reason, ViolationReason::Magnitude);
    }

    #[test]
    fn realizing_pair_examples() {
        let m = mat(&[&[1.0, 0.02, 0.03], &[0.02, 1.0, 0.01], &[0.03, 0.01, 1.0]]);
        let p = clusters(&m).unwrap();
        assert_eq!(
            realizing_pair(&m, &p).unwrap(),
            RealizingPair {
                a: 0,
                b: 2,
                i: 0,
                j: 2
            }
        );
        let m = mat(&[&[1.0, 0.03, 0.03], &[0.03, 1.0, 0.01], &[0.03, 0.01, 1.0]]);
        let r = realizing_pair(&m, &clusters(&m).unwrap()).unwrap();
        assert_eq!((r.i, r.j), (0, 1));
        assert_eq!(
            realizing_pair(&basis(3), &clusters(&basis(3)).unwrap()),
            Err(Error::NoCrossPair)
        );
    }

    #[test]
    fn report_encodes_infinity_as_string() {
        let c = Configuration::from_rows(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let r = analyze(&c, 0.01, 0.01, 0.0);
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["Q0"], "inf");
        assert_eq!(json["Q1"], "inf");
        assert_eq!(json["clusters"], serde_json::json!([[0], [1]]));
        let back: AnalysisReport = serde_json::from_value(json).unwrap();
        assert_eq!(back, r);
    }
}
