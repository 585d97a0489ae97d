//! Opinions on the unit sphere, configurations, the biased-assimilation
//! update and its closed-form effect on correlations.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `|‖u‖ − 1|` for an opinion held in memory.
pub const NORM_TOL: f64 = 1e-12;

/// Tolerance on `|‖u‖ − 1|` accepted when ingesting a configuration file.
pub const FILE_NORM_TOL: f64 = 1e-9;

/// Below this norm the pre-normalization vector `w` is treated as zero.
pub const DEGENERATE_NORM: f64 = 1e-12;

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `‖a − s·b‖²` for `s = ±1`.
#[inline]
fn dist_sq_signed(a: &[f64], b: &[f64], s: f64) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - s * y) * (x - s * y))
        .sum()
}

#[inline]
pub(crate) fn clamp_unit(x: f64) -> f64 {
    x.clamp(-1.0, 1.0)
}

/// A single agent's opinion: a unit vector in `R^d`, `d ≥ 2`.
#[derive(Clone, Debug, PartialEq)]
pub struct Opinion(Vec<f64>);

impl Opinion {
    pub fn new(components: Vec<f64>) -> Result<Self> {
        if components.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "opinion dimension must be at least 2, got {}",
                components.len()
            )));
        }
        let nrm = norm(&components);
        if !nrm.is_finite() || (nrm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotUnitNorm {
                index: 0,
                norm: nrm,
            });
        }
        Ok(Opinion(components))
    }

    /// Scales an arbitrary nonzero vector onto the sphere.
    pub fn normalized(mut components: Vec<f64>) -> Result<Self> {
        let nrm = norm(&components);
        if !(nrm.is_finite() && nrm > 0.0) {
            return Err(Error::InvalidParameter(
                "cannot normalize a zero vector".into(),
            ));
        }
        components.iter_mut().for_each(|x| *x /= nrm);
        Opinion::new(components)
    }

    pub fn components(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

/// `j` influences `i`: only agent `influenced` moves.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Interaction {
    pub influenced: usize,
    pub influencer: usize,
}

impl Interaction {
    pub const fn new(influenced: usize, influencer: usize) -> Self {
        Interaction {
            influenced,
            influencer,
        }
    }

    pub fn is_noop(&self) -> bool {
        self.influenced == self.influencer
    }
}

/// Piecewise-linear `f` on `[-1, 1]`, given by sorted `(x, f(x))` knots.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TabulatedFn {
    knots: Vec<(f64, f64)>,
}

impl TabulatedFn {
    /// Knots must be strictly increasing in `x` and span `[-1, 1]`.
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::InvalidParameter(
                "tabulated f needs at least two knots".into(),
            ));
        }
        if knots.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::InvalidParameter(
                "tabulated f knots must be strictly increasing".into(),
            ));
        }
        if knots[0].0 > -1.0 || knots[knots.len() - 1].0 < 1.0 {
            return Err(Error::InvalidParameter(
                "tabulated f must cover [-1, 1]".into(),
            ));
        }
        if knots.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(Error::InvalidParameter(
                "tabulated f knots must be finite".into(),
            ));
        }
        Ok(TabulatedFn { knots })
    }

    /// Builds an odd function from knots on `[0, 1]` (the first knot must be at 0 with value 0).
    pub fn odd_extension(positive: &[(f64, f64)]) -> Result<Self> {
        match positive.first() {
            Some(&(x, y)) if x == 0.0 && y == 0.0 => {}
            _ => {
                return Err(Error::InvalidParameter(
                    "odd extension needs the knot (0, 0) first".into(),
                ))
            }
        }
        let mut knots: Vec<(f64, f64)> = positive
            .iter()
            .skip(1)
            .rev()
            .map(|&(x, y)| (-x, -y))
            .collect();
        knots.extend_from_slice(positive);
        TabulatedFn::new(knots)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let k = &self.knots;
        let pos = k.partition_point(|&(kx, _)| kx < x);
        if pos == 0 {
            return k[0].1;
        }
        if pos == k.len() {
            return k[k.len() - 1].1;
        }
        let (x0, y0) = k[pos - 1];
        let (x1, y1) = k[pos];
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }
}

/// The coupling function `f` in `w = u_i + f(A_ij)·u_j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum UpdateRule {
    Linear { alpha: f64 },
    Piecewise { alpha: f64, beta: f64 },
    Tabulated { f: TabulatedFn },
}

impl UpdateRule {
    pub fn linear(alpha: f64) -> Result<Self> {
        let rule = UpdateRule::Linear { alpha };
        rule.validate()?;
        Ok(rule)
    }

    pub fn piecewise(alpha: f64, beta: f64) -> Result<Self> {
        let rule = UpdateRule::Piecewise { alpha, beta };
        rule.validate()?;
        Ok(rule)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        match *self {
            UpdateRule::Linear { alpha } if !ok(alpha) => Err(Error::InvalidParameter(format!(
                "alpha must be positive, got {alpha}"
            ))),
            UpdateRule::Piecewise { alpha, beta } if !ok(alpha) || !ok(beta) => {
                Err(Error::InvalidParameter(format!(
                    "alpha and beta must be positive, got {alpha}, {beta}"
                )))
            }
            _ => Ok(()),
        }
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            UpdateRule::Linear { alpha } => alpha * x,
            UpdateRule::Piecewise { alpha, beta } => {
                if x >= 0.0 {
                    alpha * x
                } else {
                    beta * x
                }
            }
            UpdateRule::Tabulated { f } => f.eval(x),
        }
    }

    /// The `α` of a linear rule; `None` for other kinds.
    pub fn alpha(&self) -> Option<f64> {
        match *self {
            UpdateRule::Linear { alpha } => Some(alpha),
            _ => None,
        }
    }

    /// Short human-readable tag used in metadata.
    pub fn label(&self) -> String {
        match self {
            UpdateRule::Linear { alpha } => format!("linear({alpha})"),
            UpdateRule::Piecewise { alpha, beta } => format!("piecewise({alpha},{beta})"),
            UpdateRule::Tabulated { .. } => "tabulated".to_string(),
        }
    }
}

/// `n ≥ 2` opinions of common dimension `d ≥ 2`, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Configuration {
    dim: usize,
    data: Vec<f64>,
}

impl Configuration {
    pub fn new(opinions: Vec<Opinion>) -> Result<Self> {
        let rows: Vec<Vec<f64>> = opinions.into_iter().map(Opinion::into_inner).collect();
        Self::from_rows(rows)
    }

    /// Validates every row to unit norm within [`NORM_TOL`].
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::from_rows_with_tol(rows, NORM_TOL)
    }

    fn from_rows_with_tol(rows: Vec<Vec<f64>>, tol: f64) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "a configuration needs at least 2 agents, got {}",
                rows.len()
            )));
        }
        let dim = rows[0].len();
        if dim < 2 {
            return Err(Error::InvalidParameter(format!(
                "dimension must be at least 2, got {dim}"
            )));
        }
        let mut data = Vec::with_capacity(rows.len() * dim);
        for (index, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            let nrm = norm(row);
            if !nrm.is_finite() || (nrm - 1.0).abs() > tol {
                return Err(Error::NotUnitNorm { index, norm: nrm });
            }
            data.extend_from_slice(row);
        }
        Ok(Configuration { dim, data })
    }

    /// Projects every (nonzero) row onto the sphere.
    pub fn from_rows_renormalized(rows: Vec<Vec<f64>>) -> Result<Self> {
        let rows = rows
            .into_iter()
            .map(|r| Opinion::normalized(r).map(Opinion::into_inner))
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(rows)
    }

    pub fn n(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn opinion(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.dim).map(<[f64]>::to_vec).collect()
    }

    /// `A_ij = ⟨u_i, u_j⟩`, clamped into `[-1, 1]`.
    pub fn corr(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 1.0;
        }
        clamp_unit(dot(self.opinion(i), self.opinion(j)))
    }

    /// `1 − |A_ij|` computed as `‖u_i ∓ u_j‖²/2`, accurate when the gap is tiny.
    pub fn gap(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 0.0;
        }
        let (a, b) = (self.opinion(i), self.opinion(j));
        let s = if dot(a, b) >= 0.0 { 1.0 } else { -1.0 };
        (0.5 * dist_sq_signed(a, b, s)).min(1.0)
    }

    pub fn max_norm_deviation(&self) -> f64 {
        self.data
            .chunks(self.dim)
            .map(|u| (norm(u) - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub(crate) fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.n() {
            return Err(Error::IndexOutOfRange {
                index: i,
                n: self.n(),
            });
        }
        Ok(())
    }

    /// Applies `x` in place. On error the configuration is left unchanged.
    pub fn apply_in_place(&mut self, x: Interaction, rule: &UpdateRule) -> Result<()> {
        self.check_index(x.influenced)?;
        self.check_index(x.influencer)?;
        if x.is_noop() {
            return Ok(());
        }
        let d = self.dim;
        let (i, j) = (x.influenced, x.influencer);
        let a = clamp_unit(dot(self.opinion(i), self.opinion(j)));
        let f = rule.eval(a);
        if f == 0.0 {
            return Ok(());
        }
        let mut w = [0.0f64; 8];
        let mut heap;
        let w: &mut [f64] = if d <= 8 {
            &mut w[..d]
        } else {
            heap = vec![0.0; d];
            &mut heap
        };
        {
            let ui = self.opinion(i);
            let uj = self.opinion(j);
            for k in 0..d {
                w[k] = ui[k] + f * uj[k];
            }
        }
        let nrm = norm(w);
        if !(nrm >= DEGENERATE_NORM) {
            return Err(Error::DegenerateUpdate {
                influenced: i,
                influencer: j,
                norm: nrm,
            });
        }
        let row = &mut self.data[i * d..(i + 1) * d];
        for k in 0..d {
            row[k] = w[k] / nrm;
        }
        Ok(())
    }

    /// Negates opinion `i` in place.
    pub fn flip_in_place(&mut self, i: usize) -> Result<()> {
        self.check_index(i)?;
        let d = self.dim;
        self.data[i * d..(i + 1) * d]
            .iter_mut()
            .for_each(|x| *x = -*x);
        Ok(())
    }

    /// Largest `|x − y|` over all coordinates; `∞` on shape mismatch.
    pub fn max_abs_diff(&self, other: &Configuration) -> f64 {
        if self.dim != other.dim || self.data.len() != other.data.len() {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Gram matrix of a configuration.
///
/// Alongside each entry `A_ij` the matrix keeps `1 − |A_ij|`. When built from a
/// configuration that complement is computed from the chord length, so it stays
/// accurate far below the `1e-16` resolution of `1 − A_ij` itself.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationMatrix {
    n: usize,
    entries: Vec<f64>,
    gaps: Vec<f64>,
}

impl CorrelationMatrix {
    /// Validates symmetry, unit diagonal and `|A_ij| ≤ 1 + 1e-12`; entries are then clamped.
    pub fn from_entries(n: usize, entries: Vec<f64>) -> Result<Self> {
        if n < 2 || entries.len() != n * n {
            return Err(Error::InvalidParameter(format!(
                "expected a {n}x{n} matrix with n >= 2, got {} entries",
                entries.len()
            )));
        }
        for i in 0..n {
            if (entries[i * n + i] - 1.0).abs() > NORM_TOL {
                return Err(Error::InvalidParameter(format!(
                    "diagonal entry {i} is not 1"
                )));
            }
            for j in 0..n {
                let a = entries[i * n + j];
                if !a.is_finite() || a.abs() > 1.0 + NORM_TOL {
                    return Err(Error::InvalidParameter(format!(
                        "entry ({i},{j}) = {a} out of range"
                    )));
                }
                if (a - entries[j * n + i]).abs() > NORM_TOL {
                    return Err(Error::InvalidParameter(format!(
                        "matrix not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        let entries: Vec<f64> = entries
            .iter()
            .enumerate()
            .map(|(k, &a)| if k / n == k % n { 1.0 } else { clamp_unit(a) })
            .collect();
        let gaps = entries.iter().map(|a| 1.0 - a.abs()).collect();
        Ok(CorrelationMatrix { n, entries, gaps })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        Self::from_entries(n, rows.iter().flatten().copied().collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    /// `1 − |A_ij|`.
    #[inline]
    pub fn gap(&self, i: usize, j: usize) -> f64 {
        self.gaps[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }
}

/// The Gram matrix `A_ij = ⟨u_i, u_j⟩` of `config`.
pub fn correlation(config: &Configuration) -> CorrelationMatrix {
    let n = config.n();
    let mut entries = vec![0.0; n * n];
    let mut gaps = vec![0.0; n * n];
    for i in 0..n {
        entries[i * n + i] = 1.0;
        for j in (i + 1)..n {
            let a = config.corr(i, j);
            let g = config.gap(i, j);
            entries[i * n + j] = a;
            entries[j * n + i] = a;
            gaps[i * n + j] = g;
            gaps[j * n + i] = g;
        }
    }
    CorrelationMatrix { n, entries, gaps }
}

/// Returns a new configuration with `x` applied under `rule`.
pub fn apply_interaction(
    config: &Configuration,
    x: Interaction,
    rule: &UpdateRule,
) -> Result<Configuration> {
    let mut next = config.clone();
    next.apply_in_place(x, rule)?;
    Ok(next)
}

/// Row `i` of the correlation matrix after `ℓ` influences `i`, from the old matrix alone:
/// `A'_ij = (A_ij + f(A_iℓ)·A_jℓ) / sqrt(1 + 2 f(A_iℓ) A_iℓ + f(A_iℓ)²)`, with `A'_ii = 1`.
pub fn predicted_row(
    a: &CorrelationMatrix,
    i: usize,
    ell: usize,
    rule: &UpdateRule,
) -> Result<Vec<f64>> {
    let n = a.n();
    for idx in [i, ell] {
        if idx >= n {
            return Err(Error::IndexOutOfRange { index: idx, n });
        }
    }
    if i == ell {
        return Ok(a.row(i).to_vec());
    }
    let a_il = a.get(i, ell);
    let f = rule.eval(a_il);
    let denom_sq = 1.0 + 2.0 * f * a_il + f * f;
    if !(denom_sq.sqrt() >= DEGENERATE_NORM) {
        return Err(Error::DegenerateUpdate {
            influenced: i,
            influencer: ell,
            norm: denom_sq.max(0.0).sqrt(),
        });
    }
    let denom = denom_sq.sqrt();
    Ok((0..n)
        .map(|j| {
            if j == i {
                1.0
            } else {
                clamp_unit((a.get(i, j) + f * a.get(j, ell)) / denom)
            }
        })
        .collect())
}

/// `A'_iℓ` after `ℓ` influences `i` under the linear rule: `(1+α)x / sqrt(1 + (2α+α²)x²)`.
#[inline]
pub fn self_reinforced(x: f64, alpha: f64) -> f64 {
    (1.0 + alpha) * x / (1.0 + (2.0 * alpha + alpha * alpha) * x * x).sqrt()
}

/// True iff every pair satisfies `min(‖u_i − u_j‖, ‖u_i + u_j‖) ≤ tol`.
pub fn is_polarized(config: &Configuration, tol: f64) -> bool {
    polarization_residual(config) <= tol
}

/// `max_{i<j} min(‖u_i − u_j‖, ‖u_i + u_j‖)`.
pub fn polarization_residual(config: &Configuration) -> f64 {
    let n = config.n();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let (a, b) = (config.opinion(i), config.opinion(j));
            let m = dist_sq_signed(a, b, 1.0).min(dist_sq_signed(a, b, -1.0));
            worst = worst.max(m);
        }
    }
    worst.sqrt()
}

/// Returns a copy with opinion `i` negated.
pub fn flip_agent(config: &Configuration, i: usize) -> Result<Configuration> {
    let mut next = config.clone();
    next.flip_in_place(i)?;
    Ok(next)
}

/// On-disk configuration: `{"d": int, "alpha": float, "opinions": [[f64; d]; n]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigFile {
    pub d: usize,
    pub alpha: f64,
    pub opinions: Vec<Vec<f64>>,
}

impl ConfigFile {
    pub fn from_config(config: &Configuration, alpha: f64) -> Self {
        ConfigFile {
            d: config.dim(),
            alpha,
            opinions: config.rows(),
        }
    }

    /// Validates unit norms within [`FILE_NORM_TOL`], or projects onto the sphere if `renormalize`.
    pub fn to_config(&self, renormalize: bool) -> Result<Configuration> {
        if let Some(row) = self.opinions.iter().find(|r| r.len() != self.d) {
            return Err(Error::BadFile(format!(
                "opinion of length {} does not match d = {}",
                row.len(),
                self.d
            )));
        }
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(Error::BadFile(format!(
                "alpha must be positive, got {}",
                self.alpha
            )));
        }
        let res = if renormalize {
            Configuration::from_rows_renormalized(self.opinions.clone())
        } else {
            Configuration::from_rows_with_tol(self.opinions.clone(), FILE_NORM_TOL)
        };
        res.map_err(|e| Error::BadFile(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::BadFile(format!("{}: {e}", path.display())))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(rows: &[&[f64]]) -> Configuration {
        Configuration::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn correlation_basic_cases() {
        let a = correlation(&cfg(&[&[1.0, 0.0], &[1.0, 0.0]]));
        assert_eq!(a.entries(), &[1.0, 1.0, 1.0, 1.0]);
        let a = correlation(&cfg(&[&[1.0, 0.0], &[0.0, 1.0]]));
        assert_eq!(a.entries(), &[1.0, 0.0, 0.0, 1.0]);
        let a = correlation(&cfg(&[&[1.0, 0.0], &[0.6, 0.8]]));
        assert_eq!(a.get(0, 1), 0.6);
        assert!((a.gap(0, 1) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn fixed_point_and_zero_coupling() {
        let rule = UpdateRule::linear(2.5).unwrap();
        let c = cfg(&[&[0.6, 0.8], &[0.6, 0.8]]);
        let next = apply_interaction(&c, Interaction::new(0, 1), &rule).unwrap();
        assert!(next.max_abs_diff(&c) < 1e-15);

        let c = cfg(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let next = apply_interaction(&c, Interaction::new(0, 1), &rule).unwrap();
        assert_eq!(next, c);
    }

    #[test]
    fn two_dimensional_update_matches_hand_arithmetic() {
        // w = (1,0) + 1·0.6·(0.6,0.8) = (1.36, 0.48), |w| = sqrt(2.08)
        let c = cfg(&[&[1.0, 0.0], &[0.6, 0.8]]);
        let rule = UpdateRule::linear(1.0).unwrap();
        let next = apply_interaction(&c, Interaction::new(0, 1), &rule).unwrap();
        let s = 2.08f64.sqrt();
        assert!((next.opinion(0)[0] - 1.36 / s).abs() < 1e-15);
        assert!((next.opinion(0)[1] - 0.48 / s).abs() < 1e-15);
        assert!((next.opinion(0)[0] - 0.94299).abs() < 1e-5);
        assert!((next.opinion(0)[1] - 0.33282).abs() < 1e-5);
        assert_eq!(next.opinion(1), c.opinion(1));
        // Cross-check with the recurrence.
        let row = predicted_row(&correlation(&c), 0, 1, &rule).unwrap();
        assert!((row[1] - next.corr(0, 1)).abs() < 1e-14);
        assert!((row[1] - 1.2 / s).abs() < 1e-15);
        assert!((row[1] - 0.83205).abs() < 1e-5);
    }

    #[test]
    fn predicted_row_edge_cases() {
        let rule = UpdateRule::linear(0.7).unwrap();
        let c = cfg(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.6, 0.8]]);
        let a = correlation(&c);
        assert_eq!(predicted_row(&a, 0, 1, &rule).unwrap(), a.row(0).to_vec());
        assert_eq!(predicted_row(&a, 2, 2, &rule).unwrap(), a.row(2).to_vec());
        for alpha in [0.1, 1.0, 3.0] {
            assert!((self_reinforced(1.0, alpha) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn polarization_predicate() {
        assert!(is_polarized(
            &cfg(&[&[0.6, 0.8], &[0.6, 0.8], &[0.6, 0.8]]),
            1e-12
        ));
        assert!(is_polarized(
            &cfg(&[&[1.0, 0.0], &[-1.0, 0.0], &[1.0, 0.0]]),
            1e-12
        ));
        assert!(!is_polarized(&cfg(&[&[1.0, 0.0], &[0.0, 1.0]]), 1e-6));
    }

    #[test]
    fn flip_is_an_involution() {
        let c = cfg(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let f = flip_agent(&c, 0).unwrap();
        assert_eq!(f.opinion(0), &[-1.0, -0.0]);
        assert_eq!(f.opinion(1), c.opinion(1));
        assert_eq!(flip_agent(&f, 0).unwrap(), c);
        assert!(flip_agent(&c, 2).is_err());
    }

    #[test]
    fn self_interaction_is_noop() {
        let c = cfg(&[&[1.0, 0.0], &[0.6, 0.8]]);
        let rule = UpdateRule::linear(1.0).unwrap();
        assert_eq!(
            apply_interaction(&c, Interaction::new(1, 1), &rule).unwrap(),
            c
        );
    }

    #[test]
    fn custom_rule_can_degenerate() {
        // f(A) = -1/A at A = -1 gives w = u_i + u_j = 0 for antipodal opinions.
        let f = TabulatedFn::new(vec![(-1.0, 1.0), (1.0, 1.0)]).unwrap();
        let rule = UpdateRule::Tabulated { f };
        let c = cfg(&[&[1.0, 0.0], &[-1.0, 0.0]]);
        assert!(matches!(
            apply_interaction(&c, Interaction::new(0, 1), &rule),
            Err(Error::DegenerateUpdate { .. })
        ));
    }

    #[test]
    fn tabulated_odd_extension() {
        let f = TabulatedFn::odd_extension(&[(0.0, 0.0), (0.5, 1.0), (1.0, 1.5)]).unwrap();
        assert_eq!(f.eval(0.25), 0.5);
        assert_eq!(f.eval(-0.25), -0.5);
        assert_eq!(f.eval(-1.0), -1.5);
        assert!(TabulatedFn::odd_extension(&[(0.1, 0.0), (1.0, 1.0)]).is_err());
    }

    #[test]
    fn piecewise_rule_respects_sign() {
        let r = UpdateRule::piecewise(2.0, 0.5).unwrap();
        assert_eq!(r.eval(0.5), 1.0);
        assert_eq!(r.eval(-0.5), -0.25);
        assert!(UpdateRule::linear(0.0).is_err());
    }

    #[test]
    fn rejects_invalid_configurations() {
        assert!(Configuration::from_rows(vec![vec![1.0, 0.0]]).is_err());
        assert!(Configuration::from_rows(vec![vec![1.0], vec![1.0]]).is_err());
        assert!(Configuration::from_rows(vec![vec![1.0, 0.1], vec![1.0, 0.0]]).is_err());
        assert!(Configuration::from_rows(vec![vec![1.0, 0.0], vec![1.0, 0.0, 0.0]]).is_err());
    }

    #[test]
    fn config_file_validation() {
        let file = ConfigFile {
            d: 2,
            alpha: 1.0,
            opinions: vec![vec![1.0, 0.0], vec![0.0, 2.0]],
        };
        assert!(matches!(file.to_config(false), Err(Error::BadFile(_))));
        let c = file.to_config(true).unwrap();
        assert_eq!(c.opinion(1), &[0.0, 1.0]);
    }
}
