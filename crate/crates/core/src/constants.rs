//! Numerical constants for the guarantees the analysis states only up to
//! "there exist constants". Explicit formulas are evaluated per `(n, d, α)`;
//! the one calibrated value lives in the shipped `constants.toml`.

use serde::{Deserialize, Serialize};

use crate::analysis::epsilon_base;
use crate::error::{Error, Result};

/// The shipped table: version, calibrated values and one-line derivations.
pub const SHIPPED_TOML: &str = include_str!("../constants.toml");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoChainDefaults {
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "C_min")]
    pub c_min: f64,
    #[serde(rename = "C_tilde")]
    pub c_tilde: f64,
    pub calibration: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceInstance {
    pub n: usize,
    pub d: usize,
    pub alpha: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShippedTable {
    pub version: u32,
    pub instance: ReferenceInstance,
    pub two_chain: TwoChainDefaults,
    /// Expected values of [`Constants`] at the reference instance.
    pub reference: toml::Table,
    pub derivations: toml::Table,
}

impl ShippedTable {
    pub fn load() -> Result<Self> {
        toml::from_str(SHIPPED_TOML).map_err(|e| Error::BadFile(format!("constants.toml: {e}")))
    }

    pub fn derivation(&self, key: &str) -> &str {
        self.derivations
            .get(key)
            .and_then(|v| v.as_str())
            .unwrap_or("")
    }
}

/// Everything derived from `(n, d, α)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub n: usize,
    pub d: usize,
    pub alpha: f64,
    pub eps_base: f64,
    pub c_step: f64,
    pub k0: u64,
    pub k1: f64,
    pub k: f64,
    pub ln_c_cons: f64,
    /// Realized-margin floor `α²/(4(1+α)²)` relative to `|A_i0j0|`.
    pub cons_margin: f64,
    pub c_adv: f64,
    pub k_alpha: f64,
    pub kappa: f64,
    pub k_prime: f64,
    pub c_q: f64,
    pub t: u64,
    pub c_prime: f64,
    pub c_block: f64,
    pub eps_block: f64,
    pub eps1: f64,
    pub eps: f64,
}

/// Ratio `ε₁/ε` used for the activity thresholds.
pub const ACTIVITY_RATIO: f64 = 100.0;

impl Constants {
    pub fn derive(n: usize, d: usize, alpha: f64) -> Result<Self> {
        if n < 2 || d < 2 || !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "constants need n >= 2, d >= 2, alpha > 0; got n={n}, d={d}, alpha={alpha}"
            )));
        }
        let eps_base = epsilon_base(d, alpha);
        let c_step = 2.0 * (1.0 + alpha);
        let k0 = (2.0 * (1.0 + alpha) / alpha).ceil() as u64 + 1;
        let k1 =
            (4.0 * (1.0 + alpha).powi(2) * c_step.powf(k0 as f64) / (alpha * alpha)).ceil() + 1.0;
        let k = n as f64 * (k0 as f64 + k1);
        let cons_margin = alpha * alpha / (4.0 * (1.0 + alpha).powi(2));
        let ln_c_cons = cons_margin.ln() - k * c_step.ln();
        let c_adv = (1.0 + alpha)
            / (1.0 + (2.0 * alpha + alpha * alpha) * eps_base * eps_base).sqrt()
            - 1.0;
        let kappa_sq = 1.0 + 2.0 * alpha + alpha * alpha / 2.0;
        let kappa = kappa_sq.sqrt();
        let k_alpha = 0.5 * kappa_sq.ln();
        let k_prime = [
            2f64.sqrt(),
            2.0 * (1.0 + alpha).sqrt(),
            (8.0 * (1.0 + alpha) * (2.0 * alpha + alpha * alpha)).sqrt(),
            (2.0 + alpha / 4.0).sqrt(),
        ]
        .into_iter()
        .fold(0.0, f64::max);
        let c_q = (2.0 * alpha).sqrt();
        let t = ((n * (n - 1)) / 2).max(1) as u64;
        let c_prime = [c_step.ln(), k_alpha, k_prime.ln(), c_q.ln()]
            .into_iter()
            .fold(0.0, f64::max);
        let c_block = (2.0 * c_prime * t as f64).max(1.0);
        let eps_block = eps_base / c_step.max(kappa).powi(t as i32);
        let eps1 = eps_block;
        Ok(Constants {
            n,
            d,
            alpha,
            eps_base,
            c_step,
            k0,
            k1,
            k,
            ln_c_cons,
            cons_margin,
            c_adv,
            k_alpha,
            kappa,
            k_prime,
            c_q,
            t,
            c_prime,
            c_block,
            eps_block,
            eps1,
            eps: eps1 / ACTIVITY_RATIO,
        })
    }

    /// `c_cons = α²/(4(1+α)² C_step^K)`; underflows to 0 for all but tiny `n·K₁`.
    pub fn c_cons(&self) -> f64 {
        self.ln_c_cons.exp()
    }

    /// `c_adv` for a custom `ε′`.
    pub fn c_adv_at(&self, eps_prime: f64) -> f64 {
        let a = self.alpha;
        (1.0 + a) / (1.0 + (2.0 * a + a * a) * eps_prime * eps_prime).sqrt() - 1.0
    }

    /// `(name, value)` rows in table order.
    pub fn rows(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("eps_base", self.eps_base),
            ("C_step", self.c_step),
            ("K0", self.k0 as f64),
            ("K1", self.k1),
            ("K", self.k),
            ("ln_c_cons", self.ln_c_cons),
            ("c_cons", self.c_cons()),
            ("cons_margin", self.cons_margin),
            ("c_adv", self.c_adv),
            ("K_alpha", self.k_alpha),
            ("kappa", self.kappa),
            ("K_prime", self.k_prime),
            ("C_q", self.c_q),
            ("T", self.t as f64),
            ("C_prime", self.c_prime),
            ("C", self.c_block),
            ("eps_block", self.eps_block),
            ("eps1", self.eps1),
            ("eps", self.eps),
        ]
    }
}
