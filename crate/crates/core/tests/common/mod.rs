#![allow(dead_code)]

use polarsim_core::dynamics::{random_unit, SimRng};
use polarsim_core::Configuration;
use rand::Rng;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn normalized(mut v: Vec<f64>) -> Vec<f64> {
    let n = dot(&v, &v).sqrt();
    v.iter_mut().for_each(|x| *x /= n);
    v
}

pub fn uniform_config(rng: &mut SimRng, n: usize, d: usize) -> Configuration {
    Configuration::from_rows((0..n).map(|_| random_unit(d, rng)).collect()).unwrap()
}

/// Random unit vector orthogonal to the unit vector `c`.
pub fn orthogonal_unit(rng: &mut SimRng, c: &[f64]) -> Vec<f64> {
    loop {
        let mut v = random_unit(c.len(), rng);
        let p = dot(&v, c);
        v.iter_mut().zip(c).for_each(|(x, y)| *x -= p * y);
        if dot(&v, &v) > 1e-6 {
            return normalized(v);
        }
    }
}

/// Unit vector with inner product `corr` against the unit vector `c`.
pub fn with_corr(rng: &mut SimRng, c: &[f64], corr: f64) -> Vec<f64> {
    let e = orthogonal_unit(rng, c);
    let s = (1.0 - corr * corr).max(0.0).sqrt();
    c.iter().zip(&e).map(|(x, y)| corr * x + s * y).collect()
}

pub fn log_uniform(rng: &mut SimRng, lo: f64, hi: f64) -> f64 {
    (lo.ln() + rng.random::<f64>() * (hi.ln() - lo.ln())).exp()
}

pub fn sign(rng: &mut SimRng) -> f64 {
    if rng.random_bool(0.5) {
        1.0
    } else {
        -1.0
    }
}

/// Random cluster sizes summing to `n` with `k` parts.
pub fn random_sizes(rng: &mut SimRng, n: usize, k: usize) -> Vec<usize> {
    let mut sizes = vec![1; k];
    for _ in k..n {
        sizes[rng.random_range(0..k)] += 1;
    }
    sizes
}

/// Clusters around centers `c_0` and `c_a = normalize(f_a + γ_a f_0)`, with
/// `|γ_a| ∈ [γ/2, γ]`, members `±normalize(c_a + r η)` and `r ≤ γ/8`. Every
/// pair `(0, a)` of clusters is then consistent.
pub fn consistent_clusters(
    rng: &mut SimRng,
    sizes: &[usize],
    d: usize,
    gamma: f64,
) -> Configuration {
    let k = sizes.len();
    let frame = polarsim_core::sampler::random_frame(d, k, rng);
    let mut rows = Vec::new();
    for (a, &size) in sizes.iter().enumerate() {
        let c = if a == 0 {
            frame[0].clone()
        } else {
            let g = gamma * (0.5 + 0.5 * rng.random::<f64>()) * sign(rng);
            normalized(
                frame[a]
                    .iter()
                    .zip(&frame[0])
                    .map(|(x, y)| x + g * y)
                    .collect(),
            )
        };
        let r = gamma / 8.0 * rng.random::<f64>();
        for _ in 0..size {
            let eta = orthogonal_unit(rng, &c);
            let s = sign(rng);
            rows.push(normalized(
                c.iter()
                    .zip(&eta)
                    .map(|(x, y)| s * (x + r * rng.random::<f64>() * y))
                    .collect(),
            ));
        }
    }
    Configuration::from_rows(rows).unwrap()
}

/// `size` agents within angle `max_angle` of one random axis, random signs.
pub fn tight_block(rng: &mut SimRng, size: usize, d: usize, max_angle: f64) -> Configuration {
    let c = random_unit(d, rng);
    let rows = (0..size)
        .map(|_| {
            let corr = (max_angle * rng.random::<f64>()).cos();
            let v = with_corr(rng, &c, corr);
            let s = sign(rng);
            v.into_iter().map(|x| s * x).collect()
        })
        .collect();
    Configuration::from_rows_renormalized(rows).unwrap()
}
