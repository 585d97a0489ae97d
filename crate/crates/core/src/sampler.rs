//! Random clustered configurations that sit in the inactive regime.
//!
//! Cluster centers come from a random orthonormal frame, tilted toward each
//! other by at most `cross`; members are scattered around `±center` by at
//! most `within` and receive independent random signs.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::{clusters, is_inactive};
use crate::dynamics::gaussian_vec;
use crate::error::{Error, Result};
use crate::geometry::Configuration;

/// Where member scatter goes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScatterMode {
    /// Isotropic in the complement of the center.
    Generic,
    /// Along a frame direction reserved for the cluster, so scatter never leaks
    /// into cross correlations. Needs `d ≥ 2k`.
    Private,
    /// As `Private`, on the coordinate axes instead of a random frame. Cross
    /// correlations then come from the tilt alone, so they can sit far below
    /// the `1e-16` orthogonality floor of a numerical frame.
    Axes,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InactiveSpec {
    /// Cluster sizes; agents are numbered cluster by cluster.
    pub sizes: Vec<usize>,
    /// Log-uniform range for the center tilt scale.
    pub cross: (f64, f64),
    /// Log-uniform range for the member scatter radius.
    pub within: (f64, f64),
    pub scatter: ScatterMode,
    /// When set, the sample must be `(eps0, eps1)`-inactive; otherwise it is redrawn.
    pub require: Option<(f64, f64)>,
    /// Shuffle agent labels after sampling.
    pub shuffle: bool,
}

impl InactiveSpec {
    /// `sizes` clusters with both scales log-uniform in `[lo, hi]` and inactivity at `eps` required.
    pub fn new(sizes: Vec<usize>, lo: f64, hi: f64, eps: f64) -> Self {
        InactiveSpec {
            sizes,
            cross: (lo, hi),
            within: (lo, hi),
            scatter: ScatterMode::Generic,
            require: Some((eps, eps)),
            shuffle: false,
        }
    }

    pub fn n(&self) -> usize {
        self.sizes.iter().sum()
    }

    pub fn k(&self) -> usize {
        self.sizes.len()
    }
}

fn log_uniform<R: Rng + ?Sized>(range: (f64, f64), rng: &mut R) -> f64 {
    let (lo, hi) = range;
    if lo <= 0.0 || hi <= lo {
        return hi.max(0.0);
    }
    (lo.ln() + rng.random::<f64>() * (hi.ln() - lo.ln())).exp()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) {
    let nrm = dot(v, v).sqrt();
    v.iter_mut().for_each(|x| *x /= nrm);
}

/// `m` orthonormal vectors in `R^d` from Gram-Schmidt on Gaussian draws.
pub fn random_frame<R: Rng + ?Sized>(d: usize, m: usize, rng: &mut R) -> Vec<Vec<f64>> {
    assert!(
        m <= d,
        "cannot fit {m} orthonormal vectors in dimension {d}"
    );
    let mut frame: Vec<Vec<f64>> = Vec::with_capacity(m);
    while frame.len() < m {
        let mut v = gaussian_vec(d, rng);
        // Two passes keep the frame orthogonal to working precision.
        for _ in 0..2 {
            for f in &frame {
                let p = dot(&v, f);
                v.iter_mut().zip(f).for_each(|(x, y)| *x -= p * y);
            }
        }
        if dot(&v, &v) > 1e-6 {
            normalize(&mut v);
            frame.push(v);
        }
    }
    frame
}

fn sample_once<R: Rng + ?Sized>(
    d: usize,
    spec: &InactiveSpec,
    rng: &mut R,
) -> Result<Configuration> {
    let k = spec.k();
    let extra = match spec.scatter {
        ScatterMode::Generic => 0,
        ScatterMode::Private | ScatterMode::Axes => k,
    };
    let frame = if spec.scatter == ScatterMode::Axes {
        (0..2 * k)
            .map(|a| (0..d).map(|x| if x == a { 1.0 } else { 0.0 }).collect())
            .collect()
    } else {
        random_frame(d, k + extra, rng)
    };
    let cross = log_uniform(spec.cross, rng);
    let centers: Vec<Vec<f64>> = (0..k)
        .map(|a| {
            let mut c = frame[a].clone();
            for (b, fb) in frame.iter().enumerate().take(k) {
                if b != a {
                    let g = cross * (2.0 * rng.random::<f64>() - 1.0) / (k as f64 - 1.0).max(1.0);
                    c.iter_mut().zip(fb).for_each(|(x, y)| *x += g * y);
                }
            }
            normalize(&mut c);
            c
        })
        .collect();
    let mut rows = Vec::with_capacity(spec.n());
    for (a, &size) in spec.sizes.iter().enumerate() {
        let within = log_uniform(spec.within, rng);
        for _ in 0..size {
            let r = within * rng.random::<f64>();
            let mut u = centers[a].clone();
            match spec.scatter {
                ScatterMode::Generic => {
                    let mut eta = gaussian_vec(d, rng);
                    let p = dot(&eta, &centers[a]);
                    eta.iter_mut()
                        .zip(&centers[a])
                        .for_each(|(x, y)| *x -= p * y);
                    let nrm = dot(&eta, &eta).sqrt().max(1e-300);
                    u.iter_mut().zip(&eta).for_each(|(x, y)| *x += r * y / nrm);
                }
                ScatterMode::Private | ScatterMode::Axes => {
                    let s = if rng.random_bool(0.5) { r } else { -r };
                    u.iter_mut()
                        .zip(&frame[k + a])
                        .for_each(|(x, y)| *x += s * y);
                }
            }
            normalize(&mut u);
            if rng.random_bool(0.5) {
                u.iter_mut().for_each(|x| *x = -*x);
            }
            rows.push(u);
        }
    }
    if spec.shuffle {
        for i in (1..rows.len()).rev() {
            let j = rng.random_range(0..=i);
            rows.swap(i, j);
        }
    }
    Configuration::from_rows(rows)
}

/// Draws a clustered configuration, retrying until it meets `spec.require`
/// and has exactly `spec.k()` clusters.
pub fn sample_inactive<R: Rng + ?Sized>(
    d: usize,
    spec: &InactiveSpec,
    rng: &mut R,
) -> Result<Configuration> {
    let k = spec.k();
    if k == 0 || spec.sizes.contains(&0) || spec.n() < 2 {
        return Err(Error::InvalidParameter(
            "inactive spec needs nonempty clusters and n >= 2".into(),
        ));
    }
    let need = match spec.scatter {
        ScatterMode::Generic => k,
        ScatterMode::Private | ScatterMode::Axes => 2 * k,
    };
    if need > d {
        return Err(Error::InvalidParameter(format!(
            "{k} clusters with {:?} scatter need d >= {need}",
            spec.scatter
        )));
    }
    for _ in 0..1000 {
        let c = sample_once(d, spec, rng)?;
        let a = crate::geometry::correlation(&c);
        let ok_clusters = clusters(&a).is_ok_and(|p| p.len() == k);
        let ok_inactive = spec
            .require
            .is_none_or(|(e0, e1)| is_inactive(&a, e0, e1).inactive);
        if ok_clusters && ok_inactive {
            return Ok(c);
        }
    }
    Err(Error::InvalidParameter(
        "could not draw an inactive configuration; shrink the cross/within ranges".into(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::potentials;
    use crate::dynamics::stream_rng;
    use crate::geometry::correlation;

    #[test]
    fn frame_is_orthonormal() {
        let mut rng = stream_rng(1, 0);
        let f = random_frame(5, 5, &mut rng);
        for i in 0..5 {
            for j in 0..5 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((dot(&f[i], &f[j]) - expect).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn samples_meet_the_requested_thresholds() {
        let mut rng = stream_rng(2, 0);
        let eps = 1.0 / 256.0;
        let spec = InactiveSpec::new(vec![2, 3, 1], 1e-6, eps / 4.0, eps);
        for _ in 0..50 {
            let c = sample_inactive(3, &spec, &mut rng).unwrap();
            let a = correlation(&c);
            assert!(is_inactive(&a, eps, eps).inactive);
            assert_eq!(clusters(&a).unwrap().len(), 3);
        }
    }

    #[test]
    fn private_scatter_separates_scales() {
        let mut rng = stream_rng(3, 0);
        let spec = InactiveSpec {
            sizes: vec![2, 2],
            cross: (1e-9, 1e-9),
            within: (1e-3, 1e-3),
            scatter: ScatterMode::Private,
            require: None,
            shuffle: false,
        };
        let c = sample_inactive(4, &spec, &mut rng).unwrap();
        let a = correlation(&c);
        let p = potentials(&a, &clusters(&a).unwrap());
        assert!(p.delta0 < 1e-8);
        assert!(p.delta1 > 1e-5);
        assert!(sample_inactive(3, &spec, &mut rng).is_err());
    }

    #[test]
    fn axes_scatter_reaches_tiny_cross_correlations() {
        let mut rng = stream_rng(4, 0);
        let spec = InactiveSpec {
            sizes: vec![2, 2],
            cross: (1e-30, 1e-30),
            within: (1e-6, 1e-6),
            scatter: ScatterMode::Axes,
            require: None,
            shuffle: true,
        };
        let c = sample_inactive(4, &spec, &mut rng).unwrap();
        let a = correlation(&c);
        let p = potentials(&a, &clusters(&a).unwrap());
        assert!(p.delta0 > 0.0 && p.delta0 < 1e-29);
    }
}
