//! Fixed inputs shared by the benchmarks.

use polarsim_core::dynamics::stream_rng;
use polarsim_core::sampler::{sample_inactive, InactiveSpec};
use polarsim_core::{sample_initial, Configuration, Constants, InitKind};

pub const SEED: u64 = 20261016;

pub fn uniform(n: usize, d: usize) -> Configuration {
    sample_initial(n, d, &InitKind::UniformSphere, SEED).expect("valid shape")
}

/// Two equal clusters, `(eps, eps)`-inactive at the table `eps` for `(n, d, 1)`.
pub fn two_clusters(n: usize, d: usize) -> Configuration {
    let k = Constants::derive(n, d, 1.0).expect("valid shape");
    let spec = InactiveSpec::new(vec![n / 2, n - n / 2], k.eps * 1e-3, k.eps, k.eps);
    sample_inactive(d, &spec, &mut stream_rng(SEED, 0)).expect("sampler converges")
}
