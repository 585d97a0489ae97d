//! Simulation and analysis of opinion exchange on the unit sphere with biased
//! assimilation: agent `i` adopts `normalize(u_i + f(⟨u_i, u_j⟩)·u_j)` after
//! meeting agent `j`.

// `!(x > 0.0)` is used on purpose so that NaN lands in the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod constants;
pub mod constructions;
pub mod dynamics;
pub mod ensemble;
pub mod error;
pub mod geometry;
pub mod lab;
pub mod sampler;
pub mod serde_inf;

pub use analysis::{
    clusters, delta_ab, epochs, epsilon_base, is_consistent, is_inactive, is_separable, potentials,
    realizing_pair, sign_triple_consistent, AnalysisReport, ClusterPartition, ConsistencyReport,
    Epoch, InactivityReport, Potentials, RealizingPair,
};
pub use constants::{Constants, ShippedTable};
pub use constructions::{
    collapse_clusters, increase_delta_schedule, k0_needed, path_to_inactive, reach_consistency,
    tighten_cluster_schedule, ConsistencyMode, Provenance, Schedule,
};
pub use dynamics::{
    run_scripted, sample_initial, simulate, step, InitKind, PairDist, ProcessParams, SimOutcome,
    StopCriteria, StopReason, TraceRecord,
};
pub use error::{Error, Result};
pub use geometry::{
    apply_interaction, correlation, flip_agent, is_polarized, predicted_row, ConfigFile,
    Configuration, CorrelationMatrix, Interaction, Opinion, UpdateRule,
};
