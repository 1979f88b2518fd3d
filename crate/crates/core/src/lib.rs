//! Downlink MIMO-NOMA cluster simulation.
//!
//! The crate is split along the data flow of one Monte-Carlo trial:
//!
//! * [`channel`] draws per-user channel matrices, builds the zero-forcing
//!   detection vectors and produces the sorted effective gains of a cluster.
//! * [`rates`] turns sorted gains and a power split into NOMA and OMA rates,
//!   closed-form bounds and the diagnostics used by the invariant checks.
//!   Multiple-access schemes sit behind the [`rates::MultipleAccess`] trait
//!   and are looked up by name in a [`rates::SchemeRegistry`].
//! * [`admission`] implements SINR-threshold admission policies behind the
//!   [`admission::AdmissionPolicy`] trait (sequential greedy, exhaustive
//!   search) together with the closed-form power sum and the optimality
//!   condition checker.
//! * [`experiments`] runs parameter sweeps over many trials and reduces them
//!   into [`experiments::SweepResult`] tables; each sweep kind is an
//!   [`experiments::Experiment`] registered by name.
//! * [`verify`] runs the randomized invariant suite.
//!
//! All rates are spectral efficiencies in bps/Hz. Gains handed to [`rates`]
//! and [`admission`] already include the transmit SNR factor.

pub mod admission;
pub mod channel;
pub mod config;
pub mod experiments;
pub mod rates;
pub mod seed;
pub mod stats;
pub mod verify;

pub use admission::{AdmissionInstance, AdmissionPolicy, AdmissionResult, PolicyRegistry};
pub use channel::{draw_cluster, ClusterRealization};
pub use config::SystemConfig;
pub use experiments::{ExperimentRegistry, SweepKind, SweepResult, SweepSpec};
pub use rates::{DofSplit, MultipleAccess, PowerSplit, RateReport, SchemeRegistry};

/// Converts a decibel quantity to linear scale.
#[inline]
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Converts a linear power ratio to decibels.
#[inline]
pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}
