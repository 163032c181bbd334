//! Monte Carlo simulator for downlink two-tier heterogeneous cellular networks
//! (macrocells plus randomly dropped microcells) with leakage-based (SLNR)
//! beamforming under four base-station coordination strategies.
//!
//! The pipeline for one trial is
//! [`topology::build_topology`] → [`channel::draw_channels`] →
//! [`channel::corrupt_csi`] → [`beamforming::build_beamformers`] →
//! [`metrics::evaluate_users`]; [`harness::run_experiment`] repeats it over a
//! seeded grid and reduces the results to a [`harness::CurveTable`].

pub mod beamforming;
pub mod channel;
pub mod config;
pub mod error;
pub mod harness;
pub mod io;
pub mod linalg;
pub mod metrics;
pub mod seed;
pub mod topology;

pub use beamforming::{BeamformerSet, CoordinationStrategy};
pub use channel::{ChannelRealization, ReceivedPowerModel};
pub use config::{NetworkConfig, Scenario};
pub use error::{Error, Result};
pub use harness::{CurveTable, ExperimentSpec};
pub use metrics::MetricsReport;
pub use topology::Topology;
