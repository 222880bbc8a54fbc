//! Minimum-delay routing for integrated ground/air/space ad hoc networks.
//!
//! Ground base stations, aircraft and satellites become nodes of a weighted
//! digraph whose edges are the links that clear an SNR threshold and the
//! radio horizon ([`graph`]). Routes from a ground station to a target
//! aircraft minimise the summed transmission, propagation and relaying delay
//! ([`routing`]). [`scenario`] produces node sets, synthetic or from flight
//! trajectories, and [`analysis`] runs the experiment sweeps.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` deliberately rejects NaN

pub mod analysis;
pub mod error;
pub mod geo;
pub mod graph;
pub mod link;
pub mod routing;
pub mod scenario;

pub use error::{Error, Result};
