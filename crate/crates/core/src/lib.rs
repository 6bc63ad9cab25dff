//! Benchmark graphs with power-law degrees and overlapping, power-law sized
//! communities shaped by a hidden geometric reference layer.
//!
//! The generator runs in phases:
//!
//! 1. a degree sequence is sampled ([`sampling`]);
//! 2. outliers are chosen among low-degree nodes ([`assignment`]);
//! 3. elements are placed in the unit ball and carved into primary
//!    communities, which then grow towards their centroids
//!    ([`reference_layer`]);
//! 4. degrees are paired with elements while tuning the degree/membership
//!    correlation ([`assignment`]);
//! 5. community and background graphs are drawn from the configuration
//!    model ([`edges`]);
//! 6. loops and parallel edges are rewired away ([`rewiring`]).
//!
//! [`generator::generate`] runs all of them. [`metrics`] measures the
//! resulting (or any other labelled) network, and [`ckb`] provides a
//! bipartite-affiliation baseline.

pub mod assignment;
pub mod ckb;
pub mod edges;
mod error;
pub mod exec;
pub mod generator;
pub mod io;
pub mod kdtree;
pub mod metrics;
pub mod params;
pub mod reference_layer;
pub mod rewiring;
pub mod rng;
pub mod sampling;

pub use error::{Error, Result};
pub use exec::ExecMode;
pub use generator::{generate, GenerateOptions, GeneratedNetwork, RunSummary};
pub use metrics::LabeledNetwork;
pub use params::Parameters;
