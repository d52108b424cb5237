//! Structural-power measures over weighted directed networks.
//!
//! One [`graph::Network`] model feeds six families of measures: positional
//! centrality, cooperative voting-power indices and their network extensions,
//! concentration indices with ultimate-control tracing, propagation measures
//! (network control value, PageRank, Katz / alpha-ICON), minimum-cost control
//! acquisition, and Monte Carlo hybrids (network power index and flow).
//! Small instances can be cross-checked against exact enumeration.

pub mod centrality;
pub mod cli;
pub mod concentration;
pub mod error;
pub mod flow;
pub mod graph;
pub mod hybrid;
pub mod io;
pub mod numerics;
pub mod optimize;
pub mod report;
pub mod score;
pub mod voting;

pub use error::{Error, Result};
pub use graph::{build_network, EdgeRecord, Network, NodeKind, NodeRecord};
pub use score::ScoreVector;
