//! Friedkin–Johnsen opinion dynamics on weighted undirected graphs, with
//! polarization / disagreement metrics and optimization procedures that
//! control them through network structure or internal opinions.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod control_network;
pub mod control_opinion;
pub mod demo;
pub mod dynamics;
pub mod error;
pub mod graph;
pub mod io;
pub mod metrics;
pub mod numkit;
pub mod rng;

pub use dynamics::{equilibrium, fj_iterate, fj_step, OpinionVector, Trajectory};
pub use error::{Error, Result};
pub use graph::{parse_edge_list, Graph};
pub use metrics::{
    acr, disagreement, local_disagreement, mean_center, metrics_from_internal, polarization,
    MetricEvaluator, MetricMatrixKind, MetricReport, MetricRoute,
};
