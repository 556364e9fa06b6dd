//! Factor graph, message store and the VMP iteration loop.

mod graph;
mod vmp;

pub use graph::{
    build_factor_graph, initial_message, Direction, FactorGraph, FactorSpec, Link, Message, ModelSpec, NodeSpec,
};
pub use vmp::{ConvergenceReport, QDensity, VmpOptions};
