//! Hierarchical graph networks: EdgePool and Louvain coarsening, hierarchy
//! construction, a tape-based autodiff engine, GCN/RGCN models and the
//! synthetic long-range benchmarks used to evaluate them.

pub mod autodiff;
pub mod cli;
pub mod coarsen;
pub mod datasets;
pub mod error;
pub mod graph;
pub mod hierarchy;
pub mod models;
pub mod rng;
pub mod tensor;

pub use error::{Error, Result};
