//! Cover times of reversible random walks on weighted graphs.
//!
//! The crate is organized bottom-up: [`graph`] holds the immutable weighted
//! graph, [`ensembles`] generates random and deterministic families,
//! [`resistance`] computes the effective-resistance metric, [`geometry`]
//! measures it with packing and covering numbers, [`chain`] gives exact
//! hitting and cover times for small graphs, [`walk`] estimates them by
//! simulation, [`gff`] samples the free field, and [`classify`] runs
//! ensembles and compares cover and hitting times across sizes.

// NaN-rejecting checks are written as `!(x > 0.0)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod graph;
pub mod rng;
pub mod stats;
pub mod linalg;
pub mod ensembles;
pub mod resistance;
pub mod geometry;
pub mod chain;
pub mod gff;
pub mod walk;
pub mod analysis;
pub mod classify;
pub mod oracle;
pub mod catalog;

pub use error::{Error, ErrorKind, Result};
pub use graph::{build_graph, Edge, WeightedGraph};
pub use resistance::{GreenKernel, ResistanceMetric, ResistanceMode};
pub use stats::MeanEstimate;
