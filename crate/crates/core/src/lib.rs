//! Vertex-disjoint path linkages in cubes and cubical polytopes.
//!
//! The crate has three layers: exact combinatorial models of cubes and
//! polytopal complexes ([`cube`], [`complex`], [`generators`]), a complete
//! search oracle for linkage questions ([`oracle`]), and constructive
//! routing procedures for cubical polytopes ([`linker`]). [`campaign`] ties
//! them into reproducible verification runs.

#![forbid(unsafe_code)]

pub mod campaign;
pub mod complex;
pub mod cube;
pub mod error;
mod flow;
pub mod generators;
pub mod graph;
pub mod linker;
pub mod oracle;

pub use error::{Error, Result};
pub use graph::Graph;
