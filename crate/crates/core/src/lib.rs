//! Discrete calculus on weighted graphs, the weighted porous medium equation
//! `Δu^m = δ(x)u_t + ψu^m`, and numeric checks of its gradient estimates,
//! Harnack inequality and kernel bounds on finite graphs.

// `!(a < b)` is used on purpose so NaN falls on the rejecting side
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calculus;
pub mod error;
pub mod estimate;
pub mod experiment;
pub mod field;
pub mod generate;
pub mod graph;
pub mod kernel;
pub mod lemma;
pub mod paths;
pub mod pme;
pub mod poly;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::{Error, Result};
pub use field::VertexField;
pub use graph::{GraphConstants, WeightedGraph};
