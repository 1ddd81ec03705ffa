//! Event-driven SIRS epidemic simulation on configuration-model multigraphs
//! and lazily grown Galton–Watson trees, with the structural toolkit (blue
//! coloring, core pruning, expander certification) and Monte Carlo harness
//! built around it.

// `!(x > 0.0)` is how parameter checks reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod distributions;
pub mod dynamics;
pub mod graphs;
pub mod harness;
pub mod par;
pub mod structure;
pub mod rng;
