//! Linear-threshold consensus dynamics on directed multigraphs with tunable
//! degree assortativity.
//!
//! The crate is organised bottom-up:
//!
//! * [`graph`]: the weighted directed multigraph, degree sequences, the
//!   out/out degree assortativity coefficient and the edge-list CSV format.
//! * [`netgen`]: power-law out-degrees with constant in-degree, matched by a
//!   stub-pairing configuration model.
//! * [`rewire`]: degree-preserving double edge swaps that steer assortativity
//!   toward a target.
//! * [`dynamics`]: threshold assignment, Bernoulli initial opinions and the
//!   asynchronous threshold update run until absorption.
//! * [`experiments`]: the seeded Monte Carlo sweep over `(r, N_th, p)` cells
//!   and boxplot-style summaries.
//! * [`ingest`]: threaded conversation dumps turned into influence networks,
//!   log-log power-law fits and polarity binning.

pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod graph;
pub mod ingest;
pub mod netgen;
pub mod rewire;

pub use error::{Error, Result};
pub use graph::{DegreeView, Direction, DirectedMultigraph, Edge};
