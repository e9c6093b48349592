//! Planners for stochastic shortest path problems.
//!
//! [`model`] holds grounded SSPs, partial SSPs, value functions and the
//! post-hoc certificates. [`solvers`] implements value iteration, iLAO*,
//! iLAO* with constraint generation and LRTDP. [`domains`] generates and
//! loads instances, and [`bench`] runs solver matrices and writes CSV.

pub mod bench;
pub mod cli;
pub mod domains;
pub mod heuristics;
pub mod model;
pub mod solvers;
