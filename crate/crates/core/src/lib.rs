//! Career-switching dynamic program and job-advertisement trend statistics.
//!
//! A researcher's per-period grant income is `θ + ε`, the sum of a field
//! component drawn from `F` and a topic component drawn from `G`. Each period
//! they may stay, redraw the topic, or redraw both. [`solver`] finds the
//! optimal stationary policy by value iteration, [`oracle`] checks it by
//! exhaustive enumeration on tiny grids, and [`simulate`] runs Monte Carlo
//! careers. [`trends`] holds Cohen's kappa and the yearly topic-proportion
//! matrix for coded job ads.

pub mod cli;
pub mod config;
pub mod distributions;
pub mod error;
pub mod io;
pub mod oracle;
pub mod simulate;
pub mod solver;
pub mod trends;

pub use distributions::DiscreteDistribution;
pub use error::{Error, Result};
pub use solver::{solve, Action, ModelConfig, SolveResult, StationaryPolicy, ValueFunction};
