//! Fitting of four heavy-tailed candidate models (Gamma, inverse Gamma,
//! log-normal, Weibull) to windowed volume-price samples, scoring with a
//! generalized Kullback-Leibler distance and ranking the models per window.
//!
//! The usual flow is [`empirical::load_snapshots`] →
//! [`empirical::build_empirical`] → [`fitting::fit_cdf`] →
//! [`divergence::standard_distance`] / [`divergence::tail_distance`] →
//! [`ranking::rank_window`]; [`pipeline::run`] strings all of it together.

#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord)]

pub mod distributions;
pub mod divergence;
pub mod empirical;
mod error;
pub mod export;
pub mod fitting;
pub mod optim;
pub mod pipeline;
pub mod ranking;
pub mod report;
pub mod special;
pub mod synth;

pub use distributions::{Model, ModelKind, ModelParams};
pub use divergence::DistanceReport;
pub use empirical::{EmpiricalDistribution, WindowSnapshot};
pub use error::{Error, Result};
pub use fitting::FitResult;
pub use pipeline::RunConfig;
pub use ranking::{RankMatrix, RankingTable, Variant};

/// Float format used in every exported table: 17 significant digits,
/// which round-trips an `f64` exactly.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}
