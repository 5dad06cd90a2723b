//! Trial analyses: relative improvement, learning-curve fit and density
//! clustering of (time, error) observations.

mod cluster;
mod decay;
mod improvement;

pub use cluster::{dbscan, standardize, summarize, DbscanParams, Label, Point2};
pub use decay::{decay_series, fit_exp_decay, fit_exp_decay_traced, DecayFit, MAX_ITERATIONS, RELATIVE_TOLERANCE};
pub use improvement::percent_improvement;
