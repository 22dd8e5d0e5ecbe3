//! Reproducible experiment suites and their reports.

pub mod estimates;
pub mod illposed;
pub mod refinement;
pub mod report;
pub mod scaling;

pub use report::{fit_log_slope, fit_slope, Check, ExperimentReport, Point, SlopeFit, Verdict};
