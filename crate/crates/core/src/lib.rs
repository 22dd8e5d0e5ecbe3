//! Pseudospectral laboratory for the generalized Benjamin–Ono equation.

pub mod cli;
pub mod config;
pub mod error;
pub mod experiments;
pub mod gauge;
pub mod norms;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};
