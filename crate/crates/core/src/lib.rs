//! Local-hidden-variables model of down-conversion photodetection: vacuum
//! field sampling, threshold detection, closed-form probabilities and
//! feasibility bounds.

pub mod analytic;
pub mod config;
pub mod constants;
pub mod detector;
pub mod error;
pub mod feasibility;
pub mod field;
pub mod grid;
pub mod mc;
pub mod quad;
pub mod rng;
pub mod special;
pub mod stats;

pub use error::{Error, Result};
