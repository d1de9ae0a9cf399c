//! Spray path planning for rectangular fields: a baseline back-and-forth plan,
//! a pattern-based plan that avoids spraying during turns, nozzle switching
//! schedules, raster coverage verification and closed-form comparisons.

pub mod alternative;
pub mod analytics;
pub mod boustrophedon;
pub mod cli;
pub mod coverage;
pub mod error;
pub mod field;
pub mod geometry;
pub mod path;
pub mod switching;

pub use error::{Error, Result};
