use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A field parameter violates its invariant; `field` names the config key.
    #[error("invalid field spec: {field} {reason}")]
    InvalidSpec { field: &'static str, reason: String },

    #[error("geometry infeasible: {0}")]
    GeometryInfeasible(String),

    #[error("raster cell {cell} m is too coarse; must be at most W/8 = {max} m")]
    CellTooCoarse { cell: f64, max: f64 },

    #[error("path discontinuity at segment {index}: {detail}")]
    Discontinuity { index: usize, detail: String },

    #[error("invalid spray program: {0}")]
    InvalidProgram(String),
}

pub type Result<T> = std::result::Result<T, Error>;
