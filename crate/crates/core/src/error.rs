use thiserror::Error;

use crate::grid::{GeometryViolation, Pos};

/// Errors raised by the simulation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvacError {
    #[error("position ({}, {}) is outside the {width}x{height} grid", pos.x, pos.y)]
    OutOfBounds {
        pos: Pos,
        width: usize,
        height: usize,
    },

    #[error("malformed move intent: {0}")]
    MalformedIntent(String),

    #[error("need at least 2 samples for a confidence interval, got {0}")]
    TooFewSamples(usize),

    #[error("confidence level must lie strictly between 0 and 1, got {0}")]
    InvalidLevel(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid geometry: {}", join_violations(.0))]
    InvalidGeometry(Vec<GeometryViolation>),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("no replication results to report")]
    EmptyReplicationSet,
}

fn join_violations(v: &[GeometryViolation]) -> String {
    v.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T, E = EvacError> = std::result::Result<T, E>;
