use thiserror::Error;

use crate::model::Violation;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("rating `{field}` is {value}, must be a finite number >= 1")]
    RatingBelowOne { field: String, value: f64 },

    #[error("invalid team profile: {}", format_violations(.0))]
    InvalidProfile(Vec<Violation>),

    #[error("unknown parameter key `{0}`")]
    UnknownParam(String),

    #[error("parameter `{key}`: {reason}")]
    InvalidParam { key: String, reason: String },

    #[error("trials must be at least 1")]
    ZeroTrials,

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),

    #[error("sweep point {index} (value {value}) yields an invalid profile: {}", format_violations(.violations))]
    InvalidSweepPoint {
        index: usize,
        value: f64,
        violations: Vec<Violation>,
    },

    #[error("forecast {0:?} is not a probability vector")]
    InvalidForecast([f64; 3]),

    #[error("global prior needs at least one observed outcome")]
    EmptyOutcomeCounts,
}

fn format_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
