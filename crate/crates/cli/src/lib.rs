//! Experiment driver for the sdcar library: builds configured models and
//! paths, sweeps them, locates gap closings, analyzes crossings, runs
//! disorder ensembles and Combes-Thomas checks, and emits JSON-lines / CSV.

pub mod config;
pub mod experiments;
pub mod report;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("config error: {0}")]
    Parse(String),
    #[error("no sign change: endpoints have sigma = {sigma_endpoints:+} and the gap stays above \
             {min_gap:.3e}; the endpoints sit in the same phase")]
    NoSignChange { sigma_endpoints: i8, min_gap: f64 },
    #[error("gap at s = {s} is {gap:.3e}, still above the escalation threshold {threshold:.3e}")]
    StillGapped { s: f64, gap: f64, threshold: f64 },
    #[error("assertion failed: {0}")]
    Assertion(String),
    #[error(transparent)]
    Core(#[from] sdcar::Error),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, ExperimentError>;
