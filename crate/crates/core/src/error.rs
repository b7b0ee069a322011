use thiserror::Error;

/// Errors raised by the solvers in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("gauge transform needs periodic boundaries with sites * gain_phase = 0 mod 2pi (sites = {sites}, gain_phase = {phase})")]
    GaugeIncompatible { sites: usize, phase: f64 },

    #[error("the correlation-matrix solver is exact only for interaction = 0 (got {0})")]
    Interacting(f64),

    #[error("step-size check failed at t = {time}: half-step deviation {deviation:e} exceeds {tolerance:e}")]
    StepCheck {
        time: f64,
        deviation: f64,
        tolerance: f64,
    },

    #[error("no convergence: {0}")]
    NotConverged(String),

    #[error("system of {sites} sites exceeds the limit of {limit}")]
    TooLarge { sites: usize, limit: usize },

    #[error("fit rejected: {0}")]
    Fit(String),

    #[error("time grids differ: {0}")]
    GridMismatch(String),

    #[error("singular linear system: {0}")]
    Singular(String),
}

pub type Result<T> = std::result::Result<T, Error>;
