use thiserror::Error;

/// Failures surfaced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("chart domain error: {0}")]
    Domain(String),

    #[error("integration failed at tau = {tau}: {reason} (y = {y}, Y = {big_y})")]
    Integration {
        reason: String,
        tau: f64,
        y: f64,
        big_y: f64,
    },

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("no crossing: {0}")]
    NoCrossing(String),

    #[error("bracket endpoints have equal sign: phi({lo}) = {phi_lo}, phi({hi}) = {phi_hi}")]
    Bracket {
        lo: f64,
        hi: f64,
        phi_lo: f64,
        phi_hi: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
