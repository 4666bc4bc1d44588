use thiserror::Error;

/// Errors produced anywhere in the simulator.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter set violates one of its construction invariants.
    #[error("configuration error: {0}")]
    Config(String),

    /// Configuration validation found one or more problems; all of them are listed.
    #[error("invalid configuration:\n  - {}", .0.join("\n  - "))]
    ConfigProblems(Vec<String>),

    /// The toggle grid of the MCU clock cannot represent the requested chirp.
    #[error("bandwidth infeasible: {0}")]
    BandwidthInfeasible(String),

    /// A lookup or interpolation was requested outside the tabulated domain.
    #[error("out of range: {0}")]
    OutOfRange(String),

    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("calibration failed: {0}")]
    Calibration(String),

    /// Malformed file contents (waveform, table, curve).
    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for errors caused by the user's inputs rather than by a failed run.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::ConfigProblems(_)
                | Error::BandwidthInfeasible(_)
                | Error::OutOfRange(_)
                | Error::Domain(_)
                | Error::Format(_)
        )
    }
}
