use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid frequency: omega must be positive and finite, got {0}")]
    InvalidFrequency(f64),

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("dimension mismatch: expected length {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("discrete Helmholtz system is singular or near-resonant (relative residual {residual:e})")]
    Resonance { residual: f64 },

    #[error("iteration diverged: non-finite state at iteration {iteration}")]
    Divergence { iteration: usize },

    #[error("degenerate history: zero norm at entry {index}")]
    DegenerateHistory { index: usize },

    #[error("invalid bound: {0}")]
    InvalidBound(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("system has {dofs} degrees of freedom, above the dense cap of {cap}; reduce omega or the resolution constant, or raise the cap")]
    Size { dofs: usize, cap: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Configuration(msg.into())
    }

    /// Process exit status: 2 for bad input, 3 for numerical failure.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Resonance { .. }
            | Error::Divergence { .. }
            | Error::DegenerateHistory { .. }
            | Error::Numerical(_) => 3,
            _ => 2,
        }
    }

    pub(crate) fn check_len(expected: usize, actual: usize) -> Result<()> {
        if expected == actual {
            Ok(())
        } else {
            Err(Error::Dimension { expected, actual })
        }
    }
}

pub(crate) fn check_omega(omega: f64) -> Result<()> {
    if omega.is_finite() && omega > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidFrequency(omega))
    }
}
