use thiserror::Error;

/// Errors shared across the solver, encoding, and reporting modules.
#[derive(Debug, Error)]
pub enum Error {
    /// Input outside the mathematical domain of an operation (e.g. a
    /// stable-regime formula evaluated past its singularity).
    #[error("domain error: {0}")]
    Domain(String),

    /// A requested build would exceed the configured size cap.
    #[error("resource cap exceeded: {0}")]
    ResourceCap(String),

    /// A state component crossed the overflow threshold during integration.
    #[error("numerical instability: {0}")]
    Instability(String),

    /// Matrix or vector dimensions do not satisfy an operation's contract.
    #[error("dimension error: {0}")]
    Dimension(String),

    /// Scale factor too small for the target matrix norm.
    #[error("norm error: {0}")]
    Norm(String),

    /// Post-selection annihilated the state.
    #[error("degenerate output: {0}")]
    Degenerate(String),

    /// Unknown method, command, or option value.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Malformed configuration file or parameter set.
    #[error("config error: {0}")]
    Config(String),

    /// Invalid fine/coarse marching schedule.
    #[error("schedule error: {0}")]
    Schedule(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit status used by the command-line surface.
    pub fn exit_status(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Unsupported(_) => 2,
            Error::ResourceCap(_) => 3,
            Error::Domain(_)
            | Error::Instability(_)
            | Error::Dimension(_)
            | Error::Norm(_)
            | Error::Degenerate(_)
            | Error::Schedule(_) => 4,
            Error::Io(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
