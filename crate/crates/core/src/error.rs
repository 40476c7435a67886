use thiserror::Error;

/// Errors produced by the fitting pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// A domain value violates its type invariant (amplitude outside (0,1),
    /// non-positive sigma, and so on).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A truncation-time schedule could not be built or does not match the data.
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    /// A dataset or report file failed to parse. `line` is 1-based.
    #[error("{origin}:{line}: {message}")]
    Parse {
        origin: String,
        line: usize,
        message: String,
    },

    /// A report file was written by a newer major format version.
    #[error("report format v{found} is newer than supported v{supported}")]
    VersionMismatch { found: u32, supported: u32 },

    /// A report file ended before a required section.
    #[error("truncated report: missing section [{0}]")]
    TruncatedReport(String),

    /// Proposals are so badly scaled that almost nothing is accepted.
    #[error("acceptance rate {rate:.4} over the run is below 0.01; decrease the proposal scales")]
    AcceptanceTooLow { rate: f64 },

    /// Too many spacing proposals fell below the floor c0.
    #[error(
        "discarded {discarded} of {proposed} spacing proposals (limit {limit}); \
         decrease c0 and reselect the truncation times"
    )]
    DiscardLimit {
        discarded: u64,
        proposed: u64,
        limit: f64,
    },

    /// More than 20% of the outer repetitions aborted.
    #[error("{failed} of {total} repetitions aborted; last cause: {last_cause}")]
    TooManyFailures {
        failed: usize,
        total: usize,
        last_cause: String,
    },

    /// Not enough draws to summarize.
    #[error("need at least {need} draws to summarize, got {got}")]
    TooFewDraws { need: usize, got: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
