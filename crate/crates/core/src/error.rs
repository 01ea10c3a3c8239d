//! Error types shared across the crate.

use crate::time::SimTime;
use thiserror::Error;

/// A simulation run that could not reach its stop condition.
#[derive(Debug, Error)]
pub enum RunError {
    /// The event queue drained while the stop condition was still unmet.
    /// `diagnostic` explains why no further progress was possible (for swarm
    /// runs: which peers are unreachable in the disposition graph).
    #[error("deadlock at {at}: event queue empty with stop condition unmet; {diagnostic}")]
    Deadlock { at: SimTime, diagnostic: String },

    /// Safety cap on virtual time: the next pending event lies beyond it.
    #[error("virtual time limit exceeded: next event at {next} is beyond cap {cap}")]
    TimeLimitExceeded { next: SimTime, cap: SimTime },
}

/// A scenario description that cannot be simulated.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),

    #[error("invalid config: {0}")]
    Invalid(String),
}

/// Anything that can stop a multi-scenario suite.
#[derive(Debug, Error)]
pub enum SuiteError {
    #[error("scenario '{scenario}' seed {seed}: {source}")]
    Run {
        scenario: String,
        seed: u64,
        source: RunError,
    },

    #[error("writing results: {0}")]
    Io(#[from] std::io::Error),
}

/// Inputs a statistics routine rejects.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("empty sample set")]
    EmptySamples,

    #[error("empty dequeue log")]
    EmptyLog,

    #[error("no data bytes transferred; shares undefined")]
    ZeroBytes,

    #[error("degenerate regression: all x values equal")]
    DegenerateX,

    #[error("regression requires at least 2 points, got {0}")]
    TooFewPoints(usize),

    #[error("envelope requires reports from identical configs (digest mismatch)")]
    MismatchedConfigs,

    #[error("envelope requires at least 2 reports")]
    TooFewReports,
}
