//! Core library for a simulated beamsplitter-based optical quantum random
//! number generator and its analysis chain.
//!
//! The crate is organized in four layers:
//!
//! * [`bitcore`] — packed bit streams, the reproducible PRNG engine that
//!   stands in for physical randomness, and shared numeric helpers.
//! * [`devsim`] — discrete-event simulation of the optical generator:
//!   pulsed photon source, two-path split with delay, Geiger-mode detector
//!   with dead-time recovery, dark counts, afterpulses, and coincidence
//!   window classification.
//! * [`extract`] — von Neumann and Peres unbiasing with yield accounting
//!   against the binary entropy bound.
//! * [`stattest`] — circular autocorrelation lag scan plus frequency,
//!   serial, runs, entropy, and Maurer universal tests.
//!
//! Everything downstream of a seed is deterministic: the same seed and
//! configuration produce bit-identical outputs.

pub mod bitcore;
pub mod devsim;
pub mod extract;
pub mod stattest;

use std::fmt;

/// Crate-wide error type.
///
/// Variants map onto the failure classes the tools distinguish: domain
/// errors on operation parameters, structurally invalid configurations,
/// inputs too short for a statistic, and I/O or serialization problems.
#[derive(Debug)]
pub enum Error {
    /// A parameter lies outside the documented domain of an operation.
    ParamDomain(String),
    /// An operation that needs a non-empty input received an empty one.
    EmptyInput(String),
    /// The input stream is too short for the requested statistic.
    InsufficientData(String),
    /// A configuration invariant is violated; `path` names the offending
    /// field in config-file notation (e.g. `config.path_delay_ns`).
    Config { path: String, message: String },
    /// A requested workload exceeds a hard capacity bound.
    Capacity(String),
    /// Malformed on-disk data (bit files, sidecar metadata, reports).
    Format(String),
    /// Underlying I/O failure.
    Io(std::io::Error),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::ParamDomain(msg) => write!(f, "parameter out of domain: {msg}"),
            Error::EmptyInput(msg) => write!(f, "empty input: {msg}"),
            Error::InsufficientData(msg) => write!(f, "insufficient data: {msg}"),
            Error::Config { path, message } => write!(f, "invalid config at {path}: {message}"),
            Error::Capacity(msg) => write!(f, "capacity exceeded: {msg}"),
            Error::Format(msg) => write!(f, "malformed input: {msg}"),
            Error::Io(err) => write!(f, "i/o error: {err}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(err) => Some(err),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err)
    }
}

pub type Result<T> = std::result::Result<T, Error>;
