//! Cost-aware bandits on graph signals.
//!
//! A learner repeatedly probes a graph whose node rewards form a smooth
//! signal. A probe is either a single node or a uniformly weighted
//! neighborhood average; wide probes are cheaper to sense but carry less
//! specific information. This crate provides:
//!
//! - [`graph`]: weighted undirected graphs, random-graph generators
//!   (Erdős–Rényi, Barabási–Albert, stochastic block model), dense
//!   Laplacian eigendecomposition and the effective dimension.
//! - [`probes`]: neighborhood probes, graph Fourier transforms and both
//!   sensing-cost models (width-only closed form and Laplacian quadratic
//!   form).
//! - [`environment`]: smooth reward synthesis in the spectral basis, the
//!   noisy observation channel and ground-truth optima.
//! - [`policies`]: ridge estimation in the spectral basis, UCB scoring,
//!   the CheapUCB stage schedule and the three selection policies
//!   (CheapUCB, SpectralUCB, LinUCB).
//! - [`harness`]: seeded experiment execution, regret/cost accounting,
//!   aggregation over runs and trajectory verification.
//! - [`ingest`]: labeled points → k-means clusters → per-cluster rewards
//!   → kNN graph, producing a (graph, reward) pair for the harness.
//! - [`cli`]: the `gen-graph` / `ingest` / `run` / `report` front end.

use std::path::PathBuf;

use thiserror::Error;

pub mod cli;
pub mod environment;
pub mod graph;
pub mod harness;
pub mod ingest;
pub mod policies;
pub mod probes;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid probe width {width} at node {anchor}: feasible range is 1..={max}")]
    InvalidProbeWidth {
        anchor: usize,
        width: usize,
        max: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("runtime invariant breach: {0}")]
    InvariantBreach(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("parse error in {path} (line {line}): {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
