//! Simulation and verification toolkit for dense random multigraphs.
//!
//! The crate is organised around one object and three views of it:
//!
//! * **Finite multigraphs** ([`graph`]): symmetric adjacency matrices with
//!   nonnegative integer entries, loops counted twice on the diagonal, plus
//!   the stub-word ("urn") encoding that underlies every generator here.
//! * **Limit kernels** ([`multigraphon`]): measurable edge-multiplicity
//!   kernels `W(x, y, k)` on `[0,1]² × ℕ`, with the Poisson–Gamma family,
//!   empirical-limit variants, and step kernels built from finite graphs.
//! * **Dynamics and samplers** ([`generators`]): the configuration model,
//!   the Pólya-urn preferential-attachment generator, the edge-reconnecting
//!   and ball-replacement Markov chains, and `W`-random graph sampling —
//!   all deterministic given an [`generators::RngStream`].
//! * **Verification** ([`oracle`], [`densities`], [`stats`]): exact
//!   distribution tables by enumeration and linear algebra, Monte Carlo
//!   homomorphism-density estimators, and the special functions and
//!   goodness-of-fit machinery the acceptance battery runs on.
//!
//! The [`cli`] module wires these into the `mgl` binary: `gen`, `exact`,
//! `density`, and a set of named `experiment`s that certify the generators
//! against their exact laws and limit kernels.

pub mod cli;
pub mod densities;
pub mod generators;
pub mod graph;
pub mod multigraphon;
pub mod oracle;
pub mod stats;

use thiserror::Error;

/// Errors reported by constructors, parsers, and enumeration routines.
///
/// Hot-path evaluation methods (kernel evaluation, pdf/cdf calls) assert
/// their domain preconditions instead of returning `Result`; see the
/// individual docs for which calls panic on contract violations.
#[derive(Debug, Error)]
pub enum Error {
    /// A matrix, word, or degree sequence violated a structural invariant.
    #[error("invalid graph data: {0}")]
    InvalidGraph(String),

    /// A numeric parameter was outside its domain (e.g. κ ≤ 0).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Text input (edge list, kernel JSON, config file) failed to parse.
    #[error("parse error: {0}")]
    Parse(String),

    /// An exact enumeration would exceed its stated budget.
    #[error("enumeration budget exceeded: {0}")]
    BudgetExceeded(String),

    /// A distribution table was inconsistent with the object it describes.
    #[error("inconsistent distribution: {0}")]
    InconsistentDistribution(String),

    /// The exact stationary solve failed to converge.
    #[error("stationary solve failed: {0}")]
    SolveFailed(String),

    /// Statistical test preconditions were not met (e.g. degenerate bins).
    #[error("degenerate test data: {0}")]
    DegenerateData(String),

    /// Filesystem I/O failed.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// JSON (de)serialisation failed.
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
