//! Exact verification toolkit for feedforward ReLU/identity networks with
//! rational weights.
//!
//! The crate decides reachability, interval properties, network
//! equivalence, classification/standard/Lipschitz robustness (locally and
//! globally) under the sum and maximum metrics, all over exact rational
//! arithmetic: a `holds = false` answer always comes with a rational
//! witness that can be replayed by direct evaluation, and a compact
//! certificate checkable with a single linear program. On top of the
//! deciders sit constructive instance transformations between the
//! problems, 3-CNF hardness-instance generators, and node-necessity
//! analysis for network minimization.

pub mod linspec;
pub mod lp;
pub mod minimize;
pub mod net;
pub mod rat;
pub mod reduce;
pub mod verify;

pub use rat::{dist, parse_rational, ExtRational, Metric, RatVector, Rational};

use thiserror::Error as ThisError;

/// Errors shared across the crate.
#[derive(Debug, ThisError)]
pub enum Error {
    #[error("malformed rational literal '{0}'")]
    MalformedRational(String),
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },
    #[error("{0}")]
    Malformed(String),
    #[error("node reference {layer}:{index} does not address a hidden node")]
    BadNodeRef { layer: usize, index: usize },
    #[error("variable count {0} exceeds the Fourier-Motzkin guard of {1}")]
    FmDimGuard(usize, usize),
    #[error("metric {0} is not supported for this problem")]
    UnsupportedMetric(Metric),
    #[error("{0} must be finite here")]
    InfinityNotAllowed(&'static str),
    #[error("{0}")]
    BadInstance(String),
    #[error("hidden node count {0} exceeds the subset-enumeration cap of {1}")]
    CapExceeded(usize, usize),
    #[error("clause {0} has {1} literals; exactly 3 are required")]
    ClauseArity(usize, usize),
    #[error("malformed DIMACS input: {0}")]
    Dimacs(String),
}
