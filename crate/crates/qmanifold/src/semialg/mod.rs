//! Semi-algebraic sets, a numeric emptiness oracle and dimension estimates.

mod dim;
mod emptiness;
pub mod interval;
mod set;

use serde::Serialize;
use thiserror::Error;

use crate::algebra::ParseError;

pub use dim::{
    fiber_dim, slice_sup_dim, variety_dim_estimate, DimConfig, FiberDim, SliceConfig, SliceDimResult, SliceProblem,
};
pub use emptiness::{emptiness, snap_to_rational, EmptinessConfig, EmptinessReport, OracleStatus};
pub use set::{Cell, Complexity, SemiAlgebraicSet};

#[derive(Debug, Error)]
pub enum SemialgError {
    #[error("polynomial lives in {found} variables, ambient space has {expected}")]
    Ambient { expected: usize, found: usize },
    #[error("bad set text: {0}")]
    Format(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// How much a reported number can be trusted, weakest first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Confidence {
    Inconclusive,
    HighConfidence,
    ClosedFormOracle,
}

impl Confidence {
    pub fn as_str(self) -> &'static str {
        match self {
            Confidence::Inconclusive => "Inconclusive",
            Confidence::HighConfidence => "HighConfidence",
            Confidence::ClosedFormOracle => "ClosedFormOracle",
        }
    }
}
