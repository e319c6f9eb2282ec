//! Row-rank of polynomial matrices, pencils and echelon parameter families.

mod echelon;
mod minrank;
mod polymatrix;

use thiserror::Error;

pub use echelon::{echelon_types, EchelonFamily};
pub use minrank::{
    decide, family_below, min_family_rank, FamilyOutcome, Found, ParamPolyMatrix, RankConfig, RankDecision, RankStatus,
};
pub use polymatrix::{combinations, family_rank, minor_sum_poly, pencil, row_rank, PolyMatrix};

#[derive(Debug, Error)]
pub enum PencilError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("minor order {order} out of range for a {rows}x{cols} matrix")]
    MinorOrder { order: usize, rows: usize, cols: usize },
    #[error("expected {expected} parameters, got {found}")]
    ParamCount { expected: usize, found: usize },
    #[error("rank {rank} impossible for {rows}x{cols}")]
    InvalidRank { rank: usize, rows: usize, cols: usize },
}
