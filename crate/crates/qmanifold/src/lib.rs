//! Invariants of quadratic manifolds.

pub mod algebra;
pub mod cli;
pub mod covering;
pub mod exponents;
pub mod invariants;
pub mod numeric;
pub mod pencil;
pub mod semialg;
