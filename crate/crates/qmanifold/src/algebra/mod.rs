//! Exact polynomial and quadratic-form arithmetic over ℚ.

mod matrix;
pub mod parse;
mod poly;
mod quad;
pub mod rat;

use num_traits::Zero;
use thiserror::Error;

pub use matrix::{rank_of_rows, RatMatrix, Rref};
pub use parse::{parse_poly, parse_tuple, ParseError};
pub use poly::{Monomial, Poly};
pub use quad::{
    combine_forms, congruence_diagonalize, hessian_half, nv, quad_of_matrix, substitute_linear, QuadForm, QuadTuple,
};

pub type Rational = num_rational::BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },
    #[error("matrix is {0}x{1}, expected square")]
    NotSquare(usize, usize),
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("matrix is singular")]
    Singular,
    #[error("polynomial is not a quadratic form: {0}")]
    NotQuadratic(String),
    #[error("cannot normalize the zero polynomial")]
    ZeroPolynomial,
    #[error("a tuple needs at least one form")]
    EmptyTuple,
}

/// All points of `{1, …, side}^n`.
pub fn grid_points(n: usize, side: u32) -> Vec<Vec<Rational>> {
    let mut pts = vec![Vec::with_capacity(n)];
    for _ in 0..n {
        let mut next = Vec::with_capacity(pts.len() * side as usize);
        for p in &pts {
            for v in 1..=side {
                let mut q = p.clone();
                q.push(rat::int(v as i64));
                next.push(q);
            }
        }
        pts = next;
    }
    pts
}

/// Identity test by evaluation on `{1, …, D+1}^n`, `D` the total degree.
///
/// A nonzero polynomial of degree `D` cannot vanish on the whole grid, so
/// this is an exact test, independent of the coefficient representation.
pub fn vanishes_on_grid(p: &Poly) -> bool {
    let deg = p.degree();
    if deg < 0 {
        return true;
    }
    let side = deg as u32 + 1;
    let n = p.nvars();
    // Walk the grid odometer-style to avoid materialising it.
    let mut point = vec![rat::int(1); n];
    let mut idx = vec![1u32; n];
    loop {
        if !p.eval(&point).is_zero() {
            return false;
        }
        let mut k = 0;
        loop {
            if k == n {
                return true;
            }
            if idx[k] < side {
                idx[k] += 1;
                point[k] = rat::int(idx[k] as i64);
                break;
            }
            idx[k] = 1;
            point[k] = rat::int(1);
            k += 1;
        }
    }
}

/// Whether `p ≡ 0`, decided by coefficients and by the grid test.
///
/// # Panics
/// If the two tests disagree, which would mean an arithmetic bug.
pub fn is_identically_zero(p: &Poly) -> bool {
    let by_coeffs = p.is_zero();
    let by_grid = vanishes_on_grid(p);
    assert_eq!(
        by_coeffs, by_grid,
        "coefficient and grid identity tests disagree on {p}"
    );
    by_coeffs
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pit_examples() {
        let p = parse_poly("(x1+x2)^2 - x1^2 - 2*x1*x2 - x2^2", 2).unwrap();
        assert!(is_identically_zero(&p));
        let q = parse_poly("x1^2 - x1", 1).unwrap();
        assert!(!is_identically_zero(&q));
        assert!(is_identically_zero(&Poly::zero(4)));
    }

    #[test]
    fn grid_size() {
        assert_eq!(grid_points(3, 2).len(), 8);
        assert_eq!(grid_points(0, 5).len(), 1);
    }
}
