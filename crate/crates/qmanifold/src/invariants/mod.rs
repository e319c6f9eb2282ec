//! The 𝔡 and X invariants of a quadratic tuple, and classification predicates.

mod classify;
mod dinv;
mod output;
mod xinv;

use thiserror::Error;

use crate::algebra::{AlgebraError, Poly, QuadTuple, RatMatrix, Rational};
use crate::pencil::{PencilError, PolyMatrix};

pub use classify::{
    binary_form, good_weak_condition, is_good, is_well_curved, squarefree_multiplicities, GoodManifoldSpec,
    WeakCondition, WellCurved,
};
pub use dinv::{d_invariant, d_pencils, d_table, DEntry, DTable};
pub use output::{d_table_csv, x_table_csv};
pub use xinv::{
    hint_values, pencil_rational_roots, rational_roots, sparse_hints, x_invariant, x_paraboloid_closed, x_table,
    BadSetDim, XConfig, XEntry, XSolver, XTable,
};

#[derive(Debug, Error)]
pub enum InvariantError {
    #[error("parameter out of range: {0}")]
    Range(String),
    #[error("subspace matrix has rank {rank}, expected {rows}")]
    RankDeficient { rank: usize, rows: usize },
    #[error(transparent)]
    Pencil(#[from] PencilError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// Basis of the tangent space of the graph at `ξ`: column `j` is `(e_j, ∂_j 𝐐(ξ))`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TangentFrame {
    pub xi: Vec<Rational>,
    /// `(d + n) × d`.
    pub frame: RatMatrix,
}

pub fn tangent_frame(t: &QuadTuple, xi: &[Rational]) -> Result<TangentFrame, InvariantError> {
    let (d, n) = (t.d(), t.n());
    if xi.len() != d {
        return Err(InvariantError::Range(format!(
            "point has {} coordinates, d={d}",
            xi.len()
        )));
    }
    let mut frame = RatMatrix::zeros(d + n, d);
    for j in 0..d {
        frame.set(j, j, crate::algebra::rat::int(1));
    }
    for (i, f) in t.forms().iter().enumerate() {
        for (j, g) in f.gradient(xi).into_iter().enumerate() {
            frame.set(d + i, j, g);
        }
    }
    Ok(TangentFrame { xi: xi.to_vec(), frame })
}

/// `dim π_{V_ξ}(V) = rank(V · frame)` for `V` given by `m` independent rows.
pub fn proj_dim(v: &RatMatrix, frame: &TangentFrame) -> Result<usize, InvariantError> {
    if v.cols() != frame.frame.rows() {
        return Err(InvariantError::Range(format!(
            "subspace lives in dimension {}, frame in {}",
            v.cols(),
            frame.frame.rows()
        )));
    }
    let rank = v.rank();
    if rank != v.rows() {
        return Err(InvariantError::RankDeficient { rank, rows: v.rows() });
    }
    Ok(v.try_mul(&frame.frame)?.rank())
}

/// Both sides of `dim π_{V_ξ}V = dim V − dim V_ξ^⊥ + dim π_{V_ξ^⊥}V^⊥`.
pub fn projection_identity(v: &RatMatrix, frame: &TangentFrame) -> Result<(i64, i64), InvariantError> {
    let lhs = proj_dim(v, frame)? as i64;
    let normal = frame.frame.transpose().row_space_complement();
    let v_perp = v.row_space_complement();
    let far = if normal.rows() == 0 || v_perp.rows() == 0 {
        0
    } else {
        v_perp.try_mul(&normal.transpose())?.rank()
    };
    Ok((lhs, v.rows() as i64 - normal.rows() as i64 + far as i64))
}

/// The tangent frame as a polynomial matrix, `ξ` at variables `offset..offset + d`.
pub fn tangent_poly_matrix(t: &QuadTuple, nvars: usize, offset: usize) -> PolyMatrix {
    let (d, n) = (t.d(), t.n());
    let mut m = PolyMatrix::zeros(d + n, d, nvars);
    for j in 0..d {
        m.set(j, j, Poly::one(nvars));
    }
    for (i, a) in t.matrices().iter().enumerate() {
        for j in 0..d {
            let mut p = Poly::zero(nvars);
            for l in 0..d {
                let c = a.get(j, l);
                if !num_traits::Zero::is_zero(c) {
                    p = &p + &Poly::var(nvars, offset + l).scale(&(c * crate::algebra::rat::int(2)));
                }
            }
            m.set(d + i, j, p);
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rat::int;
    use crate::algebra::{parse_tuple, QuadTuple};

    #[test]
    fn frames_and_projections() {
        let t = QuadTuple::paraboloid(2);
        let f0 = tangent_frame(&t, &[int(0), int(0)]).unwrap();
        assert_eq!(f0.frame, RatMatrix::from_i64(&[&[1, 0], &[0, 1], &[0, 0]]));
        let f1 = tangent_frame(&t, &[int(1), int(0)]).unwrap();
        assert_eq!(f1.frame, RatMatrix::from_i64(&[&[1, 0], &[0, 1], &[2, 0]]));
        let e3 = RatMatrix::from_i64(&[&[0, 0, 1]]);
        assert_eq!(proj_dim(&e3, &f0).unwrap(), 0);
        assert_eq!(proj_dim(&e3, &f1).unwrap(), 1);
        assert_eq!(proj_dim(&RatMatrix::identity(3), &f1).unwrap(), 2);
        assert!(proj_dim(&RatMatrix::from_i64(&[&[0, 0, 1], &[0, 0, 2]]), &f1).is_err());

        let t = parse_tuple("d=2; x1*x2").unwrap();
        let f = tangent_frame(&t, &[int(1), int(1)]).unwrap();
        assert_eq!(f.frame.row(2), &[int(1), int(1)]);
    }

    #[test]
    fn symbolic_frame_matches_pointwise() {
        let t = parse_tuple("d=3; x1^2 + 2*x2*x3; x3^2 - x1*x2").unwrap();
        let m = tangent_poly_matrix(&t, 3, 0);
        let xi = [int(2), int(-1), int(3)];
        assert_eq!(m.eval(&xi), tangent_frame(&t, &xi).unwrap().frame);
    }
}
