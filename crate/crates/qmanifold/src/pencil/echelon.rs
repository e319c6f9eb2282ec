use num_traits::{One, Zero};
use serde::Serialize;

use super::{combinations, PencilError, PolyMatrix};
use crate::algebra::{Poly, RatMatrix, Rational};

/// Row-echelon parameter family of `rows × cols` matrices of a fixed rank.
///
/// Row `i < rank` has a 1 in pivot column `pivots[i]`, zeros in the other
/// pivot columns and a free parameter in every non-pivot column. Rows from
/// `rank` on are zero.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct EchelonFamily {
    pub rows: usize,
    pub cols: usize,
    pub rank: usize,
    /// 0-based, strictly increasing.
    pub pivots: Vec<usize>,
}

impl EchelonFamily {
    pub fn param_count(&self) -> usize {
        self.rank * (self.cols - self.rank)
    }

    /// `(row, col)` of each free entry, row-major.
    pub fn free_positions(&self) -> Vec<(usize, usize)> {
        let free: Vec<usize> = (0..self.cols).filter(|c| !self.pivots.contains(c)).collect();
        (0..self.rank).flat_map(|i| free.iter().map(move |&c| (i, c))).collect()
    }

    pub fn instantiate(&self, params: &[Rational]) -> Result<RatMatrix, PencilError> {
        if params.len() != self.param_count() {
            return Err(PencilError::ParamCount {
                expected: self.param_count(),
                found: params.len(),
            });
        }
        let mut m = RatMatrix::zeros(self.rows, self.cols);
        for (i, &p) in self.pivots.iter().enumerate() {
            m.set(i, p, Rational::one());
        }
        for ((i, c), v) in self.free_positions().into_iter().zip(params) {
            m.set(i, c, v.clone());
        }
        Ok(m)
    }

    pub fn instantiate_f64(&self, params: &[f64]) -> Vec<Vec<f64>> {
        let mut m = vec![vec![0.0; self.cols]; self.rows];
        for (i, &p) in self.pivots.iter().enumerate() {
            m[i][p] = 1.0;
        }
        for ((i, c), v) in self.free_positions().into_iter().zip(params) {
            m[i][c] = *v;
        }
        m
    }

    /// The family as a polynomial matrix whose free entries are the
    /// variables `offset .. offset + param_count` of an `nvars` space.
    pub fn symbolic(&self, nvars: usize, offset: usize) -> PolyMatrix {
        assert!(offset + self.param_count() <= nvars);
        let mut m = PolyMatrix::zeros(self.rows, self.cols, nvars);
        for (i, &p) in self.pivots.iter().enumerate() {
            m.set(i, p, Poly::one(nvars));
        }
        for (k, (i, c)) in self.free_positions().into_iter().enumerate() {
            m.set(i, c, Poly::var(nvars, offset + k));
        }
        m
    }

    /// Read the free parameters of a matrix already in this family's shape.
    pub fn params_of(&self, m: &RatMatrix) -> Option<Vec<Rational>> {
        for i in 0..self.rows {
            for j in 0..self.cols {
                let v = m.get(i, j);
                let expected_fixed = if i >= self.rank {
                    Some(Rational::zero())
                } else {
                    self.pivots.iter().position(|&p| p == j).map(|k| {
                        if k == i {
                            Rational::one()
                        } else {
                            Rational::zero()
                        }
                    })
                };
                if let Some(e) = expected_fixed {
                    if *v != e {
                        return None;
                    }
                }
            }
        }
        Some(
            self.free_positions()
                .into_iter()
                .map(|(i, c)| m.get(i, c).clone())
                .collect(),
        )
    }
}

/// All `C(cols, rank)` echelon families of `rows × cols` matrices of rank `rank`.
pub fn echelon_types(rows: usize, cols: usize, rank: usize) -> Result<Vec<EchelonFamily>, PencilError> {
    if rank > rows || rows > cols.max(rows) || rank > cols {
        return Err(PencilError::InvalidRank { rank, rows, cols });
    }
    Ok(combinations(cols, rank)
        .into_iter()
        .map(|pivots| EchelonFamily {
            rows,
            cols,
            rank,
            pivots,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rat::r;

    #[test]
    fn counts_and_shapes() {
        let fams = echelon_types(4, 4, 3).unwrap();
        assert_eq!(fams.len(), 4);
        let first = &fams[0];
        assert_eq!(first.pivots, vec![0, 1, 2]);
        assert_eq!(first.param_count(), 3);
        let m = first.instantiate(&[r(1, 1), r(2, 1), r(3, 1)]).unwrap();
        assert_eq!(m.row(0)[3], r(1, 1));
        assert!(m.row(3).iter().all(Zero::is_zero));
        assert_eq!(m.rank(), 3);

        let square = echelon_types(3, 3, 3).unwrap();
        assert_eq!(square.len(), 1);
        assert_eq!(square[0].param_count(), 0);

        let two = echelon_types(2, 2, 1).unwrap();
        assert_eq!(two.len(), 2);
        assert!(two.iter().all(|f| f.param_count() == 1));
        assert!(echelon_types(2, 2, 3).is_err());
    }

    #[test]
    fn symbolic_matches_instantiation() {
        let fam = &echelon_types(2, 4, 2).unwrap()[2];
        let sym = fam.symbolic(4, 0);
        let params = [r(1, 2), r(-3, 1), r(0, 1), r(7, 5)];
        assert_eq!(sym.eval(&params), fam.instantiate(&params).unwrap());
        assert_eq!(
            fam.params_of(&fam.instantiate(&params).unwrap()).unwrap(),
            params.to_vec()
        );
    }
}
