use std::fmt;

use num_traits::{Signed, Zero};
use serde::Serialize;

use super::SemialgError;
use crate::algebra::{parse_poly, Poly, Rational};

/// One sign-condition cell: `P = 0` for every equality, `P > 0` for every positivity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cell {
    pub equalities: Vec<Poly>,
    pub positivities: Vec<Poly>,
}

impl Cell {
    pub fn new(equalities: Vec<Poly>, positivities: Vec<Poly>) -> Self {
        Cell {
            equalities,
            positivities,
        }
    }

    pub fn contains(&self, point: &[Rational]) -> bool {
        self.equalities.iter().all(|p| p.eval(point).is_zero())
            && self.positivities.iter().all(|p| p.eval(point).is_positive())
    }
}

/// Finite union of sign-condition cells in a fixed ambient space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SemiAlgebraicSet {
    dim: usize,
    cells: Vec<Cell>,
}

/// Representation complexity: sum of degrees of the stored polynomials.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Complexity(pub usize);

impl SemiAlgebraicSet {
    pub fn new(dim: usize, cells: Vec<Cell>) -> Result<Self, SemialgError> {
        for c in &cells {
            for p in c.equalities.iter().chain(&c.positivities) {
                if p.nvars() != dim {
                    return Err(SemialgError::Ambient {
                        expected: dim,
                        found: p.nvars(),
                    });
                }
            }
        }
        Ok(SemiAlgebraicSet { dim, cells })
    }

    /// A single cell.
    pub fn basic(dim: usize, equalities: Vec<Poly>, positivities: Vec<Poly>) -> Result<Self, SemialgError> {
        SemiAlgebraicSet::new(dim, vec![Cell::new(equalities, positivities)])
    }

    pub fn empty(dim: usize) -> Self {
        SemiAlgebraicSet { dim, cells: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn union(&self, other: &SemiAlgebraicSet) -> Result<SemiAlgebraicSet, SemialgError> {
        if self.dim != other.dim {
            return Err(SemialgError::Ambient {
                expected: self.dim,
                found: other.dim,
            });
        }
        let mut cells = self.cells.clone();
        cells.extend(other.cells.iter().cloned());
        Ok(SemiAlgebraicSet { dim: self.dim, cells })
    }

    /// Product with the real line in a new last coordinate.
    pub fn times_line(&self) -> SemiAlgebraicSet {
        let n = self.dim + 1;
        let lift = |p: &Poly| p.lift(n, 0);
        SemiAlgebraicSet {
            dim: n,
            cells: self
                .cells
                .iter()
                .map(|c| {
                    Cell::new(
                        c.equalities.iter().map(lift).collect(),
                        c.positivities.iter().map(lift).collect(),
                    )
                })
                .collect(),
        }
    }

    pub fn contains(&self, point: &[Rational]) -> bool {
        self.cells.iter().any(|c| c.contains(point))
    }

    pub fn complexity(&self) -> Complexity {
        Complexity(
            self.cells
                .iter()
                .flat_map(|c| c.equalities.iter().chain(&c.positivities))
                .map(|p| p.degree().max(0) as usize)
                .sum(),
        )
    }

    /// Parse `P = 0 && Q > 0 || R = 0`.
    pub fn parse(text: &str, dim: usize) -> Result<Self, SemialgError> {
        let mut cells = Vec::new();
        for cell_text in text.split("||") {
            let mut eqs = Vec::new();
            let mut pos = Vec::new();
            for atom in cell_text.split("&&") {
                let atom = atom.trim();
                let (lhs, target) = if let Some((l, r)) = atom.split_once('>') {
                    (l, (r, &mut pos))
                } else if let Some((l, r)) = atom.split_once('=') {
                    (l, (r, &mut eqs))
                } else {
                    return Err(SemialgError::Format(format!("missing relation in `{atom}`")));
                };
                let (rhs, list) = target;
                if rhs.trim() != "0" {
                    return Err(SemialgError::Format(format!("right-hand side must be 0 in `{atom}`")));
                }
                list.push(parse_poly(lhs, dim)?);
            }
            cells.push(Cell::new(eqs, pos));
        }
        SemiAlgebraicSet::new(dim, cells)
    }
}

impl fmt::Display for SemiAlgebraicSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cells: Vec<String> = self
            .cells
            .iter()
            .map(|c| {
                let atoms: Vec<String> = c
                    .equalities
                    .iter()
                    .map(|p| format!("{p} = 0"))
                    .chain(c.positivities.iter().map(|p| format!("{p} > 0")))
                    .collect();
                atoms.join(" && ")
            })
            .collect();
        write!(f, "{}", cells.join(" || "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rat::int;

    #[test]
    fn text_round_trip() {
        let s = SemiAlgebraicSet::parse("x1^2 + x2^2 - 1 = 0 && x1 > 0 || x2 = 0", 2).unwrap();
        assert_eq!(s.cells().len(), 2);
        assert_eq!(s.complexity(), Complexity(4));
        let again = SemiAlgebraicSet::parse(&s.to_string(), 2).unwrap();
        assert_eq!(again, s);
        assert!(s.contains(&[int(1), int(0)]));
        assert!(!s.contains(&[int(-1), int(1)]));
    }

    #[test]
    fn rejects_bad_relation() {
        assert!(SemiAlgebraicSet::parse("x1 < 0", 1).is_err());
        assert!(SemiAlgebraicSet::parse("x1 = 1", 1).is_err());
    }
}
