use std::collections::{BTreeSet, HashMap};

use num_traits::Zero;

use super::PencilError;
use crate::algebra::{rank_of_rows, Monomial, Poly, RatMatrix, Rational};

/// Matrix with polynomial entries over a shared set of indeterminates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyMatrix {
    rows: usize,
    cols: usize,
    nvars: usize,
    entries: Vec<Poly>,
}

impl PolyMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<Poly>) -> Result<Self, PencilError> {
        if entries.len() != rows * cols {
            return Err(PencilError::Shape(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        let nvars = entries.first().map(Poly::nvars).unwrap_or(0);
        if entries.iter().any(|e| e.nvars() != nvars) {
            return Err(PencilError::Shape("entries live in different variable spaces".into()));
        }
        Ok(PolyMatrix {
            rows,
            cols,
            nvars,
            entries,
        })
    }

    pub fn from_rows(rows: Vec<Vec<Poly>>) -> Result<Self, PencilError> {
        let r = rows.len();
        let c = rows.first().map(Vec::len).unwrap_or(0);
        if rows.iter().any(|row| row.len() != c) {
            return Err(PencilError::Shape("ragged rows".into()));
        }
        PolyMatrix::new(r, c, rows.into_iter().flatten().collect())
    }

    pub fn zeros(rows: usize, cols: usize, nvars: usize) -> Self {
        PolyMatrix {
            rows,
            cols,
            nvars,
            entries: vec![Poly::zero(nvars); rows * cols],
        }
    }

    /// Constant matrix viewed in `nvars` indeterminates.
    pub fn from_rat(m: &RatMatrix, nvars: usize) -> Self {
        let entries = (0..m.rows())
            .flat_map(|i| (0..m.cols()).map(move |j| (i, j)))
            .map(|(i, j)| Poly::constant(nvars, m.get(i, j).clone()))
            .collect();
        PolyMatrix {
            rows: m.rows(),
            cols: m.cols(),
            nvars,
            entries,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn get(&self, i: usize, j: usize) -> &Poly {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, p: Poly) {
        assert_eq!(p.nvars(), self.nvars);
        self.entries[i * self.cols + j] = p;
    }

    pub fn entries(&self) -> &[Poly] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Poly::is_zero)
    }

    pub fn mul(&self, other: &PolyMatrix) -> Result<PolyMatrix, PencilError> {
        if self.cols != other.rows || self.nvars != other.nvars {
            return Err(PencilError::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = PolyMatrix::zeros(self.rows, other.cols, self.nvars);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = Poly::zero(self.nvars);
                for k in 0..self.cols {
                    let a = self.get(i, k);
                    let b = other.get(k, j);
                    if !a.is_zero() && !b.is_zero() {
                        acc = &acc + &(a * b);
                    }
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    pub fn transpose(&self) -> PolyMatrix {
        let mut out = PolyMatrix::zeros(self.cols, self.rows, self.nvars);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).clone());
            }
        }
        out
    }

    pub fn select_rows(&self, rows: &[usize]) -> PolyMatrix {
        let entries = rows
            .iter()
            .flat_map(|&i| (0..self.cols).map(move |j| (i, j)))
            .map(|(i, j)| self.get(i, j).clone())
            .collect();
        PolyMatrix {
            rows: rows.len(),
            cols: self.cols,
            nvars: self.nvars,
            entries,
        }
    }

    pub fn select(&self, rows: &[usize], cols: &[usize]) -> PolyMatrix {
        let entries = rows
            .iter()
            .flat_map(|&i| cols.iter().map(move |&j| (i, j)))
            .map(|(i, j)| self.get(i, j).clone())
            .collect();
        PolyMatrix {
            rows: rows.len(),
            cols: cols.len(),
            nvars: self.nvars,
            entries,
        }
    }

    pub fn map(&self, f: impl Fn(&Poly) -> Poly) -> PolyMatrix {
        let entries: Vec<Poly> = self.entries.iter().map(f).collect();
        let nvars = entries.first().map(Poly::nvars).unwrap_or(self.nvars);
        PolyMatrix {
            rows: self.rows,
            cols: self.cols,
            nvars,
            entries,
        }
    }

    /// Evaluate every entry at a rational point.
    pub fn eval(&self, point: &[Rational]) -> RatMatrix {
        let rows = (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j).eval(point)).collect())
            .collect();
        if self.rows == 0 {
            RatMatrix::zeros(0, self.cols)
        } else {
            RatMatrix::from_rows(rows)
        }
    }

    /// Stacked coefficient vectors, one per row, over the union of monomials.
    pub fn coefficient_rows(&self) -> Vec<Vec<Rational>> {
        let mut monos: Vec<BTreeSet<Monomial>> = vec![BTreeSet::new(); self.cols];
        for i in 0..self.rows {
            for (j, set) in monos.iter_mut().enumerate() {
                set.extend(self.get(i, j).terms().map(|(m, _)| m.clone()));
            }
        }
        (0..self.rows)
            .map(|i| {
                monos
                    .iter()
                    .enumerate()
                    .flat_map(|(j, set)| {
                        let p = self.get(i, j);
                        set.iter().map(move |m| p.coeff(m))
                    })
                    .collect()
            })
            .collect()
    }

    /// Row-rank: dimension of the real span of the rows.
    pub fn row_rank(&self) -> usize {
        if self.rows == 0 {
            return 0;
        }
        rank_of_rows(self.coefficient_rows())
    }

    /// All `x × x` minors, ordered by row subset then column subset.
    pub fn minors(&self, x: usize) -> Result<Vec<Poly>, PencilError> {
        if x == 0 || x > self.rows.min(self.cols) {
            return Err(PencilError::MinorOrder {
                order: x,
                rows: self.rows,
                cols: self.cols,
            });
        }
        if self.cols > 63 {
            return Err(PencilError::Shape("too many columns for minor enumeration".into()));
        }
        let mut out = Vec::new();
        for rs in combinations(self.rows, x) {
            let mut memo: HashMap<u64, Poly> = HashMap::new();
            for cs in combinations(self.cols, x) {
                let mask = cs.iter().fold(0u64, |m, &c| m | (1 << c));
                out.push(self.det_rows_mask(&rs, mask, &mut memo));
            }
        }
        Ok(out)
    }

    /// Determinant of rows `rs` against the columns in `mask`, expanding
    /// along the last row and memoising on the column mask.
    fn det_rows_mask(&self, rs: &[usize], mask: u64, memo: &mut HashMap<u64, Poly>) -> Poly {
        let k = mask.count_ones() as usize;
        if k == 0 {
            return Poly::one(self.nvars);
        }
        if let Some(p) = memo.get(&mask) {
            return p.clone();
        }
        let row = rs[k - 1];
        let mut acc = Poly::zero(self.nvars);
        let cols: Vec<usize> = (0..64).filter(|c| mask & (1 << c) != 0).collect();
        for (pos, &c) in cols.iter().enumerate() {
            let e = self.get(row, c);
            if e.is_zero() {
                continue;
            }
            let sub = self.det_rows_mask(rs, mask & !(1 << c), memo);
            if sub.is_zero() {
                continue;
            }
            let term = e * &sub;
            // Column c sits at position `pos` among the k columns; the row is last.
            if (pos + k - 1).is_multiple_of(2) {
                acc = &acc + &term;
            } else {
                acc = &acc - &term;
            }
        }
        memo.insert(mask, acc.clone());
        acc
    }

    pub fn det(&self) -> Result<Poly, PencilError> {
        if self.rows != self.cols {
            return Err(PencilError::Shape("determinant of a non-square matrix".into()));
        }
        if self.rows == 0 {
            return Ok(Poly::one(self.nvars));
        }
        Ok(self.minors(self.rows)?.pop().expect("one full minor"))
    }

    /// `Σ det²` over all `x × x` minors: vanishes exactly where the rank drops below `x`.
    pub fn minor_sum_poly(&self, x: usize) -> Result<Poly, PencilError> {
        let mut acc = Poly::zero(self.nvars);
        for m in self.minors(x)? {
            acc = &acc + &(&m * &m);
        }
        Ok(acc)
    }
}

/// Row-rank of `B`.
pub fn row_rank(b: &PolyMatrix) -> usize {
    b.row_rank()
}

/// `Σ det²` of the `x × x` minors.
pub fn minor_sum_poly(b: &PolyMatrix, x: usize) -> Result<Poly, PencilError> {
    b.minor_sum_poly(x)
}

/// The pencil `Σ x_i B_i` in fresh indeterminates `x_1..x_l`.
pub fn pencil(mats: &[RatMatrix]) -> Result<PolyMatrix, PencilError> {
    let Some(first) = mats.first() else {
        return Err(PencilError::Shape("empty family".into()));
    };
    let (r, c) = (first.rows(), first.cols());
    if mats.iter().any(|m| m.rows() != r || m.cols() != c) {
        return Err(PencilError::Shape("family members differ in shape".into()));
    }
    let l = mats.len();
    let mut out = PolyMatrix::zeros(r, c, l);
    for i in 0..r {
        for j in 0..c {
            let mut p = Poly::zero(l);
            for (k, m) in mats.iter().enumerate() {
                let v = m.get(i, j);
                if !v.is_zero() {
                    p.add_term(Monomial::var(l, k), v.clone());
                }
            }
            out.set(i, j, p);
        }
    }
    Ok(out)
}

/// Rank of a family of matrices: Row-rank of its pencil.
pub fn family_rank(mats: &[RatMatrix]) -> Result<usize, PencilError> {
    Ok(pencil(mats)?.row_rank())
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        let Some(i) = (0..k).rev().find(|&i| cur[i] < n - k + i) else {
            return out;
        };
        cur[i] += 1;
        for j in i + 1..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{parse_poly, rat::r};

    fn pm(rows: &[&[&str]], nvars: usize) -> PolyMatrix {
        PolyMatrix::from_rows(
            rows.iter()
                .map(|row| row.iter().map(|s| parse_poly(s, nvars).unwrap()).collect())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn row_rank_is_not_determinant_rank() {
        let b = pm(&[&["x1", "x1"], &["x2", "x2"]], 2);
        assert_eq!(b.row_rank(), 2);
        assert!(b.det().unwrap().is_zero());
        assert!(b.minor_sum_poly(2).unwrap().is_zero());
    }

    #[test]
    fn proportional_rows_and_zero() {
        assert_eq!(pm(&[&["x1", "x2"], &["2*x1", "2*x2"]], 2).row_rank(), 1);
        assert_eq!(PolyMatrix::zeros(3, 2, 2).row_rank(), 0);
    }

    #[test]
    fn family_rank_examples() {
        let e = |v: &[&[i64]]| RatMatrix::from_i64(v);
        assert_eq!(
            family_rank(&[e(&[&[1, 0], &[0, 0]]), e(&[&[0, 0], &[0, 1]])]).unwrap(),
            2
        );
        assert_eq!(family_rank(&[RatMatrix::identity(2)]).unwrap(), 2);
        assert_eq!(
            family_rank(&[e(&[&[0, 1], &[1, 0]]), e(&[&[1, 0], &[0, -1]])]).unwrap(),
            2
        );
    }

    #[test]
    fn minor_sums() {
        let a = pm(&[&["x1"]], 1);
        assert_eq!(a.minor_sum_poly(1).unwrap().to_string(), "x1^2");
        let i2 = PolyMatrix::from_rat(&RatMatrix::identity(2), 1);
        assert_eq!(i2.minor_sum_poly(2).unwrap(), Poly::one(1));
        assert!(i2.minor_sum_poly(3).is_err());
    }

    #[test]
    fn determinant_matches_rational() {
        let m = RatMatrix::from_rows(vec![
            vec![r(2, 1), r(1, 3), r(0, 1), r(5, 1)],
            vec![r(-1, 1), r(4, 1), r(2, 7), r(1, 1)],
            vec![r(3, 2), r(0, 1), r(1, 1), r(-2, 1)],
            vec![r(1, 1), r(1, 1), r(1, 1), r(1, 1)],
        ]);
        let p = PolyMatrix::from_rat(&m, 1);
        assert_eq!(p.det().unwrap().constant_term(), m.det().unwrap());
    }

    #[test]
    fn combination_counts() {
        assert_eq!(combinations(5, 2).len(), 10);
        assert_eq!(combinations(3, 0), vec![Vec::<usize>::new()]);
        assert!(combinations(2, 3).is_empty());
    }
}
