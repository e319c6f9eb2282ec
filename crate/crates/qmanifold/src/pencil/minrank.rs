use std::collections::{BTreeMap, BTreeSet};

use nalgebra::DMatrix;
use num_traits::Zero;
use rand::Rng;
use serde::Serialize;

use super::{combinations, PolyMatrix};
use crate::algebra::{grid_points, rank_of_rows, rat, Monomial, Poly, Rational};
use crate::numeric::{child_rng, mix_seed, nelder_mead, rational_candidates, singular_values, FloatPoly};
use crate::semialg::{emptiness, Cell, EmptinessConfig, OracleStatus, SemiAlgebraicSet};

/// Polynomial matrix whose first `params` variables are parameters `(u, v)`
/// and whose remaining variables are the pencil indeterminates `x`.
#[derive(Clone, Debug)]
pub struct ParamPolyMatrix {
    params: usize,
    xvars: usize,
    rows: usize,
    cols: usize,
    /// `entries[i][j]`: x-monomial → coefficient polynomial in the parameters.
    entries: Vec<Vec<BTreeMap<Vec<u32>, Poly>>>,
    /// Row `i` of the stacked coefficient matrix, as polynomials in the parameters.
    stacked: Vec<Vec<Poly>>,
    stacked_f: Vec<Vec<FloatPoly>>,
}

impl ParamPolyMatrix {
    pub fn new(matrix: &PolyMatrix, params: usize) -> Self {
        let nvars = matrix.nvars();
        assert!(params <= nvars);
        let xvars = nvars - params;
        let (rows, cols) = (matrix.rows(), matrix.cols());
        let mut entries = vec![vec![BTreeMap::new(); cols]; rows];
        for (i, row) in entries.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                for (m, c) in matrix.get(i, j).terms() {
                    let e = m.exps();
                    let slot: &mut Poly = cell.entry(e[params..].to_vec()).or_insert_with(|| Poly::zero(params));
                    slot.add_term(Monomial(e[..params].to_vec()), c.clone());
                }
            }
        }
        let mut keys: Vec<BTreeSet<Vec<u32>>> = vec![BTreeSet::new(); cols];
        for row in &entries {
            for (j, cell) in row.iter().enumerate() {
                keys[j].extend(cell.keys().cloned());
            }
        }
        let stacked: Vec<Vec<Poly>> = entries
            .iter()
            .map(|row| {
                row.iter()
                    .zip(&keys)
                    .flat_map(|(cell, ks)| {
                        ks.iter()
                            .map(move |k| cell.get(k).cloned().unwrap_or_else(|| Poly::zero(params)))
                    })
                    .collect()
            })
            .collect();
        let stacked_f = stacked
            .iter()
            .map(|row| row.iter().map(FloatPoly::from_poly).collect())
            .collect();
        ParamPolyMatrix {
            params,
            xvars,
            rows,
            cols,
            entries,
            stacked,
            stacked_f,
        }
    }

    pub fn params(&self) -> usize {
        self.params
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn xvars(&self) -> usize {
        self.xvars
    }

    /// The matrix in `x` at fixed rational parameters.
    pub fn at(&self, p: &[Rational]) -> PolyMatrix {
        let mut out = PolyMatrix::zeros(self.rows, self.cols, self.xvars);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let mut q = Poly::zero(self.xvars);
                for (k, c) in &self.entries[i][j] {
                    q.add_term(Monomial(k.clone()), c.eval(p));
                }
                out.set(i, j, q);
            }
        }
        out
    }

    /// Exact Row-rank at fixed rational parameters.
    pub fn rank_at(&self, p: &[Rational]) -> usize {
        if self.rows == 0 {
            return 0;
        }
        rank_of_rows(
            self.stacked
                .iter()
                .map(|row| row.iter().map(|c| c.eval(p)).collect())
                .collect(),
        )
    }

    fn stacked_f64(&self, p: &[f64]) -> DMatrix<f64> {
        let k = self.stacked_f.first().map(Vec::len).unwrap_or(0);
        DMatrix::from_fn(self.rows, k, |i, j| self.stacked_f[i][j].eval(p))
    }

    /// `σ_{m+1} / σ_1` of the stacked coefficient matrix; 0 when it vanishes.
    fn drop_ratio(&self, p: &[f64], m: usize) -> f64 {
        let s = singular_values(&self.stacked_f64(p));
        match (s.first(), s.get(m)) {
            (Some(&top), Some(&v)) if top > 0.0 => v / top,
            _ => 0.0,
        }
    }

    /// `C_S(w) · R ≡ 0` over all row subsets `S` of size `m`, as a set in
    /// `(params, w)` with the identity tested on the grid `{1..D+1}^x`.
    pub fn rank_at_most_set(&self, m: usize) -> SemiAlgebraicSet {
        let comp = self.rows - m;
        let nv = self.params + comp * m;
        let deg = self
            .entries
            .iter()
            .flatten()
            .flat_map(|cell| cell.keys())
            .map(|k| k.iter().sum::<u32>())
            .max()
            .unwrap_or(0);
        let grid = grid_points(self.xvars, deg + 1);
        // R_ij at each grid point, as a polynomial in the parameters.
        let at_grid: Vec<Vec<Vec<Poly>>> = grid
            .iter()
            .map(|g| {
                (0..self.rows)
                    .map(|i| {
                        (0..self.cols)
                            .map(|j| {
                                let mut acc = Poly::zero(self.params);
                                for (k, c) in &self.entries[i][j] {
                                    let w = k.iter().zip(g).fold(Rational::from_integer(1.into()), |a, (&e, v)| {
                                        a * num_traits::pow(v.clone(), e as usize)
                                    });
                                    acc = &acc + &c.scale(&w);
                                }
                                acc.lift(nv, 0)
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let mut cells = Vec::new();
        for s in combinations(self.rows, m) {
            let t: Vec<usize> = (0..self.rows).filter(|i| !s.contains(i)).collect();
            let mut eqs: BTreeSet<String> = BTreeSet::new();
            let mut list = Vec::new();
            for (ti, &i) in t.iter().enumerate() {
                for rg in &at_grid {
                    for j in 0..self.cols {
                        let mut e = rg[i][j].clone();
                        for (si, &srow) in s.iter().enumerate() {
                            let w = Poly::var(nv, self.params + ti * m + si);
                            e = &e - &(&w * &rg[srow][j]);
                        }
                        if e.is_zero() {
                            continue;
                        }
                        let e = e.normalize().expect("nonzero");
                        if eqs.insert(e.to_string()) {
                            list.push(e);
                        }
                    }
                }
            }
            cells.push(Cell::new(list, Vec::new()));
        }
        SemiAlgebraicSet::new(nv, cells).expect("shared ambient space")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RankStatus {
    /// Witness exact and every lower check certified empty in its box.
    Exact,
    /// Witness exact; some lower check only heuristic.
    UpperBoundWitness,
    /// No exact witness at the value; lower checks heuristic.
    HeuristicLowerBound,
    Inconclusive,
}

impl RankStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RankStatus::Exact => "Exact",
            RankStatus::UpperBoundWitness => "UpperBoundWitness",
            RankStatus::HeuristicLowerBound => "HeuristicLowerBound",
            RankStatus::Inconclusive => "Inconclusive",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RankDecision {
    pub value: usize,
    pub status: RankStatus,
    /// Parameter assignment achieving `value`, as rational strings.
    pub witness: Option<Vec<String>>,
}

#[derive(Clone, Debug)]
pub struct RankConfig {
    pub starts: usize,
    pub nm_evals: usize,
    /// Exhaustive exact search over `{-g..g}^params` when small enough.
    pub grid_radius: i64,
    pub grid_budget: usize,
    pub emptiness: EmptinessConfig,
}

impl Default for RankConfig {
    fn default() -> Self {
        RankConfig {
            starts: 64,
            nm_evals: 600,
            grid_radius: 2,
            grid_budget: 3125,
            emptiness: EmptinessConfig::default(),
        }
    }
}

/// What one family contributes below a cap.
#[derive(Clone, Debug)]
pub struct FamilyOutcome {
    /// Smallest `m < cap` with `r ≤ m` shown, and how.
    pub found: Option<(usize, Found)>,
    /// Every lower check run was certified empty in its box.
    pub lower_certified: bool,
    pub lower_inconclusive: bool,
}

#[derive(Clone, Debug)]
pub enum Found {
    Exact(Vec<Rational>),
    Numeric(Vec<f64>),
}

const DROP_TOL: f64 = 1e-9;

/// Ascending loop `m = 0, 1, …` deciding `r ≤ m` for `m < cap`.
pub fn family_below(r: &ParamPolyMatrix, cap: usize, cfg: &RankConfig, seed: u64) -> FamilyOutcome {
    let mut out = FamilyOutcome {
        found: None,
        lower_certified: true,
        lower_inconclusive: false,
    };
    let grid = small_grid_minimum(r, cfg);
    for m in 0..cap {
        if m >= r.rows {
            out.found = Some((m, Found::Exact(vec![Rational::zero(); r.params])));
            return out;
        }
        if let Some((rank, p)) = &grid {
            if *rank <= m {
                out.found = Some((m, Found::Exact(p.clone())));
                return out;
            }
        }
        let sub_seed = mix_seed(seed, m as u64);
        let numeric = match witness_search(r, m, cfg, sub_seed) {
            Ok(p) => {
                out.found = Some((m, Found::Exact(p)));
                return out;
            }
            Err(n) => n,
        };
        let z = r.rank_at_most_set(m);
        let rep = emptiness(&z, &cfg.emptiness, sub_seed);
        match rep.status {
            OracleStatus::NonEmpty(_) => {
                let w = rep.witness.expect("nonempty carries a witness");
                let p = w[..r.params].to_vec();
                debug_assert!(r.rank_at(&p) <= m);
                out.found = Some((m, Found::Exact(p)));
                return out;
            }
            OracleStatus::EmptyHeuristic => out.lower_certified &= rep.certified_in_box,
            OracleStatus::Inconclusive => {
                out.lower_certified = false;
                out.lower_inconclusive = true;
            }
        }
        if let Some(x) = numeric {
            out.found = Some((m, Found::Numeric(x)));
            return out;
        }
    }
    out
}

/// `inf_{u,v} Row-rank R(u, v, x)` with an explicit status.
pub fn min_family_rank(r: &ParamPolyMatrix, cfg: &RankConfig, seed: u64) -> RankDecision {
    decide(std::slice::from_ref(r), cfg, seed)
}

/// Minimum over several families, each searched only below the best so far.
pub fn decide(families: &[ParamPolyMatrix], cfg: &RankConfig, seed: u64) -> RankDecision {
    let mut cap = families.iter().map(|f| f.rows + 1).max().unwrap_or(1);
    let mut best: Option<(usize, Found)> = None;
    let mut certified = true;
    let mut inconclusive = false;
    for (i, f) in families.iter().enumerate() {
        let o = family_below(f, cap, cfg, mix_seed(seed, i as u64));
        certified &= o.lower_certified;
        inconclusive |= o.lower_inconclusive;
        if let Some((m, how)) = o.found {
            cap = m;
            best = Some((m, how));
        }
        if cap == 0 {
            break;
        }
    }
    let Some((value, how)) = best else {
        return RankDecision {
            value: cap,
            status: RankStatus::Inconclusive,
            witness: None,
        };
    };
    let (status, witness) = match how {
        Found::Exact(p) => (
            if certified {
                RankStatus::Exact
            } else if inconclusive {
                RankStatus::Inconclusive
            } else {
                RankStatus::UpperBoundWitness
            },
            Some(p.iter().map(rat::format).collect()),
        ),
        Found::Numeric(x) => (
            RankStatus::HeuristicLowerBound,
            Some(x.iter().map(|v| format!("{v:e}")).collect()),
        ),
    };
    RankDecision { value, status, witness }
}

/// Minimum exact rank over the small integer grid, if the grid is small.
fn small_grid_minimum(r: &ParamPolyMatrix, cfg: &RankConfig) -> Option<(usize, Vec<Rational>)> {
    let side = (2 * cfg.grid_radius + 1) as usize;
    let total = (side as f64).powi(r.params as i32);
    if total > cfg.grid_budget as f64 {
        let p = vec![Rational::zero(); r.params];
        return Some((r.rank_at(&p), p));
    }
    let mut best: Option<(usize, Vec<Rational>)> = None;
    for idx in 0..total as usize {
        let mut k = idx;
        let p: Vec<Rational> = (0..r.params)
            .map(|_| {
                let v = (k % side) as i64 - cfg.grid_radius;
                k /= side;
                rat::int(v)
            })
            .collect();
        let rank = r.rank_at(&p);
        if best.as_ref().is_none_or(|b| rank < b.0) {
            best = Some((rank, p));
        }
    }
    best
}

/// Numeric search for `rank ≤ m`: minimise `σ_{m+1}/σ_1`, then round and
/// confirm exactly. `Err(Some(x))` reports an unconfirmed numeric drop.
fn witness_search(
    r: &ParamPolyMatrix,
    m: usize,
    cfg: &RankConfig,
    seed: u64,
) -> Result<Vec<Rational>, Option<Vec<f64>>> {
    let n = r.params;
    let confirm = |p: &[Rational]| r.rank_at(p) <= m;
    let mut numeric = None;
    if n == 0 {
        return Err(None);
    }
    for s in 0..cfg.starts {
        let mut rng = child_rng(seed, s as u64);
        let x0: Vec<f64> = (0..n)
            .map(|_| {
                if rng.gen_bool(0.3) {
                    0.0
                } else {
                    rng.gen_range(-2.0..2.0)
                }
            })
            .collect();
        let (x, v) = nelder_mead(&x0, 0.5, 8.0, cfg.nm_evals * (n + 1), |p| r.drop_ratio(p, m));
        if v >= DROP_TOL {
            continue;
        }
        if let Some(p) = round_witness(r, m, &x, cfg, &confirm) {
            return Ok(p);
        }
        numeric.get_or_insert(x);
    }
    Err(numeric)
}

fn round_witness<F>(r: &ParamPolyMatrix, m: usize, x: &[f64], cfg: &RankConfig, confirm: &F) -> Option<Vec<Rational>>
where
    F: Fn(&[Rational]) -> bool,
{
    // Cap 10^6 first, expanded once to 10^12.
    for cap in [1u64, 2, 4, 12, 60, 1_000, 1_000_000, 1_000_000_000_000] {
        let q: Vec<Rational> = x.iter().map(|&v| rat::approximate(v, cap)).collect();
        if confirm(&q) {
            return Some(q);
        }
    }
    let n = x.len();
    let mut cur = x.to_vec();
    let mut fixed: Vec<Option<Rational>> = vec![None; n];
    for i in 0..n {
        let mut ok = false;
        for q in rational_candidates(cur[i], &[1, 2, 3, 4, 6, 12, 60]) {
            let mut trial = cur.clone();
            trial[i] = rat::to_f64(&q);
            let free: Vec<usize> = (0..n).filter(|&j| j != i && fixed[j].is_none()).collect();
            let y0: Vec<f64> = free.iter().map(|&j| trial[j]).collect();
            let (y, v) = nelder_mead(&y0, 0.05, 8.0, cfg.nm_evals * (free.len() + 1), |y| {
                let mut full = trial.clone();
                for (k, &j) in free.iter().enumerate() {
                    full[j] = y[k];
                }
                r.drop_ratio(&full, m)
            });
            if v < DROP_TOL {
                for (k, &j) in free.iter().enumerate() {
                    trial[j] = y[k];
                }
                cur = trial;
                fixed[i] = Some(q);
                ok = true;
                break;
            }
        }
        if !ok {
            return None;
        }
    }
    let q: Vec<Rational> = fixed.into_iter().map(|v| v.expect("all fixed")).collect();
    confirm(&q).then_some(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::parse_poly;

    fn pm(rows: &[&[&str]], nvars: usize) -> PolyMatrix {
        PolyMatrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|s| parse_poly(s, nvars).unwrap()).collect())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn constant_identity_pencil() {
        let r = ParamPolyMatrix::new(&pm(&[&["x1", "0"], &["0", "x1"]], 1), 0);
        let d = min_family_rank(&r, &RankConfig::default(), 1);
        assert_eq!(d.value, 2);
        assert_eq!(d.status, RankStatus::Exact);
    }

    #[test]
    fn vanishing_at_zero() {
        // u * x in one parameter u.
        let r = ParamPolyMatrix::new(&pm(&[&["x1*x2", "x2"]], 2), 1);
        let d = min_family_rank(&r, &RankConfig::default(), 1);
        assert_eq!(d.value, 1);
        let r = ParamPolyMatrix::new(&pm(&[&["x1*x2", "x1^2*x2"]], 2), 1);
        let d = min_family_rank(&r, &RankConfig::default(), 1);
        assert_eq!(d.value, 0);
        assert_eq!(d.witness, Some(vec!["0".to_string()]));
        assert_eq!(d.status, RankStatus::Exact);
    }

    #[test]
    fn drop_off_the_integer_grid_is_rounded() {
        // Rank drops only at u = 7/3.
        let r = ParamPolyMatrix::new(&pm(&[&["x2", "0"], &["0", "3*x1*x2 - 7*x2"]], 2), 1);
        let d = min_family_rank(&r, &RankConfig::default(), 5);
        assert_eq!(d.value, 1);
        assert_eq!(d.witness, Some(vec!["7/3".to_string()]));
    }

    #[test]
    fn lower_check_set_for_constant_rank_two() {
        let r = ParamPolyMatrix::new(&pm(&[&["x1", "0"], &["0", "x1"]], 1), 0);
        let z = r.rank_at_most_set(1);
        assert_eq!(z.cells().len(), 2);
        let rep = emptiness(&z, &EmptinessConfig::default(), 1);
        assert!(rep.is_empty());
        assert!(rep.certified_in_box);
    }
}
