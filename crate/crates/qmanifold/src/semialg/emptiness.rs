use nalgebra::DMatrix;
use num_traits::Zero;
use rand::Rng;
use serde::Serialize;

use super::interval::{reject_box, Interval};
use super::{Cell, SemiAlgebraicSet};
use crate::algebra::{rat, Rational};
use crate::numeric::{child_rng, levenberg_marquardt, rational_candidates, system_eval, uniform_point, FloatPoly};

/// Result of the emptiness oracle.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum OracleStatus {
    /// Exactly verified rational point.
    NonEmpty(Vec<String>),
    /// No point found by grid, penalty or interval search.
    EmptyHeuristic,
    /// The numerics came close to a point that could not be verified.
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct EmptinessReport {
    pub status: OracleStatus,
    #[serde(skip)]
    pub witness: Option<Vec<Rational>>,
    /// Interval subdivision rejected the whole search box.
    pub certified_in_box: bool,
    pub best_penalty: f64,
    pub boxes: usize,
}

impl EmptinessReport {
    pub fn is_empty(&self) -> bool {
        self.status == OracleStatus::EmptyHeuristic
    }
}

#[derive(Clone, Debug)]
pub struct EmptinessConfig {
    /// Search box `[-radius, radius]^dim`.
    pub radius: f64,
    /// Rational grid spacing is `1 / grid_den`.
    pub grid_den: u32,
    pub grid_budget: usize,
    pub starts: usize,
    pub lm_iters: usize,
    /// Required slack for strict positivities in the penalty.
    pub margin: f64,
    pub interval_boxes: usize,
    pub min_width: f64,
    /// Residual under which an unverified numeric point counts as a near miss.
    pub near_tol: f64,
}

impl Default for EmptinessConfig {
    fn default() -> Self {
        EmptinessConfig {
            radius: 4.0,
            grid_den: 2,
            grid_budget: 4096,
            starts: 32,
            lm_iters: 120,
            margin: 1e-3,
            interval_boxes: 20_000,
            min_width: 1e-4,
            near_tol: 1e-9,
        }
    }
}

/// Decide, heuristically and with explicit status, whether `z` has a point.
pub fn emptiness(z: &SemiAlgebraicSet, cfg: &EmptinessConfig, seed: u64) -> EmptinessReport {
    let mut certified = true;
    let mut near = false;
    let mut best = f64::INFINITY;
    let mut boxes = 0;
    for (ci, cell) in z.cells().iter().enumerate() {
        let r = cell_emptiness(cell, z.dim(), cfg, crate::numeric::mix_seed(seed, ci as u64));
        if let Some(w) = r.witness {
            return EmptinessReport {
                status: OracleStatus::NonEmpty(w.iter().map(rat::format).collect()),
                witness: Some(w),
                certified_in_box: false,
                best_penalty: 0.0,
                boxes: boxes + r.boxes,
            };
        }
        certified &= r.covered;
        near |= r.near && !r.covered;
        best = best.min(r.best);
        boxes += r.boxes;
    }
    EmptinessReport {
        status: if near {
            OracleStatus::Inconclusive
        } else {
            OracleStatus::EmptyHeuristic
        },
        witness: None,
        certified_in_box: certified,
        best_penalty: if best.is_finite() { best } else { 0.0 },
        boxes,
    }
}

struct CellOutcome {
    witness: Option<Vec<Rational>>,
    covered: bool,
    near: bool,
    best: f64,
    boxes: usize,
}

fn cell_emptiness(cell: &Cell, dim: usize, cfg: &EmptinessConfig, seed: u64) -> CellOutcome {
    let eqs: Vec<FloatPoly> = cell
        .equalities
        .iter()
        .filter_map(|p| p.normalize().ok())
        .map(|p| FloatPoly::from_poly(&p))
        .collect();
    let pos: Vec<FloatPoly> = cell.positivities.iter().map(FloatPoly::from_poly).collect();
    let done = |w| CellOutcome {
        witness: Some(w),
        covered: false,
        near: false,
        best: 0.0,
        boxes: 0,
    };

    if let Some(w) = grid_search(cell, dim, &eqs, cfg, seed) {
        return done(w);
    }

    let mut best = f64::INFINITY;
    let mut near = false;
    for s in 0..cfg.starts {
        let mut rng = child_rng(seed, 1 + s as u64);
        let x0 = uniform_point(&mut rng, dim, cfg.radius);
        let out = levenberg_marquardt(&x0, cfg.radius, cfg.lm_iters, |x, r, j| {
            system_eval(&eqs, &pos, cfg.margin, x, r, j)
        });
        best = best.min(out.cost);
        if out.cost > 1e-16 {
            continue;
        }
        if let Some(w) = snap_to_rational(&out.x, cfg.radius, cfg.lm_iters, &eqs, &pos, cfg.margin, |q| {
            cell.contains(q)
        }) {
            return done(w);
        }
        let residual_ok = eqs
            .iter()
            .all(|f| crate::numeric::relative_residual(f, &out.x) < cfg.near_tol);
        let strict_ok = pos.iter().all(|g| g.eval(&out.x) > 0.0);
        near |= residual_ok && strict_ok;
    }

    let root = vec![Interval::new(-cfg.radius, cfg.radius); dim];
    let sub = if dim == 0 {
        // A point set: empty iff some equation is a nonzero constant or some positivity fails.
        let empty = !cell.contains(&[]);
        super::interval::Subdivision {
            covered: empty,
            boxes: 1,
        }
    } else {
        reject_box(&eqs, &pos, &root, cfg.interval_boxes, cfg.min_width)
    };
    CellOutcome {
        witness: None,
        covered: sub.covered,
        near,
        best,
        boxes: sub.boxes,
    }
}

fn grid_search(cell: &Cell, dim: usize, eqs: &[FloatPoly], cfg: &EmptinessConfig, seed: u64) -> Option<Vec<Rational>> {
    let den = cfg.grid_den.max(1) as i64;
    let side = (2.0 * cfg.radius * den as f64).floor() as i64 + 1;
    let lo = -((cfg.radius * den as f64).floor() as i64);
    let total = (side as f64).powi(dim as i32);
    let check = |idx: &[i64]| -> Option<Vec<Rational>> {
        let xf: Vec<f64> = idx.iter().map(|&k| k as f64 / den as f64).collect();
        if eqs.iter().any(|f| crate::numeric::relative_residual(f, &xf) > 1e-9) {
            return None;
        }
        let q: Vec<Rational> = idx.iter().map(|&k| rat::r(k, den)).collect();
        cell.contains(&q).then_some(q)
    };
    if total <= cfg.grid_budget as f64 {
        let mut idx = vec![lo; dim];
        loop {
            if let Some(q) = check(&idx) {
                return Some(q);
            }
            let mut k = 0;
            loop {
                if k == dim {
                    return None;
                }
                if idx[k] < lo + side - 1 {
                    idx[k] += 1;
                    break;
                }
                idx[k] = lo;
                k += 1;
            }
        }
    }
    let mut rng = child_rng(seed, 0);
    // Sparse small points first, then uniform grid samples.
    for t in 0..cfg.grid_budget {
        let idx: Vec<i64> = if t % 2 == 0 {
            (0..dim)
                .map(|_| {
                    if rng.gen_bool(0.5) {
                        0
                    } else {
                        rng.gen_range(-2 * den..=2 * den)
                    }
                })
                .collect()
        } else {
            (0..dim).map(|_| rng.gen_range(lo..lo + side)).collect()
        };
        if let Some(q) = check(&idx) {
            return Some(q);
        }
    }
    None
}

/// Turn a numeric solution into an exactly verified rational one by fixing
/// coordinates one at a time to simple rationals and re-solving the rest.
pub fn snap_to_rational<F>(
    x: &[f64],
    radius: f64,
    lm_iters: usize,
    eqs: &[FloatPoly],
    pos: &[FloatPoly],
    margin: f64,
    check: F,
) -> Option<Vec<Rational>>
where
    F: Fn(&[Rational]) -> bool,
{
    const CAPS: [u64; 8] = [1, 2, 3, 4, 6, 12, 60, 1000];
    for cap in [1u64, 2, 4, 12, 1_000, 1_000_000] {
        let q: Vec<Rational> = x.iter().map(|&v| rat::approximate(v, cap)).collect();
        if check(&q) {
            return Some(q);
        }
    }
    let n = x.len();
    let mut cur = x.to_vec();
    let mut fixed: Vec<Option<Rational>> = vec![None; n];
    for i in 0..n {
        let mut accepted = false;
        for q in rational_candidates(cur[i], &CAPS) {
            let mut trial = cur.clone();
            trial[i] = rat::to_f64(&q);
            let free: Vec<usize> = (0..n).filter(|&j| j != i && fixed[j].is_none()).collect();
            let out = solve_free(&trial, &free, radius, lm_iters, eqs, pos, margin);
            if out.1 < 1e-22 {
                cur = out.0;
                fixed[i] = Some(q);
                accepted = true;
                break;
            }
        }
        if !accepted {
            return None;
        }
    }
    let q: Vec<Rational> = fixed.into_iter().map(|v| v.unwrap_or_else(Rational::zero)).collect();
    check(&q).then_some(q)
}

fn solve_free(
    x: &[f64],
    free: &[usize],
    radius: f64,
    lm_iters: usize,
    eqs: &[FloatPoly],
    pos: &[FloatPoly],
    margin: f64,
) -> (Vec<f64>, f64) {
    let base = x.to_vec();
    let y0: Vec<f64> = free.iter().map(|&j| x[j]).collect();
    let mut full = base.clone();
    let mut fjac = DMatrix::zeros(0, 0);
    let out = levenberg_marquardt(&y0, radius, lm_iters, |y, r, jac| {
        for (k, &j) in free.iter().enumerate() {
            full[j] = y[k];
        }
        system_eval(eqs, pos, margin, &full, r, &mut fjac);
        *jac = DMatrix::from_fn(fjac.nrows(), free.len(), |a, b| fjac[(a, free[b])]);
    });
    let mut res = base;
    for (k, &j) in free.iter().enumerate() {
        res[j] = out.x[k];
    }
    (res, out.cost)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(s: &str, n: usize) -> SemiAlgebraicSet {
        SemiAlgebraicSet::parse(s, n).unwrap()
    }

    #[test]
    fn sum_of_squares_plus_one_is_empty_and_certified() {
        let r = emptiness(&set("x1^2 + x2^2 + 1 = 0", 2), &EmptinessConfig::default(), 1);
        assert_eq!(r.status, OracleStatus::EmptyHeuristic);
        assert!(r.certified_in_box);
    }

    #[test]
    fn circle_has_point() {
        let r = emptiness(&set("x1^2 + x2^2 - 1 = 0", 2), &EmptinessConfig::default(), 1);
        let w = r.witness.expect("witness");
        assert!(set("x1^2 + x2^2 - 1 = 0", 2).contains(&w));
        assert!(matches!(r.status, OracleStatus::NonEmpty(_)));
    }

    #[test]
    fn strictness_contradiction_is_empty() {
        let r = emptiness(&set("x1^2 = 0 && x1 > 0", 1), &EmptinessConfig::default(), 3);
        assert_eq!(r.status, OracleStatus::EmptyHeuristic);
        assert!(!r.certified_in_box);
    }

    #[test]
    fn irrational_only_points_are_found_by_snapping_or_flagged() {
        // x² = 2 has no rational point; the near miss must not be reported as empty.
        let r = emptiness(&set("x1^2 - 2 = 0", 1), &EmptinessConfig::default(), 5);
        assert_eq!(r.status, OracleStatus::Inconclusive);
        // x² + y² = 2 has rational points such as (1, 1).
        let r = emptiness(
            &set("x1^2 + x2^2 - 2 = 0 && x1 - x2 > 0", 2),
            &EmptinessConfig::default(),
            5,
        );
        assert!(matches!(r.status, OracleStatus::NonEmpty(_)));
    }

    #[test]
    fn union_is_nonempty_if_a_part_is() {
        let r = emptiness(&set("x1^2 + 1 = 0 || x1 - 1/3 = 0", 1), &EmptinessConfig::default(), 2);
        assert!(matches!(r.status, OracleStatus::NonEmpty(_)));
    }
}
