use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use super::{Confidence, SemiAlgebraicSet};
use crate::algebra::Poly;
use crate::numeric::{
    child_rng, levenberg_marquardt, mix_seed, relative_residual, system_eval, uniform_point, FloatPoly, SplitPoly,
};

#[derive(Clone, Debug)]
pub struct DimConfig {
    /// Box `[-radius, radius]^dim`.
    pub radius: f64,
    /// Relative residual accepted as a point of the set.
    pub tol: f64,
    /// Points per axis of the interior patch.
    pub patch_side: usize,
    pub patch_h: f64,
    pub starts: usize,
    pub lm_iters: usize,
}

impl Default for DimConfig {
    fn default() -> Self {
        DimConfig {
            radius: 4.0,
            tol: 1e-8,
            patch_side: 3,
            patch_h: 1e-3,
            starts: 12,
            lm_iters: 80,
        }
    }
}

/// Dimension estimate of one fiber.
#[derive(Clone, Debug)]
pub struct FiberDim {
    /// `-1` for no point found.
    pub value: i64,
    /// Some higher patch passed partially; the estimate may be low.
    pub ambiguous: bool,
    /// Structural answer that needed no sampling.
    pub structural: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SliceDimResult {
    pub value: i64,
    pub confidence: Confidence,
    pub witness_eta: Option<Vec<f64>>,
}

const POS_MARGIN: f64 = 1e-9;

fn inside(x: &[f64], radius: f64) -> bool {
    x.iter().all(|v| v.abs() <= radius)
}

fn is_point(eqs: &[FloatPoly], pos: &[FloatPoly], x: &[f64], tol: f64) -> bool {
    eqs.iter().all(|f| relative_residual(f, x) < tol) && pos.iter().all(|g| g.eval(x) > 0.0)
}

/// Estimate `dim {x ∈ box : eqs = 0, pos > 0}`, only testing levels above `floor`.
///
/// The result is the largest `s` for which a full `patch_side^s` grid around
/// a found point lifts back to the set, or `floor` when nothing above it
/// was verified and some point exists.
pub fn fiber_dim(eqs: &[FloatPoly], pos: &[FloatPoly], dim: usize, floor: i64, cfg: &DimConfig, seed: u64) -> FiberDim {
    let mut live: Vec<FloatPoly> = Vec::new();
    for f in eqs {
        if f.is_zero() {
            continue;
        }
        if let Some(c) = f.constant_value() {
            if c != 0.0 {
                return FiberDim {
                    value: -1,
                    ambiguous: false,
                    structural: true,
                };
            }
            continue;
        }
        live.push(f.scaled(1.0 / f.abs_coeff_sum()));
    }
    let structural = live.is_empty() && pos.is_empty();
    if structural {
        return FiberDim {
            value: dim as i64,
            ambiguous: false,
            structural,
        };
    }

    let mut hits = Vec::new();
    for s in 0..cfg.starts {
        let mut rng = child_rng(seed, s as u64);
        let x0 = uniform_point(&mut rng, dim, 0.9 * cfg.radius);
        let out = levenberg_marquardt(&x0, cfg.radius, cfg.lm_iters, |x, r, j| {
            system_eval(&live, pos, POS_MARGIN, x, r, j)
        });
        if inside(&out.x, cfg.radius) && is_point(&live, pos, &out.x, cfg.tol) {
            hits.push(out.x);
        }
    }
    if hits.is_empty() {
        return FiberDim {
            value: floor.min(-1),
            ambiguous: false,
            structural: false,
        };
    }

    let mut best = floor.max(0);
    let mut ambiguous_at = -1;
    for hit in &hits {
        if best == dim as i64 {
            break;
        }
        let frame = tangent_frame(&live, hit);
        let top = frame.0;
        for s in ((best + 1)..=top as i64).rev() {
            let s = s as usize;
            match patch_test(&live, pos, hit, &frame.1, s, cfg, cfg.patch_h) {
                Patch::Full => {
                    best = s as i64;
                    break;
                }
                Patch::Partial => match patch_test(&live, pos, hit, &frame.1, s, cfg, cfg.patch_h / 10.0) {
                    Patch::Full => {
                        best = s as i64;
                        break;
                    }
                    _ => ambiguous_at = ambiguous_at.max(s as i64),
                },
                Patch::Fail => {}
            }
        }
    }
    FiberDim {
        value: best,
        ambiguous: ambiguous_at > best,
        structural: false,
    }
}

/// Upper estimate of the local dimension at `x` and an orthonormal basis
/// ordered from most tangent to most normal.
fn tangent_frame(eqs: &[FloatPoly], x: &[f64]) -> (usize, DMatrix<f64>) {
    let n = x.len();
    let mut jac = DMatrix::zeros(eqs.len(), n);
    let mut g = vec![0.0; n];
    for (i, f) in eqs.iter().enumerate() {
        f.eval_grad(x, &mut g);
        for j in 0..n {
            jac[(i, j)] = g[j];
        }
    }
    let gram = jac.transpose() * &jac;
    let eig = gram.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let top = eig.eigenvalues.iter().copied().fold(0.0, f64::max).sqrt();
    // Loose threshold: a missed normal direction only costs a failed patch.
    let small = order
        .iter()
        .filter(|&&i| eig.eigenvalues[i].max(0.0).sqrt() <= 1e-3 * top.max(1.0))
        .count();
    let basis = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (small, basis)
}

enum Patch {
    Full,
    Partial,
    Fail,
}

/// Move along the first `s` frame directions and re-solve along the rest.
fn patch_test(
    eqs: &[FloatPoly],
    pos: &[FloatPoly],
    hit: &[f64],
    frame: &DMatrix<f64>,
    s: usize,
    cfg: &DimConfig,
    h: f64,
) -> Patch {
    let n = hit.len();
    let side = cfg.patch_side.max(2);
    let total = side.pow(s as u32);
    let steps: Vec<f64> = (0..side).map(|i| -h + 2.0 * h * i as f64 / (side - 1) as f64).collect();
    let mut passed = 0;
    let mut failed = 0;
    let mut idx = vec![0usize; s];
    let mut full = vec![0.0; n];
    let mut fjac = DMatrix::zeros(0, 0);
    for _ in 0..total {
        let mut base = hit.to_vec();
        for (a, &k) in idx.iter().enumerate() {
            for r in 0..n {
                base[r] += steps[k] * frame[(r, a)];
            }
        }
        let normal = n - s;
        let out = levenberg_marquardt(&vec![0.0; normal], 2.0 * cfg.radius, cfg.lm_iters, |c, res, jac| {
            for r in 0..n {
                full[r] = base[r] + (0..normal).map(|l| c[l] * frame[(r, s + l)]).sum::<f64>();
            }
            system_eval(eqs, pos, POS_MARGIN, &full, res, &mut fjac);
            *jac = &fjac * frame.columns(s, normal);
        });
        let point: Vec<f64> = (0..n)
            .map(|r| base[r] + (0..normal).map(|l| out.x[l] * frame[(r, s + l)]).sum::<f64>())
            .collect();
        if inside(&point, cfg.radius) && is_point(eqs, pos, &point, cfg.tol) {
            passed += 1;
        } else {
            failed += 1;
            if failed * 2 > total {
                return Patch::Fail;
            }
        }
        for k in idx.iter_mut() {
            *k += 1;
            if *k < side {
                break;
            }
            *k = 0;
        }
    }
    if passed == total {
        Patch::Full
    } else {
        Patch::Partial
    }
}

/// Dimension estimate of a semi-algebraic set inside the box.
pub fn variety_dim_estimate(z: &SemiAlgebraicSet, cfg: &DimConfig, seed: u64) -> SliceDimResult {
    let mut value = -1;
    let mut confidence = Confidence::ClosedFormOracle;
    for (i, cell) in z.cells().iter().enumerate() {
        let eqs: Vec<FloatPoly> = cell.equalities.iter().map(FloatPoly::from_poly).collect();
        let pos: Vec<FloatPoly> = cell.positivities.iter().map(FloatPoly::from_poly).collect();
        let r = fiber_dim(&eqs, &pos, z.dim(), value, cfg, mix_seed(seed, i as u64));
        if r.value > value {
            value = r.value;
        }
        if !r.structural {
            confidence = confidence.min(Confidence::HighConfidence);
        }
        if r.ambiguous {
            confidence = Confidence::Inconclusive;
        }
    }
    SliceDimResult {
        value,
        confidence,
        witness_eta: None,
    }
}

/// Polynomial conditions in `(η, ξ)` whose ξ-fibers are measured.
#[derive(Clone, Debug)]
pub struct SliceProblem {
    pub eta_vars: usize,
    pub xi_vars: usize,
    pub equations: Vec<SplitPoly>,
    pub positivities: Vec<SplitPoly>,
}

impl SliceProblem {
    /// Variables `0..eta_vars` of every polynomial are η.
    pub fn new(equations: &[Poly], positivities: &[Poly], eta_vars: usize) -> Self {
        let nvars = equations
            .iter()
            .chain(positivities)
            .map(Poly::nvars)
            .next()
            .unwrap_or(eta_vars);
        SliceProblem {
            eta_vars,
            xi_vars: nvars - eta_vars,
            equations: equations.iter().map(|p| SplitPoly::new(p, eta_vars)).collect(),
            positivities: positivities.iter().map(|p| SplitPoly::new(p, eta_vars)).collect(),
        }
    }

    pub fn fiber(&self, eta: &[f64]) -> (Vec<FloatPoly>, Vec<FloatPoly>) {
        (
            self.equations.iter().map(|p| p.fix_eta(eta)).collect(),
            self.positivities.iter().map(|p| p.fix_eta(eta)).collect(),
        )
    }
}

#[derive(Clone, Debug)]
pub struct SliceConfig {
    pub dim: DimConfig,
    /// Number of η candidates.
    pub budget: usize,
    pub eta_radius: f64,
    /// Latin hypercube block size.
    pub lhs_block: usize,
}

impl Default for SliceConfig {
    fn default() -> Self {
        SliceConfig {
            dim: DimConfig::default(),
            budget: 64,
            eta_radius: 2.0,
            lhs_block: 16,
        }
    }
}

const SMALL: [f64; 7] = [0.0, 1.0, -1.0, 2.0, -2.0, 0.5, -0.5];

/// `sup_η dim {ξ : P(η, ξ) = 0}` over a deterministic candidate sequence:
/// `η = 0`, then in each group of four one Latin hypercube sample, two caller
/// hints and a sparse perturbation of the best η so far. Extending the
/// budget only appends candidates, so the value is monotone in it.
pub fn slice_sup_dim(problem: &SliceProblem, hints: &[Vec<f64>], cfg: &SliceConfig, seed: u64) -> SliceDimResult {
    let a = problem.eta_vars;
    let b = problem.xi_vars;
    let mut best = -1i64;
    let mut best_eta: Option<Vec<f64>> = None;
    let mut ambiguous = false;
    let mut all_structural = true;
    let mut next_hint = 0;
    let mut next_lhs = 0;
    let mut lhs_cache: Option<(usize, Vec<Vec<f64>>)> = None;
    for i in 0..cfg.budget.max(1) {
        let eta: Vec<f64> = if i == 0 || a == 0 {
            vec![0.0; a]
        } else if i % 4 == 3 {
            let mut rng = child_rng(seed, 2_000_000 + i as u64);
            let mut e = best_eta.clone().unwrap_or_else(|| vec![0.0; a]);
            let changes = rng.gen_range(1..=a.min(2));
            for _ in 0..changes {
                let c = rng.gen_range(0..a);
                e[c] = *SMALL.choose(&mut rng).unwrap();
            }
            e
        } else if (i % 4 == 1 || i % 4 == 2) && next_hint < hints.len() {
            next_hint += 1;
            hints[next_hint - 1].clone()
        } else {
            let j = next_lhs;
            next_lhs += 1;
            let block = j / cfg.lhs_block;
            if lhs_cache.as_ref().map(|c| c.0) != Some(block) {
                lhs_cache = Some((
                    block,
                    lhs_block(a, cfg.lhs_block, cfg.eta_radius, mix_seed(seed, block as u64)),
                ));
            }
            lhs_cache.as_ref().unwrap().1[j % cfg.lhs_block].clone()
        };
        let (eqs, pos) = problem.fiber(&eta);
        let r = fiber_dim(&eqs, &pos, b, best, &cfg.dim, mix_seed(seed, 1_000 + i as u64));
        all_structural &= r.structural;
        if r.value > best || best_eta.is_none() {
            if r.value > best {
                best = r.value;
            }
            best_eta = Some(eta);
        }
        ambiguous |= r.ambiguous;
        if best == b as i64 {
            break;
        }
        if a == 0 {
            break;
        }
    }
    let confidence = if ambiguous {
        Confidence::Inconclusive
    } else if all_structural && a == 0 {
        Confidence::ClosedFormOracle
    } else {
        Confidence::HighConfidence
    };
    SliceDimResult {
        value: best,
        confidence,
        witness_eta: if best >= 0 { best_eta } else { None },
    }
}

fn lhs_block(dim: usize, size: usize, radius: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = child_rng(seed, 0);
    let mut pts = vec![vec![0.0; dim]; size];
    for c in 0..dim {
        let mut perm: Vec<usize> = (0..size).collect();
        perm.shuffle(&mut rng);
        for (i, p) in pts.iter_mut().enumerate() {
            let u: f64 = rng.gen();
            p[c] = -radius + 2.0 * radius * (perm[i] as f64 + u) / size as f64;
        }
    }
    pts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::parse_poly;

    fn set(s: &str, n: usize) -> SemiAlgebraicSet {
        SemiAlgebraicSet::parse(s, n).unwrap()
    }

    #[test]
    fn circle_point_and_cone() {
        let cfg = DimConfig::default();
        assert_eq!(variety_dim_estimate(&set("x1^2 + x2^2 - 1 = 0", 2), &cfg, 1).value, 1);
        assert_eq!(variety_dim_estimate(&set("x1 = 0 && x2 = 0", 2), &cfg, 1).value, 0);
        let cone = DimConfig {
            radius: 1.0,
            ..cfg.clone()
        };
        let r = variety_dim_estimate(&set("x1^2 + x2^2 - x3^2 = 0", 3), &cone, 1);
        assert_eq!(r.value, 2);
        assert_eq!(r.confidence, Confidence::HighConfidence);
        assert_eq!(variety_dim_estimate(&set("x1^2 + x2^2 + 1 = 0", 2), &cfg, 1).value, -1);
    }

    #[test]
    fn double_roots_do_not_inflate() {
        // (x1 - x2)^2 = 0 is a line, with vanishing gradient everywhere on it.
        let cfg = DimConfig::default();
        assert_eq!(
            variety_dim_estimate(&set("x1^2 - 2*x1*x2 + x2^2 = 0", 2), &cfg, 4).value,
            1
        );
        assert_eq!(
            variety_dim_estimate(&set("x1^2 + x2^2 = 0 && x3 - 1 = 0", 3), &cfg, 4).value,
            0
        );
    }

    #[test]
    fn open_cells() {
        let cfg = DimConfig::default();
        assert_eq!(variety_dim_estimate(&set("x1 > 0", 2), &cfg, 2).value, 2);
        assert_eq!(variety_dim_estimate(&set("x1 - x2 = 0 && x1 > 0", 2), &cfg, 2).value, 1);
    }

    #[test]
    fn slice_examples() {
        let cfg = SliceConfig::default();
        let p = SliceProblem::new(&[parse_poly("x1*x2", 3).unwrap()], &[], 1);
        let r = slice_sup_dim(&p, &[], &cfg, 3);
        assert_eq!(r.value, 2);
        assert_eq!(r.witness_eta, Some(vec![0.0]));

        let p = SliceProblem::new(&[parse_poly("x2^2 + x3^2", 3).unwrap()], &[], 1);
        assert_eq!(slice_sup_dim(&p, &[], &cfg, 3).value, 0);

        let p = SliceProblem::new(&[parse_poly("x2^2 + x3^2 - x1", 3).unwrap()], &[], 1);
        let r = slice_sup_dim(&p, &[], &cfg, 3);
        assert_eq!(r.value, 1);
        assert!(r.witness_eta.unwrap()[0] >= 0.0);
    }
}
