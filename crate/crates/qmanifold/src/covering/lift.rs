//! One recursion level: `Z = {P1 = 0, P2 = 0}` is reached by covering
//! `{P1 = 0}` with graphs `ψ_B`, then covering the sampled projection of
//! `Z ∩ B`, the zero set of `g_B(y) = P2(y, ψ_B(y))`, inside each base cube
//! and lifting through `ψ_B`.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::cover::Level;
use super::ladder::scale_ladder;
use super::{check_supported, norm, CoveringConfig, CoveringError, LevelPoly};
use crate::algebra::Poly;
use crate::numeric::{child_rng, mix_seed};

#[derive(Clone, Debug, Serialize)]
pub struct LiftReport {
    pub first: String,
    pub second: String,
    pub d: usize,
    pub k: f64,
    pub ap: f64,
    pub seed: u64,
    pub k_top: f64,
    pub width: f64,
    pub zero_set_samples: usize,
    pub boxes_used: usize,
    pub lifted_graphs: usize,
    pub samples: usize,
    pub covered: usize,
    pub fraction: f64,
}

/// Sub-graph `u ↦ y_l = φ(u)` of `{g_B = 0}` inside the base cube of box `top`.
#[derive(Clone, Debug)]
struct LiftedGraph {
    top: usize,
    /// Base axis solved for, in full coordinates.
    axis: usize,
    center: Vec<f64>,
    half: f64,
    tall_half: f64,
}

/// Gauss-Newton onto `{P1 = 0, P2 = 0}`.
fn project_pair(a: &LevelPoly, b: &LevelPoly, x: &[f64]) -> Option<Vec<f64>> {
    let mut y = x.to_vec();
    for _ in 0..60 {
        let f = [a.value(&y), b.value(&y)];
        if f[0].abs().max(f[1].abs()) < 1e-13 {
            return Some(y);
        }
        let ga = a.gradient(&y);
        let gb = b.gradient(&y);
        let dot = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(s, t)| s * t).sum::<f64>();
        let (m00, m01, m11) = (dot(&ga, &ga), dot(&ga, &gb), dot(&gb, &gb));
        let det = m00 * m11 - m01 * m01;
        if det.abs() < 1e-18 {
            return None;
        }
        let l0 = (m11 * f[0] - m01 * f[1]) / det;
        let l1 = (m00 * f[1] - m01 * f[0]) / det;
        for i in 0..y.len() {
            y[i] -= l0 * ga[i] + l1 * gb[i];
        }
    }
    None
}

fn sample_zero_set(a: &LevelPoly, b: &LevelPoly, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let d = a.d();
    let found: Vec<Option<Vec<f64>>> = (0..(n as u64) * 8)
        .into_par_iter()
        .map(|i| {
            let mut rng = child_rng(seed, i);
            let x: Vec<f64> = (0..d).map(|_| rng.gen::<f64>()).collect();
            project_pair(a, b, &x).filter(|y| y.iter().all(|t| (0.0..=1.0).contains(t)))
        })
        .collect();
    found.into_iter().flatten().take(n).collect()
}

/// `g_B` at base point `y` (pivot entry ignored) and the lifted point.
fn g_on_graph(level: &Level, top: usize, second: &LevelPoly, y: &[f64]) -> Option<(f64, Vec<f64>)> {
    let g = &level.graphs[top];
    let t = g.psi(&level.q, y)?;
    let mut x = y.to_vec();
    x[g.pivot] = t;
    Some((second.value(&x), x))
}

/// Root of `g_B` along base axis `axis` within `center ± tall_half`, by
/// sign changes on a fine grid and bisection; `None` unless exactly one.
fn lifted_root(
    level: &Level,
    top: usize,
    second: &LevelPoly,
    x: &[f64],
    axis: usize,
    center: f64,
    tall_half: f64,
) -> Option<Vec<f64>> {
    const STEPS: usize = 32;
    let eval = |t: f64| {
        let mut y = x.to_vec();
        y[axis] = t;
        g_on_graph(level, top, second, &y)
    };
    let ts: Vec<f64> = (0..=STEPS)
        .map(|i| center - tall_half + 2.0 * tall_half * i as f64 / STEPS as f64)
        .collect();
    let vals: Vec<f64> = ts.iter().map(|&t| eval(t).map(|v| v.0)).collect::<Option<_>>()?;
    let brackets: Vec<usize> = (0..STEPS)
        .filter(|&i| vals[i] == 0.0 || vals[i] * vals[i + 1] < 0.0)
        .collect();
    let &[i] = brackets.as_slice() else {
        return None;
    };
    let (mut lo, mut hi, mut flo) = (ts[i], ts[i + 1], vals[i]);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        let fm = eval(mid)?.0;
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    eval(0.5 * (lo + hi)).map(|v| v.1)
}

/// Covers a neighborhood of `{P1 = 0, P2 = 0} ∩ [0,1]^d` (`d` = 2 or 3) at
/// the finest ladder scale of `P1`, checking `samples` points within `1/K`
/// of sampled points of the zero set.
pub fn cover_intersection(
    p1: &Poly,
    p2: &Poly,
    k: f64,
    ap: f64,
    samples: usize,
    seed: u64,
    cfg: &CoveringConfig,
) -> Result<LiftReport, CoveringError> {
    let (d, degree) = check_supported(p1)?;
    check_supported(p2)?;
    if d < 2 || p2.nvars() != d {
        return Err(CoveringError::Unsupported { d, degree });
    }
    let a = LevelPoly::new(&p1.normalize()?);
    let b = LevelPoly::new(&p2.normalize()?);
    let ladder = scale_ladder(k, degree, ap)?;
    let kj = ladder.level(degree);

    let zs = sample_zero_set(&a, &b, 4 * samples.max(500), mix_seed(seed, 11));
    if zs.is_empty() {
        return Err(CoveringError::EmptySublevel { proposals: 0 });
    }
    let level = super::cover::build_level(a.clone(), vec![0; d], degree, kj, ap, degree, cfg);

    // Boxes holding sampled points of Z, and a thinned net of those points per box.
    let sep = cfg.net_fraction * level.rho;
    let mut lifted: Vec<LiftedGraph> = Vec::new();
    let mut used = vec![false; level.graphs.len()];
    let mut taken: Vec<Vec<f64>> = Vec::new();
    for z in &zs {
        if taken
            .iter()
            .any(|t| norm(&t.iter().zip(z).map(|(u, v)| u - v).collect::<Vec<_>>()) < sep)
        {
            continue;
        }
        for top in level.containing(z) {
            let g = &level.graphs[top];
            // ∇g_B in base coordinates by the chain rule through ψ_B.
            let ga = a.gradient(z);
            let gb = b.gradient(z);
            let axis = (0..d)
                .filter(|&i| i != g.pivot)
                .max_by(|&i, &j| {
                    let gi = gb[i] - gb[g.pivot] * ga[i] / ga[g.pivot];
                    let gj = gb[j] - gb[g.pivot] * ga[j] / ga[g.pivot];
                    gi.abs().total_cmp(&gj.abs())
                })
                .expect("d ≥ 2");
            used[top] = true;
            lifted.push(LiftedGraph {
                top,
                axis,
                center: z.clone(),
                half: 0.25 * g.rho,
                tall_half: 0.5 * g.rho,
            });
        }
        taken.push(z.clone());
    }

    let width = kj.powf(-ap);
    let mut rng = child_rng(mix_seed(seed, 12), 0);
    let points: Vec<Vec<f64>> = (0..samples)
        .map(|_| {
            let z = &zs[rng.gen_range(0..zs.len())];
            let dir: Vec<f64> = (0..d).map(|_| rng.gen::<f64>() - 0.5).collect();
            let r = rng.gen::<f64>() / k / norm(&dir).max(1e-12);
            z.iter().zip(&dir).map(|(u, v)| u + r * v).collect()
        })
        .collect();
    let covered = points
        .par_iter()
        .filter(|x| {
            lifted.iter().any(|lg| {
                let g = &level.graphs[lg.top];
                if !g.contains(x) {
                    return false;
                }
                let inside = (0..d).filter(|&i| i != g.pivot).all(|i| {
                    let half = if i == lg.axis { lg.tall_half } else { lg.half };
                    (x[i] - lg.center[i]).abs() <= half
                });
                inside
                    && lifted_root(&level, lg.top, &b, x, lg.axis, lg.center[lg.axis], lg.tall_half)
                        .is_some_and(|q| norm(&q.iter().zip(x.iter()).map(|(u, v)| u - v).collect::<Vec<_>>()) <= width)
            })
        })
        .count();

    Ok(LiftReport {
        first: a.poly.to_string(),
        second: b.poly.to_string(),
        d,
        k,
        ap,
        seed,
        k_top: kj,
        width,
        zero_set_samples: zs.len(),
        boxes_used: used.iter().filter(|&&u| u).count(),
        lifted_graphs: lifted.len(),
        samples,
        covered,
        fraction: covered as f64 / samples.max(1) as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::parse_poly;

    #[test]
    fn ellipse_on_cylinder() {
        let p1 = parse_poly("x1^2 + x2^2 - 1/4", 3).unwrap();
        let p2 = parse_poly("x3 - x1", 3).unwrap();
        let r = cover_intersection(&p1, &p2, 1000.0, 2.0, 400, 4, &CoveringConfig::default()).unwrap();
        assert!(r.lifted_graphs > 0);
        assert!(r.fraction >= 0.99, "{r:?}");
    }
}
