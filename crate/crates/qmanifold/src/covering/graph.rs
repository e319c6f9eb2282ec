use serde::Serialize;

use super::univariate::{line_coefficients, real_roots};
use super::{norm, CoveringConfig, CoveringError, LevelPoly};

/// Worst values of the derivative bounds over the audit points of one graph.
#[derive(Clone, Debug, Serialize)]
pub struct GraphAudit {
    pub points: usize,
    /// `max |∇ψ|`, bound `2d`.
    pub max_grad: f64,
    pub grad_bound: f64,
    /// `min |∂_pivot Q|` on the graph, bound `1/(2√d K_j)`.
    pub min_pivot_deriv: f64,
    pub pivot_bound: f64,
    /// `max |∂_l ψ|`.
    pub max_first: f64,
    /// `max |∂_l ∂_m ψ|`.
    pub max_second: f64,
    /// `1000^{d+D²} K_j`.
    pub hessian_bound: f64,
    /// Constructed bounds `C K_j^{|α|−1}` for `|α| = 1, 2`.
    pub strong_bounds: [f64; 2],
    /// Definition bounds `C ρ^{−|α|}` for `|α| = 1, 2`.
    pub weak_bounds: [f64; 2],
}

impl GraphAudit {
    pub fn grad_ok(&self) -> bool {
        self.max_grad <= self.grad_bound
    }

    pub fn pivot_ok(&self) -> bool {
        self.min_pivot_deriv >= self.pivot_bound
    }

    pub fn hessian_ok(&self) -> bool {
        self.max_second <= self.hessian_bound
    }

    pub fn strong_ok(&self) -> bool {
        self.max_first <= self.strong_bounds[0] && self.max_second <= self.strong_bounds[1]
    }

    pub fn weak_ok(&self) -> bool {
        self.max_first <= self.weak_bounds[0] && self.max_second <= self.weak_bounds[1]
    }

    pub fn passes(&self) -> bool {
        self.grad_ok() && self.pivot_ok() && self.hessian_ok() && self.strong_ok()
    }

    /// `(name, bound, measured, margin)`; margin is positive when the bound holds.
    pub fn rows(&self) -> Vec<(&'static str, f64, f64, f64)> {
        vec![
            (
                "grad_psi",
                self.grad_bound,
                self.max_grad,
                self.grad_bound - self.max_grad,
            ),
            (
                "pivot_deriv",
                self.pivot_bound,
                self.min_pivot_deriv,
                self.min_pivot_deriv - self.pivot_bound,
            ),
            (
                "hessian_psi",
                self.hessian_bound,
                self.max_second,
                self.hessian_bound - self.max_second,
            ),
            (
                "strong_first",
                self.strong_bounds[0],
                self.max_first,
                self.strong_bounds[0] - self.max_first,
            ),
            (
                "strong_second",
                self.strong_bounds[1],
                self.max_second,
                self.strong_bounds[1] - self.max_second,
            ),
            (
                "weak_first",
                self.weak_bounds[0],
                self.max_first,
                self.weak_bounds[0] - self.max_first,
            ),
            (
                "weak_second",
                self.weak_bounds[1],
                self.max_second,
                self.weak_bounds[1] - self.max_second,
            ),
        ]
    }
}

/// Graph of `ψ` over a `(d−1)`-cube of side `ρ`, sitting in a box that is
/// `d · C` times taller along the pivot axis.
#[derive(Clone, Debug, Serialize)]
pub struct RegularGraph {
    pub level: usize,
    /// Graph dimension, `d − 1`.
    pub k: usize,
    pub pivot: usize,
    pub center: Vec<f64>,
    pub rho: f64,
    pub tall_half: f64,
    pub c_regular: f64,
    pub lambda: u32,
    /// Base constant after halvings, `c_base · 2^halvings`.
    pub effective_c: f64,
    pub halvings: u32,
    pub audit: GraphAudit,
}

impl RegularGraph {
    /// Base coordinates followed by the pivot.
    pub fn permutation(&self) -> Vec<usize> {
        let d = self.center.len();
        (0..d).filter(|&i| i != self.pivot).chain([self.pivot]).collect()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let h = 0.5 * self.rho;
        x.iter().zip(&self.center).enumerate().all(|(i, (a, c))| {
            let half = if i == self.pivot { self.tall_half } else { h };
            (a - c).abs() <= half
        })
    }

    /// `ψ` at the base coordinates of `x`; the pivot entry of `x` is ignored.
    pub fn psi(&self, q: &LevelPoly, x: &[f64]) -> Option<f64> {
        unique_root(q, x, self.pivot, self.center[self.pivot], self.tall_half)
    }

    /// `|x_pivot − ψ(base x)|`, an upper bound for the distance to the graph.
    pub fn vertical_distance(&self, q: &LevelPoly, x: &[f64]) -> Option<f64> {
        self.psi(q, x).map(|t| (x[self.pivot] - t).abs())
    }

    /// Box corners in the plane for `d = 2`: `(x0, y0, width, height)`.
    pub fn rect(&self) -> Option<(f64, f64, f64, f64)> {
        if self.center.len() != 2 {
            return None;
        }
        let half = |i: usize| {
            if i == self.pivot {
                self.tall_half
            } else {
                0.5 * self.rho
            }
        };
        Some((
            self.center[0] - half(0),
            self.center[1] - half(1),
            2.0 * half(0),
            2.0 * half(1),
        ))
    }
}

fn roots_on_line(q: &LevelPoly, x: &[f64], pivot: usize, center: f64, half: f64) -> Option<Vec<f64>> {
    let c = line_coefficients(&q.f, x, pivot, center, half);
    real_roots(&c, -1.0, 1.0).map(|r| r.into_iter().map(|s| center + half * s).collect())
}

fn unique_root(q: &LevelPoly, x: &[f64], pivot: usize, center: f64, half: f64) -> Option<f64> {
    match roots_on_line(q, x, pivot, center, half)?.as_slice() {
        [t] => Some(*t),
        _ => None,
    }
}

/// Grid of `side^k` offsets in `[−1/2, 1/2]^k`, corners included.
pub(crate) fn unit_grid(k: usize, side: usize) -> Vec<Vec<f64>> {
    let side = side.max(2);
    let ticks: Vec<f64> = (0..side).map(|i| i as f64 / (side - 1) as f64 - 0.5).collect();
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|v| {
                ticks.iter().map(move |&t| {
                    let mut w = v.clone();
                    w.push(t);
                    w
                })
            })
            .collect();
    }
    out
}

fn point_at(center: &[f64], pivot: usize, offset: &[f64], rho: f64) -> Vec<f64> {
    let mut x = center.to_vec();
    let mut o = offset.iter();
    for (i, xi) in x.iter_mut().enumerate() {
        if i != pivot {
            *xi += rho * o.next().expect("offset has d − 1 entries");
        }
    }
    x
}

/// Implicit-function graph of `{Q = 0}` near `x*` over the base cube of side
/// `(c_base K_j)⁻¹`, shrunk by halving until every audited base point has a
/// single root on the pivot interval.
#[allow(clippy::too_many_arguments)]
pub fn extract_graph(
    q: &LevelPoly,
    x_star: &[f64],
    kj: f64,
    pivot: usize,
    level: usize,
    degree: usize,
    cfg: &CoveringConfig,
) -> Result<RegularGraph, CoveringError> {
    let d = q.d();
    let sd = (d as f64).sqrt();
    let g = q.gradient(x_star);
    let gn = norm(&g);
    if g[pivot].abs() < gn / sd * (1.0 - 1e-9) || gn < (1.0 - 1e-9) / kj {
        return Err(CoveringError::Pivot {
            point: x_star.to_vec(),
            pivot_deriv: g[pivot].abs(),
            grad_norm: gn,
        });
    }
    let c_base = cfg.c_base_for(d);
    let rho0 = 1.0 / (c_base * kj);
    let base_tall = 0.5 * d as f64 * cfg.c_regular * rho0;
    let mut center = x_star.to_vec();
    if q.value(&center).abs() > 1e-12 {
        let roots = roots_on_line(q, &center, pivot, center[pivot], base_tall).unwrap_or_default();
        let t = roots
            .into_iter()
            .min_by(|a, b| (a - x_star[pivot]).abs().total_cmp(&(b - x_star[pivot]).abs()))
            .ok_or_else(|| CoveringError::Continuation {
                point: x_star.to_vec(),
                halvings: 0,
            })?;
        center[pivot] = t;
    }
    let uniq = unit_grid(d - 1, cfg.uniqueness_side);
    for h in 0..=cfg.max_halvings {
        let rho = rho0 / 2f64.powi(h as i32);
        let tall_half = 0.5 * d as f64 * cfg.c_regular * rho;
        let unique = uniq.iter().all(|o| {
            let x = point_at(&center, pivot, o, rho);
            unique_root(q, &x, pivot, center[pivot], tall_half).is_some()
        });
        if !unique {
            continue;
        }
        let audit = audit_graph(q, &center, pivot, rho, tall_half, kj, degree, cfg);
        return Ok(RegularGraph {
            level,
            k: d - 1,
            pivot,
            center,
            rho,
            tall_half,
            c_regular: cfg.c_regular,
            lambda: cfg.lambda,
            effective_c: c_base * 2f64.powi(h as i32),
            halvings: h,
            audit,
        });
    }
    Err(CoveringError::Continuation {
        point: x_star.to_vec(),
        halvings: cfg.max_halvings,
    })
}

#[allow(clippy::too_many_arguments)]
fn audit_graph(
    q: &LevelPoly,
    center: &[f64],
    pivot: usize,
    rho: f64,
    tall_half: f64,
    kj: f64,
    degree: usize,
    cfg: &CoveringConfig,
) -> GraphAudit {
    let d = q.d();
    let df = d as f64;
    let c = cfg.c_regular;
    let mut audit = GraphAudit {
        points: 0,
        max_grad: 0.0,
        grad_bound: 2.0 * df,
        min_pivot_deriv: f64::INFINITY,
        pivot_bound: 1.0 / (2.0 * df.sqrt() * kj),
        max_first: 0.0,
        max_second: 0.0,
        hessian_bound: 1000f64.powi((d + degree * degree) as i32) * kj,
        strong_bounds: [c, c * kj],
        weak_bounds: [c / rho, c / (rho * rho)],
    };
    let base: Vec<usize> = (0..d).filter(|&i| i != pivot).collect();
    for o in unit_grid(d - 1, cfg.audit_side) {
        let mut x = point_at(center, pivot, &o, rho);
        let Some(t) = unique_root(q, &x, pivot, center[pivot], tall_half) else {
            // A base point without a single root fails every bound.
            audit.min_pivot_deriv = 0.0;
            audit.max_grad = f64::INFINITY;
            continue;
        };
        x[pivot] = t;
        audit.points += 1;
        let g = q.gradient(&x);
        let hq = q.hessian(&x);
        let qp = g[pivot];
        audit.min_pivot_deriv = audit.min_pivot_deriv.min(qp.abs());
        let dpsi: Vec<f64> = base.iter().map(|&l| -g[l] / qp).collect();
        audit.max_grad = audit.max_grad.max(norm(&dpsi));
        audit.max_first = dpsi.iter().fold(audit.max_first, |m, v| m.max(v.abs()));
        for (a, &l) in base.iter().enumerate() {
            for (b, &m) in base.iter().enumerate() {
                let num =
                    hq[l][m] + hq[l][pivot] * dpsi[b] + hq[m][pivot] * dpsi[a] + hq[pivot][pivot] * dpsi[a] * dpsi[b];
                audit.max_second = audit.max_second.max((num / qp).abs());
            }
        }
    }
    audit
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::parse_poly;

    #[test]
    fn circle_graph_matches_closed_form() {
        let q = LevelPoly::new(&parse_poly("x1^2 + x2^2 - 1/4", 2).unwrap());
        let cfg = CoveringConfig::default();
        let g = extract_graph(&q, &[0.0, 0.5], 64.0, 1, 1, 2, &cfg).unwrap();
        assert_eq!(g.halvings, 0);
        assert!((g.rho - 1.0 / 256.0).abs() < 1e-15);
        assert!(g.audit.passes());
        // Dense uniqueness along the base and agreement with √(1/4 − x²).
        for i in 0..=100 {
            let x = -0.5 * g.rho + g.rho * i as f64 / 100.0;
            let psi = g.psi(&q, &[x, 0.0]).unwrap();
            assert!((psi - (0.25 - x * x).sqrt()).abs() < 1e-12);
        }
        assert!(g.audit.max_grad <= 4.0);
        assert_eq!(g.permutation(), vec![0, 1]);
        assert!(extract_graph(&q, &[0.0, 0.5], 64.0, 0, 1, 2, &cfg).is_err());
    }

    #[test]
    fn linear_graph_is_exact() {
        let q = LevelPoly::new(&parse_poly("x3 - 1/2*x1 - 1/4*x2 - 1/8", 3).unwrap());
        let g = extract_graph(&q, &[0.2, 0.4, 0.325], 4.0, 2, 1, 1, &CoveringConfig::default()).unwrap();
        assert!(g.audit.passes());
        assert!(g.audit.max_second.abs() < 1e-12);
        assert!((g.audit.max_grad - (0.25f64 + 0.0625).sqrt()).abs() < 1e-12);
        let psi = g.psi(&q, &[0.21, 0.39, 0.0]).unwrap();
        assert!((psi - (0.105 + 0.0975 + 0.125)).abs() < 1e-12);
    }

    #[test]
    fn second_root_forces_halving() {
        // Two parallel lines x2 = 0.5 ± 0.05: the tall interval first sees both.
        let q = LevelPoly::new(&parse_poly("(x2 - 11/20) * (x2 - 9/20)", 2).unwrap());
        let cfg = CoveringConfig {
            c_base: Some(1.0),
            ..CoveringConfig::default()
        };
        let g = extract_graph(&q, &[0.3, 0.55], 10.0, 1, 1, 2, &cfg).unwrap();
        assert!(g.halvings > 0);
        assert!(g.tall_half < 0.1);
        assert_eq!(g.effective_c, 2f64.powi(g.halvings as i32));
    }
}
