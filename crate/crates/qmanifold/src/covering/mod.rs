//! Demonstration-scale covering of polynomial sublevel sets by neighborhoods
//! of regular graphs, for `d ≤ 3` and degree `≤ 4`.

mod cover;
mod graph;
mod ladder;
mod lift;
mod render;
mod univariate;

use thiserror::Error;

use crate::algebra::{AlgebraError, Poly};
use crate::numeric::FloatPoly;

pub use cover::{cover_sublevel, sample_sublevel, CoverageStats, Covering, CoveringReport, LevelReport, Sublevel};
pub use graph::{extract_graph, GraphAudit, RegularGraph};
pub use ladder::{chains, derivative_pivot_search, scale_ladder, ChainLink, PivotChain, ScaleLadder};
pub use lift::{cover_intersection, LiftReport};
pub use univariate::{line_coefficients, real_roots};

pub const MAX_DIM: usize = 3;
pub const MAX_DEGREE: usize = 4;

#[derive(Debug, Error)]
pub enum CoveringError {
    #[error("covering supports d ≤ {MAX_DIM} and degree ≤ {MAX_DEGREE}, got d={d}, degree={degree}")]
    Unsupported { d: usize, degree: usize },
    #[error("polynomial is constant")]
    Constant,
    #[error("K={k} too small for D={degree}, A'={ap}: need K^((A'+1)^-D) ≥ 2")]
    ScaleTooSmall { k: f64, degree: usize, ap: f64 },
    #[error("pivot condition fails at {point:?}: |∂_pivot Q|={pivot_deriv}, |∇Q|={grad_norm}")]
    Pivot {
        point: Vec<f64>,
        pivot_deriv: f64,
        grad_norm: f64,
    },
    #[error("no unique root on the pivot interval after {halvings} halvings at {point:?}")]
    Continuation { point: Vec<f64>, halvings: u32 },
    #[error("no sublevel points among {proposals} proposals")]
    EmptySublevel { proposals: u64 },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

#[derive(Clone, Debug)]
pub struct CoveringConfig {
    /// Base side of a box at level `j` is `(c_base · K_j)⁻¹`; `None` means `2d`.
    pub c_base: Option<f64>,
    /// Regularity constant; boxes are `d · c_regular` times taller than wide.
    pub c_regular: f64,
    /// Derivative order audited.
    pub lambda: u32,
    /// Net spacing as a fraction of the base side.
    pub net_fraction: f64,
    pub max_halvings: u32,
    /// Base grid side for the uniqueness check.
    pub uniqueness_side: usize,
    /// Base grid side for the derivative audit.
    pub audit_side: usize,
    /// Sample size for choosing the derivative chain.
    pub chain_samples: usize,
    pub max_proposals: u64,
}

impl Default for CoveringConfig {
    fn default() -> Self {
        CoveringConfig {
            c_base: None,
            c_regular: 8.0,
            lambda: 2,
            net_fraction: 0.1,
            max_halvings: 6,
            uniqueness_side: 5,
            audit_side: 3,
            chain_samples: 2000,
            max_proposals: 1 << 31,
        }
    }
}

impl CoveringConfig {
    pub fn c_base_for(&self, d: usize) -> f64 {
        self.c_base.unwrap_or(2.0 * d as f64)
    }
}

/// A polynomial with its first and second partials compiled for evaluation.
#[derive(Clone, Debug)]
pub struct LevelPoly {
    pub poly: Poly,
    pub f: FloatPoly,
    pub grad: Vec<FloatPoly>,
    pub hess: Vec<Vec<FloatPoly>>,
}

impl LevelPoly {
    pub fn new(poly: &Poly) -> Self {
        let d = poly.nvars();
        let dp: Vec<Poly> = (0..d).map(|i| poly.derivative(i)).collect();
        LevelPoly {
            poly: poly.clone(),
            f: FloatPoly::from_poly(poly),
            grad: dp.iter().map(FloatPoly::from_poly).collect(),
            hess: dp
                .iter()
                .map(|g| (0..d).map(|j| FloatPoly::from_poly(&g.derivative(j))).collect())
                .collect(),
        }
    }

    pub fn d(&self) -> usize {
        self.poly.nvars()
    }

    pub fn degree(&self) -> usize {
        self.poly.degree().max(0) as usize
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.f.eval(x)
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.grad.iter().map(|g| g.eval(x)).collect()
    }

    pub fn hessian(&self, x: &[f64]) -> Vec<Vec<f64>> {
        self.hess
            .iter()
            .map(|row| row.iter().map(|h| h.eval(x)).collect())
            .collect()
    }

    /// Newton steps along the gradient onto `{Q = 0}`.
    pub fn project(&self, x: &[f64], iters: usize) -> Option<Vec<f64>> {
        let mut y = x.to_vec();
        for _ in 0..iters {
            let v = self.value(&y);
            let g = self.gradient(&y);
            let g2: f64 = g.iter().map(|t| t * t).sum();
            if v.abs() <= 1e-14 * (1.0 + g2.sqrt()) {
                return Some(y);
            }
            if g2 < 1e-300 {
                return None;
            }
            for (yi, gi) in y.iter_mut().zip(&g) {
                *yi -= v * gi / g2;
            }
        }
        (self.value(&y).abs() <= 1e-10).then_some(y)
    }
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|t| t * t).sum::<f64>().sqrt()
}

pub(crate) fn check_supported(p: &Poly) -> Result<(usize, usize), CoveringError> {
    let d = p.nvars();
    let degree = p.degree().max(0) as usize;
    if d == 0 || d > MAX_DIM || degree > MAX_DEGREE {
        return Err(CoveringError::Unsupported { d, degree });
    }
    if degree == 0 {
        return Err(CoveringError::Constant);
    }
    Ok((d, degree))
}
