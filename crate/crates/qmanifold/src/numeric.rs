//! Floating-point helpers shared by the numeric oracles.

use nalgebra::{DMatrix, DVector};
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{rat, Poly, Rational};

/// Deterministic child generator for restart `index` under `seed`.
pub fn child_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Mix two words into a new seed.
pub fn mix_seed(a: u64, b: u64) -> u64 {
    let mut z = a ^ b.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn uniform_point(rng: &mut impl Rng, dim: usize, radius: f64) -> Vec<f64> {
    (0..dim).map(|_| rng.gen_range(-radius..=radius)).collect()
}

/// Polynomial compiled for fast f64 evaluation.
#[derive(Clone, Debug)]
pub struct FloatPoly {
    nvars: usize,
    maxdeg: usize,
    coeffs: Vec<f64>,
    exps: Vec<Vec<(usize, u32)>>,
    /// Σ|c| for residual scaling.
    abs_sum: f64,
}

impl FloatPoly {
    pub fn from_poly(p: &Poly) -> Self {
        let mut coeffs = Vec::with_capacity(p.num_terms());
        let mut exps = Vec::with_capacity(p.num_terms());
        let mut maxdeg = 0;
        for (m, c) in p.terms() {
            coeffs.push(rat::to_f64(c));
            let e: Vec<(usize, u32)> = m
                .exps()
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, &e)| (i, e))
                .collect();
            maxdeg = maxdeg.max(m.exps().iter().copied().max().unwrap_or(0) as usize);
            exps.push(e);
        }
        let abs_sum = coeffs.iter().map(|c: &f64| c.abs()).sum();
        FloatPoly {
            nvars: p.nvars(),
            maxdeg,
            coeffs,
            exps,
            abs_sum,
        }
    }

    pub fn from_parts(nvars: usize, terms: Vec<(f64, Vec<(usize, u32)>)>) -> Self {
        let maxdeg = terms
            .iter()
            .flat_map(|(_, e)| e.iter().map(|&(_, k)| k as usize))
            .max()
            .unwrap_or(0);
        let abs_sum = terms.iter().map(|(c, _)| c.abs()).sum();
        let (coeffs, exps) = terms.into_iter().unzip();
        FloatPoly {
            nvars,
            maxdeg,
            coeffs,
            exps,
            abs_sum,
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == 0.0)
    }

    /// Nonzero constant with no variable dependence.
    pub fn constant_value(&self) -> Option<f64> {
        if self.exps.iter().all(Vec::is_empty) {
            Some(self.coeffs.iter().sum())
        } else {
            None
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (f64, &[(usize, u32)])> {
        self.coeffs.iter().copied().zip(self.exps.iter().map(Vec::as_slice))
    }

    pub fn abs_coeff_sum(&self) -> f64 {
        self.abs_sum
    }

    pub fn scaled(&self, c: f64) -> FloatPoly {
        FloatPoly {
            coeffs: self.coeffs.iter().map(|v| v * c).collect(),
            abs_sum: self.abs_sum * c.abs(),
            ..self.clone()
        }
    }

    fn powers(&self, x: &[f64]) -> Vec<Vec<f64>> {
        x.iter()
            .map(|&v| {
                let mut p = Vec::with_capacity(self.maxdeg + 1);
                let mut acc = 1.0;
                for _ in 0..=self.maxdeg {
                    p.push(acc);
                    acc *= v;
                }
                p
            })
            .collect()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let pw = self.powers(x);
        self.coeffs
            .iter()
            .zip(&self.exps)
            .map(|(c, e)| e.iter().fold(*c, |acc, &(i, k)| acc * pw[i][k as usize]))
            .sum()
    }

    /// Value and `Σ|c_α x^α|`, the natural magnitude scale at `x`.
    pub fn eval_with_scale(&self, x: &[f64]) -> (f64, f64) {
        let pw = self.powers(x);
        let mut v = 0.0;
        let mut s = 0.0;
        for (c, e) in self.coeffs.iter().zip(&self.exps) {
            let t = e.iter().fold(*c, |acc, &(i, k)| acc * pw[i][k as usize]);
            v += t;
            s += t.abs();
        }
        (v, s)
    }

    /// Value and gradient.
    pub fn eval_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let pw = self.powers(x);
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut v = 0.0;
        for (c, e) in self.coeffs.iter().zip(&self.exps) {
            let t = e.iter().fold(*c, |acc, &(i, k)| acc * pw[i][k as usize]);
            v += t;
            for (pos, &(i, k)) in e.iter().enumerate() {
                let mut g = *c * k as f64 * pw[i][k as usize - 1];
                for (q, &(j, kj)) in e.iter().enumerate() {
                    if q != pos {
                        g *= pw[j][kj as usize];
                    }
                }
                grad[i] += g;
            }
        }
        v
    }
}

/// Relative residual `|f| / max(1, Σ|c_α x^α|)`.
pub fn relative_residual(f: &FloatPoly, x: &[f64]) -> f64 {
    let (v, s) = f.eval_with_scale(x);
    v.abs() / s.max(1.0)
}

/// Polynomial in `(η, ξ)` split so that fixing `η` is cheap.
///
/// Each ξ-monomial carries a small polynomial in η.
#[derive(Clone, Debug)]
pub struct SplitPoly {
    eta_vars: usize,
    xi_vars: usize,
    groups: Vec<(Vec<(usize, u32)>, FloatPoly)>,
}

type EtaTerm = (f64, Vec<(usize, u32)>);

impl SplitPoly {
    /// Variables `0..eta_vars` are η, the rest ξ.
    pub fn new(p: &Poly, eta_vars: usize) -> Self {
        let xi_vars = p.nvars() - eta_vars;
        // ξ exponents to (coefficient, sparse η exponents) pairs.
        let mut groups: std::collections::BTreeMap<Vec<u32>, Vec<EtaTerm>> = Default::default();
        for (m, c) in p.terms() {
            let e = m.exps();
            let key = e[eta_vars..].to_vec();
            let eta_part: Vec<(usize, u32)> = e[..eta_vars]
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(i, &k)| (i, k))
                .collect();
            groups.entry(key).or_default().push((rat::to_f64(c), eta_part));
        }
        let groups = groups
            .into_iter()
            .map(|(key, terms)| {
                let xe: Vec<(usize, u32)> = key
                    .iter()
                    .enumerate()
                    .filter(|(_, &k)| k > 0)
                    .map(|(i, &k)| (i, k))
                    .collect();
                (xe, FloatPoly::from_parts(eta_vars, terms))
            })
            .collect();
        SplitPoly {
            eta_vars,
            xi_vars,
            groups,
        }
    }

    pub fn eta_vars(&self) -> usize {
        self.eta_vars
    }

    pub fn xi_vars(&self) -> usize {
        self.xi_vars
    }

    /// The ξ-polynomial obtained by fixing η.
    pub fn fix_eta(&self, eta: &[f64]) -> FloatPoly {
        let terms = self
            .groups
            .iter()
            .filter_map(|(xe, cp)| {
                let c = cp.eval(eta);
                (c != 0.0).then(|| (c, xe.clone()))
            })
            .collect();
        FloatPoly::from_parts(self.xi_vars, terms)
    }
}

#[derive(Clone, Debug)]
pub struct LmOutcome {
    pub x: Vec<f64>,
    /// ½‖r‖² at `x`.
    pub cost: f64,
}

/// Damped Gauss–Newton for `min ½‖r(x)‖²`, with `x` clamped to `[-bound, bound]^n`.
///
/// `eval` fills the residual vector and the Jacobian (rows = residuals).
pub fn levenberg_marquardt<F>(x0: &[f64], bound: f64, max_iter: usize, mut eval: F) -> LmOutcome
where
    F: FnMut(&[f64], &mut Vec<f64>, &mut DMatrix<f64>),
{
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut r = Vec::new();
    let mut jac = DMatrix::zeros(0, n);
    eval(&x, &mut r, &mut jac);
    let mut cost = 0.5 * r.iter().map(|v| v * v).sum::<f64>();
    if n == 0 {
        return LmOutcome { x, cost };
    }
    let mut lambda = 1e-3;
    let mut r_try = Vec::new();
    let mut jac_try = DMatrix::zeros(0, n);
    for _ in 0..max_iter {
        if cost < 1e-30 {
            break;
        }
        let rv = DVector::from_column_slice(&r);
        let jt = jac.transpose();
        let g = &jt * &rv;
        let jtj = &jt * &jac;
        let mut improved = false;
        let mu = (0..n).map(|i| jtj[(i, i)]).fold(0.0, f64::max).max(1e-300);
        for _ in 0..12 {
            let mut a = jtj.clone();
            for i in 0..n {
                a[(i, i)] += lambda * mu;
            }
            let Some(step) = a.cholesky().map(|c| c.solve(&(-&g))) else {
                lambda *= 10.0;
                continue;
            };
            let cand: Vec<f64> = x
                .iter()
                .zip(step.iter())
                .map(|(xi, s)| (xi + s).clamp(-bound, bound))
                .collect();
            eval(&cand, &mut r_try, &mut jac_try);
            let c_try = 0.5 * r_try.iter().map(|v| v * v).sum::<f64>();
            if c_try.is_finite() && c_try < cost {
                let rel = (cost - c_try) / cost.max(1e-300);
                x = cand;
                std::mem::swap(&mut r, &mut r_try);
                std::mem::swap(&mut jac, &mut jac_try);
                cost = c_try;
                lambda = (lambda * 0.3).max(1e-12);
                improved = true;
                if rel < 1e-14 {
                    return LmOutcome { x, cost };
                }
                break;
            }
            lambda *= 8.0;
        }
        if !improved {
            break;
        }
    }
    LmOutcome { x, cost }
}

/// Residuals and Jacobian of a polynomial system, with optional hinge
/// terms `max(0, margin − g)` for strict positivities.
pub fn system_eval(
    eqs: &[FloatPoly],
    pos: &[FloatPoly],
    margin: f64,
    x: &[f64],
    r: &mut Vec<f64>,
    jac: &mut DMatrix<f64>,
) {
    let n = x.len();
    let rows = eqs.len() + pos.len();
    r.clear();
    if jac.nrows() != rows || jac.ncols() != n {
        *jac = DMatrix::zeros(rows, n);
    }
    let mut grad = vec![0.0; n];
    for (i, f) in eqs.iter().enumerate() {
        r.push(f.eval_grad(x, &mut grad));
        for j in 0..n {
            jac[(i, j)] = grad[j];
        }
    }
    for (k, g) in pos.iter().enumerate() {
        let row = eqs.len() + k;
        let v = g.eval_grad(x, &mut grad);
        if v < margin {
            r.push(margin - v);
            for j in 0..n {
                jac[(row, j)] = -grad[j];
            }
        } else {
            r.push(0.0);
            for j in 0..n {
                jac[(row, j)] = 0.0;
            }
        }
    }
}

/// Nelder–Mead minimisation inside `[-bound, bound]^n`.
pub fn nelder_mead<F>(x0: &[f64], step: f64, bound: f64, max_evals: usize, mut f: F) -> (Vec<f64>, f64)
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    let clamp = |v: Vec<f64>| v.into_iter().map(|t| t.clamp(-bound, bound)).collect::<Vec<_>>();
    if n == 0 {
        let v = f(x0);
        return (x0.to_vec(), v);
    }
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let p0 = clamp(x0.to_vec());
    let v0 = f(&p0);
    simplex.push((p0.clone(), v0));
    for i in 0..n {
        let mut p = p0.clone();
        p[i] += if p[i] + step > bound { -step } else { step };
        let p = clamp(p);
        let v = f(&p);
        simplex.push((p, v));
    }
    let mut evals = n + 1;
    while evals < max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        let worst = simplex[n].1;
        if (worst - best).abs() <= 1e-15 * (best.abs() + 1e-300) || best <= 0.0 {
            break;
        }
        let mut centroid = vec![0.0; n];
        for (p, _) in &simplex[..n] {
            for j in 0..n {
                centroid[j] += p[j] / n as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            clamp(
                (0..n)
                    .map(|j| centroid[j] + t * (simplex[n].0[j] - centroid[j]))
                    .collect(),
            )
        };
        let xr = along(-1.0);
        let fr = f(&xr);
        evals += 1;
        if fr < simplex[0].1 {
            let xe = along(-2.0);
            let fe = f(&xe);
            evals += 1;
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let xc = if fr < simplex[n].1 { along(-0.5) } else { along(0.5) };
            let fc = f(&xc);
            evals += 1;
            if fc < simplex[n].1.min(fr) {
                simplex[n] = (xc, fc);
            } else {
                let b = simplex[0].0.clone();
                for item in simplex.iter_mut().skip(1) {
                    let p = clamp((0..n).map(|j| b[j] + 0.5 * (item.0[j] - b[j])).collect());
                    let v = f(&p);
                    *item = (p, v);
                }
                evals += n;
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (p, v) = simplex.swap_remove(0);
    (p, v)
}

/// Denominator caps tried when rounding a float to a rational, smallest first.
pub const ROUNDING_CAPS: [u64; 8] = [1, 2, 4, 6, 12, 60, 1_000, 1_000_000];

/// Candidate rationals near `x`, simplest first, deduplicated.
pub fn rational_candidates(x: f64, caps: &[u64]) -> Vec<Rational> {
    let mut out: Vec<Rational> = Vec::new();
    for &cap in caps {
        let q = rat::approximate(x, cap);
        if !out.contains(&q) {
            out.push(q);
        }
    }
    out
}

pub fn to_f64_vec(v: &[Rational]) -> Vec<f64> {
    v.iter().map(rat::to_f64).collect()
}

/// Singular values of a dense real matrix, descending.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Numerical rank with relative threshold.
pub fn numeric_rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    let s = singular_values(m);
    let top = s.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return 0;
    }
    s.iter().filter(|&&v| v > rel_tol * top).count()
}

pub fn is_all_zero(v: &[Rational]) -> bool {
    v.iter().all(Zero::is_zero)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::parse_poly;

    #[test]
    fn float_poly_gradient_matches_finite_difference() {
        let p = parse_poly("x1^3*x2 - 2*x2^2 + x1 - 5", 2).unwrap();
        let f = FloatPoly::from_poly(&p);
        let x = [0.7, -1.3];
        let mut g = [0.0; 2];
        let v = f.eval_grad(&x, &mut g);
        assert!((v - p.eval_f64(&x)).abs() < 1e-12);
        let h = 1e-6;
        for i in 0..2 {
            let mut xp = x;
            xp[i] += h;
            let fd = (f.eval(&xp) - v) / h;
            assert!((fd - g[i]).abs() < 1e-4);
        }
    }

    #[test]
    fn split_poly_fixes_eta() {
        let p = parse_poly("x1*x2^2 + 3*x1^2 - x3", 3).unwrap();
        let s = SplitPoly::new(&p, 1);
        let q = s.fix_eta(&[2.0]);
        assert!((q.eval(&[1.0, 4.0]) - (2.0 + 12.0 - 4.0)).abs() < 1e-12);
    }

    #[test]
    fn lm_finds_circle_point() {
        let f = FloatPoly::from_poly(&parse_poly("x1^2 + x2^2 - 1", 2).unwrap());
        let out = levenberg_marquardt(&[0.3, 0.2], 4.0, 100, |x, r, j| {
            system_eval(std::slice::from_ref(&f), &[], 0.0, x, r, j)
        });
        assert!(out.cost < 1e-20);
    }

    #[test]
    fn nelder_mead_quadratic() {
        let (x, v) = nelder_mead(&[1.0, 1.0], 0.5, 10.0, 2000, |p| {
            (p[0] - 0.25).powi(2) + (p[1] + 0.5).powi(2)
        });
        assert!(v < 1e-12 && (x[0] - 0.25).abs() < 1e-5);
    }
}
