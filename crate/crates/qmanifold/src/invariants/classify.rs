use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::InvariantError;
use crate::algebra::{rat, Poly, QuadForm, QuadTuple, RatMatrix, Rational};
use crate::pencil::{combinations, PolyMatrix};

/// Diagonal codimension-two family `(Σ a_i ξ_i², Σ b_i ξ_i²)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GoodManifoldSpec {
    pub a: Vec<Rational>,
    pub b: Vec<Rational>,
}

impl GoodManifoldSpec {
    pub fn new(a: Vec<Rational>, b: Vec<Rational>) -> Result<Self, InvariantError> {
        if a.len() != b.len() || a.is_empty() {
            return Err(InvariantError::Range(format!(
                "a has {} entries, b has {}",
                a.len(),
                b.len()
            )));
        }
        Ok(GoodManifoldSpec { a, b })
    }

    pub fn from_i64(a: &[i64], b: &[i64]) -> Result<Self, InvariantError> {
        GoodManifoldSpec::new(
            a.iter().map(|&v| rat::int(v)).collect(),
            b.iter().map(|&v| rat::int(v)).collect(),
        )
    }

    pub fn d(&self) -> usize {
        self.a.len()
    }

    pub fn tuple(&self) -> QuadTuple {
        QuadTuple::diagonal(&[self.a.clone(), self.b.clone()]).expect("equal lengths")
    }

    /// Read a diagonal pair back from a tuple; `None` when it is not one.
    pub fn from_tuple(t: &QuadTuple) -> Option<Self> {
        if t.n() != 2 {
            return None;
        }
        let mats = t.matrices();
        let d = t.d();
        let mut rows = Vec::new();
        for m in &mats {
            for i in 0..d {
                for j in 0..d {
                    if i != j && !m.get(i, j).is_zero() {
                        return None;
                    }
                }
            }
            rows.push((0..d).map(|i| m.get(i, i).clone()).collect::<Vec<_>>());
        }
        let b = rows.pop()?;
        let a = rows.pop()?;
        Some(GoodManifoldSpec { a, b })
    }
}

/// All `a_i > 0` and every 2×2 minor of `(a; b)` nonzero.
pub fn is_good(spec: &GoodManifoldSpec) -> bool {
    let d = spec.d();
    spec.a.iter().all(Signed::is_positive)
        && (0..d).all(|i| (i + 1..d).all(|j| !(&spec.a[i] * &spec.b[j] - &spec.a[j] * &spec.b[i]).is_zero()))
}

/// Outcome of the weak condition: holds iff no `w ≥ 0`, `Σw = 1` with `a·w = b·w = 0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WeakCondition {
    pub holds: bool,
    /// A feasible `w` when the condition fails, as rational strings.
    pub witness: Option<Vec<String>>,
}

/// Decided by enumerating vertices of `{w ≥ 0, Σw = 1, a·w = 0, b·w = 0}`.
/// Three equality rows mean every vertex has support of size at most three.
pub fn good_weak_condition(spec: &GoodManifoldSpec) -> WeakCondition {
    let d = spec.d();
    for size in 1..=3.min(d) {
        for s in combinations(d, size) {
            if let Some(w) = vertex_on_support(spec, &s) {
                let mut full = vec![Rational::zero(); d];
                for (k, &i) in s.iter().enumerate() {
                    full[i] = w[k].clone();
                }
                return WeakCondition {
                    holds: false,
                    witness: Some(full.iter().map(rat::format).collect()),
                };
            }
        }
    }
    WeakCondition {
        holds: true,
        witness: None,
    }
}

/// Unique solution of the equality system restricted to `s`, if nonnegative.
fn vertex_on_support(spec: &GoodManifoldSpec, s: &[usize]) -> Option<Vec<Rational>> {
    let k = s.len();
    let rows: Vec<Vec<Rational>> = vec![
        s.iter().map(|&i| spec.a[i].clone()).chain([Rational::zero()]).collect(),
        s.iter().map(|&i| spec.b[i].clone()).chain([Rational::zero()]).collect(),
        s.iter().map(|_| Rational::one()).chain([Rational::one()]).collect(),
    ];
    let rref = RatMatrix::from_rows(rows).rref();
    if rref.pivots.contains(&k) || rref.pivots.len() != k {
        return None;
    }
    let w: Vec<Rational> = (0..k).map(|i| rref.matrix.get(i, k).clone()).collect();
    w.iter().all(|v| !v.is_negative()).then_some(w)
}

/// Report of the well-curvedness test.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WellCurved {
    pub value: bool,
    /// `F(x, y) = Σ f_k x^{d−k} y^k`, as rational strings.
    pub coefficients: Vec<String>,
    /// Multiplicity of each linear factor class found, largest first.
    pub multiplicities: Vec<usize>,
}

/// Coefficients `f_0..f_d` of `F(x, y) = det(x H(P) + y H(Q)) = Σ f_k x^{d−k} y^k`.
///
/// Values `F(1, t)` at `t = 0..d` are interpolated and checked against a
/// symbolic cofactor expansion.
pub fn binary_form(p: &QuadForm, q: &QuadForm) -> Result<Vec<Rational>, InvariantError> {
    let d = p.d();
    if q.d() != d {
        return Err(InvariantError::Range(format!("forms in {d} and {} variables", q.d())));
    }
    let (hp, hq) = (p.hessian(), q.hessian());
    let ts: Vec<Rational> = (0..=d).map(|t| rat::int(t as i64)).collect();
    let values: Vec<Rational> = ts
        .iter()
        .map(|t| hp.add(&hq.scale(t)).and_then(|m| m.det()))
        .collect::<Result<_, _>>()?;
    let coeffs = interpolate(&ts, &values);

    let mut pm = PolyMatrix::zeros(d, d, 1);
    for i in 0..d {
        for j in 0..d {
            pm.set(
                i,
                j,
                Poly::constant(1, hp.get(i, j).clone()) + Poly::var(1, 0).scale(hq.get(i, j)),
            );
        }
    }
    let det = pm.det()?;
    for (k, c) in coeffs.iter().enumerate() {
        debug_assert_eq!(&det.coeff(&crate::algebra::Monomial(vec![k as u32])), c);
    }
    Ok(coeffs)
}

/// Newton interpolation through `(x_i, y_i)`, ascending coefficients.
fn interpolate(xs: &[Rational], ys: &[Rational]) -> Vec<Rational> {
    let n = xs.len();
    let mut dd = ys.to_vec();
    for j in 1..n {
        for i in (j..n).rev() {
            dd[i] = (&dd[i] - &dd[i - 1]) / (&xs[i] - &xs[i - j]);
        }
    }
    let mut poly = vec![Rational::zero(); n];
    for i in (0..n).rev() {
        // poly = poly * (x - xs[i]) + dd[i]
        let mut next = vec![Rational::zero(); n];
        for k in 0..n {
            if poly[k].is_zero() {
                continue;
            }
            if k + 1 < n {
                next[k + 1] += &poly[k];
            }
            next[k] -= &poly[k] * &xs[i];
        }
        next[0] += &dd[i];
        poly = next;
    }
    poly
}

/// Well-curved: `F ≢ 0` and no linear factor of multiplicity above `d/2`.
pub fn is_well_curved(p: &QuadForm, q: &QuadForm) -> Result<WellCurved, InvariantError> {
    let d = p.d();
    let f = binary_form(p, q)?;
    let coefficients = f.iter().map(rat::format).collect();
    if f.iter().all(Zero::is_zero) {
        return Ok(WellCurved {
            value: false,
            coefficients,
            multiplicities: Vec::new(),
        });
    }
    let mut poly = f;
    trim(&mut poly);
    let deg = poly.len() - 1;
    // F(1, t) loses degree exactly by the power of x dividing F.
    let mut mults = squarefree_multiplicities(&poly);
    if deg < d {
        mults.push(d - deg);
    }
    mults.sort_unstable_by(|a, b| b.cmp(a));
    let value = mults.first().is_none_or(|&m| 2 * m <= d);
    Ok(WellCurved {
        value,
        coefficients,
        multiplicities: mults,
    })
}

fn trim(p: &mut Vec<Rational>) {
    while p.len() > 1 && p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
}

fn derivative(p: &[Rational]) -> Vec<Rational> {
    let mut out: Vec<Rational> = p
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| c * rat::int(k as i64))
        .collect();
    if out.is_empty() {
        out.push(Rational::zero());
    }
    out
}

fn divmod(a: &[Rational], b: &[Rational]) -> (Vec<Rational>, Vec<Rational>) {
    let mut r = a.to_vec();
    trim(&mut r);
    let db = b.len() - 1;
    let lead = b[db].clone();
    if r.len() < b.len() {
        return (vec![Rational::zero()], r);
    }
    let mut q = vec![Rational::zero(); r.len() - db];
    for k in (0..q.len()).rev() {
        let c = &r[k + db] / &lead;
        if !c.is_zero() {
            for (i, bi) in b.iter().enumerate() {
                r[k + i] -= &c * bi;
            }
        }
        q[k] = c;
    }
    r.truncate(db.max(1));
    trim(&mut r);
    (q, r)
}

fn is_zero_poly(p: &[Rational]) -> bool {
    p.iter().all(Zero::is_zero)
}

fn monic_gcd(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let (mut x, mut y) = (a.to_vec(), b.to_vec());
    trim(&mut x);
    trim(&mut y);
    while !is_zero_poly(&y) {
        let (_, r) = divmod(&x, &y);
        x = y;
        y = r;
    }
    let lead = x.last().cloned().unwrap_or_else(Rational::one);
    x.iter().map(|c| c / &lead).collect()
}

/// Multiplicities of the distinct complex roots, grouped by Yun's squarefree
/// decomposition: entry `i` repeated `deg(a_i)` times for `p = Π a_i^i`.
pub fn squarefree_multiplicities(p: &[Rational]) -> Vec<usize> {
    let mut p = p.to_vec();
    trim(&mut p);
    if p.len() <= 1 {
        return Vec::new();
    }
    let dp = derivative(&p);
    let mut a = monic_gcd(&p, &dp);
    let mut b = divmod(&p, &a).0;
    let mut c = divmod(&dp, &a).0;
    let mut d = sub(&c, &derivative(&b));
    let mut out = Vec::new();
    let mut i = 1;
    loop {
        let g = monic_gcd(&b, &d);
        let deg_g = g.len() - 1;
        out.extend(std::iter::repeat_n(i, deg_g));
        let nb = divmod(&b, &g).0;
        if nb.len() <= 1 {
            break;
        }
        c = divmod(&d, &g).0;
        b = nb;
        d = sub(&c, &derivative(&b));
        i += 1;
        a = g;
    }
    let _ = a;
    out
}

fn sub(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let n = a.len().max(b.len());
    let mut out: Vec<Rational> = (0..n)
        .map(|k| a.get(k).cloned().unwrap_or_else(Rational::zero) - b.get(k).cloned().unwrap_or_else(Rational::zero))
        .collect();
    trim(&mut out);
    out
}
