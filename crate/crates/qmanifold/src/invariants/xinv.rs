use std::collections::{BTreeSet, HashMap};
use std::sync::Mutex;

use nalgebra::DMatrix;
use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::Serialize;

use super::{tangent_poly_matrix, InvariantError};
use crate::algebra::{rat, Poly, QuadTuple, Rational};
use crate::numeric::{child_rng, mix_seed};
use crate::pencil::{echelon_types, EchelonFamily, PolyMatrix};
use crate::semialg::{slice_sup_dim, Confidence, SliceConfig, SliceProblem};

#[derive(Clone, Debug)]
pub struct XConfig {
    pub slice: SliceConfig,
    /// Cap on structured η hints per family.
    pub max_hints: usize,
}

impl Default for XConfig {
    fn default() -> Self {
        XConfig {
            slice: SliceConfig {
                budget: 48,
                ..SliceConfig::default()
            },
            max_hints: 4096,
        }
    }
}

/// `sup_V dim {ξ : rank(V V_ξ) < X}` for one `(m, X)`.
#[derive(Clone, Debug, Serialize)]
pub struct BadSetDim {
    pub value: i64,
    pub confidence: Confidence,
    /// Pivot columns of the echelon family and the η reaching `value`.
    pub witness: Option<(Vec<usize>, Vec<f64>)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct XEntry {
    pub m: usize,
    pub value: usize,
    pub confidence: Confidence,
    /// Bad-set dimension at `value + 1`, which exceeded `k − 2`.
    pub blocked_by: Option<BadSetDim>,
}

#[derive(Clone, Debug, Serialize)]
pub struct XTable {
    pub tuple: String,
    pub k: usize,
    pub seed: u64,
    pub entries: Vec<XEntry>,
}

impl XTable {
    pub fn values(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.value).collect()
    }

    pub fn confidence(&self) -> Confidence {
        self.entries
            .iter()
            .map(|e| e.confidence)
            .min()
            .unwrap_or(Confidence::ClosedFormOracle)
    }
}

/// Computes X entries for one tuple, sharing bad-set dimensions across `k`.
pub struct XSolver {
    tuple: QuadTuple,
    cfg: XConfig,
    seed: u64,
    hint_values: Vec<Rational>,
    cache: Mutex<HashMap<(usize, usize), BadSetDim>>,
}

impl XSolver {
    pub fn new(tuple: &QuadTuple, cfg: &XConfig, seed: u64) -> Self {
        XSolver {
            hint_values: hint_values(tuple),
            tuple: tuple.clone(),
            cfg: cfg.clone(),
            seed,
            cache: Mutex::new(HashMap::new()),
        }
    }

    /// `X(𝓜, k, m)`: the largest `X ≤ d + 1` whose bad set has dimension `≤ k − 2`.
    pub fn x_invariant(&self, k: usize, m: usize) -> Result<XEntry, InvariantError> {
        let (d, n) = (self.tuple.d(), self.tuple.n());
        if k < 2 || k > d + 1 {
            return Err(InvariantError::Range(format!("k={k} outside 2..={}", d + 1)));
        }
        if m > d + n {
            return Err(InvariantError::Range(format!("m={m} exceeds d+n={}", d + n)));
        }
        let limit = (k - 2) as i64;
        let mut confidence = Confidence::ClosedFormOracle;
        let mut blocked_by = None;
        for x in (1..=m.min(d + 1)).rev() {
            let s = self.bad_set_dim(m, x);
            confidence = confidence.min(s.confidence);
            if s.value <= limit {
                return Ok(XEntry {
                    m,
                    value: x,
                    confidence,
                    blocked_by,
                });
            }
            blocked_by = Some(s);
        }
        Ok(XEntry {
            m,
            value: 0,
            confidence,
            blocked_by,
        })
    }

    pub fn x_table(&self, k: usize) -> Result<XTable, InvariantError> {
        let ms: Vec<usize> = (0..=self.tuple.d() + self.tuple.n()).collect();
        let entries = ms
            .par_iter()
            .map(|&m| self.x_invariant(k, m))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(XTable {
            tuple: self.tuple.to_string(),
            k,
            seed: self.seed,
            entries,
        })
    }

    pub fn bad_set_dim(&self, m: usize, x: usize) -> BadSetDim {
        if let Some(v) = self.cache.lock().expect("cache lock").get(&(m, x)) {
            return v.clone();
        }
        let v = self.compute_bad_set_dim(m, x);
        self.cache.lock().expect("cache lock").insert((m, x), v.clone());
        v
    }

    fn compute_bad_set_dim(&self, m: usize, x: usize) -> BadSetDim {
        let (d, n) = (self.tuple.d(), self.tuple.n());
        let closed = |value: i64| BadSetDim {
            value,
            confidence: Confidence::ClosedFormOracle,
            witness: None,
        };
        if x == 0 {
            return closed(-1);
        }
        // rank(V V_ξ) ≤ min(m, d) always.
        if x > m.min(d) {
            return closed(d as i64);
        }
        // dim π_{V_ξ} V ≥ m − n since the normal space has dimension n.
        if m >= x + n {
            return closed(-1);
        }
        let families = echelon_types(m, d + n, m).expect("m ≤ d + n");
        let results: Vec<BadSetDim> = families
            .par_iter()
            .enumerate()
            .map(|(i, fam)| self.family_bad_set_dim(fam, x, mix_seed(self.seed, (m * 10_000 + x * 100 + i) as u64)))
            .collect();
        let mut best = closed(-1);
        let mut confidence = Confidence::ClosedFormOracle;
        for r in results {
            confidence = confidence.min(r.confidence);
            if r.value > best.value {
                best = r;
            }
        }
        best.confidence = confidence;
        best
    }

    fn family_bad_set_dim(&self, fam: &EchelonFamily, x: usize, seed: u64) -> BadSetDim {
        let d = self.tuple.d();
        let a = fam.param_count();
        let nvars = a + d;
        let v = fam.symbolic(nvars, 0);
        let frame = tangent_poly_matrix(&self.tuple, nvars, a);
        let prod = v.mul(&frame).expect("shapes agree");
        let mut seen = BTreeSet::new();
        let mut eqs = Vec::new();
        for p in prod.minors(x).expect("x ≤ min(m, d)") {
            if p.is_zero() {
                continue;
            }
            if p.is_constant() {
                // A nonzero constant minor: the rank never drops.
                return BadSetDim {
                    value: -1,
                    confidence: Confidence::ClosedFormOracle,
                    witness: None,
                };
            }
            let p = p.normalize().expect("nonzero");
            if seen.insert(p.to_string()) {
                eqs.push(p);
            }
        }
        if eqs.is_empty() {
            return BadSetDim {
                value: d as i64,
                confidence: Confidence::ClosedFormOracle,
                witness: Some((fam.pivots.clone(), vec![0.0; a])),
            };
        }
        let problem = SliceProblem::new(&eqs, &[], a);
        let hints = sparse_hints(a, &self.hint_values, self.cfg.max_hints, seed);
        let r = slice_sup_dim(&problem, &hints, &self.cfg.slice, seed);
        BadSetDim {
            value: r.value,
            confidence: r.confidence,
            witness: r.witness_eta.map(|e| (fam.pivots.clone(), e)),
        }
    }
}

pub fn x_invariant(t: &QuadTuple, k: usize, m: usize, cfg: &XConfig, seed: u64) -> Result<XEntry, InvariantError> {
    XSolver::new(t, cfg, seed).x_invariant(k, m)
}

pub fn x_table(t: &QuadTuple, k: usize, cfg: &XConfig, seed: u64) -> Result<XTable, InvariantError> {
    XSolver::new(t, cfg, seed).x_table(k)
}

/// Closed form of X for the paraboloid.
pub fn x_paraboloid_closed(d: usize, k: usize, m: usize) -> Result<usize, InvariantError> {
    if k < 2 || k > d + 1 || m > d + 1 {
        return Err(InvariantError::Range(format!("(d, k, m) = ({d}, {k}, {m})")));
    }
    Ok(if m == d + 1 {
        d
    } else if m < k {
        m
    } else {
        m - 1
    })
}

/// Small rationals plus `±λ, ±1/λ` for rational roots `λ` of `det(A_i − λA_j)`.
pub fn hint_values(t: &QuadTuple) -> Vec<Rational> {
    let mut vals: Vec<Rational> = [(1, 1), (2, 1), (1, 2)].iter().map(|&(p, q)| rat::r(p, q)).collect();
    let mats = t.matrices();
    for (i, ai) in mats.iter().enumerate() {
        for (j, aj) in mats.iter().enumerate() {
            if i == j {
                continue;
            }
            for lam in pencil_rational_roots(ai, aj) {
                if lam.is_zero() {
                    continue;
                }
                let inv = lam.recip();
                for v in [lam.clone(), inv] {
                    let v = if v < Rational::zero() { -v } else { v };
                    if !vals.contains(&v) {
                        vals.push(v);
                    }
                }
            }
        }
    }
    vals.iter().flat_map(|v| [v.clone(), -v.clone()]).collect()
}

/// Rational `λ` with `det(A − λB) = 0`.
pub fn pencil_rational_roots(a: &crate::algebra::RatMatrix, b: &crate::algebra::RatMatrix) -> Vec<Rational> {
    let d = a.rows();
    let mut pm = PolyMatrix::zeros(d, d, 1);
    for r in 0..d {
        for c in 0..d {
            let p = Poly::constant(1, a.get(r, c).clone()) - Poly::var(1, 0).scale(b.get(r, c));
            pm.set(r, c, p);
        }
    }
    let det = pm.det().expect("square");
    rational_roots(&det)
}

/// Rational roots of a univariate polynomial: numeric roots, rounded and
/// confirmed exactly.
pub fn rational_roots(p: &Poly) -> Vec<Rational> {
    assert_eq!(p.nvars(), 1);
    if p.is_zero() {
        return Vec::new();
    }
    let deg = p.degree() as usize;
    let coeff = |k: usize| p.coeff(&crate::algebra::Monomial(vec![k as u32]));
    let mut out: Vec<Rational> = Vec::new();
    // Strip the root at zero.
    let low = (0..=deg).find(|&k| !coeff(k).is_zero()).unwrap_or(0);
    if low > 0 {
        out.push(Rational::zero());
    }
    let n = deg - low;
    if n == 0 {
        return out;
    }
    let lead = rat::to_f64(&coeff(deg));
    let mut comp = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        comp[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        comp[(i, n - 1)] = -rat::to_f64(&coeff(low + i)) / lead;
    }
    for z in comp.complex_eigenvalues().iter() {
        if z.im.abs() > 1e-6 * (1.0 + z.re.abs()) {
            continue;
        }
        for cap in [1u64, 12, 1000, 100_000] {
            let q = rat::approximate(z.re, cap);
            if p.eval(std::slice::from_ref(&q)).is_zero() {
                if !out.contains(&q) {
                    out.push(q);
                }
                break;
            }
        }
    }
    out.sort();
    out
}

/// Sparse η vectors over `values`, cheapest first: `±1` entries cost 1,
/// other entries cost 3, up to three nonzeros. The tail is shuffled by seed
/// so a small budget still sees varied supports.
pub fn sparse_hints(a: usize, values: &[Rational], max: usize, seed: u64) -> Vec<Vec<f64>> {
    if a == 0 {
        return Vec::new();
    }
    let cost = |v: &Rational| if v.abs() == Rational::one() { 1 } else { 3 };
    let vals: Vec<(f64, u32)> = values.iter().map(|v| (rat::to_f64(v), cost(v))).collect();
    let mut out: Vec<(u32, Vec<f64>)> = Vec::new();
    for i in 0..a {
        for &(v, c) in &vals {
            let mut e = vec![0.0; a];
            e[i] = v;
            out.push((c, e));
        }
    }
    for i in 0..a {
        for j in i + 1..a {
            for &(v, c) in &vals {
                for &(w, cw) in &vals {
                    let mut e = vec![0.0; a];
                    e[i] = v;
                    e[j] = w;
                    out.push((c + cw, e));
                }
            }
        }
    }
    let units: Vec<f64> = vec![1.0, -1.0];
    for i in 0..a {
        for j in i + 1..a {
            for l in j + 1..a {
                for &v in &units {
                    for &w in &units {
                        for &z in &units {
                            let mut e = vec![0.0; a];
                            e[i] = v;
                            e[j] = w;
                            e[l] = z;
                            out.push((3, e));
                        }
                    }
                }
            }
        }
    }
    // Stable sort keeps position order inside a cost class; then shuffle
    // within each class so early hints spread over positions.
    out.sort_by_key(|(c, _)| *c);
    let mut rng = child_rng(seed, 77);
    let mut start = 0;
    while start < out.len() {
        let c = out[start].0;
        let end = out[start..]
            .iter()
            .position(|(k, _)| *k != c)
            .map_or(out.len(), |p| start + p);
        out[start..end].shuffle(&mut rng);
        start = end;
    }
    out.into_iter().take(max).map(|(_, e)| e).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rat::{int, r};
    use crate::algebra::RatMatrix;

    #[test]
    fn closed_form_cases() {
        assert_eq!(x_paraboloid_closed(5, 4, 3).unwrap(), 3);
        assert_eq!(x_paraboloid_closed(5, 4, 5).unwrap(), 4);
        assert_eq!(x_paraboloid_closed(5, 4, 6).unwrap(), 5);
        assert!(x_paraboloid_closed(5, 7, 1).is_err());
    }

    #[test]
    fn generalized_eigenvalues_of_diagonal_pair() {
        let a = RatMatrix::from_i64(&[&[1, 0], &[0, 1]]);
        let b = RatMatrix::from_i64(&[&[1, 0], &[0, 3]]);
        assert_eq!(pencil_rational_roots(&a, &b), vec![r(1, 3), int(1)]);
    }

    #[test]
    fn m_zero_and_small_paraboloid() {
        let t = QuadTuple::paraboloid(2);
        let s = XSolver::new(&t, &XConfig::default(), 1);
        assert_eq!(s.x_invariant(2, 0).unwrap().value, 0);
        let e = s.x_invariant(2, 2).unwrap();
        assert_eq!(e.value, 1);
        assert!(e.confidence >= Confidence::HighConfidence);
        assert_eq!(s.x_invariant(2, 3).unwrap().value, 2);
    }
}
