use std::fmt;

use num_traits::{One, Zero};

use super::{rat, AlgebraError, Monomial, Poly, RatMatrix, Rational};

/// A real quadratic form `ξᵀAξ` stored through its symmetric matrix.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuadForm {
    matrix: RatMatrix,
}

impl QuadForm {
    pub fn from_matrix(a: RatMatrix) -> Result<Self, AlgebraError> {
        if a.rows() != a.cols() {
            return Err(AlgebraError::NotSquare(a.rows(), a.cols()));
        }
        if !a.is_symmetric() {
            return Err(AlgebraError::NotSymmetric);
        }
        Ok(QuadForm { matrix: a })
    }

    /// Symmetrise an arbitrary square matrix: `(A + Aᵀ)/2`.
    pub fn from_any_matrix(a: &RatMatrix) -> Result<Self, AlgebraError> {
        let s = a.add(&a.transpose())?.scale(&rat::r(1, 2));
        QuadForm::from_matrix(s)
    }

    pub fn from_poly(p: &Poly) -> Result<Self, AlgebraError> {
        if !p.is_homogeneous(2) {
            return Err(AlgebraError::NotQuadratic(p.to_string()));
        }
        let d = p.nvars();
        let mut a = RatMatrix::zeros(d, d);
        let half = rat::r(1, 2);
        for (m, c) in p.terms() {
            let idx: Vec<usize> = m
                .exps()
                .iter()
                .enumerate()
                .flat_map(|(i, &e)| std::iter::repeat_n(i, e as usize))
                .collect();
            let (i, j) = (idx[0], idx[1]);
            if i == j {
                a.set(i, i, c.clone());
            } else {
                a.set(i, j, c * &half);
                a.set(j, i, c * &half);
            }
        }
        Ok(QuadForm { matrix: a })
    }

    pub fn d(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &RatMatrix {
        &self.matrix
    }

    pub fn is_zero(&self) -> bool {
        self.matrix.is_zero()
    }

    pub fn to_poly(&self) -> Poly {
        quad_of_matrix(&self.matrix)
    }

    pub fn eval(&self, xi: &[Rational]) -> Rational {
        let ax = self.matrix.mul_vec(xi);
        xi.iter().zip(&ax).map(|(a, b)| a * b).sum()
    }

    /// Gradient `2Aξ`.
    pub fn gradient(&self, xi: &[Rational]) -> Vec<Rational> {
        let two = rat::int(2);
        self.matrix.mul_vec(xi).into_iter().map(|v| v * &two).collect()
    }

    /// Full Hessian `2A`.
    pub fn hessian(&self) -> RatMatrix {
        self.matrix.scale(&rat::int(2))
    }
}

impl fmt::Display for QuadForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_poly())
    }
}

/// The matrix `A` with `a_ij = ½ ∂_i∂_j Q`.
pub fn hessian_half(q: &QuadForm) -> RatMatrix {
    q.matrix.clone()
}

/// Polynomial `Σ a_ij ξ_i ξ_j` of a symmetric matrix.
pub fn quad_of_matrix(a: &RatMatrix) -> Poly {
    let d = a.rows();
    let mut p = Poly::zero(d);
    for i in 0..d {
        for j in 0..d {
            let c = a.get(i, j);
            if c.is_zero() {
                continue;
            }
            let mut e = vec![0u32; d];
            e[i] += 1;
            e[j] += 1;
            p.add_term(Monomial(e), c.clone());
        }
    }
    p
}

/// An ordered n-tuple of quadratic forms in d variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuadTuple {
    d: usize,
    forms: Vec<QuadForm>,
}

impl QuadTuple {
    pub fn new(d: usize, forms: Vec<QuadForm>) -> Result<Self, AlgebraError> {
        if forms.is_empty() {
            return Err(AlgebraError::EmptyTuple);
        }
        if let Some(f) = forms.iter().find(|f| f.d() != d) {
            return Err(AlgebraError::DimensionMismatch {
                expected: format!("d={d}"),
                found: format!("d={}", f.d()),
            });
        }
        Ok(QuadTuple { d, forms })
    }

    pub fn from_polys(d: usize, polys: &[Poly]) -> Result<Self, AlgebraError> {
        let forms = polys
            .iter()
            .map(|p| {
                if p.nvars() != d {
                    return Err(AlgebraError::DimensionMismatch {
                        expected: format!("{d} variables"),
                        found: format!("{} variables", p.nvars()),
                    });
                }
                QuadForm::from_poly(p)
            })
            .collect::<Result<Vec<_>, _>>()?;
        QuadTuple::new(d, forms)
    }

    /// Diagonal tuple `(Σ a_i ξ_i², Σ b_i ξ_i², …)` from coefficient rows.
    pub fn diagonal(rows: &[Vec<Rational>]) -> Result<Self, AlgebraError> {
        let d = rows.first().map(Vec::len).unwrap_or(0);
        let forms = rows
            .iter()
            .map(|row| {
                let mut a = RatMatrix::zeros(d, d);
                for (i, c) in row.iter().enumerate() {
                    a.set(i, i, c.clone());
                }
                QuadForm::from_matrix(a)
            })
            .collect::<Result<Vec<_>, _>>()?;
        QuadTuple::new(d, forms)
    }

    /// `(ξ₁² + … + ξ_d²)`.
    pub fn paraboloid(d: usize) -> Self {
        QuadTuple::diagonal(&[vec![Rational::one(); d]]).expect("paraboloid is well formed")
    }

    /// All monomials `ξ_iξ_j` with `i ≤ j`: the maximal-codimension tuple.
    pub fn maximal_codim(d: usize) -> Self {
        let mut forms = Vec::new();
        for i in 0..d {
            for j in i..d {
                let mut e = vec![0u32; d];
                e[i] += 1;
                e[j] += 1;
                let p = Poly::from_terms(d, [(e, Rational::one())]);
                forms.push(QuadForm::from_poly(&p).expect("monomial is quadratic"));
            }
        }
        QuadTuple::new(d, forms).expect("d ≥ 1")
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.forms.len()
    }

    pub fn forms(&self) -> &[QuadForm] {
        &self.forms
    }

    pub fn matrices(&self) -> Vec<RatMatrix> {
        self.forms.iter().map(|f| f.matrix.clone()).collect()
    }

    pub fn polys(&self) -> Vec<Poly> {
        self.forms.iter().map(QuadForm::to_poly).collect()
    }

    pub fn eval(&self, xi: &[Rational]) -> Vec<Rational> {
        self.forms.iter().map(|f| f.eval(xi)).collect()
    }
}

impl fmt::Display for QuadTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "d={}", self.d)?;
        for form in &self.forms {
            write!(f, "; {form}")?;
        }
        Ok(())
    }
}

/// Forms `Mᵀ A_i M`, i.e. `Q_i ∘ M`.
pub fn substitute_linear(t: &QuadTuple, m: &RatMatrix) -> Result<QuadTuple, AlgebraError> {
    if m.rows() != t.d || m.cols() != t.d {
        return Err(AlgebraError::DimensionMismatch {
            expected: format!("{}x{}", t.d, t.d),
            found: format!("{}x{}", m.rows(), m.cols()),
        });
    }
    let mt = m.transpose();
    let forms = t
        .forms
        .iter()
        .map(|f| QuadForm::from_matrix(&(&mt * &f.matrix) * m))
        .collect::<Result<Vec<_>, _>>()?;
    QuadTuple::new(t.d, forms)
}

/// Forms `Σ_j Mp[i][j] A_j`.
pub fn combine_forms(t: &QuadTuple, mp: &RatMatrix) -> Result<QuadTuple, AlgebraError> {
    let n = t.n();
    if mp.rows() != n || mp.cols() != n {
        return Err(AlgebraError::DimensionMismatch {
            expected: format!("{n}x{n}"),
            found: format!("{}x{}", mp.rows(), mp.cols()),
        });
    }
    let d = t.d;
    let forms = (0..n)
        .map(|i| {
            let mut acc = RatMatrix::zeros(d, d);
            for j in 0..n {
                let c = mp.get(i, j);
                if !c.is_zero() {
                    acc = acc.add(&t.forms[j].matrix.scale(c))?;
                }
            }
            QuadForm::from_matrix(acc)
        })
        .collect::<Result<Vec<_>, _>>()?;
    QuadTuple::new(d, forms)
}

/// Number of variables some form genuinely depends on.
pub fn nv(t: &QuadTuple) -> usize {
    (0..t.d)
        .filter(|&i| t.forms.iter().any(|f| (0..t.d).any(|j| !f.matrix.get(i, j).is_zero())))
        .count()
}

/// Exact congruence diagonalisation: returns invertible `M` with `MᵀAM` diagonal.
pub fn congruence_diagonalize(a: &RatMatrix) -> Result<(RatMatrix, RatMatrix), AlgebraError> {
    if !a.is_symmetric() {
        return Err(AlgebraError::NotSymmetric);
    }
    let n = a.rows();
    let mut cur = a.clone();
    let mut m = RatMatrix::identity(n);
    for k in 0..n {
        if cur.get(k, k).is_zero() {
            if let Some(j) = (k + 1..n).find(|&j| !cur.get(j, j).is_zero()) {
                let mut e = RatMatrix::identity(n);
                e.swap_rows(k, j);
                cur = &(&e.transpose() * &cur) * &e;
                m = &m * &e;
            } else if let Some(j) = (k + 1..n).find(|&j| !cur.get(k, j).is_zero()) {
                // a_kk = a_jj = 0, a_kj ≠ 0: shear ξ_k ← ξ_k + ξ_j.
                let mut e = RatMatrix::identity(n);
                e.set(j, k, Rational::one());
                cur = &(&e.transpose() * &cur) * &e;
                m = &m * &e;
            }
        }
        let piv = cur.get(k, k).clone();
        if piv.is_zero() {
            continue;
        }
        let mut e = RatMatrix::identity(n);
        for j in k + 1..n {
            e.set(k, j, -(cur.get(k, j) / &piv));
        }
        cur = &(&e.transpose() * &cur) * &e;
        m = &m * &e;
    }
    Ok((m, cur))
}
