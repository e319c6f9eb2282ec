//! Seeded property suites over the exact algebra, pencil ranks, invariants
//! and the dimension oracle.

use proptest::collection::vec;
use proptest::prelude::*;
use proptest::test_runner::RngSeed;

use qmanifold::algebra::{
    combine_forms, congruence_diagonalize, hessian_half, is_identically_zero, nv, parse_poly, quad_of_matrix, rat,
    substitute_linear, vanishes_on_grid, Poly, QuadForm, QuadTuple, RatMatrix, Rational,
};
use qmanifold::invariants::{projection_identity, tangent_frame, GoodManifoldSpec, XConfig, XSolver};
use qmanifold::pencil::{echelon_types, family_rank, minor_sum_poly, PolyMatrix};
use qmanifold::semialg::{variety_dim_estimate, DimConfig, SemiAlgebraicSet};

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        rng_seed: RngSeed::Fixed(0x5eed),
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

fn small_rat() -> impl Strategy<Value = Rational> {
    (-6i64..=6, 1i64..=4).prop_map(|(n, d)| rat::r(n, d))
}

/// Sparse polynomial with at most `terms` terms of total degree `≤ max_deg`.
fn poly(nvars: usize, max_deg: u32, terms: usize) -> impl Strategy<Value = Poly> {
    vec((vec(0..=max_deg, nvars), small_rat()), 0..=terms).prop_map(move |ts| {
        Poly::from_terms(
            nvars,
            ts.into_iter().filter(move |(e, _)| e.iter().sum::<u32>() <= max_deg),
        )
    })
}

fn rat_matrix(rows: usize, cols: usize) -> impl Strategy<Value = RatMatrix> {
    vec(vec(small_rat(), cols), rows).prop_map(RatMatrix::from_rows)
}

fn invertible(n: usize) -> impl Strategy<Value = RatMatrix> {
    rat_matrix(n, n).prop_filter("singular", move |m| m.rank() == n)
}

fn symmetric(n: usize) -> impl Strategy<Value = RatMatrix> {
    rat_matrix(n, n).prop_map(move |m| {
        let mut s = m.clone();
        for i in 0..n {
            for j in 0..n {
                s.set(i, j, (m.get(i, j) + m.get(j, i)) / rat::int(2));
            }
        }
        s
    })
}

fn poly_matrix(rows: usize, cols: usize, nvars: usize) -> impl Strategy<Value = PolyMatrix> {
    (
        vec(poly(nvars, 2, 3), rows * cols),
        vec(small_rat(), rows),
        any::<bool>(),
    )
        .prop_map(move |(entries, mix, dependent)| {
            let mut m = PolyMatrix::new(rows, cols, entries).unwrap();
            // Half the time the last row is a combination of the others.
            if dependent && rows > 1 {
                for j in 0..cols {
                    let mut acc = Poly::zero(nvars);
                    for (i, c) in mix.iter().enumerate().take(rows - 1) {
                        acc = &acc + &m.get(i, j).scale(c);
                    }
                    m.set(rows - 1, j, acc);
                }
            }
            m
        })
}

#[derive(Clone, Debug)]
enum PitCase {
    Random(Poly),
    /// `(p + q)(p − q) − p² + q²`.
    DifferenceOfSquares(Poly, Poly),
    /// `pq − qp + r`.
    Commutator(Poly, Poly, Poly),
}

impl PitCase {
    fn build(&self) -> Poly {
        match self {
            PitCase::Random(p) => p.clone(),
            PitCase::DifferenceOfSquares(p, q) => {
                let lhs = &(p + q) * &(p - q);
                &(&lhs - &(p * p)) + &(q * q)
            }
            PitCase::Commutator(p, q, r) => &(&(p * q) - &(q * p)) + r,
        }
    }
}

fn pit_case() -> impl Strategy<Value = PitCase> {
    (1usize..=4).prop_flat_map(move |n| {
        prop_oneof![
            poly(n, 6, 6).prop_map(PitCase::Random),
            (poly(n, 3, 4), poly(n, 3, 4)).prop_map(|(p, q)| PitCase::DifferenceOfSquares(p, q)),
            (poly(n, 3, 3), poly(n, 3, 3), poly(n, 6, 2)).prop_map(|(p, q, r)| PitCase::Commutator(p, q, r)),
        ]
    })
}

proptest! {
    #![proptest_config(config(1000))]

    #[test]
    fn grid_identity_test_agrees_with_coefficients(case in pit_case()) {
        let p = case.build();
        prop_assert!(p.degree() <= 6);
        prop_assert_eq!(vanishes_on_grid(&p), p.is_zero());
        prop_assert_eq!(is_identically_zero(&p), p.is_zero());
    }

    #[test]
    fn hessian_round_trip((d, a) in (1usize..=6).prop_flat_map(|d| (Just(d), symmetric(d)))) {
        let q = QuadForm::from_matrix(a.clone()).unwrap();
        prop_assert_eq!(hessian_half(&q), a.clone());
        let back = QuadForm::from_poly(&quad_of_matrix(&hessian_half(&q))).unwrap();
        prop_assert_eq!(back.matrix(), q.matrix());
        prop_assert_eq!(back.d(), d);
    }

    #[test]
    fn canonical_text_round_trip((n, p) in (1usize..=4).prop_flat_map(|n| (Just(n), poly(n, 4, 6)))) {
        prop_assert_eq!(parse_poly(&p.to_string(), n).unwrap(), p);
    }

    #[test]
    fn projection_dimension_identity(
        good in any::<bool>(),
        m in 1usize..=6,
        rows in vec(vec(-3i64..=3, 6), 6),
        xi in vec(-3i64..=3, 4),
    ) {
        let t = if good {
            GoodManifoldSpec::from_i64(&[1, 1, 1, 1], &[1, 2, 3, 4]).unwrap().tuple()
        } else {
            QuadTuple::paraboloid(3)
        };
        let dim = t.d() + t.n();
        let m = m.min(dim);
        let v = RatMatrix::from_rows(rows[..m].iter().map(|r| r[..dim].iter().map(|&x| rat::int(x)).collect()).collect());
        prop_assume!(v.rank() == m);
        let frame = tangent_frame(&t, &xi[..t.d()].iter().map(|&x| rat::int(x)).collect::<Vec<_>>()).unwrap();
        let (lhs, rhs) = projection_identity(&v, &frame).unwrap();
        prop_assert_eq!(lhs, rhs);
    }
}

proptest! {
    #![proptest_config(config(500))]

    #[test]
    fn row_rank_invariant_under_invertible_factors(
        (b, c_left, c_right) in (1usize..=5, 1usize..=5, 1usize..=3).prop_flat_map(|(r, c, n)| {
            (poly_matrix(r, c, n), invertible(r), invertible(c))
        })
    ) {
        let n = b.nvars();
        let left = PolyMatrix::from_rat(&c_left, n).mul(&b).unwrap();
        let right = b.mul(&PolyMatrix::from_rat(&c_right, n)).unwrap();
        let rank = b.row_rank();
        prop_assert_eq!(left.row_rank(), rank);
        prop_assert_eq!(right.row_rank(), rank);
    }

    #[test]
    fn constant_row_rank_is_matrix_rank(
        a in (1usize..=5, 1usize..=5).prop_flat_map(|(r, c)| rat_matrix(r, c)),
        zero_rows in vec(any::<bool>(), 5),
    ) {
        let mut a = a;
        for (i, z) in zero_rows.iter().enumerate().take(a.rows()) {
            if *z && i > 0 {
                let prev = a.row(i - 1).to_vec();
                for (j, v) in prev.into_iter().enumerate() {
                    a.set(i, j, v * rat::int(2));
                }
            }
        }
        prop_assert_eq!(PolyMatrix::from_rat(&a, 2).row_rank(), a.rank());
    }

    #[test]
    fn minor_sum_vanishes_exactly_on_rank_drop(
        (b, x, v) in (1usize..=4, 1usize..=4, 1usize..=3).prop_flat_map(|(r, c, n)| {
            (poly_matrix(r, c, n), 1..=r.min(c), vec((-2i64..=2).prop_map(rat::int), n))
        })
    ) {
        let at = b.eval(&v);
        let drop = at.rank() < x;
        prop_assert_eq!(minor_sum_poly(&b, x).unwrap().eval(&v) == Rational::from_integer(0.into()), drop);
    }
}

proptest! {
    #![proptest_config(config(200))]

    #[test]
    fn echelon_families_cover_every_rank(
        (rows, cols, rank, l, r) in (1usize..=4, 1usize..=5).prop_flat_map(|(rows, cols)| {
            (Just(rows), Just(cols), 0..=rows.min(cols))
        }).prop_flat_map(|(rows, cols, rank)| {
            (Just(rows), Just(cols), Just(rank), rat_matrix(rows, rank.max(1)), rat_matrix(rank.max(1), cols))
        })
    ) {
        let a = if rank == 0 { RatMatrix::zeros(rows, cols) } else { &l * &r };
        prop_assume!(a.rank() == rank);
        let red = a.rref();
        let fams = echelon_types(rows, cols, rank).unwrap();
        let fam = fams.iter().find(|f| f.pivots == red.pivots);
        prop_assert!(fam.is_some(), "pivots {:?} not enumerated", red.pivots);
        let fam = fam.unwrap();
        let params = fam.params_of(&red.matrix).expect("reduced form lies in its family");
        let e = fam.instantiate(&params).unwrap();
        prop_assert_eq!(&e, &red.matrix);
        // Equal row spaces, so a = C·e for an invertible C.
        let stacked = RatMatrix::from_rows(a.to_rows().into_iter().chain(e.to_rows()).collect());
        prop_assert_eq!(stacked.rank(), rank);
    }

    #[test]
    fn substitution_composes(
        (t, m1, m2) in (1usize..=4, 1usize..=2).prop_flat_map(|(d, n)| {
            (vec(symmetric(d), n), rat_matrix(d, d), rat_matrix(d, d))
        })
    ) {
        let d = m1.rows();
        let forms = t.into_iter().map(|a| QuadForm::from_matrix(a).unwrap()).collect();
        let t = QuadTuple::new(d, forms).unwrap();
        let once = substitute_linear(&t, &(&m1 * &m2)).unwrap();
        let twice = substitute_linear(&substitute_linear(&t, &m1).unwrap(), &m2).unwrap();
        prop_assert_eq!(once.matrices(), twice.matrices());
    }

    #[test]
    fn combining_forms_never_adds_variables(
        (t, mp) in (1usize..=4, 1usize..=3).prop_flat_map(|(d, n)| (vec(symmetric(d), n), rat_matrix(n, n)))
    ) {
        let d = t[0].rows();
        let forms: Vec<QuadForm> = t.into_iter().map(|a| QuadForm::from_matrix(a).unwrap()).collect();
        let t = QuadTuple::new(d, forms).unwrap();
        prop_assert!(nv(&combine_forms(&t, &mp).unwrap()) <= nv(&t));
    }

    #[test]
    fn normalized_polynomials_have_unit_norm(p in (1usize..=4).prop_flat_map(|n| poly(n, 5, 6))) {
        prop_assume!(!p.is_zero());
        prop_assert_eq!(p.normalize().unwrap().l1_norm(), rat::int(1));
    }
}

proptest! {
    #![proptest_config(config(20))]

    #[test]
    fn nv_is_minimized_by_diagonalization(
        (a, ms) in (1usize..=4).prop_flat_map(|d| (symmetric(d), vec(invertible(d), 200)))
    ) {
        let t = QuadTuple::new(a.rows(), vec![QuadForm::from_matrix(a.clone()).unwrap()]).unwrap();
        let rank = family_rank(std::slice::from_ref(&a)).unwrap();
        let sampled = ms.iter().map(|m| nv(&substitute_linear(&t, m).unwrap())).min().unwrap();
        prop_assert!(sampled >= rank);
        let (m, _) = congruence_diagonalize(&a).unwrap();
        prop_assert_eq!(nv(&substitute_linear(&t, &m).unwrap()), rank);
    }
}

fn dim(text: &str, n: usize) -> i64 {
    let cfg = DimConfig {
        radius: 1.0,
        ..DimConfig::default()
    };
    variety_dim_estimate(&SemiAlgebraicSet::parse(text, n).unwrap(), &cfg, 3).value
}

#[test]
fn dimension_is_monotone_under_union() {
    let pool = [
        "x1^2 + x2^2 - 1/4 = 0",
        "x1 - x2 = 0",
        "x1 = 0 && x2 = 0",
        "x1^2 + x2^2 + 1 = 0",
        "x1 > 0",
        "x1 - x2^2 = 0 && x1 - 1/4 > 0",
        "x1*x2 = 0",
        "x1^2 - 2*x1*x2 + x2^2 = 0",
        "x1 - 1/2 = 0 && x2 - 1/3 = 0",
        "x1^2 + x2^2 - 1/4 > 0 && x1 > 0",
    ];
    let mut pairs = 0;
    for a in pool {
        for b in pool {
            let union = format!("{a} || {b}");
            assert!(dim(a, 2) <= dim(&union, 2), "{a} vs {union}");
            pairs += 1;
        }
    }
    assert!(pairs >= 100);
}

#[test]
fn product_with_a_line_adds_one_dimension() {
    let cfg = DimConfig::default();
    for (text, n) in [
        ("x1^2 + x2^2 - 1 = 0", 2),
        ("x1^2 + x2^2 - x3^2 = 0", 3),
        ("x1 = 0 && x2 = 0", 2),
        ("x1*x2 = 0", 2),
    ] {
        let s = SemiAlgebraicSet::parse(text, n).unwrap();
        let base = variety_dim_estimate(&s, &cfg, 5).value;
        assert_eq!(variety_dim_estimate(&s.times_line(), &cfg, 5).value, base + 1, "{text}");
    }
}

#[test]
fn x_is_monotone_in_k() {
    let good = GoodManifoldSpec::from_i64(&[1, 1, 1, 1], &[1, 2, 3, 4])
        .unwrap()
        .tuple();
    for t in [QuadTuple::paraboloid(3), good] {
        let solver = XSolver::new(&t, &XConfig::default(), 7);
        let tables: Vec<_> = (3..=t.d() + 1).map(|k| solver.x_table(k).unwrap()).collect();
        for w in tables.windows(2) {
            for (a, b) in w[0].entries.iter().zip(&w[1].entries) {
                assert!(
                    a.value <= b.value,
                    "{t}: m={} k={} gives {} > {}",
                    a.m,
                    w[0].k,
                    a.value,
                    b.value
                );
            }
        }
    }
}
