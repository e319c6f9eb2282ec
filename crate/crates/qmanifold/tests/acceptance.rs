//! Reference checks, run in sequence with one PASS/FAIL line each.
//! `cargo test --test acceptance`

use std::time::{Duration, Instant};

use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qmanifold::algebra::{rat, Poly, QuadTuple, RatMatrix, Rational};
use qmanifold::cli::fixtures::fixture;
use qmanifold::cli::{load_tuple, parse_poly_text};
use qmanifold::covering::{cover_sublevel, Covering, CoveringConfig};
use qmanifold::exponents::{
    critical_p_good, critical_p_maxcodim, critical_p_paraboloid, dec_exp_paraboloid_slice, paraboloid_threshold,
    verify_with_table,
};
use qmanifold::invariants::{
    d_table, good_weak_condition, is_good, is_well_curved, projection_identity, tangent_frame, x_paraboloid_closed,
    GoodManifoldSpec, XConfig, XSolver,
};
use qmanifold::pencil::{PolyMatrix, RankConfig, RankStatus};
use qmanifold::semialg::Confidence;

const SEED: u64 = 7;

type Outcome = Result<(bool, String), Box<dyn std::error::Error>>;
/// Name, check, time limit in seconds.
type Criterion = (&'static str, fn() -> Outcome, u64);

fn fixture_tuple(name: &str) -> Result<QuadTuple, Box<dyn std::error::Error>> {
    Ok(load_tuple(name)?)
}

fn diagonal_pair(name: &str) -> Result<GoodManifoldSpec, Box<dyn std::error::Error>> {
    Ok(GoodManifoldSpec::from_tuple(&fixture_tuple(name)?).ok_or(format!("{name} is not a diagonal pair"))?)
}

fn row_rank_counterexample() -> Outcome {
    let (x1, x2) = (Poly::var(2, 0), Poly::var(2, 1));
    let b = PolyMatrix::from_rows(vec![vec![x1.clone(), x1], vec![x2.clone(), x2]])?;
    let det = b.det()?;
    let rank = b.row_rank();
    Ok((rank == 2 && det.is_zero(), format!("row_rank={rank} det={det}")))
}

fn paraboloid_critical_exponent() -> Outcome {
    let p2 = critical_p_paraboloid(2)?.value;
    let mut worst = rat::int(0);
    for d in 10..=200usize {
        let k = 2 * (d + 2) / 3;
        let p = paraboloid_threshold(d, k);
        let dev = (rat::int(d as i64) * (p - rat::int(2)) - rat::int(3)).abs() * rat::int(d as i64);
        worst = worst.max(dev);
    }
    // `worst` is max d·|d(p−2) − 3|, to be at most 10.
    let ok = p2 == rat::r(10, 3) && worst <= rat::int(10);
    Ok((
        ok,
        format!("p_c(2)={} max d*|d(p-2)-3|={}", rat::format(&p2), rat::format(&worst)),
    ))
}

fn good_critical_exponent() -> Outcome {
    let p4 = critical_p_good(4)?.value;
    let mut worst = rat::int(0);
    for d in 10..=200usize {
        let p = critical_p_good(d)?.value;
        let dev = (rat::int(d as i64) * (p - rat::int(2)) - rat::int(6)).abs() * rat::int(d as i64);
        worst = worst.max(dev);
    }
    let ok = p4 == rat::r(10, 3) && worst <= rat::int(20);
    Ok((
        ok,
        format!("p_c(4)={} max d*|d(p-2)-6|={}", rat::format(&p4), rat::format(&worst)),
    ))
}

fn maximal_codimension() -> Outcome {
    let closed = (2..=6).all(|d| critical_p_maxcodim(d) == rat::int(2 * d as i64 + 2));
    let mock = fixture_tuple("mockenhaupt")?;
    let d = mock.d();
    let table = XSolver::new(&mock, &XConfig::default(), SEED).x_table(d + 1)?;
    let p = critical_p_maxcodim(d) + rat::r(1, 100);
    let report = verify_with_table(dec_exp_paraboloid_slice, &table, d, mock.n(), &p)?;
    let confident = table.confidence() >= Confidence::HighConfidence;
    Ok((
        closed && report.holds && confident,
        format!(
            "X={:?} at k={} conditions hold at p={}: {} confidence={}",
            table.values(),
            d + 1,
            rat::format(&p),
            report.holds,
            table.confidence().as_str()
        ),
    ))
}

fn paraboloid_x_closed_form() -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    for d in 2..=3 {
        let solver = XSolver::new(&QuadTuple::paraboloid(d), &XConfig::default(), SEED);
        for k in 2..=d + 1 {
            let table = solver.x_table(k)?;
            let closed: Vec<usize> = (0..=d + 1)
                .map(|m| x_paraboloid_closed(d, k, m))
                .collect::<Result<_, _>>()?;
            let confident = table.confidence() >= Confidence::HighConfidence;
            ok &= table.values() == closed && confident;
            detail.push(format!("d={d} k={k} {:?}", table.values()));
        }
    }
    Ok((ok, detail.join(" ")))
}

fn good_d_bounds() -> Outcome {
    let table = d_table(&fixture_tuple("good_d4")?, &RankConfig::default(), SEED)?;
    let entry = |dp: usize, np: usize| table.get(dp, np).ok_or(format!("missing entry ({dp},{np})"));
    let mut ok = true;
    for m in 0..=2 {
        ok &= entry(4 - m, 2)?.value == 4 - m;
    }
    for m in 0..=1usize {
        ok &= entry(4 - m, 1)?.value >= 3usize.saturating_sub(2 * m);
    }
    for dp in 0..=4 {
        ok &= entry(dp, 0)?.value == 0;
    }
    let statuses_ok = table
        .entries
        .iter()
        .all(|e| matches!(e.decision.status, RankStatus::Exact | RankStatus::UpperBoundWitness));
    let rows: Vec<String> = (0..=2)
        .map(|np| {
            format!(
                "{:?}",
                (0..=4)
                    .map(|dp| table.get(dp, np).map_or(0, |r| r.value))
                    .collect::<Vec<_>>()
            )
        })
        .collect();
    Ok((ok && statuses_ok, format!("rows by n' {}", rows.join(" "))))
}

fn good_x_lower_bound() -> Outcome {
    let solver = XSolver::new(&fixture_tuple("good_d4")?, &XConfig::default(), SEED);
    let mut ok = true;
    let mut detail = Vec::new();
    for k in 3..=5 {
        let table = solver.x_table(k)?;
        for e in &table.entries {
            ok &= e.value * (k + 1) >= e.m * (k - 1);
        }
        detail.push(format!("k={k} {:?}", table.values()));
    }
    Ok((ok, detail.join(" ")))
}

fn classification() -> Outcome {
    let good = diagonal_pair("good_d4")?;
    let hyper = diagonal_pair("hyperbolic_tensor")?;
    let weak = good_weak_condition(&hyper);
    let ht = hyper.tuple();
    let wc_hyper = is_well_curved(&ht.forms()[0], &ht.forms()[1])?.value;
    let dp = fixture_tuple("degenerate_pair")?;
    let wc_dp = is_well_curved(&dp.forms()[0], &dp.forms()[1])?.value;
    let ok = is_good(&good) && !is_good(&hyper) && !weak.holds && weak.witness.is_some() && wc_hyper && !wc_dp;
    Ok((
        ok,
        format!(
            "good={} hyperbolic good={} weak={} witness={:?} well-curved={} degenerate well-curved={}",
            is_good(&good),
            is_good(&hyper),
            weak.holds,
            weak.witness,
            wc_hyper,
            wc_dp
        ),
    ))
}

fn random_rational(rng: &mut ChaCha8Rng) -> Rational {
    rat::r(rng.gen_range(-5..=5), rng.gen_range(1..=4))
}

fn projection_identity_instances() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut checked = 0;
    let mut failed = 0;
    for t in [fixture_tuple("paraboloid_d3")?, fixture_tuple("good_d4")?] {
        let dim = t.d() + t.n();
        let mut done = 0;
        while done < 1000 {
            let m = rng.gen_range(1..=dim);
            let v = RatMatrix::from_rows(
                (0..m)
                    .map(|_| (0..dim).map(|_| random_rational(&mut rng)).collect())
                    .collect(),
            );
            if v.rank() != m {
                continue;
            }
            let xi: Vec<Rational> = (0..t.d()).map(|_| random_rational(&mut rng)).collect();
            let (lhs, rhs) = projection_identity(&v, &tangent_frame(&t, &xi)?)?;
            failed += usize::from(lhs != rhs);
            done += 1;
        }
        checked += done;
    }
    Ok((failed == 0, format!("{checked} instances, {failed} mismatches")))
}

fn cover(name: &str) -> Result<Covering, Box<dyn std::error::Error>> {
    let text = fixture(name).ok_or(format!("no fixture {name}"))?;
    Ok(cover_sublevel(
        &parse_poly_text(text)?,
        1000.0,
        2.0,
        100_000,
        SEED,
        &CoveringConfig::default(),
    )?)
}

fn overlap_ok(c: &Covering) -> bool {
    let bound = 1000f64.powi(c.report.d as i32);
    c.report.coverage.overlap_ok && c.report.levels.iter().all(|l| l.max_overlap as f64 <= bound)
}

fn circle_covering() -> Outcome {
    let c = cover("circle_r0.5")?;
    let r = &c.report;
    let a = &r.audit;
    let ok =
        r.coverage.fraction == 1.0 && a.all_pass() && a.grad_failures == 0 && a.pivot_failures == 0 && overlap_ok(&c);
    Ok((
        ok,
        format!(
            "fraction={} over {} samples, {}/{} graphs pass, max|grad psi|={:.3}, min pivot ratio={:.3}",
            r.coverage.fraction, r.coverage.samples, a.passing, a.graphs, a.max_grad, a.min_pivot_ratio
        ),
    ))
}

fn cone_covering() -> Outcome {
    let c = cover("cone")?;
    let r = &c.report;
    let ok = r.coverage.fraction >= 0.999 && overlap_ok(&c);
    let overlap = r.levels.iter().map(|l| l.max_overlap).max().unwrap_or(0);
    Ok((
        ok,
        format!(
            "fraction={} over {} samples, max overlap={overlap}",
            r.coverage.fraction, r.coverage.samples
        ),
    ))
}

fn main() {
    let checks: [Criterion; 11] = [
        ("row_rank_counterexample", row_rank_counterexample, 1),
        ("paraboloid_critical_exponent", paraboloid_critical_exponent, 1),
        ("good_critical_exponent", good_critical_exponent, 1),
        ("maximal_codimension_exponent", maximal_codimension, 600),
        ("paraboloid_x_closed_form", paraboloid_x_closed_form, 900),
        ("good_d_bounds", good_d_bounds, 600),
        ("good_x_lower_bound", good_x_lower_bound, 900),
        ("classification", classification, 1),
        ("projection_dimension_identity", projection_identity_instances, 60),
        ("circle_covering", circle_covering, 300),
        ("cone_covering", cone_covering, 300),
    ];
    let mut failures = Vec::new();
    for (name, run, limit) in checks {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(limit);
        let (pass, detail) = match outcome {
            Ok((pass, detail)) => (pass && in_time, detail),
            Err(e) => (false, format!("error: {e}")),
        };
        println!(
            "{} {name} [{:.2}s, limit {limit}s] {detail}",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
        if !pass {
            failures.push(name);
        }
    }
    if !failures.is_empty() {
        eprintln!("failed: {failures:?}");
        std::process::exit(1);
    }
}
