use num_traits::Signed;
use serde::Serialize;

use super::{fixtures, load_tuple, parse_poly_text, CliError};
use crate::algebra::{rat, Poly, QuadTuple, Rational};
use crate::covering::{cover_sublevel, CoveringConfig};
use crate::exponents::{
    critical_p_good, critical_p_maxcodim, critical_p_paraboloid, dec_exp_paraboloid_slice, verify_with_table,
};
use crate::invariants::{
    good_weak_condition, is_good, is_well_curved, x_paraboloid_closed, x_table, GoodManifoldSpec, XConfig,
};
use crate::pencil::PolyMatrix;
use crate::semialg::Confidence;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

type Outcome = Result<(bool, String), CliError>;
type Run = (&'static str, Box<dyn Fn() -> Outcome>);

fn row_rank_counterexample() -> Outcome {
    let (x1, x2) = (Poly::var(2, 0), Poly::var(2, 1));
    let b = PolyMatrix::from_rows(vec![vec![x1.clone(), x1], vec![x2.clone(), x2]])
        .map_err(|e| CliError::Input(e.to_string()))?;
    let det = b.det().map_err(|e| CliError::Input(e.to_string()))?;
    let rank = b.row_rank();
    Ok((rank == 2 && det.is_zero(), format!("row_rank={rank} det={det}")))
}

fn asymptotic(d: usize, p: &Rational, center: i64, slack: i64) -> bool {
    let lhs = rat::int(d as i64) * (p - rat::int(2)) - rat::int(center);
    lhs.abs() <= rat::r(slack, d as i64)
}

fn paraboloid_exponent() -> Outcome {
    let p2 = critical_p_paraboloid(2)?;
    let mut ok = p2.value == rat::r(10, 3);
    for d in 10..=200 {
        let k = 2 * (d + 2) / 3;
        let p = crate::exponents::paraboloid_threshold(d, k);
        ok &= asymptotic(d, &p, 3, 10);
    }
    Ok((ok, format!("p_c(2)={}", rat::format(&p2.value))))
}

fn good_exponent() -> Outcome {
    let p4 = critical_p_good(4)?;
    let mut ok = p4.value == rat::r(10, 3);
    for d in 10..=200 {
        ok &= asymptotic(d, &critical_p_good(d)?.value, 6, 20);
    }
    Ok((ok, format!("p_c(4)={}", rat::format(&p4.value))))
}

fn maxcodim(seed: u64) -> Outcome {
    let closed = (2..=6).all(|d| critical_p_maxcodim(d) == rat::int(2 * d as i64 + 2));
    let t = load_tuple("mockenhaupt")?;
    let table = x_table(&t, 3, &XConfig::default(), seed)?;
    let p = rat::int(6) + rat::r(1, 100);
    let report = verify_with_table(dec_exp_paraboloid_slice, &table, t.d(), t.n(), &p)?;
    let confident = table.confidence() >= Confidence::HighConfidence;
    Ok((
        closed && report.holds && confident,
        format!(
            "X={:?} conditions hold={} confidence={}",
            table.values(),
            report.holds,
            table.confidence().as_str()
        ),
    ))
}

fn paraboloid_x(seed: u64) -> Outcome {
    let t = QuadTuple::paraboloid(2);
    let mut ok = true;
    let mut detail = Vec::new();
    for k in 2..=3 {
        let table = x_table(&t, k, &XConfig::default(), seed)?;
        let closed: Vec<usize> = (0..=3)
            .map(|m| x_paraboloid_closed(2, k, m))
            .collect::<Result<_, _>>()?;
        ok &= table.values() == closed && table.confidence() >= Confidence::HighConfidence;
        detail.push(format!("k={k} {:?}", table.values()));
    }
    Ok((ok, detail.join("; ")))
}

fn classification() -> Outcome {
    let spec = |name: &str| -> Result<GoodManifoldSpec, CliError> {
        GoodManifoldSpec::from_tuple(&load_tuple(name)?)
            .ok_or_else(|| CliError::Input(format!("{name} is not a diagonal pair")))
    };
    let good = spec("good_d4")?;
    let hyper = spec("hyperbolic_tensor")?;
    let weak = good_weak_condition(&hyper);
    let ht = load_tuple("hyperbolic_tensor")?;
    let dp = load_tuple("degenerate_pair")?;
    let wc_hyper = is_well_curved(&ht.forms()[0], &ht.forms()[1])?.value;
    let wc_dp = is_well_curved(&dp.forms()[0], &dp.forms()[1])?.value;
    let ok = is_good(&good) && !is_good(&hyper) && !weak.holds && weak.witness.is_some() && wc_hyper && !wc_dp;
    Ok((ok, format!("weak witness {:?}", weak.witness)))
}

fn circle(seed: u64, samples: usize) -> Outcome {
    let text = fixtures::fixture("circle_r0.5").expect("shipped fixture");
    let p = parse_poly_text(text)?;
    let c = cover_sublevel(&p, 1000.0, 2.0, samples, seed, &CoveringConfig::default())?;
    let r = &c.report;
    Ok((
        r.coverage.fraction >= 1.0 && r.audit.all_pass() && r.coverage.overlap_ok,
        format!(
            "fraction={} graphs={} audits_pass={}",
            r.coverage.fraction,
            r.audit.graphs,
            r.audit.all_pass()
        ),
    ))
}

/// Quick versions of the reference checks on shipped fixtures.
pub fn verify_all(seed: u64, cover_samples: usize) -> Vec<Check> {
    let runs: Vec<Run> = vec![
        ("row_rank_counterexample", Box::new(row_rank_counterexample)),
        ("paraboloid_critical_p", Box::new(paraboloid_exponent)),
        ("good_critical_p", Box::new(good_exponent)),
        ("maxcodim_mockenhaupt", Box::new(move || maxcodim(seed))),
        ("paraboloid_x_closed_form", Box::new(move || paraboloid_x(seed))),
        ("classification", Box::new(classification)),
        ("circle_covering", Box::new(move || circle(seed, cover_samples))),
    ];
    runs.into_iter()
        .map(|(name, f)| match f() {
            Ok((pass, detail)) => Check { name, pass, detail },
            Err(e) => Check {
                name,
                pass: false,
                detail: e.to_string(),
            },
        })
        .collect()
}
