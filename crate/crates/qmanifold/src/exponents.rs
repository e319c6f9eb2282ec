//! Closed-form restriction exponents: decoupling slice exponents, the
//! two-condition check over an X table, and critical `p` per family.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::algebra::{rat, Rational};
use crate::invariants::XTable;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ExponentError {
    #[error("parameter out of range: {0}")]
    Range(String),
    #[error("X table has {found} entries, expected {expected}")]
    TableIncomplete { expected: usize, found: usize },
}

/// Decoupling exponent of a slice, as the power in `δ^{−e}`.
pub type DecSliceFn = fn(usize, usize, &Rational) -> Result<Rational, ExponentError>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExponentQuery {
    pub d: usize,
    pub n: usize,
    pub k: usize,
    pub p: Rational,
}

impl ExponentQuery {
    pub fn new(d: usize, n: usize, k: usize, p: Rational) -> Result<Self, ExponentError> {
        if k < 2 || k > d + 1 {
            return Err(ExponentError::Range(format!("k={k} outside 2..={}", d + 1)));
        }
        check_p(&p)?;
        Ok(ExponentQuery { d, n, k, p })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CriticalP {
    #[serde(serialize_with = "rat::serialize")]
    pub value: Rational,
    pub argmin_k: usize,
    #[serde(serialize_with = "rat::serialize_map")]
    pub per_k: BTreeMap<usize, Rational>,
}

impl CriticalP {
    /// Minimum over `per_k`, ties to the smaller `k`.
    fn from_per_k(per_k: BTreeMap<usize, Rational>) -> Self {
        let (argmin_k, value) = per_k
            .iter()
            .fold(None::<(usize, &Rational)>, |best, (k, v)| match best {
                Some((_, b)) if b <= v => best,
                _ => Some((*k, v)),
            })
            .map(|(k, v)| (k, v.clone()))
            .expect("at least one k");
        CriticalP { value, argmin_k, per_k }
    }
}

fn check_p(p: &Rational) -> Result<(), ExponentError> {
    if *p < rat::int(2) {
        return Err(ExponentError::Range(format!("p={} below 2", rat::format(p))));
    }
    Ok(())
}

fn half_minus_inv(p: &Rational) -> Rational {
    rat::r(1, 2) - p.recip()
}

fn clamp0(v: Rational) -> Rational {
    if v.is_negative() {
        Rational::zero()
    } else {
        v
    }
}

/// `max((k−2)(1/2 − 1/p), (k−2) − 2(k−1)/p)`, clamped at 0.
pub fn dec_exp_paraboloid_slice(k: usize, _d: usize, p: &Rational) -> Result<Rational, ExponentError> {
    if k < 2 {
        return Err(ExponentError::Range(format!("k={k} below 2")));
    }
    check_p(p)?;
    let k2 = rat::int(k as i64 - 2);
    let first = &k2 * half_minus_inv(p);
    let second = &k2 - rat::int(2 * (k as i64 - 1)) / p;
    Ok(clamp0(first.max(second)))
}

/// Three-term bound for a codimension-two slice, the middle term taking the
/// smaller of its two branches; clamped at 0.
pub fn dec_exp_codim2_slice(k: usize, d: usize, p: &Rational) -> Result<Rational, ExponentError> {
    if k < 3 || k > d + 1 {
        return Err(ExponentError::Range(format!("k={k} outside 3..={}", d + 1)));
    }
    check_p(p)?;
    let h = half_minus_inv(p);
    let two_p = rat::int(2) / p;
    let k2 = rat::int(k as i64 - 2);
    let first = &k2 * &h;
    let mid_a = rat::int(2) * &k2 * &h - &two_p;
    let mid_b = rat::int(d as i64 + 1) * &h - &two_p;
    let third = &k2 - rat::int(2 * (k as i64 - 2) + 4) / p;
    Ok(clamp0(first.max(mid_a.min(mid_b)).max(third)))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConditionReport {
    pub holds: bool,
    #[serde(serialize_with = "rat::serialize")]
    pub dec_exponent: Rational,
    /// `d − (2d + 2n)/p`.
    #[serde(serialize_with = "rat::serialize")]
    pub dec_budget: Rational,
    pub dec_ok: bool,
    /// `m` with `2m/p > X(m)`.
    pub violating_m: Vec<usize>,
}

/// Checks `dec(k, d, p) ≤ d − (2d + 2n)/p` and `2m/p ≤ X(m)` for every `m`.
/// `x_values[m]` is the X entry for `0 ≤ m ≤ d + n`.
pub fn verify_exponent_conditions(
    dec: DecSliceFn,
    x_values: &[usize],
    q: &ExponentQuery,
) -> Result<ConditionReport, ExponentError> {
    let expected = q.d + q.n + 1;
    if x_values.len() != expected {
        return Err(ExponentError::TableIncomplete {
            expected,
            found: x_values.len(),
        });
    }
    let dec_exponent = dec(q.k, q.d, &q.p)?;
    let dec_budget = rat::int(q.d as i64) - rat::int(2 * (q.d + q.n) as i64) / &q.p;
    let dec_ok = dec_exponent <= dec_budget;
    let violating_m: Vec<usize> = x_values
        .iter()
        .enumerate()
        .filter(|&(m, &x)| rat::int(2 * m as i64) / &q.p > rat::int(x as i64))
        .map(|(m, _)| m)
        .collect();
    Ok(ConditionReport {
        holds: dec_ok && violating_m.is_empty(),
        dec_exponent,
        dec_budget,
        dec_ok,
        violating_m,
    })
}

/// [`verify_exponent_conditions`] reading `d`, `n`, `k` from a computed table.
pub fn verify_with_table(
    dec: DecSliceFn,
    table: &XTable,
    d: usize,
    n: usize,
    p: &Rational,
) -> Result<ConditionReport, ExponentError> {
    let q = ExponentQuery::new(d, n, table.k, p.clone())?;
    verify_exponent_conditions(dec, &table.values(), &q)
}

/// `min_{2≤k≤d+1} max(2k/(k−1), 2(2d−k+4)/(2d−k+2))`.
pub fn critical_p_paraboloid(d: usize) -> Result<CriticalP, ExponentError> {
    if d < 1 {
        return Err(ExponentError::Range("d=0".into()));
    }
    let per_k = (2..=d + 1).map(|k| (k, paraboloid_threshold(d, k))).collect();
    Ok(CriticalP::from_per_k(per_k))
}

pub fn paraboloid_threshold(d: usize, k: usize) -> Rational {
    let (d, k) = (d as i64, k as i64);
    let a = rat::r(2 * k, k - 1);
    let b = rat::r(2 * (2 * d - k + 4), 2 * d - k + 2);
    a.max(b)
}

/// `min_{3≤k≤d+1} max(2(k+1)/(k−1), 2(2d−k+6)/(2d−k+2))`.
pub fn critical_p_good(d: usize) -> Result<CriticalP, ExponentError> {
    if d < 2 {
        return Err(ExponentError::Range(format!("d={d} below 2")));
    }
    let per_k = (3..=d + 1).map(|k| (k, good_threshold(d, k))).collect();
    Ok(CriticalP::from_per_k(per_k))
}

pub fn good_threshold(d: usize, k: usize) -> Rational {
    let (d, k) = (d as i64, k as i64);
    let a = rat::r(2 * (k + 1), k - 1);
    let b = rat::r(2 * (2 * d - k + 6), 2 * d - k + 2);
    a.max(b)
}

pub fn critical_p_maxcodim(d: usize) -> Rational {
    rat::int(2 * d as i64 + 2)
}

pub fn tomas_stein_wellcurved(d: usize) -> Result<Rational, ExponentError> {
    if d < 2 {
        return Err(ExponentError::Range(format!("d={d} below 2")));
    }
    Ok(rat::int(2) + rat::r(8, d as i64))
}

pub fn conjectured_wellcurved(d: usize) -> Result<Rational, ExponentError> {
    if d < 2 {
        return Err(ExponentError::Range(format!("d={d} below 2")));
    }
    Ok(rat::int(2) + rat::r(4, d as i64))
}

/// Bisection on a predicate monotone in `p`: returns `(lo, hi)` with
/// `pass(lo)` false, `pass(hi)` true and `hi − lo ≤ width`.
pub fn bisect_threshold<F>(
    pass: F,
    lo: Rational,
    hi: Rational,
    width: &Rational,
) -> Result<(Rational, Rational), ExponentError>
where
    F: Fn(&Rational) -> bool,
{
    if pass(&lo) || !pass(&hi) {
        return Err(ExponentError::Range(
            "predicate does not change sign on the bracket".into(),
        ));
    }
    let (mut lo, mut hi) = (lo, hi);
    let two = rat::int(2);
    while &(&hi - &lo) > width {
        let mid = (&lo + &hi) / &two;
        if pass(&mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok((lo, hi))
}

/// Smallest passing `p` for the paraboloid family over all `k`, located by
/// bisection against the closed-form X table.
pub fn paraboloid_threshold_by_bisection(d: usize, width: &Rational) -> Result<(Rational, Rational), ExponentError> {
    let tables: Vec<(usize, Vec<usize>)> = (2..=d + 1)
        .map(|k| {
            let xs = (0..=d + 1)
                .map(|m| crate::invariants::x_paraboloid_closed(d, k, m).expect("m ≤ d + 1"))
                .collect();
            (k, xs)
        })
        .collect();
    let pass = |p: &Rational| {
        tables.iter().any(|(k, xs)| {
            let q = ExponentQuery::new(d, 1, *k, p.clone()).expect("k in range");
            verify_exponent_conditions(dec_exp_paraboloid_slice, xs, &q).is_ok_and(|r| r.holds)
        })
    };
    bisect_threshold(pass, rat::int(2), rat::int(6), width)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rat::{int, r};

    #[test]
    fn paraboloid_slice_values() {
        for p in [int(2), r(7, 3), int(100)] {
            assert_eq!(dec_exp_paraboloid_slice(2, 3, &p).unwrap(), int(0));
        }
        assert_eq!(dec_exp_paraboloid_slice(4, 3, &int(4)).unwrap(), r(1, 2));
        let big = Rational::from_integer(num_bigint::BigInt::from(10).pow(30));
        // First term tends to (k−2)/2, the second to k−2, which dominates.
        let e = dec_exp_paraboloid_slice(4, 3, &big).unwrap();
        assert!((rat::to_f64(&e) - 2.0).abs() < 1e-12);
        let first = int(2) * (r(1, 2) - big.recip());
        assert!((rat::to_f64(&first) - 1.0).abs() < 1e-12);
        assert!(dec_exp_paraboloid_slice(1, 3, &int(3)).is_err());
        assert!(dec_exp_paraboloid_slice(3, 3, &r(3, 2)).is_err());
    }

    fn codim2_f64(k: f64, d: f64, p: f64) -> f64 {
        let h = 0.5 - 1.0 / p;
        let mid = (2.0 * (k - 2.0) * h - 2.0 / p).min((d + 1.0) * h - 2.0 / p);
        ((k - 2.0) * h)
            .max(mid)
            .max((k - 2.0) - (2.0 * (k - 2.0) + 4.0) / p)
            .max(0.0)
    }

    #[test]
    fn codim2_slice_values() {
        assert_eq!(dec_exp_codim2_slice(3, 4, &int(2)).unwrap(), int(0));
        assert_eq!(dec_exp_codim2_slice(5, 9, &int(2)).unwrap(), int(0));
        assert_eq!(dec_exp_codim2_slice(3, 4, &r(10, 3)).unwrap(), r(1, 5));
        for (k, d, p) in [(3, 4, r(10, 3)), (5, 6, r(17, 5)), (7, 6, int(9)), (4, 10, r(5, 2))] {
            let exact = rat::to_f64(&dec_exp_codim2_slice(k, d, &p).unwrap());
            assert!((exact - codim2_f64(k as f64, d as f64, rat::to_f64(&p))).abs() < 1e-12);
        }
        assert!(dec_exp_codim2_slice(2, 4, &int(3)).is_err());
        // At k = d + 1 the decoupling budget is met with equality at the per-k threshold.
        for d in 2..=30usize {
            let k = d + 1;
            let p = r(2 * (2 * d as i64 - k as i64 + 6), 2 * d as i64 - k as i64 + 2);
            let budget = int(d as i64) - int(2 * d as i64 + 4) / &p;
            assert_eq!(dec_exp_codim2_slice(k, d, &p).unwrap(), budget, "d={d}");
        }
    }

    #[test]
    fn critical_values() {
        let c = critical_p_paraboloid(2).unwrap();
        assert_eq!((c.value.clone(), c.argmin_k), (r(10, 3), 3));
        assert_eq!(critical_p_paraboloid(1).unwrap().value, int(4));
        let g = critical_p_good(4).unwrap();
        assert_eq!((g.value, g.argmin_k), (r(10, 3), 4));
        assert_eq!(critical_p_maxcodim(2), int(6));
        assert_eq!(tomas_stein_wellcurved(8).unwrap(), int(3));
        assert_eq!(conjectured_wellcurved(4).unwrap(), int(3));
        assert!(critical_p_good(1).is_err());
        let json = serde_json::to_string(&c).unwrap();
        assert!(json.contains("\"value\":\"10/3\""));
    }

    #[test]
    fn asymptotics_and_ordering() {
        for d in 10..=200usize {
            let c = critical_p_paraboloid(d).unwrap();
            let scaled = rat::to_f64(&((&c.value - int(2)) * int(d as i64)));
            assert!((scaled - 3.0).abs() <= 10.0 / d as f64, "d={d}");
            let k = 2 * (d + 2) / 3;
            let (di, ki) = (d as i64, k as i64);
            let gap = r(2 * ki, ki - 1) - r(2 * (2 * di - ki + 4), 2 * di - ki + 2);
            assert!(rat::to_f64(&gap).abs() <= 50.0 / (d * d) as f64, "d={d}");
            let g = critical_p_good(d).unwrap();
            let scaled = rat::to_f64(&((&g.value - int(2)) * int(d as i64)));
            assert!((scaled - 6.0).abs() <= 20.0 / d as f64, "d={d}");
            assert!(g.value >= c.value);
            if d >= 9 {
                assert!(g.value < tomas_stein_wellcurved(d).unwrap());
            }
        }
    }

    #[test]
    fn bisection_agrees_with_closed_form() {
        let width = r(1, 1 << 40);
        for d in 1..=50usize {
            let pc = critical_p_paraboloid(d).unwrap().value;
            let (lo, hi) = paraboloid_threshold_by_bisection(d, &width).unwrap();
            assert!(lo < pc && pc <= hi, "d={d}");
        }
    }

    #[test]
    fn condition_check() {
        let d = 2;
        let below = r(10, 3) - r(1, 100);
        for k in 2..=3 {
            let xs: Vec<usize> = (0..=3)
                .map(|m| crate::invariants::x_paraboloid_closed(d, k, m).unwrap())
                .collect();
            let q = ExponentQuery::new(d, 1, k, below.clone()).unwrap();
            assert!(
                !verify_exponent_conditions(dec_exp_paraboloid_slice, &xs, &q)
                    .unwrap()
                    .holds
            );
        }
        let xs = [0, 1, 1, 0];
        let q = ExponentQuery::new(2, 1, 3, int(50)).unwrap();
        let rep = verify_exponent_conditions(dec_exp_paraboloid_slice, &xs, &q).unwrap();
        assert_eq!(rep.violating_m, vec![3]);
        assert!(matches!(
            verify_exponent_conditions(dec_exp_paraboloid_slice, &xs[..3], &q),
            Err(ExponentError::TableIncomplete { expected: 4, found: 3 })
        ));
    }
}
