//! Small helpers around `BigRational`.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::Rational;

pub fn r(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn format(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Parse `p`, `-p` or `p/q`.
pub fn parse(s: &str) -> Option<Rational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((a, b)) => {
            let n: BigInt = a.trim().parse().ok()?;
            let d: BigInt = b.trim().parse().ok()?;
            if d.is_zero() {
                None
            } else {
                Some(Rational::new(n, d))
            }
        }
        None => s.parse::<BigInt>().ok().map(Rational::from_integer),
    }
}

pub fn to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// Best rational approximation of `x` with denominator at most `max_den`
/// (continued-fraction convergents and the last semiconvergent).
pub fn approximate(x: f64, max_den: u64) -> Rational {
    if !x.is_finite() {
        return Rational::zero();
    }
    let neg = x < 0.0;
    let mut v = x.abs();
    let (mut p0, mut q0, mut p1, mut q1) = (0u128, 1u128, 1u128, 0u128);
    let max_den = max_den.max(1) as u128;
    for _ in 0..64 {
        let a = v.floor();
        if a > 1e18 {
            break;
        }
        let a = a as u128;
        let p2 = a * p1 + p0;
        let q2 = a * q1 + q0;
        if q2 > max_den {
            let t = (max_den - q0) / q1;
            let ps = t * p1 + p0;
            let qs = t * q1 + q0;
            let cand_s = ps as f64 / qs as f64;
            let cand_c = p1 as f64 / q1 as f64;
            if t > 0 && (cand_s - x.abs()).abs() < (cand_c - x.abs()).abs() {
                p1 = ps;
                q1 = qs;
            }
            break;
        }
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        let frac = v - a as f64;
        if frac < 1e-15 {
            break;
        }
        v = 1.0 / frac;
    }
    let q = Rational::new(BigInt::from(p1), BigInt::from(q1));
    if neg {
        -q
    } else {
        q
    }
}

/// Ceiling of a rational as an integer.
pub fn ceil_i64(q: &Rational) -> i64 {
    q.ceil().to_integer().to_i64().expect("ceiling fits in i64")
}

pub fn floor_i64(q: &Rational) -> i64 {
    q.floor().to_integer().to_i64().expect("floor fits in i64")
}

pub fn is_unit(q: &Rational) -> bool {
    q.abs().is_one()
}

/// `serialize_with` helper writing `p/q` strings.
pub fn serialize<S: serde::Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format(q))
}

pub fn serialize_map<S, K>(m: &std::collections::BTreeMap<K, Rational>, s: S) -> Result<S::Ok, S::Error>
where
    S: serde::Serializer,
    K: serde::Serialize,
{
    use serde::ser::SerializeMap;
    let mut out = s.serialize_map(Some(m.len()))?;
    for (k, v) in m {
        out.serialize_entry(k, &format(v))?;
    }
    out.end()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn approximation_recovers_simple_fractions() {
        assert_eq!(approximate(0.5, 1_000_000), r(1, 2));
        assert_eq!(approximate(-1.0 / 3.0 + 1e-13, 1_000_000), r(-1, 3));
        assert_eq!(approximate(std::f64::consts::PI, 7), r(22, 7));
        assert_eq!(approximate(3.0, 10), int(3));
    }

    #[test]
    fn parse_and_format() {
        assert_eq!(parse("3/6").unwrap(), r(1, 2));
        assert_eq!(format(&r(-6, 4)), "-3/2");
        assert_eq!(format(&int(7)), "7");
        assert!(parse("1/0").is_none());
    }
}
