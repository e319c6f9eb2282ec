//! Interval enclosures of polynomials and box rejection by subdivision.

use std::ops::{Add, Mul};

use crate::numeric::FloatPoly;

/// Closed interval `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

/// Relative slack applied to every enclosure to absorb rounding.
const SLACK: f64 = 1e-12;

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi);
        Interval { lo, hi }
    }

    pub fn point(v: f64) -> Self {
        Interval { lo: v, hi: v }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains_zero(&self) -> bool {
        self.lo <= 0.0 && self.hi >= 0.0
    }

    pub fn scale(self, c: f64) -> Self {
        if c >= 0.0 {
            Interval::new(self.lo * c, self.hi * c)
        } else {
            Interval::new(self.hi * c, self.lo * c)
        }
    }

    /// `self^k`, tight for even powers straddling zero.
    pub fn powi(self, k: u32) -> Self {
        if k == 0 {
            return Interval::point(1.0);
        }
        let a = self.lo.powi(k as i32);
        let b = self.hi.powi(k as i32);
        if k % 2 == 1 {
            Interval::new(a, b)
        } else if self.contains_zero() {
            Interval::new(0.0, a.max(b))
        } else {
            Interval::new(a.min(b), a.max(b))
        }
    }

    fn widen(self) -> Self {
        let m = self.lo.abs().max(self.hi.abs());
        let e = SLACK * m + f64::MIN_POSITIVE;
        Interval::new(self.lo - e, self.hi + e)
    }
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, o: Interval) -> Interval {
        Interval::new(self.lo + o.lo, self.hi + o.hi)
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, o: Interval) -> Interval {
        let c = [self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi];
        Interval::new(
            c.iter().copied().fold(f64::INFINITY, f64::min),
            c.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        )
    }
}

/// Natural interval extension of `f` over a box, slightly widened.
pub fn enclose(f: &FloatPoly, bx: &[Interval]) -> Interval {
    let mut acc = Interval::point(0.0);
    for (c, e) in f.terms() {
        let mut t = Interval::point(1.0);
        for &(i, k) in e {
            t = t * bx[i].powi(k);
        }
        acc = acc + t.scale(c);
    }
    acc.widen()
}

/// Outcome of a subdivision run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Subdivision {
    /// Every box was rejected: the cell has no point in the root box.
    pub covered: bool,
    pub boxes: usize,
}

/// Try to show that `{eqs = 0, pos > 0}` has no point in `root` by rejecting
/// sub-boxes whose enclosures exclude a solution.
pub fn reject_box(
    eqs: &[FloatPoly],
    pos: &[FloatPoly],
    root: &[Interval],
    max_boxes: usize,
    min_width: f64,
) -> Subdivision {
    let mut stack = vec![root.to_vec()];
    let mut boxes = 0;
    while let Some(bx) = stack.pop() {
        boxes += 1;
        let rejected =
            eqs.iter().any(|f| !enclose(f, &bx).contains_zero()) || pos.iter().any(|g| enclose(g, &bx).hi <= 0.0);
        if rejected {
            continue;
        }
        let (widest, w) = bx
            .iter()
            .enumerate()
            .map(|(i, iv)| (i, iv.width()))
            .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if boxes >= max_boxes || w < min_width || bx.is_empty() {
            return Subdivision { covered: false, boxes };
        }
        let m = bx[widest].mid();
        let mut left = bx.clone();
        left[widest].hi = m;
        let mut right = bx;
        right[widest].lo = m;
        stack.push(left);
        stack.push(right);
    }
    Subdivision { covered: true, boxes }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::parse_poly;

    fn fp(s: &str, n: usize) -> FloatPoly {
        FloatPoly::from_poly(&parse_poly(s, n).unwrap())
    }

    #[test]
    fn even_powers_are_tight() {
        let x = Interval::new(-2.0, 1.0);
        assert_eq!(x.powi(2), Interval::new(0.0, 4.0));
        assert_eq!(x.powi(3), Interval::new(-8.0, 1.0));
    }

    #[test]
    fn sum_of_squares_plus_one_is_rejected() {
        let root = vec![Interval::new(-4.0, 4.0); 2];
        let s = reject_box(&[fp("x1^2 + x2^2 + 1", 2)], &[], &root, 100, 1e-6);
        assert!(s.covered);
    }

    #[test]
    fn circle_is_not_rejected() {
        let root = vec![Interval::new(-4.0, 4.0); 2];
        let s = reject_box(&[fp("x1^2 + x2^2 - 1", 2)], &[], &root, 2000, 1e-3);
        assert!(!s.covered);
    }
}
