use crate::numeric::FloatPoly;

/// Coefficients in `s` of `t ↦ f(x with x_pivot = center + half·s)`, ascending.
pub fn line_coefficients(f: &FloatPoly, x: &[f64], pivot: usize, center: f64, half: f64) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    for (c, exps) in f.terms() {
        let mut rest = c;
        let mut e_pivot = 0u32;
        for &(i, e) in exps {
            if i == pivot {
                e_pivot = e;
            } else {
                rest *= x[i].powi(e as i32);
            }
        }
        // (center + half·s)^e by the binomial theorem.
        let e = e_pivot as usize;
        if out.len() <= e {
            out.resize(e + 1, 0.0);
        }
        let mut binom = 1.0;
        for k in 0..=e {
            out[k] += rest * binom * center.powi((e - k) as i32) * half.powi(k as i32);
            binom = binom * (e - k) as f64 / (k + 1) as f64;
        }
    }
    if out.is_empty() {
        out.push(0.0);
    }
    out
}

fn horner(c: &[f64], s: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &v| acc * s + v)
}

/// Real roots of `Σ c_k s^k` in `[lo, hi]`, ascending; tangential roots are
/// reported twice. `None` when the polynomial vanishes identically.
pub fn real_roots(c: &[f64], lo: f64, hi: f64) -> Option<Vec<f64>> {
    let scale = c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return None;
    }
    let mut c = c.to_vec();
    while c.len() > 1 && c.last().is_some_and(|v| v.abs() <= 1e-13 * scale) {
        c.pop();
    }
    Some(roots_rec(&c, lo, hi, scale))
}

fn roots_rec(c: &[f64], lo: f64, hi: f64, scale: f64) -> Vec<f64> {
    match c.len() {
        0 | 1 => Vec::new(),
        2 => {
            let r = -c[0] / c[1];
            if (lo..=hi).contains(&r) {
                vec![r]
            } else {
                Vec::new()
            }
        }
        _ => {
            let dc: Vec<f64> = c.iter().enumerate().skip(1).map(|(k, v)| k as f64 * v).collect();
            let crit = roots_rec(&dc, lo, hi, scale);
            let tiny = 1e-12 * scale;
            let mut knots = vec![lo];
            knots.extend(crit.iter().copied().filter(|&t| t > lo && t < hi));
            knots.push(hi);
            let mut out: Vec<f64> = Vec::new();
            for w in knots.windows(2) {
                let (a, b) = (w[0], w[1]);
                let (fa, fb) = (horner(c, a), horner(c, b));
                if fa.abs() <= tiny {
                    out.push(a);
                    if a != lo {
                        // A root at a critical point touches the axis.
                        out.push(a);
                    }
                    continue;
                }
                if fa * fb < 0.0 && fb.abs() > tiny {
                    out.push(bisect(c, a, b, fa));
                }
            }
            if horner(c, hi).abs() <= tiny && out.last().is_none_or(|&r| r != hi) {
                out.push(hi);
            }
            out
        }
    }
}

fn bisect(c: &[f64], mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = horner(c, m);
        if fm == 0.0 {
            return m;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::parse_poly;

    #[test]
    fn roots_of_products() {
        // (s − 0.3)(s + 0.5)(s − 0.9)
        let c = [0.135, -0.33, -0.7, 1.0];
        let r = real_roots(&c, -1.0, 1.0).unwrap();
        assert_eq!(r.len(), 3);
        for (a, b) in r.iter().zip([-0.5, 0.3, 0.9]) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(real_roots(&c, 0.0, 0.5).unwrap().len(), 1);
        // (s − 0.25)² touches once, reported twice.
        assert_eq!(real_roots(&[0.0625, -0.5, 1.0], -1.0, 1.0).unwrap().len(), 2);
        assert!(real_roots(&[1.0, 0.0, 1.0], -2.0, 2.0).unwrap().is_empty());
        assert!(real_roots(&[0.0, 0.0], 0.0, 1.0).is_none());
    }

    #[test]
    fn line_restriction() {
        let f = FloatPoly::from_poly(&parse_poly("x1^2 + x2^2 - 1/4", 2).unwrap());
        // Along x2 at x1 = 0.3, centered at 0.4 with half-width 0.2.
        let c = line_coefficients(&f, &[0.3, 0.0], 1, 0.4, 0.2);
        for s in [-1.0, -0.2, 0.7] {
            assert!((horner(&c, s) - f.eval(&[0.3, 0.4 + 0.2 * s])).abs() < 1e-14);
        }
        let r = real_roots(&c, -1.0, 1.0).unwrap();
        assert_eq!(r.len(), 1);
        assert!((0.4 + 0.2 * r[0] - 0.4).abs() < 1e-12);
    }
}
