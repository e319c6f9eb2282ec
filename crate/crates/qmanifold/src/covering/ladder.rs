use serde::Serialize;

use super::{check_supported, norm, CoveringError, LevelPoly};
use crate::algebra::Poly;

/// Scales `K_1 ≤ … ≤ K_{D+1} = K`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScaleLadder {
    pub k: f64,
    pub ap: f64,
    pub levels: Vec<f64>,
}

impl ScaleLadder {
    /// `K_j` for `1 ≤ j ≤ D + 1`.
    pub fn level(&self, j: usize) -> f64 {
        self.levels[j - 1]
    }

    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }
}

/// `K_j = 2^{round(log₂K · (A'+1)^{j−D−1})}` for `j ≤ D`, and `K_{D+1} = K`.
pub fn scale_ladder(k: f64, degree: usize, ap: f64) -> Result<ScaleLadder, CoveringError> {
    let too_small = CoveringError::ScaleTooSmall { k, degree, ap };
    if !(k.is_finite() && ap >= 0.0) || degree == 0 {
        return Err(too_small);
    }
    if k.powf((ap + 1.0).powi(-(degree as i32))) < 2.0 {
        return Err(too_small);
    }
    let lg = k.log2();
    let mut levels: Vec<f64> = (1..=degree)
        .map(|j| 2f64.powi((lg * (ap + 1.0).powi(j as i32 - degree as i32 - 1)).round() as i32))
        .collect();
    levels.push(k);
    Ok(ScaleLadder { k, ap, levels })
}

/// Every chain `α_D = 0 < α_{D−1} < … < α_1` with `|α_j| = D − j`, listed
/// from `j = 1` to `j = D`; each step adds one unit vector.
pub fn chains(d: usize, degree: usize) -> Vec<Vec<Vec<u32>>> {
    let steps = degree.saturating_sub(1);
    let total = d.pow(steps as u32);
    (0..total)
        .map(|mut code| {
            let mut seq = Vec::with_capacity(steps);
            for _ in 0..steps {
                seq.push(code % d);
                code /= d;
            }
            seq.reverse();
            // seq[0] is added first, producing α_{D−1}.
            let mut alpha = vec![0u32; d];
            let mut out = vec![alpha.clone()];
            for &i in &seq {
                alpha[i] += 1;
                out.push(alpha.clone());
            }
            out.reverse();
            out
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainLink {
    pub level: usize,
    pub alpha: Vec<u32>,
    /// `i` with `α_j = α_{j+1} + e_i`; `None` at `j = D`.
    pub coordinate: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PivotChain {
    pub links: Vec<ChainLink>,
    /// Fraction of the check sample not within `K_j^{−A'}` of any level's working set.
    pub miss_rate: f64,
    pub chains_tried: usize,
}

impl PivotChain {
    pub fn alphas(&self) -> Vec<Vec<u32>> {
        self.links.iter().map(|l| l.alpha.clone()).collect()
    }
}

/// Whether `x` lies within `K_j^{−A'}` of `{Q = 0, |∇Q| ≥ 1/K_j}` near the unit cube.
pub(crate) fn near_working_set(q: &LevelPoly, x: &[f64], kj: f64, width: f64, margin: f64) -> bool {
    let Some(y) = q.project(x, 40) else {
        return false;
    };
    if y.iter().any(|&t| t < -margin || t > 1.0 + margin) {
        return false;
    }
    let dist = norm(&x.iter().zip(&y).map(|(a, b)| a - b).collect::<Vec<_>>());
    dist <= width && norm(&q.gradient(&y)) >= 1.0 / kj
}

/// Searches derivative chains of a normalized `p` for one whose working sets
/// capture every check point; the first chain with no misses wins, otherwise
/// the one with the fewest.
pub fn derivative_pivot_search(
    p: &Poly,
    ladder: &ScaleLadder,
    check: &[Vec<f64>],
) -> Result<PivotChain, CoveringError> {
    let (d, degree) = check_supported(p)?;
    let all = chains(d, degree);
    let mut best: Option<(usize, Vec<Vec<u32>>)> = None;
    let mut tried = 0;
    for chain in all {
        tried += 1;
        let polys: Vec<(LevelPoly, f64)> = chain
            .iter()
            .enumerate()
            .map(|(j, a)| (LevelPoly::new(&p.derivative_multi(a)), ladder.level(j + 1)))
            .collect();
        let misses = check
            .iter()
            .filter(|x| {
                !polys
                    .iter()
                    .any(|(q, kj)| !q.poly.is_constant() && near_working_set(q, x, *kj, kj.powf(-ladder.ap), 1.0 / kj))
            })
            .count();
        if best.as_ref().is_none_or(|(m, _)| misses < *m) {
            best = Some((misses, chain));
        }
        if misses == 0 {
            break;
        }
    }
    let (misses, chain) = best.expect("at least one chain");
    let links = chain
        .iter()
        .enumerate()
        .map(|(j, a)| ChainLink {
            level: j + 1,
            alpha: a.clone(),
            coordinate: chain.get(j + 1).and_then(|next| (0..d).find(|&i| a[i] != next[i])),
        })
        .collect();
    Ok(PivotChain {
        links,
        miss_rate: if check.is_empty() {
            0.0
        } else {
            misses as f64 / check.len() as f64
        },
        chains_tried: tried,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ladder_examples() {
        let l = scale_ladder(2f64.powi(24), 2, 1.0).unwrap();
        assert_eq!(l.levels, vec![64.0, 4096.0, 2f64.powi(24)]);
        let l = scale_ladder(1000.0, 1, 2.0).unwrap();
        assert_eq!(l.levels, vec![8.0, 1000.0]);
        let l = scale_ladder(1000.0, 2, 2.0).unwrap();
        assert_eq!(l.levels, vec![2.0, 8.0, 1000.0]);
        assert!(scale_ladder(100.0, 3, 2.0).is_err());
    }

    #[test]
    fn chain_shapes() {
        let c = chains(2, 3);
        assert_eq!(c.len(), 4);
        assert_eq!(c[0], vec![vec![2, 0], vec![1, 0], vec![0, 0]]);
        assert_eq!(c[1], vec![vec![1, 1], vec![1, 0], vec![0, 0]]);
        assert_eq!(chains(3, 1), vec![vec![vec![0, 0, 0]]]);
        for ch in chains(3, 4) {
            for (j, a) in ch.iter().enumerate() {
                assert_eq!(a.iter().sum::<u32>() as usize, 3 - j);
            }
        }
    }
}
