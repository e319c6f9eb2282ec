use serde::Serialize;

use super::InvariantError;
use crate::algebra::QuadTuple;
use crate::pencil::{decide, echelon_types, ParamPolyMatrix, PolyMatrix, RankConfig, RankDecision, RankStatus};

/// The pencil `Σ_i Σ_j x_i N_ij(v) M(u) A_j M(u)ᵀ` for every pair of echelon
/// types of `M` (`dp × d`, rank `dp`) and `N` (`np × n`, rank `np`).
///
/// Variables are ordered `u, v, x`.
pub fn d_pencils(t: &QuadTuple, dp: usize, np: usize) -> Result<Vec<ParamPolyMatrix>, InvariantError> {
    let (d, n) = (t.d(), t.n());
    if dp > d || np > n {
        return Err(InvariantError::Range(format!("d'={dp}, n'={np} for d={d}, n={n}")));
    }
    let mats = t.matrices();
    let mut out = Vec::new();
    for mt in echelon_types(dp, d, dp)? {
        for nt in echelon_types(np, n, np)? {
            let a = mt.param_count();
            let b = nt.param_count();
            let nvars = a + b + np;
            let m = mt.symbolic(nvars, 0);
            let nn = nt.symbolic(nvars, a);
            let mtr = m.transpose();
            let blocks: Vec<PolyMatrix> = mats
                .iter()
                .map(|aj| m.mul(&PolyMatrix::from_rat(aj, nvars))?.mul(&mtr))
                .collect::<Result<_, _>>()?;
            let mut r = PolyMatrix::zeros(dp, dp, nvars);
            for i in 0..np {
                let xi = crate::algebra::Poly::var(nvars, a + b + i);
                for (j, bj) in blocks.iter().enumerate() {
                    let coef = &xi * nn.get(i, j);
                    if coef.is_zero() {
                        continue;
                    }
                    for r0 in 0..dp {
                        for c0 in 0..dp {
                            let e = &coef * bj.get(r0, c0);
                            let cur = r.get(r0, c0).clone();
                            r.set(r0, c0, &cur + &e);
                        }
                    }
                }
            }
            out.push(ParamPolyMatrix::new(&r, a + b));
        }
    }
    Ok(out)
}

/// `𝔡_{dp,np}(t)`: the least number of variables after rank-`dp` and
/// rank-`np` changes of variables and of forms.
pub fn d_invariant(
    t: &QuadTuple,
    dp: usize,
    np: usize,
    cfg: &RankConfig,
    seed: u64,
) -> Result<RankDecision, InvariantError> {
    if dp > t.d() || np > t.n() {
        return Err(InvariantError::Range(format!(
            "d'={dp}, n'={np} for d={}, n={}",
            t.d(),
            t.n()
        )));
    }
    if np == 0 || dp == 0 {
        return Ok(RankDecision {
            value: 0,
            status: RankStatus::Exact,
            witness: None,
        });
    }
    let fams = d_pencils(t, dp, np)?;
    Ok(decide(&fams, cfg, seed))
}

#[derive(Clone, Debug, Serialize)]
pub struct DEntry {
    pub dp: usize,
    pub np: usize,
    pub decision: RankDecision,
}

#[derive(Clone, Debug, Serialize)]
pub struct DTable {
    pub tuple: String,
    pub seed: u64,
    pub entries: Vec<DEntry>,
}

impl DTable {
    pub fn get(&self, dp: usize, np: usize) -> Option<&RankDecision> {
        self.entries
            .iter()
            .find(|e| e.dp == dp && e.np == np)
            .map(|e| &e.decision)
    }
}

/// All `𝔡_{d',n'}` for `0 ≤ d' ≤ d`, `0 ≤ n' ≤ n`.
pub fn d_table(t: &QuadTuple, cfg: &RankConfig, seed: u64) -> Result<DTable, InvariantError> {
    use rayon::prelude::*;
    let idx: Vec<(usize, usize)> = (0..=t.d()).flat_map(|dp| (0..=t.n()).map(move |np| (dp, np))).collect();
    let entries = idx
        .par_iter()
        .map(|&(dp, np)| {
            let s = crate::numeric::mix_seed(seed, (dp * 1000 + np) as u64);
            let decision = d_invariant(t, dp, np, cfg, s)?;
            debug_assert!(decision.value <= dp);
            Ok(DEntry { dp, np, decision })
        })
        .collect::<Result<Vec<_>, InvariantError>>()?;
    Ok(DTable {
        tuple: t.to_string(),
        seed,
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rat::int;

    #[test]
    fn positive_definite_in_two_variables() {
        let t = QuadTuple::paraboloid(2);
        let cfg = RankConfig::default();
        assert_eq!(d_invariant(&t, 2, 1, &cfg, 1).unwrap().value, 2);
        let d11 = d_invariant(&t, 1, 1, &cfg, 1).unwrap();
        assert_eq!(d11.value, 1);
        assert!(d11.witness.is_some());
        assert_eq!(d_invariant(&t, 2, 0, &cfg, 1).unwrap().value, 0);
    }

    #[test]
    fn hyperbolic_pair_drops() {
        // ξ1² − ξ2² vanishes on the line ξ1 = ξ2.
        let t = QuadTuple::diagonal(&[vec![int(1), int(-1)]]).unwrap();
        let d = d_invariant(&t, 1, 1, &RankConfig::default(), 2).unwrap();
        assert_eq!(d.value, 0);
        assert_eq!(d.status, RankStatus::Exact);
    }
}
