use std::collections::HashMap;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::graph::{extract_graph, RegularGraph};
use super::ladder::{derivative_pivot_search, scale_ladder, PivotChain, ScaleLadder};
use super::univariate::{line_coefficients, real_roots};
use super::{check_supported, norm, CoveringConfig, CoveringError, LevelPoly};
use crate::algebra::Poly;
use crate::numeric::{child_rng, mix_seed, FloatPoly};

const CHUNK: u64 = 1 << 14;
const CHUNKS_PER_BATCH: u64 = 64;

/// Points drawn uniformly from `{|f| < threshold} ∩ [0,1]^d` by rejection.
#[derive(Clone, Debug)]
pub struct Sublevel {
    pub points: Vec<Vec<f64>>,
    pub proposals: u64,
}

/// Rejection sampling in fixed-size chunks, each with its own seeded stream,
/// so the result depends only on `seed`.
pub fn sample_sublevel(f: &FloatPoly, threshold: f64, n: usize, seed: u64, max_proposals: u64) -> Sublevel {
    let d = f.nvars();
    let mut points = Vec::with_capacity(n);
    let mut next_chunk = 0u64;
    while points.len() < n && next_chunk * CHUNK < max_proposals {
        let batch: Vec<Vec<Vec<f64>>> = (next_chunk..next_chunk + CHUNKS_PER_BATCH)
            .into_par_iter()
            .map(|c| {
                let mut rng = child_rng(seed, c);
                let mut hits = Vec::new();
                let mut x = vec![0.0; d];
                for _ in 0..CHUNK {
                    x.iter_mut().for_each(|t| *t = rng.gen::<f64>());
                    if f.eval(&x).abs() < threshold {
                        hits.push(x.clone());
                    }
                }
                hits
            })
            .collect();
        for hits in batch {
            next_chunk += 1;
            for h in hits {
                if points.len() < n {
                    points.push(h);
                }
            }
            if points.len() >= n {
                break;
            }
        }
    }
    Sublevel {
        points,
        proposals: next_chunk * CHUNK,
    }
}

/// Graphs at one scale of the ladder, indexed by pivot axis and base cell.
#[derive(Clone, Debug)]
pub struct Level {
    pub j: usize,
    pub kj: f64,
    pub alpha: Vec<u32>,
    pub q: LevelPoly,
    /// Neighborhood width `K_j^{−A'}`.
    pub width: f64,
    /// Nominal base side `(c_base K_j)⁻¹`.
    pub rho: f64,
    pub net_points: usize,
    pub graphs: Vec<RegularGraph>,
    pub failures: usize,
    index: HashMap<(usize, Vec<i64>), Vec<usize>>,
}

impl Level {
    fn cell(&self, x: &[f64], pivot: usize) -> Vec<i64> {
        x.iter()
            .enumerate()
            .filter(|&(i, _)| i != pivot)
            .map(|(_, &t)| (t / self.rho).floor() as i64)
            .collect()
    }

    /// Indices of graphs whose box contains `x`.
    pub fn containing(&self, x: &[f64]) -> Vec<usize> {
        let d = x.len();
        let mut out = Vec::new();
        for pivot in 0..d {
            let base = self.cell(x, pivot);
            for offs in neighbor_offsets(d - 1) {
                let key: Vec<i64> = base.iter().zip(&offs).map(|(a, b)| a + b).collect();
                if let Some(ids) = self.index.get(&(pivot, key)) {
                    out.extend(ids.iter().copied().filter(|&g| self.graphs[g].contains(x)));
                }
            }
        }
        out
    }

    /// Whether `x` is within `scale · K_j^{−A'}` of a graph inside a box holding it.
    pub fn covers(&self, x: &[f64], scale: f64) -> bool {
        self.containing(x).into_iter().any(|g| {
            self.graphs[g]
                .vertical_distance(&self.q, x)
                .is_some_and(|dist| dist <= scale * self.width)
        })
    }
}

fn neighbor_offsets(k: usize) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|v| {
                (-1..=1).map(move |o| {
                    let mut w = v.clone();
                    w.push(o);
                    w
                })
            })
            .collect();
    }
    out
}

fn base_grid(k: usize, sep: f64) -> Vec<Vec<f64>> {
    let n = (1.0 / sep).ceil() as usize;
    let ticks: Vec<f64> = (0..=n).map(|i| (i as f64 * sep).min(1.0)).collect();
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|v| {
                ticks.iter().map(move |&t| {
                    let mut w = v.clone();
                    w.push(t);
                    w
                })
            })
            .collect();
    }
    out
}

/// Working-set points on pivot lines through a base grid of spacing `sep`,
/// thinned greedily to a `sep`-separated set.
fn level_net(q: &LevelPoly, kj: f64, sep: f64, margin: f64) -> Vec<(Vec<f64>, usize)> {
    let d = q.d();
    let sd = (d as f64).sqrt();
    let grid = base_grid(d - 1, sep);
    let mut candidates: Vec<(Vec<f64>, usize)> = Vec::new();
    for pivot in 0..d {
        let found: Vec<Vec<(Vec<f64>, usize)>> = grid
            .par_iter()
            .map(|b| {
                let mut x = vec![0.0; d];
                let mut it = b.iter();
                for (i, xi) in x.iter_mut().enumerate() {
                    if i != pivot {
                        *xi = *it.next().expect("base coordinate");
                    }
                }
                let half = 0.5 + margin;
                let c = line_coefficients(&q.f, &x, pivot, 0.5, half);
                let mut hits = Vec::new();
                for s in real_roots(&c, -1.0, 1.0).unwrap_or_default() {
                    let mut p = x.clone();
                    p[pivot] = 0.5 + half * s;
                    let g = q.gradient(&p);
                    let gn = norm(&g);
                    if gn >= 1.0 / kj && g[pivot].abs() >= gn / sd {
                        hits.push((p, pivot));
                    }
                }
                hits
            })
            .collect();
        candidates.extend(found.into_iter().flatten());
    }
    let mut cells: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    let mut net: Vec<(Vec<f64>, usize)> = Vec::new();
    let offsets = neighbor_offsets(d);
    for (p, pivot) in candidates {
        let cell: Vec<i64> = p.iter().map(|t| (t / sep).floor() as i64).collect();
        let close = offsets.iter().any(|o| {
            let key: Vec<i64> = cell.iter().zip(o).map(|(a, b)| a + b).collect();
            cells.get(&key).is_some_and(|ids| {
                ids.iter().any(|&i| {
                    let dist: f64 = net[i].0.iter().zip(&p).map(|(a, b)| (a - b) * (a - b)).sum();
                    dist.sqrt() < sep
                })
            })
        });
        if !close {
            cells.entry(cell).or_default().push(net.len());
            net.push((p, pivot));
        }
    }
    net
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn build_level(
    q: LevelPoly,
    alpha: Vec<u32>,
    j: usize,
    kj: f64,
    ap: f64,
    degree: usize,
    cfg: &CoveringConfig,
) -> Level {
    let d = q.d();
    let rho = 1.0 / (cfg.c_base_for(d) * kj);
    let mut level = Level {
        j,
        kj,
        alpha,
        width: kj.powf(-ap),
        rho,
        net_points: 0,
        graphs: Vec::new(),
        failures: 0,
        index: HashMap::new(),
        q,
    };
    if level.q.poly.is_constant() {
        return level;
    }
    let net = level_net(&level.q, kj, cfg.net_fraction * rho, rho);
    level.net_points = net.len();
    let results: Vec<_> = net
        .par_iter()
        .map(|(p, pivot)| extract_graph(&level.q, p, kj, *pivot, j, degree, cfg))
        .collect();
    for r in results {
        match r {
            Ok(g) => level.graphs.push(g),
            Err(_) => level.failures += 1,
        }
    }
    for (id, g) in level.graphs.iter().enumerate() {
        let key = (g.pivot, level.cell(&g.center, g.pivot));
        level.index.entry(key).or_default().push(id);
    }
    level
}

#[derive(Clone, Debug, Serialize)]
pub struct LevelReport {
    pub j: usize,
    pub k_j: f64,
    pub alpha: Vec<u32>,
    pub polynomial: String,
    /// `K_j^{−A'}`.
    pub width: f64,
    pub rho: f64,
    pub tall_side: f64,
    pub side_ratio: f64,
    pub net_points: usize,
    pub graphs: usize,
    pub extraction_failures: usize,
    pub max_effective_c: f64,
    pub hits: usize,
    pub max_overlap: usize,
    /// `[pivot, center…, rho, tall_half]` per box, up to the configured cap.
    pub boxes: Vec<Vec<f64>>,
    pub boxes_truncated: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CoverageStats {
    pub samples: usize,
    pub proposals: u64,
    pub threshold: f64,
    pub covered: usize,
    pub fraction: f64,
    pub uncovered_examples: Vec<Vec<f64>>,
    pub overlap_bound: f64,
    pub overlap_ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct AuditSummary {
    pub graphs: usize,
    pub passing: usize,
    pub grad_failures: usize,
    pub pivot_failures: usize,
    pub hessian_failures: usize,
    pub strong_failures: usize,
    pub weak_failures: usize,
    pub max_grad: f64,
    pub min_pivot_ratio: f64,
    pub max_second: f64,
}

impl AuditSummary {
    pub fn all_pass(&self) -> bool {
        self.passing == self.graphs
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CoveringReport {
    pub polynomial: String,
    pub d: usize,
    pub degree: usize,
    pub k: f64,
    pub ap: f64,
    pub seed: u64,
    pub c_base: f64,
    pub c_regular: f64,
    pub lambda: u32,
    pub ladder: ScaleLadder,
    pub chain: PivotChain,
    pub levels: Vec<LevelReport>,
    pub coverage: CoverageStats,
    pub audit: AuditSummary,
}

/// A finished covering: the serializable report plus the graphs and the
/// verification sample it was measured on.
#[derive(Clone, Debug)]
pub struct Covering {
    pub report: CoveringReport,
    pub levels: Vec<Level>,
    pub samples: Vec<Vec<f64>>,
}

impl Covering {
    /// First level whose graph neighborhoods, widened by `scale`, hold `x`.
    pub fn covering_level(&self, x: &[f64], scale: f64) -> Option<usize> {
        self.levels.iter().find(|l| l.covers(x, scale)).map(|l| l.j)
    }

    /// Covered fraction of the verification sample at neighborhood scale `scale`.
    pub fn covered_fraction(&self, scale: f64) -> f64 {
        if self.samples.is_empty() {
            return 1.0;
        }
        let hit = self
            .samples
            .par_iter()
            .filter(|x| self.covering_level(x, scale).is_some())
            .count();
        hit as f64 / self.samples.len() as f64
    }
}

pub const MAX_REPORTED_BOXES: usize = 20_000;

/// Covers `{|P| < 1/K} ∩ [0,1]^d`, `P` normalized to unit coefficient sum,
/// and measures the covered fraction on `samples` seeded points.
pub fn cover_sublevel(
    p: &Poly,
    k: f64,
    ap: f64,
    samples: usize,
    seed: u64,
    cfg: &CoveringConfig,
) -> Result<Covering, CoveringError> {
    let (d, degree) = check_supported(p)?;
    let pn = p.normalize()?;
    let ladder = scale_ladder(k, degree, ap)?;
    let f = FloatPoly::from_poly(&pn);
    let threshold = 1.0 / k;
    let check = sample_sublevel(&f, threshold, cfg.chain_samples, mix_seed(seed, 1), cfg.max_proposals);
    let verify = sample_sublevel(&f, threshold, samples, mix_seed(seed, 2), cfg.max_proposals);
    if verify.points.is_empty() {
        return Err(CoveringError::EmptySublevel {
            proposals: verify.proposals,
        });
    }
    let chain = derivative_pivot_search(&pn, &ladder, &check.points)?;
    let levels: Vec<Level> = chain
        .links
        .iter()
        .map(|link| {
            let q = LevelPoly::new(&pn.derivative_multi(&link.alpha));
            build_level(
                q,
                link.alpha.clone(),
                link.level,
                ladder.level(link.level),
                ap,
                degree,
                cfg,
            )
        })
        .collect();

    let per_sample: Vec<(Option<usize>, Vec<usize>)> = verify
        .points
        .par_iter()
        .map(|x| {
            let overlaps: Vec<usize> = levels.iter().map(|l| l.containing(x).len()).collect();
            let hit = levels.iter().position(|l| l.covers(x, 1.0));
            (hit, overlaps)
        })
        .collect();
    let mut hits = vec![0usize; levels.len()];
    let mut max_overlap = vec![0usize; levels.len()];
    let mut uncovered_examples = Vec::new();
    let mut covered = 0;
    for ((hit, overlaps), x) in per_sample.iter().zip(&verify.points) {
        match hit {
            Some(l) => {
                covered += 1;
                hits[*l] += 1;
            }
            None if uncovered_examples.len() < 10 => uncovered_examples.push(x.clone()),
            None => {}
        }
        for (m, o) in max_overlap.iter_mut().zip(overlaps) {
            *m = (*m).max(*o);
        }
    }
    let overlap_bound = 1000f64.powi(d as i32);

    let all_graphs = levels.iter().flat_map(|l| l.graphs.iter());
    let mut audit = AuditSummary {
        graphs: 0,
        passing: 0,
        grad_failures: 0,
        pivot_failures: 0,
        hessian_failures: 0,
        strong_failures: 0,
        weak_failures: 0,
        max_grad: 0.0,
        min_pivot_ratio: f64::INFINITY,
        max_second: 0.0,
    };
    for g in all_graphs {
        let a = &g.audit;
        audit.graphs += 1;
        audit.passing += a.passes() as usize;
        audit.grad_failures += !a.grad_ok() as usize;
        audit.pivot_failures += !a.pivot_ok() as usize;
        audit.hessian_failures += !a.hessian_ok() as usize;
        audit.strong_failures += !a.strong_ok() as usize;
        audit.weak_failures += !a.weak_ok() as usize;
        audit.max_grad = audit.max_grad.max(a.max_grad);
        audit.min_pivot_ratio = audit.min_pivot_ratio.min(a.min_pivot_deriv / a.pivot_bound);
        audit.max_second = audit.max_second.max(a.max_second);
    }

    let level_reports = levels
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let tall_side = d as f64 * cfg.c_regular * l.rho;
            LevelReport {
                j: l.j,
                k_j: l.kj,
                alpha: l.alpha.clone(),
                polynomial: l.q.poly.to_string(),
                width: l.width,
                rho: l.rho,
                tall_side,
                side_ratio: tall_side / l.rho,
                net_points: l.net_points,
                graphs: l.graphs.len(),
                extraction_failures: l.failures,
                max_effective_c: l.graphs.iter().map(|g| g.effective_c).fold(0.0, f64::max),
                hits: hits[i],
                max_overlap: max_overlap[i],
                boxes: l
                    .graphs
                    .iter()
                    .take(MAX_REPORTED_BOXES)
                    .map(|g| {
                        std::iter::once(g.pivot as f64)
                            .chain(g.center.iter().copied())
                            .chain([g.rho, g.tall_half])
                            .collect()
                    })
                    .collect(),
                boxes_truncated: l.graphs.len() > MAX_REPORTED_BOXES,
            }
        })
        .collect();

    let n = verify.points.len();
    let report = CoveringReport {
        polynomial: pn.to_string(),
        d,
        degree,
        k,
        ap,
        seed,
        c_base: cfg.c_base_for(d),
        c_regular: cfg.c_regular,
        lambda: cfg.lambda,
        ladder,
        chain,
        levels: level_reports,
        coverage: CoverageStats {
            samples: n,
            proposals: verify.proposals,
            threshold,
            covered,
            fraction: covered as f64 / n as f64,
            uncovered_examples,
            overlap_bound,
            overlap_ok: max_overlap.iter().all(|&m| (m as f64) <= overlap_bound),
        },
        audit,
    };
    Ok(Covering {
        report,
        levels,
        samples: verify.points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::parse_poly;

    #[test]
    fn sampling_is_deterministic_and_inside() {
        let f = FloatPoly::from_poly(&parse_poly("x1 - x2", 2).unwrap());
        let a = sample_sublevel(&f, 0.01, 500, 9, 1 << 30);
        let b = sample_sublevel(&f, 0.01, 500, 9, 1 << 30);
        assert_eq!(a.points, b.points);
        assert_eq!(a.points.len(), 500);
        assert!(a.points.iter().all(|x| (x[0] - x[1]).abs() < 0.01));
    }

    #[test]
    fn slab_is_covered_by_one_level() {
        let p = parse_poly("x1 + x2 - 1", 2).unwrap();
        let c = cover_sublevel(&p, 1000.0, 2.0, 2000, 3, &CoveringConfig::default()).unwrap();
        assert_eq!(c.report.ladder.levels.len(), 2);
        assert_eq!(c.report.chain.links.len(), 1);
        assert_eq!(c.report.coverage.fraction, 1.0);
        assert!(c.report.audit.all_pass());
        assert!(c.report.levels.iter().all(|l| l.side_ratio == 16.0));
        for l in &c.levels {
            for g in &l.graphs {
                assert!((2.0 * g.tall_half / g.rho - 2.0 * 8.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn wider_neighborhoods_cover_more() {
        let p = parse_poly("x1^2 + x2^2 - 1/4", 2).unwrap();
        let c = cover_sublevel(&p, 1000.0, 2.0, 3000, 5, &CoveringConfig::default()).unwrap();
        let fr: Vec<f64> = [0.01, 0.1, 0.5, 1.0, 2.0]
            .iter()
            .map(|&s| c.covered_fraction(s))
            .collect();
        assert!(fr.windows(2).all(|w| w[0] <= w[1]), "{fr:?}");
        assert_eq!(fr[3], c.report.coverage.fraction);
    }
}
