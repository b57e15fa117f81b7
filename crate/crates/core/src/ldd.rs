//! Low-diameter decomposition of directed graphs by recursive ball carving.
//!
//! Removing the returned edge set leaves strongly connected components whose
//! internal distances are at most `D`. Each edge is cut with probability
//! roughly proportional to its weight over `D`, up to a polylogarithmic
//! factor.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};
use crate::graph::{dijkstra, sccs, sccs_filtered, EdgeId, MultiDigraph, VertexId};

/// Radius rate multiplier: radii are exponential with mean `D / (c ln n)`.
pub const DEFAULT_RADIUS_RATE: f64 = 4.0;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LddStats {
    pub carves: u64,
    pub exact_checks: u64,
    pub searches: u64,
}

/// `ℓ + d` per edge.
pub fn combined_weights(g: &MultiDigraph) -> Vec<f64> {
    g.edges().iter().map(|e| e.combined()).collect()
}

/// Polylogarithmic overhead factor in the hitting bound, `log₂³ n`.
pub fn hitting_overhead(n: usize) -> f64 {
    (n.max(2) as f64).log2().powi(3)
}

fn eccentricities(h: &MultiDigraph, w: &[f64], v: VertexId, stats: &mut LddStats) -> (Vec<f64>, Vec<f64>) {
    stats.searches += 2;
    let (out, _) = dijkstra(h, v, false, |e, _| Some(w[e]));
    let (inn, _) = dijkstra(h, v, true, |e, _| Some(w[e]));
    (out, inn)
}

fn max_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(0.0, f64::max)
}

/// Largest pairwise distance inside a strongly connected graph.
pub fn exact_diameter(h: &MultiDigraph, w: &[f64]) -> f64 {
    (0..h.n())
        .map(|v| max_of(&dijkstra(h, v, false, |e, _| Some(w[e])).0))
        .fold(0.0, f64::max)
}

/// Edge set `B` (sorted ids) such that every SCC of `G \ B` has diameter at
/// most `d` under `weights`, measured in `G \ B`.
pub fn ldd(g: &MultiDigraph, weights: &[f64], d: f64, radius_rate: f64, rng: &mut impl Rng) -> Result<(Vec<EdgeId>, LddStats)> {
    if weights.len() != g.m() {
        return invalid("weight vector does not match the edge count");
    }
    if !(d > 0.0 && d.is_finite()) {
        return invalid(format!("diameter bound must be positive, got {d}"));
    }
    if !(radius_rate > 0.0) {
        return invalid("radius rate must be positive");
    }
    let rate = radius_rate * (g.n().max(2) as f64).ln() / d;
    let mut stats = LddStats::default();
    let mut cut = Vec::new();
    let mut tasks: Vec<Vec<VertexId>> = sccs(g).into_iter().filter(|c| c.len() > 1).collect();
    tasks.reverse();
    while let Some(comp) = tasks.pop() {
        let (h, emap) = g.induced(&comp);
        let w: Vec<f64> = emap.iter().map(|&e| weights[e]).collect();
        let v = rng.gen_range(0..comp.len());
        let (dout, din) = eccentricities(&h, &w, v, &mut stats);
        let (r_out, r_in) = (max_of(&dout), max_of(&din));
        if r_out + r_in <= d {
            continue;
        }
        if r_out.max(r_in) <= d {
            stats.exact_checks += 1;
            if exact_diameter(&h, &w) <= d {
                continue;
            }
        }
        stats.carves += 1;
        let outward = match (r_out > d / 2.0, r_in > d / 2.0) {
            (true, true) => rng.gen_bool(0.5),
            (o, _) => o,
        };
        let sample = -(1.0 - rng.gen::<f64>()).ln() / rate;
        let radius = sample.min(0.5 * d * (1.0 - 1e-12));
        let dist = if outward { &dout } else { &din };
        let in_ball: Vec<bool> = dist.iter().map(|&x| x <= radius).collect();
        for (e, edge) in h.edges().iter().enumerate() {
            let crosses = if outward {
                in_ball[edge.from] && !in_ball[edge.to]
            } else {
                !in_ball[edge.from] && in_ball[edge.to]
            };
            if crosses {
                cut.push(emap[e]);
            }
        }
        for side in [true, false] {
            let part: Vec<VertexId> = (0..comp.len()).filter(|&x| in_ball[x] == side).collect();
            let (sub, _) = h.induced(&part);
            for c in sccs(&sub) {
                if c.len() > 1 {
                    tasks.push(c.iter().map(|&x| comp[part[x]]).collect());
                }
            }
        }
    }
    cut.sort_unstable();
    Ok((cut, stats))
}

/// LDD under the combined weight `ℓ + d`.
pub fn ldd_combined(g: &MultiDigraph, d: f64, rng: &mut impl Rng) -> Result<Vec<EdgeId>> {
    Ok(ldd(g, &combined_weights(g), d, DEFAULT_RADIUS_RATE, rng)?.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiameterViolation {
    pub from: VertexId,
    pub to: VertexId,
    pub distance: f64,
}

/// Checks that every SCC of `G \ cut` has internal distances at most `d`.
pub fn verify_bounded_diameter(g: &MultiDigraph, weights: &[f64], cut: &[EdgeId], d: f64) -> std::result::Result<(), DiameterViolation> {
    let mut removed = vec![false; g.m()];
    for &e in cut {
        removed[e] = true;
    }
    let mut comp_of = vec![usize::MAX; g.n()];
    let comps = sccs_filtered(g, |e| !removed[e]);
    for (i, c) in comps.iter().enumerate() {
        for &v in c {
            comp_of[v] = i;
        }
    }
    for c in comps.iter().filter(|c| c.len() > 1) {
        for &u in c {
            let (dist, _) = dijkstra(g, u, false, |e, edge| {
                (!removed[e] && comp_of[edge.from] == comp_of[edge.to]).then_some(weights[e])
            });
            for &v in c {
                if dist[v] > d * (1.0 + 1e-9) {
                    return Err(DiameterViolation { from: u, to: v, distance: dist[v] });
                }
            }
        }
    }
    Ok(())
}

/// Empirical probability that each edge is cut, over `trials` seeded runs.
pub fn estimate_hitting_rate(g: &MultiDigraph, weights: &[f64], d: f64, trials: usize, seed: u64) -> Result<Vec<f64>> {
    let mut hits = vec![0usize; g.m()];
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(master.gen());
        for e in ldd(g, weights, d, DEFAULT_RADIUS_RATE, &mut rng)?.0 {
            hits[e] += 1;
        }
    }
    Ok(hits.iter().map(|&h| h as f64 / trials.max(1) as f64).collect())
}
