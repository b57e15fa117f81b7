//! Seeded random instance families.

use std::collections::HashSet;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result, RspError};
use crate::graph::{MultiDigraph, VertexId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphKind {
    RandomDigraph,
    RandomDag,
    /// Edges only between consecutive layers of `⌊√n⌋` vertices.
    LayeredDag,
    /// A random Hamiltonian cycle plus random extra edges.
    StronglyConnected,
    /// Edges between horizontal and vertical neighbours of a `⌊√n⌋`-wide grid.
    GridLike,
}

impl FromStr for GraphKind {
    type Err = RspError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "random-digraph" => GraphKind::RandomDigraph,
            "random-dag" => GraphKind::RandomDag,
            "layered-dag" => GraphKind::LayeredDag,
            "strongly-connected" => GraphKind::StronglyConnected,
            "grid-like" => GraphKind::GridLike,
            other => return invalid(format!("unknown graph kind {other:?}")),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenSpec {
    pub kind: GraphKind,
    pub n: usize,
    pub m: usize,
    pub length: (f64, f64),
    pub delay: (f64, f64),
    /// Draw whole numbers from the ranges instead of reals.
    pub integral: bool,
}

impl GenSpec {
    pub fn new(kind: GraphKind, n: usize, m: usize) -> Self {
        GenSpec { kind, n, m, length: (1.0, 10.0), delay: (1.0, 10.0), integral: true }
    }
}

fn layer_width(n: usize) -> usize {
    ((n as f64).sqrt().floor() as usize).max(1)
}

/// Candidate arcs of a family, without the cycle that `StronglyConnected`
/// always includes.
fn candidates(kind: GraphKind, n: usize, order: &[VertexId]) -> Vec<(VertexId, VertexId)> {
    let mut out = Vec::new();
    match kind {
        GraphKind::RandomDigraph | GraphKind::StronglyConnected => {
            for u in 0..n {
                for v in 0..n {
                    if u != v {
                        out.push((u, v));
                    }
                }
            }
        }
        GraphKind::RandomDag => {
            for i in 0..n {
                for j in i + 1..n {
                    out.push((order[i], order[j]));
                }
            }
        }
        GraphKind::LayeredDag => {
            let w = layer_width(n);
            for i in 0..n {
                let next = (i / w + 1) * w;
                for j in next..(next + w).min(n) {
                    out.push((order[i], order[j]));
                }
            }
        }
        GraphKind::GridLike => {
            let w = layer_width(n);
            for v in 0..n {
                if v % w + 1 < w && v + 1 < n {
                    out.push((v, v + 1));
                    out.push((v + 1, v));
                }
                if v + w < n {
                    out.push((v, v + w));
                    out.push((v + w, v));
                }
            }
        }
    }
    out
}

/// Largest edge count the family admits on `n` vertices.
pub fn max_edges(kind: GraphKind, n: usize) -> usize {
    match kind {
        GraphKind::RandomDigraph | GraphKind::StronglyConnected => n * n.saturating_sub(1),
        GraphKind::RandomDag => n * n.saturating_sub(1) / 2,
        GraphKind::LayeredDag | GraphKind::GridLike => candidates(kind, n, &(0..n).collect::<Vec<_>>()).len(),
    }
}

fn draw(rng: &mut impl Rng, (lo, hi): (f64, f64), integral: bool) -> f64 {
    if integral {
        rng.gen_range(lo.ceil() as i64..=hi.floor() as i64) as f64
    } else if lo == hi {
        lo
    } else {
        rng.gen_range(lo..hi)
    }
}

fn check_range(what: &str, (lo, hi): (f64, f64), integral: bool) -> Result<()> {
    if !(lo >= 0.0 && lo <= hi && hi.is_finite()) {
        return invalid(format!("{what} range must satisfy 0 <= lo <= hi"));
    }
    if integral && lo.ceil() > hi.floor() {
        return invalid(format!("{what} range contains no integer"));
    }
    Ok(())
}

pub fn generate(spec: &GenSpec, seed: u64) -> Result<MultiDigraph> {
    let GenSpec { kind, n, m, .. } = *spec;
    check_range("length", spec.length, spec.integral)?;
    check_range("delay", spec.delay, spec.integral)?;
    let cap = max_edges(kind, n);
    let floor = if kind == GraphKind::StronglyConnected && n > 1 { n } else { 0 };
    if m > cap || m < floor {
        return invalid(format!("{kind:?} with n = {n} admits between {floor} and {cap} edges, asked for {m}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<VertexId> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut arcs: Vec<(VertexId, VertexId)> = Vec::with_capacity(m);
    if floor > 0 {
        arcs.extend((0..n).map(|i| (order[i], order[(i + 1) % n])));
    }
    let taken: HashSet<(VertexId, VertexId)> = arcs.iter().copied().collect();
    let wanted = m - arcs.len();
    if kind == GraphKind::RandomDigraph && cap > 1 << 22 && wanted < cap / 2 {
        // Rejection sampling keeps large sparse instances cheap.
        let mut seen = taken;
        while arcs.len() < m {
            let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
            if u != v && seen.insert((u, v)) {
                arcs.push((u, v));
            }
        }
    } else {
        let pool: Vec<_> = candidates(kind, n, &order).into_iter().filter(|a| !taken.contains(a)).collect();
        arcs.extend(pool.choose_multiple(&mut rng, wanted).copied());
    }
    let mut g = MultiDigraph::new(n);
    for (u, v) in arcs {
        let l = draw(&mut rng, spec.length, spec.integral);
        let d = draw(&mut rng, spec.delay, spec.integral);
        g.add_edge(u, v, l, d)?;
    }
    Ok(g)
}
