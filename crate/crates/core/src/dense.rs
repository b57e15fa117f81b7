//! Recursive LDD hierarchy with star shortcuts and a nested topological
//! numbering, giving frequencies `π(uv) = |τ(u) - τ(v)|`.

use rand::Rng;

use crate::dp::FrequencyAssignment;
use crate::error::Result;
use crate::graph::{dijkstra, sccs_filtered, tree_path, tree_path_backward, EdgeId, MultiDigraph, VertexId};
use crate::ldd::{ldd, LddStats, DEFAULT_RADIUS_RATE};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeLabel {
    /// Cut by the LDD at this level.
    Back(u32),
    /// Joins two different SCCs at this level.
    Forward(u32),
    /// Inside an SCC of the last level.
    Bottom,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SccRecord {
    pub level: u32,
    pub vertices: Vec<VertexId>,
    pub center: VertexId,
    pub parent: Option<usize>,
    /// Inclusive range of `τ` values taken by the vertices.
    pub interval: (usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StarEdge {
    pub scc: usize,
    pub from: VertexId,
    pub to: VertexId,
    pub weight: f64,
}

#[derive(Debug, Clone)]
pub struct DenseHierarchy {
    pub levels: u32,
    pub labels: Vec<EdgeLabel>,
    pub tau: Vec<usize>,
    pub sccs: Vec<SccRecord>,
    pub stars: Vec<StarEdge>,
    pub ldd_stats: LddStats,
}

/// Number of levels: all `i >= 1` with `i < log₂ n`.
pub fn level_count(n: usize) -> u32 {
    if n <= 2 {
        0
    } else {
        (n as f64).log2().ceil() as u32 - 1
    }
}

pub fn level_diameter(n: usize, level: u32) -> f64 {
    n as f64 / 2f64.powi(level as i32)
}

/// Builds the hierarchy under the combined weight `ℓ + d` of `g`.
pub fn build_dense_hierarchy(g: &MultiDigraph, rng: &mut impl Rng) -> Result<DenseHierarchy> {
    let n = g.n();
    let mut hier = DenseHierarchy {
        levels: level_count(n),
        labels: vec![EdgeLabel::Bottom; g.m()],
        tau: vec![0; n],
        sccs: Vec::new(),
        stars: Vec::new(),
        ldd_stats: LddStats::default(),
    };
    let all: Vec<VertexId> = (0..n).collect();
    descend(g, &mut hier, all, 1, 1, None, rng)?;
    Ok(hier)
}

fn descend(
    g: &MultiDigraph,
    hier: &mut DenseHierarchy,
    comp: Vec<VertexId>,
    level: u32,
    start: usize,
    parent: Option<usize>,
    rng: &mut impl Rng,
) -> Result<()> {
    if level > hier.levels {
        for (i, &v) in comp.iter().enumerate() {
            hier.tau[v] = start + i;
        }
        return Ok(());
    }
    let d = level_diameter(g.n(), level);
    let (h, emap) = g.induced(&comp);
    let w: Vec<f64> = emap.iter().map(|&e| g.edge(e).combined()).collect();
    let (cut, stats) = ldd(&h, &w, d, DEFAULT_RADIUS_RATE, rng)?;
    add_stats(&mut hier.ldd_stats, stats);
    let mut is_cut = vec![false; h.m()];
    for &e in &cut {
        is_cut[e] = true;
        hier.labels[emap[e]] = EdgeLabel::Back(level);
    }
    let parts = sccs_filtered(&h, |e| !is_cut[e]);
    let mut part_of = vec![0; h.n()];
    for (i, p) in parts.iter().enumerate() {
        for &x in p {
            part_of[x] = i;
        }
    }
    for (e, edge) in h.edges().iter().enumerate() {
        if !is_cut[e] && part_of[edge.from] != part_of[edge.to] {
            hier.labels[emap[e]] = EdgeLabel::Forward(level);
        }
    }
    let mut pos = start;
    for part in parts {
        let vertices: Vec<VertexId> = part.iter().map(|&x| comp[x]).collect();
        let id = hier.sccs.len();
        let center = vertices[0];
        for &v in &vertices[1..] {
            hier.stars.push(StarEdge { scc: id, from: center, to: v, weight: d });
            hier.stars.push(StarEdge { scc: id, from: v, to: center, weight: d });
        }
        let len = vertices.len();
        hier.sccs.push(SccRecord { level, vertices: vertices.clone(), center, parent, interval: (pos, pos + len - 1) });
        descend(g, hier, vertices, level + 1, pos, Some(id), rng)?;
        pos += len;
    }
    Ok(())
}

/// Real path inside `vertices` replacing a star edge between `center` and
/// `other`, shortest under `ℓ + d`. Edge ids refer to `g`.
pub fn expand_star(g: &MultiDigraph, vertices: &[VertexId], center: VertexId, other: VertexId, outward: bool) -> Option<Vec<EdgeId>> {
    let (h, emap) = g.induced(vertices);
    let local = |v: VertexId| vertices.iter().position(|&x| x == v);
    let (c, o) = (local(center)?, local(other)?);
    let (dist, pred) = dijkstra(&h, c, !outward, |_, e| Some(e.combined()));
    if !dist[o].is_finite() {
        return None;
    }
    let path = if outward { tree_path(&h, &pred, o) } else { tree_path_backward(&h, &pred, o) };
    Some(path.into_iter().map(|e| emap[e]).collect())
}

pub(crate) fn add_stats(total: &mut LddStats, s: LddStats) {
    total.carves += s.carves;
    total.exact_checks += s.exact_checks;
    total.searches += s.searches;
}

impl DenseHierarchy {
    /// `g` followed by the star edges; original edge ids are unchanged and
    /// star `i` becomes edge `g.m() + i`.
    pub fn augmented_graph(&self, g: &MultiDigraph) -> Result<MultiDigraph> {
        let mut aug = g.clone();
        for s in &self.stars {
            aug.add_edge(s.from, s.to, s.weight, s.weight)?;
        }
        Ok(aug)
    }

    /// Real path for star edge `index`.
    pub fn expand(&self, g: &MultiDigraph, index: usize) -> Option<Vec<EdgeId>> {
        let star = &self.stars[index];
        let scc = &self.sccs[star.scc];
        let outward = star.from == scc.center;
        let other = if outward { star.to } else { star.from };
        expand_star(g, &scc.vertices, scc.center, other, outward)
    }

    /// `π(uv) = max(1, |τ(u) - τ(v)|)` on the augmented graph.
    pub fn frequencies(&self, aug: &MultiDigraph) -> FrequencyAssignment {
        let values = aug
            .edges()
            .iter()
            .map(|e| Some((self.tau[e.from] as i64 - self.tau[e.to] as i64).unsigned_abs().max(1)))
            .collect();
        FrequencyAssignment { values }
    }

    /// Large SCCs (at least `D_i` vertices) per level, index 0 for level 1.
    pub fn large_counts(&self, n: usize) -> Vec<usize> {
        let mut counts = vec![0; self.levels as usize];
        for c in &self.sccs {
            if c.vertices.len() as f64 >= level_diameter(n, c.level) {
                counts[c.level as usize - 1] += 1;
            }
        }
        counts
    }

    /// Structural checks: `τ` is a permutation, every SCC occupies exactly
    /// its interval, children nest inside parents, and forward edges
    /// increase `τ`.
    pub fn check(&self, g: &MultiDigraph) -> std::result::Result<(), String> {
        let n = g.n();
        let mut seen = vec![false; n + 1];
        for &t in &self.tau {
            if t == 0 || t > n || seen[t] {
                return Err(format!("tau is not a permutation of 1..={n}"));
            }
            seen[t] = true;
        }
        for (i, c) in self.sccs.iter().enumerate() {
            let mut taus: Vec<usize> = c.vertices.iter().map(|&v| self.tau[v]).collect();
            taus.sort_unstable();
            let expect: Vec<usize> = (c.interval.0..=c.interval.1).collect();
            if taus != expect {
                return Err(format!("scc {i} does not occupy its interval"));
            }
            if let Some(p) = c.parent {
                let pi = self.sccs[p].interval;
                if c.interval.0 < pi.0 || c.interval.1 > pi.1 {
                    return Err(format!("scc {i} escapes its parent"));
                }
            }
        }
        for (e, label) in self.labels.iter().enumerate() {
            let edge = g.edge(e);
            if let EdgeLabel::Forward(_) = label {
                if self.tau[edge.from] >= self.tau[edge.to] {
                    return Err(format!("forward edge {e} does not increase tau"));
                }
            }
        }
        for (i, &count) in self.large_counts(n).iter().enumerate() {
            if count as f64 > n as f64 / level_diameter(n, i as u32 + 1) {
                return Err(format!("too many large sccs at level {}", i + 1));
            }
        }
        Ok(())
    }
}
