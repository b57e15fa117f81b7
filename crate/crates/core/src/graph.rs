//! Directed multigraphs with a length and a delay on every edge.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Result, RspError};

pub type VertexId = usize;
pub type EdgeId = usize;

/// Saturating infinity used for unreachable distances.
pub const INF: f64 = f64::INFINITY;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub from: VertexId,
    pub to: VertexId,
    pub length: f64,
    pub delay: f64,
}

impl Edge {
    pub fn combined(&self) -> f64 {
        self.length + self.delay
    }
}

/// Edge ids are dense indices in insertion order and are stable across
/// reversal and reweighting.
#[derive(Debug, Clone, Default)]
pub struct MultiDigraph {
    n: usize,
    edges: Vec<Edge>,
    out_adj: Vec<Vec<EdgeId>>,
    in_adj: Vec<Vec<EdgeId>>,
}

fn check_weight(edge: usize, what: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(RspError::BadWeight { edge, what, value })
    }
}

impl MultiDigraph {
    pub fn new(n: usize) -> Self {
        MultiDigraph {
            n,
            edges: Vec::new(),
            out_adj: vec![Vec::new(); n],
            in_adj: vec![Vec::new(); n],
        }
    }

    pub fn from_edges(n: usize, edges: &[(VertexId, VertexId, f64, f64)]) -> Result<Self> {
        let mut g = MultiDigraph::new(n);
        for &(u, v, l, d) in edges {
            g.add_edge(u, v, l, d)?;
        }
        Ok(g)
    }

    pub fn add_edge(&mut self, from: VertexId, to: VertexId, length: f64, delay: f64) -> Result<EdgeId> {
        let id = self.edges.len();
        for vertex in [from, to] {
            if vertex >= self.n {
                return Err(RspError::VertexOutOfRange { vertex, n: self.n });
            }
        }
        check_weight(id, "length", length)?;
        check_weight(id, "delay", delay)?;
        self.edges.push(Edge { from, to, length, delay });
        self.out_adj[from].push(id);
        self.in_adj[to].push(id);
        Ok(id)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn out_edges(&self, v: VertexId) -> &[EdgeId] {
        &self.out_adj[v]
    }

    pub fn in_edges(&self, v: VertexId) -> &[EdgeId] {
        &self.in_adj[v]
    }

    /// Same edge ids, every edge flipped.
    pub fn reverse(&self) -> MultiDigraph {
        let mut g = MultiDigraph::new(self.n);
        for e in &self.edges {
            g.add_edge(e.to, e.from, e.length, e.delay).expect("valid edge");
        }
        g
    }

    /// Same edge ids with weights replaced by `f(edge) -> (length, delay)`.
    pub fn map_weights(&self, mut f: impl FnMut(EdgeId, &Edge) -> (f64, f64)) -> Result<MultiDigraph> {
        let mut g = MultiDigraph::new(self.n);
        for (id, e) in self.edges.iter().enumerate() {
            let (l, d) = f(id, e);
            g.add_edge(e.from, e.to, l, d)?;
        }
        Ok(g)
    }

    /// Subgraph induced by `vertices`, renumbered in the given order.
    /// Returns the subgraph and the original id of each retained edge.
    pub fn induced(&self, vertices: &[VertexId]) -> (MultiDigraph, Vec<EdgeId>) {
        let mut local = vec![usize::MAX; self.n];
        for (i, &v) in vertices.iter().enumerate() {
            local[v] = i;
        }
        let mut g = MultiDigraph::new(vertices.len());
        let mut map = Vec::new();
        for &v in vertices {
            for &e in &self.out_adj[v] {
                let edge = &self.edges[e];
                if local[edge.to] != usize::MAX {
                    g.add_edge(local[v], local[edge.to], edge.length, edge.delay)
                        .expect("valid edge");
                    map.push(e);
                }
            }
        }
        (g, map)
    }

    pub fn min_positive_length(&self) -> Option<f64> {
        self.edges
            .iter()
            .map(|e| e.length)
            .filter(|&l| l > 0.0)
            .min_by(|a, b| a.total_cmp(b))
    }

    /// Ratio of the largest to the smallest positive edge length; 1 when
    /// there are no positive lengths.
    pub fn aspect_ratio(&self) -> f64 {
        let positive = self.edges.iter().map(|e| e.length).filter(|&l| l > 0.0);
        let (mut lo, mut hi) = (INF, 0.0f64);
        for l in positive {
            lo = lo.min(l);
            hi = hi.max(l);
        }
        if hi == 0.0 {
            1.0
        } else {
            hi / lo
        }
    }

    pub fn path_length(&self, path: &[EdgeId]) -> f64 {
        path.iter().fold(0.0, |acc, &e| acc + self.edges[e].length)
    }

    pub fn path_delay(&self, path: &[EdgeId]) -> f64 {
        path.iter().fold(0.0, |acc, &e| acc + self.edges[e].delay)
    }

    /// Checks that `path` is a contiguous walk from `s` (to `t`, if given).
    pub fn is_walk(&self, s: VertexId, t: Option<VertexId>, path: &[EdgeId]) -> bool {
        let mut at = s;
        for &e in path {
            if e >= self.edges.len() || self.edges[e].from != at {
                return false;
            }
            at = self.edges[e].to;
        }
        t.is_none_or(|t| t == at)
    }
}

/// Weak dominance on (length, delay): `a` is at least as good in both.
pub fn dominates(a: (f64, f64), b: (f64, f64)) -> bool {
    a.0 <= b.0 && a.1 <= b.1
}

/// Pareto-minimal (length, delay) points, sorted by increasing delay and
/// strictly decreasing length. Duplicates collapse.
pub fn pareto_frontier(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut pts: Vec<(f64, f64)> = points.to_vec();
    pts.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.total_cmp(&b.0)));
    let mut out: Vec<(f64, f64)> = Vec::new();
    for p in pts {
        if out.last().is_none_or(|last| p.0 < last.0) {
            out.push(p);
        }
    }
    out
}

/// Strongly connected components in topological order of the condensation
/// (every edge between components goes from an earlier to a later one).
/// Only edges accepted by `keep` are used; each component lists its
/// vertices in increasing order.
pub fn sccs_filtered(g: &MultiDigraph, keep: impl Fn(EdgeId) -> bool) -> Vec<Vec<VertexId>> {
    let n = g.n();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comps = Vec::new();
    let mut next = 0;
    // (vertex, position in its out-edge list)
    let mut call: Vec<(VertexId, usize)> = Vec::new();
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        call.push((root, 0));
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(top) = call.last_mut() {
            let v = top.0;
            let out = g.out_edges(v);
            if top.1 < out.len() {
                let e = out[top.1];
                top.1 += 1;
                if !keep(e) {
                    continue;
                }
                let w = g.edge(e).to;
                if index[w] == usize::MAX {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack");
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    comps.push(comp);
                }
            }
        }
    }
    comps.reverse();
    comps
}

pub fn sccs(g: &MultiDigraph) -> Vec<Vec<VertexId>> {
    sccs_filtered(g, |_| true)
}

/// A topological order of the vertices, or `None` if the graph has a cycle.
pub fn topological_order(g: &MultiDigraph) -> Option<Vec<VertexId>> {
    let mut indeg: Vec<usize> = (0..g.n()).map(|v| g.in_edges(v).len()).collect();
    let mut queue: std::collections::VecDeque<VertexId> = (0..g.n()).filter(|&v| indeg[v] == 0).collect();
    let mut order = Vec::with_capacity(g.n());
    while let Some(v) = queue.pop_front() {
        order.push(v);
        for &e in g.out_edges(v) {
            let w = g.edge(e).to;
            indeg[w] -= 1;
            if indeg[w] == 0 {
                queue.push_back(w);
            }
        }
    }
    (order.len() == g.n()).then_some(order)
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct HeapItem(f64, VertexId);

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Single-source shortest paths under a non-negative edge weight. Edges for
/// which `weight` returns `None` are ignored. With `backward` the search runs
/// along reversed edges, giving distances *to* `source`.
/// Returns distances and the tree edge into each reached vertex.
pub fn dijkstra(
    g: &MultiDigraph,
    source: VertexId,
    backward: bool,
    weight: impl Fn(EdgeId, &Edge) -> Option<f64>,
) -> (Vec<f64>, Vec<Option<EdgeId>>) {
    let mut dist = vec![INF; g.n()];
    let mut pred = vec![None; g.n()];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(HeapItem(0.0, source));
    while let Some(HeapItem(d, v)) = heap.pop() {
        if d > dist[v] {
            continue;
        }
        let adj = if backward { g.in_edges(v) } else { g.out_edges(v) };
        for &e in adj {
            let edge = g.edge(e);
            let Some(w) = weight(e, edge) else { continue };
            let next = if backward { edge.from } else { edge.to };
            let nd = d + w;
            if nd < dist[next] {
                dist[next] = nd;
                pred[next] = Some(e);
                heap.push(HeapItem(nd, next));
            }
        }
    }
    (dist, pred)
}

/// Walks tree edges from `t` back to the root of a forward search.
pub fn tree_path(g: &MultiDigraph, pred: &[Option<EdgeId>], t: VertexId) -> Vec<EdgeId> {
    let mut path = Vec::new();
    let mut at = t;
    while let Some(e) = pred[at] {
        path.push(e);
        at = g.edge(e).from;
    }
    path.reverse();
    path
}

/// Walks tree edges of a backward search from `v` forward to its root.
pub fn tree_path_backward(g: &MultiDigraph, pred: &[Option<EdgeId>], v: VertexId) -> Vec<EdgeId> {
    let mut path = Vec::new();
    let mut at = v;
    while let Some(e) = pred[at] {
        path.push(e);
        at = g.edge(e).to;
    }
    path
}

/// Keeps, for every ordered vertex pair and every bucket `(1+eps)^k` with
/// `k` from `ceil(log delta)` to `ceil(log d_max)`, only the shortest edge
/// whose delay fits the bucket (ties: smaller delay, then smaller id).
/// Returns the reduced graph and the original id of each kept edge.
pub fn dedup_parallel_edges(g: &MultiDigraph, eps: f64, delta: f64, d_max: f64) -> Result<(MultiDigraph, Vec<EdgeId>)> {
    if !(eps > 0.0) || !(delta > 0.0) || !(d_max >= delta) {
        return crate::error::invalid("dedup needs eps > 0 and 0 < delta <= d_max");
    }
    let base = (1.0 + eps).ln();
    let k_lo = crate::dp::snap_ceil(delta.ln() / base);
    let k_hi = crate::dp::snap_ceil(d_max.ln() / base);
    let mut by_pair: std::collections::BTreeMap<(VertexId, VertexId), Vec<EdgeId>> = Default::default();
    for (id, e) in g.edges().iter().enumerate() {
        by_pair.entry((e.from, e.to)).or_default().push(id);
    }
    let mut keep = std::collections::BTreeSet::new();
    for ids in by_pair.values() {
        let mut sorted = ids.clone();
        sorted.sort_by(|&a, &b| {
            let (ea, eb) = (g.edge(a), g.edge(b));
            ea.delay.total_cmp(&eb.delay).then(a.cmp(&b))
        });
        for k in k_lo..=k_hi {
            let bucket = ((k as f64) * base).exp();
            let best = sorted
                .iter()
                .copied()
                .take_while(|&e| g.edge(e).delay <= bucket)
                .min_by(|&a, &b| {
                    let (ea, eb) = (g.edge(a), g.edge(b));
                    ea.length
                        .total_cmp(&eb.length)
                        .then(ea.delay.total_cmp(&eb.delay))
                        .then(a.cmp(&b))
                });
            if let Some(e) = best {
                keep.insert(e);
            }
        }
    }
    let mut out = MultiDigraph::new(g.n());
    let mut map = Vec::with_capacity(keep.len());
    for e in keep {
        let edge = g.edge(e);
        out.add_edge(edge.from, edge.to, edge.length, edge.delay)?;
        map.push(e);
    }
    Ok((out, map))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_weights_and_vertices() {
        let mut g = MultiDigraph::new(2);
        assert!(g.add_edge(0, 2, 1.0, 1.0).is_err());
        assert!(g.add_edge(0, 1, -1.0, 1.0).is_err());
        assert!(g.add_edge(0, 1, 1.0, f64::NAN).is_err());
        assert!(g.add_edge(0, 1, 0.0, 0.0).is_ok());
    }

    #[test]
    fn scc_order_is_topological() {
        let g = MultiDigraph::from_edges(
            5,
            &[(0, 1, 1.0, 1.0), (1, 0, 1.0, 1.0), (1, 2, 1.0, 1.0), (3, 4, 1.0, 1.0), (4, 3, 1.0, 1.0), (2, 3, 1.0, 1.0)],
        )
        .unwrap();
        assert_eq!(sccs(&g), vec![vec![0, 1], vec![2], vec![3, 4]]);
    }

    #[test]
    fn scc_filter_drops_edges() {
        let g = MultiDigraph::from_edges(2, &[(0, 1, 1.0, 1.0), (1, 0, 1.0, 1.0)]).unwrap();
        assert_eq!(sccs(&g).len(), 1);
        assert_eq!(sccs_filtered(&g, |e| e != 1), vec![vec![0], vec![1]]);
    }

    #[test]
    fn aspect_ratio_ignores_zero_lengths() {
        let g = MultiDigraph::from_edges(3, &[(0, 1, 0.0, 1.0), (1, 2, 2.0, 1.0), (0, 2, 8.0, 1.0)]).unwrap();
        assert_eq!(g.aspect_ratio(), 4.0);
        let z = MultiDigraph::from_edges(2, &[(0, 1, 0.0, 1.0)]).unwrap();
        assert_eq!(z.aspect_ratio(), 1.0);
    }

    #[test]
    fn frontier_keeps_weakly_nondominated() {
        let f = pareto_frontier(&[(5.0, 1.0), (3.0, 2.0), (4.0, 3.0), (1.0, 4.0), (3.0, 2.0)]);
        assert_eq!(f, vec![(5.0, 1.0), (3.0, 2.0), (1.0, 4.0)]);
    }

    #[test]
    fn dedup_keeps_one_edge_per_bucket() {
        let g = MultiDigraph::from_edges(2, &[(0, 1, 5.0, 1.0), (0, 1, 3.0, 2.0), (0, 1, 1.0, 4.0)]).unwrap();
        let (h, map) = dedup_parallel_edges(&g, 1.0, 1.0, 4.0).unwrap();
        assert_eq!(h.m(), 3);
        assert_eq!(map, vec![0, 1, 2]);
        let g = MultiDigraph::from_edges(2, &[(0, 1, 5.0, 1.0), (0, 1, 6.0, 1.5), (0, 1, 1.0, 4.0)]).unwrap();
        let (h, map) = dedup_parallel_edges(&g, 1.0, 1.0, 4.0).unwrap();
        assert_eq!(h.m(), 2);
        assert_eq!(map, vec![0, 2]);
    }

    #[test]
    fn dijkstra_backward_matches_reverse() {
        let g = MultiDigraph::from_edges(3, &[(0, 1, 1.0, 2.0), (1, 2, 1.0, 2.0), (0, 2, 5.0, 0.0)]).unwrap();
        let (fwd, _) = dijkstra(&g.reverse(), 2, false, |_, e| Some(e.length));
        let (bwd, pred) = dijkstra(&g, 2, true, |_, e| Some(e.length));
        assert_eq!(fwd, bwd);
        assert_eq!(tree_path_backward(&g, &pred, 0), vec![0, 1]);
    }
}
