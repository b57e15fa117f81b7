//! Exact restricted shortest paths for small instances.

use std::collections::VecDeque;

use crate::error::{invalid, Result, RspError};
use crate::graph::{dijkstra, pareto_frontier, MultiDigraph, VertexId, INF};

pub const DEFAULT_LABEL_CAP: usize = 10_000_000;
pub const EXHAUSTIVE_MAX_N: usize = 12;

/// Pareto frontier of `(length, delay)` over all `(s,t)`-paths, sorted by
/// increasing delay and strictly decreasing length.
#[derive(Debug, Clone, PartialEq)]
pub struct Frontier(pub Vec<(f64, f64)>);

impl Frontier {
    /// Shortest length among paths with delay at most `d`.
    pub fn dist(&self, d: f64) -> f64 {
        let pos = self.0.partition_point(|p| p.1 <= d);
        if pos == 0 {
            INF
        } else {
            self.0[pos - 1].0
        }
    }

    /// Whether some path has length at most `l` and delay at most `d`.
    pub fn admits(&self, l: f64, d: f64) -> bool {
        self.dist(d) <= l
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMode {
    LabelCorrecting,
    Exhaustive,
}

/// Frontiers from `s` to every vertex.
pub fn exact_frontier(g: &MultiDigraph, s: VertexId, mode: OracleMode, label_cap: usize) -> Result<Vec<Frontier>> {
    if s >= g.n() {
        return Err(RspError::VertexOutOfRange { vertex: s, n: g.n() });
    }
    match mode {
        OracleMode::LabelCorrecting => label_correcting(g, s, label_cap),
        OracleMode::Exhaustive => exhaustive(g, s),
    }
}

fn label_correcting(g: &MultiDigraph, s: VertexId, cap: usize) -> Result<Vec<Frontier>> {
    let mut labels: Vec<Vec<(f64, f64)>> = vec![Vec::new(); g.n()];
    labels[s].push((0.0, 0.0));
    let mut queue = VecDeque::from([(s, 0.0, 0.0)]);
    let mut created = 1usize;
    while let Some((v, l, d)) = queue.pop_front() {
        if !labels[v].contains(&(l, d)) {
            continue;
        }
        for &e in g.out_edges(v) {
            let edge = g.edge(e);
            let (nl, nd) = (l + edge.length, d + edge.delay);
            let set = &mut labels[edge.to];
            if set.iter().any(|&(a, b)| a <= nl && b <= nd) {
                continue;
            }
            set.retain(|&(a, b)| !(nl <= a && nd <= b));
            set.push((nl, nd));
            created += 1;
            if created > cap {
                return Err(RspError::ResourceCap(format!("label count exceeded {cap}")));
            }
            queue.push_back((edge.to, nl, nd));
        }
    }
    Ok(labels.iter().map(|set| Frontier(pareto_frontier(set))).collect())
}

fn exhaustive(g: &MultiDigraph, s: VertexId) -> Result<Vec<Frontier>> {
    if g.n() > EXHAUSTIVE_MAX_N {
        return invalid(format!("exhaustive enumeration is limited to n <= {EXHAUSTIVE_MAX_N}"));
    }
    let mut points: Vec<Vec<(f64, f64)>> = vec![Vec::new(); g.n()];
    let mut on_path = vec![false; g.n()];
    fn walk(g: &MultiDigraph, v: VertexId, l: f64, d: f64, on_path: &mut [bool], points: &mut [Vec<(f64, f64)>]) {
        points[v].push((l, d));
        on_path[v] = true;
        for &e in g.out_edges(v) {
            let edge = g.edge(e);
            if !on_path[edge.to] {
                walk(g, edge.to, l + edge.length, d + edge.delay, on_path, points);
            }
        }
        on_path[v] = false;
    }
    walk(g, s, 0.0, 0.0, &mut on_path, &mut points);
    Ok(points.iter().map(|p| Frontier(pareto_frontier(p))).collect())
}

/// `dist(s, t, b)` for every budget `b = 0..=d_max` and every `t`, for
/// integer delays. Indexed `[b][t]`.
pub fn exact_rsp_integer_delays(g: &MultiDigraph, s: VertexId, d_max: u64) -> Result<Vec<Vec<f64>>> {
    if s >= g.n() {
        return Err(RspError::VertexOutOfRange { vertex: s, n: g.n() });
    }
    if let Some(e) = g.edges().iter().position(|e| e.delay.fract() != 0.0) {
        return invalid(format!("edge {e} has a non-integer delay"));
    }
    let mut table: Vec<Vec<f64>> = Vec::with_capacity(d_max as usize + 1);
    for b in 0..=d_max {
        let mut row = if b == 0 { vec![INF; g.n()] } else { table[b as usize - 1].clone() };
        row[s] = 0.0;
        for e in g.edges() {
            let d = e.delay as u64;
            if d >= 1 && d <= b {
                let cand = table[(b - d) as usize][e.from] + e.length;
                if cand < row[e.to] {
                    row[e.to] = cand;
                }
            }
        }
        // Zero-delay edges stay inside the same budget.
        relax_zero_delay(g, &mut row);
        table.push(row);
    }
    Ok(table)
}

fn relax_zero_delay(g: &MultiDigraph, row: &mut [f64]) {
    let mut aux = MultiDigraph::new(g.n() + 1);
    let root = g.n();
    for (v, &val) in row.iter().enumerate() {
        if val < INF {
            aux.add_edge(root, v, val, 0.0).expect("finite seed");
        }
    }
    for e in g.edges() {
        if e.delay == 0.0 {
            aux.add_edge(e.from, e.to, e.length, 0.0).expect("valid edge");
        }
    }
    let (dist, _) = dijkstra(&aux, root, false, |_, e| Some(e.length));
    for (v, val) in row.iter_mut().enumerate() {
        *val = val.min(dist[v]);
    }
}
