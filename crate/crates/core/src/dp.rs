//! Frequency-driven dynamic programming over exponentially rounded delays.
//!
//! Every edge `e` carries a frequency `π(e)`. Path delays are rounded up to
//! powers of `γ = 1 + ε'` after each edge, and an edge of frequency `p` may
//! only be appended at table indices divisible by `p`. The table `B[t][k]`
//! holds the shortest length of an `(s,t)`-walk whose rounded delay is at
//! most `γ^k`.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::error::{invalid, Result, RspError};
use crate::graph::{topological_order, EdgeId, MultiDigraph, VertexId, INF};

const SNAP: f64 = 1e-9;

/// Index used for `B[s][-∞]`, the empty path.
pub const NEG_INF_INDEX: i64 = i64::MIN;

/// Work limit for the scheduled engine, in table columns times frequency classes.
const SCHEDULED_WORK_CAP: u128 = 2_000_000_000;

pub fn snap_floor(r: f64) -> i64 {
    let rr = r.round();
    if (r - rr).abs() < SNAP {
        rr as i64
    } else {
        r.floor() as i64
    }
}

pub fn snap_ceil(r: f64) -> i64 {
    let rr = r.round();
    if (r - rr).abs() < SNAP {
        rr as i64
    } else {
        r.ceil() as i64
    }
}

/// Smallest power of `gamma` that is at least `x`; `-∞` for `x = 0`.
pub fn exp_round(x: f64, gamma: f64) -> f64 {
    if x <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let ln_g = gamma.ln();
    ((snap_ceil(x.ln() / ln_g) as f64) * ln_g).exp()
}

/// `None` marks a dead edge that the DP never uses.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyAssignment {
    pub values: Vec<Option<u64>>,
}

impl FrequencyAssignment {
    pub fn uniform(m: usize) -> Self {
        FrequencyAssignment { values: vec![Some(1); m] }
    }

    /// `π(uv) = τ(v) - τ(u)` for a topological numbering `τ`.
    pub fn topological(g: &MultiDigraph) -> Result<Self> {
        let order = topological_order(g).ok_or_else(|| RspError::InvalidParameter("graph is not acyclic".into()))?;
        let mut tau = vec![0u64; g.n()];
        for (i, &v) in order.iter().enumerate() {
            tau[v] = i as u64 + 1;
        }
        let values = g.edges().iter().map(|e| Some(tau[e.to] - tau[e.from])).collect();
        Ok(FrequencyAssignment { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn live(&self) -> impl Iterator<Item = u64> + '_ {
        self.values.iter().flatten().copied()
    }

    pub fn pi_sum(&self) -> u64 {
        self.live().sum()
    }

    /// Sum of `1/π(e)` over live edges.
    pub fn reciprocal_sum(&self) -> f64 {
        self.live().map(|p| 1.0 / p as f64).sum()
    }

    /// Upper bound on `π(P)` for any simple path on `n` vertices: the sum of
    /// the `n - 1` largest live frequencies.
    pub fn simple_path_bound(&self, n: usize) -> u64 {
        let mut v: Vec<u64> = self.live().collect();
        v.sort_unstable_by(|a, b| b.cmp(a));
        v.iter().take(n.saturating_sub(1)).sum()
    }

    pub fn path_sum(&self, path: &[EdgeId]) -> Option<u64> {
        path.iter().map(|&e| self.values[e]).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DpEngine {
    /// Visits every table column and inspects each edge at the indices its
    /// frequency divides.
    Scheduled,
    /// Inspects an edge only after its tail improved; produces the same table.
    EventDriven,
}

#[derive(Debug, Clone, Copy)]
pub struct DpParams {
    pub source: VertexId,
    pub h: u64,
    pub d_min: f64,
    pub d_max: f64,
    pub eps: f64,
    pub engine: DpEngine,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DpCounters {
    pub edge_inspections: u64,
    pub cell_updates: u64,
    pub columns: u64,
}

#[derive(Debug, Clone, Copy)]
struct Breakpoint {
    k: i64,
    value: f64,
    edge: EdgeId,
    pred: i64,
}

#[derive(Debug, Clone)]
pub struct DpTable {
    source: VertexId,
    h: u64,
    eps_prime: f64,
    ln_gamma: f64,
    delta: f64,
    d_min: f64,
    d_max: f64,
    k_lo: i64,
    k_hi: i64,
    rows: Vec<Vec<Breakpoint>>,
    tails: Vec<VertexId>,
    lengths: Vec<f64>,
    pub counters: DpCounters,
}

struct Rounding {
    ln_gamma: f64,
}

impl Rounding {
    fn pow(&self, k: i64) -> f64 {
        ((k as f64) * self.ln_gamma).exp()
    }

    /// Index of `B[u][·]` read when appending an edge of rounded delay `d`
    /// at index `k`; `None` if the edge does not fit at all.
    fn pred_index(&self, k: i64, d: f64) -> Option<i64> {
        let x = self.pow(k) - d;
        if x < 0.0 {
            None
        } else if x == 0.0 {
            Some(NEG_INF_INDEX)
        } else {
            Some(snap_floor(x.ln() / self.ln_gamma).min(k - 1))
        }
    }

    /// First index `k >= k_lo` divisible by `p` whose predecessor index is at
    /// least `b`.
    fn first_fit(&self, b: i64, d: f64, p: i64, k_lo: i64) -> i64 {
        let target = if b == NEG_INF_INDEX { d } else { self.pow(b) + d };
        let mut k = snap_ceil(target.ln() / self.ln_gamma).max(k_lo);
        if b != NEG_INF_INDEX {
            k = k.max(b + 1);
        }
        k = align_up(k, p);
        let fits = |k: i64| self.pred_index(k, d).is_some_and(|j| j >= b);
        while !fits(k) {
            k += p;
        }
        while k - p >= k_lo && (b == NEG_INF_INDEX || k - p > b) && fits(k - p) {
            k -= p;
        }
        k
    }
}

fn align_up(k: i64, p: i64) -> i64 {
    let r = k.rem_euclid(p);
    if r == 0 {
        k
    } else {
        k + (p - r)
    }
}

impl DpTable {
    pub fn source(&self) -> VertexId {
        self.source
    }

    pub fn h(&self) -> u64 {
        self.h
    }

    pub fn eps_prime(&self) -> f64 {
        self.eps_prime
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn index_range(&self) -> (i64, i64) {
        (self.k_lo, self.k_hi)
    }

    pub fn gamma_pow(&self, k: i64) -> f64 {
        ((k as f64) * self.ln_gamma).exp()
    }

    /// `B[t][k]`.
    pub fn value_at(&self, t: VertexId, k: i64) -> f64 {
        if t == self.source {
            return 0.0;
        }
        if k == NEG_INF_INDEX {
            return INF;
        }
        let row = &self.rows[t];
        let pos = row.partition_point(|bp| bp.k <= k);
        if pos == 0 {
            INF
        } else {
            row[pos - 1].value
        }
    }

    /// Table index answering delay budget `d`.
    pub fn query_index(&self, d: f64) -> Result<i64> {
        let tol = 1e-9;
        if !(d >= self.d_min * (1.0 - tol) && d <= self.d_max * (1.0 + tol)) {
            return invalid(format!(
                "query delay {d} outside the preprocessed range [{}, {}]",
                self.d_min, self.d_max
            ));
        }
        Ok(snap_ceil(d.ln() / self.ln_gamma + 1.0) + self.h as i64)
    }

    /// Length of a walk with delay at most `(1+ε)·d` whose length is at most
    /// the shortest length over walks with delay `d` and frequency sum `h`.
    pub fn query(&self, t: VertexId, d: f64) -> Result<f64> {
        Ok(self.value_at(t, self.query_index(d)?))
    }

    /// Walk realizing `value_at(t, k)`, as edge ids from the source.
    pub fn path_at(&self, t: VertexId, k: i64) -> Option<Vec<EdgeId>> {
        let mut path = Vec::new();
        let (mut at, mut idx) = (t, k);
        while at != self.source {
            if idx == NEG_INF_INDEX {
                return None;
            }
            let row = &self.rows[at];
            let pos = row.partition_point(|bp| bp.k <= idx);
            if pos == 0 {
                return None;
            }
            let bp = row[pos - 1];
            path.push(bp.edge);
            at = self.tails[bp.edge];
            idx = bp.pred;
        }
        path.reverse();
        Some(path)
    }

    pub fn query_path(&self, t: VertexId, d: f64) -> Result<Option<(f64, Vec<EdgeId>)>> {
        let k = self.query_index(d)?;
        let value = self.value_at(t, k);
        if value == INF {
            return Ok(None);
        }
        Ok(self.path_at(t, k).map(|p| (value, p)))
    }

    /// Step function of `B[t][·]` as `(first index, value)` pairs.
    pub fn steps(&self, t: VertexId) -> Vec<(i64, f64)> {
        self.rows[t].iter().map(|bp| (bp.k, bp.value)).collect()
    }

    /// Sum of the lengths along the recovered walk, added in walk order.
    pub fn resum(&self, path: &[EdgeId]) -> f64 {
        path.iter().fold(0.0, |acc, &e| acc + self.lengths[e])
    }
}

/// Rounded delay `d'(P)` of a walk under the table's rounding rules.
pub fn rounded_path_delay(g: &MultiDigraph, freq: &FrequencyAssignment, path: &[EdgeId], eps_prime: f64, delta: f64) -> f64 {
    let ln_g = (1.0 + eps_prime).ln();
    let mut d = 0.0;
    for &e in path {
        let p = freq.values[e].expect("live edge") as f64;
        let x = d + g.edge(e).delay.max(delta);
        d = ((snap_ceil(x.ln() / (ln_g * p)) as f64) * ln_g * p).exp();
    }
    d
}

pub fn pi_dp_preprocess(g: &MultiDigraph, freq: &FrequencyAssignment, params: DpParams) -> Result<DpTable> {
    let DpParams { source, h, d_min, d_max, eps, engine } = params;
    if freq.len() != g.m() {
        return invalid("frequency assignment does not match the edge count");
    }
    if source >= g.n() {
        return Err(RspError::VertexOutOfRange { vertex: source, n: g.n() });
    }
    if !(eps > 0.0 && eps < 1.0) {
        return invalid(format!("eps must lie in (0, 1), got {eps}"));
    }
    if !(d_min > 0.0 && d_min <= d_max && d_max.is_finite()) {
        return invalid(format!("need 0 < d_min <= d_max, got [{d_min}, {d_max}]"));
    }
    if h == 0 {
        return invalid("depth h must be at least 1");
    }
    if freq.values.contains(&Some(0)) {
        return invalid("frequencies must be positive");
    }
    let pi_sum = freq.pi_sum().max(1);
    let n = g.n().max(2) as u128;
    if (pi_sum as u128) > n.pow(4) {
        return Err(RspError::ResourceCap(format!("frequency sum {pi_sum} exceeds n^4")));
    }
    let h = h.min(pi_sum);
    let eps_prime = eps / (2.0 * h as f64 + 4.0);
    let ln_gamma = (1.0 + eps_prime).ln();
    let delta = eps_prime / pi_sum as f64 * d_min;
    let k_lo = snap_floor(delta.ln() / ln_gamma);
    let k_hi = snap_ceil(((1.0 + eps_prime) * d_max).ln() / ln_gamma) + h as i64;
    let mut table = DpTable {
        source,
        h,
        eps_prime,
        ln_gamma,
        delta,
        d_min,
        d_max,
        k_lo,
        k_hi,
        rows: vec![Vec::new(); g.n()],
        tails: g.edges().iter().map(|e| e.from).collect(),
        lengths: g.edges().iter().map(|e| e.length).collect(),
        counters: DpCounters::default(),
    };
    let rounding = Rounding { ln_gamma };
    let d_up: Vec<f64> = g.edges().iter().map(|e| e.delay.max(delta)).collect();
    match engine {
        DpEngine::Scheduled => run_scheduled(g, freq, &rounding, &d_up, &mut table)?,
        DpEngine::EventDriven => run_events(g, freq, &rounding, &d_up, &mut table),
    }
    Ok(table)
}

#[derive(PartialEq)]
enum Update {
    None,
    New,
    InPlace,
}

fn improve(table: &mut DpTable, t: VertexId, k: i64, value: f64, edge: EdgeId, pred: i64) -> Update {
    let current = table.rows[t].last().map_or(INF, |bp| bp.value);
    if value >= current {
        return Update::None;
    }
    table.counters.cell_updates += 1;
    let bp = Breakpoint { k, value, edge, pred };
    match table.rows[t].last_mut() {
        Some(last) if last.k == k => {
            *last = bp;
            Update::InPlace
        }
        _ => {
            table.rows[t].push(bp);
            Update::New
        }
    }
}

fn run_scheduled(g: &MultiDigraph, freq: &FrequencyAssignment, rounding: &Rounding, d_up: &[f64], table: &mut DpTable) -> Result<()> {
    let mut classes: std::collections::BTreeMap<u64, Vec<EdgeId>> = Default::default();
    for (e, p) in freq.values.iter().enumerate() {
        if let Some(p) = p {
            if g.edge(e).to != table.source {
                classes.entry(*p).or_default().push(e);
            }
        }
    }
    let columns = (table.k_hi - table.k_lo + 1) as u128;
    if columns * (classes.len().max(1) as u128) > SCHEDULED_WORK_CAP {
        return Err(RspError::ResourceCap(format!("{columns} table columns")));
    }
    for k in table.k_lo..=table.k_hi {
        table.counters.columns += 1;
        for (&p, edges) in &classes {
            if k.rem_euclid(p as i64) != 0 {
                continue;
            }
            for &e in edges {
                table.counters.edge_inspections += 1;
                let Some(j) = rounding.pred_index(k, d_up[e]) else { continue };
                let edge = g.edge(e);
                let cand = table.value_at(edge.from, j) + edge.length;
                improve(table, edge.to, k, cand, e, j);
            }
        }
    }
    Ok(())
}

fn run_events(g: &MultiDigraph, freq: &FrequencyAssignment, rounding: &Rounding, d_up: &[f64], table: &mut DpTable) {
    let mut heap: BinaryHeap<Reverse<(i64, EdgeId)>> = BinaryHeap::new();
    let schedule = |heap: &mut BinaryHeap<Reverse<(i64, EdgeId)>>, u: VertexId, b: i64, table: &DpTable| {
        for &e in g.out_edges(u) {
            let Some(p) = freq.values[e] else { continue };
            if g.edge(e).to == table.source {
                continue;
            }
            let k = rounding.first_fit(b, d_up[e], p as i64, table.k_lo);
            if k <= table.k_hi {
                heap.push(Reverse((k, e)));
            }
        }
    };
    schedule(&mut heap, table.source, NEG_INF_INDEX, table);
    while let Some(Reverse((k, e))) = heap.pop() {
        table.counters.edge_inspections += 1;
        let Some(j) = rounding.pred_index(k, d_up[e]) else { continue };
        let edge = g.edge(e);
        let cand = table.value_at(edge.from, j) + edge.length;
        // An in-place update at the same index reuses the events already queued.
        if improve(table, edge.to, k, cand, e, j) == Update::New {
            schedule(&mut heap, edge.to, k, table);
        }
    }
    table.counters.columns = (table.k_hi - table.k_lo + 1) as u64;
}
