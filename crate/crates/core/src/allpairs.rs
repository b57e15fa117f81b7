//! All-pairs `(1, 1+ε)`-approximate restricted shortest paths.
//!
//! Sampled source sets `V_0 = V ⊇ V_1 ⊇ ...` of shrinking size are processed
//! from the coarsest level down. At each level a frequency-driven DP runs
//! from every sampled vertex on the graph extended with shortcut edges built
//! from the previous level, so the DP depth halves at every level. Answers
//! are stored densely per delay exponent, so a query is one array read.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use rand::Rng;

use crate::dp::{pi_dp_preprocess, snap_ceil, snap_floor, DpEngine, DpParams, DpTable, FrequencyAssignment};
use crate::error::{invalid, Result, RspError};
use crate::graph::{EdgeId, MultiDigraph, VertexId, INF};

const CACHE_MAGIC: &[u8; 8] = b"RSPAPSP\0";
const CACHE_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy)]
pub struct AllPairsConfig {
    /// Sample size multiplier for the level sets.
    pub sample_factor: f64,
    pub engine: DpEngine,
}

impl Default for AllPairsConfig {
    fn default() -> Self {
        AllPairsConfig { sample_factor: 4.0, engine: DpEngine::EventDriven }
    }
}

/// One DP run from an anchor vertex, with the shortcuts it was given.
#[derive(Debug, Clone)]
struct Run {
    table: DpTable,
    /// Shortcut edge `base_m + j` stands for `(other anchor, exponent)`.
    shortcuts: Vec<(VertexId, i64)>,
}

#[derive(Debug, Clone)]
struct Provenance {
    base_m: usize,
    /// `forward[k][s]`: runs on `G` from `s ∈ V_k`.
    forward: Vec<BTreeMap<VertexId, Run>>,
    /// `backward[k][t]`: runs on the reverse of `G` from `t ∈ V_k`.
    backward: Vec<BTreeMap<VertexId, Run>>,
}

#[derive(Debug, Clone)]
pub struct AllPairsTable {
    n: usize,
    q: u32,
    eps_run: f64,
    ln_base: f64,
    alpha_min: i64,
    alpha_max: i64,
    d_min: f64,
    d_max: f64,
    values: Vec<f64>,
    /// Table cells read by queries, shared between clones.
    reads: Arc<AtomicU64>,
    provenance: Option<Provenance>,
    pub dp_inspections: u64,
    pub dp_runs: u64,
    pub sample_sizes: Vec<usize>,
}

/// Accuracy used internally so that the final witness delay stays within
/// `(1+ε)·D`: `ε / (4q + 4)`.
pub fn internal_eps(eps: f64, n: usize) -> f64 {
    eps / (4.0 * level_depth(n) as f64 + 4.0)
}

/// `q = ⌈log₂ n⌉`, at least 1.
pub fn level_depth(n: usize) -> u32 {
    ((n.max(2) as f64).log2().ceil() as u32).max(1)
}

struct Ctx<'a> {
    base: MultiDigraph,
    reverse: MultiDigraph,
    q: u32,
    n: usize,
    eps: f64,
    ln_base: f64,
    alpha_min: i64,
    alpha_max: i64,
    dp_min: f64,
    dp_max: f64,
    config: &'a AllPairsConfig,
}

impl Ctx<'_> {
    fn pow(&self, i: i64) -> f64 {
        ((i as f64) * self.ln_base).exp()
    }

    /// DP query budget for `R_k(·,·,i)`.
    fn budget(&self, level: u32, i: i64) -> f64 {
        self.pow(i + 2 * (self.q - level) as i64 - 1)
    }

    /// Delay given to a shortcut that stands for `R_{level}(·,·,i)`.
    fn shortcut_delay(&self, level: u32, i: i64) -> f64 {
        self.pow(i + 2 * (self.q - level) as i64)
    }

    fn depth(&self, level: u32) -> u64 {
        if level == self.q - 1 {
            self.n as u64
        } else {
            1u64 << (level + 1)
        }
    }

    /// `R_level(anchor → target)` for every exponent, read from `run`.
    fn row(&self, run: &Run, level: u32, target: VertexId) -> Vec<f64> {
        (self.alpha_min..=self.alpha_max)
            .map(|i| {
                let k = run.table.query_index(self.budget(level, i)).expect("budget inside the DP range");
                run.table.value_at(target, k)
            })
            .collect()
    }

    /// DP from `anchor` at `level`, with shortcuts to every vertex of
    /// `partners`, whose lengths come from `lower` (level + 1, opposite
    /// orientation) read at `anchor`.
    fn run(&self, anchor: VertexId, level: u32, backward: bool, lower: Option<&BTreeMap<VertexId, Run>>) -> Result<Run> {
        let mut g = if backward { self.reverse.clone() } else { self.base.clone() };
        let mut shortcuts = Vec::new();
        if let Some(lower) = lower {
            for (&x, run) in lower {
                if x == anchor {
                    continue;
                }
                let lengths = self.row(run, level + 1, anchor);
                let mut best = INF;
                for (j, &l) in lengths.iter().enumerate() {
                    // A longer shortcut with a larger delay never helps.
                    if l < best {
                        best = l;
                        let i = self.alpha_min + j as i64;
                        g.add_edge(anchor, x, l, self.shortcut_delay(level + 1, i))?;
                        shortcuts.push((x, i));
                    }
                }
            }
        }
        let freq = FrequencyAssignment::uniform(g.m());
        let params = DpParams {
            source: anchor,
            h: self.depth(level),
            d_min: self.dp_min,
            d_max: self.dp_max,
            eps: self.eps,
            engine: self.config.engine,
        };
        Ok(Run { table: pi_dp_preprocess(&g, &freq, params)?, shortcuts })
    }
}

fn sample(n: usize, level: u32, factor: f64, rng: &mut impl Rng) -> Vec<VertexId> {
    if level == 0 {
        return (0..n).collect();
    }
    let log_n = (n.max(2) as f64).log2();
    let draws = (factor * (n as f64 / 2f64.powi(level as i32)) * log_n).ceil() as usize;
    let mut picked: Vec<VertexId> = (0..draws).map(|_| rng.gen_range(0..n)).collect();
    picked.sort_unstable();
    picked.dedup();
    picked
}

/// Preprocesses answers for every pair and every delay budget in
/// `[d_min, d_max]`.
pub fn all_pairs_preprocess(g: &MultiDigraph, d_min: f64, d_max: f64, eps: f64, config: &AllPairsConfig, rng: &mut impl Rng) -> Result<AllPairsTable> {
    let n = g.n();
    if n == 0 {
        return invalid("graph has no vertices");
    }
    if !(eps > 0.0 && eps < 1.0) {
        return invalid(format!("eps must lie in (0, 1), got {eps}"));
    }
    if !(d_min > 0.0 && d_min <= d_max && d_max.is_finite()) {
        return invalid(format!("need 0 < d_min <= d_max, got [{d_min}, {d_max}]"));
    }
    let q = level_depth(n);
    let e = internal_eps(eps, n);
    let ln_base = (1.0 + e).ln();
    let floor = e * d_min / n as f64;
    let base = g.map_weights(|_, edge| (edge.length, edge.delay.max(floor)))?;
    let alpha_min = snap_floor((e * d_min / n as f64).ln() / ln_base);
    let alpha_max = snap_ceil(((1.0 + e) * d_max).ln() / ln_base);
    let ctx = Ctx {
        reverse: base.reverse(),
        base,
        q,
        n,
        eps: e,
        ln_base,
        alpha_min,
        alpha_max,
        dp_min: e * ((alpha_min as f64) * ln_base).exp(),
        dp_max: (((alpha_max + 2 * q as i64 + 1) as f64) * ln_base).exp(),
        config,
    };
    let samples: Vec<Vec<VertexId>> = (0..q).map(|k| sample(n, k, config.sample_factor, rng)).collect();
    let mut forward: Vec<BTreeMap<VertexId, Run>> = vec![BTreeMap::new(); q as usize];
    let mut backward: Vec<BTreeMap<VertexId, Run>> = vec![BTreeMap::new(); q as usize];
    for level in (0..q).rev() {
        let (lower_fwd, lower_bwd) = if level + 1 < q {
            (Some(&forward[level as usize + 1]), Some(&backward[level as usize + 1]))
        } else {
            (None, None)
        };
        let mut fwd = BTreeMap::new();
        let mut bwd = BTreeMap::new();
        for &s in &samples[level as usize] {
            fwd.insert(s, ctx.run(s, level, false, lower_bwd)?);
            if level > 0 {
                bwd.insert(s, ctx.run(s, level, true, lower_fwd)?);
            }
        }
        forward[level as usize] = fwd;
        backward[level as usize] = bwd;
    }
    let len = (alpha_max - alpha_min + 1) as usize;
    let mut values = vec![INF; n * n * len];
    for (&s, run) in &forward[0] {
        for t in 0..n {
            let row = ctx.row(run, 0, t);
            values[(s * n + t) * len..(s * n + t + 1) * len].copy_from_slice(&row);
        }
    }
    let runs = forward.iter().chain(backward.iter()).flat_map(|m| m.values());
    let (mut dp_inspections, mut dp_runs) = (0, 0);
    for r in runs {
        dp_inspections += r.table.counters.edge_inspections;
        dp_runs += 1;
    }
    Ok(AllPairsTable {
        n,
        q,
        eps_run: e,
        ln_base,
        alpha_min,
        alpha_max,
        d_min,
        d_max,
        values,
        reads: Arc::default(),
        provenance: Some(Provenance { base_m: g.m(), forward, backward }),
        dp_inspections,
        dp_runs,
        sample_sizes: samples.iter().map(|s| s.len()).collect(),
    })
}

impl AllPairsTable {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn delay_range(&self) -> (f64, f64) {
        (self.d_min, self.d_max)
    }

    /// Number of table cells read by `query` so far.
    pub fn cells_read(&self) -> u64 {
        self.reads.load(Ordering::Relaxed)
    }

    pub fn internal_eps(&self) -> f64 {
        self.eps_run
    }

    fn exponent(&self, d: f64) -> Result<i64> {
        let tol = 1e-9;
        if !(d >= self.d_min * (1.0 - tol) && d <= self.d_max * (1.0 + tol)) {
            return invalid(format!("query delay {d} outside [{}, {}]", self.d_min, self.d_max));
        }
        Ok((snap_ceil(d.ln() / self.ln_base) + 1).clamp(self.alpha_min, self.alpha_max))
    }

    /// Length of an `(s,t)`-path with delay at most `(1+ε)·d`, no longer
    /// than the shortest path with delay at most `d`.
    pub fn query(&self, s: VertexId, t: VertexId, d: f64) -> Result<f64> {
        for v in [s, t] {
            if v >= self.n {
                return Err(RspError::VertexOutOfRange { vertex: v, n: self.n });
            }
        }
        let i = self.exponent(d)?;
        let len = (self.alpha_max - self.alpha_min + 1) as usize;
        self.reads.fetch_add(1, Ordering::Relaxed);
        Ok(self.values[(s * self.n + t) * len + (i - self.alpha_min) as usize])
    }

    /// The path behind `query(s, t, d)`, as edge ids of the input graph.
    pub fn recover_path(&self, s: VertexId, t: VertexId, d: f64) -> Result<Option<Vec<EdgeId>>> {
        let prov = self
            .provenance
            .as_ref()
            .ok_or_else(|| RspError::NoProvenance("table was loaded from a cache file".into()))?;
        if self.query(s, t, d)? == INF {
            return Ok(None);
        }
        let i = self.exponent(d)?;
        Ok(self.unfold(prov, 0, false, s, t, i))
    }

    fn budget_index(&self, table: &DpTable, level: u32, i: i64) -> i64 {
        let d = (((i + 2 * (self.q - level) as i64 - 1) as f64) * self.ln_base).exp();
        table.query_index(d).expect("budget inside the DP range")
    }

    /// Path in `G` for `R_level(from → to, i)` taken from the anchor's run;
    /// for backward runs the anchor is `to`.
    fn unfold(&self, prov: &Provenance, level: u32, backward: bool, from: VertexId, to: VertexId, i: i64) -> Option<Vec<EdgeId>> {
        let (anchor, target) = if backward { (to, from) } else { (from, to) };
        let run = if backward { prov.backward[level as usize].get(&anchor)? } else { prov.forward[level as usize].get(&anchor)? };
        let k = self.budget_index(&run.table, level, i);
        let walk = run.table.path_at(target, k)?;
        let (head, rest) = match walk.first() {
            Some(&e) if e >= prov.base_m => {
                let (x, j) = run.shortcuts[e - prov.base_m];
                let piece = if backward {
                    self.unfold(prov, level + 1, false, x, to, j)?
                } else {
                    self.unfold(prov, level + 1, true, from, x, j)?
                };
                (piece, &walk[1..])
            }
            _ => (Vec::new(), &walk[..]),
        };
        if backward {
            let mut path: Vec<EdgeId> = rest.iter().rev().copied().collect();
            path.extend(head);
            Some(path)
        } else {
            let mut path = head;
            path.extend_from_slice(rest);
            Some(path)
        }
    }

    /// Writes the query table (without path provenance).
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut out = Vec::with_capacity(64 + self.values.len() * 8);
        out.extend_from_slice(CACHE_MAGIC);
        out.extend_from_slice(&CACHE_VERSION.to_le_bytes());
        out.extend_from_slice(&(self.n as u64).to_le_bytes());
        out.extend_from_slice(&self.q.to_le_bytes());
        out.extend_from_slice(&self.alpha_min.to_le_bytes());
        out.extend_from_slice(&self.alpha_max.to_le_bytes());
        for x in [self.eps_run, self.d_min, self.d_max] {
            out.extend_from_slice(&x.to_le_bytes());
        }
        for x in &self.values {
            out.extend_from_slice(&x.to_le_bytes());
        }
        std::fs::File::create(path)?.write_all(&out)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<AllPairsTable> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut bytes)?;
        let mut r = Reader { bytes: &bytes, pos: 0 };
        if r.take(8)? != CACHE_MAGIC {
            return Err(corrupt("bad magic"));
        }
        let version = u32::from_le_bytes(r.array()?);
        if version != CACHE_VERSION {
            return Err(corrupt(&format!("unsupported version {version}")));
        }
        let n = u64::from_le_bytes(r.array()?) as usize;
        let q = u32::from_le_bytes(r.array()?);
        let alpha_min = i64::from_le_bytes(r.array()?);
        let alpha_max = i64::from_le_bytes(r.array()?);
        let eps_run = f64::from_le_bytes(r.array()?);
        let d_min = f64::from_le_bytes(r.array()?);
        let d_max = f64::from_le_bytes(r.array()?);
        if alpha_max < alpha_min {
            return Err(corrupt("bad exponent range"));
        }
        let count = n * n * (alpha_max - alpha_min + 1) as usize;
        if bytes.len() != r.pos + count * 8 {
            return Err(corrupt("length does not match header"));
        }
        let values = (0..count).map(|_| r.array().map(f64::from_le_bytes)).collect::<Result<Vec<f64>>>()?;
        Ok(AllPairsTable {
            n,
            q,
            eps_run,
            ln_base: (1.0 + eps_run).ln(),
            alpha_min,
            alpha_max,
            d_min,
            d_max,
            values,
            reads: Arc::default(),
            provenance: None,
            dp_inspections: 0,
            dp_runs: 0,
            sample_sizes: Vec::new(),
        })
    }
}

fn corrupt(msg: &str) -> RspError {
    RspError::Parse { line: 0, msg: format!("all-pairs cache: {msg}") }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, k: usize) -> Result<&[u8]> {
        if self.pos + k > self.bytes.len() {
            return Err(corrupt("truncated"));
        }
        self.pos += k;
        Ok(&self.bytes[self.pos - k..self.pos])
    }

    fn array<const K: usize>(&mut self) -> Result<[u8; K]> {
        Ok(self.take(K)?.try_into().expect("exact length"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{exact_frontier, OracleMode, DEFAULT_LABEL_CAP};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sample_graph() -> MultiDigraph {
        MultiDigraph::from_edges(
            5,
            &[(0, 1, 1.0, 4.0), (1, 2, 1.0, 4.0), (0, 2, 5.0, 1.0), (2, 3, 2.0, 2.0), (3, 4, 1.0, 1.0), (4, 0, 3.0, 3.0), (1, 4, 6.0, 1.0)],
        )
        .unwrap()
    }

    #[test]
    fn answers_are_bicriteria_against_oracle() {
        let g = sample_graph();
        let eps = 0.25;
        let table = all_pairs_preprocess(&g, 1.0, 20.0, eps, &AllPairsConfig::default(), &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        for s in 0..5 {
            let f = exact_frontier(&g, s, OracleMode::LabelCorrecting, DEFAULT_LABEL_CAP).unwrap();
            for t in 0..5 {
                for d in [1.0, 2.5, 5.0, 8.0, 13.0, 20.0] {
                    let got = table.query(s, t, d).unwrap();
                    assert!(got <= f[t].dist(d), "s={s} t={t} d={d}");
                    if got < INF {
                        let path = table.recover_path(s, t, d).unwrap().unwrap();
                        assert!(g.is_walk(s, Some(t), &path));
                        assert_eq!(g.path_length(&path), got);
                        assert!(g.path_delay(&path) <= (1.0 + eps) * d);
                    }
                }
            }
        }
    }

    #[test]
    fn cache_round_trip() {
        let g = sample_graph();
        let table = all_pairs_preprocess(&g, 1.0, 10.0, 0.3, &AllPairsConfig::default(), &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.bin");
        table.save(&path).unwrap();
        let loaded = AllPairsTable::load(&path).unwrap();
        for s in 0..5 {
            for t in 0..5 {
                assert_eq!(table.query(s, t, 3.3).unwrap(), loaded.query(s, t, 3.3).unwrap());
            }
        }
        assert!(loaded.recover_path(0, 2, 3.0).is_err());
        std::fs::write(&path, b"garbage").unwrap();
        assert!(AllPairsTable::load(&path).is_err());
    }

    #[test]
    fn rejects_out_of_range_queries() {
        let g = sample_graph();
        let table = all_pairs_preprocess(&g, 1.0, 10.0, 0.3, &AllPairsConfig::default(), &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert!(table.query(0, 1, 0.5).is_err());
        assert!(table.query(0, 1, 11.0).is_err());
        assert!(table.query(0, 7, 2.0).is_err());
    }
}
