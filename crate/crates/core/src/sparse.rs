//! Hierarchy for sparse graphs: LDD levels that only recurse into medium
//! SCCs, followed by small blocks of small SCCs whose sampled vertices are
//! joined by hop edges taken from an all-pairs table of the block.

use std::sync::Arc;

use rand::Rng;

use crate::allpairs::{all_pairs_preprocess, AllPairsConfig, AllPairsTable};
use crate::dense::{add_stats, expand_star, level_diameter};
use crate::dp::{snap_ceil, snap_floor, FrequencyAssignment};
use crate::error::{invalid, Result};
use crate::graph::{sccs_filtered, topological_order, EdgeId, MultiDigraph, VertexId};
use crate::ldd::{ldd, LddStats, DEFAULT_RADIUS_RATE};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SparseLabel {
    /// Inside a large SCC; never used by the DP.
    Dead,
    Hop,
    IntraBlock,
    Back(u32),
    Forward(u32),
    Star(u32),
    /// Not yet classified; none remain after a successful build.
    Internal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SparseParams {
    pub delta_run: u64,
    pub delta_block: u64,
}

/// `α = log_n m - 1` clamped to `[0, 1/2]`, `Δ_run = ⌈n^((1-2α)/5)⌉`,
/// `Δ_block = ⌈n^((3-α)/5)⌉`.
pub fn sparse_params(n: usize, m: usize) -> SparseParams {
    let nf = n.max(2) as f64;
    let alpha = if m <= 1 { 0.0 } else { ((m as f64).ln() / nf.ln() - 1.0).clamp(0.0, 0.5) };
    SparseParams {
        delta_run: snap_ceil(nf.powf((1.0 - 2.0 * alpha) / 5.0)).max(1) as u64,
        delta_block: snap_ceil(nf.powf((3.0 - alpha) / 5.0)).max(1) as u64,
    }
}

/// Phase-one level cap `⌈log₂(n / Δ_block)⌉ + 1`.
pub fn level_cap(n: usize, delta_block: u64) -> u32 {
    let ratio = n as f64 / delta_block as f64;
    if ratio <= 1.0 {
        1
    } else {
        ratio.log2().ceil() as u32 + 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SccClass {
    Small,
    Medium,
    Large,
}

pub fn classify(size: usize, level: u32, n: usize, delta_block: u64) -> SccClass {
    if size as u64 <= delta_block {
        SccClass::Small
    } else if size as f64 >= level_diameter(n, level) {
        SccClass::Large
    } else {
        SccClass::Medium
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelScc {
    pub level: u32,
    pub vertices: Vec<VertexId>,
    pub center: VertexId,
    /// Index of the enclosing SCC one level up; `None` at level 1.
    pub parent: Option<usize>,
    pub class: SccClass,
}

#[derive(Debug, Clone)]
pub struct Block {
    pub level: u32,
    pub vertices: Vec<VertexId>,
    pub samples: Vec<VertexId>,
    table: Arc<AllPairsTable>,
    edge_map: Vec<EdgeId>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AuxKind {
    Star { scc: usize, level: u32 },
    Hop { block: usize, threshold: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuxEdge {
    pub from: VertexId,
    pub to: VertexId,
    pub length: f64,
    pub delay: f64,
    pub kind: AuxKind,
}

#[derive(Debug, Clone, Copy)]
pub struct SparseConfig {
    /// Drop a hop edge when the previous threshold already gave the same
    /// length with a smaller delay.
    pub prune_dominated_hops: bool,
    pub sample_factor: f64,
    pub all_pairs: AllPairsConfig,
}

impl Default for SparseConfig {
    fn default() -> Self {
        SparseConfig { prune_dominated_hops: true, sample_factor: 4.0, all_pairs: AllPairsConfig::default() }
    }
}

#[derive(Debug, Clone)]
pub struct SparseHierarchy {
    pub params: SparseParams,
    pub cap: u32,
    /// Labels of the original edges.
    pub labels: Vec<SparseLabel>,
    pub aux: Vec<AuxEdge>,
    /// All SCCs of phase one; `per_level[i]` lists level `i+1` in order.
    pub sccs: Vec<LevelScc>,
    pub per_level: Vec<Vec<usize>>,
    pub blocks: Vec<Block>,
    pub ldd_stats: LddStats,
}

struct Builder<'a> {
    g: &'a MultiDigraph,
    eps: f64,
    d: f64,
    config: &'a SparseConfig,
}

impl Builder<'_> {
    fn n(&self) -> usize {
        self.g.n()
    }

    /// Samples a block, builds its all-pairs table and emits hop edges.
    fn add_block(&self, hier: &mut SparseHierarchy, level: u32, vertices: Vec<VertexId>, rng: &mut impl Rng) -> Result<()> {
        let SparseParams { delta_run, delta_block } = hier.params;
        let ln_n = (self.n().max(2) as f64).ln();
        let draws = (self.config.sample_factor * delta_block as f64 * ln_n / delta_run as f64).ceil() as usize;
        let mut samples: Vec<VertexId> = (0..draws).map(|_| vertices[rng.gen_range(0..vertices.len())]).collect();
        samples.sort_unstable();
        samples.dedup();
        let (sub, edge_map) = self.g.induced(&vertices);
        let delta = self.eps * self.d / (self.n() as f64).powi(2);
        let table = Arc::new(all_pairs_preprocess(&sub, delta, self.d, self.eps, &self.config.all_pairs, rng)?);
        let block = hier.blocks.len();
        let ln_b = (1.0 + self.eps).ln();
        let (k_lo, k_hi) = (snap_ceil(delta.ln() / ln_b), snap_floor(self.d.ln() / ln_b));
        let local = |v: VertexId| vertices.iter().position(|&x| x == v).expect("sample inside block");
        for &u in &samples {
            for &v in &samples {
                if u == v {
                    continue;
                }
                let mut last = f64::INFINITY;
                for k in k_lo..=k_hi {
                    let threshold = ((k as f64) * ln_b).exp();
                    let length = table.query(local(u), local(v), threshold)?;
                    if !length.is_finite() || (self.config.prune_dominated_hops && length >= last) {
                        continue;
                    }
                    last = length;
                    let delay = (((k + 1) as f64) * ln_b).exp();
                    hier.aux.push(AuxEdge { from: u, to: v, length, delay, kind: AuxKind::Hop { block, threshold } });
                }
            }
        }
        hier.blocks.push(Block { level, vertices, samples, table, edge_map });
        Ok(())
    }

    fn descend(&self, hier: &mut SparseHierarchy, comp: &[VertexId], level: u32, parent: Option<usize>, rng: &mut impl Rng) -> Result<()> {
        let n = self.n();
        let d = level_diameter(n, level);
        let (h, emap) = self.g.induced(comp);
        let w: Vec<f64> = emap.iter().map(|&e| self.g.edge(e).combined()).collect();
        let (cut, stats) = ldd(&h, &w, d, DEFAULT_RADIUS_RATE, rng)?;
        add_stats(&mut hier.ldd_stats, stats);
        let mut is_cut = vec![false; h.m()];
        for &e in &cut {
            is_cut[e] = true;
            hier.labels[emap[e]] = SparseLabel::Back(level);
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
                hier.labels[emap[e]] = SparseLabel::Forward(level);
            }
        }
        if hier.per_level.len() < level as usize {
            hier.per_level.push(Vec::new());
        }
        for (pi, part) in parts.iter().enumerate() {
            let vertices: Vec<VertexId> = part.iter().map(|&x| comp[x]).collect();
            let mut class = classify(vertices.len(), level, n, hier.params.delta_block);
            if class == SccClass::Medium && level >= hier.cap {
                class = SccClass::Large;
            }
            let id = hier.sccs.len();
            let center = vertices[0];
            for &v in &vertices[1..] {
                for (from, to) in [(center, v), (v, center)] {
                    hier.aux.push(AuxEdge { from, to, length: d, delay: d, kind: AuxKind::Star { scc: id, level } });
                }
            }
            if class == SccClass::Large {
                for (e, edge) in h.edges().iter().enumerate() {
                    if part_of[edge.from] == pi && part_of[edge.to] == pi {
                        hier.labels[emap[e]] = SparseLabel::Dead;
                    }
                }
            }
            hier.sccs.push(LevelScc { level, vertices: vertices.clone(), center, parent, class });
            hier.per_level[level as usize - 1].push(id);
            if class == SccClass::Medium {
                self.descend(hier, &vertices, level + 1, Some(id), rng)?;
            }
        }
        Ok(())
    }
}

/// Blocks of a level: each is a list of positions in `order` (the level's
/// SCCs in topological order). `small[i]` and `parent[i]` describe
/// `order[i]`; `size[i]` is its vertex count.
pub fn partition_finely_chopped(size: &[usize], small: &[bool], parent: &[Option<usize>], delta_block: u64) -> Vec<Vec<usize>> {
    let mut chunks: Vec<Vec<usize>> = Vec::new();
    let mut fill = 0usize;
    for i in (0..size.len()).filter(|&i| small[i]) {
        if chunks.is_empty() || fill + size[i] > delta_block as usize {
            chunks.push(Vec::new());
            fill = 0;
        }
        chunks.last_mut().expect("chunk").push(i);
        fill += size[i];
    }
    let mut blocks = Vec::new();
    for chunk in chunks {
        let mut current: Vec<usize> = Vec::new();
        for i in chunk {
            if let Some(&prev) = current.last() {
                let other_parent = parent[prev] != parent[i];
                let gap_has_big = (prev + 1..i).any(|j| !small[j]);
                if other_parent || gap_has_big {
                    blocks.push(std::mem::take(&mut current));
                }
            }
            current.push(i);
        }
        if !current.is_empty() {
            blocks.push(current);
        }
    }
    blocks
}

/// Checks the finely-chopped conditions for one level's partition.
pub fn check_finely_chopped(size: &[usize], small: &[bool], parent: &[Option<usize>], blocks: &[Vec<usize>], delta_block: u64) -> std::result::Result<(), String> {
    let mut covered = vec![0usize; size.len()];
    for (b, block) in blocks.iter().enumerate() {
        if block.iter().map(|&i| size[i]).sum::<usize>() > delta_block as usize {
            return Err(format!("block {b} is larger than the block size"));
        }
        for w in block.windows(2) {
            if w[0] >= w[1] {
                return Err(format!("block {b} is not in topological order"));
            }
            if parent[w[0]] != parent[w[1]] {
                return Err(format!("block {b} spans two parents"));
            }
            if (w[0] + 1..w[1]).any(|j| !small[j]) {
                return Err(format!("block {b} straddles a non-small scc"));
            }
        }
        for &i in block {
            if !small[i] {
                return Err(format!("block {b} contains a non-small scc"));
            }
            covered[i] += 1;
        }
    }
    for i in 0..size.len() {
        if small[i] && covered[i] != 1 {
            return Err(format!("small scc {i} is covered {} times", covered[i]));
        }
    }
    Ok(())
}

/// Builds the sparse hierarchy on `g` (already normalized). Hop edges are
/// built at accuracy `eps` for delays up to `d`.
pub fn build_sparse_hierarchy(g: &MultiDigraph, eps: f64, d: f64, params: SparseParams, config: &SparseConfig, rng: &mut impl Rng) -> Result<SparseHierarchy> {
    if g.n() == 0 {
        return invalid("graph has no vertices");
    }
    let mut hier = SparseHierarchy {
        params,
        cap: level_cap(g.n(), params.delta_block),
        labels: vec![SparseLabel::Internal; g.m()],
        aux: Vec::new(),
        sccs: Vec::new(),
        per_level: Vec::new(),
        blocks: Vec::new(),
        ldd_stats: LddStats::default(),
    };
    let b = Builder { g, eps, d, config };
    let all: Vec<VertexId> = (0..g.n()).collect();
    b.descend(&mut hier, &all, 1, None, rng)?;
    for level in 1..=hier.per_level.len() as u32 {
        let ids = hier.per_level[level as usize - 1].clone();
        let size: Vec<usize> = ids.iter().map(|&i| hier.sccs[i].vertices.len()).collect();
        let small: Vec<bool> = ids.iter().map(|&i| hier.sccs[i].class == SccClass::Small).collect();
        let parent: Vec<Option<usize>> = ids.iter().map(|&i| hier.sccs[i].parent).collect();
        for block in partition_finely_chopped(&size, &small, &parent, params.delta_block) {
            let mut vertices: Vec<VertexId> = block.iter().flat_map(|&p| hier.sccs[ids[p]].vertices.iter().copied()).collect();
            vertices.sort_unstable();
            let mut inside = vec![false; g.n()];
            for &v in &vertices {
                inside[v] = true;
            }
            for (e, edge) in g.edges().iter().enumerate() {
                if inside[edge.from] && inside[edge.to] {
                    hier.labels[e] = SparseLabel::IntraBlock;
                }
            }
            b.add_block(&mut hier, level, vertices, rng)?;
        }
    }
    Ok(hier)
}

/// Blocks of `Δ_block` consecutive vertices in topological order, with hop
/// edges inside each block. Edges between blocks are labelled `Forward(0)`.
pub fn build_dag_blocks(g: &MultiDigraph, eps: f64, d: f64, params: SparseParams, config: &SparseConfig, rng: &mut impl Rng) -> Result<SparseHierarchy> {
    let order = topological_order(g).ok_or_else(|| crate::RspError::InvalidParameter("graph is not acyclic".into()))?;
    let mut hier = SparseHierarchy {
        params,
        cap: 0,
        labels: vec![SparseLabel::Forward(0); g.m()],
        aux: Vec::new(),
        sccs: Vec::new(),
        per_level: Vec::new(),
        blocks: Vec::new(),
        ldd_stats: LddStats::default(),
    };
    let b = Builder { g, eps, d, config };
    let mut block_of = vec![0usize; g.n()];
    for (i, chunk) in order.chunks(params.delta_block.max(1) as usize).enumerate() {
        for &v in chunk {
            block_of[v] = i;
        }
    }
    for (e, edge) in g.edges().iter().enumerate() {
        if block_of[edge.from] == block_of[edge.to] {
            hier.labels[e] = SparseLabel::IntraBlock;
        }
    }
    for chunk in order.chunks(params.delta_block.max(1) as usize) {
        let mut vertices = chunk.to_vec();
        vertices.sort_unstable();
        b.add_block(&mut hier, 0, vertices, rng)?;
    }
    Ok(hier)
}

impl SparseHierarchy {
    pub fn augmented_graph(&self, g: &MultiDigraph) -> Result<MultiDigraph> {
        let mut aug = g.clone();
        for a in &self.aux {
            aug.add_edge(a.from, a.to, a.length, a.delay)?;
        }
        Ok(aug)
    }

    /// Labels of the augmented graph: original edges, then auxiliary ones.
    pub fn augmented_labels(&self) -> Vec<SparseLabel> {
        let aux = self.aux.iter().map(|a| match a.kind {
            AuxKind::Star { level, .. } => SparseLabel::Star(level),
            AuxKind::Hop { .. } => SparseLabel::Hop,
        });
        self.labels.iter().copied().chain(aux).collect()
    }

    pub fn frequencies(&self) -> FrequencyAssignment {
        let SparseParams { delta_run, delta_block } = self.params;
        let intra = delta_block.div_ceil(delta_run);
        let values = self
            .augmented_labels()
            .into_iter()
            .map(|l| match l {
                SparseLabel::Dead => None,
                SparseLabel::IntraBlock | SparseLabel::Internal => Some(intra),
                _ => Some(delta_block),
            })
            .collect();
        FrequencyAssignment { values }
    }

    /// Real path for auxiliary edge `index`, as ids of `g`.
    pub fn expand(&self, g: &MultiDigraph, index: usize) -> Option<Vec<EdgeId>> {
        let a = &self.aux[index];
        match a.kind {
            AuxKind::Star { scc, .. } => {
                let c = &self.sccs[scc];
                let outward = a.from == c.center;
                let other = if outward { a.to } else { a.from };
                expand_star(g, &c.vertices, c.center, other, outward)
            }
            AuxKind::Hop { block, threshold } => {
                let b = &self.blocks[block];
                let local = |v: VertexId| b.vertices.iter().position(|&x| x == v);
                let path = b.table.recover_path(local(a.from)?, local(a.to)?, threshold).ok()??;
                Some(path.into_iter().map(|e| b.edge_map[e]).collect())
            }
        }
    }

    /// Label partition and finely-chopped checks.
    pub fn check(&self, g: &MultiDigraph) -> std::result::Result<(), String> {
        if let Some(e) = self.labels.iter().position(|l| *l == SparseLabel::Internal) {
            return Err(format!("edge {e} has no label"));
        }
        for (e, l) in self.labels.iter().enumerate() {
            if matches!(l, SparseLabel::Hop | SparseLabel::Star(_)) {
                return Err(format!("original edge {e} carries an auxiliary label"));
            }
        }
        for (li, ids) in self.per_level.iter().enumerate() {
            let size: Vec<usize> = ids.iter().map(|&i| self.sccs[i].vertices.len()).collect();
            let small: Vec<bool> = ids.iter().map(|&i| self.sccs[i].class == SccClass::Small).collect();
            let parent: Vec<Option<usize>> = ids.iter().map(|&i| self.sccs[i].parent).collect();
            let mut blocks = Vec::new();
            for b in self.blocks.iter().filter(|b| b.level == li as u32 + 1) {
                let members: Vec<usize> = (0..ids.len())
                    .filter(|&p| small[p] && b.vertices.binary_search(&self.sccs[ids[p]].vertices[0]).is_ok())
                    .collect();
                blocks.push(members);
            }
            check_finely_chopped(&size, &small, &parent, &blocks, self.params.delta_block)?;
        }
        for b in &self.blocks {
            for (e, edge) in g.edges().iter().enumerate() {
                let inside = |v| b.vertices.binary_search(&v).is_ok();
                if inside(edge.from) && inside(edge.to) && self.labels[e] != SparseLabel::IntraBlock {
                    return Err(format!("edge {e} inside a block is not intra-block"));
                }
            }
        }
        Ok(())
    }

    pub fn hop_count(&self) -> usize {
        self.aux.iter().filter(|a| matches!(a.kind, AuxKind::Hop { .. })).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn params_follow_density() {
        let p = sparse_params(1024, 1024);
        assert_eq!(p, SparseParams { delta_run: 4, delta_block: 64 });
        let p = sparse_params(1024, 1024 * 32);
        assert_eq!(p.delta_run, 1);
        assert_eq!(p.delta_block, 32);
    }

    #[test]
    fn chopping_splits_at_parents_and_big_sccs() {
        let size = [1, 1, 5, 1, 1, 1];
        let small = [true, true, false, true, true, true];
        let parent = [Some(0), Some(0), Some(0), Some(0), Some(1), Some(1)];
        let blocks = partition_finely_chopped(&size, &small, &parent, 4);
        assert_eq!(blocks, vec![vec![0, 1], vec![3], vec![4], vec![5]]);
        check_finely_chopped(&size, &small, &parent, &blocks, 4).unwrap();
        assert!(check_finely_chopped(&size, &small, &parent, &[vec![0, 1, 3], vec![4, 5]], 4).is_err());
    }

    #[test]
    fn heavy_dag_becomes_blocks() {
        let g = MultiDigraph::from_edges(6, &[(0, 1, 5.0, 5.0), (1, 2, 5.0, 5.0), (2, 3, 5.0, 5.0), (3, 4, 5.0, 5.0), (4, 5, 5.0, 5.0)]).unwrap();
        let params = SparseParams { delta_run: 1, delta_block: 2 };
        let h = build_sparse_hierarchy(&g, 0.3, 20.0, params, &SparseConfig::default(), &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        h.check(&g).unwrap();
        assert_eq!(h.blocks.len(), 3);
        assert_eq!(h.labels.iter().filter(|l| **l == SparseLabel::IntraBlock).count(), 3);
        let aug = h.augmented_graph(&g).unwrap();
        for i in 0..h.aux.len() {
            let path = h.expand(&g, i).unwrap();
            let a = &h.aux[i];
            assert!(g.is_walk(a.from, Some(a.to), &path));
            assert!(g.path_length(&path) <= a.length && g.path_delay(&path) <= a.delay);
        }
        assert_eq!(h.frequencies().len(), aug.m());
    }

    #[test]
    fn giant_light_scc_is_dead() {
        let edges: Vec<_> = (0..12).map(|i| (i, (i + 1) % 12, 0.01, 0.01)).collect();
        let g = MultiDigraph::from_edges(12, &edges).unwrap();
        let params = SparseParams { delta_run: 1, delta_block: 3 };
        let h = build_sparse_hierarchy(&g, 0.3, 20.0, params, &SparseConfig::default(), &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        h.check(&g).unwrap();
        assert!(h.labels.iter().all(|l| *l == SparseLabel::Dead));
        assert_eq!(h.aux.len(), 22);
        assert!(h.frequencies().values[..12].iter().all(|p| p.is_none()));
    }
}
