//! Gap decision problems and the sweep that turns them into
//! `(1+ε, 1+ε)`-approximate restricted shortest paths.
//!
//! A gap instance asks, for a length guess `L` and delay budget `D`, which
//! targets have a path of length about `L` and delay about `D`. Lengths and
//! delays are normalized so both budgets become `n/ε`, a hierarchy adds
//! path-faithful shortcut edges and frequencies, and one frequency-driven DP
//! answers every target at once. The sweep tries `L = (1+ε*)^i` and keeps,
//! for each target, the first guess that is accepted.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dense::{build_dense_hierarchy, DenseHierarchy};
use crate::dp::{pi_dp_preprocess, DpEngine, DpParams, FrequencyAssignment};
use crate::error::{invalid, Result, RspError};
use crate::graph::{dijkstra, tree_path, EdgeId, MultiDigraph, VertexId, INF};
use crate::sparse::{build_dag_blocks, build_sparse_hierarchy, sparse_params, SparseConfig, SparseHierarchy};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constants {
    /// Depth multiplier: `h = c_h · n · log^a n / ε`.
    pub c_h: f64,
    /// DP accuracy multiplier: `c_a · ε · log n`.
    pub c_a: f64,
    /// Additive slack of the acceptance threshold, in units of `n log n`.
    pub c_t: f64,
    /// Error constant of the gap answers; the sweep runs at `ε / (4 c log n)`.
    pub c_no: f64,
    /// DAG solver depth multiplier: `h = dag_h · n`.
    pub dag_h: f64,
    /// Sampling multiplier for hop sources and all-pairs levels.
    pub c_s: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Constants { c_h: 4.0, c_a: 1.0, c_t: 1.0, c_no: 1.0, dag_h: 5.0, c_s: 4.0 }
    }
}

impl Constants {
    /// Parses `key=value,key=value` on top of the defaults.
    pub fn parse(spec: &str) -> Result<Constants> {
        let mut c = Constants::default();
        for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| RspError::InvalidParameter(format!("expected key=value, got {item:?}")))?;
            let v: f64 = value
                .trim()
                .parse()
                .map_err(|_| RspError::InvalidParameter(format!("bad number for {key}: {value:?}")))?;
            if !(v > 0.0 && v.is_finite()) {
                return invalid(format!("constant {key} must be positive"));
            }
            match key.trim() {
                "c_h" => c.c_h = v,
                "c_a" => c.c_a = v,
                "c_t" => c.c_t = v,
                "c_no" => c.c_no = v,
                "dag_h" => c.dag_h = v,
                "c_s" => c.c_s = v,
                other => return invalid(format!("unknown constant {other:?}")),
            }
        }
        Ok(c)
    }

    fn validate(&self) -> Result<()> {
        if self.c_t > self.c_no || self.c_a > self.c_no {
            return invalid("c_t and c_a must not exceed c_no");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HierarchyKind {
    Dense,
    Sparse,
}

impl HierarchyKind {
    /// Exponent `a` of the depth bound `n log^a n / ε`.
    pub fn path_sum_exponent(self) -> i32 {
        match self {
            HierarchyKind::Dense => 4,
            HierarchyKind::Sparse => 6,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SolveConfig {
    pub constants: Constants,
    pub sparse: SparseConfig,
    /// Skip guesses for which no target can possibly be accepted.
    pub skip_provable_no: bool,
    /// Gap trials per guess; `None` uses `⌈2 log₂ n⌉`.
    pub trials: Option<usize>,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig::with_constants(Constants::default())
    }
}

impl SolveConfig {
    pub fn with_constants(constants: Constants) -> Self {
        let mut sparse = SparseConfig::default();
        sparse.sample_factor = constants.c_s;
        sparse.all_pairs.sample_factor = constants.c_s;
        SolveConfig { constants, sparse, skip_provable_no: true, trials: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub path: Vec<EdgeId>,
    pub length: f64,
    pub delay: f64,
}

impl Witness {
    fn new(g: &MultiDigraph, path: Vec<EdgeId>) -> Witness {
        Witness { length: g.path_length(&path), delay: g.path_delay(&path), path }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SolveStats {
    pub gap_calls: u64,
    pub dp_inspections: u64,
    pub ldd_carves: u64,
    pub aux_edges: u64,
    pub max_reciprocal_sum: f64,
    pub max_depth: u64,
}

impl SolveStats {
    fn absorb(&mut self, o: &SolveStats) {
        self.gap_calls += o.gap_calls;
        self.dp_inspections += o.dp_inspections;
        self.ldd_carves += o.ldd_carves;
        self.aux_edges += o.aux_edges;
        self.max_reciprocal_sum = self.max_reciprocal_sum.max(o.max_reciprocal_sum);
        self.max_depth = self.max_depth.max(o.max_depth);
    }
}

#[derive(Debug, Clone)]
pub struct RspSolution {
    pub lengths: Vec<f64>,
    pub witnesses: Vec<Option<Witness>>,
    pub stats: SolveStats,
}

#[derive(Debug, Clone)]
pub struct GapAnswer {
    pub yes: Vec<bool>,
    /// Real path behind each YES, as ids of the input graph.
    pub witnesses: Vec<Option<Vec<EdgeId>>>,
    pub stats: SolveStats,
}

pub fn log_n(n: usize) -> f64 {
    (n.max(2) as f64).log2().max(1.0)
}

/// Lengths scaled to `n ℓ / (ε L)` and delays to `n d / (ε D)`.
pub fn normalize(g: &MultiDigraph, l: f64, d: f64, eps: f64) -> Result<MultiDigraph> {
    let n = g.n() as f64;
    g.map_weights(|_, e| (n * e.length / (eps * l), n * e.delay / (eps * d)))
}

/// DP accuracy used inside a gap instance.
pub fn gap_dp_eps(eps: f64, n: usize, c: &Constants) -> f64 {
    (c.c_a * eps * log_n(n)).min(0.9)
}

enum Hierarchy {
    Dense(DenseHierarchy),
    Sparse(SparseHierarchy),
}

impl Hierarchy {
    fn expand(&self, g: &MultiDigraph, aux: usize) -> Option<Vec<EdgeId>> {
        match self {
            Hierarchy::Dense(h) => h.expand(g, aux),
            Hierarchy::Sparse(h) => h.expand(g, aux),
        }
    }
}

/// Replaces auxiliary edges (ids `>= base.m()`) by real paths.
fn expand_walk(base: &MultiDigraph, hier: &Hierarchy, walk: &[EdgeId]) -> Option<Vec<EdgeId>> {
    let mut out = Vec::new();
    for &e in walk {
        if e < base.m() {
            out.push(e);
        } else {
            out.extend(hier.expand(base, e - base.m())?);
        }
    }
    Some(out)
}

/// One gap instance: YES for `t` means some path has length at most
/// `(1 + c_t ε log n)·L` and delay at most `(1 + c_a ε log n)²·D`.
#[allow(clippy::too_many_arguments)]
pub fn gap_solve(g: &MultiDigraph, s: VertexId, l: f64, d: f64, eps: f64, kind: HierarchyKind, config: &SolveConfig, rng: &mut impl Rng) -> Result<GapAnswer> {
    let n = g.n();
    if s >= n {
        return Err(RspError::VertexOutOfRange { vertex: s, n });
    }
    if !(eps > 0.0 && eps < 1.0) || !(l > 0.0) || !(d > 0.0) {
        return invalid("gap instance needs 0 < eps < 1 and positive L, D");
    }
    let c = &config.constants;
    let lambda = log_n(n);
    let g_hat = normalize(g, l, d, eps)?;
    let eps_a = gap_dp_eps(eps, n, c);
    let budget = n as f64 / eps;
    let d_thr = (1.0 + eps_a) * budget;
    let mut stats = SolveStats { gap_calls: 1, ..Default::default() };
    let (hier, aug, freq): (Hierarchy, MultiDigraph, FrequencyAssignment) = match kind {
        HierarchyKind::Dense => {
            let h = build_dense_hierarchy(&g_hat, rng)?;
            let aug = h.augmented_graph(&g_hat)?;
            let f = h.frequencies(&aug);
            stats.ldd_carves = h.ldd_stats.carves;
            (Hierarchy::Dense(h), aug, f)
        }
        HierarchyKind::Sparse => {
            let params = sparse_params(n, g.m());
            let h = build_sparse_hierarchy(&g_hat, eps, d_thr, params, &config.sparse, rng)?;
            let aug = h.augmented_graph(&g_hat)?;
            let f = h.frequencies();
            stats.ldd_carves = h.ldd_stats.carves;
            (Hierarchy::Sparse(h), aug, f)
        }
    };
    let h_formula = (c.c_h * n as f64 * lambda.powi(kind.path_sum_exponent()) / eps).ceil();
    let h = (freq.simple_path_bound(n) as f64).min(h_formula).max(1.0) as u64;
    stats.aux_edges = (aug.m() - g.m()) as u64;
    stats.max_reciprocal_sum = freq.reciprocal_sum();
    stats.max_depth = h;
    let table = pi_dp_preprocess(
        &aug,
        &freq,
        DpParams { source: s, h, d_min: d_thr, d_max: d_thr, eps: eps_a, engine: DpEngine::EventDriven },
    )?;
    stats.dp_inspections = table.counters.edge_inspections;
    let yes_thr = budget + c.c_t * n as f64 * lambda;
    let k = table.query_index(d_thr)?;
    let mut yes = vec![false; n];
    let mut witnesses = vec![None; n];
    for t in 0..n {
        if table.value_at(t, k) <= yes_thr {
            let walk = table.path_at(t, k).ok_or_else(|| RspError::NoProvenance("dp walk".into()))?;
            let real = expand_walk(g, &hier, &walk).ok_or_else(|| RspError::NoProvenance("auxiliary edge".into()))?;
            yes[t] = true;
            witnesses[t] = Some(real);
        }
    }
    Ok(GapAnswer { yes, witnesses, stats })
}

/// Targets reachable from `s` over zero-length edges within delay `d`,
/// with a minimum-delay path for each.
pub fn zero_length_targets(g: &MultiDigraph, s: VertexId, d: f64) -> Vec<Option<Vec<EdgeId>>> {
    let (dist, pred) = dijkstra(g, s, false, |_, e| (e.length == 0.0).then_some(e.delay));
    (0..g.n()).map(|t| (dist[t] <= d).then(|| tree_path(g, &pred, t))).collect()
}

/// Lengths divided by the smallest positive length; returns the factor.
pub fn rescale_lengths(g: &MultiDigraph) -> Result<(MultiDigraph, f64)> {
    let scale = g.min_positive_length().unwrap_or(1.0);
    Ok((g.map_weights(|_, e| (e.length / scale, e.delay))?, scale))
}

/// The smallest edge length `γ` such that edges of length at most `γ`
/// already connect `s` to `t` within delay `d`; `dist(s,t,d)` lies in
/// `[γ, n·γ]`.
pub fn single_pair_gamma(g: &MultiDigraph, s: VertexId, t: VertexId, d: f64) -> Option<f64> {
    let mut lengths: Vec<f64> = g.edges().iter().map(|e| e.length).collect();
    lengths.sort_by(|a, b| a.total_cmp(b));
    lengths.dedup();
    let feasible = |x: f64| dijkstra(g, s, false, |_, e| (e.length <= x).then_some(e.delay)).0[t] <= d;
    if s == t {
        return Some(0.0);
    }
    if lengths.is_empty() || !feasible(*lengths.last()?) {
        return None;
    }
    let (mut lo, mut hi) = (0usize, lengths.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if feasible(lengths[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Some(lengths[lo])
}

fn check_inputs(g: &MultiDigraph, s: VertexId, d: f64, eps: f64) -> Result<()> {
    if s >= g.n() {
        return Err(RspError::VertexOutOfRange { vertex: s, n: g.n() });
    }
    if !(eps > 0.0 && eps < 1.0) {
        return invalid(format!("eps must lie in (0, 1), got {eps}"));
    }
    if !(d > 0.0 && d.is_finite()) {
        return invalid(format!("delay budget must be positive, got {d}"));
    }
    Ok(())
}

/// Sweeps length guesses and runs gap instances until every target that can
/// still be accepted has been.
///
/// For each target, `lengths[t] ≤ (1+ε)·dist(s,t,D)` with high probability,
/// and the witness has length at most `lengths[t]` and delay at most
/// `(1+ε)·D`. `target` restricts the sweep to one pair and narrows the guess
/// range around its `γ`.
#[allow(clippy::too_many_arguments)]
pub fn reduce_to_gap(
    g: &MultiDigraph,
    s: VertexId,
    d: f64,
    eps: f64,
    kind: HierarchyKind,
    target: Option<VertexId>,
    config: &SolveConfig,
    rng: &mut impl Rng,
) -> Result<RspSolution> {
    check_inputs(g, s, d, eps)?;
    let c = &config.constants;
    c.validate()?;
    let n = g.n();
    let lambda = log_n(n);
    let mut sol = RspSolution { lengths: vec![INF; n], witnesses: vec![None; n], stats: SolveStats::default() };
    let wanted = |t: VertexId| target.is_none_or(|x| x == t);
    for (t, zero) in zero_length_targets(g, s, d).into_iter().enumerate() {
        if let Some(path) = zero.filter(|_| wanted(t)) {
            sol.lengths[t] = 0.0;
            sol.witnesses[t] = Some(Witness::new(g, path));
        }
    }
    let (gs, scale) = rescale_lengths(g)?;
    let eg = eps / (4.0 * c.c_no * lambda);
    let eps_a = gap_dp_eps(eg, n, c);
    let (min_delay, _) = dijkstra(&gs, s, false, |_, e| Some(e.delay));
    let (shortest, _) = dijkstra(&gs, s, false, |_, e| Some(e.length));
    // A YES needs a real path within these budgets, so other targets never get one.
    let mut active: Vec<VertexId> = (0..n)
        .filter(|&t| wanted(t) && sol.lengths[t] == INF && min_delay[t] <= (1.0 + eps_a).powi(2) * d)
        .collect();
    let ln_step = (1.0 + eg).ln();
    let (lo, hi) = match target {
        Some(t) => match single_pair_gamma(&gs, s, t, d) {
            Some(gamma) if gamma > 0.0 => (gamma, (1.0 + eg) * n as f64 * gamma),
            _ => (1.0, 1.0),
        },
        None => (1.0, (1.0 + eg) * n as f64 * gs.aspect_ratio()),
    };
    let i_lo = (lo.ln() / ln_step).floor().max(0.0) as i64;
    let i_hi = (hi.ln() / ln_step).floor() as i64 + 1;
    let trials = config.trials.unwrap_or_else(|| (2.0 * (n.max(2) as f64).log2()).ceil() as usize).max(1);
    let accept_slack = 1.0 + c.c_t * eg * lambda;
    let report = 1.0 + c.c_no * eg * lambda;
    let mut i = i_lo;
    while i <= i_hi && !active.is_empty() {
        let l = ((i as f64) * ln_step).exp();
        if config.skip_provable_no {
            let floor = active.iter().map(|&t| shortest[t]).fold(INF, f64::min);
            if accept_slack * l < floor {
                i += 1;
                continue;
            }
        }
        for _ in 0..trials {
            let mut trial_rng = ChaCha8Rng::seed_from_u64(rng.gen());
            let ans = gap_solve(&gs, s, l, d, eg, kind, config, &mut trial_rng)?;
            sol.stats.absorb(&ans.stats);
            active.retain(|&t| {
                if !ans.yes[t] {
                    return true;
                }
                let path = ans.witnesses[t].clone().expect("witness for YES");
                sol.lengths[t] = report * l * scale;
                sol.witnesses[t] = Some(Witness::new(g, path));
                false
            });
            if active.is_empty() {
                break;
            }
        }
        i += 1;
    }
    Ok(sol)
}

pub fn solve_dense(g: &MultiDigraph, s: VertexId, d: f64, eps: f64, config: &SolveConfig, rng: &mut impl Rng) -> Result<RspSolution> {
    reduce_to_gap(g, s, d, eps, HierarchyKind::Dense, None, config, rng)
}

pub fn solve_sparse(g: &MultiDigraph, s: VertexId, d: f64, eps: f64, config: &SolveConfig, rng: &mut impl Rng) -> Result<RspSolution> {
    reduce_to_gap(g, s, d, eps, HierarchyKind::Sparse, None, config, rng)
}

/// `(1, 1+ε)` solver for DAGs: topological blocks with hop edges and a
/// single DP of depth `O(n)`. Every reported length is at most
/// `dist(s,t,D)` when the depth covers the optimal path.
pub fn solve_dag(g: &MultiDigraph, s: VertexId, d: f64, eps: f64, config: &SolveConfig, rng: &mut impl Rng) -> Result<RspSolution> {
    check_inputs(g, s, d, eps)?;
    let n = g.n();
    let inner = eps / 3.0;
    let top = (1.0 + inner) * d;
    let hier = build_dag_blocks(g, inner, top, sparse_params(n, g.m()), &config.sparse, rng)?;
    let aug = hier.augmented_graph(g)?;
    let freq = hier.frequencies();
    let h = ((config.constants.dag_h * n as f64).ceil() as u64).min(freq.simple_path_bound(n)).max(1);
    let table = pi_dp_preprocess(&aug, &freq, DpParams { source: s, h, d_min: top, d_max: top, eps: inner, engine: DpEngine::EventDriven })?;
    let hier = Hierarchy::Sparse(hier);
    let k = table.query_index(top)?;
    let mut sol = RspSolution {
        lengths: vec![INF; n],
        witnesses: vec![None; n],
        stats: SolveStats {
            gap_calls: 0,
            dp_inspections: table.counters.edge_inspections,
            ldd_carves: 0,
            aux_edges: (aug.m() - g.m()) as u64,
            max_reciprocal_sum: freq.reciprocal_sum(),
            max_depth: h,
        },
    };
    for t in 0..n {
        let value = table.value_at(t, k);
        if value < INF {
            let walk = table.path_at(t, k).ok_or_else(|| RspError::NoProvenance("dp walk".into()))?;
            let real = expand_walk(g, &hier, &walk).ok_or_else(|| RspError::NoProvenance("hop edge".into()))?;
            sol.lengths[t] = value;
            sol.witnesses[t] = Some(Witness::new(g, real));
        }
    }
    Ok(sol)
}

/// `(1, 1+ε)` answers from one uniform-frequency DP of depth `n`.
pub fn solve_uniform_dp(g: &MultiDigraph, s: VertexId, d: f64, eps: f64, engine: DpEngine) -> Result<RspSolution> {
    check_inputs(g, s, d, eps)?;
    let freq = FrequencyAssignment::uniform(g.m());
    let table = pi_dp_preprocess(g, &freq, DpParams { source: s, h: g.n() as u64, d_min: d, d_max: d, eps, engine })?;
    let mut sol = RspSolution {
        lengths: vec![INF; g.n()],
        witnesses: vec![None; g.n()],
        stats: SolveStats { dp_inspections: table.counters.edge_inspections, max_depth: table.h(), ..Default::default() },
    };
    for t in 0..g.n() {
        if let Some((value, path)) = table.query_path(t, d)? {
            sol.lengths[t] = value;
            sol.witnesses[t] = Some(Witness::new(g, path));
        }
    }
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_parse_and_reject() {
        let c = Constants::parse("c_h=2, c_t=0.5,c_s=3").unwrap();
        assert_eq!(c.c_h, 2.0);
        assert_eq!(SolveConfig::with_constants(c).sparse.all_pairs.sample_factor, 3.0);
        assert_eq!(c.c_t, 0.5);
        assert!(Constants::parse("nope=1").is_err());
        assert!(Constants::parse("c_h").is_err());
        assert!(Constants::parse("c_h=-1").is_err());
    }

    #[test]
    fn normalization_scales_budgets_to_n_over_eps() {
        let g = MultiDigraph::from_edges(2, &[(0, 1, 3.0, 6.0)]).unwrap();
        let h = normalize(&g, 3.0, 6.0, 0.5).unwrap();
        assert_eq!(h.edge(0).length, 4.0);
        assert_eq!(h.edge(0).delay, 4.0);
    }

    #[test]
    fn zero_length_targets_use_delay() {
        let g = MultiDigraph::from_edges(4, &[(0, 1, 0.0, 2.0), (1, 2, 0.0, 2.0), (0, 3, 1.0, 0.0)]).unwrap();
        let z = zero_length_targets(&g, 0, 3.0);
        assert_eq!(z[1], Some(vec![0]));
        assert_eq!(z[2], None);
        assert_eq!(z[3], None);
        assert_eq!(z[0], Some(vec![]));
    }

    #[test]
    fn gamma_brackets_distance() {
        let g = MultiDigraph::from_edges(3, &[(0, 1, 1.0, 5.0), (1, 2, 1.0, 5.0), (0, 2, 7.0, 1.0), (0, 2, 3.0, 4.0)]).unwrap();
        assert_eq!(single_pair_gamma(&g, 0, 2, 4.0), Some(3.0));
        assert_eq!(single_pair_gamma(&g, 0, 2, 10.0), Some(1.0));
        assert_eq!(single_pair_gamma(&g, 0, 2, 0.5), None);
    }

    #[test]
    fn direct_edge_gap_is_yes() {
        let g = MultiDigraph::from_edges(2, &[(0, 1, 1.0, 1.0)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for kind in [HierarchyKind::Dense, HierarchyKind::Sparse] {
            let ans = gap_solve(&g, 0, 2.0, 2.0, 0.1, kind, &SolveConfig::default(), &mut rng).unwrap();
            assert!(ans.yes[1]);
            assert_eq!(ans.witnesses[1], Some(vec![0]));
        }
    }

    #[test]
    fn solvers_agree_on_a_tiny_instance() {
        let g = MultiDigraph::from_edges(3, &[(0, 1, 1.0, 5.0), (1, 2, 1.0, 5.0), (0, 2, 7.0, 1.0)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let cfg = SolveConfig::default();
        for sol in [solve_dense(&g, 0, 10.0, 0.3, &cfg, &mut rng).unwrap(), solve_sparse(&g, 0, 10.0, 0.3, &cfg, &mut rng).unwrap()] {
            assert!(sol.lengths[2] <= 1.3 * 2.0);
            let w = sol.witnesses[2].as_ref().unwrap();
            assert!(w.delay <= 1.3 * 10.0 && w.length <= sol.lengths[2]);
        }
        let dag = solve_dag(&g, 0, 10.0, 0.3, &cfg, &mut rng).unwrap();
        assert_eq!(dag.lengths[2], 2.0);
    }
}
