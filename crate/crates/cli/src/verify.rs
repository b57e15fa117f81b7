//! Property suites over one input graph and a sweep of seeds. Each check
//! prints `suite=<name> seed=<s> status=<pass|fail> detail=<text>`; a final
//! `summary` line counts them.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rsp_core::dense::build_dense_hierarchy;
use rsp_core::gap::{normalize, solve_dense, solve_sparse};
use rsp_core::graph::{MultiDigraph, INF};
use rsp_core::ldd::{combined_weights, estimate_hitting_rate, hitting_overhead, ldd, verify_bounded_diameter, DEFAULT_RADIUS_RATE};
use rsp_core::oracle::{exact_frontier, OracleMode, DEFAULT_LABEL_CAP};
use rsp_core::sparse::{build_sparse_hierarchy, sparse_params};

use crate::{emit, load, solve_config, CliResult, Failure};

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    /// Bounded diameter of every LDD, plus per-edge hitting rates.
    Ldd,
    /// Order, nesting and large-SCC accounting of the dense hierarchy.
    Dense,
    /// Labels and finely chopped blocks of the sparse hierarchy.
    Sparse,
    /// Solver answers against exact frontiers.
    Oracle,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Fault {
    /// Replace every LDD cut by the empty set.
    EmptyCut,
}

#[derive(Args)]
pub struct VerifyArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "ldd,dense,sparse,oracle")]
    suites: Vec<Suite>,
    /// First seed of the sweep.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of seeds.
    #[arg(long, default_value_t = 10)]
    trials: u64,
    /// LDD diameter bound and solver delay budget (default: a quarter of
    /// the total combined weight).
    #[arg(long)]
    delay: Option<f64>,
    /// Length guess used to normalize the graph for the hierarchy suites
    /// (default: the total length).
    #[arg(long)]
    length: Option<f64>,
    #[arg(long, default_value_t = 0.3)]
    eps: f64,
    #[arg(long, default_value_t = 1)]
    source: usize,
    #[arg(long, default_value = "")]
    constants: String,
    /// Corrupt a component on purpose, to see the checks catch it.
    #[arg(long, value_enum)]
    inject: Option<Fault>,
    #[arg(long)]
    output: Option<PathBuf>,
}

struct Report {
    text: String,
    passed: usize,
    failed: usize,
}

impl Report {
    fn record(&mut self, suite: &str, seed: u64, result: Result<String, String>) {
        let (status, detail) = match result {
            Ok(d) => {
                self.passed += 1;
                ("pass", d)
            }
            Err(d) => {
                self.failed += 1;
                ("fail", d)
            }
        };
        let _ = writeln!(self.text, "suite={suite} seed={seed} status={status} detail={}", detail.replace('\n', " "));
    }
}

fn check_ldd(g: &MultiDigraph, d: f64, seed: u64, fault: Option<Fault>) -> Result<String, String> {
    let w = combined_weights(g);
    let (mut cut, _) = ldd(g, &w, d, DEFAULT_RADIUS_RATE, &mut ChaCha8Rng::seed_from_u64(seed)).map_err(|e| e.to_string())?;
    if fault == Some(Fault::EmptyCut) {
        cut.clear();
    }
    verify_bounded_diameter(g, &w, &cut, d).map_err(|v| format!("distance {} from {} to {} exceeds {d}", v.distance, v.from + 1, v.to + 1))?;
    Ok(format!("{} edges cut", cut.len()))
}

fn check_hitting(g: &MultiDigraph, d: f64, seed: u64, trials: usize) -> Result<String, String> {
    let w = combined_weights(g);
    let rates = estimate_hitting_rate(g, &w, d, trials, seed).map_err(|e| e.to_string())?;
    let overhead = hitting_overhead(g.n());
    for (e, &r) in rates.iter().enumerate() {
        let bound = w[e] / d * overhead + 0.02;
        if r > bound {
            return Err(format!("edge {} cut with rate {r} above {bound}", e + 1));
        }
    }
    Ok(format!("{trials} trials within (w/D)·log³n + 0.02"))
}

fn check_oracle(g: &MultiDigraph, args: &VerifyArgs, d: f64, seed: u64) -> Result<String, String> {
    let s = args.source.checked_sub(1).filter(|&s| s < g.n()).ok_or("source out of range")?;
    let config = solve_config(&args.constants, None).map_err(|_| "bad constants".to_string())?;
    let frontiers = exact_frontier(g, s, OracleMode::LabelCorrecting, DEFAULT_LABEL_CAP).map_err(|e| e.to_string())?;
    let eps = args.eps;
    let mut misses = 0;
    for (name, sol) in [
        ("dense", solve_dense(g, s, d, eps, &config, &mut ChaCha8Rng::seed_from_u64(seed))),
        ("sparse", solve_sparse(g, s, d, eps, &config, &mut ChaCha8Rng::seed_from_u64(seed))),
    ] {
        let sol = sol.map_err(|e| e.to_string())?;
        for (t, f) in frontiers.iter().enumerate() {
            let value = sol.lengths[t];
            if let Some(w) = &sol.witnesses[t] {
                if w.length > value || w.delay > (1.0 + eps) * d || !g.is_walk(s, Some(t), &w.path) {
                    return Err(format!("{name}: witness for {} breaks its bounds", t + 1));
                }
            } else if value < INF {
                return Err(format!("{name}: finite answer for {} without a path", t + 1));
            }
            if value > (1.0 + eps) * f.dist(d) {
                misses += 1;
            }
        }
        if misses > 1 {
            return Err(format!("{name}: {misses} targets above (1+eps)·dist"));
        }
        misses = 0;
    }
    Ok(format!("dense and sparse agree with {} exact frontiers", frontiers.len()))
}

pub fn run(args: &VerifyArgs) -> CliResult<()> {
    let g = load(&args.input)?;
    let total: f64 = combined_weights(&g).iter().sum();
    let d = args.delay.unwrap_or(total / 4.0);
    if !(d > 0.0) {
        return Err(Failure::Usage("delay must be positive; pass --delay".into()));
    }
    let l = args.length.unwrap_or(g.edges().iter().map(|e| e.length).sum::<f64>());
    if !(l > 0.0) || !(args.eps > 0.0 && args.eps < 1.0) {
        return Err(Failure::Usage("need a positive length guess and eps in (0, 1)".into()));
    }
    // The hierarchies expect both budgets scaled to n/ε.
    let scaled = normalize(&g, l, d, args.eps)?;
    let budget = g.n() as f64 / args.eps;
    let mut report = Report { text: String::new(), passed: 0, failed: 0 };
    for seed in args.seed..args.seed + args.trials {
        for &suite in &args.suites {
            match suite {
                Suite::Ldd => report.record("ldd", seed, check_ldd(&g, d, seed, args.inject)),
                Suite::Dense => {
                    let r = build_dense_hierarchy(&scaled, &mut ChaCha8Rng::seed_from_u64(seed))
                        .map_err(|e| e.to_string())
                        .and_then(|h| h.check(&scaled).map(|_| format!("{} sccs, {} star edges", h.sccs.len(), h.stars.len())));
                    report.record("dense", seed, r);
                }
                Suite::Sparse => {
                    let params = sparse_params(g.n(), g.m());
                    let r = build_sparse_hierarchy(&scaled, args.eps, budget, params, &Default::default(), &mut ChaCha8Rng::seed_from_u64(seed))
                        .map_err(|e| e.to_string())
                        .and_then(|h| h.check(&scaled).map(|_| format!("{} blocks, {} hop edges", h.blocks.len(), h.hop_count())));
                    report.record("sparse", seed, r);
                }
                Suite::Oracle => report.record("oracle", seed, check_oracle(&g, args, d, seed)),
            }
        }
    }
    if args.suites.contains(&Suite::Ldd) && args.inject.is_none() {
        report.record("ldd-hitting", args.seed, check_hitting(&g, d, args.seed, 200));
    }
    let _ = writeln!(report.text, "summary passed={} failed={}", report.passed, report.failed);
    emit(&args.output, &report.text)?;
    if report.failed > 0 {
        return Err(Failure::Verification(format!("{} check(s) failed", report.failed)));
    }
    Ok(())
}
