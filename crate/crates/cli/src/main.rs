//! `rsp`: instance generation, solvers, exact oracle, property checks and
//! benchmark CSVs for restricted shortest paths.
//!
//! Vertices are 1-based on the command line and in every output, matching
//! the graph file format. Exit codes: 0 success, 1 verification failure,
//! 2 usage or input error, 3 resource cap.

mod verify;

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rsp_core::allpairs::{all_pairs_preprocess, AllPairsConfig, AllPairsTable};
use rsp_core::dp::DpEngine;
use rsp_core::gap::{gap_solve, solve_dag, solve_dense, solve_sparse, solve_uniform_dp, Constants, HierarchyKind, RspSolution, SolveConfig};
use rsp_core::generate::{generate, GenSpec, GraphKind};
use rsp_core::graph::{MultiDigraph, INF};
use rsp_core::io::{format_graph, read_graph};
use rsp_core::oracle::{exact_frontier, OracleMode, DEFAULT_LABEL_CAP};
use rsp_core::RspError;

#[derive(Parser)]
#[command(name = "rsp", version, about = "Approximate restricted shortest paths")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a random instance in the graph file format.
    Gen(GenArgs),
    /// (1+ε, 1+ε) single-source solver for dense graphs.
    SolveDense(SolveArgs),
    /// (1+ε, 1+ε) single-source solver for sparse graphs.
    SolveSparse(SolveArgs),
    /// (1, 1+ε) single-source solver for DAGs.
    SolveDag(SolveArgs),
    /// (1, 1+ε) single-source DP with every edge inspected at every step.
    SolveDp(DpArgs),
    /// Preprocess (or load) an all-pairs table and answer every pair.
    AllPairs(AllPairsArgs),
    /// Exact distances from the Pareto frontier.
    Oracle(OracleArgs),
    /// Run property suites and print one line per check.
    Verify(verify::VerifyArgs),
    /// Solver work counters over a size sweep, as CSV.
    Bench(BenchArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_parser = parse_kind)]
    kind: GraphKind,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    m: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Length range `lo:hi`.
    #[arg(long, default_value = "1:10", value_parser = parse_range)]
    length_range: (f64, f64),
    /// Delay range `lo:hi`.
    #[arg(long, default_value = "1:10", value_parser = parse_range)]
    delay_range: (f64, f64),
    /// Draw reals instead of whole numbers.
    #[arg(long)]
    real: bool,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 1)]
    source: usize,
    /// Delay budget D.
    #[arg(long)]
    delay: f64,
    #[arg(long, default_value_t = 0.3)]
    eps: f64,
    #[arg(long)]
    output: Option<PathBuf>,
    /// Append a wall-clock column; output is no longer reproducible.
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Gap trials per length guess (default ⌈2 log₂ n⌉).
    #[arg(long)]
    trials: Option<usize>,
    /// Overrides such as `c_h=2,c_s=3`.
    #[arg(long, default_value = "")]
    constants: String,
    /// Answer one gap instance at this length guess instead of solving.
    #[arg(long, conflicts_with = "trials")]
    length: Option<f64>,
}

#[derive(Args)]
struct DpArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum, default_value_t = Engine::EventDriven)]
    engine: Engine,
}

#[derive(Clone, Copy, ValueEnum)]
enum Engine {
    Scheduled,
    EventDriven,
}

#[derive(Args)]
struct AllPairsArgs {
    #[arg(long)]
    input: PathBuf,
    /// Queried delay budget; also the top of the preprocessed range.
    #[arg(long)]
    delay: f64,
    /// Bottom of the preprocessed delay range (default: the queried budget).
    #[arg(long)]
    delay_min: Option<f64>,
    #[arg(long, default_value_t = 0.3)]
    eps: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "")]
    constants: String,
    /// Load the table from this file if it exists, otherwise save it there.
    #[arg(long)]
    cache: Option<PathBuf>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 1)]
    source: usize,
    #[arg(long)]
    delay: f64,
    /// Enumerate simple paths instead of label correcting (n ≤ 12).
    #[arg(long)]
    exhaustive: bool,
    /// Give up (exit 3) once this many labels are alive.
    #[arg(long, default_value_t = DEFAULT_LABEL_CAP)]
    label_cap: usize,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Solver {
    Dense,
    Sparse,
    Dag,
    Dp1,
    AllPairs,
    Oracle,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_enum)]
    solver: Solver,
    #[arg(long, value_parser = parse_kind, default_value = "random-digraph")]
    kind: GraphKind,
    /// Comma-separated vertex counts.
    #[arg(long, value_delimiter = ',', default_value = "16,32,64")]
    sizes: Vec<usize>,
    /// Edges per vertex.
    #[arg(long, default_value_t = 4)]
    m_factor: usize,
    #[arg(long, default_value_t = 0.3)]
    eps: f64,
    /// Delay budget as a multiple of the mean edge delay times log₂ n.
    #[arg(long, default_value_t = 2.0)]
    delay: f64,
    #[arg(long, default_value_t = 3)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "")]
    constants: String,
    /// Append a wall-clock column; output is no longer reproducible.
    #[arg(long)]
    timing: bool,
    #[arg(long)]
    output: Option<PathBuf>,
}

fn parse_kind(s: &str) -> Result<GraphKind, String> {
    s.parse().map_err(|e: RspError| e.to_string())
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(':').ok_or("expected lo:hi")?;
    let lo: f64 = lo.parse().map_err(|_| format!("bad number {lo:?}"))?;
    let hi: f64 = hi.parse().map_err(|_| format!("bad number {hi:?}"))?;
    Ok((lo, hi))
}

pub(crate) enum Failure {
    Usage(String),
    Verification(String),
    Cap(String),
}

impl From<RspError> for Failure {
    fn from(e: RspError) -> Self {
        match e {
            RspError::ResourceCap(_) => Failure::Cap(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

pub(crate) type CliResult<T> = Result<T, Failure>;

pub(crate) fn emit(output: &Option<PathBuf>, text: &str) -> CliResult<()> {
    match output {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub(crate) fn load(path: &PathBuf) -> CliResult<MultiDigraph> {
    read_graph(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn source_index(g: &MultiDigraph, source: usize) -> CliResult<usize> {
    if source == 0 || source > g.n() {
        return Err(Failure::Usage(format!("source {source} outside 1..={}", g.n())));
    }
    Ok(source - 1)
}

pub(crate) fn solve_config(constants: &str, trials: Option<usize>) -> CliResult<SolveConfig> {
    let mut config = SolveConfig::with_constants(Constants::parse(constants)?);
    config.trials = trials;
    Ok(config)
}

/// One row per target: `t,length,witness_length,witness_delay,dp_inspections,ldd_carves[,wall_ms]`.
fn solution_csv(sol: &RspSolution, wall_ms: Option<f64>) -> String {
    let mut out = String::from("t,length,witness_length,witness_delay,dp_inspections,ldd_carves");
    if wall_ms.is_some() {
        out.push_str(",wall_ms");
    }
    out.push('\n');
    for (t, &length) in sol.lengths.iter().enumerate() {
        let (wl, wd) = sol.witnesses[t].as_ref().map_or((INF, INF), |w| (w.length, w.delay));
        let _ = write!(out, "{},{length},{wl},{wd},{},{}", t + 1, sol.stats.dp_inspections, sol.stats.ldd_carves);
        if let Some(ms) = wall_ms {
            let _ = write!(out, ",{ms}");
        }
        out.push('\n');
    }
    out
}

fn run_solve(args: &SolveArgs, which: Solver) -> CliResult<()> {
    let c = &args.common;
    let g = load(&c.input)?;
    let s = source_index(&g, c.source)?;
    let config = solve_config(&args.constants, args.trials)?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    if let Some(l) = args.length {
        return run_gap(&g, s, l, args, which, &config, &mut rng);
    }
    let start = Instant::now();
    let sol = match which {
        Solver::Dense => solve_dense(&g, s, c.delay, c.eps, &config, &mut rng)?,
        Solver::Sparse => solve_sparse(&g, s, c.delay, c.eps, &config, &mut rng)?,
        _ => solve_dag(&g, s, c.delay, c.eps, &config, &mut rng)?,
    };
    let wall = c.timing.then(|| start.elapsed().as_secs_f64() * 1e3);
    emit(&c.output, &solution_csv(&sol, wall))
}

/// One row per target: `t,verdict,witness_length,witness_delay`.
fn run_gap(g: &MultiDigraph, s: usize, l: f64, args: &SolveArgs, which: Solver, config: &SolveConfig, rng: &mut ChaCha8Rng) -> CliResult<()> {
    let kind = match which {
        Solver::Dense => HierarchyKind::Dense,
        Solver::Sparse => HierarchyKind::Sparse,
        _ => return Err(Failure::Usage("--length applies to solve-dense and solve-sparse".into())),
    };
    let c = &args.common;
    let ans = gap_solve(g, s, l, c.delay, c.eps, kind, config, rng)?;
    let mut out = String::from("t,verdict,witness_length,witness_delay\n");
    for t in 0..g.n() {
        let verdict = if ans.yes[t] { "yes" } else { "no" };
        let (wl, wd) = ans.witnesses[t].as_ref().map_or((INF, INF), |p| (g.path_length(p), g.path_delay(p)));
        let _ = writeln!(out, "{},{verdict},{wl},{wd}", t + 1);
    }
    emit(&c.output, &out)
}

fn run_dp(args: &DpArgs) -> CliResult<()> {
    let c = &args.common;
    let g = load(&c.input)?;
    let s = source_index(&g, c.source)?;
    let engine = match args.engine {
        Engine::Scheduled => DpEngine::Scheduled,
        Engine::EventDriven => DpEngine::EventDriven,
    };
    let start = Instant::now();
    let sol = solve_uniform_dp(&g, s, c.delay, c.eps, engine)?;
    let wall = c.timing.then(|| start.elapsed().as_secs_f64() * 1e3);
    emit(&c.output, &solution_csv(&sol, wall))
}

fn run_all_pairs(args: &AllPairsArgs) -> CliResult<()> {
    let g = load(&args.input)?;
    let constants = Constants::parse(&args.constants)?;
    let config = AllPairsConfig { sample_factor: constants.c_s, ..AllPairsConfig::default() };
    let cached = match &args.cache {
        Some(path) if path.exists() => Some(AllPairsTable::load(path)?),
        _ => None,
    };
    let table = match cached {
        Some(t) => {
            if t.n() != g.n() {
                return Err(Failure::Usage(format!("cache holds {} vertices, graph has {}", t.n(), g.n())));
            }
            t
        }
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
            let lo = args.delay_min.unwrap_or(args.delay);
            let t = all_pairs_preprocess(&g, lo, args.delay, args.eps, &config, &mut rng)?;
            if let Some(path) = &args.cache {
                t.save(path)?;
            }
            t
        }
    };
    let mut out = String::from("s,t,length,witness_delay\n");
    for s in 0..g.n() {
        for t in 0..g.n() {
            let length = table.query(s, t, args.delay)?;
            // Tables loaded from a cache carry no paths.
            let delay = match table.recover_path(s, t, args.delay) {
                Ok(Some(p)) => g.path_delay(&p),
                _ => INF,
            };
            let _ = writeln!(out, "{},{},{length},{delay}", s + 1, t + 1);
        }
    }
    emit(&args.output, &out)
}

fn run_oracle(args: &OracleArgs) -> CliResult<()> {
    let g = load(&args.input)?;
    let s = source_index(&g, args.source)?;
    let mode = if args.exhaustive { OracleMode::Exhaustive } else { OracleMode::LabelCorrecting };
    let frontiers = exact_frontier(&g, s, mode, args.label_cap)?;
    let mut out = String::from("t,length,frontier_points\n");
    for (t, f) in frontiers.iter().enumerate() {
        let _ = writeln!(out, "{},{},{}", t + 1, f.dist(args.delay), f.0.len());
    }
    emit(&args.output, &out)
}

fn run_gen(args: &GenArgs) -> CliResult<()> {
    let spec = GenSpec {
        kind: args.kind,
        n: args.n,
        m: args.m,
        length: args.length_range,
        delay: args.delay_range,
        integral: !args.real,
    };
    let g = generate(&spec, args.seed)?;
    let note = format!("kind={:?} n={} m={} seed={}", args.kind, args.n, args.m, args.seed);
    emit(&args.output, &format_graph(&g, &[&note]))
}

fn run_bench(args: &BenchArgs) -> CliResult<()> {
    let config = solve_config(&args.constants, None)?;
    let mut out = String::from("solver,n,m,seed,dp_inspections,ldd_carves,gap_calls,aux_edges,max_depth");
    if args.timing {
        out.push_str(",wall_ms");
    }
    out.push('\n');
    for &n in &args.sizes {
        for trial in 0..args.trials {
            let seed = args.seed.wrapping_add(trial as u64);
            let spec = GenSpec { integral: false, ..GenSpec::new(args.kind, n, args.m_factor * n) };
            let g = generate(&spec, seed)?;
            let mean_delay = g.edges().iter().map(|e| e.delay).sum::<f64>() / g.m().max(1) as f64;
            let d = args.delay * mean_delay * (n.max(2) as f64).log2();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let start = Instant::now();
            let (inspections, carves, gaps, aux, depth) = match args.solver {
                Solver::Dense | Solver::Sparse | Solver::Dag | Solver::Dp1 => {
                    let sol = match args.solver {
                        Solver::Dense => solve_dense(&g, 0, d, args.eps, &config, &mut rng)?,
                        Solver::Sparse => solve_sparse(&g, 0, d, args.eps, &config, &mut rng)?,
                        Solver::Dag => solve_dag(&g, 0, d, args.eps, &config, &mut rng)?,
                        _ => solve_uniform_dp(&g, 0, d, args.eps, DpEngine::Scheduled)?,
                    };
                    let st = sol.stats;
                    (st.dp_inspections, st.ldd_carves, st.gap_calls, st.aux_edges, st.max_depth)
                }
                Solver::AllPairs => {
                    let t = all_pairs_preprocess(&g, d, d, args.eps, &config.sparse.all_pairs, &mut rng)?;
                    (t.dp_inspections, 0, 0, 0, n as u64)
                }
                Solver::Oracle => {
                    exact_frontier(&g, 0, OracleMode::LabelCorrecting, DEFAULT_LABEL_CAP)?;
                    (0, 0, 0, 0, 0)
                }
            };
            let name = args.solver.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default();
            let _ = write!(out, "{name},{n},{},{seed},{inspections},{carves},{gaps},{aux},{depth}", g.m());
            if args.timing {
                let _ = write!(out, ",{}", start.elapsed().as_secs_f64() * 1e3);
            }
            out.push('\n');
        }
    }
    emit(&args.output, &out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Gen(a) => run_gen(a),
        Command::SolveDense(a) => run_solve(a, Solver::Dense),
        Command::SolveSparse(a) => run_solve(a, Solver::Sparse),
        Command::SolveDag(a) => run_solve(a, Solver::Dag),
        Command::SolveDp(a) => run_dp(a),
        Command::AllPairs(a) => run_all_pairs(a),
        Command::Oracle(a) => run_oracle(a),
        Command::Verify(a) => verify::run(a),
        Command::Bench(a) => run_bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification(msg)) => {
            eprintln!("rsp: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("rsp: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Cap(msg)) => {
            eprintln!("rsp: {msg}");
            ExitCode::from(3)
        }
    }
}
