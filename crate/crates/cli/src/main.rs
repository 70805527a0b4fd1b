use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use torus_route::algorithms::{generate, unique_route_fraction};
use torus_route::cdg::CdgEdge;
use torus_route::metrics::pattern_loads;
use torus_route::routes::check_table;
use torus_route::{
    Algorithm, Error, GeneticParams, LoadReport, NodeId, Options, Prepared, RoutingTable, Topology,
    TrafficPattern,
};

const EXIT_VERIFY: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_UNROUTABLE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "torus-route",
    version,
    about = "Deterministic routing tables for torus networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a routing table and its load report.
    Generate(GenerateArgs),
    /// Check a routing table for completeness, minimality, rule compliance and deadlock freedom.
    Verify { topology: PathBuf, table: PathBuf },
    /// Score algorithms on traffic patterns as CSV.
    Compare(CompareArgs),
    /// Run algorithms over random topologies as CSV.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct Tuning {
    /// Seed for every random choice.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    population: usize,
    #[arg(long, default_value_t = 0.02)]
    mutation: f64,
    /// Generations without significant improvement before the genetic search stops.
    #[arg(long, default_value_t = 30)]
    stagnation: usize,
    /// Route every pair in groups, skipping the forced-route stage.
    #[arg(long)]
    no_unique_stage: bool,
    /// Allow topologies above the node ceiling.
    #[arg(long)]
    force: bool,
    #[arg(long, default_value_t = 512)]
    max_nodes: usize,
}

impl Tuning {
    fn options(&self) -> Options {
        Options {
            genetic: GeneticParams {
                population: self.population,
                mutation: self.mutation,
                stagnation: self.stagnation,
                seed: self.seed,
                ..GeneticParams::default()
            },
            sssp_unique_stage: !self.no_unique_stage,
        }
    }

    fn admit(&self, topo: &Topology) -> Result<(), Failure> {
        if topo.node_count() > self.max_nodes && !self.force {
            return Err(Failure::input(anyhow!(
                "{} nodes exceed the ceiling of {}; pass --force to proceed",
                topo.node_count(),
                self.max_nodes
            )));
        }
        Ok(())
    }
}

#[derive(Args)]
struct GenerateArgs {
    topology: PathBuf,
    #[arg(long, default_value = "sssp")]
    algo: Algorithm,
    /// Table file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report file; standard output when the table goes to a file, else standard error.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Include per-channel loads in the report.
    #[arg(long)]
    per_channel: bool,
    #[command(flatten)]
    tuning: Tuning,
}

#[derive(Args)]
struct CompareArgs {
    topology: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "bfs,genetic,sssp")]
    algos: Vec<Algorithm>,
    #[arg(long, value_delimiter = ',', default_value = "alltoall")]
    patterns: Vec<TrafficPattern>,
    /// Generations per algorithm; the reported wall time is the mean.
    #[arg(long, default_value_t = 1)]
    runs: usize,
    #[command(flatten)]
    tuning: Tuning,
}

#[derive(Args)]
struct SweepArgs {
    /// Number of dimensions.
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    min: usize,
    #[arg(long, default_value_t = 8)]
    max: usize,
    #[arg(long, default_value_t = 20)]
    samples: usize,
    #[arg(long, value_delimiter = ',', default_value = "bfs,sssp")]
    algos: Vec<Algorithm>,
    /// CSV file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Add a wall-time column (makes output run-dependent).
    #[arg(long)]
    timing: bool,
    #[command(flatten)]
    tuning: Tuning,
}

struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl Failure {
    fn input(error: anyhow::Error) -> Self {
        Failure {
            code: EXIT_INPUT,
            error,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Unroutable(_) => EXIT_UNROUTABLE,
            _ => EXIT_INPUT,
        };
        Failure {
            code,
            error: e.into(),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        Failure::input(error)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = std::env::var("TORUS_ROUTE_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
    {
        // only fails if a pool already exists
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads.max(1))
            .build_global();
    }
    let outcome = match cli.command {
        Command::Generate(args) => cmd_generate(&args),
        Command::Verify { topology, table } => cmd_verify(&topology, &table),
        Command::Compare(args) => cmd_compare(&args),
        Command::Sweep(args) => cmd_sweep(&args),
    };
    match outcome {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn load_topology(path: &Path) -> Result<Arc<Topology>, Failure> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read topology {}", path.display()))?;
    let topo = Topology::parse(&text).with_context(|| format!("in {}", path.display()))?;
    Ok(Arc::new(topo))
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

/// Build the routing graph and run one generator, naming unroutable pairs.
fn run_algorithm(
    prepared: &Prepared,
    algo: Algorithm,
    opts: &Options,
) -> Result<torus_route::Generated, Failure> {
    generate(algo, &prepared.rg, opts).map_err(|e| {
        if let Error::Unroutable(pairs) = &e {
            let topo = prepared.rg.topology();
            for &(a, b) in pairs {
                eprintln!(
                    "unroutable: {} -> {}",
                    topo.format_node(a),
                    topo.format_node(b)
                );
            }
        }
        Failure::from(e)
    })
}

fn cmd_generate(args: &GenerateArgs) -> Result<ExitCode, Failure> {
    let topo = load_topology(&args.topology)?;
    args.tuning.admit(&topo)?;
    let prepared = Prepared::new(&topo)?;
    let generated = run_algorithm(&prepared, args.algo, &args.tuning.options())?;
    let report = pattern_loads(
        &generated.table,
        TrafficPattern::Alltoall,
        &[4],
        args.per_channel,
    )?;
    let json = serde_json::to_string_pretty(&report).context("cannot serialize report")? + "\n";

    write_output(args.out.as_deref(), &generated.table.to_text())?;
    match (&args.report, &args.out) {
        (Some(p), _) => write_output(Some(p), &json)?,
        (None, Some(_)) => print!("{json}"),
        (None, None) => eprint!("{json}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(topology: &Path, table: &Path) -> Result<ExitCode, Failure> {
    let topo = load_topology(topology)?;
    let text = fs::read_to_string(table)
        .with_context(|| format!("cannot read table {}", table.display()))?;
    let table =
        RoutingTable::from_text(&topo, &text).with_context(|| format!("in {}", table.display()))?;
    let prepared = Prepared::new(&topo)?;
    let check = check_table(&table, &prepared.rg);

    let mut failed = false;
    let mut fail = |class: &str, detail: String| {
        failed = true;
        println!("FAIL {class}: {detail}");
    };
    let pair =
        |(a, b): (NodeId, NodeId)| format!("{} -> {}", topo.format_node(a), topo.format_node(b));
    for &p in &check.missing {
        fail("completeness", format!("no route {}", pair(p)));
    }
    for (p, v) in &check.violations {
        fail("rules", format!("{}: {v}", pair(*p)));
    }
    for &(p, len, min) in &check.non_minimal {
        fail(
            "minimality",
            format!("{}: length {len}, shortest {min}", pair(p)),
        );
    }

    // every turn a route takes must be a dependency of the certified graph
    let mut foreign = 0usize;
    for route in table.iter() {
        let channels: Vec<usize> = route.channels(&topo).collect();
        for w in channels.windows(2) {
            let e = CdgEdge {
                from: w[0],
                to: w[1],
            };
            if !prepared.cdg.has_edge(e) {
                foreign += 1;
                if foreign <= 10 {
                    fail(
                        "deadlock",
                        format!(
                            "{}: turn [{}, {}] is not a permitted dependency",
                            pair((route.src, route.dst)),
                            topo.format_channel(topo.channel_at(e.from)),
                            topo.format_channel(topo.channel_at(e.to))
                        ),
                    );
                }
            }
        }
    }
    if let Err(e) = prepared.cdg.assert_deadlock_free() {
        fail("deadlock", e.to_string());
    }

    if failed {
        Ok(ExitCode::from(EXIT_VERIFY))
    } else {
        println!(
            "ok: {} routes, {} relaxed turns",
            table.len(),
            prepared.added().len()
        );
        Ok(ExitCode::SUCCESS)
    }
}

fn cmd_compare(args: &CompareArgs) -> Result<ExitCode, Failure> {
    if args.runs == 0 {
        return Err(Failure::input(anyhow!("--runs must be at least 1")));
    }
    let topo = load_topology(&args.topology)?;
    args.tuning.admit(&topo)?;
    let prepared = Prepared::new(&topo)?;
    let opts = args.tuning.options();
    let mut out = String::from("algo,pattern,pi,sigma4,gamma_perfect,max_d,wall_time\n");
    for &algo in &args.algos {
        let mut elapsed = 0.0;
        let mut last = None;
        for _ in 0..args.runs {
            let start = Instant::now();
            let generated = run_algorithm(&prepared, algo, &opts)?;
            elapsed += start.elapsed().as_secs_f64();
            last = Some(generated);
        }
        let generated = last.expect("at least one run");
        let wall = elapsed / args.runs as f64;
        for &pattern in &args.patterns {
            let r = pattern_loads(&generated.table, pattern, &[4], false)?;
            writeln!(
                out,
                "{algo},{pattern},{},{:.6},{:.6},{},{wall:.6}",
                r.pi,
                r.sigma(4).unwrap_or(0.0),
                r.gamma_perfect,
                r.max_d
            )
            .unwrap();
        }
    }
    print!("{out}");
    Ok(ExitCode::SUCCESS)
}

fn cmd_sweep(args: &SweepArgs) -> Result<ExitCode, Failure> {
    if !(1..=4).contains(&args.n) || args.min < 2 || args.min > args.max || args.samples == 0 {
        return Err(Failure::input(anyhow!(
            "need 1 <= n <= 4, 2 <= min <= max and at least one sample"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(args.tuning.seed);
    let samples: Vec<Vec<usize>> = (0..args.samples)
        .map(|_| {
            (0..args.n)
                .map(|_| rng.gen_range(args.min..=args.max))
                .collect()
        })
        .collect();
    let opts = args.tuning.options();

    let rows: Vec<Result<String, String>> = samples
        .par_iter()
        .enumerate()
        .map(|(i, dims)| sweep_one(i, dims, args, &opts))
        .collect();

    let mut out =
        String::from("sample,dims,nodes,algo,pi,sigma4,pi_ratio,unique_fraction,sssp_calls");
    if args.timing {
        out.push_str(",wall_time");
    }
    out.push('\n');
    for row in rows {
        match row {
            Ok(lines) => out.push_str(&lines),
            Err(msg) => eprintln!("{msg}"),
        }
    }
    write_output(args.out.as_deref(), &out)?;
    Ok(ExitCode::SUCCESS)
}

fn sweep_one(i: usize, dims: &[usize], args: &SweepArgs, opts: &Options) -> Result<String, String> {
    let label = dims
        .iter()
        .map(usize::to_string)
        .collect::<Vec<_>>()
        .join("x");
    let skip = |e: &dyn std::fmt::Display| format!("sample {i} ({label}): skipped: {e}");
    let topo = Arc::new(Topology::torus(dims).map_err(|e| skip(&e))?);
    args.tuning.admit(&topo).map_err(|f| skip(&f.error))?;
    let prepared = Prepared::new(&topo).map_err(|e| skip(&e))?;
    let unique = unique_route_fraction(&prepared.rg);

    let score = |algo: Algorithm| -> Result<(LoadReport, usize, f64), String> {
        let start = Instant::now();
        let g = generate(algo, &prepared.rg, opts).map_err(|e| skip(&e))?;
        let wall = start.elapsed().as_secs_f64();
        let r = LoadReport::for_table(&g.table).map_err(|e| skip(&e))?;
        Ok((r, g.stats.sssp_calls, wall))
    };
    let baseline = score(Algorithm::Bfs)?;
    let mut lines = String::new();
    for &algo in &args.algos {
        let (r, calls, wall) = if algo == Algorithm::Bfs {
            baseline.clone()
        } else {
            score(algo)?
        };
        let ratio = r.pi as f64 / baseline.0.pi.max(1) as f64;
        write!(
            lines,
            "{i},{label},{},{algo},{},{:.6},{ratio:.6},{unique:.6},{calls}",
            topo.node_count(),
            r.pi,
            r.sigma(4).unwrap_or(0.0),
        )
        .unwrap();
        if args.timing {
            write!(lines, ",{wall:.6}").unwrap();
        }
        lines.push('\n');
    }
    Ok(lines)
}
