//! Command-line interface for hypercube edge slicing.
//!
//! Exit codes: 0 when the relevant construction slices every edge (or the
//! command simply succeeds), 1 when a construction slices only part of the
//! cube, 2 on any error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use cubeslice::bounds::{subadditive_chain, upper_bound, BoundTable};
use cubeslice::cube::{self, PlaneSet, BRUTE_FORCE_LIMIT};
use cubeslice::fixtures;
use cubeslice::io::{format_construction, parse_construction};
use cubeslice::reduced::{build_grid, weighted_sliced_count, Composition, ReducedGrid};
use cubeslice::search::{run_search, FitnessMode, SearchConfig, SearchOutcome};
use cubeslice::tabu::{run_tabu, TabuConfig};

const WORKERS_ENV: &str = "CUBESLICE_WORKERS";

#[derive(Parser)]
#[command(
    name = "cubeslice",
    about = "Verify, count, and search for hyperplane collections slicing hypercube edges",
    version
)]
struct Cli {
    /// Verify every embedded fixture against its recorded count, then exit.
    #[arg(long, global = false)]
    selftest: bool,

    /// Emit machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Check which edges of Q_n a construction file slices.
    Verify(VerifyArgs),
    /// Adaptive edge-weighted hill climbing for k planes slicing Q_n.
    Search(SearchArgs),
    /// Tabu search for k planes slicing Q_n.
    Tabu(TabuArgs),
    /// Upper bound on S(n) with its subadditivity witness.
    Bound(BoundArgs),
    /// Best-known S(n,k) values.
    Table(TableArgs),
    /// Vertex, edge, and multiplicity statistics of a reduced grid.
    ReduceInfo(ReduceInfoArgs),
    /// List embedded golden constructions or export one.
    Fixture(FixtureArgs),
}

#[derive(Args)]
struct VerifyArgs {
    /// Construction file: per line, n coefficients then the bias.
    file: PathBuf,
    /// Ambient dimension override (otherwise inferred from the file).
    #[arg(long)]
    n: Option<usize>,
    /// List every unsliced edge.
    #[arg(long)]
    show_unsliced: bool,
}

#[derive(Args)]
struct SharedSearchArgs {
    /// Hypercube dimension.
    #[arg(long)]
    n: usize,
    /// Number of planes.
    #[arg(long)]
    k: usize,
    /// Comma-separated block sizes, e.g. 6,1,1,1,1.
    #[arg(long)]
    composition: String,
    /// Coefficient bound C: reduced coefficients stay in [-C, C].
    #[arg(long, default_value_t = 40)]
    coeff_bound: i64,
    /// Per-coordinate neighbor step bound d.
    #[arg(long, default_value_t = 3)]
    delta: i64,
    /// Pin the first block's reduced coefficient to this value.
    #[arg(long, allow_hyphen_values = true)]
    freeze_block: Option<i64>,
    /// Random seed; omit for a time-derived seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Wall-clock budget in seconds.
    #[arg(long, default_value_t = 60)]
    time_limit: u64,
    /// Parallel restart workers; defaults to $CUBESLICE_WORKERS or 1.
    #[arg(long)]
    workers: Option<usize>,
    /// Stop early once this many hypercube edges are sliced.
    #[arg(long)]
    target: Option<u64>,
    /// Write the best construction to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum FitnessArg {
    Plain,
    Weighted,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum OnOff {
    On,
    Off,
}

#[derive(Args)]
struct SearchArgs {
    #[command(flatten)]
    shared: SharedSearchArgs,
    /// Plain reduced-edge weights or multiplicity-weighted fitness.
    #[arg(long, value_enum, default_value_t = FitnessArg::Plain)]
    fitness: FitnessArg,
    /// Subtract the variance of per-plane reduced slice counts.
    #[arg(long, value_enum, default_value_t = OnOff::On)]
    variance_penalty: OnOff,
    /// Restart length: iterations without a coverage improvement.
    #[arg(long)]
    max_iterations: Option<u64>,
    /// Iterations without fitness improvement before weights rise.
    #[arg(long)]
    weight_period: Option<u64>,
    /// Cap on any edge weight.
    #[arg(long, default_value_t = 32)]
    weight_limit: u32,
}

#[derive(Args)]
struct TabuArgs {
    #[command(flatten)]
    shared: SharedSearchArgs,
    /// Restart once the seen set grows this far past the last improvement.
    #[arg(long, default_value_t = 20_000)]
    stagnation: u64,
    /// Frontier size bound.
    #[arg(long, default_value_t = 100_000)]
    frontier_cap: usize,
    /// Warm-start construction file for the first restart.
    #[arg(long)]
    init: Option<PathBuf>,
}

#[derive(Args)]
struct BoundArgs {
    #[arg(long)]
    n: u32,
}

#[derive(Args)]
struct TableArgs {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    k: Option<u32>,
}

#[derive(Args)]
struct ReduceInfoArgs {
    /// Comma-separated block sizes.
    #[arg(long)]
    composition: String,
    /// Expected dimension; must match the composition's sum when given.
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Args)]
struct FixtureArgs {
    /// Fixture name; omit to list all.
    #[arg(long)]
    name: Option<String>,
    /// Write the construction to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    if cli.selftest {
        return cmd_selftest(cli.json);
    }
    match cli.command {
        Some(Command::Verify(args)) => cmd_verify(args, cli.json),
        Some(Command::Search(args)) => cmd_search(args, cli.json),
        Some(Command::Tabu(args)) => cmd_tabu(args, cli.json),
        Some(Command::Bound(args)) => cmd_bound(args, cli.json),
        Some(Command::Table(args)) => cmd_table(args, cli.json),
        Some(Command::ReduceInfo(args)) => cmd_reduce_info(args, cli.json),
        Some(Command::Fixture(args)) => cmd_fixture(args, cli.json),
        None => bail!("no subcommand; try --help or --selftest"),
    }
}

fn load_construction(path: &Path, n: Option<usize>) -> Result<PlaneSet> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    parse_construction(&text, n).with_context(|| format!("parsing {}", path.display()))
}

fn cmd_verify(args: VerifyArgs, json: bool) -> Result<ExitCode> {
    let set = load_construction(&args.file, args.n)?;
    let verification = cube::verify_full(&set)?;
    let sliced = verification.sliced();
    let total = verification.total();
    if json {
        let unsliced: Vec<_> = verification
            .unsliced()
            .iter()
            .map(|e| {
                json!({
                    "dim": e.flip_index(),
                    "base": e.base().coords(),
                })
            })
            .collect();
        let mut report = json!({
            "command": "verify",
            "file": args.file.display().to_string(),
            "n": set.dimension(),
            "k": set.len(),
            "sliced": sliced,
            "total": total,
            "full": verification.is_fully_sliced(),
        });
        if args.show_unsliced {
            report["unsliced"] = json!(unsliced);
        }
        println!("{report:#}");
    } else {
        println!("sliced={sliced}/{total}");
        if args.show_unsliced {
            for edge in verification.unsliced() {
                let (a, b) = edge.endpoints();
                println!("dim {}: {a} -> {b}", edge.flip_index());
            }
        }
    }
    Ok(if verification.is_fully_sliced() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn parse_composition(text: &str, n: Option<usize>) -> Result<Composition> {
    let composition: Composition = text
        .parse()
        .map_err(|e| anyhow!("bad composition {text:?}: {e}"))?;
    if let Some(n) = n {
        if composition.total() != n {
            bail!(
                "composition {composition} sums to {}, expected n = {n}",
                composition.total()
            );
        }
    }
    Ok(composition)
}

fn resolve_workers(flag: Option<usize>) -> Result<usize> {
    if let Some(w) = flag {
        return Ok(w.max(1));
    }
    match std::env::var(WORKERS_ENV) {
        Ok(value) => value
            .parse::<usize>()
            .map(|w| w.max(1))
            .map_err(|_| anyhow!("bad {WORKERS_ENV} value {value:?}")),
        Err(_) => Ok(1),
    }
}

fn derived_seed(flag: Option<u64>) -> u64 {
    flag.unwrap_or_else(|| {
        std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_nanos() as u64)
            .unwrap_or(0)
    })
}

/// Re-derives the outcome's counts through the simple evaluation paths and
/// writes/prints the construction plus the summary line.
fn emit_outcome(
    command: &str,
    outcome: &SearchOutcome,
    grid: &ReducedGrid,
    out: Option<&Path>,
    json: bool,
    config_echo: serde_json::Value,
) -> Result<ExitCode> {
    let reduced_again = cubeslice::reduced::sliced_reduced_edges(&outcome.best, grid)?;
    if reduced_again.union_len() != outcome.reduced_sliced {
        bail!(
            "internal mismatch: engine reported {} reduced edges, re-evaluation found {}",
            outcome.reduced_sliced,
            reduced_again.union_len()
        );
    }
    let weighted = weighted_sliced_count(&outcome.best, grid)?;
    if weighted != outcome.full_sliced {
        bail!(
            "internal mismatch: engine reported {} sliced edges, re-evaluation found {weighted}",
            outcome.full_sliced
        );
    }
    if outcome.best.dimension() <= BRUTE_FORCE_LIMIT {
        let brute = cube::count_sliced(&outcome.best)?;
        if brute != outcome.full_sliced {
            bail!(
                "internal mismatch: engine reported {} sliced edges, brute force found {brute}",
                outcome.full_sliced
            );
        }
    }

    let text = format_construction(&outcome.best);
    if let Some(path) = out {
        std::fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?;
    }
    if json {
        let report = json!({
            "command": command,
            "config": config_echo,
            "construction": text,
            "sliced": outcome.full_sliced,
            "total": outcome.full_total,
            "reduced_sliced": outcome.reduced_sliced,
            "reduced_total": outcome.reduced_total,
            "iterations": outcome.iterations,
            "restarts": outcome.restarts,
            "wall_secs": outcome.wall.as_secs_f64(),
            "seed": outcome.seed,
            "trace_digest": format!("{:#018x}", outcome.trace_digest),
        });
        println!("{report:#}");
    } else {
        if out.is_none() {
            print!("{text}");
        }
        println!(
            "sliced={}/{} reduced={}/{}",
            outcome.full_sliced, outcome.full_total, outcome.reduced_sliced, outcome.reduced_total
        );
    }
    Ok(if outcome.full_sliced == outcome.full_total {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_search(args: SearchArgs, json: bool) -> Result<ExitCode> {
    let composition = parse_composition(&args.shared.composition, Some(args.shared.n))?;
    let grid = build_grid(&composition)?;
    let mut config = SearchConfig::for_grid(&grid, args.shared.k);
    config.coeff_bound = args.shared.coeff_bound;
    config.neighbor_delta = args.shared.delta;
    config.freeze_block = args.shared.freeze_block;
    config.seed = derived_seed(args.shared.seed);
    config.time_limit = Duration::from_secs(args.shared.time_limit);
    config.workers = resolve_workers(args.shared.workers)?;
    config.target_weighted = args.shared.target;
    config.fitness_mode = match args.fitness {
        FitnessArg::Plain => FitnessMode::PlainReduced,
        FitnessArg::Weighted => FitnessMode::MultiplicityWeighted,
    };
    config.variance_penalty = args.variance_penalty == OnOff::On;
    if let Some(iters) = args.max_iterations {
        config.max_iterations = iters;
    }
    if let Some(period) = args.weight_period {
        config.weight_period = period;
    }
    config.weight_limit = args.weight_limit;

    let echo = json!({
        "n": config.n,
        "k": config.k,
        "composition": composition.blocks(),
        "coeff_bound": config.coeff_bound,
        "delta": config.neighbor_delta,
        "freeze_block": config.freeze_block,
        "fitness": match config.fitness_mode {
            FitnessMode::PlainReduced => "plain",
            FitnessMode::MultiplicityWeighted => "weighted",
        },
        "variance_penalty": config.variance_penalty,
        "max_iterations": config.max_iterations,
        "weight_period": config.weight_period,
        "weight_limit": config.weight_limit,
        "seed": config.seed,
        "time_limit_secs": args.shared.time_limit,
        "workers": config.workers,
        "target": config.target_weighted,
    });
    let outcome = run_search(&config, &grid)?;
    emit_outcome("search", &outcome, &grid, args.shared.out.as_deref(), json, echo)
}

fn cmd_tabu(args: TabuArgs, json: bool) -> Result<ExitCode> {
    let composition = parse_composition(&args.shared.composition, Some(args.shared.n))?;
    let grid = build_grid(&composition)?;
    let mut config = TabuConfig::for_grid(&grid, args.shared.k);
    config.coeff_bound = args.shared.coeff_bound;
    config.neighbor_delta = args.shared.delta;
    config.freeze_block = args.shared.freeze_block;
    config.seed = derived_seed(args.shared.seed);
    config.time_limit = Duration::from_secs(args.shared.time_limit);
    config.workers = resolve_workers(args.shared.workers)?;
    config.target_weighted = args.shared.target;
    config.stagnation_limit = args.stagnation;
    config.frontier_capacity = args.frontier_cap;
    if let Some(init) = &args.init {
        config.initial = Some(load_construction(init, Some(args.shared.n))?);
    }

    let echo = json!({
        "n": config.n,
        "k": config.k,
        "composition": composition.blocks(),
        "coeff_bound": config.coeff_bound,
        "delta": config.neighbor_delta,
        "freeze_block": config.freeze_block,
        "stagnation": config.stagnation_limit,
        "frontier_cap": config.frontier_capacity,
        "seed": config.seed,
        "time_limit_secs": args.shared.time_limit,
        "workers": config.workers,
        "target": config.target_weighted,
        "init": args.init.as_ref().map(|p| p.display().to_string()),
    });
    let outcome = run_tabu(&config, &grid)?;
    emit_outcome("tabu", &outcome, &grid, args.shared.out.as_deref(), json, echo)
}

fn cmd_bound(args: BoundArgs, json: bool) -> Result<ExitCode> {
    let bound = upper_bound(args.n)?;
    let chain = subadditive_chain(args.n)?;
    if json {
        let report = json!({
            "command": "bound",
            "n": args.n,
            "bound": bound,
            "chain": chain.iter().map(|&(part, b)| json!({"part": part, "bound": b})).collect::<Vec<_>>(),
        });
        println!("{report:#}");
    } else {
        println!("{bound}");
        let parts = chain
            .iter()
            .map(|&(part, b)| format!("{part} ({b})"))
            .collect::<Vec<_>>()
            .join(" + ");
        println!("witness: {parts}");
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_table(args: TableArgs, json: bool) -> Result<ExitCode> {
    let table = BoundTable::new();
    let entries = match args.k {
        Some(k) => vec![table.lookup_snk(args.n, k)?],
        None => {
            let all = table.entries_for(args.n);
            if all.is_empty() {
                bail!("no known values for n = {}", args.n);
            }
            all
        }
    };
    if json {
        let report = json!({
            "command": "table",
            "n": args.n,
            "entries": entries.iter().map(|e| json!({
                "n": e.n,
                "k": e.k,
                "value": e.value,
                "provenance": e.provenance.as_str(),
                "origin": e.origin,
            })).collect::<Vec<_>>(),
        });
        println!("{report:#}");
    } else {
        for e in &entries {
            println!(
                "S({},{}) >= {}  [{} / {}]",
                e.n,
                e.k,
                e.value,
                e.provenance.as_str(),
                e.origin
            );
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_reduce_info(args: ReduceInfoArgs, json: bool) -> Result<ExitCode> {
    let composition = parse_composition(&args.composition, args.n)?;
    let grid = build_grid(&composition)?;
    let histogram = grid.multiplicity_histogram();
    if json {
        let report = json!({
            "command": "reduce-info",
            "n": grid.dimension(),
            "composition": composition.blocks(),
            "vertices": grid.vertex_count(),
            "edges": grid.edge_count(),
            "full_edges": grid.full_edge_total(),
            "multiplicity_histogram": histogram
                .iter()
                .map(|&(m, c)| json!({"multiplicity": m, "edges": c}))
                .collect::<Vec<_>>(),
        });
        println!("{report:#}");
    } else {
        println!("|V|={} |E|={}", grid.vertex_count(), grid.edge_count());
        println!(
            "n={} full-edges={}",
            grid.dimension(),
            grid.full_edge_total()
        );
        println!("multiplicity histogram:");
        for (mult, count) in histogram {
            println!("  {mult} x {count}");
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_fixture(args: FixtureArgs, json: bool) -> Result<ExitCode> {
    match args.name {
        None => {
            if json {
                let report = json!({
                    "command": "fixture",
                    "fixtures": fixtures::all().iter().map(|f| json!({
                        "name": f.name,
                        "n": f.dimension,
                        "k": f.plane_count,
                        "expected_sliced": f.expected_sliced,
                        "total": f.total_edges(),
                        "composition": f.composition,
                        "description": f.description,
                    })).collect::<Vec<_>>(),
                });
                println!("{report:#}");
            } else {
                for f in fixtures::all() {
                    println!(
                        "{}: n={} k={} slices {}/{} ({})",
                        f.name,
                        f.dimension,
                        f.plane_count,
                        f.expected_sliced,
                        f.total_edges(),
                        f.description
                    );
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Some(name) => {
            let fixture = fixtures::by_name(&name)
                .ok_or_else(|| anyhow!("unknown fixture {name:?}; run `cubeslice fixture`"))?;
            match &args.out {
                Some(path) => std::fs::write(path, fixture.text)
                    .with_context(|| format!("writing {}", path.display()))?,
                None => print!("{}", fixture.text),
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn cmd_selftest(json: bool) -> Result<ExitCode> {
    let mut all_ok = true;
    let mut reports = Vec::new();
    for fixture in fixtures::all() {
        let set = fixture.plane_set();
        let verification = cube::verify_full(&set)?;
        let sliced = verification.sliced();
        let ok = sliced == fixture.expected_sliced
            && format_construction(&set) == fixture.text;
        all_ok &= ok;
        if json {
            reports.push(json!({
                "name": fixture.name,
                "n": fixture.dimension,
                "k": fixture.plane_count,
                "expected": fixture.expected_sliced,
                "verified": sliced,
                "total": verification.total(),
                "ok": ok,
            }));
        } else {
            println!(
                "fixture {}: sliced={}/{} expected={} {}",
                fixture.name,
                sliced,
                verification.total(),
                fixture.expected_sliced,
                if ok { "ok" } else { "MISMATCH" }
            );
        }
    }
    if json {
        println!("{:#}", json!({"command": "selftest", "fixtures": reports, "ok": all_ok}));
    }
    Ok(if all_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}
