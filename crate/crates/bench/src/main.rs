use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use counterplan::bundle::{Bundle, LoadedBundle};
use counterplan::counterplanning::{Algorithm, AlgorithmConfig, Strategy};
use counterplan::ground::GroundOptions;
use counterplan::planner::{Budget, Planner, SearchStatus};
use counterplan::simulator::{run_episode, validate_counterplan, Verdict};
use counterplan::{Execution, Plan};
use counterplan_bench::fixture;
use counterplan_bench::generators::{generate, DomainKind, GeneratorConfig};
use counterplan_bench::report::{build_report, Format};
use counterplan_bench::suite::{run_suite, SuiteConfig};

const EXIT_USAGE: u8 = 1;
const EXIT_TASK: u8 = 2;
const EXIT_BUDGET: u8 = 3;

/// Counterplanning experiments: generate tasks, run episodes and suites,
/// validate counterplans.
#[derive(Parser)]
#[command(name = "counterplan", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated task bundle to a directory.
    Gen(GenArgs),
    /// Run one algorithm on a bundle.
    Run(RunArgs),
    /// Generate tasks and run several algorithms on each.
    Suite(SuiteArgs),
    /// Check a preventer plan against a bundle.
    Validate(ValidateArgs),
}

#[derive(Args, Clone)]
struct GenShape {
    /// Use the full-size protocol (10×10 police maps, 10 booths).
    #[arg(long)]
    full: bool,
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    obstacles: Option<f64>,
    #[arg(long)]
    booths: Option<usize>,
    #[arg(long)]
    candidates: Option<usize>,
    #[arg(long)]
    blocks: Option<usize>,
    #[arg(long)]
    rooms: Option<usize>,
}

impl GenShape {
    fn config(&self, domain: DomainKind, seed: u64) -> GeneratorConfig {
        let mut c = if self.full { GeneratorConfig::full(domain, seed) } else { GeneratorConfig::desk(domain, seed) };
        c.grid = self.grid.unwrap_or(c.grid);
        c.obstacles = self.obstacles.unwrap_or(c.obstacles);
        c.booths = self.booths.unwrap_or(c.booths);
        c.candidates = self.candidates.unwrap_or(c.candidates);
        c.blocks = self.blocks.unwrap_or(c.blocks);
        c.rooms = self.rooms.unwrap_or(c.rooms);
        c
    }
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value = "police-control")]
    domain: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Write a hand-built fixture instead (`river`).
    #[arg(long)]
    fixture: Option<String>,
    #[command(flatten)]
    shape: GenShape,
}

#[derive(Args, Clone, Copy)]
struct BudgetArgs {
    /// Node budget per search.
    #[arg(long, default_value_t = 1_000_000)]
    budget_nodes: usize,
    /// Wall-clock budget per search, in seconds.
    #[arg(long, default_value_t = 600.0)]
    budget_seconds: f64,
}

impl BudgetArgs {
    fn budget(&self) -> Budget {
        Budget { max_nodes: self.budget_nodes, max_time: Some(Duration::from_secs_f64(self.budget_seconds)) }
    }
}

#[derive(Args)]
struct RunArgs {
    /// Bundle directory.
    bundle: PathBuf,
    #[arg(long, default_value = "adicp")]
    algorithm: String,
    #[arg(long, default_value = "closest-to-seek")]
    strategy: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    budget: BudgetArgs,
    /// Write the episode trace as JSON lines.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct SuiteArgs {
    #[arg(long, default_value = "police-control")]
    domain: String,
    #[arg(long, default_value_t = 50)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated algorithm names.
    #[arg(long, default_value = "dicp,adicp,random-adicp,random-goal-adicp")]
    algorithms: String,
    #[arg(long, default_value = "closest-to-seek")]
    strategy: String,
    /// Output directory for metrics, report and traces.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report printed to stdout: csv, json or markdown.
    #[arg(long, default_value = "markdown")]
    format: String,
    /// Run tasks one after another.
    #[arg(long)]
    sequential: bool,
    #[command(flatten)]
    budget: BudgetArgs,
    #[command(flatten)]
    shape: GenShape,
}

#[derive(Args)]
struct ValidateArgs {
    /// Bundle directory (needs a seeker plan or a truth file).
    bundle: PathBuf,
    /// Preventer plan, one action per line.
    counterplan: PathBuf,
    /// Comma-separated candidate names; all candidates when omitted.
    #[arg(long)]
    live: Option<String>,
    #[command(flatten)]
    budget: BudgetArgs,
}

/// An error carrying its exit code.
#[derive(Debug)]
struct Exit(u8, anyhow::Error);

fn task<T>(r: Result<T>) -> std::result::Result<T, Exit> {
    r.map_err(|e| {
        let code = match e.downcast_ref::<counterplan::Error>() {
            Some(counterplan::Error::ResourceLimit { .. }) => EXIT_BUDGET,
            _ => EXIT_TASK,
        };
        Exit(code, e)
    })
}

fn usage<T>(r: Result<T>) -> std::result::Result<T, Exit> {
    r.map_err(|e| Exit(EXIT_USAGE, e))
}

fn load_bundle(dir: &Path) -> Result<LoadedBundle> {
    let bundle = Bundle::read_dir(dir).with_context(|| format!("reading bundle {}", dir.display()))?;
    Ok(bundle.load(&GroundOptions::default())?)
}

/// The bundle's seeker plan, or an optimal plan for its hidden goal.
fn seeker_plan(loaded: &LoadedBundle, budget: Budget) -> Result<Plan> {
    if let Some(p) = &loaded.seeker_plan {
        return Ok(p.clone());
    }
    if loaded.true_goal.is_none() {
        bail!("bundle has neither a seeker plan nor a truth file");
    }
    let t = &loaded.task;
    let r = Planner::for_task(&t.seek, budget).solve(&t.initial_state(), &t.seek.goal);
    match (r.status, r.plan) {
        (SearchStatus::Solved, Some(p)) => Ok(p),
        (SearchStatus::ResourceLimit, _) => Err(counterplan::Error::ResourceLimit { expanded: r.expanded }.into()),
        _ => bail!("the seeker cannot reach its goal"),
    }
}

fn cmd_gen(a: GenArgs) -> std::result::Result<(), Exit> {
    if let Some(name) = &a.fixture {
        if name != "river" {
            return Err(Exit(EXIT_USAGE, anyhow::anyhow!("unknown fixture {name}")));
        }
        task(fixture::river_bundle().write_dir(&a.out).map_err(anyhow::Error::from))?;
        print!("{}", fixture::river_map().render());
        println!("river -> {}", a.out.display());
        return Ok(());
    }
    let domain: DomainKind = usage(a.domain.parse().map_err(anyhow::Error::from))?;
    let cfg = a.shape.config(domain, a.seed);
    let t = task(generate(&cfg).map_err(anyhow::Error::from))?;
    task(t.bundle.write_dir(&a.out).map_err(anyhow::Error::from))?;
    if let Some(p) = &t.picture {
        print!("{p}");
    }
    println!("{} -> {} (truth {})", t.id, a.out.display(), t.loaded.task.candidates[t.true_goal].name);
    Ok(())
}

fn cmd_run(a: RunArgs) -> std::result::Result<(), Exit> {
    let alg: Algorithm = usage(a.algorithm.parse().map_err(anyhow::Error::from))?;
    let strategy: Strategy = usage(a.strategy.parse().map_err(anyhow::Error::from))?;
    let loaded = task(load_bundle(&a.bundle))?;
    let budget = a.budget.budget();
    let plan = task(seeker_plan(&loaded, budget))?;
    let mut cfg = AlgorithmConfig::new(alg);
    cfg.strategy = strategy;
    cfg.seed = a.seed;
    cfg.budget = budget;
    let id = a.bundle.file_name().map_or("task".into(), |n| n.to_string_lossy().into_owned());
    let (out, trace, metrics) = run_episode(&loaded.task, &plan, &cfg, &id);
    if let Some(path) = &a.trace {
        task(fs::write(path, trace.to_json_lines()).with_context(|| format!("writing {}", path.display())))?;
    }
    println!("preventer plan:");
    print!("{}", out.prev_plan.to_text());
    println!("{}", counterplan::simulator::Metrics::CSV_HEADER);
    println!("{}", metrics.csv_row());
    let budget_hit = out.iterations.iter().any(|r| r.failure.as_deref().is_some_and(|f| f.contains("budget")));
    if trace.verdict == Verdict::Indeterminate || budget_hit {
        return Err(Exit(EXIT_BUDGET, anyhow::anyhow!("a search budget was exhausted")));
    }
    Ok(())
}

fn cmd_suite(a: SuiteArgs) -> std::result::Result<(), Exit> {
    let domain: DomainKind = usage(a.domain.parse().map_err(anyhow::Error::from))?;
    let strategy: Strategy = usage(a.strategy.parse().map_err(anyhow::Error::from))?;
    let format: Format = usage(a.format.parse().map_err(anyhow::Error::msg))?;
    let algorithms = usage(
        a.algorithms
            .split(',')
            .map(|s| s.trim().parse::<Algorithm>().map_err(anyhow::Error::from))
            .collect::<Result<Vec<_>>>(),
    )?;
    let mut cfg = SuiteConfig::desk(domain, a.n, a.seed);
    cfg.generator = a.shape.config(domain, a.seed);
    cfg.algorithms = algorithms;
    cfg.strategy = strategy;
    cfg.budget = a.budget.budget();
    if a.sequential {
        cfg.execution = Execution::Sequential;
    }
    let result = run_suite(&cfg);
    let report = build_report(std::slice::from_ref(&result));
    if let Some(dir) = &a.out {
        let write = |name: &str, text: String| -> Result<()> {
            let p = dir.join(name);
            fs::write(&p, text).with_context(|| format!("writing {}", p.display()))
        };
        task(fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display())))?;
        task(write("metrics.csv", report.to_csv()))?;
        task(write("report.md", report.to_markdown()))?;
        task(write("report.json", report.to_json()))?;
        task(write("traces.jsonl", result.traces().map(|t| t.to_json_lines()).collect()))?;
    }
    print!("{}", report.render(format));
    for (id, why) in &report.failures {
        eprintln!("task {id} failed: {why}");
    }
    Ok(())
}

fn cmd_validate(a: ValidateArgs) -> std::result::Result<(), Exit> {
    let loaded = task(load_bundle(&a.bundle))?;
    let budget = a.budget.budget();
    let seek = task(seeker_plan(&loaded, budget))?;
    let text =
        task(fs::read_to_string(&a.counterplan).with_context(|| format!("reading {}", a.counterplan.display())))?;
    let prev = usage(Plan::from_text(&text, &loaded.task.prev.actions).map_err(anyhow::Error::msg))?;
    let t = &loaded.task;
    let live: Vec<usize> = match &a.live {
        None => (0..t.candidates.len()).collect(),
        Some(names) => usage(
            names
                .split(',')
                .map(|n| t.candidate_index(n.trim()).ok_or_else(|| anyhow::anyhow!("unknown candidate {n}")))
                .collect::<Result<Vec<_>>>(),
        )?,
    };
    match validate_counterplan(t, &prev, &seek, &live, budget) {
        Verdict::Valid => {
            println!("valid");
            Ok(())
        }
        Verdict::Invalid => Err(Exit(EXIT_TASK, anyhow::anyhow!("invalid: the seeker can still reach a live goal"))),
        Verdict::Indeterminate => Err(Exit(EXIT_BUDGET, anyhow::anyhow!("indeterminate: search budget exhausted"))),
    }
}

fn set_workers() -> Result<()> {
    let Ok(v) = std::env::var("COUNTERPLAN_WORKERS") else {
        return Ok(());
    };
    let n: usize = v.parse().with_context(|| format!("COUNTERPLAN_WORKERS={v}"))?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(e) = set_workers() {
        eprintln!("error: {e:#}");
        return ExitCode::from(EXIT_USAGE);
    }
    let result = match cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Run(a) => cmd_run(a),
        Command::Suite(a) => cmd_suite(a),
        Command::Validate(a) => cmd_validate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Exit(code, e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(code)
        }
    }
}
