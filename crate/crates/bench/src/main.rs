use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use clap::Parser;
use lacam_bench::config::parse_strategy;
use lacam_bench::io::{format_solution, parse_map, parse_scen};
use lacam_bench::runner::write_log;
use lacam_bench::{run, Preset, Summary};
use lacam_core::search::ExtractStrategy;
use lacam_core::SearchStatus;

const EXIT_NO_SOLUTION: u8 = 2;
const EXIT_TIMEOUT: u8 = 3;
const EXIT_INPUT: u8 = 4;

/// Anytime multi-agent pathfinding on benchmark grids.
#[derive(Parser, Debug)]
#[command(name = "lacam", version)]
struct Args {
    #[arg(long)]
    map: PathBuf,
    #[arg(long)]
    scen: PathBuf,
    /// Number of agents, taken from the top of the scenario.
    #[arg(long, short = 'n')]
    agents: usize,
    #[arg(long, default_value_t = 10_000)]
    time_limit_ms: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Base configuration; the flags below override it.
    #[arg(long, default_value = "all", value_parser = |s: &str| s.parse::<Preset>())]
    preset: Preset,
    /// Path slack for scattered paths; -1 disables them.
    #[arg(long, allow_hyphen_values = true)]
    suo_margin: Option<i64>,
    #[arg(long)]
    mc_samples: Option<usize>,
    /// Threads for Monte-Carlo sampling; defaults to the hardware parallelism.
    #[arg(long)]
    mc_threads: Option<usize>,
    #[arg(long)]
    refiners: Option<usize>,
    #[arg(long)]
    recursive_prob: Option<f64>,
    #[arg(long)]
    recursive_timeout_ms: Option<u64>,
    #[arg(long)]
    extract_prob: Option<f64>,
    #[arg(long, value_parser = parse_strategy)]
    extract_strategy: Option<ExtractStrategy>,
    #[arg(long)]
    reinsert_init_prob: Option<f64>,
    /// Where to write the solution.
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
    /// Where to write the anytime CSV log.
    #[arg(long)]
    log: Option<PathBuf>,
}

fn main() -> ExitCode {
    let args = Args::parse();

    let mut cfg = args.preset.config();
    cfg.time_limit = Duration::from_millis(args.time_limit_ms);
    cfg.seed = args.seed;
    if let Some(m) = args.suo_margin {
        cfg.suo_margin = u32::try_from(m).ok();
    }
    if let Some(k) = args.mc_samples {
        if k == 0 {
            eprintln!("error: --mc-samples must be at least 1");
            return ExitCode::from(EXIT_INPUT);
        }
        cfg.mc_samples = k;
    }
    cfg.mc_threads = args.mc_threads.or(cfg.mc_threads);
    cfg.refiners = args.refiners.unwrap_or(cfg.refiners);
    cfg.recursive_prob = args.recursive_prob.unwrap_or(cfg.recursive_prob);
    if let Some(ms) = args.recursive_timeout_ms {
        cfg.recursive_timeout = Duration::from_millis(ms);
    }
    cfg.extract_prob = args.extract_prob.unwrap_or(cfg.extract_prob);
    cfg.extract_strategy = args.extract_strategy.unwrap_or(cfg.extract_strategy);
    cfg.reinsert_init_prob = args.reinsert_init_prob.unwrap_or(cfg.reinsert_init_prob);

    let inst = match load(&args) {
        Ok(i) => i,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_INPUT);
        }
    };

    let inst = Arc::new(inst);
    let report = run(inst.clone(), &cfg);

    if let (Some(path), Some(sol)) = (&args.output, &report.solution) {
        if let Err(e) = fs::write(path, format_solution(sol, inst.map())) {
            eprintln!("error: writing {}: {e}", path.display());
            return ExitCode::from(EXIT_INPUT);
        }
    }
    if let Some(path) = &args.log {
        let res = fs::File::create(path).map_err(csv::Error::from).and_then(|f| write_log(&report.records, f));
        if let Err(e) = res {
            eprintln!("error: writing {}: {e}", path.display());
            return ExitCode::from(EXIT_INPUT);
        }
    }
    println!("{}", Summary(&report));

    match report.status {
        SearchStatus::Solved | SearchStatus::OptimallySolved => ExitCode::SUCCESS,
        SearchStatus::NoSolution => ExitCode::from(EXIT_NO_SOLUTION),
        SearchStatus::TimeoutFailure => ExitCode::from(EXIT_TIMEOUT),
    }
}

fn load(args: &Args) -> Result<lacam_core::Instance, String> {
    let read = |p: &PathBuf| fs::read_to_string(p).map_err(|e| format!("reading {}: {e}", p.display()));
    let map = parse_map(&read(&args.map)?).map_err(|e| format!("{}: {e}", args.map.display()))?;
    parse_scen(&read(&args.scen)?, Arc::new(map), args.agents).map_err(|e| format!("{}: {e}", args.scen.display()))
}
