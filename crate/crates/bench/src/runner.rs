//! One timed solver run with logging and optional refiners.

use std::fmt;
use std::io::Write;
use std::sync::Arc;
use std::time::{Duration, Instant};

use lacam_core::mc::{SampleExecutor, Sequential};
use lacam_core::refine::{LnsParams, RecursiveParams};
use lacam_core::search::{Improvement, SearchHooks, SearchStats};
use lacam_core::suo::compute_scatter;
use lacam_core::{Instance, SearchParams, SearchState, SearchStatus, Solution, Source};

use crate::config::RunConfig;
use crate::exec::ParallelExecutor;
use crate::refinery::{Mailbox, Refinery, RefineryConfig, Snapshot, WorkerStats};

/// One improvement of the best solution.
#[derive(Debug, Clone, PartialEq)]
pub struct AnytimeRecord {
    pub elapsed_ms: f64,
    pub sum_of_loss: u64,
    pub flowtime: u64,
    pub source: Source,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub status: SearchStatus,
    pub solution: Option<Solution>,
    pub records: Vec<AnytimeRecord>,
    /// Solution behind each record, when requested.
    pub history: Vec<Solution>,
    pub lower_bound: u64,
    pub scatter_collisions: Option<u64>,
    pub nodes: usize,
    pub search: SearchStats,
    pub workers: WorkerStats,
    pub elapsed: Duration,
}

impl RunReport {
    pub fn initial(&self) -> Option<&AnytimeRecord> {
        self.records.first()
    }

    pub fn final_cost(&self) -> Option<u64> {
        self.records.last().map(|r| r.sum_of_loss)
    }
}

pub fn status_name(status: SearchStatus) -> &'static str {
    match status {
        SearchStatus::Solved => "solved",
        SearchStatus::OptimallySolved => "optimal",
        SearchStatus::NoSolution => "no_solution",
        SearchStatus::TimeoutFailure => "timeout",
    }
}

/// `key=value` summary of a run.
pub struct Summary<'a>(pub &'a RunReport);

impl fmt::Display for Summary<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = self.0;
        let opt = |v: Option<u64>| v.map_or_else(|| "-".to_string(), |c| c.to_string());
        write!(f, "status={}", status_name(r.status))?;
        write!(f, " initial_cost={}", opt(r.initial().map(|i| i.sum_of_loss)))?;
        match r.initial() {
            Some(i) => write!(f, " initial_ms={:.1}", i.elapsed_ms)?,
            None => write!(f, " initial_ms=-")?,
        }
        write!(f, " final_cost={}", opt(r.final_cost()))?;
        write!(f, " lower_bound={}", r.lower_bound)?;
        write!(f, " elapsed_ms={:.1}", r.elapsed.as_secs_f64() * 1e3)?;
        write!(f, " nodes={}", r.nodes)?;
        write!(f, " iterations={}", r.search.iterations)?;
        write!(f, " generator_calls={}", r.search.generator_calls)?;
        write!(f, " incorporated={}", r.search.incorporated)?;
        write!(f, " refiner_tasks={}", r.workers.lns_tasks + r.workers.recursive_tasks)
    }
}

/// Writes the anytime log as CSV.
pub fn write_log<W: Write>(records: &[AnytimeRecord], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["elapsed_ms", "sum_of_loss", "flowtime", "source"])?;
    for r in records {
        w.write_record([
            format!("{:.3}", r.elapsed_ms),
            r.sum_of_loss.to_string(),
            r.flowtime.to_string(),
            r.source.as_str().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

struct RunHooks<'a> {
    inst: &'a Instance,
    start: Instant,
    deadline: Instant,
    records: Vec<AnytimeRecord>,
    history: Option<Vec<Solution>>,
    snapshot: Option<Arc<Snapshot>>,
    mailbox: Option<Mailbox>,
}

impl SearchHooks for RunHooks<'_> {
    fn interrupted(&mut self) -> bool {
        Instant::now() >= self.deadline
    }

    fn on_improvement(&mut self, imp: &Improvement<'_>) {
        self.records.push(AnytimeRecord {
            elapsed_ms: self.start.elapsed().as_secs_f64() * 1e3,
            sum_of_loss: imp.cost,
            flowtime: imp.solution.flowtime(self.inst.goals()),
            source: imp.source,
        });
        if let Some(h) = &mut self.history {
            h.push(imp.solution.clone());
        }
        if let Some(s) = &self.snapshot {
            s.publish(imp.cost, imp.solution.clone());
        }
    }

    fn poll_incoming(&mut self) -> Option<(Solution, Source)> {
        self.mailbox.as_ref()?.try_recv().ok()
    }
}

pub fn search_params(cfg: &RunConfig) -> SearchParams {
    SearchParams {
        seed: cfg.seed,
        mc_samples: cfg.mc_samples,
        extract_prob: cfg.extract_prob,
        extract_strategy: cfg.extract_strategy,
        reinsert_init_prob: cfg.reinsert_init_prob,
        swap: true,
    }
}

/// Solves `inst` under `cfg`; the clock starts on entry.
pub fn run(inst: Arc<Instance>, cfg: &RunConfig) -> RunReport {
    let start = Instant::now();
    let deadline = start + cfg.time_limit;
    let scatter = cfg.suo_margin.map(|m| {
        let half = start + cfg.time_limit / 2;
        compute_scatter(&inst, m, &move || Instant::now() >= half)
    });

    let snapshot = Arc::new(Snapshot::default());
    let refinery = (cfg.refiners > 0).then(|| {
        let config = RefineryConfig {
            workers: cfg.refiners,
            recursive_prob: cfg.recursive_prob,
            recursive_timeout: cfg.recursive_timeout,
            lns: LnsParams::default(),
            recursive: RecursiveParams {
                search: search_params(cfg),
                suo_margin: cfg.suo_margin,
            },
            seed: cfg.seed ^ 0x005e_ed0f_4efe,
        };
        Refinery::start(inst.clone(), snapshot.clone(), config, deadline)
    });
    let (refinery, mailbox) = match refinery {
        Some((r, m)) => (Some(r), Some(m)),
        None => (None, None),
    };

    let parallel = (cfg.mc_samples > 1).then(|| {
        let avail = cfg
            .mc_threads
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
        ParallelExecutor::new(&inst, Some(avail.min(cfg.mc_samples)))
    });
    let exec: &dyn SampleExecutor = match &parallel {
        Some(p) if p.threads() > 1 => p,
        _ => &Sequential,
    };

    let mut hooks = RunHooks {
        inst: &inst,
        start,
        deadline,
        records: Vec::new(),
        history: cfg.keep_history.then(Vec::new),
        snapshot: refinery.as_ref().map(|_| snapshot.clone()),
        mailbox,
    };
    let mut search = SearchState::new(&inst, search_params(cfg), scatter.as_ref());
    let status = search.run(exec, &mut hooks);
    let workers = refinery.map(Refinery::stop).unwrap_or_default();

    RunReport {
        status,
        solution: search.best_solution(),
        records: hooks.records,
        history: hooks.history.unwrap_or_default(),
        lower_bound: inst.lower_bound(),
        scatter_collisions: scatter.as_ref().map(|s| s.collisions()),
        nodes: search.num_nodes(),
        search: search.stats(),
        workers,
        elapsed: start.elapsed(),
    }
}
