//! Background refiner workers feeding improved solutions back to the search.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc::{self, Receiver, Sender};
use std::sync::{Arc, RwLock};
use std::thread::JoinHandle;
use std::time::{Duration, Instant};

use lacam_core::mc::Sequential;
use lacam_core::refine::{run_task, LnsParams, RecursiveParams, RefineKind, RefinementTask};
use lacam_core::rng::{fork, substream};
use lacam_core::{Instance, Solution, Source};
use rand::Rng as _;

#[derive(Debug, Clone)]
pub struct RefineryConfig {
    pub workers: usize,
    pub recursive_prob: f64,
    pub recursive_timeout: Duration,
    pub lns: LnsParams,
    pub recursive: RecursiveParams,
    pub seed: u64,
}

/// Best solution as published by the search thread.
#[derive(Default)]
pub struct Snapshot {
    best: RwLock<Option<(u64, Arc<Solution>)>>,
}

impl Snapshot {
    pub fn publish(&self, cost: u64, solution: Solution) {
        *self.best.write().unwrap() = Some((cost, Arc::new(solution)));
    }

    pub fn get(&self) -> Option<(u64, Arc<Solution>)> {
        self.best.read().unwrap().clone()
    }
}

/// Solutions posted by workers, consumed by the search thread.
pub type Mailbox = Receiver<(Solution, Source)>;

pub struct Refinery {
    stop: Arc<AtomicBool>,
    handles: Vec<JoinHandle<WorkerStats>>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct WorkerStats {
    pub lns_tasks: u64,
    pub recursive_tasks: u64,
    pub posted: u64,
}

impl Refinery {
    /// Starts `config.workers` threads that run until `deadline` or [`Refinery::stop`].
    pub fn start(
        inst: Arc<Instance>,
        snapshot: Arc<Snapshot>,
        config: RefineryConfig,
        deadline: Instant,
    ) -> (Refinery, Mailbox) {
        let (tx, rx) = mpsc::channel();
        let stop = Arc::new(AtomicBool::new(false));
        let handles = (0..config.workers)
            .map(|w| {
                let ctx = Worker {
                    inst: inst.clone(),
                    snapshot: snapshot.clone(),
                    tx: tx.clone(),
                    stop: stop.clone(),
                    config: config.clone(),
                    deadline,
                };
                std::thread::Builder::new()
                    .name(format!("refiner-{w}"))
                    .spawn(move || ctx.run(w as u64))
                    .expect("failed to spawn refiner")
            })
            .collect();
        (Refinery { stop, handles }, rx)
    }

    pub fn stop(self) -> WorkerStats {
        self.stop.store(true, Ordering::Relaxed);
        let mut total = WorkerStats::default();
        for h in self.handles {
            let s = h.join().expect("refiner panicked");
            total.lns_tasks += s.lns_tasks;
            total.recursive_tasks += s.recursive_tasks;
            total.posted += s.posted;
        }
        total
    }
}

struct Worker {
    inst: Arc<Instance>,
    snapshot: Arc<Snapshot>,
    tx: Sender<(Solution, Source)>,
    stop: Arc<AtomicBool>,
    config: RefineryConfig,
    deadline: Instant,
}

impl Worker {
    fn done(&self) -> bool {
        self.stop.load(Ordering::Relaxed) || Instant::now() >= self.deadline
    }

    fn run(self, index: u64) -> WorkerStats {
        let mut rng = substream(self.config.seed, index);
        let mut stats = WorkerStats::default();
        while !self.done() {
            let Some((base_cost, base)) = self.snapshot.get() else {
                std::thread::sleep(Duration::from_millis(1));
                continue;
            };
            let kind = if rng.random::<f64>() < self.config.recursive_prob {
                stats.recursive_tasks += 1;
                RefineKind::Recursive
            } else {
                stats.lns_tasks += 1;
                RefineKind::Lns
            };
            let task = RefinementTask {
                base: (*base).clone(),
                seed: fork(&mut rng),
                kind,
            };
            let task_end = match kind {
                RefineKind::Recursive => self.deadline.min(Instant::now() + self.config.recursive_timeout),
                RefineKind::Lns => self.deadline,
            };
            let stop = &self.stop;
            let budget = move || stop.load(Ordering::Relaxed) || Instant::now() >= task_end;
            let result = run_task(
                &self.inst,
                &task,
                &self.config.lns,
                &self.config.recursive,
                &Sequential,
                &budget,
            );
            if let Some(sol) = result {
                let cost = sol.sum_of_loss(self.inst.goals());
                if cost < base_cost {
                    let source = match kind {
                        RefineKind::Lns => Source::Lns,
                        RefineKind::Recursive => Source::Recursive,
                    };
                    stats.posted += 1;
                    if self.tx.send((sol, source)).is_err() {
                        break;
                    }
                }
            }
        }
        stats
    }
}
