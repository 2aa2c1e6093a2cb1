use lacam_core::mc::{SampleExecutor, SampleJob};
use lacam_core::pibt::PibtScratch;
use lacam_core::{Configuration, Instance};
use rayon::prelude::*;

/// Runs Monte-Carlo samples on a rayon pool, one scratch buffer per worker.
pub struct ParallelExecutor {
    pool: rayon::ThreadPool,
    num_vertices: usize,
    num_agents: usize,
}

impl ParallelExecutor {
    /// Pool of `threads` workers, or the hardware parallelism when `None`.
    pub fn new(inst: &Instance, threads: Option<usize>) -> Self {
        let threads = threads.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads.max(1))
            .thread_name(|i| format!("mc-{i}"))
            .build()
            .expect("failed to start sample pool");
        ParallelExecutor {
            pool,
            num_vertices: inst.map().num_vertices(),
            num_agents: inst.num_agents(),
        }
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl SampleExecutor for ParallelExecutor {
    fn run(&self, k: usize, _local: &mut PibtScratch, job: &SampleJob<'_>) -> Vec<Option<Configuration>> {
        let (nv, na) = (self.num_vertices, self.num_agents);
        self.pool.install(|| {
            (0..k)
                .into_par_iter()
                .map_init(|| PibtScratch::new(nv, na), |scratch, j| job(j, scratch))
                .collect()
        })
    }
}
