//! Monte-Carlo configuration generation: draw several successors, keep the best.

use alloc::vec::Vec;

use crate::graph::Vertex;
use crate::instance::{Configuration, Instance};
use crate::metrics::cost_edge;
use crate::pibt::{ConstraintSet, Pibt, PibtScratch};
use crate::rng::substream;

/// Job run once per sample index.
pub type SampleJob<'a> = dyn Fn(usize, &mut PibtScratch) -> Option<Configuration> + Sync + 'a;

/// Runs the samples of a batch, possibly in parallel.
///
/// Implementations must return results in sample-index order.
pub trait SampleExecutor {
    fn run(&self, k: usize, local: &mut PibtScratch, job: &SampleJob<'_>) -> Vec<Option<Configuration>>;
}

/// Runs samples one after another on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl SampleExecutor for Sequential {
    fn run(&self, k: usize, local: &mut PibtScratch, job: &SampleJob<'_>) -> Vec<Option<Configuration>> {
        (0..k).map(|j| job(j, local)).collect()
    }
}

impl<E: SampleExecutor + ?Sized> SampleExecutor for &E {
    fn run(&self, k: usize, local: &mut PibtScratch, job: &SampleJob<'_>) -> Vec<Option<Configuration>> {
        (**self).run(k, local, job)
    }
}

/// One-step cost plus remaining heuristic.
pub fn score(inst: &Instance, from: &[Vertex], to: &[Vertex]) -> u64 {
    cost_edge(from, to, inst.goals()).saturating_add(inst.heuristic(to))
}

/// All `k` samples of one batch.
#[derive(Debug, Clone)]
pub struct SampleBatch {
    pub candidates: Vec<Option<Configuration>>,
}

impl SampleBatch {
    pub fn k(&self) -> usize {
        self.candidates.len()
    }

    /// Lowest-scoring successful sample; ties go to the lowest index.
    pub fn best(&self, inst: &Instance, from: &[Vertex]) -> Option<(usize, u64)> {
        let mut best: Option<(usize, u64)> = None;
        for (j, c) in self.candidates.iter().enumerate() {
            if let Some(q) = c {
                let s = score(inst, from, q);
                if best.is_none_or(|(_, b)| s < b) {
                    best = Some((j, s));
                }
            }
        }
        best
    }
}

/// Draws `k` successors of `from`; sample `j` uses stream `j` under `seed`.
#[allow(clippy::too_many_arguments)]
pub fn sample_batch(
    pibt: &Pibt<'_>,
    from: &[Vertex],
    constraints: &ConstraintSet,
    order: &[u32],
    seed: u64,
    k: usize,
    exec: &dyn SampleExecutor,
    scratch: &mut PibtScratch,
) -> SampleBatch {
    assert!(k >= 1, "need at least one sample");
    let job = |j: usize, s: &mut PibtScratch| {
        let mut rng = substream(seed, j as u64);
        pibt.generate(from, constraints, order, &mut rng, s)
    };
    let candidates = if k == 1 {
        alloc::vec![job(0, scratch)]
    } else {
        exec.run(k, scratch, &job)
    };
    SampleBatch { candidates }
}

/// Best of `k` generator samples by one-step cost plus heuristic, or `None`
/// if every sample failed.
#[allow(clippy::too_many_arguments)]
pub fn mc_generate(
    pibt: &Pibt<'_>,
    from: &[Vertex],
    constraints: &ConstraintSet,
    order: &[u32],
    seed: u64,
    k: usize,
    exec: &dyn SampleExecutor,
    scratch: &mut PibtScratch,
) -> Option<Configuration> {
    let mut batch = sample_batch(pibt, from, constraints, order, seed, k, exec, scratch);
    let (j, _) = batch.best(pibt.instance(), from)?;
    batch.candidates.swap_remove(j)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GridMap;
    use crate::pibt::PrioritySet;
    use alloc::sync::Arc;
    use alloc::vec;

    fn inst() -> Instance {
        let map = Arc::new(GridMap::from_rows(&["....", "....", "...."]).unwrap());
        let s = vec![map.vertex_at(0, 0).unwrap(), map.vertex_at(2, 0).unwrap()];
        let g = vec![map.vertex_at(3, 2).unwrap(), map.vertex_at(0, 2).unwrap()];
        Instance::new(map, s, g).unwrap()
    }

    #[test]
    fn single_sample_matches_plain_generator() {
        let inst = inst();
        let pibt = Pibt::new(&inst);
        let order = PrioritySet::initial(&inst).order();
        let mut scratch = PibtScratch::for_instance(&inst);
        for seed in 0..30 {
            let mc = mc_generate(&pibt, inst.starts(), &ConstraintSet::new(), &order, seed, 1, &Sequential, &mut scratch);
            let plain = pibt.generate(
                inst.starts(),
                &ConstraintSet::new(),
                &order,
                &mut substream(seed, 0),
                &mut scratch,
            );
            assert_eq!(mc, plain);
        }
    }

    #[test]
    fn returned_sample_has_batch_minimum_score() {
        let inst = inst();
        let pibt = Pibt::new(&inst);
        let order = PrioritySet::initial(&inst).order();
        let mut scratch = PibtScratch::for_instance(&inst);
        for seed in 0..30 {
            let batch = sample_batch(&pibt, inst.starts(), &ConstraintSet::new(), &order, seed, 10, &Sequential, &mut scratch);
            let min = batch
                .candidates
                .iter()
                .flatten()
                .map(|q| score(&inst, inst.starts(), q))
                .min()
                .unwrap();
            let got = mc_generate(&pibt, inst.starts(), &ConstraintSet::new(), &order, seed, 10, &Sequential, &mut scratch).unwrap();
            assert_eq!(score(&inst, inst.starts(), &got), min);
        }
    }

    #[test]
    fn infeasible_constraints_fail_for_any_k() {
        let inst = inst();
        let pibt = Pibt::new(&inst);
        let mid = inst.map().vertex_at(1, 0).unwrap();
        let bad: ConstraintSet = [(0, mid), (1, mid)].into_iter().collect();
        let mut scratch = PibtScratch::for_instance(&inst);
        for k in [1, 3, 16] {
            assert!(mc_generate(&pibt, inst.starts(), &bad, &[0, 1], 7, k, &Sequential, &mut scratch).is_none());
        }
    }
}
