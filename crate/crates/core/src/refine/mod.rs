//! Solution refiners whose output is merged back into the search.

pub mod lns;
pub mod sipp;

use alloc::vec::Vec;

use rand::Rng as _;

use crate::deadline::Deadline;
use crate::graph::Vertex;
use crate::instance::{Configuration, Instance, Solution};
use crate::mc::SampleExecutor;
use crate::metrics::validate_solution;
use crate::rng::seeded;
use crate::search::{SearchParams, SearchState, UntilDeadline};
use crate::suo::compute_scatter;

pub use lns::{lns_refine, LnsParams};
pub use sipp::{sipp_plan, SafeIntervalTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RefineKind {
    Lns,
    Recursive,
}

/// One refiner job: improve `base` or give up.
#[derive(Debug, Clone)]
pub struct RefinementTask {
    pub base: Solution,
    pub seed: u64,
    pub kind: RefineKind,
}

/// Settings for the search run inside a recursive refinement.
#[derive(Debug, Clone, PartialEq)]
pub struct RecursiveParams {
    pub search: SearchParams,
    /// Scatter margin for the sub-instance; `None` skips scattering.
    pub suo_margin: Option<u32>,
}

/// Per-agent paths of `sol`.
pub fn paths_of(sol: &Solution, num_agents: usize) -> Vec<Vec<Vertex>> {
    (0..num_agents).map(|i| sol.path(i)).collect()
}

/// Steps at which the agent is not resting on its goal.
pub fn agent_loss(path: &[Vertex], goal: Vertex) -> u64 {
    path.windows(2).filter(|w| !(w[0] == goal && w[1] == goal)).count() as u64
}

/// Joins per-agent paths, padding with goal waits and trimming steps where
/// everyone is already parked.
pub fn assemble(paths: &[Vec<Vertex>], goals: &[Vertex]) -> Solution {
    let len = paths.iter().map(Vec::len).max().unwrap_or(1);
    let mut configs: Vec<Configuration> = (0..len)
        .map(|t| Configuration(paths.iter().map(|p| p[t.min(p.len() - 1)]).collect()))
        .collect();
    trim_parked(&mut configs, goals);
    Solution(configs)
}

fn trim_parked(configs: &mut Vec<Configuration>, goals: &[Vertex]) {
    while configs.len() >= 2 && *configs[configs.len() - 2] == *goals {
        configs.pop();
    }
}

/// Base prefix up to `t` followed by a solution starting at `base[t]`.
pub fn stitch(base: &Solution, t: usize, sub: &Solution) -> Solution {
    assert_eq!(base[t], sub[0], "junction configurations differ");
    let mut configs: Vec<Configuration> = base[..t].to_vec();
    configs.extend(sub.iter().cloned());
    Solution(configs)
}

/// Restarts the search from configuration `t` of `base` and splices the result.
pub fn recursive_refine_at(
    inst: &Instance,
    base: &Solution,
    t: usize,
    params: &RecursiveParams,
    exec: &dyn SampleExecutor,
    budget: &dyn Deadline,
) -> Option<Solution> {
    let sub_inst = inst.with_starts(base[t].to_vec()).ok()?;
    let scatter = params.suo_margin.map(|m| compute_scatter(&sub_inst, m, budget));
    let mut search = SearchState::new(&sub_inst, params.search.clone(), scatter.as_ref());
    search.run(exec, &mut UntilDeadline(budget));
    let sub = search.best_solution()?;
    let stitched = stitch(base, t, &sub);
    let goals = inst.goals();
    if stitched.sum_of_loss(goals) >= base.sum_of_loss(goals) {
        return None;
    }
    validate_solution(inst, &stitched).ok()?;
    Some(stitched)
}

/// [`recursive_refine_at`] from a uniformly drawn configuration.
pub fn recursive_refine(
    inst: &Instance,
    base: &Solution,
    seed: u64,
    params: &RecursiveParams,
    exec: &dyn SampleExecutor,
    budget: &dyn Deadline,
) -> Option<Solution> {
    let t = seeded(seed).random_range(0..base.len());
    let mut params = params.clone();
    params.search.seed = seed;
    recursive_refine_at(inst, base, t, &params, exec, budget)
}

/// Runs `task`; `Some` only for a strictly cheaper valid solution.
pub fn run_task(
    inst: &Instance,
    task: &RefinementTask,
    lns: &LnsParams,
    recursive: &RecursiveParams,
    exec: &dyn SampleExecutor,
    budget: &dyn Deadline,
) -> Option<Solution> {
    match task.kind {
        RefineKind::Lns => lns_refine(inst, &task.base, lns, &mut seeded(task.seed), budget),
        RefineKind::Recursive => recursive_refine(inst, &task.base, task.seed, recursive, exec, budget),
    }
}
