//! Neighborhood search: replan random agent subsets against the rest.

use alloc::vec::Vec;

use rand::seq::{index::sample, SliceRandom};
use rand::Rng as _;

use super::sipp::{plan_agent, SafeIntervalTable};
use super::{agent_loss, assemble, paths_of};
use crate::deadline::Deadline;
use crate::graph::Vertex;
use crate::instance::{Instance, Solution};
use crate::metrics::validate_solution;
use crate::rng::Rng;

/// Largest subset replanned at once.
pub const MAX_SUBSET: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LnsParams {
    /// Subsets tried per call.
    pub iterations: usize,
    pub max_subset: usize,
}

impl Default for LnsParams {
    fn default() -> Self {
        LnsParams {
            iterations: 16,
            max_subset: MAX_SUBSET,
        }
    }
}

/// Working copy of a solution as per-agent paths plus their occupancy.
pub struct Neighborhood<'a> {
    inst: &'a Instance,
    paths: Vec<Vec<Vertex>>,
    losses: Vec<u64>,
    table: SafeIntervalTable,
}

impl<'a> Neighborhood<'a> {
    pub fn new(inst: &'a Instance, base: &Solution) -> Self {
        let paths = paths_of(base, inst.num_agents());
        let losses = paths
            .iter()
            .enumerate()
            .map(|(i, p)| agent_loss(p, inst.goals()[i]))
            .collect();
        let table = SafeIntervalTable::from_paths(inst.map().num_vertices(), paths.iter().map(|p| &p[..]));
        Neighborhood {
            inst,
            paths,
            losses,
            table,
        }
    }

    pub fn cost(&self) -> u64 {
        self.losses.iter().sum()
    }

    fn horizon(&self) -> u32 {
        let len = self.paths.iter().map(Vec::len).max().unwrap_or(1);
        (2 * len) as u32
    }

    /// Replans `subset` in the given order. Keeps the result and returns
    /// `true` only if every agent found a path and the cost strictly dropped.
    pub fn try_replan(&mut self, subset: &[usize]) -> bool {
        let horizon = self.horizon();
        for &a in subset {
            self.table.remove(&self.paths[a]);
        }
        let mut planned: Vec<Vec<Vertex>> = Vec::with_capacity(subset.len());
        for &a in subset {
            match plan_agent(self.inst, a, &self.table, horizon) {
                Some(p) => {
                    self.table.insert(&p);
                    planned.push(p);
                }
                None => break,
            }
        }
        let old: u64 = subset.iter().map(|&a| self.losses[a]).sum();
        let new: Option<u64> = (planned.len() == subset.len()).then(|| {
            subset
                .iter()
                .zip(&planned)
                .map(|(&a, p)| agent_loss(p, self.inst.goals()[a]))
                .sum()
        });
        if new.is_some_and(|c| c < old) {
            for (&a, p) in subset.iter().zip(planned) {
                self.losses[a] = agent_loss(&p, self.inst.goals()[a]);
                self.paths[a] = p;
            }
            true
        } else {
            for p in &planned {
                self.table.remove(p);
            }
            for &a in subset {
                self.table.insert(&self.paths[a]);
            }
            false
        }
    }

    pub fn solution(&self) -> Solution {
        assemble(&self.paths, self.inst.goals())
    }

    pub fn paths(&self) -> &[Vec<Vertex>] {
        &self.paths
    }
}

/// Random subset of size uniform in `1..=min(max, n)`, in random order.
pub fn random_subset(n: usize, max: usize, rng: &mut Rng) -> Vec<usize> {
    let size = rng.random_range(1..=max.min(n).max(1));
    let mut subset = sample(rng, n, size).into_vec();
    subset.shuffle(rng);
    subset
}

/// Strictly cheaper solution than `base`, or `None`.
pub fn lns_refine(
    inst: &Instance,
    base: &Solution,
    params: &LnsParams,
    rng: &mut Rng,
    deadline: &dyn Deadline,
) -> Option<Solution> {
    let mut hood = Neighborhood::new(inst, base);
    let start = hood.cost();
    for _ in 0..params.iterations {
        if deadline.expired() {
            break;
        }
        let subset = random_subset(inst.num_agents(), params.max_subset, rng);
        hood.try_replan(&subset);
    }
    if hood.cost() >= start {
        return None;
    }
    let sol = hood.solution();
    validate_solution(inst, &sol).ok()?;
    Some(sol)
}
