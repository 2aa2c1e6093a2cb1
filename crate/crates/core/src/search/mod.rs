//! Anytime search over configurations with lazy successor generation.

mod constraint;

use alloc::collections::VecDeque;
use alloc::rc::Rc;
use alloc::vec::Vec;
use core::hash::BuildHasher;

use hashbrown::{DefaultHashBuilder, HashTable};
use rand::Rng as _;

pub use constraint::ConstraintNode;

use crate::graph::Vertex;
use crate::instance::{Configuration, Instance, Solution};
use crate::mc::{mc_generate, SampleExecutor};
use crate::metrics::{cost_edge, validate_solution, Violation};
use crate::pibt::{ConstraintSet, Pibt, PibtScratch, PrioritySet};
use crate::rng::{fork, seeded, Rng};
use crate::suo::ScatterPaths;

pub type NodeId = u32;

/// Where an improved solution came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Source {
    Search,
    Lns,
    Recursive,
}

impl Source {
    pub fn as_str(self) -> &'static str {
        match self {
            Source::Search => "search",
            Source::Lns => "lns",
            Source::Recursive => "recursive",
        }
    }
}

/// What to put on top of OPEN once a solution exists.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtractStrategy {
    /// A uniformly drawn OPEN entry.
    Random,
    /// The initial node.
    Restart,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchParams {
    pub seed: u64,
    /// Generator samples per expansion.
    pub mc_samples: usize,
    pub extract_prob: f64,
    pub extract_strategy: ExtractStrategy,
    /// Chance of pushing the initial node instead of a rediscovered one.
    pub reinsert_init_prob: f64,
    pub swap: bool,
}

impl Default for SearchParams {
    fn default() -> Self {
        SearchParams {
            seed: 0,
            mc_samples: 1,
            extract_prob: 0.0,
            extract_strategy: ExtractStrategy::Random,
            reinsert_init_prob: 0.001,
            swap: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchStatus {
    /// Interrupted with a solution in hand.
    Solved,
    /// OPEN ran dry with a solution; it is optimal.
    OptimallySolved,
    /// OPEN ran dry without a solution.
    NoSolution,
    /// Interrupted before any solution.
    TimeoutFailure,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub iterations: u64,
    pub generator_calls: u64,
    pub generator_failures: u64,
    pub incorporated: u64,
    pub rejected: u64,
}

/// A strict improvement of the best known cost.
#[derive(Debug)]
pub struct Improvement<'a> {
    pub cost: u64,
    pub solution: &'a Solution,
    pub source: Source,
}

/// Callbacks polled by [`SearchState::run`] once per iteration.
pub trait SearchHooks {
    fn interrupted(&mut self) -> bool;

    fn on_improvement(&mut self, _improvement: &Improvement<'_>) {}

    /// A solution posted from elsewhere, to be merged into the search.
    fn poll_incoming(&mut self) -> Option<(Solution, Source)> {
        None
    }
}

/// Hooks that only watch a deadline.
pub struct UntilDeadline<'a>(pub &'a dyn crate::deadline::Deadline);

impl SearchHooks for UntilDeadline<'_> {
    fn interrupted(&mut self) -> bool {
        self.0.expired()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IncorporateError {
    Invalid(Violation),
    UnknownStart,
}

impl core::fmt::Display for IncorporateError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            IncorporateError::Invalid(v) => write!(f, "invalid solution: {v}"),
            IncorporateError::UnknownStart => f.write_str("first configuration is not in the search"),
        }
    }
}

impl core::error::Error for IncorporateError {}

#[derive(Debug)]
pub struct HighLevelNode {
    config: Configuration,
    parent: Option<NodeId>,
    /// Outgoing edges with their one-step cost.
    neighbors: Vec<(NodeId, u64)>,
    g: u64,
    h: u64,
    priorities: PrioritySet,
    tree: VecDeque<Rc<ConstraintNode>>,
}

impl HighLevelNode {
    pub fn config(&self) -> &Configuration {
        &self.config
    }

    pub fn parent(&self) -> Option<NodeId> {
        self.parent
    }

    pub fn g(&self) -> u64 {
        self.g
    }

    pub fn h(&self) -> u64 {
        self.h
    }

    pub fn f(&self) -> u64 {
        self.g.saturating_add(self.h)
    }

    pub fn neighbors(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.neighbors.iter().map(|&(n, _)| n)
    }

    pub fn priorities(&self) -> &PrioritySet {
        &self.priorities
    }

    pub fn tree_len(&self) -> usize {
        self.tree.len()
    }
}

/// Search state; nodes are never freed while it lives.
pub struct SearchState<'a> {
    inst: &'a Instance,
    pibt: Pibt<'a>,
    params: SearchParams,
    nodes: Vec<HighLevelNode>,
    open: Vec<NodeId>,
    explored: HashTable<NodeId>,
    hasher: DefaultHashBuilder,
    goal: Option<NodeId>,
    best_reported: u64,
    rng: Rng,
    scratch: PibtScratch,
    order: Vec<u32>,
    order_of: Option<NodeId>,
    stats: SearchStats,
}

impl<'a> SearchState<'a> {
    pub fn new(inst: &'a Instance, params: SearchParams, scatter: Option<&'a ScatterPaths>) -> Self {
        assert!(params.mc_samples >= 1, "need at least one generator sample");
        let pibt = Pibt::new(inst).with_scatter(scatter).with_swap(params.swap);
        let mut state = SearchState {
            inst,
            pibt,
            rng: seeded(params.seed),
            params,
            nodes: Vec::new(),
            open: Vec::new(),
            explored: HashTable::new(),
            hasher: DefaultHashBuilder::default(),
            goal: None,
            best_reported: u64::MAX,
            scratch: PibtScratch::for_instance(inst),
            order: Vec::new(),
            order_of: None,
            stats: SearchStats::default(),
        };
        let init = state.add_node(inst.starts().clone(), None, 0, PrioritySet::initial(inst));
        state.open.push(init);
        state
    }

    pub fn instance(&self) -> &'a Instance {
        self.inst
    }

    pub fn params(&self) -> &SearchParams {
        &self.params
    }

    pub fn stats(&self) -> SearchStats {
        self.stats
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn open_len(&self) -> usize {
        self.open.len()
    }

    pub fn node(&self, id: NodeId) -> &HighLevelNode {
        &self.nodes[id as usize]
    }

    pub fn init_node(&self) -> NodeId {
        0
    }

    pub fn goal_node(&self) -> Option<NodeId> {
        self.goal
    }

    pub fn goal_cost(&self) -> Option<u64> {
        self.goal.map(|g| self.nodes[g as usize].g)
    }

    pub fn find(&self, config: &[Vertex]) -> Option<NodeId> {
        let hash = self.hasher.hash_one(config);
        self.explored
            .find(hash, |&id| *self.nodes[id as usize].config == *config)
            .copied()
    }

    /// Current best solution, if any.
    pub fn best_solution(&self) -> Option<Solution> {
        self.goal.map(|g| self.backtrack(g))
    }

    /// Configurations on the parent chain from the initial node to `id`.
    pub fn backtrack(&self, id: NodeId) -> Solution {
        let mut configs = Vec::new();
        let mut cur = Some(id);
        while let Some(n) = cur {
            assert!(configs.len() <= self.nodes.len(), "parent pointers form a cycle");
            let node = &self.nodes[n as usize];
            configs.push(node.config.clone());
            cur = node.parent;
        }
        configs.reverse();
        Solution(configs)
    }

    /// Runs until OPEN is empty or the hooks interrupt.
    pub fn run(&mut self, exec: &dyn SampleExecutor, hooks: &mut dyn SearchHooks) -> SearchStatus {
        loop {
            if hooks.interrupted() {
                return if self.goal.is_some() {
                    SearchStatus::Solved
                } else {
                    SearchStatus::TimeoutFailure
                };
            }
            while let Some((sol, source)) = hooks.poll_incoming() {
                if self.incorporate_solution(&sol).is_ok() {
                    self.report(hooks, source);
                }
            }
            if self.open.is_empty() {
                return if self.goal.is_some() {
                    SearchStatus::OptimallySolved
                } else {
                    SearchStatus::NoSolution
                };
            }
            self.step(exec);
            self.report(hooks, Source::Search);
        }
    }

    fn report(&mut self, hooks: &mut dyn SearchHooks, source: Source) {
        let Some(cost) = self.goal_cost() else { return };
        if cost < self.best_reported {
            self.best_reported = cost;
            let solution = self.backtrack(self.goal.unwrap());
            hooks.on_improvement(&Improvement { cost, solution: &solution, source });
        }
    }

    /// One iteration of the main loop. Returns `false` if OPEN was empty.
    pub fn step(&mut self, exec: &dyn SampleExecutor) -> bool {
        if self.open.is_empty() {
            return false;
        }
        self.stats.iterations += 1;
        let id = self.extract_node();
        let f = self.nodes[id as usize].f();
        if self.goal.is_none() && self.nodes[id as usize].config == *self.inst.goals() {
            self.goal = Some(id);
        }
        if let Some(goal) = self.goal {
            if self.nodes[goal as usize].f() <= f {
                self.open.pop();
                return true;
            }
        }
        let Some(constraints) = self.low_level_search(id) else {
            self.open.pop();
            return true;
        };
        let Some(q) = self.generate(id, &constraints, exec) else {
            self.stats.generator_failures += 1;
            return true;
        };
        match self.find(&q) {
            None => {
                let new = self.create_child(id, q);
                self.open.push(new);
            }
            Some(known) => {
                self.connect(id, known);
                self.dijkstra_update(id);
                if self.rng.random::<f64>() < self.params.reinsert_init_prob {
                    self.open.push(self.init_node());
                } else {
                    self.open.push(known);
                }
            }
        }
        true
    }

    /// Chooses the node to work on and leaves it on top of OPEN.
    pub fn extract_node(&mut self) -> NodeId {
        debug_assert!(!self.open.is_empty());
        if self.goal.is_some()
            && self.params.extract_prob > 0.0
            && self.rng.random::<f64>() < self.params.extract_prob
        {
            let pick = match self.params.extract_strategy {
                ExtractStrategy::Random => {
                    let i = self.rng.random_range(0..self.open.len());
                    self.open[i]
                }
                ExtractStrategy::Restart => self.init_node(),
            };
            self.open.push(pick);
        }
        *self.open.last().unwrap()
    }

    /// Pops the next constraint of node `id` and grows its tree.
    pub fn low_level_search(&mut self, id: NodeId) -> Option<ConstraintSet> {
        let n = self.inst.num_agents();
        let node = &mut self.nodes[id as usize];
        let c = node.tree.pop_front()?;
        let depth = c.depth();
        if depth < n {
            let used: Vec<usize> = c.ancestors().map(|(a, _)| a).collect();
            let agent = (0..n).find(|a| !used.contains(a)).expect("depth < n leaves a free agent");
            let here = node.config[agent];
            for &u in self.inst.map().neighbors(here) {
                node.tree.push_back(ConstraintNode::child(&c, agent, u));
            }
            node.tree.push_back(ConstraintNode::child(&c, agent, here));
        }
        Some(c.constraints())
    }

    fn generate(&mut self, id: NodeId, constraints: &ConstraintSet, exec: &dyn SampleExecutor) -> Option<Configuration> {
        if self.order_of != Some(id) {
            self.nodes[id as usize].priorities.order_into(&mut self.order);
            self.order_of = Some(id);
        }
        self.stats.generator_calls += 1;
        let seed = fork(&mut self.rng);
        mc_generate(
            &self.pibt,
            &self.nodes[id as usize].config,
            constraints,
            &self.order,
            seed,
            self.params.mc_samples,
            exec,
            &mut self.scratch,
        )
    }

    fn add_node(&mut self, config: Configuration, parent: Option<NodeId>, g: u64, priorities: PrioritySet) -> NodeId {
        let id = self.nodes.len() as NodeId;
        let h = self.inst.heuristic(&config);
        let hash = self.hasher.hash_one(&*config);
        let mut tree = VecDeque::new();
        tree.push_back(ConstraintNode::root());
        self.nodes.push(HighLevelNode {
            config,
            parent,
            neighbors: Vec::new(),
            g,
            h,
            priorities,
            tree,
        });
        let nodes = &self.nodes;
        let hasher = &self.hasher;
        self.explored.insert_unique(hash, id, |&n| hasher.hash_one(&*nodes[n as usize].config));
        if self.goal.is_none() && *self.nodes[id as usize].config == **self.inst.goals() {
            self.goal = Some(id);
        }
        id
    }

    fn create_child(&mut self, parent: NodeId, config: Configuration) -> NodeId {
        let p = &self.nodes[parent as usize];
        let cost = cost_edge(&p.config, &config, self.inst.goals());
        let priorities = p.priorities.update(&config, self.inst.goals());
        let g = p.g + cost;
        let id = self.add_node(config, Some(parent), g, priorities);
        self.nodes[parent as usize].neighbors.push((id, cost));
        id
    }

    fn connect(&mut self, from: NodeId, to: NodeId) {
        let f = &self.nodes[from as usize];
        if f.neighbors.iter().any(|&(n, _)| n == to) {
            return;
        }
        let cost = cost_edge(&f.config, &self.nodes[to as usize].config, self.inst.goals());
        self.nodes[from as usize].neighbors.push((to, cost));
    }

    /// Propagates cheaper costs from `start` through known edges.
    pub fn dijkstra_update(&mut self, start: NodeId) {
        let mut queue = VecDeque::from([start]);
        while let Some(from) = queue.pop_front() {
            let base = self.nodes[from as usize].g;
            for i in 0..self.nodes[from as usize].neighbors.len() {
                let (to, cost) = self.nodes[from as usize].neighbors[i];
                let g = base + cost;
                let target = &mut self.nodes[to as usize];
                if g < target.g {
                    target.g = g;
                    target.parent = Some(from);
                    queue.push_back(to);
                    if let Some(goal) = self.goal {
                        if self.nodes[to as usize].f() < self.nodes[goal as usize].f() {
                            self.open.push(to);
                        }
                    }
                }
            }
        }
    }

    /// Merges a solution found elsewhere into the node graph.
    pub fn incorporate_solution(&mut self, solution: &[Configuration]) -> Result<(), IncorporateError> {
        if let Err(v) = validate_solution(self.inst, solution) {
            self.stats.rejected += 1;
            return Err(IncorporateError::Invalid(v));
        }
        let Some(mut from) = self.find(&solution[0]) else {
            self.stats.rejected += 1;
            return Err(IncorporateError::UnknownStart);
        };
        for q in &solution[1..] {
            from = match self.find(q) {
                None => {
                    let new = self.create_child(from, q.clone());
                    self.open.push(new);
                    new
                }
                Some(known) => {
                    self.connect(from, known);
                    self.dijkstra_update(from);
                    known
                }
            };
        }
        self.stats.incorporated += 1;
        Ok(())
    }
}
