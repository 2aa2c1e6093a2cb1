//! One-step configuration generation by priority inheritance with backtracking.
//!
//! Given a configuration, a set of pinned agents and an agent priority order,
//! [`Pibt::generate`] returns a connected successor configuration or `None`
//! when the pins cannot be honored.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng as _;

use crate::dist::UNREACHABLE;
use crate::graph::Vertex;
use crate::instance::{Configuration, Instance};
use crate::rng::Rng;
use crate::suo::ScatterPaths;

const NONE: u32 = u32::MAX;
/// Neighbors plus the current vertex on a four-connected grid.
const MAX_CANDIDATES: usize = 5;

/// Agents pinned to vertices for the next step.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConstraintSet {
    pairs: Vec<(usize, Vertex)>,
}

impl ConstraintSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Pins `agent` to `vertex`. Panics if the agent is already pinned.
    pub fn push(&mut self, agent: usize, vertex: Vertex) {
        assert!(
            self.pairs.iter().all(|&(a, _)| a != agent),
            "agent {agent} constrained twice"
        );
        self.pairs.push((agent, vertex));
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, Vertex)> + '_ {
        self.pairs.iter().copied()
    }
}

impl FromIterator<(usize, Vertex)> for ConstraintSet {
    fn from_iter<I: IntoIterator<Item = (usize, Vertex)>>(iter: I) -> Self {
        let mut set = ConstraintSet::new();
        for (a, v) in iter {
            set.push(a, v);
        }
        set
    }
}

/// Dynamic agent priorities.
///
/// Each agent has a fixed base in `[0, 1)`. While away from its goal an
/// agent's priority grows by one per step; on reaching the goal it drops back
/// to the base. Ties are broken by the lower agent index.
#[derive(Debug, Clone, PartialEq)]
pub struct PrioritySet {
    values: Vec<f32>,
}

impl PrioritySet {
    /// Bases proportional to each agent's start-goal distance.
    pub fn initial(inst: &Instance) -> Self {
        let dists: Vec<u32> = (0..inst.num_agents())
            .map(|i| inst.dist().raw(i, inst.starts()[i]))
            .collect();
        let max = dists.iter().copied().max().unwrap_or(0) as f32;
        PrioritySet {
            values: dists.iter().map(|&d| d as f32 / (max + 1.0)).collect(),
        }
    }

    pub fn from_values(values: Vec<f32>) -> Self {
        PrioritySet { values }
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Fixes the order before the next step from location `config`.
    pub fn update(&self, config: &[Vertex], goals: &[Vertex]) -> PrioritySet {
        let values = self
            .values
            .iter()
            .zip(config.iter().zip(goals))
            .map(|(&p, (v, g))| if v == g { p - (p as u32) as f32 } else { p + 1.0 })
            .collect();
        PrioritySet { values }
    }

    /// Agents from highest to lowest priority.
    pub fn order(&self) -> Vec<u32> {
        let mut order: Vec<u32> = (0..self.values.len() as u32).collect();
        self.order_into(&mut order);
        order
    }

    pub fn order_into(&self, out: &mut Vec<u32>) {
        out.clear();
        out.extend(0..self.values.len() as u32);
        let v = &self.values;
        out.sort_by(|&a, &b| {
            v[b as usize]
                .partial_cmp(&v[a as usize])
                .unwrap_or(core::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
    }
}

/// Per-call working memory, reusable between calls on the same map.
#[derive(Debug, Clone)]
pub struct PibtScratch {
    occupied_now: Vec<u32>,
    occupied_next: Vec<u32>,
    next: Vec<u32>,
    candidates: Vec<Vertex>,
    num_candidates: Vec<u8>,
}

impl PibtScratch {
    pub fn new(num_vertices: usize, num_agents: usize) -> Self {
        PibtScratch {
            occupied_now: vec![NONE; num_vertices],
            occupied_next: vec![NONE; num_vertices],
            next: vec![NONE; num_agents],
            candidates: vec![Vertex(0); num_agents * MAX_CANDIDATES],
            num_candidates: vec![0; num_agents],
        }
    }

    pub fn for_instance(inst: &Instance) -> Self {
        Self::new(inst.map().num_vertices(), inst.num_agents())
    }

    fn fits(&self, inst: &Instance) -> bool {
        self.occupied_now.len() == inst.map().num_vertices() && self.next.len() == inst.num_agents()
    }

    fn load(&mut self, from: &[Vertex]) {
        for (i, &v) in from.iter().enumerate() {
            self.occupied_now[v.index()] = i as u32;
        }
    }

    fn clear(&mut self, from: &[Vertex]) {
        for (i, &v) in from.iter().enumerate() {
            self.occupied_now[v.index()] = NONE;
            let nx = self.next[i];
            if nx != NONE {
                self.occupied_next[nx as usize] = NONE;
                self.next[i] = NONE;
            }
        }
    }
}

/// PIBT over one instance, optionally steered by scattered paths.
#[derive(Clone, Copy)]
pub struct Pibt<'a> {
    inst: &'a Instance,
    scatter: Option<&'a ScatterPaths>,
    swap: bool,
}

impl<'a> Pibt<'a> {
    pub fn new(inst: &'a Instance) -> Self {
        Pibt {
            inst,
            scatter: None,
            swap: true,
        }
    }

    pub fn with_scatter(mut self, scatter: Option<&'a ScatterPaths>) -> Self {
        self.scatter = scatter;
        self
    }

    pub fn with_swap(mut self, swap: bool) -> Self {
        self.swap = swap;
        self
    }

    pub fn instance(&self) -> &'a Instance {
        self.inst
    }

    /// Preference score: 0 along the agent's scattered path, else goal distance.
    #[inline]
    fn score(&self, agent: usize, from: Vertex, to: Vertex) -> f64 {
        if let Some(sp) = self.scatter {
            if sp.has_edge(agent, from, to) {
                return 0.0;
            }
        }
        match self.inst.dist().raw(agent, to) {
            UNREACHABLE => f64::MAX / 2.0,
            d => d as f64,
        }
    }

    fn sort_candidates(&self, agent: usize, at: Vertex, rng: &mut Rng, out: &mut [Vertex]) -> usize {
        let map = self.inst.map();
        let mut keyed = [(0.0f64, Vertex(0)); MAX_CANDIDATES];
        let mut len = 0;
        for &u in map.neighbors(at).iter().chain(core::iter::once(&at)) {
            keyed[len] = (self.score(agent, at, u) + rng.random::<f64>(), u);
            len += 1;
        }
        keyed[..len].sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
        for (slot, &(_, u)) in out.iter_mut().zip(&keyed[..len]) {
            *slot = u;
        }
        len
    }

    /// Candidate next vertices of `agent` ordered by preference; ties broken randomly.
    pub fn build_preferences(&self, agent: usize, config: &[Vertex], rng: &mut Rng) -> Vec<Vertex> {
        let mut out = [Vertex(0); MAX_CANDIDATES];
        let len = self.sort_candidates(agent, config[agent], rng, &mut out);
        out[..len].to_vec()
    }

    /// Returns `prefs` reversed when `agent` must trade places with a
    /// neighbor through a narrow passage, unchanged otherwise.
    ///
    /// Evaluated as if no agent has been assigned a next vertex yet.
    pub fn apply_swap_heuristic(&self, agent: usize, config: &[Vertex], prefs: &[Vertex]) -> Vec<Vertex> {
        let mut s = PibtScratch::for_instance(self.inst);
        s.load(config);
        let mut out = prefs.to_vec();
        if self.swap && self.swap_partner(&s, config, agent, prefs[0]).is_some() {
            out.reverse();
        }
        s.clear(config);
        out
    }

    /// One successor of `from` honoring `constraints`, or `None`.
    ///
    /// `order` lists agents from highest to lowest priority.
    pub fn generate(
        &self,
        from: &[Vertex],
        constraints: &ConstraintSet,
        order: &[u32],
        rng: &mut Rng,
        scratch: &mut PibtScratch,
    ) -> Option<Configuration> {
        debug_assert!(scratch.fits(self.inst));
        scratch.load(from);
        let ok = self.assign(from, constraints, order, rng, scratch);
        let result = ok.then(|| {
            Configuration(scratch.next.iter().map(|&v| Vertex(v)).collect())
        });
        scratch.clear(from);
        debug_assert!(result
            .as_ref()
            .is_none_or(|q| crate::metrics::connected(from, q, self.inst.map())));
        result
    }

    fn assign(
        &self,
        from: &[Vertex],
        constraints: &ConstraintSet,
        order: &[u32],
        rng: &mut Rng,
        s: &mut PibtScratch,
    ) -> bool {
        for (i, l) in constraints.iter() {
            debug_assert!(l == from[i] || self.inst.map().is_adjacent(from[i], l));
            if s.occupied_next[l.index()] != NONE {
                return false;
            }
            let pre = from[i].index();
            let pushed = s.occupied_next[pre];
            if pushed != NONE && pushed == s.occupied_now[l.index()] {
                return false;
            }
            s.next[i] = l.0;
            s.occupied_next[l.index()] = i as u32;
        }
        for &a in order {
            let a = a as usize;
            if s.next[a] == NONE && !self.step(s, from, a, rng) {
                return false;
            }
        }
        true
    }

    fn step(&self, s: &mut PibtScratch, from: &[Vertex], i: usize, rng: &mut Rng) -> bool {
        let v_now = from[i];
        let lo = i * MAX_CANDIDATES;
        let mut buf = [Vertex(0); MAX_CANDIDATES];
        let len = self.sort_candidates(i, v_now, rng, &mut buf);
        s.candidates[lo..lo + len].copy_from_slice(&buf[..len]);
        s.num_candidates[i] = len as u8;

        let partner = if self.swap {
            self.swap_partner(s, from, i, buf[0])
        } else {
            None
        };
        if partner.is_some() {
            s.candidates[lo..lo + len].reverse();
        }

        for k in 0..len {
            let u = s.candidates[lo + k];
            if s.occupied_next[u.index()] != NONE {
                continue;
            }
            let ak = s.occupied_now[u.index()];
            if ak != NONE && s.next[ak as usize] == v_now.0 {
                continue;
            }
            s.occupied_next[u.index()] = i as u32;
            s.next[i] = u.0;
            if ak != NONE && ak as usize != i && s.next[ak as usize] == NONE && !self.step(s, from, ak as usize, rng) {
                continue;
            }
            if k == 0 {
                if let Some(j) = partner {
                    if s.next[j] == NONE && s.occupied_next[v_now.index()] == NONE {
                        s.next[j] = v_now.0;
                        s.occupied_next[v_now.index()] = j as u32;
                    }
                }
            }
            return true;
        }
        s.occupied_next[v_now.index()] = i as u32;
        s.next[i] = v_now.0;
        false
    }

    fn agent_at(&self, s: &PibtScratch, v: Vertex) -> Option<usize> {
        match s.occupied_now[v.index()] {
            NONE => None,
            a => Some(a as usize),
        }
    }

    /// The agent to pull along when `i` should swap, if any.
    fn swap_partner(&self, s: &PibtScratch, from: &[Vertex], i: usize, top: Vertex) -> Option<usize> {
        let v_now = from[i];
        if top == v_now {
            return None;
        }
        // head-on: the agent in front needs to go where `i` stands
        if let Some(j) = self.agent_at(s, top) {
            if s.next[j] == NONE
                && self.swap_required(s, i, j, v_now, from[j])
                && self.swap_possible(s, from[j], v_now)
            {
                return Some(j);
            }
        }
        // clearing: a neighbor behind must pass through toward `top`
        for &u in self.inst.map().neighbors(v_now) {
            let Some(k) = self.agent_at(s, u) else { continue };
            if top == from[k] {
                continue;
            }
            if self.swap_required(s, k, i, v_now, top) && self.swap_possible(s, top, v_now) {
                return Some(k);
            }
        }
        None
    }

    /// Neighbors of `at` usable to step aside, ignoring `back` and dead ends
    /// occupied by agents resting at their goals.
    fn escape_count(&self, s: &PibtScratch, at: Vertex, back: Vertex) -> (usize, Option<Vertex>) {
        let map = self.inst.map();
        let mut n = 0;
        let mut last = None;
        for &u in map.neighbors(at) {
            let parked = map.degree(u) == 1
                && self
                    .agent_at(s, u)
                    .is_some_and(|a| self.inst.goals()[a] == u);
            if u == back || parked {
                continue;
            }
            n += 1;
            last = Some(u);
        }
        (n, last)
    }

    /// Simulates `pusher` driving `puller` back along a corridor; true when
    /// the corridor offers no room to pass and both want the other side.
    fn swap_required(&self, s: &PibtScratch, pusher: usize, puller: usize, pusher_at: Vertex, puller_at: Vertex) -> bool {
        let d = self.inst.dist();
        let (mut v_pusher, mut v_puller) = (pusher_at, puller_at);
        while d.raw(pusher, v_puller) < d.raw(pusher, v_pusher) {
            let (n, next) = self.escape_count(s, v_puller, v_pusher);
            if n >= 2 {
                return false;
            }
            let Some(next) = next else { break };
            v_pusher = v_puller;
            v_puller = next;
        }
        d.raw(puller, v_pusher) < d.raw(puller, v_puller)
            && (d.raw(pusher, v_pusher) == 0 || d.raw(pusher, v_puller) < d.raw(pusher, v_pusher))
    }

    /// Walks backward from `puller_at` looking for a branch where two agents can trade places.
    fn swap_possible(&self, s: &PibtScratch, pusher_at: Vertex, puller_at: Vertex) -> bool {
        let (mut v_pusher, mut v_puller) = (pusher_at, puller_at);
        for _ in 0..self.inst.map().num_vertices() {
            if v_puller == pusher_at {
                return false;
            }
            let (n, next) = self.escape_count(s, v_puller, v_pusher);
            if n >= 2 {
                return true;
            }
            let Some(next) = next else { return false };
            v_pusher = v_puller;
            v_puller = next;
        }
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GridMap;
    use crate::metrics::connected;
    use crate::rng::seeded;
    use alloc::sync::Arc;

    fn instance(rows: &[&str], agents: &[((usize, usize), (usize, usize))]) -> Instance {
        let map = Arc::new(GridMap::from_rows(rows).unwrap());
        let s = agents.iter().map(|&(s, _)| map.vertex_at(s.0, s.1).unwrap()).collect();
        let g = agents.iter().map(|&(_, g)| map.vertex_at(g.0, g.1).unwrap()).collect();
        Instance::new(map, s, g).unwrap()
    }

    #[test]
    fn goal_neighbor_comes_first() {
        let inst = instance(&["....", "...."], &[((1, 1), (2, 1))]);
        let pibt = Pibt::new(&inst);
        for seed in 0..20 {
            let prefs = pibt.build_preferences(0, inst.starts(), &mut seeded(seed));
            assert_eq!(prefs[0], inst.goals()[0]);
        }
    }

    #[test]
    fn at_goal_prefers_staying() {
        let inst = instance(&["...", "..."], &[((1, 0), (1, 0))]);
        let pibt = Pibt::new(&inst);
        let prefs = pibt.build_preferences(0, inst.starts(), &mut seeded(3));
        assert_eq!(prefs[0], inst.goals()[0]);
    }

    #[test]
    fn preferences_are_a_permutation_of_candidates() {
        let inst = instance(&["...", "...", "..."], &[((1, 1), (0, 0))]);
        let pibt = Pibt::new(&inst);
        let mut prefs = pibt.build_preferences(0, inst.starts(), &mut seeded(9));
        let mut expected = inst.map().neighbors(inst.starts()[0]).to_vec();
        expected.push(inst.starts()[0]);
        prefs.sort();
        expected.sort();
        assert_eq!(prefs, expected);
    }

    #[test]
    fn single_agent_steps_to_goal() {
        let inst = instance(&["...", "..."], &[((0, 0), (1, 0))]);
        let pibt = Pibt::new(&inst);
        let mut scratch = PibtScratch::for_instance(&inst);
        let q = pibt
            .generate(inst.starts(), &ConstraintSet::new(), &[0], &mut seeded(1), &mut scratch)
            .unwrap();
        assert_eq!(q, *inst.goals());
    }

    #[test]
    fn colliding_constraints_fail() {
        let inst = instance(&["...", "..."], &[((0, 0), (2, 0)), ((2, 0), (0, 0))]);
        let mid = inst.map().vertex_at(1, 0).unwrap();
        let pibt = Pibt::new(&inst);
        let mut scratch = PibtScratch::for_instance(&inst);
        let cs: ConstraintSet = [(0, mid), (1, mid)].into_iter().collect();
        assert!(pibt
            .generate(inst.starts(), &cs, &[0, 1], &mut seeded(1), &mut scratch)
            .is_none());
        // scratch is clean afterwards
        let q = pibt
            .generate(inst.starts(), &ConstraintSet::new(), &[0, 1], &mut seeded(1), &mut scratch)
            .unwrap();
        assert!(connected(inst.starts(), &q, inst.map()));
    }

    #[test]
    fn constraints_that_swap_fail() {
        let inst = instance(&["...."], &[((1, 0), (3, 0)), ((2, 0), (0, 0))]);
        let pibt = Pibt::new(&inst);
        let mut scratch = PibtScratch::for_instance(&inst);
        let cs: ConstraintSet = [(0, inst.starts()[1]), (1, inst.starts()[0])].into_iter().collect();
        assert!(pibt
            .generate(inst.starts(), &cs, &[0, 1], &mut seeded(1), &mut scratch)
            .is_none());
    }

    #[test]
    fn higher_priority_pushes_lower() {
        // agent 0 wants (2,0) occupied by agent 1, which must step aside
        let inst = instance(&["....", "@@.@"], &[((1, 0), (3, 0)), ((2, 0), (2, 0))]);
        let pibt = Pibt::new(&inst).with_swap(false);
        let mut scratch = PibtScratch::for_instance(&inst);
        let q = pibt
            .generate(inst.starts(), &ConstraintSet::new(), &[0, 1], &mut seeded(5), &mut scratch)
            .unwrap();
        assert_eq!(q[0], inst.map().vertex_at(2, 0).unwrap());
        assert_ne!(q[1], inst.map().vertex_at(2, 0).unwrap());
        assert!(connected(inst.starts(), &q, inst.map()));
    }

    // corridor x=0..4 on row 0, with a side pocket below x=1
    const CORRIDOR: [&str; 2] = [".....", "@.@@@"];

    #[test]
    fn swap_detector_fires_for_the_blocked_agent_only() {
        let inst = instance(&CORRIDOR, &[((2, 0), (4, 0)), ((3, 0), (0, 0))]);
        let pibt = Pibt::new(&inst);
        let q = inst.starts();
        let prefs0 = pibt.build_preferences(0, q, &mut seeded(0));
        assert_eq!(prefs0[0], q[1]);
        let out0 = pibt.apply_swap_heuristic(0, q, &prefs0);
        let mut reversed = prefs0.clone();
        reversed.reverse();
        assert_eq!(out0, reversed);

        let prefs1 = pibt.build_preferences(1, q, &mut seeded(0));
        assert_eq!(pibt.apply_swap_heuristic(1, q, &prefs1), prefs1);
        assert_eq!(
            pibt.with_swap(false).apply_swap_heuristic(0, q, &prefs0),
            prefs0
        );
    }

    #[test]
    fn swap_detector_quiet_in_open_space() {
        let inst = instance(&[".....", ".....", "....."], &[((1, 1), (3, 1)), ((2, 1), (0, 1))]);
        let pibt = Pibt::new(&inst);
        for agent in 0..2 {
            let prefs = pibt.build_preferences(agent, inst.starts(), &mut seeded(4));
            assert_eq!(pibt.apply_swap_heuristic(agent, inst.starts(), &prefs), prefs);
        }
    }

    #[test]
    fn swap_detector_needs_two_agents() {
        let inst = instance(&CORRIDOR, &[((2, 0), (4, 0))]);
        let pibt = Pibt::new(&inst);
        let prefs = pibt.build_preferences(0, inst.starts(), &mut seeded(2));
        assert_eq!(pibt.apply_swap_heuristic(0, inst.starts(), &prefs), prefs);
    }

    #[test]
    fn priorities_follow_goal_rule() {
        let inst = instance(&["....."], &[((0, 0), (4, 0)), ((2, 0), (2, 0))]);
        let p0 = PrioritySet::initial(&inst);
        let base = p0.values().to_vec();
        assert!(base.iter().all(|&b| (0.0..1.0).contains(&b)));
        let mut p = p0.clone();
        for _ in 0..3 {
            p = p.update(inst.starts(), inst.goals());
        }
        assert_eq!(p.values()[0], base[0] + 3.0);
        assert_eq!(p.values()[1], base[1]);
        let back = p.update(inst.goals(), inst.goals());
        assert!((back.values()[0] - base[0]).abs() < 1e-6);
    }

    #[test]
    fn equal_priorities_favor_lower_index() {
        let p = PrioritySet::from_values(vec![0.5, 2.5, 2.5, 0.1]);
        assert_eq!(p.order(), vec![1, 2, 0, 3]);
    }
}
