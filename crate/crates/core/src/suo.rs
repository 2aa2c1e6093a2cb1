//! Spatially scattered per-agent paths.
//!
//! Each agent in turn is given a path of bounded length that collides as
//! little as possible with the paths of the others. Passes repeat until none
//! of them changes a path. An agent is treated as resting at the last vertex
//! of its path forever after the path ends.

use alloc::collections::{BTreeMap, BinaryHeap};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Reverse;

use hashbrown::HashMap;

use crate::deadline::Deadline;
use crate::graph::Vertex;
use crate::instance::Instance;

/// Time-indexed occupancy of a set of paths.
#[derive(Debug, Default, Clone)]
pub struct CollisionIndex {
    /// `(vertex, t)` for every non-final position of a path.
    visits: HashMap<(u32, u32), u32>,
    /// Per vertex, the times listed in `visits`.
    visit_times: HashMap<u32, Vec<u32>>,
    /// `(from, to, t)` for every move between `t` and `t + 1`.
    moves: HashMap<(u32, u32, u32), u32>,
    /// Per vertex, the times from which some path rests there.
    rest_from: HashMap<u32, Vec<u32>>,
    ends: BTreeMap<u32, u32>,
}

impl CollisionIndex {
    pub fn new() -> Self {
        Self::default()
    }

    /// Latest end time over the stored paths.
    pub fn horizon(&self) -> u32 {
        self.ends.keys().next_back().copied().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.ends.is_empty()
    }

    pub fn insert(&mut self, path: &[Vertex]) {
        self.patch(path, true);
    }

    pub fn remove(&mut self, path: &[Vertex]) {
        self.patch(path, false);
    }

    fn patch(&mut self, path: &[Vertex], add: bool) {
        fn bump<K: core::hash::Hash + Eq>(m: &mut HashMap<K, u32>, k: K, add: bool) {
            if add {
                *m.entry(k).or_insert(0) += 1;
            } else if let Some(c) = m.get_mut(&k) {
                *c -= 1;
                if *c == 0 {
                    m.remove(&k);
                }
            }
        }
        fn list(m: &mut HashMap<u32, Vec<u32>>, k: u32, t: u32, add: bool) {
            if add {
                m.entry(k).or_default().push(t);
            } else if let Some(ts) = m.get_mut(&k) {
                if let Some(p) = ts.iter().position(|&x| x == t) {
                    ts.swap_remove(p);
                }
                if ts.is_empty() {
                    m.remove(&k);
                }
            }
        }
        let end = (path.len() - 1) as u32;
        for (t, w) in path.windows(2).enumerate() {
            let t = t as u32;
            bump(&mut self.visits, (w[0].0, t), add);
            list(&mut self.visit_times, w[0].0, t, add);
            if w[0] != w[1] {
                bump(&mut self.moves, (w[0].0, w[1].0, t), add);
            }
        }
        list(&mut self.rest_from, path[end as usize].0, end, add);
        match self.ends.get_mut(&end) {
            Some(c) if !add => {
                *c -= 1;
                if *c == 0 {
                    self.ends.remove(&end);
                }
            }
            Some(c) => *c += 1,
            None if add => {
                self.ends.insert(end, 1);
            }
            None => {}
        }
    }

    /// Paths occupying `v` at time `t`.
    #[inline]
    pub fn occupancy(&self, v: Vertex, t: u32) -> u32 {
        let moving = self.visits.get(&(v.0, t)).copied().unwrap_or(0);
        let resting = self
            .rest_from
            .get(&v.0)
            .map_or(0, |ts| ts.iter().filter(|&&s| s <= t).count() as u32);
        moving + resting
    }

    /// Paths moving `from -> to` between `t` and `t + 1`.
    #[inline]
    pub fn moves(&self, from: Vertex, to: Vertex, t: u32) -> u32 {
        self.moves.get(&(from.0, to.0, t)).copied().unwrap_or(0)
    }

    /// Collisions suffered by an agent that comes to rest at `v` at time `t`.
    fn rest_cost(&self, v: Vertex, t: u32) -> u32 {
        let passing = self
            .visit_times
            .get(&v.0)
            .map_or(0, |ts| ts.iter().filter(|&&s| s > t).count() as u32);
        let resting = self
            .rest_from
            .get(&v.0)
            .map_or(0, |ts| ts.iter().filter(|&&s| s > t).count() as u32);
        passing + resting
    }
}

/// Vertex and swap coincidences between `path` and the paths stored in `idx`.
///
/// `idx` must not contain `path` itself.
pub fn count_collisions(path: &[Vertex], idx: &CollisionIndex) -> u64 {
    if idx.is_empty() {
        return 0;
    }
    let end = path.len() - 1;
    let horizon = end.max(idx.horizon() as usize);
    let at = |t: usize| path[t.min(end)];
    let mut c = 0u64;
    for t in 0..=horizon {
        let v = at(t);
        c += idx.occupancy(v, t as u32) as u64;
        if t < horizon {
            let w = at(t + 1);
            if v != w {
                c += idx.moves(w, v, t as u32) as u64;
            }
        }
    }
    c
}

/// Shortest path by greedy descent on the goal-distance table.
pub fn shortest_path(inst: &Instance, agent: usize) -> Vec<Vertex> {
    let d = inst.dist();
    let goal = inst.goals()[agent];
    let mut v = inst.starts()[agent];
    let mut path = vec![v];
    while v != goal {
        let here = d.raw(agent, v);
        v = *inst
            .map()
            .neighbors(v)
            .iter()
            .find(|&&u| d.raw(agent, u) + 1 == here)
            .expect("goal reachable");
        path.push(v);
    }
    path
}

/// Collision-minimizing path of length at most `dist + margin`.
///
/// Minimizes collisions first and length second. Returns `None` if the
/// deadline fires first.
pub fn replan_single(
    inst: &Instance,
    agent: usize,
    margin: u32,
    idx: &CollisionIndex,
    deadline: &dyn Deadline,
) -> Option<Vec<Vertex>> {
    let map = inst.map();
    let d = inst.dist();
    let start = inst.starts()[agent];
    let goal = inst.goals()[agent];
    let limit = d.raw(agent, start) + margin;

    struct Node {
        v: Vertex,
        parent: u32,
    }
    // (collisions, t + h, t, vertex, node id); terminal entries use vertex u32::MAX
    type Key = Reverse<(u64, u32, u32, u32, u32)>;
    let mut nodes: Vec<Node> = Vec::new();
    let mut open: BinaryHeap<Key> = BinaryHeap::new();
    let mut closed: HashMap<(u32, u32), ()> = HashMap::new();
    let mut terminals: Vec<u32> = Vec::new();

    nodes.push(Node {
        v: start,
        parent: u32::MAX,
    });
    let c0 = idx.occupancy(start, 0) as u64;
    open.push(Reverse((c0, d.raw(agent, start), 0, start.0, 0)));

    let mut pops = 0u32;
    while let Some(Reverse((c, _, t, v, id))) = open.pop() {
        pops += 1;
        if pops.is_multiple_of(1024) && deadline.expired() {
            return None;
        }
        if v == u32::MAX {
            let mut path = Vec::with_capacity(t as usize + 1);
            let mut cur = terminals[id as usize];
            while cur != u32::MAX {
                path.push(nodes[cur as usize].v);
                cur = nodes[cur as usize].parent;
            }
            path.reverse();
            return Some(path);
        }
        if closed.insert((v, t), ()).is_some() {
            continue;
        }
        let here = Vertex(v);
        if here == goal {
            let cost = c + idx.rest_cost(here, t) as u64;
            terminals.push(id);
            open.push(Reverse((cost, t, t, u32::MAX, terminals.len() as u32 - 1)));
        }
        if t >= limit {
            continue;
        }
        let nt = t + 1;
        for &w in map.neighbors(here).iter().chain(core::iter::once(&here)) {
            let h = d.raw(agent, w);
            if nt + h > limit || closed.contains_key(&(w.0, nt)) {
                continue;
            }
            let mut nc = c + idx.occupancy(w, nt) as u64;
            if w != here {
                nc += idx.moves(w, here, t) as u64;
            }
            nodes.push(Node {
                v: w,
                parent: id,
            });
            open.push(Reverse((nc, nt + h, nt, w.0, nodes.len() as u32 - 1)));
        }
    }
    // unreachable within the limit cannot happen: the shortest path always fits
    None
}

/// One guidance path per agent plus the collision count of the collection.
#[derive(Debug, Clone, Default)]
pub struct ScatterPaths {
    paths: Vec<Option<Vec<Vertex>>>,
    edges: Vec<Vec<(Vertex, Vertex)>>,
    collisions: u64,
    passes: u32,
}

impl ScatterPaths {
    pub fn from_paths(paths: Vec<Option<Vec<Vertex>>>) -> Self {
        let mut idx = CollisionIndex::new();
        for p in paths.iter().flatten() {
            idx.insert(p);
        }
        let mut twice = 0;
        for p in paths.iter().flatten() {
            idx.remove(p);
            twice += count_collisions(p, &idx);
            idx.insert(p);
        }
        let edges = paths
            .iter()
            .map(|p| {
                let mut e: Vec<(Vertex, Vertex)> = p
                    .as_deref()
                    .unwrap_or(&[])
                    .windows(2)
                    .map(|w| (w[0], w[1]))
                    .collect();
                e.sort_unstable();
                e.dedup();
                e
            })
            .collect();
        ScatterPaths {
            paths,
            edges,
            collisions: twice / 2,
            passes: 0,
        }
    }

    pub fn path(&self, agent: usize) -> Option<&[Vertex]> {
        self.paths[agent].as_deref()
    }

    pub fn num_agents(&self) -> usize {
        self.paths.len()
    }

    /// Pairwise collisions in the collection, each pair and time counted once.
    pub fn collisions(&self) -> u64 {
        self.collisions
    }

    /// Number of replanning passes performed.
    pub fn passes(&self) -> u32 {
        self.passes
    }

    /// True if the path of `agent` steps from `from` to `to` at some point.
    #[inline]
    pub fn has_edge(&self, agent: usize, from: Vertex, to: Vertex) -> bool {
        self.edges[agent].binary_search(&(from, to)).is_ok()
    }
}

/// Repeated per-agent replanning until a full pass changes nothing.
///
/// A path is replaced only by one with fewer collisions, or equally many and
/// shorter. On deadline the current collection is returned; agents never
/// planned are left without a path.
pub fn compute_scatter(inst: &Instance, margin: u32, deadline: &dyn Deadline) -> ScatterPaths {
    let n = inst.num_agents();
    let mut paths: Vec<Option<Vec<Vertex>>> = vec![None; n];
    let mut idx = CollisionIndex::new();
    let mut passes = 0;
    'outer: loop {
        passes += 1;
        let mut updated = false;
        for i in 0..n {
            if deadline.expired() {
                break 'outer;
            }
            let current = paths[i].take();
            let current_score = current.as_ref().map(|p| {
                idx.remove(p);
                (count_collisions(p, &idx), p.len())
            });
            let chosen = match (replan_single(inst, i, margin, &idx, deadline), current) {
                (Some(new), None) => {
                    updated = true;
                    new
                }
                (Some(new), Some(old)) => {
                    let score = (count_collisions(&new, &idx), new.len());
                    if score < current_score.unwrap() {
                        updated = true;
                        new
                    } else {
                        old
                    }
                }
                (None, Some(old)) => old,
                (None, None) => shortest_path(inst, i),
            };
            idx.insert(&chosen);
            paths[i] = Some(chosen);
        }
        if !updated {
            break;
        }
    }
    let mut out = ScatterPaths::from_paths(paths);
    out.passes = passes;
    out
}
