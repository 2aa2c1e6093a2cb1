//! Single-agent planning among fixed trajectories over safe intervals.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Reverse;

use hashbrown::HashMap;

use crate::dist::UNREACHABLE;
use crate::graph::{GridMap, Vertex};
use crate::instance::Instance;

/// Open-ended interval bound.
pub const FOREVER: u32 = u32::MAX;

/// Times at which fixed agents occupy each vertex and traverse each edge.
///
/// A fixed path keeps its agent parked on its last vertex forever.
#[derive(Debug, Clone)]
pub struct SafeIntervalTable {
    occupied: Vec<Vec<u32>>,
    parked_from: Vec<u32>,
    moves: HashMap<(u32, u32), Vec<u32>>,
}

fn park_time(path: &[Vertex]) -> usize {
    let last = *path.last().expect("empty path");
    let mut t = path.len() - 1;
    while t > 0 && path[t - 1] == last {
        t -= 1;
    }
    t
}

fn sorted_insert(list: &mut Vec<u32>, t: u32) {
    let i = list.partition_point(|&x| x < t);
    list.insert(i, t);
}

fn sorted_remove(list: &mut Vec<u32>, t: u32) {
    let i = list.partition_point(|&x| x < t);
    assert!(list.get(i) == Some(&t), "removing a path that was not inserted");
    list.remove(i);
}

impl SafeIntervalTable {
    pub fn new(num_vertices: usize) -> Self {
        SafeIntervalTable {
            occupied: alloc::vec![Vec::new(); num_vertices],
            parked_from: alloc::vec![FOREVER; num_vertices],
            moves: HashMap::new(),
        }
    }

    pub fn from_paths<'p>(num_vertices: usize, paths: impl IntoIterator<Item = &'p [Vertex]>) -> Self {
        let mut table = Self::new(num_vertices);
        for p in paths {
            table.insert(p);
        }
        table
    }

    pub fn insert(&mut self, path: &[Vertex]) {
        let park = park_time(path);
        for (t, &v) in path[..park].iter().enumerate() {
            sorted_insert(&mut self.occupied[v.index()], t as u32);
        }
        let last = path[park].index();
        assert_eq!(self.parked_from[last], FOREVER, "two agents parked on one vertex");
        self.parked_from[last] = park as u32;
        for t in 0..park {
            if path[t] != path[t + 1] {
                let list = self.moves.entry((path[t].0, path[t + 1].0)).or_default();
                sorted_insert(list, t as u32);
            }
        }
    }

    pub fn remove(&mut self, path: &[Vertex]) {
        let park = park_time(path);
        for (t, &v) in path[..park].iter().enumerate() {
            sorted_remove(&mut self.occupied[v.index()], t as u32);
        }
        self.parked_from[path[park].index()] = FOREVER;
        for t in 0..park {
            if path[t] != path[t + 1] {
                let key = (path[t].0, path[t + 1].0);
                let list = self.moves.get_mut(&key).expect("unknown move");
                sorted_remove(list, t as u32);
                if list.is_empty() {
                    self.moves.remove(&key);
                }
            }
        }
    }

    pub fn is_safe(&self, v: Vertex, t: u32) -> bool {
        t < self.parked_from[v.index()] && self.occupied[v.index()].binary_search(&t).is_err()
    }

    /// Whether moving `from -> to` between `t` and `t + 1` swaps with a fixed agent.
    pub fn edge_blocked(&self, from: Vertex, to: Vertex, t: u32) -> bool {
        self.moves
            .get(&(to.0, from.0))
            .is_some_and(|l| l.binary_search(&t).is_ok())
    }

    /// Maximal safe intervals `[lo, hi]` at `v`, sorted; `hi` may be [`FOREVER`].
    pub fn intervals(&self, v: Vertex) -> Vec<(u32, u32)> {
        let mut out = Vec::new();
        self.intervals_into(v, &mut out);
        out
    }

    fn intervals_into(&self, v: Vertex, out: &mut Vec<(u32, u32)>) {
        out.clear();
        let park = self.parked_from[v.index()];
        let mut lo = 0u32;
        for &o in &self.occupied[v.index()] {
            if o >= park {
                break;
            }
            if o > lo {
                out.push((lo, o - 1));
            }
            lo = o + 1;
        }
        if park == FOREVER {
            out.push((lo, FOREVER));
        } else if park > lo {
            out.push((lo, park - 1));
        }
    }
}

struct State {
    v: Vertex,
    hi: u32,
    arrival: u32,
    cost: u32,
    parent: u32,
}

/// `(arrival, cost)` labels kept per safe interval.
type Labels = HashMap<(u32, u32), Vec<(u32, u32)>>;

/// Whether a label at `v` arriving at `t` with `cost` adds nothing, given
/// that waiting costs one per step except at `goal`.
fn dominated(labels: &[(u32, u32)], t: u32, cost: u32, at_goal: bool) -> bool {
    labels.iter().any(|&(t1, c1)| {
        t1 <= t && c1 + if at_goal { 0 } else { t - t1 } <= cost
    })
}

/// Path from `start` at `start_time` that ends parked at `goal` forever,
/// minimizing the number of steps not spent resting at `goal`, and arriving
/// no later than `horizon`.
///
/// Waiting on the goal is free, so besides the earliest departure the search
/// also tries leaving the goal as late as its safe interval allows.
/// `h` must be the exact distance-to-goal table. The returned path covers
/// times `start_time..=arrival`.
pub fn sipp_plan(
    map: &GridMap,
    h: &dyn Fn(Vertex) -> u32,
    start: Vertex,
    start_time: u32,
    goal: Vertex,
    table: &SafeIntervalTable,
    horizon: u32,
) -> Option<Vec<Vertex>> {
    let mut buf = Vec::new();
    table.intervals_into(start, &mut buf);
    let &(_, hi0) = buf.iter().find(|&&(lo, hi)| lo <= start_time && start_time <= hi)?;
    let h0 = h(start);
    if h0 == UNREACHABLE {
        return None;
    }

    let mut states = alloc::vec![State {
        v: start,
        hi: hi0,
        arrival: start_time,
        cost: 0,
        parent: u32::MAX,
    }];
    // (f, arrival, state id)
    let mut open = BinaryHeap::new();
    let mut labels: Labels = HashMap::new();
    open.push(Reverse((h0, start_time, 0u32)));
    labels.insert((start.0, hi0), alloc::vec![(start_time, 0)]);

    while let Some(Reverse((_, t, id))) = open.pop() {
        let State { v, hi, cost, .. } = states[id as usize];
        if !labels[&(v.0, hi)].contains(&(t, cost)) {
            continue;
        }
        if v == goal && hi == FOREVER {
            return Some(reconstruct(&states, id, start_time));
        }
        let at_goal = v == goal;
        let latest = hi.saturating_add(1);
        for &w in map.neighbors(v) {
            let hw = h(w);
            if hw == UNREACHABLE {
                continue;
            }
            table.intervals_into(w, &mut buf);
            for &(lo2, hi2) in buf.iter() {
                if lo2 > latest || lo2 > horizon {
                    break;
                }
                if hi2 <= t {
                    continue;
                }
                let end = latest.min(hi2).min(horizon.saturating_sub(hw));
                let mut a = (t + 1).max(lo2);
                while a <= end && table.edge_blocked(v, w, a - 1) {
                    a += 1;
                }
                if a > end {
                    continue;
                }
                let mut arrivals = [Some(a), None];
                if at_goal {
                    let mut b = end;
                    while b > a && table.edge_blocked(v, w, b - 1) {
                        b -= 1;
                    }
                    if b > a {
                        arrivals[1] = Some(b);
                    }
                }
                for a in arrivals.into_iter().flatten() {
                    let c = cost + 1 + if at_goal { 0 } else { a - 1 - t };
                    let list = labels.entry((w.0, hi2)).or_default();
                    if dominated(list, a, c, w == goal) {
                        continue;
                    }
                    list.retain(|&(t2, c2)| !dominated(&[(a, c)], t2, c2, w == goal));
                    list.push((a, c));
                    states.push(State {
                        v: w,
                        hi: hi2,
                        arrival: a,
                        cost: c,
                        parent: id,
                    });
                    open.push(Reverse((c + hw, a, states.len() as u32 - 1)));
                }
            }
        }
    }
    None
}

fn reconstruct(states: &[State], mut id: u32, start_time: u32) -> Vec<Vertex> {
    let mut rev = Vec::new();
    loop {
        let s = &states[id as usize];
        let prev_arrival = if s.parent == u32::MAX {
            start_time
        } else {
            states[s.parent as usize].arrival
        };
        rev.push(s.v);
        if s.parent == u32::MAX {
            break;
        }
        // waits at the parent before the move
        let pv = states[s.parent as usize].v;
        for _ in prev_arrival + 1..s.arrival {
            rev.push(pv);
        }
        id = s.parent;
    }
    rev.reverse();
    rev
}

/// [`sipp_plan`] for agent `agent` of `inst`, starting at time 0.
pub fn plan_agent(inst: &Instance, agent: usize, table: &SafeIntervalTable, horizon: u32) -> Option<Vec<Vertex>> {
    let d = inst.dist();
    sipp_plan(
        inst.map(),
        &|v| d.raw(agent, v),
        inst.starts()[agent],
        0,
        inst.goals()[agent],
        table,
        horizon,
    )
}
