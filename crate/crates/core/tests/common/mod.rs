#![allow(dead_code)]

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::sync::Arc;

use lacam_core::metrics::cost_edge;
use lacam_core::{GridMap, Instance, Vertex};

pub fn instance(rows: &[&str], agents: &[((usize, usize), (usize, usize))]) -> Instance {
    let map = Arc::new(GridMap::from_rows(rows).unwrap());
    let s = agents.iter().map(|&((x, y), _)| map.vertex_at(x, y).unwrap()).collect();
    let g = agents.iter().map(|&(_, (x, y))| map.vertex_at(x, y).unwrap()).collect();
    Instance::new(map, s, g).unwrap()
}

/// Every collision-free joint move out of `from`.
pub fn joint_successors(map: &GridMap, from: &[Vertex]) -> Vec<Vec<Vertex>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(from.len());
    fn rec(map: &GridMap, from: &[Vertex], cur: &mut Vec<Vertex>, out: &mut Vec<Vec<Vertex>>) {
        let i = cur.len();
        if i == from.len() {
            out.push(cur.clone());
            return;
        }
        let here = from[i];
        for &w in map.neighbors(here).iter().chain(std::iter::once(&here)) {
            let clash = (0..i).any(|j| cur[j] == w || (cur[j] == here && from[j] == w));
            if !clash {
                cur.push(w);
                rec(map, from, cur, out);
                cur.pop();
            }
        }
    }
    rec(map, from, &mut cur, &mut out);
    out
}

/// Optimal sum-of-loss by Dijkstra over the joint configuration space.
pub fn brute_force_optimum(inst: &Instance) -> Option<u64> {
    let start: Vec<Vertex> = inst.starts().to_vec();
    let goal: Vec<Vertex> = inst.goals().to_vec();
    let mut best: HashMap<Vec<Vertex>, u64> = HashMap::new();
    let mut heap = BinaryHeap::new();
    best.insert(start.clone(), 0);
    heap.push(Reverse((0u64, start)));
    while let Some(Reverse((g, q))) = heap.pop() {
        if best.get(&q).is_some_and(|&b| b < g) {
            continue;
        }
        if q == goal {
            return Some(g);
        }
        for next in joint_successors(inst.map(), &q) {
            let ng = g + cost_edge(&q, &next, &goal);
            if best.get(&next).is_none_or(|&b| ng < b) {
                best.insert(next.clone(), ng);
                heap.push(Reverse((ng, next)));
            }
        }
    }
    None
}

/// Least loss of a path from `start` that ends parked at `goal`, by dynamic
/// programming over (vertex, time) against fixed paths, arriving by `horizon`.
///
/// A step costs one unless the agent rests on its goal.
pub fn time_expanded_loss(
    map: &GridMap,
    fixed: &[Vec<Vertex>],
    start: Vertex,
    goal: Vertex,
    horizon: u32,
) -> Option<u64> {
    let at = |p: &Vec<Vertex>, t: u32| p[(t as usize).min(p.len() - 1)];
    let occupied = |v: Vertex, t: u32| fixed.iter().any(|p| at(p, t) == v);
    let swaps = |from: Vertex, to: Vertex, t: u32| fixed.iter().any(|p| at(p, t) == to && at(p, t + 1) == from);
    let last_fixed = fixed.iter().map(|p| p.len() as u32).max().unwrap_or(0);
    let free_forever = |t: u32| (t..=last_fixed.max(t)).all(|s| !occupied(goal, s));
    if occupied(start, 0) {
        return None;
    }
    let mut best: Option<u64> = None;
    let mut layer: Vec<Option<u64>> = vec![None; map.num_vertices()];
    layer[start.index()] = Some(0);
    for t in 0..=horizon {
        if let Some(c) = layer[goal.index()] {
            if free_forever(t) {
                best = Some(best.map_or(c, |b| b.min(c)));
            }
        }
        let mut next = vec![None; map.num_vertices()];
        for v in map.vertices() {
            let Some(c) = layer[v.index()] else { continue };
            for &w in map.neighbors(v).iter().chain(std::iter::once(&v)) {
                if occupied(w, t + 1) || swaps(v, w, t) {
                    continue;
                }
                let c2 = c + u64::from(!(v == goal && w == goal));
                if next[w.index()].is_none_or(|o| c2 < o) {
                    next[w.index()] = Some(c2);
                }
            }
        }
        layer = next;
    }
    best
}
