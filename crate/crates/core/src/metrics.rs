//! Configuration semantics, cost metrics and solution validation.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use hashbrown::HashMap;

use crate::graph::{GridMap, Vertex};
use crate::instance::{Configuration, Instance, Solution};

fn vertex_collision(config: &[Vertex]) -> Option<(usize, usize)> {
    let mut owner: HashMap<Vertex, usize> = HashMap::with_capacity(config.len());
    for (i, &v) in config.iter().enumerate() {
        if let Some(&j) = owner.get(&v) {
            return Some((j, i));
        }
        owner.insert(v, i);
    }
    None
}

fn edge_collision(from: &[Vertex], to: &[Vertex]) -> Option<(usize, usize)> {
    let owner: HashMap<Vertex, usize> = from.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    for (i, &v) in to.iter().enumerate() {
        if let Some(&j) = owner.get(&v) {
            if j != i && to[j] == from[i] {
                return Some((i.min(j), i.max(j)));
            }
        }
    }
    None
}

fn bad_move(map: &GridMap, from: &[Vertex], to: &[Vertex]) -> Option<usize> {
    from.iter()
        .zip(to)
        .position(|(&u, &v)| u != v && !map.is_adjacent(u, v))
}

/// True iff `to` is reachable from `from` in one collision-free step.
///
/// Panics if the configurations have different lengths.
pub fn connected(from: &[Vertex], to: &[Vertex], map: &GridMap) -> bool {
    assert_eq!(from.len(), to.len(), "configurations differ in length");
    bad_move(map, from, to).is_none()
        && vertex_collision(from).is_none()
        && vertex_collision(to).is_none()
        && edge_collision(from, to).is_none()
}

/// Number of agents that are not resting at their goal during the step.
#[inline]
pub fn cost_edge(from: &[Vertex], to: &[Vertex], goals: &[Vertex]) -> u64 {
    debug_assert_eq!(from.len(), to.len());
    from.iter()
        .zip(to)
        .zip(goals)
        .filter(|((x, y), g)| !(x == g && y == g))
        .count() as u64
}

pub fn sum_of_loss(solution: &[Configuration], goals: &[Vertex]) -> u64 {
    solution
        .windows(2)
        .map(|w| cost_edge(&w[0], &w[1], goals))
        .sum()
}

/// Sum over agents of the earliest timestep after which the agent never leaves its goal.
///
/// Panics if the solution does not end at the goals.
pub fn flowtime(solution: &[Configuration], goals: &[Vertex]) -> u64 {
    let last = solution.last().expect("empty solution");
    assert!(&last[..] == goals, "solution does not end at the goals");
    let mut total = 0u64;
    for (i, &g) in goals.iter().enumerate() {
        let settled = solution
            .iter()
            .rposition(|c| c[i] != g)
            .map_or(0, |t| t + 1);
        total += settled as u64;
    }
    total
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    Empty,
    WrongLength,
    InvalidVertex,
    StartMismatch,
    GoalMismatch,
    VertexCollision,
    EdgeCollision,
    NonAdjacentMove,
}

/// First defect found in a candidate solution.
///
/// `timestep` is the index of the offending configuration; a bad transition
/// `Q_t -> Q_{t+1}` is reported at `t + 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub timestep: usize,
    pub agents: Vec<usize>,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} at t={} (agents {:?})", self.kind, self.timestep, self.agents)
    }
}

impl core::error::Error for Violation {}

fn violation(kind: ViolationKind, timestep: usize, agents: Vec<usize>) -> Result<(), Violation> {
    Err(Violation {
        kind,
        timestep,
        agents,
    })
}

fn mismatches(a: &[Vertex], b: &[Vertex]) -> Vec<usize> {
    a.iter()
        .zip(b)
        .enumerate()
        .filter(|(_, (x, y))| x != y)
        .map(|(i, _)| i)
        .collect()
}

pub fn validate_solution(inst: &Instance, solution: &[Configuration]) -> Result<(), Violation> {
    let n = inst.num_agents();
    let map = inst.map();
    if solution.is_empty() {
        return violation(ViolationKind::Empty, 0, vec![]);
    }
    for (t, config) in solution.iter().enumerate() {
        if config.len() != n {
            return violation(ViolationKind::WrongLength, t, vec![]);
        }
        if let Some(i) = config.iter().position(|&v| !map.is_vertex(v)) {
            return violation(ViolationKind::InvalidVertex, t, vec![i]);
        }
        if t == 0 && config != inst.starts() {
            return violation(ViolationKind::StartMismatch, 0, mismatches(config, inst.starts()));
        }
        if let Some((i, j)) = vertex_collision(config) {
            return violation(ViolationKind::VertexCollision, t, vec![i, j]);
        }
        if t > 0 {
            let prev = &solution[t - 1];
            if let Some(i) = bad_move(map, prev, config) {
                return violation(ViolationKind::NonAdjacentMove, t, vec![i]);
            }
            if let Some((i, j)) = edge_collision(prev, config) {
                return violation(ViolationKind::EdgeCollision, t, vec![i, j]);
            }
        }
    }
    let last = solution.len() - 1;
    if solution[last] != *inst.goals() {
        return violation(
            ViolationKind::GoalMismatch,
            last,
            mismatches(&solution[last], inst.goals()),
        );
    }
    Ok(())
}

impl Solution {
    pub fn sum_of_loss(&self, goals: &[Vertex]) -> u64 {
        sum_of_loss(self, goals)
    }

    pub fn flowtime(&self, goals: &[Vertex]) -> u64 {
        flowtime(self, goals)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::sync::Arc;

    fn grid(rows: &[&str]) -> Arc<GridMap> {
        Arc::new(GridMap::from_rows(rows).unwrap())
    }

    fn at(map: &GridMap, cells: &[(usize, usize)]) -> Configuration {
        Configuration(cells.iter().map(|&(x, y)| map.vertex_at(x, y).unwrap()).collect())
    }

    #[test]
    fn waiting_is_connected() {
        let m = grid(&["...", "..."]);
        let x = at(&m, &[(0, 0), (2, 1)]);
        assert!(connected(&x, &x, &m));
    }

    #[test]
    fn swap_is_not_connected() {
        let m = grid(&[".."]);
        let x = at(&m, &[(0, 0), (1, 0)]);
        let y = at(&m, &[(1, 0), (0, 0)]);
        assert!(!connected(&x, &y, &m));
    }

    #[test]
    fn same_target_is_not_connected() {
        let m = grid(&["..."]);
        let x = at(&m, &[(0, 0), (2, 0)]);
        let y = at(&m, &[(1, 0), (1, 0)]);
        assert!(!connected(&x, &y, &m));
    }

    #[test]
    fn following_is_connected() {
        let m = grid(&["..."]);
        let x = at(&m, &[(0, 0), (1, 0)]);
        let y = at(&m, &[(1, 0), (2, 0)]);
        assert!(connected(&x, &y, &m));
        assert!(connected(&y, &x, &m));
    }

    #[test]
    fn cost_edge_examples() {
        let m = grid(&["...."]);
        let goals = at(&m, &[(0, 0), (3, 0)]);
        assert_eq!(cost_edge(&goals, &goals, &goals), 0);
        let off = at(&m, &[(0, 0), (2, 0)]);
        assert_eq!(cost_edge(&off, &off, &goals), 1);
        let none = at(&m, &[(1, 0), (2, 0)]);
        assert_eq!(cost_edge(&none, &none, &goals), 2);
    }

    #[test]
    fn flowtime_counts_last_arrival() {
        let m = grid(&["...."]);
        let g = m.vertex_at(1, 0).unwrap();
        let o = m.vertex_at(2, 0).unwrap();
        // reach goal at t=3, leave at t=4, back for good at t=6
        let seq = [o, o, o, g, o, o, g, g];
        let sol: Vec<_> = seq.iter().map(|&v| Configuration(vec![v])).collect();
        assert_eq!(flowtime(&sol, &[g]), 6);
        assert_eq!(flowtime(&sol[6..], &[g]), 0);
    }

    #[test]
    fn single_configuration_metrics() {
        let m = grid(&["..."]);
        let c = at(&m, &[(0, 0)]);
        let sol = [c.clone()];
        assert_eq!(sum_of_loss(&sol, &c), 0);
        assert_eq!(flowtime(&sol, &c), 0);
    }

    #[test]
    fn validation_reports_edge_collision_and_goal_mismatch() {
        let m = grid(&["....", "@.@@"]);
        let inst = Instance::new(
            m.clone(),
            at(&m, &[(0, 0), (3, 0)]).0,
            at(&m, &[(3, 0), (1, 1)]).0,
        )
        .unwrap();
        let ok = vec![
            at(&m, &[(0, 0), (3, 0)]),
            at(&m, &[(1, 0), (2, 0)]),
        ];
        // second agent ducks into the pocket; first then proceeds
        let mut valid = vec![
            at(&m, &[(0, 0), (3, 0)]),
            at(&m, &[(0, 0), (2, 0)]),
            at(&m, &[(0, 0), (1, 0)]),
            at(&m, &[(0, 0), (1, 1)]),
            at(&m, &[(1, 0), (1, 1)]),
            at(&m, &[(2, 0), (1, 1)]),
            at(&m, &[(3, 0), (1, 1)]),
        ];
        assert_eq!(validate_solution(&inst, &valid), Ok(()));
        assert_eq!(
            validate_solution(&inst, &ok).unwrap_err().kind,
            ViolationKind::GoalMismatch
        );
        let swap = vec![
            at(&m, &[(0, 0), (3, 0)]),
            at(&m, &[(1, 0), (2, 0)]),
            at(&m, &[(2, 0), (1, 0)]),
        ];
        assert_eq!(
            validate_solution(&inst, &swap).unwrap_err(),
            Violation {
                kind: ViolationKind::EdgeCollision,
                timestep: 2,
                agents: vec![0, 1]
            }
        );
        valid.pop();
        let err = validate_solution(&inst, &valid).unwrap_err();
        assert_eq!(err.kind, ViolationKind::GoalMismatch);
        assert_eq!(err.timestep, valid.len() - 1);
        assert_eq!(err.agents, vec![0]);
    }
}
