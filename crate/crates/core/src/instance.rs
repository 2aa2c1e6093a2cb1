use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Deref, DerefMut};

use crate::dist::{DistTable, UNREACHABLE};
use crate::graph::{GridMap, Vertex};

/// Locations of all agents at one timestep.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Configuration(pub Vec<Vertex>);

impl Configuration {
    pub fn new(locations: Vec<Vertex>) -> Self {
        Configuration(locations)
    }

    /// True when two agents share a vertex.
    pub fn has_vertex_collision(&self, num_vertices: usize) -> bool {
        let mut seen = vec![false; num_vertices];
        for &v in &self.0 {
            if core::mem::replace(&mut seen[v.index()], true) {
                return true;
            }
        }
        false
    }
}

impl Deref for Configuration {
    type Target = [Vertex];
    fn deref(&self) -> &[Vertex] {
        &self.0
    }
}

impl DerefMut for Configuration {
    fn deref_mut(&mut self) -> &mut [Vertex] {
        &mut self.0
    }
}

impl From<Vec<Vertex>> for Configuration {
    fn from(v: Vec<Vertex>) -> Self {
        Configuration(v)
    }
}

/// A sequence of configurations from the starts to the goals.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Solution(pub Vec<Configuration>);

impl Solution {
    pub fn new(configs: Vec<Configuration>) -> Self {
        Solution(configs)
    }

    /// Location of `agent` at time `t`; agents stay at their last vertex after the end.
    pub fn location(&self, agent: usize, t: usize) -> Vertex {
        let last = self.0.len() - 1;
        self.0[t.min(last)][agent]
    }

    /// The path of one agent as a vertex sequence.
    pub fn path(&self, agent: usize) -> Vec<Vertex> {
        self.0.iter().map(|c| c[agent]).collect()
    }
}

impl Deref for Solution {
    type Target = [Configuration];
    fn deref(&self) -> &[Configuration] {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InstanceError {
    #[error("an instance needs at least one agent")]
    NoAgents,
    #[error("{starts} starts but {goals} goals")]
    LengthMismatch { starts: usize, goals: usize },
    #[error("agent {agent} refers to a vertex outside the map")]
    InvalidVertex { agent: usize },
    #[error("agents {first} and {second} share a start vertex")]
    DuplicateStart { first: usize, second: usize },
    #[error("agents {first} and {second} share a goal vertex")]
    DuplicateGoal { first: usize, second: usize },
    #[error("goal of agent {agent} is unreachable from its start")]
    Unsolvable { agent: usize },
}

/// A MAPF problem: map, starts, goals and the goal-distance tables.
#[derive(Clone)]
pub struct Instance {
    map: Arc<GridMap>,
    starts: Configuration,
    goals: Configuration,
    dist: Arc<DistTable>,
}

impl core::fmt::Debug for Instance {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("Instance")
            .field("map", &self.map)
            .field("agents", &self.num_agents())
            .finish()
    }
}

fn find_duplicate(locations: &[Vertex], num_vertices: usize) -> Option<(usize, usize)> {
    let mut owner = vec![usize::MAX; num_vertices];
    for (i, v) in locations.iter().enumerate() {
        let slot = &mut owner[v.index()];
        if *slot != usize::MAX {
            return Some((*slot, i));
        }
        *slot = i;
    }
    None
}

impl Instance {
    pub fn new(
        map: Arc<GridMap>,
        starts: Vec<Vertex>,
        goals: Vec<Vertex>,
    ) -> Result<Self, InstanceError> {
        Self::check(&map, &starts, &goals)?;
        let dist = Arc::new(DistTable::new(map.clone(), goals.clone()));
        Ok(Instance {
            map,
            starts: Configuration(starts),
            goals: Configuration(goals),
            dist,
        })
    }

    fn check(map: &GridMap, starts: &[Vertex], goals: &[Vertex]) -> Result<(), InstanceError> {
        if starts.is_empty() {
            return Err(InstanceError::NoAgents);
        }
        if starts.len() != goals.len() {
            return Err(InstanceError::LengthMismatch {
                starts: starts.len(),
                goals: goals.len(),
            });
        }
        for (agent, (&s, &g)) in starts.iter().zip(goals).enumerate() {
            if !map.is_vertex(s) || !map.is_vertex(g) {
                return Err(InstanceError::InvalidVertex { agent });
            }
        }
        if let Some((first, second)) = find_duplicate(starts, map.num_vertices()) {
            return Err(InstanceError::DuplicateStart { first, second });
        }
        if let Some((first, second)) = find_duplicate(goals, map.num_vertices()) {
            return Err(InstanceError::DuplicateGoal { first, second });
        }
        for (agent, (&s, &g)) in starts.iter().zip(goals).enumerate() {
            if !map.same_component(s, g) {
                return Err(InstanceError::Unsolvable { agent });
            }
        }
        Ok(())
    }

    /// Same map and goals with different starts; the distance tables are shared.
    pub fn with_starts(&self, starts: Vec<Vertex>) -> Result<Self, InstanceError> {
        Self::check(&self.map, &starts, &self.goals)?;
        Ok(Instance {
            map: self.map.clone(),
            starts: Configuration(starts),
            goals: self.goals.clone(),
            dist: self.dist.clone(),
        })
    }

    pub fn map(&self) -> &GridMap {
        &self.map
    }

    pub fn map_arc(&self) -> &Arc<GridMap> {
        &self.map
    }

    pub fn starts(&self) -> &Configuration {
        &self.starts
    }

    pub fn goals(&self) -> &Configuration {
        &self.goals
    }

    pub fn dist(&self) -> &DistTable {
        &self.dist
    }

    pub fn num_agents(&self) -> usize {
        self.starts.len()
    }

    /// Sum over agents of the distance from `config[i]` to goal `i`.
    ///
    /// Admissible for sum-of-loss. Saturates if some location cannot reach its goal.
    pub fn heuristic(&self, config: &[Vertex]) -> u64 {
        let mut h = 0u64;
        for (i, &v) in config.iter().enumerate() {
            let d = self.dist.raw(i, v);
            if d == UNREACHABLE {
                return u64::MAX;
            }
            h += d as u64;
        }
        h
    }

    /// Sum of shortest-path lengths from starts to goals.
    ///
    /// Construction rejects unreachable goals, so this is always finite.
    pub fn lower_bound(&self) -> u64 {
        self.heuristic(&self.starts)
    }
}
