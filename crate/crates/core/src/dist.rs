use alloc::boxed::Box;
use alloc::sync::Arc;
use alloc::vec::Vec;

use once_cell::race::OnceBox;

use crate::graph::{GridMap, Vertex};

/// Sentinel stored for vertices that cannot reach the goal.
pub const UNREACHABLE: u32 = u32::MAX;

/// Per-agent hop distances to the agent's goal.
///
/// Each agent's table is filled by a BFS from its goal the first time it is
/// queried. Fills are race-safe: concurrent first queries may both run the
/// BFS, but exactly one result is published and kept.
pub struct DistTable {
    map: Arc<GridMap>,
    goals: Vec<Vertex>,
    tables: Vec<OnceBox<Vec<u32>>>,
}

impl DistTable {
    pub fn new(map: Arc<GridMap>, goals: Vec<Vertex>) -> Self {
        let tables = (0..goals.len()).map(|_| OnceBox::new()).collect();
        DistTable { map, goals, tables }
    }

    pub fn num_agents(&self) -> usize {
        self.goals.len()
    }

    pub fn goal(&self, agent: usize) -> Vertex {
        self.goals[agent]
    }

    #[inline]
    fn table(&self, agent: usize) -> &[u32] {
        self.tables[agent].get_or_init(|| Box::new(self.map.bfs_from(self.goals[agent])))
    }

    /// Distance from `v` to the goal of `agent`, or `None` if unreachable.
    #[inline]
    pub fn get(&self, agent: usize, v: Vertex) -> Option<u32> {
        match self.raw(agent, v) {
            UNREACHABLE => None,
            d => Some(d),
        }
    }

    /// Distance with [`UNREACHABLE`] as the sentinel. Hot-path accessor.
    #[inline]
    pub fn raw(&self, agent: usize, v: Vertex) -> u32 {
        self.table(agent)[v.index()]
    }

    /// Fills every agent's table up front.
    pub fn fill_all(&self) {
        for agent in 0..self.goals.len() {
            let _ = self.table(agent);
        }
    }

    /// True once the table for `agent` has been computed.
    pub fn is_filled(&self, agent: usize) -> bool {
        self.tables[agent].get().is_some()
    }
}
