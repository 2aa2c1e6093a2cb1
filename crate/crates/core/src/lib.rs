#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod deadline;
pub mod dist;
pub mod graph;
pub mod instance;
pub mod mc;
pub mod metrics;
pub mod pibt;
pub mod refine;
pub mod rng;
pub mod search;
pub mod suo;

pub use deadline::{Deadline, Unlimited};
pub use dist::DistTable;
pub use graph::{GridMap, MapError, Vertex};
pub use instance::{Configuration, Instance, InstanceError, Solution};
pub use metrics::{validate_solution, Violation, ViolationKind};
pub use search::{SearchHooks, SearchParams, SearchState, SearchStatus, Source};
