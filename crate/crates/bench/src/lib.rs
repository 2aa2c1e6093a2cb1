//! Benchmark front end for the `lacam-core` solver: file formats, presets,
//! refiner threads and timed runs.

pub mod config;
pub mod exec;
pub mod io;
pub mod refinery;
pub mod runner;

pub use config::{Preset, RunConfig};
pub use runner::{run, AnytimeRecord, RunReport, Summary};
