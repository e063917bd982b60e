//! Grid-based building evacuation simulator: a cellular automaton for smoke
//! and fire coupled with deliberating pedestrian agents.

pub mod agent;
pub mod behavior;
pub mod error;
pub mod grid;
pub mod hazard;
pub mod invariants;
pub mod movement;
pub mod pathfield;
pub mod perception;
pub mod render;
pub mod report;
pub mod rng;
pub mod scenario;
pub mod sim;
pub mod stats;

pub use error::{EvacError, Result};

/// Simulated seconds per tick: the time to walk one 0.4 m cell.
pub const TICK_SECONDS: f64 = 0.3;
