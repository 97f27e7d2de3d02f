//! Pathline tracing: the particle-space baseline and the control-point
//! tracer over fitted B-splines.

pub mod particle;
pub mod spline;

pub use particle::{trace_particle, trace_particles, TracedPathline};
pub use spline::{anchor_index, sample_traced, trace_spline, trace_splines, TracedSpline};

use serde::{Deserialize, Serialize};

/// Tracing direction relative to the seed time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Forward,
    Backward,
    Both,
}

/// When a trace starts: at a concrete step index or at a physical time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SeedTime {
    Step(usize),
    Time(f64),
}

/// A tracing start point: where a new particle is inserted, and when.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceSeed {
    pub tau: SeedTime,
    pub rho: crate::Vec3,
    pub direction: Direction,
}

impl TraceSeed {
    pub fn at_step(step: usize, rho: crate::Vec3, direction: Direction) -> Self {
        TraceSeed {
            tau: SeedTime::Step(step),
            rho,
            direction,
        }
    }

    pub fn at_time(time: f64, rho: crate::Vec3, direction: Direction) -> Self {
        TraceSeed {
            tau: SeedTime::Time(time),
            rho,
            direction,
        }
    }
}
