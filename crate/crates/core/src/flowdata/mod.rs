//! Trajectory datasets: the in-memory pathline store, synthetic flow-field
//! generation, and CSV/PLN1 file formats.

pub mod flow;
pub mod io;

pub use flow::{generate_pathlines, FlowFieldSpec, FlowKind};
pub use io::{read_pathlines, write_pathlines, FileFormat};

use crate::{Aabb, Error, Result, Vec3};

/// A rectangular set of particle trajectories: `num_pathlines` particles
/// tracked over `num_timesteps` steps. Positions are stored pathline-major
/// so one particle's whole trajectory is contiguous in memory. Immutable
/// after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct PathlineSet {
    num_pathlines: usize,
    num_timesteps: usize,
    /// `num_pathlines * num_timesteps` entries, pathline-major.
    positions: Vec<Vec3>,
    /// Physical time of each step, strictly increasing. Defaults to the
    /// step index when the source carries no time axis.
    times: Vec<f64>,
    bounds: Aabb,
    /// Pathlines that left the generation domain and were clamped to its
    /// boundary. Empty for datasets read from files.
    clamped: Vec<usize>,
}

impl PathlineSet {
    pub fn new(
        positions: Vec<Vec3>,
        num_pathlines: usize,
        num_timesteps: usize,
        times: Vec<f64>,
    ) -> Result<Self> {
        Self::with_clamped(positions, num_pathlines, num_timesteps, times, Vec::new())
    }

    pub(crate) fn with_clamped(
        positions: Vec<Vec3>,
        num_pathlines: usize,
        num_timesteps: usize,
        times: Vec<f64>,
        clamped: Vec<usize>,
    ) -> Result<Self> {
        if num_pathlines < 1 {
            return Err(Error::InvalidPathlineSet("need at least 1 pathline".into()));
        }
        if num_timesteps < 2 {
            return Err(Error::InvalidPathlineSet(format!(
                "need at least 2 time steps, got {num_timesteps}"
            )));
        }
        if positions.len() != num_pathlines * num_timesteps {
            return Err(Error::InvalidPathlineSet(format!(
                "{} positions for {num_pathlines} pathlines x {num_timesteps} steps",
                positions.len()
            )));
        }
        if times.len() != num_timesteps {
            return Err(Error::InvalidPathlineSet(format!(
                "{} time entries for {num_timesteps} steps",
                times.len()
            )));
        }
        if times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidPathlineSet(
                "step times must be strictly increasing".into(),
            ));
        }
        for (idx, p) in positions.iter().enumerate() {
            if !p.is_finite() {
                return Err(Error::NonFinitePosition {
                    pathline: idx / num_timesteps,
                    step: idx % num_timesteps,
                });
            }
        }
        let bounds = Aabb::from_points(positions.iter().copied());
        Ok(PathlineSet {
            num_pathlines,
            num_timesteps,
            positions,
            times,
            bounds,
            clamped,
        })
    }

    /// Identity time axis: the physical time of step `j` is `j`.
    pub fn identity_times(num_timesteps: usize) -> Vec<f64> {
        (0..num_timesteps).map(|j| j as f64).collect()
    }

    pub fn num_pathlines(&self) -> usize {
        self.num_pathlines
    }

    pub fn num_timesteps(&self) -> usize {
        self.num_timesteps
    }

    pub fn bounds(&self) -> Aabb {
        self.bounds
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn time_range(&self) -> (f64, f64) {
        (self.times[0], self.times[self.num_timesteps - 1])
    }

    /// Pathlines clamped to the domain boundary during generation.
    pub fn clamped_pathlines(&self) -> &[usize] {
        &self.clamped
    }

    /// Full trajectory of pathline `i`.
    pub fn pathline(&self, i: usize) -> &[Vec3] {
        &self.positions[i * self.num_timesteps..(i + 1) * self.num_timesteps]
    }

    pub fn position(&self, pathline: usize, step: usize) -> Vec3 {
        self.positions[pathline * self.num_timesteps + step]
    }

    pub fn positions_flat(&self) -> &[Vec3] {
        &self.positions
    }

    /// Gather every particle's position at one time step ("load all
    /// particles of the step"); the step-major access pattern used while
    /// tracing.
    pub fn positions_at_step(&self, step: usize) -> Vec<Vec3> {
        (0..self.num_pathlines)
            .map(|i| self.position(i, step))
            .collect()
    }

    /// Resolve a physical time to its step index, if it coincides with one.
    pub fn step_of_time(&self, tau: f64) -> Option<usize> {
        let (lo, hi) = self.time_range();
        let tol = 1e-9 * (hi - lo).max(1.0);
        let j = self.times.partition_point(|&t| t < tau - tol);
        (j < self.num_timesteps && (self.times[j] - tau).abs() <= tol).then_some(j)
    }

    /// New set containing only the pathlines at `keep` indices.
    pub fn subset(&self, keep: &[usize]) -> Result<PathlineSet> {
        let mut positions = Vec::with_capacity(keep.len() * self.num_timesteps);
        for &i in keep {
            positions.extend_from_slice(self.pathline(i));
        }
        let clamped = self
            .clamped
            .iter()
            .filter_map(|c| keep.iter().position(|&k| k == *c))
            .collect();
        PathlineSet::with_clamped(
            positions,
            keep.len(),
            self.num_timesteps,
            self.times.clone(),
            clamped,
        )
    }
}
