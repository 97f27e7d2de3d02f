//! Baseline interpolation-based tracing over raw particles.
//!
//! A new particle inserted at step τ advances one time step at a time: find
//! its K nearest existing particles at the current step, weight them by
//! inverse distance, and apply the weighted average of their displacements
//! into the next step. The neighbor set is re-searched from the traced
//! point's current position at every step. Backward tracing mirrors the
//! displacement into the previous step.

use crate::flowdata::PathlineSet;
use crate::neighbors::{idw_weights, NeighborIndex};
use crate::tracer::{Direction, SeedTime, TraceSeed};
use crate::{Error, Result, Vec3};

/// Reconstructed positions for the steps a trace covered.
#[derive(Debug, Clone)]
pub struct TracedPathline {
    pub seed: TraceSeed,
    /// First dataset step this trace covers.
    pub start_step: usize,
    /// Positions for steps `start_step .. start_step + positions.len()`.
    pub positions: Vec<Vec3>,
    /// The seed's step index inside the dataset.
    pub seed_step: usize,
    /// Number of displacement-interpolation steps performed.
    pub steps_traced: usize,
}

impl TracedPathline {
    pub fn position_at_step(&self, step: usize) -> Option<Vec3> {
        step.checked_sub(self.start_step)
            .and_then(|i| self.positions.get(i))
            .copied()
    }

    pub fn last_step(&self) -> usize {
        self.start_step + self.positions.len() - 1
    }
}

/// Per-step neighbor indexes, built once and shared across seeds. The index
/// for a step covers every particle position at that step.
struct StepIndexCache<'a> {
    set: &'a PathlineSet,
    indexes: Vec<Option<NeighborIndex>>,
}

impl<'a> StepIndexCache<'a> {
    fn new(set: &'a PathlineSet) -> Self {
        StepIndexCache {
            set,
            indexes: (0..set.num_timesteps()).map(|_| None).collect(),
        }
    }

    fn at_step(&mut self, step: usize) -> Result<&NeighborIndex> {
        if self.indexes[step].is_none() {
            let points: Vec<(Vec3, usize)> = self
                .set
                .positions_at_step(step)
                .into_iter()
                .enumerate()
                .map(|(i, p)| (p, i))
                .collect();
            self.indexes[step] = Some(NeighborIndex::build(&points)?);
        }
        Ok(self.indexes[step].as_ref().unwrap())
    }
}

fn resolve_seed_step(set: &PathlineSet, seed: &TraceSeed) -> Result<usize> {
    let m = set.num_timesteps();
    match seed.tau {
        SeedTime::Step(s) => {
            if s >= m {
                let (lo, hi) = set.time_range();
                return Err(Error::SeedOutOfRange {
                    tau: s as f64,
                    lo,
                    hi,
                });
            }
            Ok(s)
        }
        SeedTime::Time(t) => {
            let (lo, hi) = set.time_range();
            if t < lo || t > hi {
                return Err(Error::SeedOutOfRange { tau: t, lo, hi });
            }
            set.step_of_time(t).ok_or(Error::SeedNotOnStep { tau: t })
        }
    }
}

/// Trace one seed through the particle data.
pub fn trace_particle(
    set: &PathlineSet,
    seed: &TraceSeed,
    neighbors: usize,
    power: f64,
) -> Result<TracedPathline> {
    let mut cache = StepIndexCache::new(set);
    trace_with_cache(set, &mut cache, seed, neighbors, power)
}

/// Trace many seeds, sharing the per-step neighbor indexes across them.
pub fn trace_particles(
    set: &PathlineSet,
    seeds: &[TraceSeed],
    neighbors: usize,
    power: f64,
) -> Result<Vec<TracedPathline>> {
    let mut cache = StepIndexCache::new(set);
    seeds
        .iter()
        .map(|seed| trace_with_cache(set, &mut cache, seed, neighbors, power))
        .collect()
}

fn trace_with_cache(
    set: &PathlineSet,
    cache: &mut StepIndexCache,
    seed: &TraceSeed,
    neighbors: usize,
    power: f64,
) -> Result<TracedPathline> {
    if !seed.rho.is_finite() {
        return Err(Error::InvalidNeighborQuery(
            "seed position must be finite".into(),
        ));
    }
    let seed_step = resolve_seed_step(set, seed)?;
    let m = set.num_timesteps();
    let mut steps_traced = 0usize;

    let mut forward = Vec::new();
    if matches!(seed.direction, Direction::Forward | Direction::Both) {
        let mut current = seed.rho;
        for tau in seed_step..m - 1 {
            let index = cache.at_step(tau)?;
            let weights = idw_weights(&index.knn(current, neighbors), power)?;
            let mut displacement = Vec3::ZERO;
            for (&owner, &w) in weights.owners.iter().zip(&weights.weights) {
                displacement += (set.position(owner, tau + 1) - set.position(owner, tau)) * w;
            }
            current += displacement;
            forward.push(current);
            steps_traced += 1;
        }
    }

    let mut backward = Vec::new();
    if matches!(seed.direction, Direction::Backward | Direction::Both) {
        let mut current = seed.rho;
        for tau in (1..=seed_step).rev() {
            let index = cache.at_step(tau)?;
            let weights = idw_weights(&index.knn(current, neighbors), power)?;
            let mut displacement = Vec3::ZERO;
            for (&owner, &w) in weights.owners.iter().zip(&weights.weights) {
                displacement += (set.position(owner, tau - 1) - set.position(owner, tau)) * w;
            }
            current += displacement;
            backward.push(current);
            steps_traced += 1;
        }
    }

    backward.reverse();
    let start_step = seed_step - backward.len();
    let mut positions = backward;
    positions.push(seed.rho);
    positions.extend(forward);

    Ok(TracedPathline {
        seed: *seed,
        start_step,
        positions,
        seed_step,
        steps_traced,
    })
}
