//! Analytic flow fields and ground-truth pathline generation.
//!
//! Three synthetic fields with known behavior: the unsteady double gyre
//! (curved, feature-rich 2D trajectories embedded at z = 0), the steady ABC
//! flow (fully 3D), and uniform translation (exact affine ground truth).
//! Trajectories are integrated with classical fixed-step RK4.

use crate::flowdata::PathlineSet;
use crate::{Aabb, Error, Result, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FlowKind {
    DoubleGyre,
    AbcFlow,
    UniformTranslation,
}

/// Description of a synthetic flow experiment: which field, its named
/// parameters, the seeding/clamping domain, and the physical time span.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowFieldSpec {
    pub kind: FlowKind,
    pub parameters: BTreeMap<String, f64>,
    pub domain: Aabb,
    pub time_span: (f64, f64),
}

impl FlowFieldSpec {
    /// Double gyre with the usual textbook parameters: A = 0.1, eps = 0.25,
    /// omega = 2π/10 on [0, 2] x [0, 1], one forcing period.
    pub fn double_gyre_default() -> Self {
        Self::double_gyre(0.1, 0.25, TAU / 10.0, (0.0, 10.0))
    }

    pub fn double_gyre(a: f64, eps: f64, omega: f64, time_span: (f64, f64)) -> Self {
        let mut parameters = BTreeMap::new();
        parameters.insert("a".into(), a);
        parameters.insert("eps".into(), eps);
        parameters.insert("omega".into(), omega);
        FlowFieldSpec {
            kind: FlowKind::DoubleGyre,
            parameters,
            domain: Aabb::new(Vec3::ZERO, Vec3::new(2.0, 1.0, 0.0)),
            time_span,
        }
    }

    /// ABC flow with the classic A = √3, B = √2, C = 1 on [0, 2π]³.
    pub fn abc_flow_default() -> Self {
        let mut parameters = BTreeMap::new();
        parameters.insert("a".into(), 3.0_f64.sqrt());
        parameters.insert("b".into(), 2.0_f64.sqrt());
        parameters.insert("c".into(), 1.0);
        FlowFieldSpec {
            kind: FlowKind::AbcFlow,
            parameters,
            domain: Aabb::new(Vec3::ZERO, Vec3::new(TAU, TAU, TAU)),
            time_span: (0.0, 1.0),
        }
    }

    pub fn uniform_translation(v: Vec3) -> Self {
        let mut parameters = BTreeMap::new();
        parameters.insert("vx".into(), v.x);
        parameters.insert("vy".into(), v.y);
        parameters.insert("vz".into(), v.z);
        FlowFieldSpec {
            kind: FlowKind::UniformTranslation,
            parameters,
            domain: Aabb::new(Vec3::ZERO, Vec3::new(1.0, 1.0, 1.0)),
            time_span: (0.0, 1.0),
        }
    }

    fn param(&self, name: &str) -> Result<f64> {
        self.parameters.get(name).copied().ok_or_else(|| {
            Error::InvalidFlowSpec(format!("missing parameter '{name}' for {:?}", self.kind))
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.time_span.1 > self.time_span.0) {
            return Err(Error::InvalidFlowSpec("degenerate time span".into()));
        }
        if self.domain.min.x > self.domain.max.x
            || self.domain.min.y > self.domain.max.y
            || self.domain.min.z > self.domain.max.z
        {
            return Err(Error::InvalidFlowSpec("empty domain box".into()));
        }
        let required: &[&str] = match self.kind {
            FlowKind::DoubleGyre => &["a", "eps", "omega"],
            FlowKind::AbcFlow => &["a", "b", "c"],
            FlowKind::UniformTranslation => &["vx", "vy", "vz"],
        };
        for name in required {
            self.param(name)?;
        }
        Ok(())
    }

    /// Velocity of the field at position `p`, time `t`.
    pub fn velocity(&self, p: Vec3, t: f64) -> Vec3 {
        match self.kind {
            FlowKind::DoubleGyre => {
                let a = self.parameters["a"];
                let eps = self.parameters["eps"];
                let omega = self.parameters["omega"];
                let forcing = eps * (omega * t).sin();
                let f = forcing * p.x * p.x + (1.0 - 2.0 * forcing) * p.x;
                let dfdx = 2.0 * forcing * p.x + (1.0 - 2.0 * forcing);
                Vec3::new(
                    -PI * a * (PI * f).sin() * (PI * p.y).cos(),
                    PI * a * (PI * f).cos() * (PI * p.y).sin() * dfdx,
                    0.0,
                )
            }
            FlowKind::AbcFlow => {
                let a = self.parameters["a"];
                let b = self.parameters["b"];
                let c = self.parameters["c"];
                Vec3::new(
                    a * p.z.sin() + c * p.y.cos(),
                    b * p.x.sin() + a * p.z.cos(),
                    c * p.y.sin() + b * p.x.cos(),
                )
            }
            FlowKind::UniformTranslation => Vec3::new(
                self.parameters["vx"],
                self.parameters["vy"],
                self.parameters["vz"],
            ),
        }
    }
}

/// Integrate pathlines through the field with fixed-step RK4.
///
/// Seeds are drawn uniformly from the domain; `substeps` RK4 steps are taken
/// per output interval. A trajectory leaving the domain is clamped to the
/// boundary and its pathline is flagged on the returned set. Deterministic
/// for a fixed `seed`, independent of thread count.
pub fn generate_pathlines(
    spec: &FlowFieldSpec,
    num_pathlines: usize,
    num_timesteps: usize,
    substeps: usize,
    seed: u64,
) -> Result<PathlineSet> {
    spec.validate()?;
    if num_pathlines < 1 {
        return Err(Error::InvalidFlowSpec("need at least 1 pathline".into()));
    }
    if num_timesteps < 2 {
        return Err(Error::InvalidFlowSpec(format!(
            "need at least 2 time steps, got {num_timesteps}"
        )));
    }
    if substeps < 1 {
        return Err(Error::InvalidFlowSpec("substeps must be >= 1".into()));
    }

    // Seeds come from the RNG sequentially so thread scheduling cannot
    // change them.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let seeds: Vec<Vec3> = (0..num_pathlines)
        .map(|_| sample_in_box(&mut rng, &spec.domain))
        .collect();

    let (t0, t1) = spec.time_span;
    let times: Vec<f64> = (0..num_timesteps)
        .map(|j| t0 + (t1 - t0) * j as f64 / (num_timesteps - 1) as f64)
        .collect();

    let trajectories: Vec<(Vec<Vec3>, bool)> = seeds
        .into_par_iter()
        .enumerate()
        .map(|(i, start)| integrate_pathline(spec, start, &times, substeps, i))
        .collect::<Result<_>>()?;

    let mut positions = Vec::with_capacity(num_pathlines * num_timesteps);
    let mut clamped = Vec::new();
    for (i, (traj, was_clamped)) in trajectories.into_iter().enumerate() {
        positions.extend(traj);
        if was_clamped {
            clamped.push(i);
        }
    }
    if !clamped.is_empty() {
        log::info!(
            "{} of {num_pathlines} pathlines left the domain and were clamped",
            clamped.len()
        );
    }
    PathlineSet::with_clamped(positions, num_pathlines, num_timesteps, times, clamped)
}

fn sample_in_box(rng: &mut ChaCha8Rng, b: &Aabb) -> Vec3 {
    let mut coord = |lo: f64, hi: f64| {
        if hi > lo {
            rng.random_range(lo..hi)
        } else {
            lo
        }
    };
    let x = coord(b.min.x, b.max.x);
    let y = coord(b.min.y, b.max.y);
    let z = coord(b.min.z, b.max.z);
    Vec3::new(x, y, z)
}

fn integrate_pathline(
    spec: &FlowFieldSpec,
    start: Vec3,
    times: &[f64],
    substeps: usize,
    pathline: usize,
) -> Result<(Vec<Vec3>, bool)> {
    let mut p = start;
    let mut clamped = false;
    let mut out = Vec::with_capacity(times.len());
    out.push(p);
    for j in 1..times.len() {
        let h = (times[j] - times[j - 1]) / substeps as f64;
        let mut t = times[j - 1];
        for _ in 0..substeps {
            p = rk4_step(spec, p, t, h);
            if !p.is_finite() {
                return Err(Error::NonFiniteVelocity { pathline, step: j });
            }
            if !spec.domain.contains(p) {
                p = spec.domain.clamp(p);
                clamped = true;
            }
            t += h;
        }
        out.push(p);
    }
    Ok((out, clamped))
}

fn rk4_step(spec: &FlowFieldSpec, p: Vec3, t: f64, h: f64) -> Vec3 {
    let k1 = spec.velocity(p, t);
    let k2 = spec.velocity(p + k1 * (h / 2.0), t + h / 2.0);
    let k3 = spec.velocity(p + k2 * (h / 2.0), t + h / 2.0);
    let k4 = spec.velocity(p + k3 * h, t + h);
    p + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
}
