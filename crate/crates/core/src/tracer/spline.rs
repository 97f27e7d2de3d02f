//! Control-point tracing: reconstruct a new pathline's B-spline directly
//! from the knots and control points of neighboring fitted curves.
//!
//! The walk advances one knot/control-point pair per iteration instead of
//! one time step, which is the whole point: the number of interpolation
//! iterations equals the number of reconstructed control points, not the
//! number of time steps.
//!
//! Reconstruction rules (3D curves, h = ⌊k/2⌋):
//!
//! ```text
//! seed:      t_r = Σ w_i t_{i,d_i}
//!            P_r = Σ w_i (P_{i,d_i-h} - C_i(u)) + ρ
//! forward:   t_{r+1} = Σ w_i (t_{i,d_i+1} - t_{i,d_i}) + t_r
//!            P_{r+1} = Σ w_i (P_{i,d_i+1-h} - P_{i,d_i-h}) + P_r
//! ```
//!
//! Seed weights come from distances to the synchronized curve points
//! `C_i(u)`; iteration weights are re-computed every step from the current
//! reconstructed control point against each curve's current frontier
//! control point. Every curve's frontier index `d_i` advances once per
//! iteration and freezes at its range boundary, contributing zero increment
//! afterwards (its weight still participates in the normalization).
//! Backward tracing mirrors the increments with decreasing indices.

use crate::bspline::{SplineCurve, SplineSet};
use crate::neighbors::{idw_weights, NeighborIndex};
use crate::tracer::{Direction, SeedTime, TraceSeed};
use crate::{Error, Result, Vec3};

/// Monotone projection step for reconstructed knots, in parameter units.
const EPS_KNOT: f64 = 1e-9;

/// The reconstructed curve for an inserted pathline.
///
/// The knot vector is padded at both ends (duplicates of the boundary
/// knots) so that the spline's evaluable domain spans the full reconstructed
/// knot range; when tracing covers [0, 1] the result is a fully clamped
/// curve. Unlike fitted curves the interior need not start at 0 or end at 1
/// for single-direction traces.
#[derive(Debug, Clone)]
pub struct TracedSpline {
    pub order: usize,
    pub knots: Vec<f64>,
    pub control_points: Vec<Vec3>,
    pub seed: TraceSeed,
    /// Physical time range of the source dataset; maps parameters to times.
    pub time_range: (f64, f64),
    /// Number of weight-interpolation iterations performed (seed included).
    pub interp_iterations: usize,
    /// Knot monotonicity repairs applied; 0 on smooth data.
    pub knot_repairs: usize,
}

impl TracedSpline {
    pub fn num_control_points(&self) -> usize {
        self.control_points.len()
    }

    /// Covered parameter range (equals the evaluable domain).
    pub fn param_range(&self) -> (f64, f64) {
        (self.knots[0], *self.knots.last().unwrap())
    }

    /// Evaluate at a parameter inside the covered range.
    pub fn evaluate(&self, u: f64) -> Result<Vec3> {
        let (lo, hi) = self.param_range();
        if u < lo - 1e-12 || u > hi + 1e-12 {
            return Err(Error::ParamOutOfRange { u });
        }
        let n = self.control_points.len();
        if n < self.order {
            // Degenerate trace (seed at a range boundary, one direction):
            // all reconstructed control points coincide.
            return Ok(self.control_points[0]);
        }
        let flat: Vec<f64> = self
            .control_points
            .iter()
            .flat_map(|p| p.to_array())
            .collect();
        let p = crate::bspline::de_boor_point(&self.knots, &flat, 3, self.order, u.clamp(lo, hi));
        Ok(Vec3::new(p[0], p[1], p[2]))
    }

    /// Parameter of a physical time.
    pub fn param_of_time(&self, time: f64) -> f64 {
        (time - self.time_range.0) / (self.time_range.1 - self.time_range.0)
    }

    /// Evaluate at the dataset step times that fall inside the covered
    /// range; emits `(step, position)` pairs.
    pub fn sample_at_steps(&self, times: &[f64]) -> Vec<(usize, Vec3)> {
        let (lo, hi) = self.param_range();
        times
            .iter()
            .enumerate()
            .filter_map(|(j, &time)| {
                let u = self.param_of_time(time);
                (u >= lo - 1e-12 && u <= hi + 1e-12)
                    .then(|| (j, self.evaluate(u.clamp(lo, hi)).unwrap()))
            })
            .collect()
    }
}

/// Uniformly sample the covered range of a traced spline; emits
/// `(time, position)` pairs. `num_samples = 2` yields the range endpoints.
pub fn sample_traced(traced: &TracedSpline, num_samples: usize) -> Vec<(f64, Vec3)> {
    let (lo, hi) = traced.param_range();
    let count = num_samples.max(1);
    (0..count)
        .map(|j| {
            let u = if count == 1 {
                lo
            } else {
                lo + (hi - lo) * j as f64 / (count - 1) as f64
            };
            let time = traced.time_range.0 + u * (traced.time_range.1 - traced.time_range.0);
            (time, traced.evaluate(u).unwrap())
        })
        .collect()
}

/// Minimal knot index `d` in `[⌊k/2⌋, n+k-1-⌈k/2⌉]` with `t_d >= u`; the
/// boundary parameters map to the range ends. This index anchors a curve's
/// tracing frontier: knot `t_d` pairs with control point `P_{d-⌊k/2⌋}`.
pub fn anchor_index(curve: &SplineCurve, u: f64) -> Result<usize> {
    if !(0.0..=1.0).contains(&u) {
        return Err(Error::ParamOutOfRange { u });
    }
    let k = curve.order();
    let n = curve.num_control_points();
    let d_min = k / 2;
    let d_max = n + k - 1 - k.div_ceil(2);
    if u == 0.0 {
        return Ok(d_min);
    }
    if u == 1.0 {
        return Ok(d_max);
    }
    let knots = curve.knots();
    let offset = knots[d_min..=d_max].partition_point(|&t| t < u);
    Ok((d_min + offset).min(d_max))
}

/// Trace one seed through a fitted spline set.
pub fn trace_spline(
    set: &SplineSet,
    seed: &TraceSeed,
    neighbors: usize,
    power: f64,
) -> Result<TracedSpline> {
    let mut out = trace_splines(set, std::slice::from_ref(seed), neighbors, power)?;
    Ok(out.pop().unwrap())
}

/// Trace many seeds. Seeds that share a start time also share their
/// synchronization evaluations, anchors, and per-iteration candidate
/// indexes, mirroring how the particle tracer shares per-step indexes.
pub fn trace_splines(
    set: &SplineSet,
    seeds: &[TraceSeed],
    neighbors: usize,
    power: f64,
) -> Result<Vec<TracedSpline>> {
    if set.is_empty() {
        return Err(Error::InvalidNeighborQuery(
            "cannot trace through an empty spline set".into(),
        ));
    }
    if set.dim() != 3 {
        return Err(Error::InvalidCurve(
            "control-point tracing requires 3D time-parameterized curves".into(),
        ));
    }

    // Group seeds by exact start parameter so shared state is reused.
    let mut results: Vec<Option<TracedSpline>> = vec![None; seeds.len()];
    let mut order: Vec<usize> = (0..seeds.len()).collect();
    order.sort_by_key(|&i| seed_param(set, &seeds[i]).map(f64::to_bits).unwrap_or(0));

    let mut group: Vec<usize> = Vec::new();
    let mut group_u: Option<f64> = None;
    for &i in &order {
        let u = seed_param(set, &seeds[i])?;
        if group_u == Some(u) {
            group.push(i);
        } else {
            trace_group(set, seeds, &group, group_u, neighbors, power, &mut results)?;
            group_u = Some(u);
            group = vec![i];
        }
    }
    trace_group(set, seeds, &group, group_u, neighbors, power, &mut results)?;
    Ok(results.into_iter().map(Option::unwrap).collect())
}

fn seed_param(set: &SplineSet, seed: &TraceSeed) -> Result<f64> {
    let tau = match seed.tau {
        SeedTime::Step(s) => set.step_time(s)?,
        SeedTime::Time(t) => t,
    };
    set.normalize_time(tau)
}

/// Shared per-start-parameter context: curve evaluations at the seed
/// parameter, anchors, and lazily built per-iteration frontier indexes.
struct Shared {
    evals: Vec<Vec3>,
    anchors: Vec<usize>,
    seed_index: NeighborIndex,
    forward_trees: Vec<Option<NeighborIndex>>,
    backward_trees: Vec<Option<NeighborIndex>>,
}

fn trace_group(
    set: &SplineSet,
    seeds: &[TraceSeed],
    group: &[usize],
    group_u: Option<f64>,
    neighbors: usize,
    power: f64,
    results: &mut [Option<TracedSpline>],
) -> Result<()> {
    let (Some(u), false) = (group_u, group.is_empty()) else {
        return Ok(());
    };
    let evals: Vec<Vec3> = set
        .curves()
        .iter()
        .map(|c| c.evaluate_spatial(u))
        .collect::<Result<_>>()?;
    let anchors: Vec<usize> = set
        .curves()
        .iter()
        .map(|c| anchor_index(c, u))
        .collect::<Result<_>>()?;
    let seed_points: Vec<(Vec3, usize)> = evals.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let mut shared = Shared {
        evals,
        anchors,
        seed_index: NeighborIndex::build(&seed_points)?,
        forward_trees: Vec::new(),
        backward_trees: Vec::new(),
    };
    for &i in group {
        results[i] = Some(trace_one(set, &seeds[i], &mut shared, neighbors, power)?);
    }
    Ok(())
}

fn trace_one(
    set: &SplineSet,
    seed: &TraceSeed,
    shared: &mut Shared,
    neighbors: usize,
    power: f64,
) -> Result<TracedSpline> {
    let k = set.order();
    let h = k / 2;
    let u = seed_param(set, seed)?;

    // Seed reconstruction from the synchronized curve points.
    let weights = idw_weights(&shared.seed_index.knn(seed.rho, neighbors), power)?;
    let mut t_seed = 0.0;
    let mut p_seed = seed.rho;
    for (&owner, &w) in weights.owners.iter().zip(&weights.weights) {
        let curve = &set.curves()[owner];
        let d = shared.anchors[owner];
        t_seed += w * curve.knots()[d];
        p_seed += (curve.control_point_spatial(d - h) - shared.evals[owner]) * w;
    }
    // A weight sum one ulp off unity perturbs the averaged knot; at the
    // domain boundaries every anchor knot is exactly 0 or 1, so the average
    // is too.
    t_seed = t_seed.clamp(0.0, 1.0);
    if u == 0.0 {
        t_seed = 0.0;
    } else if u == 1.0 {
        t_seed = 1.0;
    }
    let mut iterations = 1usize;
    let mut repairs = 0usize;

    let mut forward_pairs = Vec::new();
    if matches!(seed.direction, Direction::Forward | Direction::Both) {
        walk(
            set,
            shared,
            true,
            (t_seed, p_seed),
            neighbors,
            power,
            &mut forward_pairs,
            &mut iterations,
            &mut repairs,
        )?;
    }
    let mut backward_pairs = Vec::new();
    if matches!(seed.direction, Direction::Backward | Direction::Both) {
        walk(
            set,
            shared,
            false,
            (t_seed, p_seed),
            neighbors,
            power,
            &mut backward_pairs,
            &mut iterations,
            &mut repairs,
        )?;
    }

    // Stitch: backward pairs reversed, then the seed pair, then forward.
    backward_pairs.reverse();
    let mut pairs = backward_pairs;
    pairs.push((t_seed, p_seed));
    pairs.extend(forward_pairs);

    // End-clamp by duplication: the first ⌈k/2⌉ knots and last ⌊k/2⌋ knots
    // must repeat the boundary values for the spline's domain to span the
    // whole reconstructed range; together with the ⌊k/2⌋ / ⌈k/2⌉ padding
    // below this gives k-fold boundary knots on a full [0, 1] trace.
    let lead_target = k.div_ceil(2);
    let first = pairs[0];
    let mut lead = pairs.iter().take_while(|p| p.0 == first.0).count();
    while lead < lead_target {
        pairs.insert(0, first);
        lead += 1;
    }
    let tail_target = k / 2;
    let last = *pairs.last().unwrap();
    let mut tail = pairs.iter().rev().take_while(|p| p.0 == last.0).count();
    while tail < tail_target {
        pairs.push(last);
        tail += 1;
    }

    let mut knots = Vec::with_capacity(pairs.len() + k);
    knots.extend(std::iter::repeat_n(pairs[0].0, k / 2));
    knots.extend(pairs.iter().map(|p| p.0));
    knots.extend(std::iter::repeat_n(pairs[pairs.len() - 1].0, k.div_ceil(2)));
    let control_points: Vec<Vec3> = pairs.iter().map(|p| p.1).collect();
    debug_assert_eq!(knots.len(), control_points.len() + k);
    debug_assert!(knots.windows(2).all(|w| w[0] <= w[1]));

    Ok(TracedSpline {
        order: k,
        knots,
        control_points,
        seed: *seed,
        time_range: set.time_range(),
        interp_iterations: iterations,
        knot_repairs: repairs,
    })
}

/// One directional walk from the seed pair. Emits (knot, control point)
/// pairs until the reconstructed knot leaves [0, 1] (emitted clamped) or
/// every curve's frontier is frozen at its boundary (then a final boundary
/// pair is emitted if the knot has not reached it).
#[allow(clippy::too_many_arguments)]
fn walk(
    set: &SplineSet,
    shared: &mut Shared,
    forward: bool,
    seed_pair: (f64, Vec3),
    neighbors: usize,
    power: f64,
    out: &mut Vec<(f64, Vec3)>,
    iterations: &mut usize,
    repairs: &mut usize,
) -> Result<()> {
    let k = set.order();
    let h = k / 2;
    // Frontier bounds are per curve; curves may carry different control
    // point counts.
    let d_stop_of = |i: usize| -> usize {
        if forward {
            set.curves()[i].num_control_points() + k - 1 - k.div_ceil(2)
        } else {
            h
        }
    };
    let boundary = if forward { 1.0 } else { 0.0 };

    let mut d: Vec<usize> = shared.anchors.clone();
    let (mut t_cur, mut p_cur) = seed_pair;

    for iter in 0.. {
        if d.iter().enumerate().all(|(i, &di)| di == d_stop_of(i)) {
            // Frontier exhausted. Every curve's boundary anchor knot equals
            // the boundary value exactly, so close the trace there when the
            // reconstruction stalled short of it.
            let unfinished = if forward {
                t_cur < boundary
            } else {
                t_cur > boundary
            };
            if unfinished {
                out.push((boundary, p_cur));
            }
            break;
        }

        let tree = frontier_tree(set, shared, forward, iter, &d, h)?;
        let weights = idw_weights(&tree.knn(p_cur, neighbors), power)?;
        *iterations += 1;

        let mut dt = 0.0;
        let mut dp = Vec3::ZERO;
        for (&owner, &w) in weights.owners.iter().zip(&weights.weights) {
            let di = d[owner];
            if di == d_stop_of(owner) {
                continue; // frozen: zero increment, weight stays normalized
            }
            let next = if forward { di + 1 } else { di - 1 };
            let curve = &set.curves()[owner];
            dt += w * (curve.knots()[next] - curve.knots()[di]);
            dp += (curve.control_point_spatial(next - h) - curve.control_point_spatial(di - h)) * w;
        }
        let mut t_new = t_cur + dt;
        if forward && t_new < t_cur {
            t_new = t_cur + EPS_KNOT;
            *repairs += 1;
        } else if !forward && t_new > t_cur {
            t_new = t_cur - EPS_KNOT;
            *repairs += 1;
        }
        t_cur = t_new;
        p_cur += dp;

        for (i, di) in d.iter_mut().enumerate() {
            if forward {
                *di = (*di + 1).min(d_stop_of(i));
            } else {
                *di = di.saturating_sub(1).max(h);
            }
        }

        if forward && t_cur > 1.0 {
            out.push((1.0, p_cur));
            break;
        }
        if !forward && t_cur < 0.0 {
            out.push((0.0, p_cur));
            break;
        }
        out.push((t_cur, p_cur));
    }
    Ok(())
}

/// Candidate index over every curve's frontier control point after `iter`
/// advances from the anchors. Shared across the seeds of a start-parameter
/// group; the frontier depends only on the start parameter and iteration.
fn frontier_tree<'a>(
    set: &SplineSet,
    shared: &'a mut Shared,
    forward: bool,
    iter: usize,
    d: &[usize],
    h: usize,
) -> Result<&'a NeighborIndex> {
    let cache = if forward {
        &mut shared.forward_trees
    } else {
        &mut shared.backward_trees
    };
    if cache.len() <= iter {
        cache.resize_with(iter + 1, || None);
    }
    if cache[iter].is_none() {
        let points: Vec<(Vec3, usize)> = d
            .iter()
            .enumerate()
            .map(|(i, &di)| (set.curves()[i].control_point_spatial(di - h), i))
            .collect();
        cache[iter] = Some(NeighborIndex::build(&points)?);
    }
    Ok(cache[iter].as_ref().unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bspline::{fit_all, uniform_clamped_knots, KnotPlacementConfig, ParamKind};
    use crate::flowdata::{generate_pathlines, FlowFieldSpec, PathlineSet};
    use approx::assert_abs_diff_eq;

    /// Identical cubic pathlines: exactly representable by the cubic fit,
    /// so the curves agree with the data to solver precision.
    fn identical_curve_set(copies: usize) -> (PathlineSet, SplineSet) {
        let m = 80;
        let times: Vec<f64> = (0..m).map(|i| i as f64).collect();
        let path: Vec<Vec3> = times
            .iter()
            .map(|&t| {
                let s = t / (m - 1) as f64;
                Vec3::new(
                    1.0 - 2.0 * s + 0.75 * s * s * s,
                    0.5 * s + 1.5 * s * s - s * s * s,
                    -0.25 + s * s,
                )
            })
            .collect();
        let mut positions = Vec::new();
        for _ in 0..copies {
            positions.extend_from_slice(&path);
        }
        let set = PathlineSet::new(positions, copies, m, times).unwrap();
        let out = fit_all(&set, 4, &KnotPlacementConfig::new(16), ParamKind::Time).unwrap();
        (set, out.set)
    }

    #[test]
    fn anchor_index_matches_frozen_examples() {
        // k = 4, n = 10, uniform interior knots 1/7..6/7.
        let knots = uniform_clamped_knots(10, 4);
        let ctrl = vec![0.0; 30];
        let curve = SplineCurve::new(4, 3, knots, ctrl, ParamKind::Time).unwrap();
        assert_eq!(anchor_index(&curve, 0.0).unwrap(), 2);
        assert_eq!(anchor_index(&curve, 1.0).unwrap(), 11);
        // First knot >= 0.5 in range is t_7 = 4/7.
        assert_eq!(anchor_index(&curve, 0.5).unwrap(), 7);
    }

    #[test]
    fn anchor_index_rejects_bad_params() {
        let knots = uniform_clamped_knots(6, 4);
        let curve = SplineCurve::new(4, 3, knots, vec![0.0; 18], ParamKind::Time).unwrap();
        assert!(anchor_index(&curve, 1.5).is_err());
    }

    #[test]
    fn identical_curves_reproduce_exactly_from_any_seed() {
        let (set, splines) = identical_curve_set(5);
        let original = splines.curves()[0].clone();
        let m = set.num_timesteps();
        for &step in &[0usize, 11, 40, 79] {
            // Seed on the curve itself: the snap rule then hands the whole
            // weight to one neighbor and the walk reproduces it exactly.
            let u = step as f64 / (m - 1) as f64;
            let rho = original.evaluate_spatial(u).unwrap();
            let seed = TraceSeed::at_step(step, rho, Direction::Both);
            let traced = trace_spline(&splines, &seed, 3, 2.0).unwrap();
            assert_eq!(traced.knots.len(), original.knots().len(), "step {step}");
            for (a, b) in traced.knots.iter().zip(original.knots()) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-13);
            }
            let ctrl: Vec<f64> = traced
                .control_points
                .iter()
                .flat_map(|p| p.to_array())
                .collect();
            assert_eq!(ctrl.len(), original.control_points_flat().len());
            for (a, b) in ctrl.iter().zip(original.control_points_flat()) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-13);
            }
            assert_eq!(traced.knot_repairs, 0);

            // Sampling the traced spline recovers the original pathline.
            let samples = traced.sample_at_steps(set.times());
            assert_eq!(samples.len(), m);
            for (j, pos) in samples {
                let want = set.position(0, j);
                assert!(pos.dist(want) <= 1e-9, "step {j}: {pos:?} vs {want:?}");
            }
        }
    }

    #[test]
    fn uniform_translation_traces_to_the_exact_line() {
        let mut spec = FlowFieldSpec::uniform_translation(Vec3::new(0.4, -0.1, 0.2));
        spec.domain = crate::Aabb::new(
            Vec3::new(-500.0, -500.0, -500.0),
            Vec3::new(500.0, 500.0, 500.0),
        );
        spec.time_span = (0.0, 8.0);
        let set = generate_pathlines(&spec, 25, 33, 1, 9).unwrap();
        assert!(set.clamped_pathlines().is_empty());
        let out = fit_all(&set, 4, &KnotPlacementConfig::new(8), ParamKind::Time).unwrap();

        let rho = Vec3::new(0.21, -0.37, 0.11);
        let seed_time = set.times()[12];
        let seed = TraceSeed::at_time(seed_time, rho, Direction::Both);
        let traced = trace_spline(&out.set, &seed, 8, 2.0).unwrap();
        let v = Vec3::new(0.4, -0.1, 0.2);
        for (j, pos) in traced.sample_at_steps(set.times()) {
            let want = rho + v * (set.times()[j] - seed_time);
            assert!(
                pos.dist(want) <= 1e-9,
                "step {j}: {pos:?} vs {want:?} ({})",
                pos.dist(want)
            );
        }
        // Full coverage of the [0, 1] range in both directions.
        assert_eq!(traced.sample_at_steps(set.times()).len(), 33);
    }

    #[test]
    fn tracing_is_translation_equivariant() {
        let spec = FlowFieldSpec::double_gyre_default();
        let set = generate_pathlines(&spec, 60, 50, 3, 31).unwrap();
        let out = fit_all(&set, 4, &KnotPlacementConfig::new(14), ParamKind::Time).unwrap();
        let shift = Vec3::new(5.0, -2.0, 1.0);

        let shifted_curves: Vec<SplineCurve> = out
            .set
            .curves()
            .iter()
            .map(|c| {
                let mut ctrl = c.control_points_flat().to_vec();
                for p in ctrl.chunks_mut(3) {
                    p[0] += shift.x;
                    p[1] += shift.y;
                    p[2] += shift.z;
                }
                SplineCurve::new(4, 3, c.knots().to_vec(), ctrl, ParamKind::Time).unwrap()
            })
            .collect();
        let shifted = SplineSet::new(shifted_curves, out.set.times().to_vec()).unwrap();

        let rho = Vec3::new(1.3, 0.52, 0.0);
        let seed = TraceSeed::at_step(25, rho, Direction::Both);
        let seed_shifted = TraceSeed::at_step(25, rho + shift, Direction::Both);
        let a = trace_spline(&out.set, &seed, 8, 2.0).unwrap();
        let b = trace_spline(&shifted, &seed_shifted, 8, 2.0).unwrap();
        // Distances (and so weights) shift by at most an ulp under
        // translation; knots and control points follow within 1e-12.
        assert_eq!(a.knots.len(), b.knots.len());
        for (s, t) in a.knots.iter().zip(&b.knots) {
            assert_abs_diff_eq!(s, t, epsilon = 1e-12);
        }
        for (p, q) in a.control_points.iter().zip(&b.control_points) {
            let back = *q - shift;
            assert_abs_diff_eq!(p.x, back.x, epsilon = 1e-12);
            assert_abs_diff_eq!(p.y, back.y, epsilon = 1e-12);
            assert_abs_diff_eq!(p.z, back.z, epsilon = 1e-12);
        }
    }

    #[test]
    fn iteration_count_tracks_control_points_not_steps() {
        let spec = FlowFieldSpec::double_gyre_default();
        let m = 400;
        let n = 20;
        let set = generate_pathlines(&spec, 80, m, 2, 77).unwrap();
        let out = fit_all(&set, 4, &KnotPlacementConfig::new(n), ParamKind::Time).unwrap();
        let seed = TraceSeed::at_step(200, Vec3::new(1.0, 0.5, 0.0), Direction::Both);
        let traced = trace_spline(&out.set, &seed, 8, 2.0).unwrap();
        // One weight interpolation per reconstructed pair; a couple of
        // boundary paddings do not count.
        assert!(
            traced.interp_iterations <= n + 4,
            "iterations {} vs n {n}",
            traced.interp_iterations
        );
        assert!(traced.interp_iterations >= n - 2);
        assert!(traced.num_control_points() >= n - 2);
        assert!((traced.num_control_points() as i64 - traced.interp_iterations as i64).abs() <= 4);
    }

    #[test]
    fn smooth_data_needs_no_knot_repairs_and_knots_are_monotone() {
        let spec = FlowFieldSpec::double_gyre_default();
        let set = generate_pathlines(&spec, 100, 120, 2, 13).unwrap();
        let out = fit_all(&set, 4, &KnotPlacementConfig::new(24), ParamKind::Time).unwrap();
        for &step in &[0usize, 30, 60, 119] {
            let seed = TraceSeed::at_step(step, Vec3::new(0.7, 0.3, 0.0), Direction::Both);
            let traced = trace_spline(&out.set, &seed, 8, 2.0).unwrap();
            assert_eq!(traced.knot_repairs, 0, "seed step {step}");
            assert!(traced.knots.windows(2).all(|w| w[0] <= w[1]));
            let (lo, hi) = traced.param_range();
            assert_eq!(lo, 0.0);
            assert_eq!(hi, 1.0);
        }
    }

    #[test]
    fn sample_traced_endpoints_and_line() {
        let (set, splines) = identical_curve_set(3);
        let rho = splines.curves()[0].evaluate_spatial(0.0).unwrap();
        let seed = TraceSeed::at_step(0, rho, Direction::Both);
        let traced = trace_spline(&splines, &seed, 2, 2.0).unwrap();
        let two = sample_traced(&traced, 2);
        assert_eq!(two.len(), 2);
        assert_eq!(two[0].0, set.times()[0]);
        assert_eq!(two[1].0, set.times()[79]);
        assert!(two[0].1.dist(set.position(0, 0)) <= 1e-9);
        assert!(two[1].1.dist(set.position(0, 79)) <= 1e-9);
    }

    #[test]
    fn straight_line_samples_stay_affine() {
        let mut spec = FlowFieldSpec::uniform_translation(Vec3::new(1.0, 2.0, -0.5));
        spec.domain = crate::Aabb::new(
            Vec3::new(-500.0, -500.0, -500.0),
            Vec3::new(500.0, 500.0, 500.0),
        );
        spec.time_span = (0.0, 4.0);
        let set = generate_pathlines(&spec, 12, 25, 1, 3).unwrap();
        assert!(set.clamped_pathlines().is_empty());
        let out = fit_all(&set, 4, &KnotPlacementConfig::new(6), ParamKind::Time).unwrap();
        let rho = Vec3::new(0.05, 0.1, -0.04);
        let seed = TraceSeed::at_time(0.0, rho, Direction::Forward);
        let traced = trace_spline(&out.set, &seed, 8, 2.0).unwrap();
        let samples = sample_traced(&traced, 11);
        let v = Vec3::new(1.0, 2.0, -0.5);
        for (time, pos) in samples {
            let want = rho + v * time;
            assert!(pos.dist(want) <= 1e-9, "t={time}: {pos:?} vs {want:?}");
        }
    }

    #[test]
    fn batch_equals_single_seed_traces() {
        let spec = FlowFieldSpec::double_gyre_default();
        let set = generate_pathlines(&spec, 50, 60, 2, 41).unwrap();
        let out = fit_all(&set, 4, &KnotPlacementConfig::new(12), ParamKind::Time).unwrap();
        let seeds: Vec<TraceSeed> = (0..6)
            .map(|i| {
                TraceSeed::at_step(
                    if i % 2 == 0 { 15 } else { 45 },
                    Vec3::new(0.3 + 0.25 * i as f64, 0.4, 0.0),
                    Direction::Both,
                )
            })
            .collect();
        let batch = trace_splines(&out.set, &seeds, 8, 2.0).unwrap();
        for (seed, traced) in seeds.iter().zip(&batch) {
            let single = trace_spline(&out.set, seed, 8, 2.0).unwrap();
            assert_eq!(single.knots, traced.knots);
            assert_eq!(single.control_points, traced.control_points);
        }
    }

    #[test]
    fn seed_outside_range_errors() {
        let (_, splines) = identical_curve_set(2);
        let seed = TraceSeed::at_time(99.0, Vec3::ZERO, Direction::Both);
        assert!(matches!(
            trace_spline(&splines, &seed, 2, 2.0),
            Err(Error::SeedOutOfRange { .. })
        ));
    }

    #[test]
    fn curves_with_different_control_point_counts_trace() {
        // A set whose curves carry different n; frontiers freeze at their
        // own boundaries without stalling the others.
        let spec = FlowFieldSpec::double_gyre_default();
        let set = generate_pathlines(&spec, 30, 60, 2, 61).unwrap();
        let small = fit_all(&set, 4, &KnotPlacementConfig::new(8), ParamKind::Time).unwrap();
        let large = fit_all(&set, 4, &KnotPlacementConfig::new(14), ParamKind::Time).unwrap();
        let mixed: Vec<SplineCurve> = small
            .set
            .curves()
            .iter()
            .take(15)
            .chain(large.set.curves().iter().skip(15))
            .cloned()
            .collect();
        let mixed = SplineSet::new(mixed, set.times().to_vec()).unwrap();
        let seed = TraceSeed::at_step(30, Vec3::new(1.0, 0.5, 0.0), Direction::Both);
        let traced = trace_spline(&mixed, &seed, 8, 2.0).unwrap();
        let (lo, hi) = traced.param_range();
        assert_eq!((lo, hi), (0.0, 1.0));
        assert!(traced.knots.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(traced.sample_at_steps(set.times()).len(), 60);
    }
}
