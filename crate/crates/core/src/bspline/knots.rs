//! Trajectory parameterization and automatic knot placement.
//!
//! Knot placement follows the cumulative-feature recipe: estimate the k-th
//! derivative magnitude of the data by divided differences, temper it with
//! the exponent 1/k, smooth it with a centered moving average, integrate it
//! with the trapezoid rule, and put the interior knots at equal quantiles of
//! the resulting cumulative function. Regions where the data bends hard
//! accumulate feature mass and therefore receive more knots.

use crate::bspline::ParamKind;
use crate::{Error, Result, Vec3};
use serde::{Deserialize, Serialize};

/// Fallback strategy when the feature function carries no information.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum KnotFallback {
    #[default]
    Uniform,
}

/// Configuration for automatic knot placement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KnotPlacementConfig {
    /// Number of control points `n`; the knot vector has `n + k` entries.
    pub num_control_points: usize,
    /// Half-width of the centered moving average applied to the raw feature.
    pub feature_smoothing_width: usize,
    pub fallback: KnotFallback,
}

impl KnotPlacementConfig {
    pub fn new(num_control_points: usize) -> Self {
        KnotPlacementConfig {
            num_control_points,
            feature_smoothing_width: 2,
            fallback: KnotFallback::Uniform,
        }
    }
}

/// Parameter values assigned to the data points of one pathline.
#[derive(Debug, Clone)]
pub struct Parameterization {
    /// Non-decreasing parameters in `[0, 1]` with `u_0 = 0`, `u_{m-1} = 1`.
    pub params: Vec<f64>,
    /// Points handed to the fitter: `(x, y, z)` for [`ParamKind::Time`],
    /// `(x, y, z, t_scaled)` for [`ParamKind::ChordLength4D`].
    pub fit_points: Vec<[f64; 4]>,
    /// Dimensionality of `fit_points` (3 or 4).
    pub dim: usize,
    /// Set when a stationary pathline forced the chord-length mode back to
    /// time parameterization.
    pub chord_fallback: bool,
}

/// Map a pathline onto curve parameters.
///
/// Time mode normalizes the physical time of each step into `[0, 1]`. Chord
/// mode measures cumulative Euclidean length of 4D space-time points whose
/// time axis is scaled onto the largest spatial extent of the pathline's
/// bounding box, then normalizes; a pathline with zero total chord length
/// falls back to time parameters with `chord_fallback` set.
pub fn parameterize(points: &[Vec3], times: &[f64], kind: ParamKind) -> Result<Parameterization> {
    let m = points.len();
    if m < 2 {
        return Err(Error::InvalidPathlineSet(format!(
            "parameterization needs at least 2 points, got {m}"
        )));
    }
    if times.len() != m {
        return Err(Error::InvalidPathlineSet(format!(
            "times length {} != point count {m}",
            times.len()
        )));
    }
    let span = times[m - 1] - times[0];
    if !(span > 0.0) {
        return Err(Error::InvalidPathlineSet(
            "time span must be positive".into(),
        ));
    }

    let time_params = || -> Vec<f64> {
        let mut u: Vec<f64> = times.iter().map(|&t| (t - times[0]) / span).collect();
        u[0] = 0.0;
        u[m - 1] = 1.0;
        u
    };

    match kind {
        ParamKind::Time => {
            let fit_points = points.iter().map(|p| [p.x, p.y, p.z, 0.0]).collect();
            Ok(Parameterization {
                params: time_params(),
                fit_points,
                dim: 3,
                chord_fallback: false,
            })
        }
        ParamKind::ChordLength4D => {
            let bbox = crate::Aabb::from_points(points.iter().copied());
            let scale = bbox.max_extent();
            let fit_points: Vec<[f64; 4]> = points
                .iter()
                .zip(times)
                .map(|(p, &t)| [p.x, p.y, p.z, (t - times[0]) / span * scale])
                .collect();
            let mut cumulative = vec![0.0; m];
            for j in 1..m {
                let seg: f64 = fit_points[j]
                    .iter()
                    .zip(&fit_points[j - 1])
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                cumulative[j] = cumulative[j - 1] + seg.sqrt();
            }
            let total = cumulative[m - 1];
            if !(total > 0.0) {
                // Stationary particle: no usable chord length. Keep the 4D
                // shape (the scaled time axis is identically zero here) so
                // the curve set stays homogeneous, but parameterize by time.
                return Ok(Parameterization {
                    params: time_params(),
                    fit_points,
                    dim: 4,
                    chord_fallback: true,
                });
            }
            let mut u: Vec<f64> = cumulative.iter().map(|&c| c / total).collect();
            u[0] = 0.0;
            u[m - 1] = 1.0;
            Ok(Parameterization {
                params: u,
                fit_points,
                dim: 4,
                chord_fallback: false,
            })
        }
    }
}

/// Compute a clamped knot vector of `n + k` entries for the given data.
///
/// Interior knots divide the cumulative feature function into equal
/// increments; a vanishing feature falls back to uniform spacing. The
/// Schoenberg–Whitney condition (every span `[t_i, t_{i+k})` contains a data
/// parameter) is enforced afterwards by nudging offending knots to the
/// nearest feasible parameter midpoint.
pub fn place_knots(
    fit_points: &[[f64; 4]],
    params: &[f64],
    config: &KnotPlacementConfig,
    k: usize,
) -> Result<Vec<f64>> {
    let n = config.num_control_points;
    let m = fit_points.len();
    if n < k {
        return Err(Error::InvalidCurve(format!(
            "{n} control points < order {k}"
        )));
    }
    if m < n {
        return Err(Error::InsufficientData {
            points: m,
            control_points: n,
        });
    }
    debug_assert_eq!(params.len(), m);

    let interior = n - k;
    let mut t = Vec::with_capacity(n + k);
    t.extend(std::iter::repeat_n(0.0, k));
    if interior > 0 {
        let q = interior_knots(fit_points, params, config, k, interior);
        t.extend(q);
    }
    t.extend(std::iter::repeat_n(1.0, k));

    enforce_schoenberg_whitney(&mut t, params, k);
    Ok(t)
}

/// Interior knots from the cumulative feature quantiles.
fn interior_knots(
    fit_points: &[[f64; 4]],
    params: &[f64],
    config: &KnotPlacementConfig,
    k: usize,
    interior: usize,
) -> Vec<f64> {
    let uniform = || -> Vec<f64> {
        (1..=interior)
            .map(|i| i as f64 / (interior + 1) as f64)
            .collect()
    };

    let Some((centers, feature)) = feature_function(fit_points, params, config, k) else {
        return uniform();
    };

    // Piecewise-linear feature over [0, 1]: constant extension outside the
    // window centers, trapezoid integration between them.
    let mut xs = Vec::with_capacity(centers.len() + 2);
    let mut fs = Vec::with_capacity(centers.len() + 2);
    xs.push(0.0);
    fs.push(feature[0]);
    for (x, f) in centers.iter().zip(&feature) {
        if *x > *xs.last().unwrap() {
            xs.push(*x);
            fs.push(*f);
        }
    }
    if *xs.last().unwrap() < 1.0 {
        xs.push(1.0);
        fs.push(*feature.last().unwrap());
    }

    let mut cumulative = vec![0.0; xs.len()];
    for i in 1..xs.len() {
        cumulative[i] = cumulative[i - 1] + 0.5 * (fs[i] + fs[i - 1]) * (xs[i] - xs[i - 1]);
    }
    let total = cumulative[xs.len() - 1];
    if !(total > 0.0) {
        return uniform();
    }

    let mut q = Vec::with_capacity(interior);
    let mut seg = 0;
    for i in 1..=interior {
        let target = total * i as f64 / (interior + 1) as f64;
        while seg + 2 < xs.len() && cumulative[seg + 1] < target {
            seg += 1;
        }
        q.push(invert_trapezoid(
            xs[seg],
            xs[seg + 1],
            fs[seg],
            fs[seg + 1],
            cumulative[seg],
            target,
        ));
    }

    // Quantiles of a strictly increasing cumulative are ordered; guard the
    // floating-point edge anyway.
    for i in 1..q.len() {
        if q[i] <= q[i - 1] {
            q[i] = q[i - 1] + f64::EPSILON;
        }
    }
    q.iter_mut().for_each(|v| *v = v.clamp(0.0, 1.0));
    q
}

/// Raw feature: tempered k-th derivative magnitude by divided differences,
/// smoothed by a centered moving average. Returns window centers and values,
/// or `None` when the feature is identically zero.
fn feature_function(
    fit_points: &[[f64; 4]],
    params: &[f64],
    config: &KnotPlacementConfig,
    k: usize,
) -> Option<(Vec<f64>, Vec<f64>)> {
    let m = fit_points.len();
    if m < k + 1 {
        return None;
    }
    let windows = m - k;
    let factorial: f64 = (1..=k).map(|v| v as f64).product();
    let coord_scale = fit_points
        .iter()
        .flat_map(|p| p.iter())
        .fold(0.0_f64, |a, &v| a.max(v.abs()));

    let mut raw = Vec::with_capacity(windows);
    let mut centers = Vec::with_capacity(windows);
    let mut table: Vec<[f64; 4]> = Vec::with_capacity(k + 1);
    for j in 0..windows {
        // Divided differences of order k over points j..=j+k.
        table.clear();
        table.extend_from_slice(&fit_points[j..=j + k]);
        let mut min_spacing = f64::INFINITY;
        for r in 0..k {
            min_spacing = min_spacing.min(params[j + r + 1] - params[j + r]);
        }
        for order in 1..=k {
            for r in 0..=k - order {
                let du = params[j + r + order] - params[j + r];
                let next = table[r + 1];
                for (t, h) in table[r].iter_mut().zip(&next) {
                    *t = if du > 0.0 { (h - *t) / du } else { 0.0 };
                }
            }
        }
        let deriv_sq: f64 = table[0].iter().map(|v| v * v).sum();
        let mut magnitude = factorial * deriv_sq.sqrt();
        // Rounding noise in a k-th difference is about 2^k ulps of the
        // coordinate scale, divided by the spacing product. Magnitudes at
        // that level are indistinguishable from an exactly polynomial
        // pathline and count as zero, otherwise the 1/k tempering below
        // would inflate them into phantom features.
        let noise_floor =
            256.0 * (1u64 << k) as f64 * f64::EPSILON * coord_scale / min_spacing.powi(k as i32);
        if !(magnitude > noise_floor) {
            magnitude = 0.0;
        }
        raw.push(magnitude.powf(1.0 / k as f64));
        centers.push(0.5 * (params[j] + params[j + k]));
    }

    // Centered moving average with truncated edges.
    let w = config.feature_smoothing_width;
    let mut smooth = Vec::with_capacity(windows);
    for j in 0..windows {
        let lo = j.saturating_sub(w);
        let hi = (j + w).min(windows - 1);
        let sum: f64 = raw[lo..=hi].iter().sum();
        smooth.push(sum / (hi - lo + 1) as f64);
    }

    let max = smooth.iter().copied().fold(0.0, f64::max);
    if !(max > 0.0) {
        return None;
    }
    // Floor keeps the cumulative strictly increasing when segments of the
    // data are exactly polynomial (zero feature) while others are not.
    let floor = 1e-12 * max;
    smooth.iter_mut().for_each(|v| *v += floor);
    Some((centers, smooth))
}

/// Solve `∫_{x0}^{x} f = target - c0` with `f` linear between `(x0, f0)` and
/// `(x1, f1)`.
fn invert_trapezoid(x0: f64, x1: f64, f0: f64, f1: f64, c0: f64, target: f64) -> f64 {
    let need = target - c0;
    let dx = x1 - x0;
    if dx <= 0.0 {
        return x0;
    }
    let slope = (f1 - f0) / dx;
    if slope.abs() < 1e-300 {
        if f0 <= 0.0 {
            return x1;
        }
        return (x0 + need / f0).min(x1);
    }
    // 0.5 * slope * d^2 + f0 * d - need = 0, take the root in [0, dx].
    let disc = (f0 * f0 + 2.0 * slope * need).max(0.0);
    let d = (-f0 + disc.sqrt()) / slope;
    (x0 + d.clamp(0.0, dx)).min(x1)
}

/// Nudge knots until every span `[t_i, t_{i+k})` (right-closed for the last
/// basis function) contains at least one parameter. A violating span is
/// squeezed between two consecutive parameters; one of its end knots moves to
/// the midpoint of the nearest adjacent parameter pair, which puts a
/// parameter inside the span while keeping the knot count fixed.
fn enforce_schoenberg_whitney(t: &mut [f64], params: &[f64], k: usize) {
    let n = t.len() - k;
    let passes = 4 * n.max(1);
    for _ in 0..passes {
        let Some(i) = first_violation(t, params, k, n) else {
            return;
        };
        // All of t[i]..t[i+k] sit strictly inside a parameter gap (u_a, u_b).
        let a = match params.partition_point(|&u| u < t[i]).checked_sub(1) {
            Some(a) => a,
            None => return,
        };
        let mid_left = if a >= 1 {
            Some(0.5 * (params[a - 1] + params[a]))
        } else {
            None
        };
        let mid_right = if a + 2 < params.len() {
            Some(0.5 * (params[a + 1] + params[a + 2]))
        } else {
            None
        };
        let span_center = 0.5 * (t[i] + t[i + k]);
        let move_left = match (mid_left, mid_right) {
            (Some(l), Some(r)) => span_center - l <= r - span_center,
            (Some(_), None) => true,
            (None, Some(_)) => false,
            (None, None) => return,
        };
        // Only interior knots (indices k..n-1) may move.
        if move_left {
            let target = mid_left.unwrap();
            let idx = (k..n).find(|&j| t[j] >= t[i]).unwrap_or(k);
            t[idx] = target;
        } else {
            let target = mid_right.unwrap();
            let idx = (k..n).rev().find(|&j| t[j] <= t[i + k]).unwrap_or(n - 1);
            t[idx] = target;
        }
        t[k..n].sort_by(f64::total_cmp);
        for j in k..n {
            if t[j] <= t[j - 1] && t[j - 1] > 0.0 {
                t[j] = t[j - 1] + f64::EPSILON;
            }
        }
    }
    log::warn!("span feasibility enforcement did not converge in {passes} passes");
}

/// Whether some parameter lies in `[lo, hi)` (or `[lo, hi]` when closed).
/// Binary search keeps the whole feasibility sweep at O(n log m).
fn span_has_param(params: &[f64], lo: f64, hi: f64, closed: bool) -> bool {
    let first = params.partition_point(|&u| u < lo);
    match params.get(first) {
        Some(&u) => u < hi || (closed && u <= hi),
        None => false,
    }
}

/// First basis index whose support contains no parameter, if any.
fn first_violation(t: &[f64], params: &[f64], k: usize, n: usize) -> Option<usize> {
    (0..n).find(|&i| !span_has_param(params, t[i], t[i + k], i == n - 1))
}

/// Count of Schoenberg–Whitney violations for a fitted knot vector; 0 means
/// the least-squares collocation matrix has full rank.
pub fn schoenberg_whitney_violations(t: &[f64], params: &[f64], k: usize) -> usize {
    let n = t.len() - k;
    (0..n)
        .filter(|&i| !span_has_param(params, t[i], t[i + k], i == n - 1))
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn line_points(m: usize) -> (Vec<Vec3>, Vec<f64>) {
        let times: Vec<f64> = (0..m).map(|i| i as f64).collect();
        let pts = times
            .iter()
            .map(|&t| Vec3::new(0.5 * t, -0.25 * t, 0.0))
            .collect();
        (pts, times)
    }

    #[test]
    fn time_params_are_normalized_step_fractions() {
        let (pts, times) = line_points(11);
        let p = parameterize(&pts, &times, ParamKind::Time).unwrap();
        for (i, &u) in p.params.iter().enumerate() {
            assert_abs_diff_eq!(u, i as f64 / 10.0, epsilon = 1e-15);
        }
        assert_eq!(p.dim, 3);
        assert!(!p.chord_fallback);
    }

    #[test]
    fn straight_line_chord_equals_time() {
        let (pts, times) = line_points(25);
        let t = parameterize(&pts, &times, ParamKind::Time).unwrap();
        let c = parameterize(&pts, &times, ParamKind::ChordLength4D).unwrap();
        assert_eq!(c.dim, 4);
        for (a, b) in t.params.iter().zip(&c.params) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn chord_params_with_segment_ratio_one_to_three() {
        // Spatial extent 3 (y axis), time span 2 scaled onto it:
        // t_scaled = (0, 0.75, 3). 4D segment lengths come out exactly
        // sqrt(1 + 0.5625) = 1.25 and sqrt(9 + 5.0625) = 3.75, a 1:3 ratio,
        // so the cumulative parameters are exactly (0, 0.25, 1).
        let pts = vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(1.0, 3.0, 0.0),
        ];
        let times = vec![0.0, 0.5, 2.0];
        let c = parameterize(&pts, &times, ParamKind::ChordLength4D).unwrap();
        assert_eq!(c.params[0], 0.0);
        assert_abs_diff_eq!(c.params[1], 0.25, epsilon = 1e-15);
        assert_eq!(c.params[2], 1.0);
    }

    #[test]
    fn stationary_pathline_falls_back_to_time() {
        let pts = vec![Vec3::new(1.0, 2.0, 3.0); 10];
        let times: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let p = parameterize(&pts, &times, ParamKind::ChordLength4D).unwrap();
        assert!(p.chord_fallback);
        assert_eq!(p.dim, 4);
        assert!(p.fit_points.iter().all(|fp| fp[3] == 0.0));
        assert_abs_diff_eq!(p.params[5], 5.0 / 9.0, epsilon = 1e-15);
    }

    #[test]
    fn zero_feature_yields_uniform_interior_knots() {
        let (pts, times) = line_points(50);
        let p = parameterize(&pts, &times, ParamKind::Time).unwrap();
        let cfg = KnotPlacementConfig::new(10);
        let t = place_knots(&p.fit_points, &p.params, &cfg, 4).unwrap();
        assert_eq!(t.len(), 14);
        for i in 0..6 {
            assert_abs_diff_eq!(t[4 + i], (i + 1) as f64 / 7.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn n_equals_k_gives_no_interior_knots() {
        let (pts, times) = line_points(20);
        let p = parameterize(&pts, &times, ParamKind::Time).unwrap();
        let cfg = KnotPlacementConfig::new(4);
        let t = place_knots(&p.fit_points, &p.params, &cfg, 4).unwrap();
        assert_eq!(t, vec![0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn insufficient_data_errors() {
        let (pts, times) = line_points(8);
        let p = parameterize(&pts, &times, ParamKind::Time).unwrap();
        let cfg = KnotPlacementConfig::new(10);
        assert!(matches!(
            place_knots(&p.fit_points, &p.params, &cfg, 4),
            Err(Error::InsufficientData {
                points: 8,
                control_points: 10
            })
        ));
    }

    /// Oracle for the concentration example: evaluate the cumulative feature
    /// quantiles directly on a constructed pathline whose curvature lives
    /// entirely in the first half of the parameter range.
    #[test]
    fn curvature_concentration_pulls_knots_left() {
        let m = 400;
        let times: Vec<f64> = (0..m).map(|i| i as f64).collect();
        let pts: Vec<Vec3> = times
            .iter()
            .map(|&t| {
                let s = t / (m - 1) as f64;
                if s < 0.5 {
                    // Tight oscillation in the first half.
                    Vec3::new(s, (s * 40.0).sin() * 0.2, 0.0)
                } else {
                    // Straight continuation, matched at s = 0.5.
                    let y = (0.5 * 40.0_f64).sin() * 0.2;
                    Vec3::new(s, y, 0.0)
                }
            })
            .collect();
        let p = parameterize(&pts, &times, ParamKind::Time).unwrap();
        let cfg = KnotPlacementConfig::new(20);
        let t = place_knots(&p.fit_points, &p.params, &cfg, 4).unwrap();
        let interior = &t[4..16];
        let left = interior.iter().filter(|&&v| v < 0.5).count();
        let right = interior.len() - left;
        assert!(
            left > right,
            "expected more interior knots in [0, 0.5]: left={left} right={right}"
        );
        // The implementation's knots are exactly the quantiles of its own
        // cumulative feature; cross-check the mass split: at least 2/3 of
        // the feature mass must sit in the first half for this data.
        let (centers, feature) = feature_function(&p.fit_points, &p.params, &cfg, 4).unwrap();
        let mass_left: f64 = centers
            .iter()
            .zip(&feature)
            .filter(|(c, _)| **c < 0.5)
            .map(|(_, f)| f)
            .sum();
        let mass_total: f64 = feature.iter().sum();
        assert!(mass_left / mass_total > 0.66);
    }

    #[test]
    fn knots_are_strictly_increasing_inside() {
        let m = 200;
        let times: Vec<f64> = (0..m).map(|i| i as f64).collect();
        let pts: Vec<Vec3> = times
            .iter()
            .map(|&t| {
                let s = t / (m - 1) as f64 * std::f64::consts::TAU;
                Vec3::new(s.cos(), s.sin(), 0.3 * s)
            })
            .collect();
        let p = parameterize(&pts, &times, ParamKind::Time).unwrap();
        let cfg = KnotPlacementConfig::new(24);
        let t = place_knots(&p.fit_points, &p.params, &cfg, 4).unwrap();
        for w in t[4..20].windows(2) {
            assert!(w[0] < w[1], "interior knots must strictly increase");
        }
        assert_eq!(schoenberg_whitney_violations(&t, &p.params, 4), 0);
    }

    #[test]
    fn span_feasibility_enforced_on_contrived_squeeze() {
        // Parameters with a huge gap in the middle; a naive quantile rule on
        // curvature concentrated in that gap would bunch knots between two
        // consecutive parameters.
        let params: Vec<f64> = (0..10)
            .map(|i| i as f64 * 0.02)
            .chain((0..10).map(|i| 0.82 + i as f64 * 0.02))
            .collect();
        let mut t = vec![0.0; 4];
        // Five interior knots bunched inside the (0.18, 0.82) parameter gap.
        t.extend([0.4, 0.45, 0.5, 0.55, 0.6]);
        t.extend([1.0; 4]);
        assert!(schoenberg_whitney_violations(&t, &params, 4) > 0);
        enforce_schoenberg_whitney(&mut t, &params, 4);
        assert_eq!(schoenberg_whitney_violations(&t, &params, 4), 0);
        assert!(t.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(t.len(), 13);
    }
}
