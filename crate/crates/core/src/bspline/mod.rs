//! B-spline curves: basis recursion, de Boor evaluation, clamped knot
//! vectors, automatic knot placement and least-squares fitting.
//!
//! A curve of order `k` (degree `k-1`) with `n` control points carries
//! `n + k` non-decreasing knots in `[0, 1]`. Knot vectors are clamped: the
//! first `k` knots are 0 and the last `k` are 1, so the curve interpolates
//! its first and last control points. Parameters live in `[0, 1]` and the
//! convention at `u = 1` is right-closed, meaning the final basis function
//! evaluates to 1 there.

pub mod fit;
pub mod io;
pub mod knots;

pub use fit::{fit_all, fit_curve, fit_with_knots, FitOutcome, FittedCurve, SplineSet};
pub use knots::{parameterize, place_knots, KnotPlacementConfig, Parameterization};

use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// How data points are mapped to curve parameters before fitting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ParamKind {
    /// Normalized physical time; curves are 3D functions of time.
    Time,
    /// Cumulative chord length of 4D space-time points; curves are 4D with
    /// the time axis scaled onto the largest spatial extent of the pathline.
    ChordLength4D,
}

impl ParamKind {
    /// Spatial dimensionality of curves fitted under this parameterization.
    pub fn curve_dim(self) -> usize {
        match self {
            ParamKind::Time => 3,
            ParamKind::ChordLength4D => 4,
        }
    }

    pub fn from_dim(dim: usize) -> Result<Self> {
        match dim {
            3 => Ok(ParamKind::Time),
            4 => Ok(ParamKind::ChordLength4D),
            _ => Err(Error::InvalidCurve(format!("unsupported dimension {dim}"))),
        }
    }
}

/// One fitted trajectory: `n` control points of dimension `dim` and a
/// clamped knot vector of `n + k` entries.
#[derive(Debug, Clone, PartialEq)]
pub struct SplineCurve {
    order: usize,
    dim: usize,
    /// Flat `n * dim` array, point-major.
    control_points: Vec<f64>,
    knots: Vec<f64>,
    param_kind: ParamKind,
}

impl SplineCurve {
    pub fn new(
        order: usize,
        dim: usize,
        knots: Vec<f64>,
        control_points: Vec<f64>,
        param_kind: ParamKind,
    ) -> Result<Self> {
        if order < 2 {
            return Err(Error::InvalidCurve(format!("order {order} < 2")));
        }
        if dim != 3 && dim != 4 {
            return Err(Error::InvalidCurve(format!("dimension {dim} not 3 or 4")));
        }
        if !control_points.len().is_multiple_of(dim) {
            return Err(Error::InvalidCurve(format!(
                "control point array length {} not divisible by dim {dim}",
                control_points.len()
            )));
        }
        let n = control_points.len() / dim;
        if n < order {
            return Err(Error::InvalidCurve(format!(
                "{n} control points < order {order}"
            )));
        }
        if knots.len() != n + order {
            return Err(Error::InvalidCurve(format!(
                "knot count {} != n + k = {}",
                knots.len(),
                n + order
            )));
        }
        if knots.windows(2).any(|w| !(w[0] <= w[1])) {
            return Err(Error::InvalidCurve("knots not non-decreasing".into()));
        }
        if knots[..order].iter().any(|&t| t != 0.0) {
            return Err(Error::InvalidCurve(
                "first k knots must equal 0 (clamped)".into(),
            ));
        }
        if knots[n..].iter().any(|&t| t != 1.0) {
            return Err(Error::InvalidCurve(
                "last k knots must equal 1 (clamped)".into(),
            ));
        }
        if control_points.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidCurve("non-finite control point".into()));
        }
        Ok(SplineCurve {
            order,
            dim,
            control_points,
            knots,
            param_kind,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_control_points(&self) -> usize {
        self.control_points.len() / self.dim
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// Flat `n * dim` control point array.
    pub fn control_points_flat(&self) -> &[f64] {
        &self.control_points
    }

    pub fn param_kind(&self) -> ParamKind {
        self.param_kind
    }

    /// Control point `i` padded to 4 components (unused components are 0).
    pub fn control_point(&self, i: usize) -> [f64; 4] {
        let mut out = [0.0; 4];
        out[..self.dim].copy_from_slice(&self.control_points[i * self.dim..(i + 1) * self.dim]);
        out
    }

    /// Spatial part of control point `i`.
    pub fn control_point_spatial(&self, i: usize) -> crate::Vec3 {
        let p = self.control_point(i);
        crate::Vec3::new(p[0], p[1], p[2])
    }

    /// Evaluate the curve at `u ∈ [0, 1]` by local de Boor recursion over the
    /// `k` active control points. Components beyond `dim` are 0.
    pub fn evaluate(&self, u: f64) -> Result<[f64; 4]> {
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::ParamOutOfRange { u });
        }
        Ok(de_boor_point(
            &self.knots,
            &self.control_points,
            self.dim,
            self.order,
            u,
        ))
    }

    /// Evaluate and keep the spatial (x, y, z) part.
    pub fn evaluate_spatial(&self, u: f64) -> Result<crate::Vec3> {
        let p = self.evaluate(u)?;
        Ok(crate::Vec3::new(p[0], p[1], p[2]))
    }
}

/// Cox–de Boor basis function `B_{i,k}(u)` for the given knot vector.
///
/// `0/0` terms in the recursion are taken as 0 and the interval test is
/// right-closed at the final knot so the last basis function is 1 at the
/// right end of the domain. `i` addresses one of the `knots.len() - k`
/// control points.
pub fn basis(i: usize, k: usize, u: f64, knots: &[f64]) -> Result<f64> {
    if k == 0 || knots.len() <= k {
        return Err(Error::InvalidCurve(format!(
            "knot vector of {} entries cannot support order {k}",
            knots.len()
        )));
    }
    let n = knots.len() - k;
    if i >= n {
        return Err(Error::BasisIndexOutOfRange { index: i, count: n });
    }
    if !(0.0..=1.0).contains(&u) {
        return Err(Error::ParamOutOfRange { u });
    }
    Ok(basis_unchecked(i, k, u, knots))
}

/// The bare recursion; callers guarantee `i + k < knots.len() + 1`.
fn basis_unchecked(i: usize, k: usize, u: f64, knots: &[f64]) -> f64 {
    if k == 1 {
        let right = *knots.last().unwrap();
        let closed_last = u == right && knots[i + 1] == right && knots[i] < knots[i + 1];
        return if (knots[i] <= u && u < knots[i + 1]) || closed_last {
            1.0
        } else {
            0.0
        };
    }
    let mut value = 0.0;
    let den_left = knots[i + k - 1] - knots[i];
    if den_left > 0.0 {
        value += (u - knots[i]) / den_left * basis_unchecked(i, k - 1, u, knots);
    }
    let den_right = knots[i + k] - knots[i + 1];
    if den_right > 0.0 {
        value += (knots[i + k] - u) / den_right * basis_unchecked(i + 1, k - 1, u, knots);
    }
    value
}

/// Index `s` of the knot span containing `u`: `knots[s] <= u < knots[s+1]`,
/// clamped into the valid de Boor range `[k-1, n-1]`.
pub(crate) fn find_span(knots: &[f64], k: usize, u: f64) -> usize {
    let n = knots.len() - k;
    let s = knots.partition_point(|&t| t <= u);
    s.saturating_sub(1).clamp(k - 1, n - 1)
}

/// Evaluate a B-spline point by de Boor's algorithm on flat `dim`-stride
/// control points. `u` must lie within the knot domain; zero-length knot
/// differences contribute nothing (the 0/0 → 0 convention).
pub(crate) fn de_boor_point(knots: &[f64], ctrl: &[f64], dim: usize, k: usize, u: f64) -> [f64; 4] {
    let p = k - 1;
    let s = find_span(knots, k, u);
    let mut d: Vec<[f64; 4]> = (0..k)
        .map(|j| {
            let i = s - p + j;
            let mut v = [0.0; 4];
            v[..dim].copy_from_slice(&ctrl[i * dim..(i + 1) * dim]);
            v
        })
        .collect();
    for r in 1..=p {
        for j in (r..=p).rev() {
            let left = knots[j + s - p];
            let right = knots[j + 1 + s - r];
            let den = right - left;
            let alpha = if den > 0.0 { (u - left) / den } else { 0.0 };
            let prev = d[j - 1];
            for (cur, prev) in d[j].iter_mut().zip(&prev).take(dim) {
                *cur = (1.0 - alpha) * *prev + alpha * *cur;
            }
        }
    }
    d[p]
}

/// The `k` non-vanishing basis values at `u`. Writes
/// `B_{s-k+1..=s, k}(u)` into `out[0..k]`; `left`/`right` are scratch of the
/// same length. This is the standard triangular scheme used by the fitter so
/// collocation rows cost O(k²) instead of O(n k).
pub(crate) fn nonzero_basis(
    knots: &[f64],
    k: usize,
    span: usize,
    u: f64,
    out: &mut [f64],
    left: &mut [f64],
    right: &mut [f64],
) {
    let p = k - 1;
    out[0] = 1.0;
    for j in 1..=p {
        left[j] = u - knots[span + 1 - j];
        right[j] = knots[span + j] - u;
        let mut saved = 0.0;
        for r in 0..j {
            let den = right[r + 1] + left[j - r];
            let tmp = if den != 0.0 { out[r] / den } else { 0.0 };
            out[r] = saved + right[r + 1] * tmp;
            saved = left[j - r] * tmp;
        }
        out[j] = saved;
    }
}

/// Uniform clamped knot vector: `k` zeros, `n - k` equally spaced interior
/// knots, `k` ones.
pub fn uniform_clamped_knots(n: usize, k: usize) -> Vec<f64> {
    let interior = n - k;
    let mut t = vec![0.0; k];
    for i in 1..=interior {
        t.push(i as f64 / (interior + 1) as f64);
    }
    t.extend(std::iter::repeat_n(1.0, k));
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::prelude::*;

    /// Independent Cox–de Boor recursion used as the oracle for `basis` and
    /// the naive-summation check of `evaluate`. Written directly from the
    /// textbook recurrence, sharing no code with the implementation above.
    fn oracle_basis(i: usize, k: usize, u: f64, t: &[f64]) -> f64 {
        if k == 1 {
            let last = *t.last().unwrap();
            if (t[i] <= u && u < t[i + 1]) || (u == last && t[i] < t[i + 1] && t[i + 1] == last) {
                return 1.0;
            }
            return 0.0;
        }
        let a = if t[i + k - 1] == t[i] {
            0.0
        } else {
            (u - t[i]) / (t[i + k - 1] - t[i]) * oracle_basis(i, k - 1, u, t)
        };
        let b = if t[i + k] == t[i + 1] {
            0.0
        } else {
            (t[i + k] - u) / (t[i + k] - t[i + 1]) * oracle_basis(i + 1, k - 1, u, t)
        };
        a + b
    }

    fn random_curve(rng: &mut impl Rng, n: usize, k: usize) -> SplineCurve {
        // Random strictly increasing interior knots.
        let mut interior: Vec<f64> = (0..n - k).map(|_| rng.random_range(0.01..0.99)).collect();
        interior.sort_by(f64::total_cmp);
        for i in 1..interior.len() {
            if interior[i] - interior[i - 1] < 1e-6 {
                interior[i] = interior[i - 1] + 1e-6;
            }
        }
        let mut knots = vec![0.0; k];
        knots.extend(interior);
        knots.extend(std::iter::repeat_n(1.0, k));
        let ctrl: Vec<f64> = (0..n * 3).map(|_| rng.random_range(-5.0..5.0)).collect();
        SplineCurve::new(k, 3, knots, ctrl, ParamKind::Time).unwrap()
    }

    #[test]
    fn order_one_basis_is_span_indicator() {
        let t = vec![0.0, 0.25, 0.5, 0.75, 1.0];
        assert_eq!(basis(1, 1, 0.3, &t).unwrap(), 1.0);
        assert_eq!(basis(1, 1, 0.25, &t).unwrap(), 1.0);
        assert_eq!(basis(1, 1, 0.5, &t).unwrap(), 0.0);
        assert_eq!(basis(0, 1, 0.3, &t).unwrap(), 0.0);
        // Right-closed convention at u = 1.
        assert_eq!(basis(3, 1, 1.0, &t).unwrap(), 1.0);
    }

    #[test]
    fn basis_index_out_of_range_errors() {
        let t = uniform_clamped_knots(7, 4);
        assert!(matches!(
            basis(7, 4, 0.5, &t),
            Err(Error::BasisIndexOutOfRange { index: 7, count: 7 })
        ));
        assert!(basis(6, 4, 0.5, &t).is_ok());
    }

    #[test]
    fn cubic_basis_at_interior_knot_matches_frozen_values() {
        // Uniform clamped cubic, k = 4, n = 7: interior knots 1/4, 2/4, 3/4.
        // At u = 1/2 the three active basis functions take (1/6, 2/3, 1/6).
        let t = uniform_clamped_knots(7, 4);
        let vals: Vec<f64> = (0..7).map(|i| basis(i, 4, 0.5, &t).unwrap()).collect();
        let active: Vec<f64> = vals.iter().copied().filter(|v| *v != 0.0).collect();
        assert_eq!(active.len(), 3);
        assert_abs_diff_eq!(active[0], 1.0 / 6.0, epsilon = 1e-15);
        assert_abs_diff_eq!(active[1], 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(active[2], 1.0 / 6.0, epsilon = 1e-15);
        // And the whole row agrees with the independent recursion oracle.
        for (i, v) in vals.iter().enumerate() {
            assert_abs_diff_eq!(*v, oracle_basis(i, 4, 0.5, &t), epsilon = 1e-15);
        }
    }

    #[test]
    fn partition_of_unity_on_grid() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..20 {
            let curve = random_curve(&mut rng, 12, 4);
            for j in 0..=100 {
                let u = j as f64 / 100.0;
                let sum: f64 = (0..curve.num_control_points())
                    .map(|i| basis(i, 4, u, curve.knots()).unwrap())
                    .sum();
                assert_abs_diff_eq!(sum, 1.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn local_support() {
        let mut rng = StdRng::seed_from_u64(11);
        let curve = random_curve(&mut rng, 10, 4);
        let t = curve.knots();
        for i in 0..10 {
            for j in 0..=200 {
                let u = j as f64 / 200.0;
                if u < t[i] || u > t[i + 4] {
                    assert_eq!(basis(i, 4, u, t).unwrap(), 0.0, "i={i} u={u}");
                }
            }
        }
    }

    #[test]
    fn clamped_endpoint_interpolation() {
        let mut rng = StdRng::seed_from_u64(3);
        let curve = random_curve(&mut rng, 9, 4);
        let p0 = curve.control_point(0);
        let pn = curve.control_point(8);
        assert_eq!(curve.evaluate(0.0).unwrap(), p0);
        assert_eq!(curve.evaluate(1.0).unwrap(), pn);
    }

    #[test]
    fn constant_control_points_give_constant_curve() {
        let knots = uniform_clamped_knots(8, 4);
        let ctrl: Vec<f64> = std::iter::repeat_n([2.0, -1.0, 0.5], 8).flatten().collect();
        let curve = SplineCurve::new(4, 3, knots, ctrl, ParamKind::Time).unwrap();
        for j in 0..=50 {
            let u = j as f64 / 50.0;
            let p = curve.evaluate(u).unwrap();
            assert_abs_diff_eq!(p[0], 2.0, epsilon = 1e-13);
            assert_abs_diff_eq!(p[1], -1.0, epsilon = 1e-13);
            assert_abs_diff_eq!(p[2], 0.5, epsilon = 1e-13);
        }
    }

    #[test]
    fn de_boor_matches_naive_summation() {
        let mut rng = StdRng::seed_from_u64(17);
        let curve = random_curve(&mut rng, 11, 4);
        for _ in 0..100 {
            let u: f64 = rng.random_range(0.0..=1.0);
            let fast = curve.evaluate(u).unwrap();
            let mut naive = [0.0; 4];
            for i in 0..curve.num_control_points() {
                let b = oracle_basis(i, 4, u, curve.knots());
                let p = curve.control_point(i);
                for c in 0..3 {
                    naive[c] += b * p[c];
                }
            }
            for c in 0..3 {
                assert_abs_diff_eq!(fast[c], naive[c], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn evaluate_rejects_out_of_range() {
        let mut rng = StdRng::seed_from_u64(5);
        let curve = random_curve(&mut rng, 8, 4);
        assert!(matches!(
            curve.evaluate(1.0001),
            Err(Error::ParamOutOfRange { .. })
        ));
        assert!(matches!(
            curve.evaluate(-0.0001),
            Err(Error::ParamOutOfRange { .. })
        ));
    }

    #[test]
    fn nonzero_basis_agrees_with_full_row() {
        let mut rng = StdRng::seed_from_u64(23);
        let curve = random_curve(&mut rng, 13, 4);
        let k = 4;
        let (mut out, mut l, mut r) = (vec![0.0; k], vec![0.0; k], vec![0.0; k]);
        for _ in 0..50 {
            let u: f64 = rng.random_range(0.0..=1.0);
            let span = find_span(curve.knots(), k, u);
            nonzero_basis(curve.knots(), k, span, u, &mut out, &mut l, &mut r);
            for (j, v) in out.iter().enumerate() {
                let i = span + 1 - k + j;
                let full = basis(i, k, u, curve.knots()).unwrap();
                assert!((v - full).abs() <= 1e-13, "u={u} j={j}: {v} vs {full}");
            }
        }
    }

    #[test]
    fn curve_construction_validates() {
        let knots = uniform_clamped_knots(6, 4);
        let ctrl = vec![0.0; 18];
        assert!(SplineCurve::new(4, 3, knots.clone(), ctrl.clone(), ParamKind::Time).is_ok());
        // Knot count mismatch.
        assert!(
            SplineCurve::new(4, 3, knots[1..].to_vec(), ctrl.clone(), ParamKind::Time).is_err()
        );
        // Unclamped start.
        let mut bad = knots.clone();
        bad[0] = -0.1;
        assert!(SplineCurve::new(4, 3, bad, ctrl.clone(), ParamKind::Time).is_err());
        // n < k.
        assert!(SplineCurve::new(
            4,
            3,
            uniform_clamped_knots(4, 4)[..7].to_vec(),
            ctrl[..9].to_vec(),
            ParamKind::Time
        )
        .is_err());
    }
}
