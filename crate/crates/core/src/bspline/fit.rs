//! Least-squares B-spline fitting of pathlines.
//!
//! The collocation matrix has at most `k` non-zeros per row, so the normal
//! equations `NᵀN P = Nᵀρ` form a symmetric positive-definite band matrix of
//! bandwidth `k - 1`. A banded Cholesky factorization solves the system in
//! O(n k²), which keeps the fit cost essentially independent of the number
//! of control points.

use crate::bspline::knots::{parameterize, place_knots, KnotPlacementConfig};
use crate::bspline::{find_span, nonzero_basis, ParamKind, SplineCurve};
use crate::flowdata::PathlineSet;
use crate::{Error, Result, Vec3};
use rayon::prelude::*;
use std::time::Instant;

/// A fitted curve with its least-squares residual.
#[derive(Debug, Clone)]
pub struct FittedCurve {
    pub curve: SplineCurve,
    /// Root-mean-square residual of the fit over the data points, measured
    /// in the curve's own dimensionality.
    pub rmse: f64,
    /// The pathline was stationary and chord parameterization fell back to
    /// time parameters.
    pub chord_fallback: bool,
}

/// All curves fitted from one dataset. Curves share order, dimension and
/// parameterization; the dataset's physical time axis is kept so seeds given
/// as step indexes or physical times both normalize consistently.
#[derive(Debug, Clone)]
pub struct SplineSet {
    curves: Vec<SplineCurve>,
    times: Vec<f64>,
}

impl SplineSet {
    pub fn new(curves: Vec<SplineCurve>, times: Vec<f64>) -> Result<Self> {
        if curves.is_empty() {
            return Err(Error::InvalidCurve("spline set has no curves".into()));
        }
        let order = curves[0].order();
        let dim = curves[0].dim();
        if curves.iter().any(|c| c.order() != order || c.dim() != dim) {
            return Err(Error::InvalidCurve(
                "spline set curves must share order and dimension".into(),
            ));
        }
        if times.len() < 2 || times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidCurve(
                "time axis must have at least 2 strictly increasing entries".into(),
            ));
        }
        Ok(SplineSet { curves, times })
    }

    pub fn curves(&self) -> &[SplineCurve] {
        &self.curves
    }

    pub fn len(&self) -> usize {
        self.curves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.curves.is_empty()
    }

    pub fn order(&self) -> usize {
        self.curves[0].order()
    }

    pub fn dim(&self) -> usize {
        self.curves[0].dim()
    }

    pub fn param_kind(&self) -> ParamKind {
        self.curves[0].param_kind()
    }

    /// Physical time of each dataset step.
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn time_range(&self) -> (f64, f64) {
        (self.times[0], self.times[self.times.len() - 1])
    }

    /// Physical time of a step index.
    pub fn step_time(&self, step: usize) -> Result<f64> {
        let (lo, hi) = self.time_range();
        self.times.get(step).copied().ok_or(Error::SeedOutOfRange {
            tau: step as f64,
            lo,
            hi,
        })
    }

    /// Normalize a physical time into the `[0, 1]` parameter domain.
    pub fn normalize_time(&self, tau: f64) -> Result<f64> {
        let (lo, hi) = self.time_range();
        if tau < lo || tau > hi {
            return Err(Error::SeedOutOfRange { tau, lo, hi });
        }
        Ok((tau - lo) / (hi - lo))
    }

    /// Keep only the curves at `keep` indices (used for train/test splits).
    pub fn subset(&self, keep: &[usize]) -> SplineSet {
        SplineSet {
            curves: keep.iter().map(|&i| self.curves[i].clone()).collect(),
            times: self.times.clone(),
        }
    }
}

/// Outcome of fitting a whole dataset: the curve set plus per-curve
/// residuals and the wall time spent fitting.
#[derive(Debug, Clone)]
pub struct FitOutcome {
    pub set: SplineSet,
    pub per_curve_rmse: Vec<f64>,
    pub chord_fallback_count: usize,
    pub fit_seconds: f64,
}

/// Fit one pathline: parameterize, place knots, solve the least squares.
pub fn fit_curve(
    points: &[Vec3],
    times: &[f64],
    k: usize,
    config: &KnotPlacementConfig,
    kind: ParamKind,
) -> Result<FittedCurve> {
    let param = parameterize(points, times, kind)?;
    let knots = place_knots(&param.fit_points, &param.params, config, k)?;
    let (control_points, rmse) =
        fit_with_knots(&param.fit_points, &param.params, &knots, k, param.dim)?;
    let curve = SplineCurve::new(k, param.dim, knots, control_points, kind)?;
    Ok(FittedCurve {
        curve,
        rmse,
        chord_fallback: param.chord_fallback,
    })
}

/// Solve the least-squares control points for a fixed knot vector.
///
/// Returns the flat `n * dim` control point array and the fit RMSE. Fails
/// with [`Error::RankDeficient`] when the knot vector leaves a basis function
/// unsupported by the data (a Schoenberg–Whitney violation).
pub fn fit_with_knots(
    fit_points: &[[f64; 4]],
    params: &[f64],
    knots: &[f64],
    k: usize,
    dim: usize,
) -> Result<(Vec<f64>, f64)> {
    let m = fit_points.len();
    let n = knots.len() - k;
    if m < n {
        return Err(Error::InsufficientData {
            points: m,
            control_points: n,
        });
    }
    debug_assert_eq!(params.len(), m);

    // Assemble the banded normal equations. band[i*k + d] holds A[i][i-d].
    let mut band = vec![0.0; n * k];
    let mut rhs = vec![0.0; n * dim];
    let mut bvals = vec![0.0; k];
    let mut left = vec![0.0; k];
    let mut right = vec![0.0; k];
    for (row, &u) in params.iter().enumerate() {
        let span = find_span(knots, k, u);
        nonzero_basis(knots, k, span, u, &mut bvals, &mut left, &mut right);
        let base = span + 1 - k;
        for a in 0..k {
            let ga = base + a;
            for b in 0..=a {
                band[ga * k + (a - b)] += bvals[a] * bvals[b];
            }
            for c in 0..dim {
                rhs[ga * dim + c] += bvals[a] * fit_points[row][c];
            }
        }
    }

    cholesky_banded(&mut band, n, k)?;
    let mut ctrl = rhs;
    solve_banded(&band, n, k, dim, &mut ctrl);

    // Residual of the solved curve at the data parameters.
    let mut sq_sum = 0.0;
    for (row, &u) in params.iter().enumerate() {
        let span = find_span(knots, k, u);
        nonzero_basis(knots, k, span, u, &mut bvals, &mut left, &mut right);
        let base = span + 1 - k;
        for c in 0..dim {
            let mut v = 0.0;
            for a in 0..k {
                v += bvals[a] * ctrl[(base + a) * dim + c];
            }
            let d = fit_points[row][c] - v;
            sq_sum += d * d;
        }
    }
    let rmse = (sq_sum / m as f64).sqrt();
    Ok((ctrl, rmse))
}

/// In-place Cholesky factorization of a symmetric positive-definite band
/// matrix stored as `band[i*k + (i-j)]` for `i-j` in `0..k`.
fn cholesky_banded(band: &mut [f64], n: usize, k: usize) -> Result<()> {
    let half = k - 1;
    let scale = (0..n)
        .map(|i| band[i * k])
        .fold(0.0_f64, f64::max)
        .max(f64::MIN_POSITIVE);
    let tol = 1e-12 * scale;
    for j in 0..n {
        let start = j.saturating_sub(half);
        let mut diag = band[j * k];
        for t in start..j {
            let l = band[j * k + (j - t)];
            diag -= l * l;
        }
        if diag <= tol {
            return Err(Error::RankDeficient {
                column: j,
                pivot: diag,
            });
        }
        let d = diag.sqrt();
        band[j * k] = d;
        let last = (j + half).min(n - 1);
        for i in j + 1..=last {
            let mut sum = band[i * k + (i - j)];
            let lo = i.saturating_sub(half).max(start);
            for t in lo..j {
                sum -= band[i * k + (i - t)] * band[j * k + (j - t)];
            }
            band[i * k + (i - j)] = sum / d;
        }
    }
    Ok(())
}

/// Solve `L Lᵀ x = b` for `dim` interleaved right-hand sides in `rhs`.
fn solve_banded(band: &[f64], n: usize, k: usize, dim: usize, rhs: &mut [f64]) {
    let half = k - 1;
    // Forward substitution.
    for i in 0..n {
        let start = i.saturating_sub(half);
        for c in 0..dim {
            let mut v = rhs[i * dim + c];
            for t in start..i {
                v -= band[i * k + (i - t)] * rhs[t * dim + c];
            }
            rhs[i * dim + c] = v / band[i * k];
        }
    }
    // Backward substitution with Lᵀ.
    for i in (0..n).rev() {
        let last = (i + half).min(n - 1);
        for c in 0..dim {
            let mut v = rhs[i * dim + c];
            for t in i + 1..=last {
                v -= band[t * k + (t - i)] * rhs[t * dim + c];
            }
            rhs[i * dim + c] = v / band[i * k];
        }
    }
}

/// Fit every pathline of a dataset. Failures abort the whole fit and name
/// the offending pathline. Curves are fitted independently, in parallel,
/// and land at their pathline's index.
pub fn fit_all(
    set: &PathlineSet,
    k: usize,
    config: &KnotPlacementConfig,
    kind: ParamKind,
) -> Result<FitOutcome> {
    let started = Instant::now();
    let times = set.times();
    let fitted: Vec<FittedCurve> = (0..set.num_pathlines())
        .into_par_iter()
        .map(|i| {
            fit_curve(set.pathline(i), times, k, config, kind).map_err(|e| Error::FitFailure {
                pathline: i,
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;
    let fit_seconds = started.elapsed().as_secs_f64();

    let per_curve_rmse = fitted.iter().map(|f| f.rmse).collect();
    let chord_fallback_count = fitted.iter().filter(|f| f.chord_fallback).count();
    let curves = fitted.into_iter().map(|f| f.curve).collect();
    let set = SplineSet::new(curves, times.to_vec())?;
    Ok(FitOutcome {
        set,
        per_curve_rmse,
        chord_fallback_count,
        fit_seconds,
    })
}
