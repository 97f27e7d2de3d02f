//! Accuracy and timing experiments.
//!
//! Produces per-time-step RMSE series for curve fitting and for both
//! tracers on held-out seeds, plus a timing table over control-point
//! counts. Percentage errors are reported against the bounding-box
//! diagonal of the dataset ("data range"). Timed sections run the methods
//! sequentially; accuracy bookkeeping happens outside the timers.

use crate::bspline::{fit_all, parameterize, KnotPlacementConfig, SplineSet};
use crate::flowdata::PathlineSet;
use crate::tracer::{trace_particles, trace_splines, Direction, TraceSeed};
use crate::{Error, Result};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::path::Path;
use std::time::Instant;

/// Fitting accuracy series: spatial RMSE of the curves against the original
/// pathline positions, per time step and aggregated.
#[derive(Debug, Clone, Serialize)]
pub struct FitEvalSeries {
    pub per_step_rmse: Vec<f64>,
    pub aggregate_rmse: f64,
    /// Aggregate RMSE as a percentage of the data-range diagonal.
    pub rmse_pct_of_range: f64,
}

/// Spatial RMSE of every curve against its source pathline, evaluated at
/// the parameters that correspond to the time steps.
pub fn eval_fitting(set: &PathlineSet, splines: &SplineSet) -> Result<FitEvalSeries> {
    if splines.len() != set.num_pathlines() {
        return Err(Error::CurveCountMismatch {
            curves: splines.len(),
            pathlines: set.num_pathlines(),
        });
    }
    let m = set.num_timesteps();
    let kind = splines.param_kind();
    let mut sq_per_step = vec![0.0; m];
    for (i, curve) in splines.curves().iter().enumerate() {
        let param = parameterize(set.pathline(i), set.times(), kind)?;
        for (j, &u) in param.params.iter().enumerate() {
            let p = curve.evaluate_spatial(u)?;
            sq_per_step[j] += p.dist_sq(set.position(i, j));
        }
    }
    let count = set.num_pathlines() as f64;
    let aggregate_rmse = (sq_per_step.iter().sum::<f64>() / (count * m as f64)).sqrt();
    let per_step_rmse = sq_per_step
        .into_iter()
        .map(|s| (s / count).sqrt())
        .collect();
    let diag = set.bounds().diagonal().max(f64::MIN_POSITIVE);
    Ok(FitEvalSeries {
        per_step_rmse,
        aggregate_rmse,
        rmse_pct_of_range: aggregate_rmse / diag * 100.0,
    })
}

/// Per-method tracing accuracy against held-out ground truth.
#[derive(Debug, Clone, Serialize)]
pub struct MethodSeries {
    /// RMSE over the seeds that cover each step; `None` when no trace
    /// reached the step.
    pub per_step_rmse: Vec<Option<f64>>,
    /// Seeds covering each step.
    pub per_step_count: Vec<usize>,
    pub aggregate_rmse: f64,
    pub trace_seconds: f64,
    /// Total reconstruction iterations over all seeds (displacement steps
    /// for the particle tracer, weight interpolations for the spline one).
    pub total_iterations: usize,
}

/// Both methods traced from one seed step.
#[derive(Debug, Clone, Serialize)]
pub struct SeedStepEval {
    pub seed_step: usize,
    pub particle: MethodSeries,
    pub spline: MethodSeries,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SeedDeviationStats {
    pub mean: f64,
    pub max: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct IterationSummary {
    pub control_points: usize,
    pub num_timesteps: usize,
    pub spline_mean_iterations: f64,
    pub particle_mean_steps: f64,
}

/// Everything one tracing evaluation produced.
#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    /// Echo of the configuration that produced this report.
    pub config: serde_json::Value,
    /// Bounding-box diagonal used as the percentage denominator.
    pub data_range_diagonal: f64,
    pub fit: FitEvalSeries,
    /// Wall time of the fit that produced the curves, when known.
    pub fit_seconds: Option<f64>,
    pub tracing: Vec<SeedStepEval>,
    pub knot_repair_count: usize,
    /// Distance between each traced spline at the seed parameter and the
    /// seed position; nonzero by construction of the seed reconstruction.
    pub seed_deviation: SeedDeviationStats,
    pub test_pathlines: Vec<usize>,
    pub iterations: IterationSummary,
}

/// Configuration for [`eval_tracing`].
#[derive(Debug, Clone, Serialize)]
pub struct TraceEvalConfig {
    pub test_fraction: f64,
    pub seed_steps: Vec<usize>,
    pub neighbors: usize,
    pub power: f64,
    pub split_seed: u64,
}

impl Default for TraceEvalConfig {
    fn default() -> Self {
        TraceEvalConfig {
            test_fraction: 0.25,
            seed_steps: vec![0],
            neighbors: crate::neighbors::DEFAULT_NEIGHBORS,
            power: crate::neighbors::DEFAULT_IDW_POWER,
            split_seed: 0,
        }
    }
}

/// Deterministic train/test split of pathline indices. Returns sorted
/// (train, test) index lists; disjoint and exhaustive.
pub fn split_indices(
    num_pathlines: usize,
    test_fraction: f64,
    split_seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidEval(format!(
            "test fraction must be in (0, 1), got {test_fraction}"
        )));
    }
    if num_pathlines < 2 {
        return Err(Error::InvalidEval(
            "cannot split fewer than 2 pathlines".into(),
        ));
    }
    let mut indices: Vec<usize> = (0..num_pathlines).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(split_seed);
    indices.shuffle(&mut rng);
    let test_count =
        ((num_pathlines as f64 * test_fraction).round() as usize).clamp(1, num_pathlines - 1);
    let mut test: Vec<usize> = indices[..test_count].to_vec();
    let mut train: Vec<usize> = indices[test_count..].to_vec();
    test.sort_unstable();
    train.sort_unstable();
    Ok((train, test))
}

/// Hold out a test fraction of pathlines, trace both methods from each
/// held-out position at the configured seed steps, and report per-step
/// RMSE against the held-out ground truth.
pub fn eval_tracing(
    set: &PathlineSet,
    splines: &SplineSet,
    cfg: &TraceEvalConfig,
) -> Result<EvalReport> {
    if splines.len() != set.num_pathlines() {
        return Err(Error::CurveCountMismatch {
            curves: splines.len(),
            pathlines: set.num_pathlines(),
        });
    }
    let m = set.num_timesteps();
    for &s in &cfg.seed_steps {
        if s >= m {
            return Err(Error::InvalidEval(format!("seed step {s} outside 0..{m}")));
        }
    }

    let (train, test) = split_indices(set.num_pathlines(), cfg.test_fraction, cfg.split_seed)?;
    if train.len() < cfg.neighbors + 1 {
        return Err(Error::SplitTooSmall {
            train: train.len(),
            need: cfg.neighbors + 1,
        });
    }
    let train_particles = set.subset(&train)?;
    let train_splines = splines.subset(&train);

    let mut tracing = Vec::new();
    let mut knot_repair_count = 0usize;
    let mut deviations: Vec<f64> = Vec::new();
    let mut spline_iterations = 0usize;
    let mut particle_iterations = 0usize;

    for &seed_step in &cfg.seed_steps {
        let seeds: Vec<TraceSeed> = test
            .iter()
            .map(|&i| {
                TraceSeed::at_time(
                    set.times()[seed_step],
                    set.position(i, seed_step),
                    Direction::Both,
                )
            })
            .collect();

        // Particle tracing, timed sequentially.
        let t0 = Instant::now();
        let particle_traces = trace_particles(&train_particles, &seeds, cfg.neighbors, cfg.power)?;
        let particle_seconds = t0.elapsed().as_secs_f64();

        let t0 = Instant::now();
        let spline_traces = trace_splines(&train_splines, &seeds, cfg.neighbors, cfg.power)?;
        let spline_seconds = t0.elapsed().as_secs_f64();

        let mut particle_sq = vec![0.0; m];
        let mut particle_count = vec![0usize; m];
        for (trace, &i) in particle_traces.iter().zip(&test) {
            particle_iterations += trace.steps_traced;
            for j in 0..m {
                if let Some(p) = trace.position_at_step(j) {
                    particle_sq[j] += p.dist_sq(set.position(i, j));
                    particle_count[j] += 1;
                }
            }
        }

        let mut spline_sq = vec![0.0; m];
        let mut spline_count = vec![0usize; m];
        for (trace, &i) in spline_traces.iter().zip(&test) {
            knot_repair_count += trace.knot_repairs;
            spline_iterations += trace.interp_iterations;
            let u_seed = trace.param_of_time(set.times()[seed_step]);
            let (lo, hi) = trace.param_range();
            deviations.push(
                trace
                    .evaluate(u_seed.clamp(lo, hi))?
                    .dist(set.position(i, seed_step)),
            );
            for (j, p) in trace.sample_at_steps(set.times()) {
                spline_sq[j] += p.dist_sq(set.position(i, j));
                spline_count[j] += 1;
            }
        }

        tracing.push(SeedStepEval {
            seed_step,
            particle: method_series(particle_sq, particle_count, particle_seconds, {
                particle_traces.iter().map(|t| t.steps_traced).sum()
            }),
            spline: method_series(spline_sq, spline_count, spline_seconds, {
                spline_traces.iter().map(|t| t.interp_iterations).sum()
            }),
        });
    }

    let seed_count = (cfg.seed_steps.len() * test.len()) as f64;
    let seed_deviation = SeedDeviationStats {
        mean: deviations.iter().sum::<f64>() / seed_count.max(1.0),
        max: deviations.iter().copied().fold(0.0, f64::max),
    };
    let fit_series = eval_fitting(set, splines)?;
    Ok(EvalReport {
        config: serde_json::to_value(cfg).expect("config serializes"),
        data_range_diagonal: set.bounds().diagonal(),
        fit: fit_series,
        fit_seconds: None,
        tracing,
        knot_repair_count,
        seed_deviation,
        iterations: IterationSummary {
            control_points: splines.curves()[0].num_control_points(),
            num_timesteps: m,
            spline_mean_iterations: spline_iterations as f64 / seed_count.max(1.0),
            particle_mean_steps: particle_iterations as f64 / seed_count.max(1.0),
        },
        test_pathlines: test,
    })
}

fn method_series(
    sq: Vec<f64>,
    count: Vec<usize>,
    trace_seconds: f64,
    total_iterations: usize,
) -> MethodSeries {
    let total_sq: f64 = sq.iter().sum();
    let total_count: usize = count.iter().sum();
    let per_step_rmse = sq
        .iter()
        .zip(&count)
        .map(|(&s, &c)| (c > 0).then(|| (s / c as f64).sqrt()))
        .collect();
    MethodSeries {
        per_step_rmse,
        per_step_count: count,
        aggregate_rmse: if total_count > 0 {
            (total_sq / total_count as f64).sqrt()
        } else {
            0.0
        },
        trace_seconds,
        total_iterations,
    }
}

/// One row of the timing table.
#[derive(Debug, Clone, Serialize)]
pub struct BenchEntry {
    pub control_points: usize,
    pub fit_seconds: f64,
    pub spline_trace_seconds: f64,
    pub particle_trace_seconds: f64,
    /// Spline trace time over particle trace time on the same seeds.
    pub ratio: f64,
    pub mean_spline_iterations: f64,
    pub mean_particle_steps: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub config: serde_json::Value,
    pub entries: Vec<BenchEntry>,
}

#[derive(Debug, Clone, Serialize)]
struct BenchConfigEcho<'a> {
    control_point_counts: &'a [usize],
    num_seeds: usize,
    neighbors: usize,
    power: f64,
    repetitions: usize,
    order: usize,
}

/// Time fitting and tracing across control-point counts.
///
/// Each measurement excludes a warm-up run and takes the median of
/// `repetitions` (at least 3) timed runs. The particle baseline is measured
/// once on the same seeds and shared by every row's ratio.
pub fn bench_timing(
    set: &PathlineSet,
    control_point_counts: &[usize],
    seeds: &[TraceSeed],
    neighbors: usize,
    power: f64,
    repetitions: usize,
) -> Result<BenchReport> {
    if control_point_counts.len() < 2 {
        return Err(Error::InvalidEval(
            "need at least 2 control point counts to compare".into(),
        ));
    }
    if seeds.is_empty() {
        return Err(Error::InvalidEval("need at least one seed".into()));
    }
    let reps = repetitions.max(3);

    // Particle baseline: warm-up, then timed repetitions.
    let warm = trace_particles(set, seeds, neighbors, power)?;
    let mean_particle_steps =
        warm.iter().map(|t| t.steps_traced).sum::<usize>() as f64 / seeds.len() as f64;
    let particle_trace_seconds = median_of(reps, || {
        let t0 = Instant::now();
        trace_particles(set, seeds, neighbors, power).map(|_| t0.elapsed().as_secs_f64())
    })?;

    let mut entries = Vec::new();
    for &n in control_point_counts {
        let cfg = KnotPlacementConfig::new(n);
        let outcome = fit_all(set, 4, &cfg, crate::bspline::ParamKind::Time)?;
        let fit_seconds = median_of(reps, || {
            let t0 = Instant::now();
            fit_all(set, 4, &cfg, crate::bspline::ParamKind::Time)
                .map(|_| t0.elapsed().as_secs_f64())
        })?;

        let warm = trace_splines(&outcome.set, seeds, neighbors, power)?;
        let mean_spline_iterations =
            warm.iter().map(|t| t.interp_iterations).sum::<usize>() as f64 / seeds.len() as f64;
        let spline_trace_seconds = median_of(reps, || {
            let t0 = Instant::now();
            trace_splines(&outcome.set, seeds, neighbors, power).map(|_| t0.elapsed().as_secs_f64())
        })?;

        entries.push(BenchEntry {
            control_points: n,
            fit_seconds,
            spline_trace_seconds,
            particle_trace_seconds,
            ratio: spline_trace_seconds / particle_trace_seconds,
            mean_spline_iterations,
            mean_particle_steps,
        });
    }

    Ok(BenchReport {
        config: serde_json::to_value(BenchConfigEcho {
            control_point_counts,
            num_seeds: seeds.len(),
            neighbors,
            power,
            repetitions: reps,
            order: 4,
        })
        .expect("config serializes"),
        entries,
    })
}

fn median_of(reps: usize, mut run: impl FnMut() -> Result<f64>) -> Result<f64> {
    let mut samples = Vec::with_capacity(reps);
    for _ in 0..reps {
        samples.push(run()?);
    }
    samples.sort_by(f64::total_cmp);
    Ok(samples[samples.len() / 2])
}

/// Ordinary least squares of `y = a + b x`; returns `(slope, intercept, r²)`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
        syy += (y - mean_y) * (y - mean_y);
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let r2 = if syy > 0.0 {
        sxy * sxy / (sxx * syy)
    } else {
        1.0
    };
    (slope, intercept, r2)
}

/// Serialize any report as pretty JSON.
pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let json = serde_json::to_string_pretty(value)
        .map_err(|e| Error::InvalidEval(format!("serialization failed: {e}")))?;
    std::fs::write(path, json + "\n").map_err(|e| Error::io(path, e))
}

/// Plot-ready CSV of the fitting error series.
pub fn write_fit_rmse_csv(report: &EvalReport, path: &Path) -> Result<()> {
    let mut out = String::from("step,fit_rmse\n");
    for (j, v) in report.fit.per_step_rmse.iter().enumerate() {
        out.push_str(&format!("{j},{v:.17e}\n"));
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Plot-ready CSV of per-step tracing RMSE for both methods and every
/// seed start step.
pub fn write_trace_rmse_csv(report: &EvalReport, path: &Path) -> Result<()> {
    let mut out = String::from("seed_step,step,particle_rmse,spline_rmse\n");
    for eval in &report.tracing {
        let m = eval.particle.per_step_rmse.len();
        for j in 0..m {
            let fmt = |v: &Option<f64>| match v {
                Some(x) => format!("{x:.17e}"),
                None => String::new(),
            };
            out.push_str(&format!(
                "{},{j},{},{}\n",
                eval.seed_step,
                fmt(&eval.particle.per_step_rmse[j]),
                fmt(&eval.spline.per_step_rmse[j]),
            ));
        }
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Plot-ready CSV of the timing table.
pub fn write_bench_csv(report: &BenchReport, path: &Path) -> Result<()> {
    let mut out = String::from(
        "control_points,fit_seconds,spline_trace_seconds,particle_trace_seconds,ratio\n",
    );
    for e in &report.entries {
        out.push_str(&format!(
            "{},{:.6e},{:.6e},{:.6e},{:.4}\n",
            e.control_points,
            e.fit_seconds,
            e.spline_trace_seconds,
            e.particle_trace_seconds,
            e.ratio
        ));
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}
