//! Command-line driver: generate synthetic pathline datasets, fit B-spline
//! sets, trace new pathlines with either method, and run the evaluation and
//! timing experiments. Every artifact gets a `<file>.meta.json` sidecar
//! echoing the producing command so runs can be reproduced.

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use splinetrace::bspline::io::{read_spl1, write_spl1, write_spline_set};
use splinetrace::bspline::{fit_all, KnotPlacementConfig, ParamKind, SplineSet};
use splinetrace::eval::{
    bench_timing, eval_tracing, write_bench_csv, write_fit_rmse_csv, write_json,
    write_trace_rmse_csv, TraceEvalConfig,
};
use splinetrace::flowdata::io::{read_pln1_header, PLN1_MAGIC};
use splinetrace::flowdata::{
    generate_pathlines, read_pathlines, write_pathlines, FileFormat, FlowFieldSpec, PathlineSet,
};
use splinetrace::tracer::{trace_particle, trace_spline, Direction, TraceSeed};
use splinetrace::{Aabb, Vec3};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser, Debug, Serialize)]
#[command(
    name = "splinetrace",
    version,
    about = "Fit B-spline curves to particle trajectories and trace new pathlines in control-point space"
)]
struct Cli {
    /// Worker threads for fitting and generation (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Log filter (error, warn, info, debug, trace).
    #[arg(long, global = true, default_value = "warn")]
    log_level: String,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
enum Command {
    /// Generate pathlines by RK4 integration of a synthetic flow field.
    Gen(GenArgs),
    /// Fit one B-spline curve per pathline.
    Fit(FitArgs),
    /// Trace a new pathline from a seed point.
    Trace(TraceArgs),
    /// Hold out test pathlines and compare both tracing methods.
    Eval(EvalArgs),
    /// Timing table over control-point counts.
    Bench(BenchArgs),
    /// Describe a PLN1 or SPL1 file.
    Info(InfoArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize)]
enum FlowArg {
    #[value(name = "double-gyre")]
    DoubleGyre,
    Abc,
    Uniform,
}

#[derive(Args, Debug, Serialize)]
struct GenArgs {
    /// Flow field to integrate.
    #[arg(long, value_enum)]
    flow: FlowArg,
    /// Number of pathlines to seed.
    #[arg(long)]
    pathlines: usize,
    /// Number of output time steps.
    #[arg(long)]
    steps: usize,
    /// RK4 sub-intervals per output step.
    #[arg(long, default_value_t = 1)]
    substeps: usize,
    /// RNG seed for the uniform seeding sampler.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; `.csv` writes CSV, anything else the PLN1 binary.
    #[arg(long)]
    out: PathBuf,
    /// Override a named flow parameter, e.g. `--param a=0.2` (repeatable).
    #[arg(long = "param", value_name = "KEY=VALUE")]
    params: Vec<String>,
    /// Physical time span as `start,end`.
    #[arg(long, value_name = "T0,T1")]
    time_span: Option<String>,
    /// Seeding/clamping box as `x0,y0,z0,x1,y1,z1`.
    #[arg(long, value_name = "6 FLOATS")]
    domain: Option<String>,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize)]
enum ParamArg {
    Time,
    #[value(name = "chord4d")]
    Chord4d,
}

#[derive(Args, Debug, Serialize)]
struct FitArgs {
    /// Input pathline file (.csv or PLN1).
    #[arg(long = "in")]
    input: PathBuf,
    /// Output SPL1 file.
    #[arg(long)]
    out: PathBuf,
    /// Number of control points per curve.
    #[arg(long)]
    control_points: usize,
    /// Spline order k (degree k-1).
    #[arg(long, default_value_t = 4)]
    order: usize,
    /// Parameterization: time (3D curves) or chord4d (4D space-time).
    #[arg(long, value_enum, default_value = "time")]
    param: ParamArg,
    /// Half-width of the knot-placement feature smoothing window.
    #[arg(long, default_value_t = 2)]
    smooth_width: usize,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize)]
enum MethodArg {
    Particle,
    Spline,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize)]
enum DirectionArg {
    Forward,
    Backward,
    Both,
}

impl From<DirectionArg> for Direction {
    fn from(d: DirectionArg) -> Direction {
        match d {
            DirectionArg::Forward => Direction::Forward,
            DirectionArg::Backward => Direction::Backward,
            DirectionArg::Both => Direction::Both,
        }
    }
}

#[derive(Args, Debug, Serialize)]
struct TraceArgs {
    /// particle: trace over raw pathlines; spline: over fitted curves.
    #[arg(long, value_enum)]
    method: MethodArg,
    /// Input file: pathlines for `particle`, SPL1 curves for `spline`.
    #[arg(long = "in")]
    input: PathBuf,
    /// Seed as `tau,x,y,z` (tau in physical time units).
    #[arg(long)]
    seed: String,
    #[arg(long, default_value_t = splinetrace::neighbors::DEFAULT_NEIGHBORS)]
    neighbors: usize,
    #[arg(long, default_value_t = splinetrace::neighbors::DEFAULT_IDW_POWER)]
    power: f64,
    #[arg(long, value_enum, default_value = "both")]
    direction: DirectionArg,
    /// Traced output: CSV positions for `particle`, SPL1 for `spline`.
    #[arg(long)]
    out: PathBuf,
    /// Also sample the traced spline at the dataset steps into a CSV.
    #[arg(long)]
    samples_out: Option<PathBuf>,
    /// Time steps of the spline input's source dataset (read from the
    /// input's sidecar when omitted).
    #[arg(long)]
    steps: Option<usize>,
}

#[derive(Args, Debug, Serialize)]
struct EvalArgs {
    /// Ground-truth pathline file.
    #[arg(long)]
    pathlines: PathBuf,
    /// Fitted SPL1 file for the same dataset.
    #[arg(long)]
    splines: PathBuf,
    /// Fraction of pathlines held out as test seeds.
    #[arg(long, default_value_t = 0.25)]
    test_frac: f64,
    /// Comma list of seed start steps; `half` means the middle step.
    #[arg(long, default_value = "0,half")]
    seed_steps: String,
    #[arg(long, default_value_t = splinetrace::neighbors::DEFAULT_NEIGHBORS)]
    neighbors: usize,
    #[arg(long, default_value_t = splinetrace::neighbors::DEFAULT_IDW_POWER)]
    power: f64,
    /// RNG seed for the train/test split.
    #[arg(long, default_value_t = 0)]
    split_seed: u64,
    /// JSON report path.
    #[arg(long)]
    report: PathBuf,
    /// Directory for plot-ready CSV series (optional).
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Only evaluate fitting accuracy (works for 4D chord-length curve
    /// sets, which cannot be traced).
    #[arg(long)]
    fit_only: bool,
}

#[derive(Args, Debug, Serialize)]
struct BenchArgs {
    /// Ground-truth pathline file.
    #[arg(long)]
    pathlines: PathBuf,
    /// Comma list of control point counts, e.g. `10,25,50,100`.
    #[arg(long)]
    cp: String,
    /// Number of trace seeds (positions of evenly strided pathlines).
    #[arg(long, default_value_t = 50)]
    seeds: usize,
    /// Seed start step; `half` means the middle step.
    #[arg(long, default_value = "half")]
    seed_step: String,
    #[arg(long, default_value_t = splinetrace::neighbors::DEFAULT_NEIGHBORS)]
    neighbors: usize,
    #[arg(long, default_value_t = splinetrace::neighbors::DEFAULT_IDW_POWER)]
    power: f64,
    /// Timed repetitions per measurement (median taken, minimum 3).
    #[arg(long, default_value_t = 3)]
    reps: usize,
    /// JSON report path.
    #[arg(long)]
    report: PathBuf,
    /// CSV table path (optional).
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct InfoArgs {
    file: PathBuf,
}

/// Anything that should abort with a data-error exit code.
type CliError = Box<dyn std::error::Error>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version are successful outputs; anything else is a
            // usage error.
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };

    env_logger::Builder::new()
        .parse_filters(&cli.log_level)
        .init();

    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            log::warn!("thread pool already initialized: {e}");
        }
    }

    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Gen(args) => run_gen(cli, args),
        Command::Fit(args) => run_fit(cli, args),
        Command::Trace(args) => run_trace(cli, args),
        Command::Eval(args) => run_eval(cli, args),
        Command::Bench(args) => run_bench(cli, args),
        Command::Info(args) => run_info(args),
    }
}

/// Sidecar written next to every binary artifact: the producing command and
/// enough dataset metadata to reinterpret the file.
#[derive(Debug, Serialize, Deserialize)]
struct MetaSidecar {
    tool: String,
    version: String,
    command: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    dataset: Option<DatasetMeta>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct DatasetMeta {
    num_pathlines: usize,
    num_timesteps: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    fit_seconds: Option<f64>,
}

fn sidecar_path(artifact: &Path) -> PathBuf {
    let mut name = artifact.file_name().unwrap_or_default().to_os_string();
    name.push(".meta.json");
    artifact.with_file_name(name)
}

fn write_sidecar(artifact: &Path, cli: &Cli, dataset: Option<DatasetMeta>) -> Result<(), CliError> {
    let meta = MetaSidecar {
        tool: "splinetrace".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: serde_json::to_value(cli)?,
        dataset,
    };
    write_json(&meta, &sidecar_path(artifact))?;
    Ok(())
}

fn read_sidecar(artifact: &Path) -> Option<MetaSidecar> {
    let text = std::fs::read_to_string(sidecar_path(artifact)).ok()?;
    serde_json::from_str(&text).ok()
}

fn parse_floats(text: &str, expect: usize, what: &str) -> Result<Vec<f64>, CliError> {
    let vals: Result<Vec<f64>, _> = text.split(',').map(|v| v.trim().parse()).collect();
    let vals = vals.map_err(|e| format!("cannot parse {what} '{text}': {e}"))?;
    if vals.len() != expect {
        return Err(format!(
            "{what} needs {expect} comma-separated values, got {}",
            vals.len()
        )
        .into());
    }
    Ok(vals)
}

fn run_gen(cli: &Cli, args: &GenArgs) -> Result<(), CliError> {
    let mut spec = match args.flow {
        FlowArg::DoubleGyre => FlowFieldSpec::double_gyre_default(),
        FlowArg::Abc => FlowFieldSpec::abc_flow_default(),
        FlowArg::Uniform => FlowFieldSpec::uniform_translation(Vec3::new(1.0, 0.0, 0.0)),
    };
    for kv in &args.params {
        let (key, value) = kv
            .split_once('=')
            .ok_or_else(|| format!("--param '{kv}' is not KEY=VALUE"))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|e| format!("--param '{kv}': {e}"))?;
        spec.parameters.insert(key.trim().to_string(), value);
    }
    if let Some(span) = &args.time_span {
        let v = parse_floats(span, 2, "--time-span")?;
        spec.time_span = (v[0], v[1]);
    }
    if let Some(domain) = &args.domain {
        let v = parse_floats(domain, 6, "--domain")?;
        spec.domain = Aabb::new(Vec3::new(v[0], v[1], v[2]), Vec3::new(v[3], v[4], v[5]));
    }

    let set = generate_pathlines(&spec, args.pathlines, args.steps, args.substeps, args.seed)?;
    let format = FileFormat::from_path(&args.out);
    write_pathlines(&set, &args.out, format)?;
    write_sidecar(
        &args.out,
        cli,
        Some(DatasetMeta {
            num_pathlines: set.num_pathlines(),
            num_timesteps: set.num_timesteps(),
            fit_seconds: None,
        }),
    )?;
    let clamped = set.clamped_pathlines().len();
    if clamped > 0 {
        eprintln!("note: {clamped} pathlines were clamped to the domain boundary");
    }
    println!(
        "wrote {} pathlines x {} steps to {}",
        set.num_pathlines(),
        set.num_timesteps(),
        args.out.display()
    );
    Ok(())
}

fn load_pathlines(path: &Path) -> Result<PathlineSet, CliError> {
    Ok(read_pathlines(path, FileFormat::from_path(path))?)
}

fn run_fit(cli: &Cli, args: &FitArgs) -> Result<(), CliError> {
    let set = load_pathlines(&args.input)?;
    let kind = match args.param {
        ParamArg::Time => ParamKind::Time,
        ParamArg::Chord4d => ParamKind::ChordLength4D,
    };
    let mut config = KnotPlacementConfig::new(args.control_points);
    config.feature_smoothing_width = args.smooth_width;
    let outcome = fit_all(&set, args.order, &config, kind)?;
    write_spline_set(&outcome.set, &args.out)?;
    write_sidecar(
        &args.out,
        cli,
        Some(DatasetMeta {
            num_pathlines: set.num_pathlines(),
            num_timesteps: set.num_timesteps(),
            fit_seconds: Some(outcome.fit_seconds),
        }),
    )?;
    let mean_rmse =
        outcome.per_curve_rmse.iter().sum::<f64>() / outcome.per_curve_rmse.len() as f64;
    println!(
        "fitted {} curves (order {}, {} control points) in {:.3}s; mean per-curve rmse {:.3e}",
        outcome.set.len(),
        args.order,
        args.control_points,
        outcome.fit_seconds,
        mean_rmse
    );
    Ok(())
}

/// Reassemble a spline set from an SPL1 file plus its dataset metadata.
fn load_spline_set(path: &Path, steps_flag: Option<usize>) -> Result<SplineSet, CliError> {
    let file = read_spl1(path)?;
    let steps = steps_flag
        .or_else(|| {
            read_sidecar(path)
                .and_then(|m| m.dataset)
                .map(|d| d.num_timesteps)
        })
        .ok_or_else(|| {
            format!(
                "{}: no `{}` sidecar found; pass --steps to supply the source dataset's step count",
                path.display(),
                sidecar_path(path).display()
            )
        })?;
    Ok(file.into_spline_set(PathlineSet::identity_times(steps))?)
}

fn run_trace(cli: &Cli, args: &TraceArgs) -> Result<(), CliError> {
    let vals = parse_floats(&args.seed, 4, "--seed")?;
    let seed = TraceSeed::at_time(
        vals[0],
        Vec3::new(vals[1], vals[2], vals[3]),
        args.direction.into(),
    );

    match args.method {
        MethodArg::Particle => {
            let set = load_pathlines(&args.input)?;
            let traced = trace_particle(&set, &seed, args.neighbors, args.power)?;
            // Single-pathline CSV of the covered steps.
            let mut out = String::from("pathline_id,step,x,y,z\n");
            for (offset, p) in traced.positions.iter().enumerate() {
                let step = traced.start_step + offset;
                let _ = writeln!(out, "0,{step},{:.16e},{:.16e},{:.16e}", p.x, p.y, p.z);
            }
            std::fs::write(&args.out, out)?;
            write_sidecar(&args.out, cli, None)?;
            println!(
                "traced steps {}..={} ({} displacement steps) to {}",
                traced.start_step,
                traced.last_step(),
                traced.steps_traced,
                args.out.display()
            );
        }
        MethodArg::Spline => {
            let set = load_spline_set(&args.input, args.steps)?;
            let traced = trace_spline(&set, &seed, args.neighbors, args.power)?;
            let flat: Vec<f64> = traced
                .control_points
                .iter()
                .flat_map(|p| p.to_array())
                .collect();
            write_spl1(
                &args.out,
                traced.order,
                3,
                [(traced.knots.as_slice(), flat.as_slice())],
            )?;
            write_sidecar(&args.out, cli, None)?;
            if let Some(samples_out) = &args.samples_out {
                let mut out = String::from("step,time,x,y,z\n");
                for (step, p) in traced.sample_at_steps(set.times()) {
                    let _ = writeln!(
                        out,
                        "{step},{:.16e},{:.16e},{:.16e},{:.16e}",
                        set.times()[step],
                        p.x,
                        p.y,
                        p.z
                    );
                }
                std::fs::write(samples_out, out)?;
            }
            println!(
                "traced spline with {} control points ({} interpolation iterations, {} knot repairs) to {}",
                traced.num_control_points(),
                traced.interp_iterations,
                traced.knot_repairs,
                args.out.display()
            );
        }
    }
    Ok(())
}

fn parse_step(token: &str, num_timesteps: usize) -> Result<usize, CliError> {
    let token = token.trim();
    if token.eq_ignore_ascii_case("half") {
        return Ok(num_timesteps / 2);
    }
    let step: usize = token
        .parse()
        .map_err(|e| format!("cannot parse step '{token}': {e}"))?;
    Ok(step)
}

fn run_eval(cli: &Cli, args: &EvalArgs) -> Result<(), CliError> {
    let set = load_pathlines(&args.pathlines)?;
    let spl_file = read_spl1(&args.splines)?;
    let splines = spl_file.into_spline_set(set.times().to_vec())?;

    if args.fit_only {
        #[derive(Serialize)]
        struct FitOnlyReport {
            config: serde_json::Value,
            data_range_diagonal: f64,
            fit: splinetrace::eval::FitEvalSeries,
        }
        let fit = splinetrace::eval::eval_fitting(&set, &splines)?;
        println!(
            "fit rmse {:.4e} ({:.6}% of the data range) over {} curves",
            fit.aggregate_rmse,
            fit.rmse_pct_of_range,
            splines.len()
        );
        let report = FitOnlyReport {
            config: serde_json::to_value(cli)?,
            data_range_diagonal: set.bounds().diagonal(),
            fit,
        };
        if let Some(parent) = args.report.parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent)?;
            }
        }
        write_json(&report, &args.report)?;
        return Ok(());
    }

    let seed_steps = args
        .seed_steps
        .split(',')
        .map(|t| parse_step(t, set.num_timesteps()))
        .collect::<Result<Vec<_>, _>>()?;
    let cfg = TraceEvalConfig {
        test_fraction: args.test_frac,
        seed_steps,
        neighbors: args.neighbors,
        power: args.power,
        split_seed: args.split_seed,
    };
    let mut report = eval_tracing(&set, &splines, &cfg)?;
    report.config = serde_json::to_value(cli)?;
    report.fit_seconds = read_sidecar(&args.splines)
        .and_then(|m| m.dataset)
        .and_then(|d| d.fit_seconds);

    if let Some(parent) = args.report.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    write_json(&report, &args.report)?;
    if let Some(dir) = &args.csv {
        std::fs::create_dir_all(dir)?;
        write_fit_rmse_csv(&report, &dir.join("fit_rmse.csv"))?;
        write_trace_rmse_csv(&report, &dir.join("trace_rmse.csv"))?;
    }

    println!(
        "evaluated {} held-out seeds from {} start steps; report at {}",
        report.test_pathlines.len(),
        report.tracing.len(),
        args.report.display()
    );
    for eval in &report.tracing {
        println!(
            "  seed step {:>4}: particle rmse {:.4e} ({:.3}s), spline rmse {:.4e} ({:.3}s)",
            eval.seed_step,
            eval.particle.aggregate_rmse,
            eval.particle.trace_seconds,
            eval.spline.aggregate_rmse,
            eval.spline.trace_seconds
        );
    }
    Ok(())
}

fn run_bench(cli: &Cli, args: &BenchArgs) -> Result<(), CliError> {
    let set = load_pathlines(&args.pathlines)?;
    let counts = args
        .cp
        .split(',')
        .map(|t| t.trim().parse::<usize>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| format!("cannot parse --cp '{}': {e}", args.cp))?;
    let seed_step = parse_step(&args.seed_step, set.num_timesteps())?;
    let stride = (set.num_pathlines() / args.seeds.max(1)).max(1);
    let seeds: Vec<TraceSeed> = (0..set.num_pathlines())
        .step_by(stride)
        .take(args.seeds)
        .map(|i| TraceSeed::at_step(seed_step, set.position(i, seed_step), Direction::Both))
        .collect();

    let mut report = bench_timing(&set, &counts, &seeds, args.neighbors, args.power, args.reps)?;
    report.config = serde_json::to_value(cli)?;
    if let Some(parent) = args.report.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    write_json(&report, &args.report)?;
    if let Some(csv) = &args.csv {
        write_bench_csv(&report, csv)?;
    }

    println!("control_points  fit_s     spline_trace_s  particle_trace_s  ratio");
    for e in &report.entries {
        println!(
            "{:>14}  {:<8.3}  {:<14.4}  {:<16.4}  {:.4}",
            e.control_points,
            e.fit_seconds,
            e.spline_trace_seconds,
            e.particle_trace_seconds,
            e.ratio
        );
    }
    Ok(())
}

fn run_info(args: &InfoArgs) -> Result<(), CliError> {
    let bytes = std::fs::read(&args.file)?;
    if bytes.len() >= 4 && &bytes[0..4] == PLN1_MAGIC {
        let header = read_pln1_header(&args.file, &bytes)?;
        let set = load_pathlines(&args.file)?;
        let b = set.bounds();
        println!("format: PLN1 pathline set");
        println!("pathlines: {}", header.num_pathlines);
        println!("timesteps: {}", header.num_timesteps);
        println!(
            "bounds: [{:.6}, {:.6}, {:.6}] .. [{:.6}, {:.6}, {:.6}]",
            b.min.x, b.min.y, b.min.z, b.max.x, b.max.y, b.max.z
        );
        return Ok(());
    }
    if bytes.len() >= 4 && &bytes[0..4] == splinetrace::bspline::io::SPL1_MAGIC {
        let file = read_spl1(&args.file)?;
        let mut bounds = Aabb::empty();
        for c in &file.curves {
            for p in c.control_points.chunks(file.dim) {
                bounds.include(Vec3::new(p[0], p[1], p[2]));
            }
        }
        println!("format: SPL1 spline set");
        println!("curves: {}", file.curves.len());
        println!("order: {}", file.order);
        println!("dim: {}", file.dim);
        if let Some(first) = file.curves.first() {
            println!(
                "control points per curve: {}",
                first.control_points.len() / file.dim
            );
        }
        println!(
            "control-point bounds: [{:.6}, {:.6}, {:.6}] .. [{:.6}, {:.6}, {:.6}]",
            bounds.min.x, bounds.min.y, bounds.min.z, bounds.max.x, bounds.max.y, bounds.max.z
        );
        return Ok(());
    }
    // CSV fallback.
    if args.file.extension().and_then(|e| e.to_str()) == Some("csv") {
        let set = load_pathlines(&args.file)?;
        let b = set.bounds();
        println!("format: CSV pathline set");
        println!("pathlines: {}", set.num_pathlines());
        println!("timesteps: {}", set.num_timesteps());
        println!(
            "bounds: [{:.6}, {:.6}, {:.6}] .. [{:.6}, {:.6}, {:.6}]",
            b.min.x, b.min.y, b.min.z, b.max.x, b.max.y, b.max.z
        );
        return Ok(());
    }
    Err(format!("{}: unrecognized file format", args.file.display()).into())
}
