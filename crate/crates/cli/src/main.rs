//! `levy-fluct`: tables, validation reports and Monte Carlo runs for
//! spectrally negative Lévy models described by a JSON document.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use levy_fluct::excursion::{intensity_table, IntensityTable};
use levy_fluct::fluctuation::{
    creeping_laplace, creeping_probability, h_beta, hitting_laplace, passage_below_laplace, resolvent_density,
    survival_probability,
};
use levy_fluct::montecarlo::{
    estimate_creeping, estimate_passage_below_laplace, estimate_survival, estimate_upcross_laplace, MCConfig,
};
use levy_fluct::scale::ScaleEngine;
use levy_fluct::tolerances::Tolerances;
use levy_fluct::validate::{validate, ValidateOptions, SCHEMA};
use levy_fluct::{LevyError, LevyModel};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "levy-fluct", version, about = "Fluctuation identities for spectrally negative Lévy processes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the invariant suites and write a JSON report.
    Validate(ValidateArgs),
    /// W, Z and W' over a (q, x) grid.
    ScaleTable(ScaleArgs),
    /// Resolvent, passage and creeping quantities over a (q, x) grid.
    FluctTable(FluctArgs),
    /// Excursion intensities, one row per killing rate.
    IntensityTable(IntensityArgs),
    /// One Monte Carlo estimator against its analytic target.
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct Common {
    /// Model document (JSON).
    #[arg(long)]
    model: PathBuf,
    /// Write output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct McArgs {
    /// Monte Carlo configuration document (JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    paths: Option<usize>,
    #[arg(long)]
    dt: Option<f64>,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    mc: McArgs,
    /// Add the Monte Carlo estimator checks.
    #[arg(long)]
    with_mc: bool,
    /// Omit the timestamp so identical runs give identical bytes.
    #[arg(long)]
    deterministic: bool,
    /// Tolerance override, `name=value`; repeatable.
    #[arg(long = "tol", value_name = "NAME=VALUE")]
    tolerances: Vec<String>,
}

#[derive(Args)]
struct ScaleArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    qs: Vec<f64>,
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    xs: Vec<f64>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct FluctArgs {
    #[command(flatten)]
    common: Common,
    /// Killing rates.
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    qs: Vec<f64>,
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    xs: Vec<f64>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct IntensityArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    betas: Vec<f64>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Estimator {
    Upcross,
    Passage,
    Creep,
    Survive,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    mc: McArgs,
    #[arg(long, value_enum)]
    estimator: Estimator,
    /// Estimator parameters as `key=value` pairs: `a`, `q` for upcross,
    /// `x`, `beta` for passage, `x` for creep and survive.
    #[arg(long, value_delimiter = ',')]
    grid: Vec<String>,
}

/// Failures sorted by exit status: usage problems exit 2, numerical ones 1.
enum Failure {
    Usage(String),
    Numeric(String),
}

impl From<LevyError> for Failure {
    fn from(e: LevyError) -> Self {
        match e {
            LevyError::Parse(_)
            | LevyError::BoundedVariation(_)
            | LevyError::BadParameter { .. }
            | LevyError::BadConfig(_) => Failure::Usage(e.to_string()),
            _ => Failure::Numeric(e.to_string()),
        }
    }
}

type Outcome = std::result::Result<bool, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Validate(a) => cmd_validate(a),
        Command::ScaleTable(a) => cmd_scale_table(a),
        Command::FluctTable(a) => cmd_fluct_table(a),
        Command::IntensityTable(a) => cmd_intensity_table(a),
        Command::Simulate(a) => cmd_simulate(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("levy-fluct: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numeric(msg)) => {
            eprintln!("levy-fluct: {msg}");
            ExitCode::from(1)
        }
    }
}

fn read_text(path: &Path) -> std::result::Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn load_model(path: &Path) -> std::result::Result<LevyModel, Failure> {
    let text = read_text(path)?;
    LevyModel::from_json(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn load_mc(args: &McArgs) -> std::result::Result<MCConfig, Failure> {
    let mut cfg = match &args.config {
        Some(path) => MCConfig::from_json(&read_text(path)?)?,
        None => MCConfig::default(),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(paths) = args.paths {
        cfg.paths = paths;
    }
    if let Some(dt) = args.dt {
        cfg.dt = dt;
    }
    Ok(cfg)
}

fn emit(out: Option<&Path>, text: &str) -> std::result::Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Numeric(format!("{}: {e}", path.display()))),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Numeric(format!("stdout: {e}"))),
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("report serialises");
    text.push('\n');
    text
}

fn apply_tolerances(overrides: &[String]) -> std::result::Result<Tolerances, Failure> {
    let mut doc = serde_json::to_value(Tolerances::default()).expect("tolerances serialise");
    for item in overrides {
        let (name, value) = split_pair(item)?;
        let slot = doc
            .get_mut(name)
            .ok_or_else(|| Failure::Usage(format!("unknown tolerance `{name}`")))?;
        *slot = serde_json::json!(value);
    }
    serde_json::from_value(doc).map_err(|e| Failure::Usage(e.to_string()))
}

fn split_pair(item: &str) -> std::result::Result<(&str, f64), Failure> {
    let (k, v) = item
        .split_once('=')
        .ok_or_else(|| Failure::Usage(format!("expected name=value, got `{item}`")))?;
    let v: f64 = v
        .trim()
        .parse()
        .map_err(|_| Failure::Usage(format!("`{item}`: value is not a number")))?;
    Ok((k.trim(), v))
}

fn cmd_validate(args: ValidateArgs) -> Outcome {
    let model = load_model(&args.common.model)?;
    let tolerances = apply_tolerances(&args.tolerances)?;
    let monte_carlo = if args.with_mc {
        let cfg = load_mc(&args.mc)?;
        cfg.check(&model)?;
        Some(cfg)
    } else {
        None
    };
    let report = validate(
        &model,
        &ValidateOptions {
            tolerances,
            monte_carlo,
            deterministic: args.deterministic,
        },
    );
    for (name, check) in report.failures() {
        eprintln!("FAIL {name}: {}", check.context);
    }
    emit(args.common.out.as_deref(), &to_json(&report))?;
    Ok(report.ok())
}

// Empty cell for values undefined at this point of the grid.
fn cell(v: Option<f64>) -> String {
    v.map_or_else(String::new, |v| format!("{v:.17e}"))
}

#[derive(Serialize)]
struct ScaleRow {
    q: f64,
    x: f64,
    w: f64,
    z: f64,
    w_prime: Option<f64>,
    method: String,
    est_error: f64,
}

#[derive(Serialize)]
struct Table<R> {
    schema: &'static str,
    model: serde_json::Value,
    rows: Vec<R>,
}

fn table<R: Serialize>(model: &LevyModel, rows: Vec<R>) -> String {
    to_json(&Table {
        schema: SCHEMA,
        model: serde_json::from_str(&model.to_json()).expect("model document is JSON"),
        rows,
    })
}

fn method_name<T: Serialize>(m: &T) -> String {
    match serde_json::to_value(m) {
        Ok(serde_json::Value::String(s)) => s,
        Ok(other) => other.to_string(),
        Err(_) => String::new(),
    }
}

fn check_grid(name: &str, values: &[f64], min: f64) -> std::result::Result<(), Failure> {
    match values.iter().find(|v| !(v.is_finite() && **v >= min)) {
        Some(v) => Err(Failure::Usage(format!("--{name}: {v} is out of range (need finite >= {min})"))),
        None => Ok(()),
    }
}

fn cmd_scale_table(args: ScaleArgs) -> Outcome {
    let model = load_model(&args.common.model)?;
    check_grid("qs", &args.qs, 0.0)?;
    let engine = ScaleEngine::new(model);
    let mut rows = Vec::new();
    for &q in &args.qs {
        for &x in &args.xs {
            let w = engine.w_eval(q, x)?;
            let z = engine.z(q, x)?;
            // W' only exists on the open half-line
            let w_prime = if x > 0.0 { Some(engine.w_prime(q, x)?) } else { None };
            rows.push(ScaleRow {
                q,
                x,
                w: w.value,
                z,
                w_prime,
                method: method_name(&w.method),
                est_error: w.est_error,
            });
        }
    }
    let text = match args.format {
        Format::Json => table(&model, rows),
        Format::Csv => {
            let mut s = String::from("q,x,W,Z,Wprime,method,est_error\n");
            for r in &rows {
                let _ = writeln!(
                    s,
                    "{},{},{:.17e},{:.17e},{},{},{:.3e}",
                    r.q,
                    r.x,
                    r.w,
                    r.z,
                    cell(r.w_prime),
                    r.method,
                    r.est_error
                );
            }
            s
        }
    };
    emit(args.common.out.as_deref(), &text)?;
    Ok(true)
}

#[derive(Serialize)]
struct FluctRow {
    q: f64,
    x: f64,
    /// `u_q(x)`
    resolvent: f64,
    /// `h_q(x)`
    h: f64,
    /// `E_x[e^{-qT_0}]`
    hitting: f64,
    /// `E_x[e^{-qτ_0^-}]`, for `x > 0`
    passage_below: Option<f64>,
    creeping_laplace: Option<f64>,
    creeping: Option<f64>,
    survival: Option<f64>,
}

fn cmd_fluct_table(args: FluctArgs) -> Outcome {
    let model = load_model(&args.common.model)?;
    check_grid("qs", &args.qs, 0.0)?;
    if let Some(q) = args.qs.iter().find(|q| **q == 0.0) {
        return Err(Failure::Usage(format!("--qs: killing rates must be positive, got {q}")));
    }
    let engine = ScaleEngine::new(model);
    let mut rows = Vec::new();
    for &q in &args.qs {
        for &x in &args.xs {
            let positive = x > 0.0;
            let on_half_line = |f: &dyn Fn() -> levy_fluct::Result<f64>| -> std::result::Result<Option<f64>, Failure> {
                if positive {
                    Ok(Some(f()?))
                } else {
                    Ok(None)
                }
            };
            rows.push(FluctRow {
                q,
                x,
                resolvent: resolvent_density(&engine, q, x)?,
                h: h_beta(&engine, q, x)?,
                hitting: hitting_laplace(&engine, q, x)?,
                passage_below: on_half_line(&|| passage_below_laplace(&engine, q, x))?,
                creeping_laplace: on_half_line(&|| creeping_laplace(&engine, q, x))?,
                creeping: on_half_line(&|| creeping_probability(&engine, x))?,
                survival: on_half_line(&|| survival_probability(&engine, x))?,
            });
        }
    }
    let text = match args.format {
        Format::Json => table(&model, rows),
        Format::Csv => {
            let mut s = String::from("q,x,u,h,hitting,passage_below,creeping_laplace,creeping,survival\n");
            for r in &rows {
                let _ = writeln!(
                    s,
                    "{},{},{:.17e},{:.17e},{:.17e},{},{},{},{}",
                    r.q,
                    r.x,
                    r.resolvent,
                    r.h,
                    r.hitting,
                    cell(r.passage_below),
                    cell(r.creeping_laplace),
                    cell(r.creeping),
                    cell(r.survival)
                );
            }
            s
        }
    };
    emit(args.common.out.as_deref(), &text)?;
    Ok(true)
}

#[derive(Serialize)]
struct IntensityRow {
    #[serde(flatten)]
    table: IntensityTable,
    negative_start_total: f64,
    relative_residual: f64,
    within_tolerance: bool,
}

fn cmd_intensity_table(args: IntensityArgs) -> Outcome {
    let model = load_model(&args.common.model)?;
    if let Some(b) = args.betas.iter().find(|b| !(b.is_finite() && **b > 0.0)) {
        return Err(Failure::Usage(format!("--betas: killing rates must be positive, got {b}")));
    }
    let engine = ScaleEngine::new(model);
    let tol = Tolerances::default().partition;
    let mut rows = Vec::new();
    for &beta in &args.betas {
        let t = intensity_table(&engine, beta)?;
        rows.push(IntensityRow {
            negative_start_total: t.negative_start_total(),
            relative_residual: t.relative_residual(),
            within_tolerance: t.relative_residual() <= tol,
            table: t,
        });
    }
    let ok = rows.iter().all(|r| r.within_tolerance);
    let text = match args.format {
        Format::Json => table(&model, rows),
        Format::Csv => {
            let mut s = String::from(
                "beta,total,upper_creep,stay_positive_forever,cross_before,negative_start_finite,\
                 negative_start_infinite,negative_start_total,cross_after,residual\n",
            );
            for r in &rows {
                let t = &r.table;
                let _ = writeln!(
                    s,
                    "{},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.3e}",
                    t.beta,
                    t.total,
                    t.upper_creep,
                    t.stay_positive_forever,
                    t.cross_before,
                    t.negative_start_finite,
                    t.negative_start_infinite,
                    r.negative_start_total,
                    t.cross_after,
                    t.residual
                );
            }
            s
        }
    };
    emit(args.common.out.as_deref(), &text)?;
    Ok(ok)
}

#[derive(Serialize)]
struct SimulateReport {
    schema: &'static str,
    estimator: &'static str,
    params: serde_json::Map<String, serde_json::Value>,
    estimate: f64,
    stderr: f64,
    target: Option<f64>,
    zscore: Option<f64>,
    crossings: usize,
    dt: f64,
    paths: usize,
    seed: u64,
}

fn cmd_simulate(args: SimulateArgs) -> Outcome {
    let model = load_model(&args.common.model)?;
    let cfg = load_mc(&args.mc)?;
    cfg.check(&model)?;
    let mut params = serde_json::Map::new();
    for item in &args.grid {
        let (k, v) = split_pair(item)?;
        params.insert(k.to_string(), serde_json::json!(v));
    }
    let (name, allowed, defaults): (&str, &[&str], &[(&str, f64)]) = match args.estimator {
        Estimator::Upcross => ("upcross", &["a", "q"], &[("a", 1.0), ("q", 1.0)]),
        Estimator::Passage => ("passage", &["x", "beta"], &[("x", 1.0), ("beta", 1.0)]),
        Estimator::Creep => ("creep", &["x"], &[("x", 1.0)]),
        Estimator::Survive => ("survive", &["x"], &[("x", 1.0)]),
    };
    if let Some(k) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(Failure::Usage(format!("--grid: `{k}` is not a parameter of {name}")));
    }
    for (k, v) in defaults {
        params.entry(k.to_string()).or_insert(serde_json::json!(v));
    }
    let get = |k: &str| params[k].as_f64().expect("numeric parameter");
    let estimate = match args.estimator {
        Estimator::Upcross => estimate_upcross_laplace(&model, &cfg, get("a"), get("q")),
        Estimator::Passage => estimate_passage_below_laplace(&model, &cfg, get("x"), get("beta")),
        Estimator::Creep => estimate_creeping(&model, &cfg, get("x")),
        Estimator::Survive => estimate_survival(&model, &cfg, get("x")),
    }
    .map_err(|e| match e {
        LevyError::WrongRegime(_) => Failure::Usage(e.to_string()),
        other => other.into(),
    })?;
    let report = SimulateReport {
        schema: SCHEMA,
        estimator: name,
        params,
        estimate: estimate.mean,
        stderr: estimate.stderr,
        target: estimate.analytic_target,
        zscore: estimate.z_score,
        crossings: estimate.crossings,
        dt: cfg.dt,
        paths: cfg.paths,
        seed: cfg.seed,
    };
    emit(args.common.out.as_deref(), &to_json(&report))?;
    Ok(true)
}
