//! Command-line front end.
//!
//! Batch-oriented: every subcommand computes one dataset and writes it to a
//! file (or stdout) as CSV or JSON, ready for external plotting. Identical
//! configurations produce byte-identical output; the `crlb` subcommand is
//! additionally keyed by its RNG seed.
//!
//! ```text
//! qfiunruh eval  --a 1 --tau 50 --theta 1.5707963 --field em
//! qfiunruh scan  --axis tau:0:15:601 --a 1 --theta 0 --field em -o fig2.csv
//! qfiunruh peaks --axis a:0.001:6:600 --tau 4 --theta 3.14159265 --field em
//! qfiunruh fmax  --axis tau:0.25:30:120 --theta 0 --field em -o fmax.csv
//! qfiunruh crlb  --a 1 --tau 4 --theta 0 --shots 100000 --trials 200 --seed 42
//! ```
//!
//! CSV uses a header row, one grid point per line, LF endings and 17
//! significant digits, so every value re-parses to the exact f64 the library
//! produced. JSON objects use snake_case keys. `--threads` (or the
//! `QFIUNRUH_THREADS` environment variable) caps the worker pool; 0 means
//! automatic.

use crate::analysis::{self, Axis, AxisName, ScanGrid};
use crate::dynamics::{EvolutionParams, InitialState};
use crate::error::Error;
use crate::estimation::simulate_estimation;
use crate::metrology::qfi;
use crate::spectral::{Accel, FieldModel};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

const EXIT_OK: i32 = 0;
const EXIT_VALIDATION: i32 = 2;
const EXIT_OUTPUT: i32 = 3;

/// Parsed command line.
#[derive(Debug, Parser)]
#[command(
    name = "qfiunruh",
    version,
    about = "QFI of acceleration for a uniformly accelerated two-level atom"
)]
pub struct RunConfig {
    #[command(subcommand)]
    command: Command,

    /// Worker threads; 0 = automatic. Falls back to QFIUNRUH_THREADS.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// QFI, branch and Bloch norm at a single parameter point.
    Eval(EvalArgs),
    /// Dense QFI table over one or two axes.
    Scan(ScanArgs),
    /// Extrema of a one-axis QFI curve, refined on the continuous function.
    Peaks(PeaksArgs),
    /// Maximum of the QFI over acceleration for each time on a tau axis.
    Fmax(FmaxArgs),
    /// Monte Carlo Cramér-Rao verification for the SLD measurement.
    Crlb(CrlbArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FieldArg {
    /// Fluctuating vacuum electromagnetic fields.
    Em,
    /// Massless scalar field.
    Scalar,
}

impl From<FieldArg> for FieldModel {
    fn from(f: FieldArg) -> Self {
        match f {
            FieldArg::Em => FieldModel::Electromagnetic,
            FieldArg::Scalar => FieldModel::Scalar,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Output path; stdout when omitted.
    #[arg(short = 'o', long = "output")]
    output: Option<PathBuf>,

    /// Output format (default: json for eval/peaks/crlb, csv for scan/fmax).
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    /// Acceleration in units of c*omega0.
    #[arg(long)]
    a: f64,
    /// Proper time in units of the inverse spontaneous-emission rate.
    #[arg(long)]
    tau: f64,
    /// Initial polar angle in [0, pi].
    #[arg(long)]
    theta: f64,
    /// Initial azimuth in [0, 2 pi); the QFI does not depend on it.
    #[arg(long, default_value_t = 0.0)]
    phi: f64,
    #[arg(long, value_enum, default_value_t = FieldArg::Em)]
    field: FieldArg,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Args)]
struct ScanArgs {
    /// Scan axis as name:min:max:npoints (name in {tau, a, theta});
    /// repeat for a two-axis scan.
    #[arg(long = "axis", value_parser = parse_axis, required = true)]
    axes: Vec<Axis>,
    /// Fixed acceleration for axes that do not scan it.
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    /// Fixed proper time.
    #[arg(long, default_value_t = 0.0)]
    tau: f64,
    /// Fixed initial polar angle.
    #[arg(long, default_value_t = 0.0)]
    theta: f64,
    #[arg(long, value_enum, default_value_t = FieldArg::Em)]
    field: FieldArg,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Args)]
struct PeaksArgs {
    /// The single axis to scan, as name:min:max:npoints.
    #[arg(long = "axis", value_parser = parse_axis, required = true)]
    axes: Vec<Axis>,
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    #[arg(long, default_value_t = 0.0)]
    tau: f64,
    #[arg(long, default_value_t = 0.0)]
    theta: f64,
    #[arg(long, value_enum, default_value_t = FieldArg::Em)]
    field: FieldArg,
    /// Location tolerance of the golden-section refinement.
    #[arg(long, default_value_t = 1e-8)]
    refine_tol: f64,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Args)]
struct FmaxArgs {
    /// Time grid as tau:min:max:npoints.
    #[arg(long = "axis", value_parser = parse_axis, required = true)]
    axes: Vec<Axis>,
    #[arg(long, default_value_t = 0.0)]
    theta: f64,
    /// Lower edge of the acceleration search window.
    #[arg(long, default_value_t = 1e-3)]
    a_min: f64,
    /// Upper edge of the acceleration search window.
    #[arg(long, default_value_t = 6.0)]
    a_max: f64,
    #[arg(long, value_enum, default_value_t = FieldArg::Em)]
    field: FieldArg,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Args)]
struct CrlbArgs {
    #[arg(long)]
    a: f64,
    #[arg(long)]
    tau: f64,
    #[arg(long)]
    theta: f64,
    #[arg(long, value_enum, default_value_t = FieldArg::Em)]
    field: FieldArg,
    /// Measurements per trial.
    #[arg(long, default_value_t = 100_000)]
    shots: u64,
    /// Independent estimation trials.
    #[arg(long, default_value_t = 200)]
    trials: u32,
    /// RNG seed; trials use streams keyed by (seed, trial index).
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[command(flatten)]
    out: OutputArgs,
}

fn parse_axis(s: &str) -> Result<Axis, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 4 {
        return Err(format!("expected name:min:max:npoints, got `{s}`"));
    }
    let name = match parts[0] {
        "tau" => AxisName::Tau,
        "a" => AxisName::A,
        "theta" => AxisName::Theta,
        other => return Err(format!("unknown axis `{other}` (expected tau, a or theta)")),
    };
    let min: f64 = parts[1].parse().map_err(|e| format!("bad min: {e}"))?;
    let max: f64 = parts[2].parse().map_err(|e| format!("bad max: {e}"))?;
    let n_points: usize = parts[3].parse().map_err(|e| format!("bad npoints: {e}"))?;
    Ok(Axis {
        name,
        min,
        max,
        n_points,
    })
}

/// 17 significant digits; round-trips every f64 exactly.
fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Runs the CLI on the given argument list and returns the exit code:
/// 0 success, 2 validation failure, 3 unwritable output.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let config = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };

    if let Err(msg) = init_threads(config.threads) {
        eprintln!("error: {msg}");
        return EXIT_VALIDATION;
    }

    let (payload, out) = match dispatch(&config.command) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_VALIDATION;
        }
    };

    match write_output(out, &payload) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: cannot write output: {e}");
            EXIT_OUTPUT
        }
    }
}

fn init_threads(cli_threads: Option<usize>) -> Result<(), String> {
    let n = match cli_threads {
        Some(n) => n,
        None => match std::env::var("QFIUNRUH_THREADS") {
            Ok(v) => v
                .parse::<usize>()
                .map_err(|_| format!("QFIUNRUH_THREADS must be an integer, got `{v}`"))?,
            Err(_) => return Ok(()),
        },
    };
    if n > 0 {
        // A pool may already exist when `run` is called repeatedly in one
        // process; the first configuration wins.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn dispatch(cmd: &Command) -> crate::Result<(String, &OutputArgs)> {
    match cmd {
        Command::Eval(args) => Ok((run_eval(args)?, &args.out)),
        Command::Scan(args) => Ok((run_scan(args)?, &args.out)),
        Command::Peaks(args) => Ok((run_peaks(args)?, &args.out)),
        Command::Fmax(args) => Ok((run_fmax(args)?, &args.out)),
        Command::Crlb(args) => Ok((run_crlb(args)?, &args.out)),
    }
}

fn format_of(out: &OutputArgs, default: OutputFormat) -> OutputFormat {
    out.format.unwrap_or(default)
}

fn json_line(value: serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(&value).expect("json serialization");
    s.push('\n');
    s
}

fn run_eval(args: &EvalArgs) -> crate::Result<String> {
    let a = Accel::new(args.a)?;
    let field: FieldModel = args.field.into();
    // validate the full state/params even though phi and omega never
    // influence the result
    InitialState::new(args.theta, args.phi)?;
    EvolutionParams::new(args.tau, a, field)?;
    let r = qfi(a, args.tau, args.theta, field)?;

    Ok(match format_of(&args.out, OutputFormat::Json) {
        OutputFormat::Json => json_line(json!({
            "a": args.a,
            "tau": args.tau,
            "theta": args.theta,
            "phi": args.phi,
            "field": field,
            "value": r.value,
            "branch": r.branch,
            "bloch_norm": r.bloch_norm,
        })),
        OutputFormat::Csv => {
            let branch = serde_json::to_value(r.branch).unwrap();
            let field = serde_json::to_value(field).unwrap();
            format!(
                "a,tau,theta,phi,field,F,branch,bloch_norm\n{},{},{},{},{},{},{},{}\n",
                fmt_float(args.a),
                fmt_float(args.tau),
                fmt_float(args.theta),
                fmt_float(args.phi),
                field.as_str().unwrap(),
                fmt_float(r.value),
                branch.as_str().unwrap(),
                fmt_float(r.bloch_norm),
            )
        }
    })
}

fn scan_grid(axes: &[Axis], tau: f64, a: f64, theta: f64, field: FieldArg) -> ScanGrid {
    ScanGrid {
        axes: axes.to_vec(),
        tau,
        a,
        theta,
        field: field.into(),
    }
}

fn run_scan(args: &ScanArgs) -> crate::Result<String> {
    let grid = scan_grid(&args.axes, args.tau, args.a, args.theta, args.field);
    let table = analysis::scan(&grid)?;

    Ok(match format_of(&args.out, OutputFormat::Csv) {
        OutputFormat::Csv => {
            let mut out = String::new();
            for axis in &grid.axes {
                out.push_str(axis.name.label());
                out.push(',');
            }
            out.push_str("F\n");
            for row in &table.rows {
                for c in &row.coords {
                    out.push_str(&fmt_float(*c));
                    out.push(',');
                }
                out.push_str(&fmt_float(row.f));
                out.push('\n');
            }
            out
        }
        OutputFormat::Json => {
            let rows: Vec<serde_json::Value> = table
                .rows
                .iter()
                .map(|row| {
                    let mut obj = serde_json::Map::new();
                    for (axis, c) in grid.axes.iter().zip(&row.coords) {
                        obj.insert(axis.name.label().to_string(), json!(c));
                    }
                    obj.insert("f".into(), json!(row.f));
                    serde_json::Value::Object(obj)
                })
                .collect();
            json_line(json!(rows))
        }
    })
}

fn run_peaks(args: &PeaksArgs) -> crate::Result<String> {
    if args.axes.len() != 1 {
        return Err(Error::Validation(format!(
            "peaks needs exactly one axis, got {}",
            args.axes.len()
        )));
    }
    let grid = scan_grid(&args.axes, args.tau, args.a, args.theta, args.field);
    let table = analysis::scan(&grid)?;
    let report = analysis::find_extrema(&table, args.refine_tol)?;

    Ok(match format_of(&args.out, OutputFormat::Json) {
        OutputFormat::Json => json_line(json!({
            "axis": grid.axes[0].name,
            "extrema": report.extrema,
            "n_local_maxima": report.n_local_maxima,
            "global_max": {
                "location": report.global_max.0,
                "value": report.global_max.1,
            },
        })),
        OutputFormat::Csv => {
            let mut out = String::from("location,value,kind\n");
            for e in &report.extrema {
                let kind = serde_json::to_value(e.kind).unwrap();
                out.push_str(&format!(
                    "{},{},{}\n",
                    fmt_float(e.location),
                    fmt_float(e.value),
                    kind.as_str().unwrap()
                ));
            }
            out
        }
    })
}

fn run_fmax(args: &FmaxArgs) -> crate::Result<String> {
    if args.axes.len() != 1 || args.axes[0].name != AxisName::Tau {
        return Err(Error::Validation(
            "fmax needs exactly one tau axis".into(),
        ));
    }
    let axis = args.axes[0];
    axis_points_validated(&axis)?;
    let taus: Vec<f64> = (0..axis.n_points)
        .map(|i| {
            if i == axis.n_points - 1 {
                axis.max
            } else {
                axis.min + (axis.max - axis.min) * i as f64 / (axis.n_points - 1) as f64
            }
        })
        .collect();
    let curve = analysis::fmax_curve(&taus, args.theta, args.field.into(), (args.a_min, args.a_max))?;

    Ok(match format_of(&args.out, OutputFormat::Csv) {
        OutputFormat::Csv => {
            let mut out = String::from("tau,F_max,a_argmax\n");
            for p in &curve {
                out.push_str(&format!(
                    "{},{},{}\n",
                    fmt_float(p.tau),
                    fmt_float(p.f_max),
                    fmt_float(p.a_argmax)
                ));
            }
            out
        }
        OutputFormat::Json => json_line(serde_json::to_value(&curve).unwrap()),
    })
}

fn axis_points_validated(axis: &Axis) -> crate::Result<()> {
    if axis.n_points < 2 || !(axis.min.is_finite() && axis.max.is_finite()) || axis.min >= axis.max
    {
        return Err(Error::Validation(format!(
            "axis {} invalid: [{}, {}] with {} points",
            axis.name.label(),
            axis.min,
            axis.max,
            axis.n_points
        )));
    }
    Ok(())
}

fn run_crlb(args: &CrlbArgs) -> crate::Result<String> {
    let report = simulate_estimation(
        Accel::new(args.a)?,
        args.tau,
        args.theta,
        args.field.into(),
        args.shots,
        args.trials,
        args.seed,
    )?;

    Ok(match format_of(&args.out, OutputFormat::Json) {
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(&report).expect("json serialization");
            s.push('\n');
            s
        }
        OutputFormat::Csv => format!(
            "a_true,a_hat_mean,a_hat_var,n_shots,n_trials,seed,qfi,crb_product,boundary_hits\n{},{},{},{},{},{},{},{},{}\n",
            fmt_float(report.a_true),
            fmt_float(report.a_hat_mean),
            fmt_float(report.a_hat_var),
            report.n_shots,
            report.n_trials,
            report.seed,
            fmt_float(report.qfi),
            fmt_float(report.crb_product),
            report.boundary_hits,
        ),
    })
}

fn write_output(out: &OutputArgs, payload: &str) -> std::io::Result<()> {
    match &out.output {
        Some(path) => std::fs::write(path, payload.as_bytes()),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(payload.as_bytes())
        }
    }
}
