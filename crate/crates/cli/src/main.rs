use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use feedsim::gcode::{parse_program, ParseError};
use feedsim::pipeline::{simulate, SimulationError};
use feedsim::report::{self, ReportError};
use feedsim::{corpus, FilterCount, Program, ProgramConfig};

#[derive(Parser)]
#[command(name = "feedsim", version, about = "Predict feed, kinematics and cycle time of linear-move part programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a program and report its cycle time.
    Predict(PredictArgs),
    /// Tabulate the largest cornering feed against corner angle.
    LimitCurves(LimitArgs),
    /// Cycle time of one program under several tolerances.
    Compare(CompareArgs),
    /// Write a synthetic test program to standard output.
    Generate(GenerateArgs),
}

#[derive(Args, Clone)]
struct MachineArgs {
    /// Number of cascaded filters (2 or 3).
    #[arg(long, default_value_t = 3)]
    filters: usize,
    /// Maximum jerk (mm/s^3).
    #[arg(long, default_value_t = 5000.0)]
    jmax: f64,
    /// Sample time (s).
    #[arg(long, default_value_t = 0.001)]
    ts: f64,
    /// Feed for moves before the first F word (mm/min).
    #[arg(long)]
    feed: Option<f64>,
    /// Rapid (G00) feed (mm/min).
    #[arg(long, default_value_t = 10000.0)]
    rapid: f64,
    /// Feed override factor in (0, 2].
    #[arg(long = "override", default_value_t = 1.0)]
    feed_override: f64,
}

#[derive(Args)]
struct PredictArgs {
    program: PathBuf,
    #[command(flatten)]
    machine: MachineArgs,
    /// Corner tolerance (mm); overrides a (TOL ...) line in the program.
    #[arg(long)]
    tol: Option<f64>,
    /// Write the sampled kinematics as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Write the run summary as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Write the per-block and per-junction plan as JSON.
    #[arg(long)]
    plan: Option<PathBuf>,
}

#[derive(Args)]
struct LimitArgs {
    /// Programmed feed (mm/min).
    #[arg(long, default_value_t = 2000.0)]
    feed: f64,
    /// Maximum jerk (mm/s^3).
    #[arg(long, default_value_t = 5000.0)]
    jmax: f64,
    /// Tolerances (mm).
    #[arg(long = "tol", required = true, num_args = 1..)]
    tolerances: Vec<f64>,
    /// Filter counts to tabulate.
    #[arg(long, num_args = 1.., default_values_t = [2usize, 3])]
    filters: Vec<usize>,
    #[arg(long, default_value_t = 10.0)]
    theta_min: f64,
    #[arg(long, default_value_t = 180.0)]
    theta_max: f64,
    #[arg(long, default_value_t = 1.0)]
    theta_step: f64,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    program: PathBuf,
    #[command(flatten)]
    machine: MachineArgs,
    /// Tolerances (mm).
    #[arg(long = "tol", required = true, num_args = 1..)]
    tolerances: Vec<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Shape {
    Square,
    Pocket,
    Zigzag,
    Trochoid,
    Straight,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(value_enum)]
    shape: Shape,
    /// Feed (mm/min).
    #[arg(long, default_value_t = 2000.0)]
    feed: f64,
    /// Overall size (mm): side, width or length.
    #[arg(long, default_value_t = 40.0)]
    size: f64,
    /// Stepover, or trochoid pitch (mm).
    #[arg(long, default_value_t = 5.0)]
    step: f64,
    /// Trochoid loop radius (mm).
    #[arg(long, default_value_t = 4.0)]
    radius: f64,
    /// Points per trochoid loop, or pieces of a straight line.
    #[arg(long, default_value_t = 24)]
    points: usize,
}

#[derive(Debug)]
enum CliError {
    Parse(String),
    Config(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Config(_) => 3,
            CliError::Io(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Parse(m) | CliError::Config(m) | CliError::Io(m) => m,
        }
    }
}

impl From<SimulationError> for CliError {
    fn from(e: SimulationError) -> Self {
        if e.is_config() {
            CliError::Config(e.to_string())
        } else {
            CliError::Parse(e.to_string())
        }
    }
}

impl From<ReportError> for CliError {
    fn from(e: ReportError) -> Self {
        match e {
            ReportError::Simulation(s) => s.into(),
            ReportError::Grid(_) | ReportError::Kinematics(_) => CliError::Config(e.to_string()),
            _ => CliError::Io(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Predict(a) => predict(a),
        Command::LimitCurves(a) => limit_curves(a),
        Command::Compare(a) => compare(a),
        Command::Generate(a) => generate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn filter_count(n: usize) -> Result<FilterCount, CliError> {
    FilterCount::try_from(n).map_err(|e| CliError::Config(e.to_string()))
}

fn config(m: &MachineArgs) -> Result<ProgramConfig, CliError> {
    let cfg = ProgramConfig {
        default_feed: m.feed,
        rapid_feed: m.rapid,
        j_max: m.jmax,
        filter_count: filter_count(m.filters)?,
        sample_time: m.ts,
        feed_override: m.feed_override,
        ..ProgramConfig::default()
    };
    cfg.validate().map_err(|e| CliError::Config(e.to_string()))?;
    Ok(cfg)
}

fn load(path: &Path, cfg: ProgramConfig) -> Result<Program, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    parse_program(&text, cfg).map_err(|e: ParseError| CliError::Parse(format!("{}: {e}", path.display())))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::Io(e.to_string()))?;
    writeln!(w).and_then(|_| w.flush()).map_err(|e| CliError::Io(e.to_string()))
}

fn predict(a: PredictArgs) -> Result<(), CliError> {
    let cfg = config(&a.machine)?;
    let mut program = load(&a.program, cfg)?;
    if let Some(tol) = a.tol {
        program.config_mut().tolerance = tol;
    }
    program
        .config()
        .validate()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let sim = simulate(program)?;
    let summary = report::run_summary(&sim);
    for w in &summary.warnings {
        eprintln!("warning: {w}");
    }
    if let Some(path) = &a.json {
        write_json(path, &summary)?;
    }
    if let Some(path) = &a.plan {
        write_json(path, &report::plan_document(&sim))?;
    }
    if let Some(path) = &a.csv {
        let trace = sim.trace().map_err(|e| CliError::from(SimulationError::from(e)))?;
        report::write_trace_csv(&trace, create(path)?)?;
    }
    println!("cycle time: {} s", summary.cycle_time_s);
    Ok(())
}

fn limit_curves(a: LimitArgs) -> Result<(), CliError> {
    let counts = a
        .filters
        .iter()
        .map(|&n| filter_count(n))
        .collect::<Result<Vec<_>, _>>()?;
    let grid = report::linspace(a.theta_min, a.theta_max, a.theta_step)?;
    let rows = report::limit_curves(a.feed, a.jmax, &a.tolerances, &grid, &counts)?;
    let violations = report::limit_curve_violations(&rows);
    if !violations.is_empty() {
        eprintln!(
            "note: three-filter cornering feed below two-filter feed at {} of {} grid points",
            violations.len(),
            grid.len() * a.tolerances.len()
        );
    }
    match &a.out {
        Some(path) => report::write_limit_csv(&rows, create(path)?)?,
        None => report::write_limit_csv(&rows, io::stdout().lock())?,
    }
    Ok(())
}

fn compare(a: CompareArgs) -> Result<(), CliError> {
    let program = load(&a.program, config(&a.machine)?)?;
    let rows = report::compare_tolerances(&program, &a.tolerances)?;
    let mut out = io::stdout().lock();
    let io_err = |e: io::Error| CliError::Io(e.to_string());
    writeln!(out, "tol_mm,cycle_time_s,min_corner_feed_mm_min,warnings").map_err(io_err)?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{}",
            r.tol_mm, r.cycle_time_s, r.min_corner_feed_mm_min, r.warnings
        )
        .map_err(io_err)?;
    }
    Ok(())
}

fn generate(a: GenerateArgs) -> Result<(), CliError> {
    let positive = [a.feed, a.size, a.step, a.radius];
    if positive.iter().any(|v| !(*v > 0.0 && v.is_finite())) || a.points == 0 {
        return Err(CliError::Config("sizes, feed and counts must be positive".into()));
    }
    let text = match a.shape {
        Shape::Square => corpus::square(a.size, a.feed),
        Shape::Pocket => corpus::square_pocket(a.size, a.step, a.feed),
        Shape::Zigzag => corpus::zigzag(a.size, a.size / 2.0, a.step, a.feed),
        Shape::Trochoid => corpus::trochoid(a.size, a.radius, a.step, a.points, a.feed),
        Shape::Straight => corpus::straight(a.size, a.points, a.feed),
    };
    print!("{text}");
    Ok(())
}
