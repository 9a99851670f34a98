//! `ergrates`: convergence-rate reports for spectral measures and flow models.

mod commands;
mod input;
mod report;
mod verify;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use report::{Format, Report};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] ergrates_core::Error),
    #[error("cannot write report: {0}")]
    Io(#[from] io::Error),
}

/// Worst thing a command found; decides the exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Outcome {
    Ok,
    Inconclusive,
    Violated,
}

impl Outcome {
    fn code(self) -> u8 {
        match self {
            Outcome::Ok => 0,
            Outcome::Violated => 2,
            Outcome::Inconclusive => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "ergrates", version, about = "Convergence rates of ergodic averages from spectral measures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// The extremal constant rho(alpha) and its minimizer.
    Rho {
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Decay norm of a measure at one tau or over a tau grid.
    Decay {
        #[command(flatten)]
        measure: MeasureArgs,
        #[arg(long, allow_hyphen_values = true, conflicts_with_all = ["tau_min", "tau_max", "grid_points"])]
        tau: Option<f64>,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        tol: TolArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Decay norm next to the kernel upper bound and the certified rate.
    Bounds {
        #[command(flatten)]
        measure: MeasureArgs,
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Power-law fit of the decay norm over a tau grid.
    Fit {
        #[command(flatten)]
        measure: MeasureArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        tol: TolArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Membership verdicts for the classes K1 to K4.
    Classes {
        #[command(flatten)]
        measure: MeasureArgs,
        #[arg(long, allow_hyphen_values = true)]
        p: Option<f64>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Sharpness witnesses for the backward constant, or the attained
    /// constant of a multiplication vector given with --input.
    Sharpness {
        #[arg(long)]
        input: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long, allow_hyphen_values = true)]
        eps: Option<f64>,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Averages of a flow model over a tau grid with their bounds.
    FlowSim {
        #[arg(long)]
        input: String,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        tol: TolArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Runs one verification suite; exits 2 if an inequality fails.
    Verify {
        #[arg(long, value_enum)]
        suite: verify::Suite,
        #[arg(long)]
        input: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        alpha: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        q: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        p: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        eps: Option<f64>,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Lists the built-in measures, or writes one as a measure file.
    Catalog {
        #[arg(long)]
        input: Option<String>,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        q: f64,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Debug, Args)]
struct MeasureArgs {
    /// Measure file, or the name of a catalog measure.
    #[arg(long)]
    input: String,
    /// Class level; also the level of level-dependent catalog measures.
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    q: f64,
}

#[derive(Debug, Args)]
struct GridArgs {
    #[arg(long, allow_hyphen_values = true)]
    tau_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    tau_max: Option<f64>,
    #[arg(long)]
    grid_points: Option<usize>,
}

/// Log-spaced grid defaults for one command.
#[derive(Debug, Clone, Copy)]
pub struct GridDefaults {
    pub tau_min: f64,
    pub tau_max: f64,
    pub points: usize,
}

pub const STANDARD_GRID: GridDefaults = GridDefaults {
    tau_min: 0.1,
    tau_max: 1e4,
    points: 200,
};

impl GridArgs {
    fn resolve(&self, d: GridDefaults) -> Result<Grid, CliError> {
        let g = Grid {
            tau_min: self.tau_min.unwrap_or(d.tau_min),
            tau_max: self.tau_max.unwrap_or(d.tau_max),
            points: self.grid_points.unwrap_or(d.points),
        };
        if !(g.tau_min > 0.0 && g.tau_min.is_finite()) {
            return Err(CliError::Input(format!("--tau-min: must be positive and finite, got {}", g.tau_min)));
        }
        if !(g.tau_max > g.tau_min && g.tau_max.is_finite()) {
            return Err(CliError::Input(format!(
                "--tau-max: must be finite and exceed --tau-min = {}, got {}",
                g.tau_min, g.tau_max
            )));
        }
        if g.points < 2 {
            return Err(CliError::Input(format!("--grid-points: need at least 2, got {}", g.points)));
        }
        Ok(g)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub tau_min: f64,
    pub tau_max: f64,
    pub points: usize,
}

impl Grid {
    pub fn taus(&self) -> Vec<f64> {
        ergrates_core::quad::log_grid(self.tau_min, self.tau_max, self.points)
    }
}

#[derive(Debug, Args)]
struct TolArgs {
    /// Relative quadrature tolerance.
    #[arg(long, allow_hyphen_values = true)]
    tol: Option<f64>,
}

impl TolArgs {
    fn resolve(&self) -> Result<ergrates_core::Tolerance, CliError> {
        let d = ergrates_core::rates::DECAY_TOL;
        match self.tol {
            None => Ok(d),
            Some(t) if t > 0.0 && t < 1.0 => Ok(ergrates_core::Tolerance::new(d.abs, t)),
            Some(t) => Err(CliError::Input(format!("--tol: must lie in (0, 1), got {t}"))),
        }
    }
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Report file; standard output when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

impl OutputArgs {
    fn emit(&self, report: &Report) -> Result<(), CliError> {
        match &self.output {
            Some(path) => {
                let file = File::create(path)
                    .map_err(|e| CliError::Input(format!("--output: cannot create {}: {e}", path.display())))?;
                let mut w = BufWriter::new(file);
                report.write(self.format, &mut w)?;
                w.flush()?;
            }
            None => {
                let stdout = io::stdout();
                let mut w = stdout.lock();
                report.write(self.format, &mut w)?;
            }
        }
        Ok(())
    }
}

pub fn check_positive(flag: &str, x: f64) -> Result<f64, CliError> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(CliError::Input(format!("--{flag}: must be positive and finite, got {x}")))
    }
}

pub fn check_range(flag: &str, x: f64, lo: f64, hi: f64) -> Result<f64, CliError> {
    if x >= lo && x <= hi {
        Ok(x)
    } else {
        Err(CliError::Input(format!("--{flag}: must lie in [{lo}, {hi}], got {x}")))
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("ERGRATES_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Input(format!("ERGRATES_THREADS: expected a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Input(format!("ERGRATES_THREADS: {e}")))
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    let (report, outcome, out) = match cli.command {
        Command::Rho { alpha, out } => {
            let (r, o) = commands::rho(alpha)?;
            (r, o, out)
        }
        Command::Decay { measure, tau, grid, tol, out } => {
            let (r, o) = commands::decay(&measure.input, measure.q, tau, &grid, tol.resolve()?)?;
            (r, o, out)
        }
        Command::Bounds { measure, alpha, grid, out } => {
            let (r, o) = commands::bounds(&measure.input, measure.q, alpha, grid.resolve(STANDARD_GRID)?)?;
            (r, o, out)
        }
        Command::Fit { measure, grid, tol, out } => {
            let (r, o) = commands::fit(&measure.input, measure.q, grid.resolve(STANDARD_GRID)?, tol.resolve()?)?;
            (r, o, out)
        }
        Command::Classes { measure, p, out } => {
            let (r, o) = commands::classes(&measure.input, measure.q, p)?;
            (r, o, out)
        }
        Command::Sharpness { input, alpha, eps, grid, out } => {
            let (r, o) = commands::sharpness(input.as_deref(), alpha, eps, &grid)?;
            (r, o, out)
        }
        Command::FlowSim { input, grid, tol, out } => {
            let (r, o) = commands::flow_sim(&input, &grid, tol.resolve()?)?;
            (r, o, out)
        }
        Command::Verify { suite, input, alpha, q, p, eps, grid, out } => {
            let opts = verify::Options { input, alpha, q, p, eps };
            let (r, o) = verify::run(suite, &opts, &grid)?;
            (r, o, out)
        }
        Command::Catalog { input, q, out } => {
            if let Some(name) = input {
                let (_, m) = input::load_measure(&name, q)?;
                let mut text = m.to_json();
                text.push('\n');
                match &out.output {
                    Some(path) => std::fs::write(path, text)
                        .map_err(|e| CliError::Input(format!("--output: cannot write {}: {e}", path.display())))?,
                    None => io::stdout().lock().write_all(text.as_bytes())?,
                }
                return Ok(Outcome::Ok);
            }
            (commands::catalog_listing(q)?, Outcome::Ok, out)
        }
    };
    out.emit(&report)?;
    Ok(outcome)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = configure_threads().and_then(|()| run(cli));
    match result {
        Ok(outcome) => ExitCode::from(outcome.code()),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
