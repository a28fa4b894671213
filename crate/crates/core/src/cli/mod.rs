//! `w3cone` command-line front end.
//!
//! Exit codes: 0 on success, 1 on input errors, 2 when the solver does not
//! reach an optimal point.

mod report;
mod sweep;
mod table;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::conic::{self, ConicBackend, ClarabelBackend, ConicError, Solution, SolverConfig};
use crate::netcase::{parse_matpower, NetworkCase};
use crate::wopf::{build_relaxation, Relaxation, RelaxationKind, WopfError};

pub use report::{ActivitySummary, SolveReport};
pub use sweep::{best_point, run_sweep, sweep_csv, SweepRow};
pub use table::{run_table, table_json, table_text, GapCell, TableRow};

/// Environment variable overriding the seed of randomized checks.
pub const SEED_ENV: &str = "W3CONE_SEED";
pub const DEFAULT_SEED: u64 = 0xC0FFEE;

/// Seed for randomized checks: `W3CONE_SEED` if set and parseable, else the default.
pub fn seed_from_env() -> u64 {
    std::env::var(SEED_ENV)
        .ok()
        .and_then(|s| {
            let s = s.trim();
            match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
                Some(hex) => u64::from_str_radix(hex, 16).ok(),
                None => s.parse().ok(),
            }
        })
        .unwrap_or(DEFAULT_SEED)
}

#[derive(Debug, Parser)]
#[command(name = "w3cone", version, about = "Conic relaxations of AC OPF with 3-cycle cone cuts")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one relaxation of a case and print a JSON report.
    Solve(SolveArgs),
    /// Sweep the two cut angles over a grid and write CSV.
    Sweep(SweepArgs),
    /// Gap table over several cases and relaxations.
    Table(TableArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RelaxArg {
    Pm,
    Kim,
    Sdp,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub case: PathBuf,
    #[arg(long, value_enum)]
    pub relax: RelaxArg,
    /// Cut angles, comma separated (radians unless --deg).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub theta: Option<Vec<f64>>,
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
    /// Reference AC objective in $/h, enables the gap field.
    #[arg(long)]
    pub ref_obj: Option<f64>,
    /// Tolerance for diagnostics and constraint activity.
    #[arg(long, default_value_t = crate::diagnostics::DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Read --theta in degrees.
    #[arg(long)]
    pub deg: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub case: PathBuf,
    /// Points per axis.
    #[arg(long, default_value_t = 32)]
    pub grid: usize,
    /// Half-open angle range `lo:hi` in radians.
    #[arg(long, default_value = "0:6.2831853")]
    pub range: String,
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableFormat {
    Text,
    Json,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
    pub cases: Vec<PathBuf>,
    #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
    pub ref_objs: Vec<f64>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "pm,kim,sdp")]
    pub relaxations: Vec<RelaxArg>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0,4.71238898")]
    pub theta: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
    #[arg(long, value_enum, default_value = "text")]
    pub out: TableFormat,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0:#}")]
    Input(anyhow::Error),
    #[error("solver did not reach optimality: {0}")]
    Solver(String),
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Input(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::Solver(_) => 2,
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Table(a) => cmd_table(a),
    }
}

pub fn load_case(path: &Path) -> anyhow::Result<NetworkCase> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read case file {}", path.display()))?;
    let mut case =
        parse_matpower(&text).with_context(|| format!("cannot parse {}", path.display()))?;
    case.validate()
        .with_context(|| format!("invalid case {}", path.display()))?;
    if case.name.is_empty() {
        case.name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
    }
    Ok(case)
}

/// Kim default angles used when `--theta` is absent.
pub fn default_thetas() -> Vec<f64> {
    vec![0.0, 1.5 * std::f64::consts::PI]
}

pub fn relaxation_kind(relax: RelaxArg, thetas: &[f64], r: f64) -> RelaxationKind {
    match relax {
        RelaxArg::Pm => RelaxationKind::PmSoc,
        RelaxArg::Sdp => RelaxationKind::Sdp,
        RelaxArg::Kim => RelaxationKind::KimPmSoc {
            thetas: thetas.to_vec(),
            r,
        },
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Build(#[from] WopfError),
    #[error(transparent)]
    Conic(#[from] ConicError),
}

/// Builds and solves one relaxation with the default backend.
pub fn solve_relaxation(
    case: &NetworkCase,
    kind: &RelaxationKind,
    cfg: &SolverConfig,
) -> Result<(Relaxation, Solution), RunError> {
    let rel = build_relaxation(case, kind)?;
    let sol = conic::solve(&rel.program, cfg)?;
    Ok((rel, sol))
}

fn write_output(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => fs::write(path, text)
            .with_context(|| format!("cannot write {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_solve(a: &SolveArgs) -> Result<(), CliError> {
    let case = load_case(&a.case)?;
    let mut thetas = a.theta.clone().unwrap_or_else(default_thetas);
    if a.deg {
        thetas.iter_mut().for_each(|t| *t = t.to_radians());
    }
    if let Some(r) = a.ref_obj {
        if !(r > 0.0) {
            return Err(anyhow!("--ref-obj must be positive, got {r}").into());
        }
    }
    let kind = relaxation_kind(a.relax, &thetas, a.r);
    let backend = ClarabelBackend;
    if kind == RelaxationKind::Sdp && !backend.supports_psd() {
        return Err(anyhow!("backend {} cannot solve PSD blocks", backend.name()).into());
    }
    let (rel, sol) = solve_relaxation(&case, &kind, &SolverConfig::default())
        .map_err(|e| CliError::Input(e.into()))?;
    let report = SolveReport::new(&case, &rel, &sol, a.ref_obj, a.tol, backend.name())
        .map_err(|e| CliError::Input(e.into()))?;
    let json = serde_json::to_string_pretty(&report).map_err(anyhow::Error::from)? + "\n";
    write_output(a.out.as_deref(), &json)?;
    if sol.status != conic::SolveStatus::Optimal {
        return Err(CliError::Solver(sol.status.to_string()));
    }
    Ok(())
}

fn parse_range(s: &str) -> anyhow::Result<(f64, f64)> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| anyhow!("range must look like lo:hi, got {s:?}"))?;
    let lo: f64 = lo.trim().parse().with_context(|| format!("bad range start {lo:?}"))?;
    let hi: f64 = hi.trim().parse().with_context(|| format!("bad range end {hi:?}"))?;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        bail!("range needs finite lo < hi, got {lo}:{hi}");
    }
    Ok((lo, hi))
}

fn cmd_sweep(a: &SweepArgs) -> Result<(), CliError> {
    let case = load_case(&a.case)?;
    let (lo, hi) = parse_range(&a.range)?;
    if a.grid == 0 {
        return Err(anyhow!("--grid must be at least 1").into());
    }
    if !(a.r >= 0.0) {
        return Err(anyhow!("--r must be nonnegative, got {}", a.r).into());
    }
    let rows = run_sweep(&case, a.grid, (lo, hi), a.r, a.jobs).map_err(CliError::Input)?;
    write_output(a.out.as_deref(), &sweep_csv(&rows))?;
    Ok(())
}

fn cmd_table(a: &TableArgs) -> Result<(), CliError> {
    if a.cases.len() != a.ref_objs.len() {
        return Err(anyhow!(
            "{} cases but {} reference objectives",
            a.cases.len(),
            a.ref_objs.len()
        )
        .into());
    }
    let cases = a
        .cases
        .iter()
        .zip(&a.ref_objs)
        .map(|(p, &r)| Ok((load_case(p)?, r)))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let rows = run_table(&cases, &a.relaxations, &a.theta, a.r);
    for row in &rows {
        for cell in &row.cells {
            if cell.status == "unsupported" {
                eprintln!(
                    "warning: {} skipped for {}: backend lacks PSD support",
                    cell.relaxation, row.case_name
                );
            }
        }
    }
    let text = match a.out {
        TableFormat::Json => table_json(&rows),
        TableFormat::Text => table_text(&rows),
    };
    write_output(None, &text)?;
    Ok(())
}
