//! Argument parsing and subcommand dispatch.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use qnet_alloc_core::baselines::RandomSelection;
use qnet_alloc_core::experiments::{grid, run_cost_sweep, run_probability_sweep, CostSweepConfig};
use qnet_alloc_core::formulation::solve_plan;
use qnet_alloc_core::milp::SolveOptions;
use qnet_alloc_core::scenario::make_paper_scenarios;
use qnet_alloc_core::validation::{run_validation, RandomInstanceSpec};
use qnet_alloc_core::{Error, Instance, Plan};
use serde::Serialize;

use crate::error::CliError;
use crate::instance_file::{load_instance, LoadedInstance};
use crate::{plot, report};

#[derive(Debug, Parser)]
#[command(name = "qnet-alloc", version, about = "Reserve or deploy quantum computers under uncertain demand")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one instance and print the plan as JSON.
    Solve(SolveArgs),
    /// Cost breakdown over a grid of scenario-1 probabilities.
    SweepProb(SweepArgs),
    /// Proposed, EVF and random totals over a grid of on-demand prices.
    Compare(CompareArgs),
    /// Cross-check the MILP against brute force on random instances.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Instance JSON file.
    #[arg(short, long)]
    pub input: PathBuf,
    /// Use the two-scenario case study at this probability instead of the
    /// file's scenarios.
    #[arg(long)]
    pub p1: Option<f64>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(short, long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 0.0)]
    pub from: f64,
    #[arg(long, default_value_t = 1.0)]
    pub to: f64,
    #[arg(long, default_value_t = 0.05)]
    pub step: f64,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// SVG chart destination.
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(short, long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 0.8)]
    pub p1: f64,
    #[arg(long, default_value_t = 5000.0)]
    pub od_from: f64,
    #[arg(long, default_value_t = 45000.0)]
    pub od_to: f64,
    #[arg(long, default_value_t = 5000.0)]
    pub od_step: f64,
    /// Random reservations drawn per price.
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Selection::Bernoulli)]
    pub selection: Selection,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// SVG chart destination.
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Selection {
    /// Each machine with probability 1/2.
    Bernoulli,
    /// Uniform subset size, then a uniform subset.
    UniformSize,
}

impl From<Selection> for RandomSelection {
    fn from(s: Selection) -> Self {
        match s {
            Selection::Bernoulli => RandomSelection::Bernoulli,
            Selection::UniformSize => RandomSelection::UniformSize,
        }
    }
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long, default_value_t = 200)]
    pub instances: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Per-instance results as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

/// Parses `args` (program name first), runs the subcommand and returns the
/// process exit code. Data goes to `out`, diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                2
            } else {
                let _ = write!(out, "{text}");
                0
            };
        }
    };
    match execute(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let options = SolveOptions::default();
    match command {
        Command::Solve(a) => solve(&a, &options, out),
        Command::SweepProb(a) => sweep(&a, &options, out, err),
        Command::Compare(a) => compare(&a, &options, out, err),
        Command::Validate(a) => validate(&a, &options, out, err),
    }
}

#[derive(Serialize)]
struct SolveReport<'a> {
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    objective: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    plan: Option<&'a Plan>,
}

fn solve(a: &SolveArgs, options: &SolveOptions, out: &mut dyn Write) -> Result<i32, CliError> {
    let loaded = load_instance(&a.input)?;
    let (instance, scenarios) = loaded.resolve(a.p1)?;
    let (report, code) = match solve_plan(&instance, &scenarios, options) {
        Ok((plan, _, _)) => (Some(plan), 0),
        Err(Error::Infeasible) => (None, 1),
        Err(e) => return Err(e.into()),
    };
    let body = SolveReport {
        status: if report.is_some() { "optimal" } else { "infeasible" },
        objective: report.as_ref().map(|p| p.objective),
        plan: report.as_ref(),
    };
    let mut json = serde_json::to_string_pretty(&body).expect("plan serializes");
    json.push('\n');
    emit(a.out.as_deref(), json.as_bytes(), out)?;
    Ok(code)
}

/// Writes `bytes` to `path`, or to `out` when no path is given.
fn emit(path: Option<&Path>, bytes: &[u8], out: &mut dyn Write) -> Result<(), CliError> {
    match path {
        Some(p) => report::write_file(p, bytes),
        None => out.write_all(bytes).map_err(|source| CliError::Io {
            path: PathBuf::from("<stdout>"),
            source,
        }),
    }
}

/// The file's instance with on-demand units sized for the case-study
/// scenarios.
fn case_study_instance(loaded: &LoadedInstance) -> Result<Instance, CliError> {
    let scenarios = make_paper_scenarios(0.5, loaded.instance.machine_count())?;
    Ok(loaded.instance_for(&scenarios))
}

/// Reports failed rows and turns the worst of them into the exit code.
fn row_errors<'a>(
    failures: impl Iterator<Item = &'a qnet_alloc_core::experiments::RowError>,
    key: &str,
    err: &mut dyn Write,
) -> i32 {
    let mut code = 0;
    for f in failures {
        let _ = writeln!(err, "warning: {key}={} failed: {}", f.at, f.error);
        code = code.max(CliError::Solve(f.error.clone()).exit_code());
    }
    code
}

fn sweep(a: &SweepArgs, options: &SolveOptions, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let loaded = load_instance(&a.input)?;
    let instance = case_study_instance(&loaded)?;
    let points = grid(a.from, a.to, a.step)?;
    if let Some(bad) = points.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::BadProbability(*bad).into());
    }
    let rows = run_probability_sweep(&instance, &points, options);
    emit(a.csv.as_deref(), &report::sweep_csv(&rows), out)?;
    if let Some(p) = &a.plot {
        report::write_file(p, plot::sweep_svg(&rows).as_bytes())?;
    }
    Ok(row_errors(rows.iter().filter_map(|r| r.as_ref().err()), "p1", err))
}

fn compare(a: &CompareArgs, options: &SolveOptions, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let loaded = load_instance(&a.input)?;
    let instance = case_study_instance(&loaded)?;
    let prices = grid(a.od_from, a.od_to, a.od_step)?;
    let config = CostSweepConfig {
        p1: a.p1,
        trials: a.trials,
        seed: a.seed,
        selection: a.selection.into(),
    };
    if a.trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    let rows = run_cost_sweep(&instance, &prices, &config, options)?;
    emit(a.csv.as_deref(), &report::compare_csv(&rows), out)?;
    if let Some(p) = &a.plot {
        report::write_file(p, plot::compare_svg(&rows).as_bytes())?;
    }
    Ok(row_errors(rows.iter().filter_map(|r| r.as_ref().err()), "on_demand_cost", err))
}

fn validate(a: &ValidateArgs, options: &SolveOptions, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let summary = run_validation(&RandomInstanceSpec::default(), a.instances, a.seed, options);
    if let Some(p) = &a.csv {
        report::write_file(p, &report::validation_csv(&summary.outcomes))?;
    }
    for (i, detail) in summary.failures() {
        let _ = writeln!(err, "instance {i}: {detail}");
    }
    let io = |source| CliError::Io {
        path: PathBuf::from("<stdout>"),
        source,
    };
    writeln!(out, "{}/{} matched", summary.matched, summary.total).map_err(io)?;
    writeln!(out, "{}/{} verified", summary.verified, summary.total).map_err(io)?;
    Ok(if summary.all_passed() { 0 } else { 3 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(args.iter().copied(), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn help_goes_to_stdout() {
        for args in [
            &["qnet-alloc", "--help"][..],
            &["qnet-alloc", "solve", "--help"],
            &["qnet-alloc", "sweep-prob", "--help"],
            &["qnet-alloc", "compare", "--help"],
            &["qnet-alloc", "validate", "--help"],
        ] {
            let (code, out, _) = run_str(args);
            assert_eq!(code, 0);
            assert!(out.contains("Usage"), "{out}");
        }
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run_str(&["qnet-alloc"]).0, 2);
        assert_eq!(run_str(&["qnet-alloc", "solve"]).0, 2);
        assert_eq!(run_str(&["qnet-alloc", "frobnicate"]).0, 2);
        assert_eq!(run_str(&["qnet-alloc", "validate", "--instances", "-1"]).0, 2);
    }

    #[test]
    fn small_validate_run() {
        let (code, out, err) = run_str(&["qnet-alloc", "validate", "--instances", "5", "--seed", "9"]);
        assert_eq!(code, 0, "{err}");
        assert_eq!(out, "5/5 matched\n5/5 verified\n");
    }
}
