//! `apc` — design minimum-satellite repeating-ground-track constellations
//! for periodic, time-varying coverage of discrete targets.

use std::path::PathBuf;
use std::process::ExitCode;

use apc_design::scenario::{self, RunOptions, RunReport, Scenario, ScenarioError, SolverKind};
use clap::{Args, Parser, Subcommand};

/// Exit code for unreadable or invalid input.
const EXIT_INPUT: u8 = 3;

#[derive(Parser)]
#[command(
    name = "apc",
    version,
    about = "Minimum-satellite common-ground-track constellation design"
)]
struct Cli {
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a scenario and write pattern, member, timeline and track files.
    Solve {
        scenario: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        /// Override the scenario's solver.
        #[arg(long, value_parser = parse_solver)]
        solver: Option<SolverKind>,
        /// Wall-clock limit for the branch-and-bound search, seconds.
        #[arg(long)]
        time_limit: Option<f64>,
        /// Reproducible search: fixed seed, no wall-clock limit, no timing in
        /// the artifacts.
        #[arg(long)]
        deterministic: bool,
    },
    /// Verify user-supplied patterns (one index-list file per
    /// sub-constellation, in scenario order).
    Evaluate {
        scenario: PathBuf,
        #[arg(long = "pattern", required = true, num_args = 1..)]
        patterns: Vec<PathBuf>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Write the seed access profiles of every target and sub-constellation.
    Profile {
        scenario: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Write the expanded ground track of every seed orbit.
    Track {
        scenario: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Output directory (default: the scenario's `output_dir`, else
    /// `out/<name>`).
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

fn parse_solver(s: &str) -> Result<SolverKind, String> {
    s.parse()
}

fn out_dir(s: &Scenario, run: &RunArgs) -> PathBuf {
    run.out_dir
        .clone()
        .or_else(|| s.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out").join(&s.name))
}

fn print_report(report: &RunReport, dir: &std::path::Path) {
    print!("{}", report.to_text());
    println!("\nwrote {} files under {}", report.files.len(), dir.display());
}

fn run(cli: Cli) -> Result<u8, ScenarioError> {
    match cli.command {
        Command::Solve {
            scenario: path,
            run,
            solver,
            time_limit,
            deterministic,
        } => {
            let s = scenario::parse_scenario(&path)?;
            let dir = out_dir(&s, &run);
            let opts = RunOptions {
                out_dir: Some(dir.clone()),
                solver,
                time_limit,
                deterministic: deterministic.then_some(true),
                dry_run: false,
            };
            let report = scenario::run(&s, &opts)?;
            print_report(&report, &dir);
            Ok(report.exit_code() as u8)
        }
        Command::Evaluate {
            scenario: path,
            patterns,
            run,
        } => {
            let s = scenario::parse_scenario(&path)?;
            if patterns.len() != s.sub_constellations.len() {
                return Err(ScenarioError::Invalid {
                    field: "--pattern".into(),
                    message: format!(
                        "{} pattern files given, scenario has {} sub-constellations",
                        patterns.len(),
                        s.sub_constellations.len()
                    ),
                });
            }
            let x = scenario::read_patterns(&patterns, s.length)?;
            let dir = out_dir(&s, &run);
            let opts = RunOptions {
                out_dir: Some(dir.clone()),
                ..RunOptions::default()
            };
            let report = scenario::evaluate(&s, &x, &opts)?;
            print_report(&report, &dir);
            Ok(report.exit_code() as u8)
        }
        Command::Profile { scenario: path, run } => {
            let s = scenario::parse_scenario(&path)?;
            let dir = out_dir(&s, &run);
            let files = scenario::export_profiles(&s, &dir)?;
            println!("wrote {} profiles under {}", files.len(), dir.display());
            Ok(0)
        }
        Command::Track { scenario: path, run } => {
            let s = scenario::parse_scenario(&path)?;
            let dir = out_dir(&s, &run);
            for (label, span, file) in scenario::export_tracks(&s, &dir)? {
                println!("{label}: span {span:.1} deg -> {}", dir.join(file).display());
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}
