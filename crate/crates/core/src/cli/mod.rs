//! The `karst` command line: one subcommand per run, configured by a JSON
//! document with optional `--set key=value` overrides.

mod commands;
mod config;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::{
    adapt_csv, cmd_adapt, cmd_estimate, cmd_mesh, cmd_solve, cmd_verify, convergence_csv, describe, run_verify,
    sweep_csv, AdaptSummary, ConvergenceStudy, FailureList, RunSummary, SweepStudy, VerifyOutcome,
    ADAPT_CSV_HEADER,
};
pub use config::{
    apply_override, configure_threads, ConvergenceConfig, ManufacturedConfig, MeshConfig, PhysicalConfig,
    ProblemConfig, RunConfig, SweepConfig, VerifyConfig, THREADS_ENV,
};

/// Exit code for a run whose property suites failed.
pub const EXIT_SUITE_FAILED: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "karst", version, about = "Coupled conduit/matrix flow solver with residual error estimation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the configured mesh.
    Mesh(CommonArgs),
    /// Solve and write the solution.
    Solve(CommonArgs),
    /// Solve and write the per-element estimator.
    Estimate(CommonArgs),
    /// Run the solve-estimate-mark-refine loop.
    Adapt(CommonArgs),
    /// Run convergence studies and property suites.
    Verify(CommonArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// JSON run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; overrides `output` in the config.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Override a config field, e.g. `--set mesh.nx=8`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

impl Command {
    fn args(&self) -> &CommonArgs {
        match self {
            Command::Mesh(a) | Command::Solve(a) | Command::Estimate(a) | Command::Adapt(a) | Command::Verify(a) => a,
        }
    }
}

fn load(args: &CommonArgs) -> crate::Result<RunConfig> {
    let mut cfg = RunConfig::load(&args.config, &args.overrides)?;
    if let Some(out) = &args.out {
        cfg.output = out.clone();
    }
    Ok(cfg)
}

fn print_files(files: &[PathBuf]) {
    for f in files {
        println!("wrote {}", f.display());
    }
}

fn execute(cli: &Cli) -> crate::Result<i32> {
    configure_threads()?;
    let cfg = load(cli.command.args())?;
    match &cli.command {
        Command::Mesh(_) => print_files(&cmd_mesh(&cfg)?),
        Command::Solve(_) | Command::Estimate(_) => {
            let (summary, files) = if matches!(cli.command, Command::Solve(_)) {
                cmd_solve(&cfg)?
            } else {
                cmd_estimate(&cfg)?
            };
            print_files(&files);
            println!(
                "{} elements, {} dofs, {} iterations, residual {:e}",
                summary.elements, summary.dofs, summary.solver.iterations, summary.solver.residual
            );
            if let Some(e) = summary.error {
                println!("error {e:e}");
            }
            if let Some(t) = summary.theta {
                println!("theta {t:e}");
            }
        }
        Command::Adapt(_) => {
            let (steps, files) = cmd_adapt(&cfg)?;
            print_files(&files);
            for s in steps.iter().map(AdaptSummary::from) {
                let cf = s.conduit_fraction.map(|v| format!("{v:.3}")).unwrap_or_else(|| "-".into());
                println!(
                    "level {}: {} elements, theta {:e}, marked {}, conduit fraction {cf}",
                    s.level, s.elements, s.theta, s.marked
                );
            }
        }
        Command::Verify(_) => {
            let (outcome, files) = cmd_verify(&cfg)?;
            print_files(&files);
            for s in &outcome.properties.suites {
                println!("{:<24} {}", s.name, if s.passed { "pass" } else { "FAIL" });
            }
            println!("elapsed {:.1} s", outcome.elapsed);
            if !outcome.passed() {
                let list = FailureList {
                    passed: false,
                    failures: outcome.failures(),
                };
                println!("{}", serde_json::to_string(&list)?);
                return Ok(EXIT_SUITE_FAILED);
            }
        }
    }
    Ok(0)
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", describe(&e));
            1
        }
    }
}
