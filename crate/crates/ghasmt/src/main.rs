use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};
use ghasmt::pipeline::{self, RunConfig};
use ghasmt::solver::{SolverCommand, DEFAULT_TIMEOUT, SOLVER_ENV};
use ghasmt::{CliError, Stage, EXIT_USAGE};
use ghasmt_core::sim::SimConfig;

#[derive(Parser)]
#[command(name = "ghasmt", version, about = "Bounded model checking of graphical hybrid automata")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Choose {
    /// Fire the first enabled transition in model order.
    First,
}

#[derive(clap::Args)]
struct Encoding {
    /// Number of unrolled steps.
    #[arg(long, default_value_t = 20)]
    bound: usize,
    /// Solver precision δ.
    #[arg(long, default_value_t = 0.001)]
    precision: f64,
    /// Longest dwell of one step, in seconds.
    #[arg(long, default_value_t = 10.0)]
    dwell_max: f64,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check a model and print its diagnostics.
    Validate { model: PathBuf },
    /// Print the model with subsystems inlined.
    Flatten { model: PathBuf },
    /// Print flow relations and transition updates.
    Frs { model: PathBuf },
    /// Emit the SMT-LIB2 document, for the model alone or one requirement.
    Translate {
        model: PathBuf,
        props: Option<PathBuf>,
        #[arg(long)]
        property: Option<String>,
        #[command(flatten)]
        enc: Encoding,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate and write the trace as CSV.
    Simulate {
        model: PathBuf,
        #[arg(long, default_value_t = 10.0)]
        horizon: f64,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long)]
        inputs: Option<PathBuf>,
        #[arg(long, default_value_t = 200)]
        max_transitions: usize,
        #[arg(long, value_enum)]
        choose: Option<Choose>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the full pipeline on the requirements of a property file.
    Check {
        model: PathBuf,
        props: PathBuf,
        #[arg(long)]
        property: Option<String>,
        #[command(flatten)]
        enc: Encoding,
        #[arg(long, env = SOLVER_ENV)]
        solver_path: Option<PathBuf>,
        /// Extra solver arguments, placed before the document.
        #[arg(long = "solver-arg", allow_hyphen_values = true)]
        solver_args: Option<Vec<String>>,
        /// Solver timeout in seconds.
        #[arg(long, default_value_t = DEFAULT_TIMEOUT.as_secs_f64())]
        timeout: f64,
        #[arg(long, default_value = "ghasmt-out")]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum)]
        choose: Option<Choose>,
        #[arg(long)]
        inputs: Option<PathBuf>,
        /// Step size of the simulation search used without a solver.
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        /// Simulated time per search run; bound × dwell-max by default.
        #[arg(long)]
        horizon: Option<f64>,
        /// Number of simulated runs in the search.
        #[arg(long, default_value_t = 32)]
        trials: usize,
    },
}

fn emit(out: Option<&PathBuf>, bytes: &[u8]) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(p, bytes).map_err(|e| CliError::new(Stage::Emit, format!("{}: {e}", p.display()))),
        None => std::io::stdout().write_all(bytes).map_err(CliError::at(Stage::Emit)),
    }
}

fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.cmd {
        Cmd::Validate { model } => {
            print!("{}", pipeline::cmd_validate(&model)?);
            Ok(0)
        }
        Cmd::Flatten { model } => {
            print!("{}", pipeline::cmd_flatten(&model)?);
            Ok(0)
        }
        Cmd::Frs { model } => {
            print!("{}", pipeline::cmd_frs(&model)?);
            Ok(0)
        }
        Cmd::Translate { model, props, property, enc, out } => {
            let doc =
                pipeline::cmd_translate(&model, props.as_deref(), property.as_deref(), enc.bound, enc.precision, enc.dwell_max)?;
            emit(out.as_ref(), doc.as_bytes())?;
            Ok(0)
        }
        Cmd::Simulate { model, horizon, dt, inputs, max_transitions, choose, seed, out } => {
            let cfg = SimConfig { horizon, dt, max_transitions, choose_first: choose.is_some(), seed };
            let tr = pipeline::cmd_simulate(&model, inputs.as_deref(), &cfg)?;
            emit(out.as_ref(), &pipeline::trace_csv(&tr)?)?;
            Ok(0)
        }
        Cmd::Check {
            model,
            props,
            property,
            enc,
            solver_path,
            solver_args,
            timeout,
            out,
            seed,
            choose,
            inputs,
            dt,
            horizon,
            trials,
        } => {
            let solver = solver_path.map(|p| {
                let mut cmd = SolverCommand::new(p);
                if let Some(args) = solver_args {
                    cmd.args = args;
                }
                cmd.timeout = Duration::from_secs_f64(timeout.max(0.0));
                cmd
            });
            let cfg = RunConfig {
                property,
                k: enc.bound,
                delta: enc.precision,
                dwell_max: enc.dwell_max,
                solver,
                seed,
                choose_first: choose.is_some(),
                inputs,
                dt,
                horizon,
                trials,
                ..RunConfig::new(model, props, out)
            };
            let outcome = pipeline::cmd_check(&cfg)?;
            print!("{}", outcome.report_text);
            Ok(outcome.exit_code)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE as u8 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE as u8)
        }
    }
}
