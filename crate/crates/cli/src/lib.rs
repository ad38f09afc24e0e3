//! Command-line front end for surgeflow.
//!
//! Exit codes: 0 on success, 1 when a verification report lists violations,
//! 2 on malformed input.

pub mod commands;
pub mod error;
pub mod instance;
pub mod number;
pub mod spec;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use error::CliError;
pub use instance::{parse_instance, parse_instance_str, serialize_instance, Instance, InstanceFile};
pub use spec::{parse_algorithm, parse_generator, ExperimentConfig};

use instance::ZeroDemandArg;

#[derive(Debug, Parser)]
#[command(name = "surgeflow", version, about = "Surge prices for spatial ride markets")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute surge prices for an instance.
    Surge {
        #[command(subcommand)]
        kind: SurgeKind,
    },
    /// Check an instance's surge prices; exits 1 on violations.
    Verify {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an online algorithm against the offline optimum.
    Simulate {
        /// For example `drift:delta=0.1,T=1000` or `geometric:epsilon=1/4,k=20,T=5000`.
        #[arg(long)]
        generator: String,
        /// `stay`, `match`, `rand:p=0.5` or `comp:p=0.2`.
        #[arg(long)]
        algorithm: String,
        #[arg(long, default_value_t = 1)]
        trials: usize,
        #[arg(long, env = "SURGEFLOW_SEED")]
        seed: u64,
        /// CSV destination; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Per-step served and moved series as JSON.
        #[arg(long)]
        emit_plot_data: Option<PathBuf>,
        /// Exact rational arithmetic instead of f64.
        #[arg(long)]
        exact: bool,
    },
}

#[derive(Debug, Subcommand)]
pub enum SurgeKind {
    Continuous {
        #[arg(long)]
        input: PathBuf,
        /// Price at vertices without demand; defaults to the file's setting, then zero.
        #[arg(long, value_enum)]
        zero_demand_price: Option<ZeroDemandArg>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Discrete {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn finish(doc: commands::Document, out: Option<&std::path::Path>) -> Result<(), CliError> {
    commands::write_output(out, &doc.text)?;
    if doc.ok {
        Ok(())
    } else {
        Err(CliError::Verification("report lists violations".into()))
    }
}

pub fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Surge { kind: SurgeKind::Continuous { input, zero_demand_price, out } } => {
            let Instance::Continuous(c) = parse_instance(&input)? else {
                return Err(CliError::Input(format!("{}: not a continuous instance", input.display())));
            };
            let convention = zero_demand_price.map(Into::into).or(c.zero_demand).unwrap_or_default();
            finish(commands::surge_continuous(&c, convention)?, out.as_deref())
        }
        Command::Surge { kind: SurgeKind::Discrete { input, out } } => {
            let Instance::Discrete(d) = parse_instance(&input)? else {
                return Err(CliError::Input(format!("{}: not a discrete instance", input.display())));
            };
            finish(commands::surge_discrete(&d)?, out.as_deref())
        }
        Command::Verify { input, out } => finish(commands::verify(&parse_instance(&input)?)?, out.as_deref()),
        Command::Simulate { generator, algorithm, trials, seed, out, emit_plot_data, exact } => {
            let cfg = ExperimentConfig {
                generator: parse_generator(&generator)?,
                algorithm: parse_algorithm(&algorithm)?,
                trials,
                seed,
                out,
                plot_data: emit_plot_data,
                exact,
            };
            let sim = commands::simulate(&cfg)?;
            commands::write_output(cfg.out.as_deref(), &sim.csv)?;
            if let (Some(path), Some(data)) = (&cfg.plot_data, &sim.plot_data) {
                commands::write_output(Some(path), data)?;
            }
            eprintln!("{}", sim.summary);
            Ok(())
        }
    }
}

/// Parses `argv` (program name first) and runs it, returning the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("surgeflow: {e}");
            e.exit_code()
        }
    }
}
