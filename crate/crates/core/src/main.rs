use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use critical_ns::experiment::{
    cli_bkm, cli_cauchy_sweep, cli_counterexample, cli_simulate, cli_verify_theorem, parse_j_list, ExitStatus,
    ExperimentConfig, Outcome,
};
use critical_ns::{Error, Result};

/// Galerkin Navier-Stokes runs with critical-norm monitors.
///
/// Exit codes: 0 all applicable monitors hold, 1 a monitor failed,
/// 2 configuration error, 3 numerical breakdown.
/// CRITNS_THREADS sets the worker thread count.
#[derive(Parser)]
#[command(name = "critical-ns", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct RunArgs {
    /// Configuration file of `key = value` lines.
    config: PathBuf,
    /// Override one key, e.g. `--set mu=0.5`. May be repeated.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one trajectory with the monitors named in the config.
    Simulate(RunArgs),
    /// Run the theorem battery on subcritical data.
    VerifyTheorem(RunArgs),
    /// Run the vorticity bounds and splitting constants.
    Bkm(RunArgs),
    /// Run a family of mollified data and compare consecutive pairs.
    CauchySweep {
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated mollifier scales, overriding data.lambda_list.
        #[arg(long)]
        lambdas: Option<String>,
    },
    /// Tabulate partial sums of the dyadic counterexample.
    Counterexample {
        /// Ascending truncation indices, e.g. 1,2,4,8.
        #[arg(long, default_value = "1,2,4,8,16,32,64")]
        j_list: String,
        /// Sharpness of the radial bump profile.
        #[arg(long, default_value_t = 1.0)]
        sharpness: f64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

fn load(args: &RunArgs) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| Error::Config {
        key: "config".into(),
        reason: format!("cannot read {}: {e}", args.config.display()),
    })?;
    let mut overrides = Vec::new();
    for s in &args.set {
        let (k, v) = s.split_once('=').ok_or_else(|| Error::Config {
            key: s.clone(),
            reason: "expected KEY=VALUE".into(),
        })?;
        overrides.push((k.trim().to_string(), v.trim().to_string()));
    }
    ExperimentConfig::parse(&text, &overrides)
}

fn parse_lambdas(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim().parse().map_err(|_| Error::Config {
                key: "lambdas".into(),
                reason: format!("cannot parse `{s}`"),
            })
        })
        .collect()
}

fn run(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Simulate(a) => cli_simulate(&load(&a)?),
        Command::VerifyTheorem(a) => cli_verify_theorem(&load(&a)?),
        Command::Bkm(a) => cli_bkm(&load(&a)?),
        Command::CauchySweep { run, lambdas } => {
            let cfg = load(&run)?;
            let list = lambdas.as_deref().map(parse_lambdas).transpose()?;
            cli_cauchy_sweep(&cfg, list.as_deref())
        }
        Command::Counterexample { j_list, sharpness, out } => {
            cli_counterexample(&parse_j_list(&j_list)?, sharpness, &out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(raw) = std::env::var("CRITNS_THREADS") {
        match raw.parse::<usize>() {
            Ok(n) if n > 0 => {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                    eprintln!("error: cannot start {n} threads: {e}");
                    return ExitCode::from(2);
                }
            }
            _ => {
                eprintln!("error: CRITNS_THREADS must be a positive integer, got `{raw}`");
                return ExitCode::from(2);
            }
        }
    }
    match run(cli) {
        Ok(outcome) => {
            println!("{}", outcome.message);
            ExitCode::from(outcome.status.code() as u8)
        }
        Err(e) => {
            let status = ExitStatus::of_error(&e);
            eprintln!("error: {e}");
            ExitCode::from(status.code() as u8)
        }
    }
}
