mod algo;
mod commands;
mod error;
mod experiment;
mod files;
mod plot;
mod selftest;
mod stats;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::error::{CliError, CliResult};

/// Max-times matrix factorization toolkit.
#[derive(Debug, Parser)]
#[command(name = "maxtimes", version)]
struct Cli {
    /// Base random seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Only print warnings and errors.
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic instance with known factors.
    Synth(commands::SynthArgs),
    /// Factorize a CSV matrix.
    Factorize(commands::FactorizeArgs),
    /// Multiply factor CSVs in the max-times algebra.
    Reconstruct(commands::ReconstructArgs),
    /// Score a reconstruction against ground truth.
    Evaluate(commands::EvaluateArgs),
    /// Hold out entries, factorize the rest and score the held-out part.
    Predict(commands::PredictArgs),
    /// Run a parameter sweep from a TOML config.
    Experiment(experiment::ExperimentArgs),
    /// Run the built-in property checks.
    #[command(hide = true)]
    Selftest,
}

fn run(cli: Cli) -> CliResult<()> {
    if let Some(j) = cli.jobs {
        if j == 0 {
            return Err(CliError::Usage("--jobs must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
            .map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    let seed = cli.seed.unwrap_or(0);
    match &cli.command {
        Command::Synth(a) => commands::synth(a, seed),
        Command::Factorize(a) => commands::factorize_cmd(a, seed),
        Command::Reconstruct(a) => commands::reconstruct(a),
        Command::Evaluate(a) => commands::evaluate(a),
        Command::Predict(a) => commands::predict(a, seed),
        Command::Experiment(a) => experiment::experiment(a, cli.seed),
        Command::Selftest => selftest::selftest(seed),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let level = if cli.quiet { "warn" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn holdout_flags_exclusive() {
        let base = ["maxtimes", "predict", "--input", "a.csv", "--out", "r.csv"];
        assert!(Cli::try_parse_from(base).is_err());
        let both = [
            &base[..],
            &["--holdout-fraction", "0.1", "--holdout-per-row", "2"],
        ]
        .concat();
        assert!(Cli::try_parse_from(both).is_err());
        let one = [&base[..], &["--holdout-fraction", "0.1", "--seed", "3"]].concat();
        let cli = Cli::try_parse_from(one).unwrap();
        assert_eq!(cli.seed, Some(3));
    }
}
