use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rescomp_cli::commands::{
    cmd_bench, cmd_generate, cmd_predict, cmd_train, BenchArgs, GenerateArgs, PredictArgs,
    TrainArgs,
};
use rescomp_cli::CliError;

#[derive(Parser)]
#[command(
    name = "rescomp",
    version,
    about = "Echo state networks: data generation, training, inference, benchmarks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a dynamical system and write the series as CSV
    Generate(GenerateArgs),
    /// Sweep reservoir sizes on the next-step task and write a timing report
    Bench(BenchArgs),
    /// Train a model on a CSV series and save it to a model file
    Train(TrainArgs),
    /// Run a saved model closed-loop or over a provided series
    Predict(PredictArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Train(args) => cmd_train(args),
        Command::Predict(args) => cmd_predict(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Failure(err)) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}
