use std::process::ExitCode;

use clap::Parser;
use dirne_cli::{commands, workers_from_env, Cli, CliError, RunConfig};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match try_main(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn try_main(cli: Cli) -> Result<i32, CliError> {
    if let Some(n) = workers_from_env()? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let task = cli.command.apply(&mut cfg);
    let outcome = commands::run(task, &cfg, cli.oracle_check)?;
    outcome.emit(cli.report.as_deref())?;
    Ok(outcome.exit_code)
}
