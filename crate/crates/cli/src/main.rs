mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use commands::StageError;

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    match &cli.command {
        Command::Warp(a) => commands::warp(a),
        Command::Convert(a) => commands::convert(a),
        Command::Dataset(a) => commands::dataset(a),
        Command::MockBackend(a) => commands::mock_backend(a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let stage = err
                .chain()
                .find_map(|e| e.downcast_ref::<StageError>())
                .map_or("error", |s| s.stage);
            let message: Vec<String> = err.chain().map(ToString::to_string).collect();
            eprintln!("[{stage}] error: {}", message.join(": "));
            ExitCode::FAILURE
        }
    }
}
