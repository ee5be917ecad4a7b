mod args;
mod commands;
mod config;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

fn run() -> anyhow::Result<()> {
    let argv = config::expand_args(std::env::args_os().collect())?;
    let cli = Cli::parse_from(argv);
    match cli.command {
        Command::Cluster(a) => commands::cluster(a),
        Command::Sweep(a) => commands::sweep_cmd(a),
        Command::Gen(a) => commands::gen(a),
        Command::Bench(a) => commands::bench(a),
        Command::Knn(a) => commands::knn(a),
    }
}

/// 1 for a violated runtime invariant, 2 for anything wrong with the input.
fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<spatiotex::Error>() {
        Some(spatiotex::Error::Invariant(_)) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
