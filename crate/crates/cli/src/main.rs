mod args;
mod commands;
mod config;
mod output;

use clap::Parser;

use args::{Cli, Command};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Analyze(a) => commands::analyze(a),
        Command::Evolve(a) => commands::evolve(a),
        Command::Perturb(a) => commands::perturb(a),
        Command::Design(a) => commands::design(a),
        Command::ReproduceFigure(a) => commands::reproduce(a),
        Command::Cancellation(a) => commands::cancellation(a),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
