mod args;
mod config;
mod error;
mod run;

use clap::Parser;

fn main() {
    let cli = args::Cli::parse();
    if let Err(err) = run::run(cli) {
        eprintln!("error: {err}");
        std::process::exit(err.exit_code());
    }
}
