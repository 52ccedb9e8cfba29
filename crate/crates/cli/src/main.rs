//! `nkcert`: command-line driver for certificate audits.

mod commands;
mod config;

use std::process::ExitCode;

use clap::Parser;

use commands::Command;
use config::SharedOpts;

#[derive(Parser, Debug)]
#[command(name = "nkcert", version, about = "Audit Newton-Kantorovich closure certificates")]
struct Cli {
    #[command(flatten)]
    opts: SharedOpts,
    #[command(subcommand)]
    command: Command,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = cli.opts.resolve().and_then(|opts| commands::run(cli.command, &opts));
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
