mod commands;
mod svg;

use std::process::ExitCode;

use clap::{CommandFactory, Parser};

use commands::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(d) = cli.max_dim {
        std::env::set_var("ISODIMER_MAX_DIM", d.to_string());
    }
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => match e.downcast_ref::<commands::Usage>() {
            Some(u) => Cli::command().error(clap::error::ErrorKind::ArgumentConflict, &u.0).exit(),
            None => {
                eprintln!("error: {e:#}");
                ExitCode::from(1)
            }
        },
    }
}
