mod commands;

use std::process::ExitCode;

use clap::Parser;
use scb_core::{ErrorClass, ScbError};

use commands::Cli;

/// 2 for bad input, 3 for numeric preconditions, 4 for internal invariants.
fn exit_code(err: &anyhow::Error) -> u8 {
    let class = err.chain().find_map(|e| e.downcast_ref::<ScbError>()).map(ScbError::class);
    match class {
        Some(ErrorClass::Numeric) => 3,
        Some(ErrorClass::Internal) => 4,
        Some(ErrorClass::Input) | None => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
