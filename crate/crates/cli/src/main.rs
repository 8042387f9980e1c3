use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use clap::Parser;
use subsep_cli::{run, Cli, CliError};

fn execute(cli: &Cli) -> Result<(), CliError> {
    // Buffer the whole table so a failed run leaves no partial output file.
    let mut buf = Vec::new();
    run(cli, &mut buf)?;
    match &cli.out {
        Some(path) => {
            let mut f = BufWriter::new(File::create(path)?);
            f.write_all(&buf)?;
            f.flush()?;
        }
        None => io::stdout().lock().write_all(&buf)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("subsep: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
