use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use parawick::cli::{
    emit, parse_problem, run, CliError, Engine, Format, RunOptions, EXIT_CROSS_CHECK, EXIT_OK,
    EXIT_USAGE,
};

#[derive(Parser)]
#[command(
    name = "parawick",
    version,
    about = "Vacuum expectation values for para fields of order p"
)]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the correlator described by a problem file.
    Eval {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        engine: Option<Engine>,
        /// Concrete order p for evaluation and the matrix oracle.
        #[arg(long)]
        p: Option<u32>,
        /// Compare with explicit Fock-space matrices (needs p).
        #[arg(long)]
        oracle: bool,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Largest Fock-space dimension the oracle may build.
        #[arg(long)]
        max_dim: Option<usize>,
    },
}

fn eval(input: PathBuf, opts: RunOptions, format: Format) -> Result<(String, bool), CliError> {
    let text = std::fs::read_to_string(&input).map_err(|source| CliError::Io {
        path: input.display().to_string(),
        source,
    })?;
    let problem = parse_problem(&text)?;
    let doc = run(&problem, &opts)?;
    Ok((emit(&doc, format), doc.passed()))
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() {
                EXIT_USAGE as u8
            } else {
                EXIT_OK as u8
            });
        }
    };
    let Command::Eval {
        input,
        engine,
        p,
        oracle,
        format,
        max_dim,
    } = args.command;
    let opts = RunOptions {
        engine,
        p,
        oracle,
        max_dim,
    };
    match eval(input, opts, format) {
        Ok((out, passed)) => {
            print!("{out}");
            if passed {
                ExitCode::from(EXIT_OK as u8)
            } else {
                eprintln!("error: cross-check failed");
                ExitCode::from(EXIT_CROSS_CHECK as u8)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
