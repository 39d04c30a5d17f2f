use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gaudin::cli::{run, CliError, Command, Options};

#[derive(Parser)]
#[command(name = "gaudin", version, about = "Bethe Ansatz, Gaudin spectra and Miura opers from JSON problem files")]
struct Args {
    #[command(subcommand)]
    command: Cmd,
    /// write the report here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true)]
    starts: Option<usize>,
    /// shift every Bethe root by this amount before verifying
    #[arg(long, global = true, allow_hyphen_values = true)]
    perturb: Option<f64>,
    /// print a summary table to stderr
    #[arg(long, global = true)]
    pretty: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// solve the Bethe Ansatz equations
    Solve { file: PathBuf },
    /// check Bethe vectors, eigenvalues, regularity and monodromy
    Verify { file: PathBuf },
    /// joint spectrum of the Gaudin Hamiltonians on singular vectors
    Spectrum { file: PathBuf },
    /// Miura transform of a Cartan connection
    Miura { file: PathBuf },
}

fn main() -> ExitCode {
    let args = Args::parse();
    let (cmd, file) = match &args.command {
        Cmd::Solve { file } => (Command::Solve, file),
        Cmd::Verify { file } => (Command::Verify, file),
        Cmd::Spectrum { file } => (Command::Spectrum, file),
        Cmd::Miura { file } => (Command::Miura, file),
    };
    let opts = Options { seed: args.seed, tol: args.tol, starts: args.starts, perturb: args.perturb };
    let result = std::fs::read_to_string(file)
        .map_err(|e| CliError::Io(format!("{}: {e}", file.display())))
        .and_then(|text| run(cmd, &text, &opts));
    let outcome = match result {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    if args.pretty {
        eprint!("{}", outcome.table);
    }
    let text = outcome.render();
    match &args.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text) {
                eprintln!("error: {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{text}"),
    }
    ExitCode::from(outcome.exit_code() as u8)
}
