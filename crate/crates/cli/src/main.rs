use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use parbundle_cli::{run_text, Settings};

/// Parabolic bundle oracles over JSON.
///
/// Reads one request from stdin, or an array of requests from --file, and
/// writes the response(s) to stdout.
#[derive(Parser, Debug)]
#[command(version)]
struct Args {
    /// Batch file holding a JSON array of requests.
    #[arg(long)]
    file: Option<PathBuf>,
    /// Tolerance overriding the per-module defaults.
    #[arg(long, env = "TOL")]
    tol: Option<f64>,
    /// List the available commands and exit.
    #[arg(long)]
    list: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    if args.list {
        let mut out = std::io::stdout().lock();
        for c in parbundle_cli::COMMANDS {
            if writeln!(out, "{c}").is_err() {
                break;
            }
        }
        return ExitCode::SUCCESS;
    }
    if let Some(t) = args.tol {
        if !(t.is_finite() && t > 0.0) {
            eprintln!("--tol must be a positive finite number");
            return ExitCode::from(3);
        }
    }
    let settings = Settings { tol: args.tol };
    let (text, batch) = match &args.file {
        Some(path) => match std::fs::read_to_string(path) {
            Ok(t) => (t, true),
            Err(e) => {
                eprintln!("cannot read {}: {e}", path.display());
                return ExitCode::from(3);
            }
        },
        None => {
            let mut buf = String::new();
            if let Err(e) = std::io::stdin().read_to_string(&mut buf) {
                eprintln!("cannot read stdin: {e}");
                return ExitCode::from(3);
            }
            (buf, false)
        }
    };
    let (out, code) = run_text(&text, batch, settings);
    // A closed stdout (e.g. piped into `head`) is not worth a panic.
    let _ = writeln!(std::io::stdout().lock(), "{out}");
    ExitCode::from(code as u8)
}
