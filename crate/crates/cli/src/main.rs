use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use valring_cli::{run_text, verify_report, RunOptions};

#[derive(Parser)]
#[command(name = "valring", version, about = "Run valuation-theory scenarios and check their reports")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Structured,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a scenario file.
    Run {
        file: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Absolute precision cap, e.g. `8` or `8,0`.
        #[arg(long)]
        precision: Option<String>,
        #[arg(long)]
        horizon: Option<usize>,
        #[arg(long, value_enum, default_value = "text")]
        report: Format,
        /// Comma-separated task indices or op names.
        #[arg(long)]
        tasks: Option<String>,
        /// Write the report here instead of stdout.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Re-check the evidence in an existing report.
    Verify { file: PathBuf },
}

fn read(path: &PathBuf) -> Result<String, ExitCode> {
    std::fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", path.display());
        ExitCode::from(2)
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::Run { file, seed, precision, horizon, report, tasks, output } => {
            let text = match read(&file) {
                Ok(t) => t,
                Err(code) => return code,
            };
            let opts = RunOptions { seed, precision, horizon, tasks };
            let rep = match run_text(&text, &opts) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            let body = match report {
                Format::Text => rep.to_text(),
                Format::Structured => rep.to_json(),
            };
            match output {
                Some(p) => {
                    if let Err(e) = std::fs::write(&p, body) {
                        eprintln!("error: cannot write {}: {e}", p.display());
                        return ExitCode::from(2);
                    }
                }
                None => print!("{body}"),
            }
            if rep.failed() == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Cmd::Verify { file } => {
            let text = match read(&file) {
                Ok(t) => t,
                Err(code) => return code,
            };
            match verify_report(&text) {
                Ok(v) if v.ok() => {
                    println!("verified");
                    ExitCode::SUCCESS
                }
                Ok(v) => {
                    for m in &v.mismatches {
                        println!("mismatch: {m}");
                    }
                    ExitCode::from(1)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            }
        }
    }
}
