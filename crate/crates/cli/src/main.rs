use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use supertorsion_cli::{cmd_cohomology, cmd_selftest, cmd_torsion, cmd_validate, corpus_dir, load_job, Outcome, TorsionArgs};

/// Exact Reidemeister torsion of Z2-graded representations up to homotopy.
///
/// Prints one JSON document on standard output. Exit status 0 on success,
/// 1 when a validator, computation or check fails, 2 for unreadable input.
#[derive(Parser)]
#[command(name = "supertorsion", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the complex, the flatness equations and the dual.
    Validate { job: String },
    /// Cohomology dimensions and the spectral page table.
    Cohomology { job: String },
    /// Torsion through both routes, plus the requested invariance checks.
    Torsion {
        job: String,
        /// Comma-separated: subdivision, duality, mu, quasi-iso.
        #[arg(long, value_delimiter = ',')]
        checks: Option<Vec<String>>,
        /// Barycentric subdivision depth for the subdivision check.
        #[arg(long)]
        subdivide: Option<usize>,
        /// Significant digits of the floating display value.
        #[arg(long)]
        precision: Option<usize>,
    },
    /// Property suite over the corpus directory.
    Selftest {
        /// Corpus directory; defaults to $SUPERTORSION_CORPUS or the bundled corpus.
        #[arg(long)]
        corpus: Option<PathBuf>,
        /// Flip a sign in the cup pairing; the suite must fail.
        #[arg(long)]
        inject_sign_error: bool,
    },
}

fn emit(o: Outcome) -> ExitCode {
    // A closed pipe downstream is not our failure.
    let _ = writeln!(std::io::stdout().lock(), "{}", serde_json::to_string_pretty(&o.document).expect("json"));
    if let Some(err) = o.document.get("error") {
        eprintln!("error: {}", err["message"].as_str().unwrap_or(""));
    }
    if let Some(failures) = o.document.get("failures").and_then(|f| f.as_array()) {
        for f in failures {
            eprintln!("failed: {}", f.as_str().unwrap_or(""));
        }
    }
    ExitCode::from(o.code as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Validate { job } => load_job(&job).map(|j| cmd_validate(&j)),
        Command::Cohomology { job } => load_job(&job).map(|j| cmd_cohomology(&j)),
        Command::Torsion {
            job,
            checks,
            subdivide,
            precision,
        } => load_job(&job).map(|j| {
            cmd_torsion(
                &j,
                &TorsionArgs {
                    checks,
                    subdivide,
                    precision,
                },
            )
        }),
        Command::Selftest {
            corpus,
            inject_sign_error,
        } => Ok(cmd_selftest(&corpus.unwrap_or_else(corpus_dir), inject_sign_error)),
    };
    emit(outcome.unwrap_or_else(|o| o))
}
