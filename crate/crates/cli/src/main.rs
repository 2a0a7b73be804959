//! `confvar`: generate hypersurfaces with nontrivial conformal infinitesimal
//! bendings from PDE data, verify them, and export the results.
//!
//! Exit codes: 0 pass, 1 verification failure, 2 generation failure,
//! 3 I/O or configuration error.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "confvar", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Clone, Default)]
pub struct Common {
    /// Job configuration (TOML, or JSON by extension).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Seed for every randomized check; overrides the configuration.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Artifact directory; overrides the configuration.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum What {
    /// Hypersurface sample cloud.
    Samples,
    /// Fixed fiber-angle slice of the hypersurface.
    Slice,
    /// Verification report.
    Report,
    /// Special pair `(h, r)`.
    Pair,
    /// Conformal factor `mu`.
    Mu,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Obj,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the PDEs and write the artifact chain.
    Generate {
        #[command(flatten)]
        common: Common,
    },
    /// Run the verification battery on the artifacts and write report.json.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Multiplies every tolerance.
        #[arg(long, default_value_t = 1.0)]
        tol_scale: f64,
    },
    /// Convert an artifact to another format.
    Export {
        #[command(flatten)]
        common: Common,
        what: What,
        /// Defaults to the natural format of the artifact.
        #[arg(long, value_enum)]
        format: Option<Format>,
        /// Fiber angles of the slice, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        theta: Option<Vec<f64>>,
        /// Destination file; stdout if absent.
        #[arg(long)]
        dest: Option<PathBuf>,
    },
    /// Print a summary of report.json.
    Report {
        #[command(flatten)]
        common: Common,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate { common } => commands::generate(&common),
        Command::Verify { common, tol_scale } => commands::verify(&common, tol_scale),
        Command::Export {
            common,
            what,
            format,
            theta,
            dest,
        } => commands::export(&common, what, format, theta, dest),
        Command::Report { common } => commands::report(&common),
    };
    match result {
        Ok(code) => code.into(),
        Err(f) => {
            eprintln!("{}", f.to_json());
            f.exit_code().into()
        }
    }
}
