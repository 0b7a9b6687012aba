//! `fvtc`: compress vision-token tensors, analyze their spectra, estimate
//! inference costs, and self-verify the transform implementation.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 verification
//! failure. Reports go to standard output as `key=value` text; human
//! tables are flag-gated; diagnostics go to standard error.

mod commands;
mod genspec;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{ArgGroup, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "fvtc",
    version,
    about = "Frequency-domain vision-token compression toolkit",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compress a tensor file of N^2 tokens down to C^2 tokens
    Compress {
        /// Input tensor file (token sequence or feature grid)
        #[arg(long)]
        input: PathBuf,
        /// Kept grid side C
        #[arg(long = "C", value_name = "SIDE")]
        c: usize,
        /// Multiply outputs by C/N to preserve the spatial mean
        #[arg(long)]
        rescale: bool,
        /// Output tensor file (C^2 tokens)
        #[arg(long)]
        output: PathBuf,
        /// Print the report as JSON instead of key=value
        #[arg(long)]
        json: bool,
    },

    /// Write the frequency spectrum of a grid as CSV
    #[command(group(ArgGroup::new("source").required(true).args(["input", "gen"])))]
    Spectrum {
        /// Input tensor file
        #[arg(long)]
        input: Option<PathBuf>,
        /// Synthetic source, e.g. ar1:0.9,N=24,h=256,seed=7
        #[arg(long, value_name = "SPEC")]
        gen: Option<String>,
        /// Output CSV path
        #[arg(long)]
        output: PathBuf,
    },

    /// Corner energy fractions and spectrum flatness of a grid
    #[command(group(ArgGroup::new("source").required(true).args(["input", "gen"])))]
    Stats {
        /// Input tensor file
        #[arg(long)]
        input: Option<PathBuf>,
        /// Synthetic source, e.g. iid:N=24,h=256,seed=7
        #[arg(long, value_name = "SPEC")]
        gen: Option<String>,
        /// Corner sides to evaluate, comma separated
        #[arg(long = "C", value_name = "SIDES", value_delimiter = ',')]
        c: Vec<usize>,
    },

    /// FLOPs and KV-cache estimates from a config file
    Cost {
        /// key=value config file
        #[arg(long)]
        config: PathBuf,
        /// Language-model-only view: prefill FLOPs over this many tokens
        #[arg(long)]
        tokens: Option<u64>,
        /// Pipeline view with the compressor enabled at side C
        #[arg(long = "C", value_name = "SIDE")]
        c: Option<u64>,
        /// Also print reductions against a pipeline carrying this many
        /// vision tokens (compressor off)
        #[arg(long = "baseline-tokens", value_name = "N")]
        baseline_tokens: Option<u64>,
        /// Override the text-token count from the config
        #[arg(long = "text-tokens", value_name = "N")]
        text_tokens: Option<u64>,
        /// Print an aligned human-readable table instead of key=value
        #[arg(long)]
        table: bool,
    },

    /// Generate a synthetic feature grid tensor file
    Gen {
        /// Generator spec, e.g. ar1:0.9,N=24,h=256,seed=7
        #[arg(long, value_name = "SPEC")]
        gen: String,
        /// Output tensor file
        #[arg(long)]
        output: PathBuf,
    },

    /// Time the direct vs fast transform at the given sizes
    Bench {
        /// Transform lengths, comma separated
        #[arg(long, value_name = "LIST", value_delimiter = ',')]
        sizes: Vec<usize>,
        /// Fail (exit 3) instead of warning when the fast path loses
        #[arg(long)]
        strict: bool,
    },

    /// Run the self-check suites (oracle equivalence, roundtrip,
    /// parseval, compressor identity, separability)
    Verify {
        /// Largest transform length to exercise
        #[arg(long = "max-N", value_name = "N")]
        max_n: Option<usize>,
    },
}

/// Failure classes mapped onto exit codes 1/2/3.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Verification(String),
}

impl From<fvtc_core::Error> for CliError {
    fn from(e: fvtc_core::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

pub type CliResult = Result<(), CliError>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };

    let result = match cli.command {
        Command::Compress {
            input,
            c,
            rescale,
            output,
            json,
        } => commands::compress(&input, c, rescale, &output, json),
        Command::Spectrum { input, gen, output } => {
            commands::spectrum(input.as_deref(), gen.as_deref(), &output)
        }
        Command::Stats { input, gen, c } => {
            commands::stats(input.as_deref(), gen.as_deref(), &c)
        }
        Command::Cost {
            config,
            tokens,
            c,
            baseline_tokens,
            text_tokens,
            table,
        } => commands::cost(&config, tokens, c, baseline_tokens, text_tokens, table),
        Command::Gen { gen, output } => commands::gen(&gen, &output),
        Command::Bench { sizes, strict } => commands::bench(&sizes, strict),
        Command::Verify { max_n } => commands::verify(max_n),
    };

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Verification(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
