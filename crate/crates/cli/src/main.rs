//! `kinkprobe probe …` runs one configuration; `kinkprobe repro <preset>`
//! regenerates a published figure's data.
//!
//! Exit status: 0 success, 1 input error, 2 validation defect above
//! tolerance, 64 usage error.

mod config;
mod output;
mod presets;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{Format, Overrides, RunConfig};
use presets::Preset;

#[derive(Debug)]
pub enum Failure {
    Input(String),
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Input(msg) => f.write_str(msg),
        }
    }
}

impl From<kinkprobe::Error> for Failure {
    fn from(e: kinkprobe::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

#[derive(Parser)]
#[command(name = "kinkprobe", version, about = "Full counting statistics of Ising-chain observables")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emulate the probe for one configuration and reconstruct the distribution
    Probe(Overrides),
    /// Regenerate the data behind a figure
    Repro {
        #[arg(value_enum)]
        preset: Preset,
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        format: Option<Vec<Format>>,
        #[arg(long)]
        oracle: bool,
    },
}

const EXIT_INPUT: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_USAGE: u8 = 64;

fn init_threads() -> Result<(), Failure> {
    let Ok(value) = std::env::var("KINKPROBE_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| Failure::Input(format!("KINKPROBE_THREADS must be a positive integer, got `{value}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::Input(format!("cannot size the thread pool: {e}")))
}

fn resolve(command: Command) -> Result<(RunConfig, String), Failure> {
    match command {
        Command::Probe(flags) => {
            let config = flags.resolve(RunConfig::default())?;
            let title = format!(
                "{:?} {:?}, N={}, J={}, h={}, beta={}",
                config.model, config.obs, config.n, config.j, config.h, config.beta
            );
            Ok((config, title))
        }
        Command::Repro {
            preset,
            out,
            format,
            oracle,
        } => {
            let mut config = preset.config();
            if let Some(out) = out {
                config.out = out;
            }
            if let Some(mut format) = format {
                format.sort();
                format.dedup();
                config.format = format;
            }
            config.oracle = oracle;
            Ok((config, preset.title().to_string()))
        }
    }
}

fn run(command: Command) -> Result<ExitCode, Failure> {
    init_threads()?;
    let (config, title) = resolve(command)?;
    let outcome = run::execute(&config)?;
    output::write_all(&config, &outcome, &title)?;
    let v = &outcome.summary.validation;
    if v.passed {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!(
            "validation failed: worst defect {:e} exceeds tolerance {:e}\n{}",
            v.worst_defect,
            v.tolerance,
            serde_json::to_string_pretty(&v.report).expect("report serializes")
        );
        Ok(ExitCode::from(EXIT_VALIDATION))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}
