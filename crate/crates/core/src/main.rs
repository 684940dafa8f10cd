use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use stratrep::commands::{self, EstimateOptions};
use stratrep::io::{resolve_output, scheme_from_args, write_output};
use stratrep::{DofRule, Result};

/// Replicate variance estimation for two-PSU-per-stratum designs.
///
/// Exit codes: 0 success, 2 bad arguments, 3 invalid input data, 4 invalid
/// config, 5 Hadamard construction, 6 invalid scheme or probability,
/// 7 file I/O, 1 anything else.
#[derive(Parser)]
#[command(version, about, long_about = None)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct SchemeArgs {
    /// brr, fay-brr, paired-jk, fay-jk or jk1
    #[arg(long, default_value = "brr")]
    scheme: String,
    /// Fay perturbation factor (Fay schemes; default 0.5)
    #[arg(long)]
    epsilon: Option<f64>,
    /// Hadamard order for the BRR family (default: smallest usable)
    #[arg(long)]
    order: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Variance, degrees of freedom and confidence interval for the total
    Estimate {
        /// Sample CSV (stratum,psu,weight,y), or zone CSV (zone,weight,y) for jk1
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        scheme: SchemeArgs,
        #[arg(long, default_value_t = 0.95)]
        level: f64,
        /// corrected, naive, fixed-h or normal
        #[arg(long, default_value = "corrected")]
        dof_rule: String,
        /// Cap the corrected degrees of freedom at the number of strata
        #[arg(long)]
        cap_at_h: bool,
        /// JSON report path; printed to stdout when neither this nor
        /// $STRATREP_OUTPUT_DIR is set
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Replicate weight CSV (stratum,psu,weight,rw1..rwK)
    Replicates {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        scheme: SchemeArgs,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Hadamard matrix of the given order as CSV of 1 and -1
    Hadamard {
        #[arg(long)]
        order: usize,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Coverage simulation from a TOML config
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// JSON report path (default: simulation.json in $STRATREP_OUTPUT_DIR
        /// or the current directory)
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn emit(path: Option<PathBuf>, content: &str) -> Result<()> {
    match path {
        Some(p) => write_output(&p, content),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Estimate {
            input,
            scheme,
            level,
            dof_rule,
            cap_at_h,
            output,
        } => {
            let opts = EstimateOptions {
                input,
                scheme: scheme_from_args(&scheme.scheme, scheme.epsilon, scheme.order)?,
                level,
                dof_rule: dof_rule.parse::<DofRule>()?,
                cap_at_h,
            };
            let report = commands::estimate(&opts)?;
            match resolve_output(output.as_deref(), "estimate.json") {
                Some(path) => {
                    write_output(&path, &report.to_json()?)?;
                    print!("{}", report.summary());
                    println!("report written to {}", path.display());
                }
                None => print!("{}", report.to_json()?),
            }
            Ok(())
        }
        Command::Replicates {
            input,
            scheme,
            output,
        } => {
            let spec = scheme_from_args(&scheme.scheme, scheme.epsilon, scheme.order)?;
            let csv = commands::replicates(&input, &spec)?;
            emit(resolve_output(output.as_deref(), "replicates.csv"), &csv)
        }
        Command::Hadamard { order, output } => {
            let csv = commands::hadamard(order)?;
            emit(output, &csv)
        }
        Command::Simulate { config, output } => {
            let report = commands::simulate(&config)?;
            let path = resolve_output(output.as_deref(), "simulation.json")
                .unwrap_or_else(|| Path::new("simulation.json").to_path_buf());
            let mut json = serde_json::to_string_pretty(&report)?;
            json.push('\n');
            write_output(&path, &json)?;
            println!("{}", report.summary());
            println!("report written to {}", path.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
