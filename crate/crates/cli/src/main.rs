use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

use amc_cli::commands;
use amc_cli::config::{ConfigArgs, ExperimentConfig};

#[derive(Parser)]
#[command(name = "amc", version, about = "Modulation and transmit-antenna classification experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write one feature dataset per (n_rx, snr).
    Generate(ConfigArgs),
    /// Train and evaluate pipelines over the sweep; writes JSON reports and results.csv.
    Run(ConfigArgs),
    /// Merge results files and print an accuracy table.
    Report {
        /// Results CSV files written by `run`.
        inputs: Vec<PathBuf>,
        /// Write the merged rows to this CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate(args) => {
            let cfg = ExperimentConfig::resolve(&args)?;
            for path in commands::generate(&cfg)? {
                println!("{}", path.display());
            }
        }
        Command::Run(args) => {
            let cfg = ExperimentConfig::resolve(&args)?;
            for r in commands::run(&cfg)? {
                println!(
                    "{:<17} {:<24} {:<10} n_rx={} {:>6} dB  {:6.2}%",
                    r.pipeline, r.classifier, r.feature_mode, r.n_rx, r.snr_db, r.accuracy_pct
                );
            }
            println!("results written to {}", cfg.out.join(commands::RESULTS_FILE).display());
        }
        Command::Report { inputs, out } => {
            let report = commands::report(&inputs)?;
            print!("{}", report.table);
            if let Some(path) = out {
                commands::write_results(&path, &report.rows)?;
            }
        }
    }
    Ok(())
}
