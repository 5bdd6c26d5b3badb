//! `crisiswatch`: serve the dashboard API, ingest tweets, generate synthetic
//! corpora and print offline reports.
//!
//! Exit codes: 0 success, 2 configuration error, 3 domain error (unknown or
//! inactive profile, bad range), 4 I/O error.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use chrono::{DateTime, NaiveDate, Utc};
use clap::{Parser, Subcommand};
use crisiswatch_core::corpus::{default_start, CorpusSpec};
use tracing_subscriber::EnvFilter;

use commands::{parse_date, parse_instant, BackgroundIngest};
use config::Config;
use error::CliError;

#[derive(Parser)]
#[command(name = "crisiswatch", version, about = "Crisis social-media monitoring backend")]
struct Cli {
    /// Config file (default: $CRISISWATCH_CONFIG, then ./crisiswatch.toml)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the HTTP API until interrupted
    Serve {
        /// Ingest a replay file in the background, as PROFILE=FILE
        #[arg(long = "ingest", value_name = "PROFILE=FILE", value_parser = parse_job)]
        ingest: Vec<(String, PathBuf)>,
        /// Follow the configured stream for PROFILE in the background
        #[arg(long = "stream", value_name = "PROFILE")]
        stream: Vec<String>,
    },
    /// Ingest a replay file (or the live stream) into the store
    Ingest {
        #[arg(long)]
        profile: String,
        /// Newline-delimited JSON replay file
        file: Option<PathBuf>,
        /// Read from the configured streaming endpoint until interrupted
        #[arg(long, conflicts_with = "file")]
        stream: bool,
    },
    /// Write a deterministic synthetic measles-outbreak replay file
    GenCorpus {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 28, value_parser = clap::value_parser!(u32).range(1..))]
        days: u32,
        #[arg(long = "per-day", default_value_t = 100, value_parser = clap::value_parser!(u32).range(1..))]
        per_day: u32,
        /// First UTC day (default 2024-03-04)
        #[arg(long, value_parser = parse_date)]
        start: Option<NaiveDate>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print stats, sentiment, weekly counts and top trending tweets as JSON
    Report {
        #[arg(long)]
        profile: String,
        /// Window start, RFC 3339 (default: crisis window start)
        #[arg(long, value_parser = parse_instant)]
        from: Option<DateTime<Utc>>,
        /// Window end, RFC 3339, exclusive (default: crisis window end)
        #[arg(long, value_parser = parse_instant)]
        to: Option<DateTime<Utc>>,
    },
}

fn parse_job(s: &str) -> Result<(String, PathBuf), String> {
    let (p, f) = s
        .split_once('=')
        .ok_or_else(|| format!("expected PROFILE=FILE, got {s:?}"))?;
    Ok((p.to_owned(), PathBuf::from(f)))
}

fn run(cli: Cli) -> Result<(), CliError> {
    let load = || Config::load(&Config::locate(cli.config.as_deref()));
    match cli.command {
        Command::Serve { ingest, stream } => {
            let cfg = load()?;
            let jobs = ingest
                .into_iter()
                .map(|(profile_id, file)| BackgroundIngest {
                    profile_id,
                    file: Some(file),
                })
                .chain(
                    stream
                        .into_iter()
                        .map(|profile_id| BackgroundIngest { profile_id, file: None }),
                )
                .collect();
            commands::serve(&cfg, jobs)
        }
        Command::Ingest { profile, file, stream } => commands::ingest(&load()?, &profile, file.as_deref(), stream),
        Command::GenCorpus {
            seed,
            days,
            per_day,
            start,
            out,
        } => {
            let spec = CorpusSpec {
                seed,
                days,
                per_day,
                start: start.unwrap_or_else(default_start),
            };
            commands::gen_corpus(&spec, &out)
        }
        Command::Report { profile, from, to } => commands::report(&load()?, &profile, from, to),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let default_level = if matches!(cli.command, Command::Serve { .. }) {
        "info"
    } else {
        "warn"
    };
    tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new(default_level)))
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("crisiswatch: {e}");
            e.exit_code()
        }
    }
}
