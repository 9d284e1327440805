//! `consensus-sim`: run consensus experiments over generated or recorded
//! communication sequences and write CSV series plus a JSON summary.
//!
//! Exit codes: 0 on success, 1 on I/O or runtime failure, 2 on a
//! configuration error, 3 when ARIS is requested with a non-positive initial
//! value.

mod config;
mod experiment;
mod report;
mod trace;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use config::{parse_initials, FileConfig, OneOrMany, Settings};

/// An error with the exit code it maps to.
#[derive(Debug, PartialEq)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn config(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    pub fn positivity(message: impl Into<String>) -> Self {
        Self {
            code: 3,
            message: message.into(),
        }
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "consensus-sim",
    version,
    about = "Distributed average-consensus experiment runner"
)]
struct Cli {
    /// Flat TOML file with any of the keys below (flags take precedence).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Sequence source: random | double-cycle | trace:PATH.
    #[arg(long, alias = "sequence")]
    seq: Option<String>,
    /// Back-signal probabilities for the random protocol, comma separated.
    #[arg(long, value_delimiter = ',')]
    p: Option<Vec<f64>>,
    /// Number of nodes (default 80; inferred from a trace when omitted).
    #[arg(long)]
    n: Option<usize>,
    /// Dimension of the initial vectors (default 1).
    #[arg(long)]
    d: Option<usize>,
    /// ARIS samples per component (default n).
    #[arg(long)]
    r: Option<usize>,
    /// Algorithms, comma separated: bm,da,oh,dda,gossip,aris.
    #[arg(long, alias = "algorithms", value_delimiter = ',')]
    algs: Option<Vec<String>>,
    /// Seeds, comma separated.
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// Steps of the random protocol.
    #[arg(long)]
    horizon: Option<usize>,
    /// Record a sample every this many applied signals.
    #[arg(long)]
    sample_every: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print only the connectivity report, for PATH or the configured sequence.
    #[arg(long, num_args = 0..=1, value_name = "PATH")]
    check_only: Option<Option<PathBuf>>,
    /// Number of blocks required for the k-fold IVSC/IVCC verdicts.
    #[arg(long)]
    k_fold: Option<usize>,
    /// `index` (s_i(0) = i) or a JSON list of vectors.
    #[arg(long)]
    initials: Option<String>,
    /// primary | alternative | randomized:P.
    #[arg(long)]
    dda_variant: Option<String>,
    /// instantaneous | fixed:D | uniform:LO:HI.
    #[arg(long)]
    delay: Option<String>,
    /// Also write each generated sequence as a JSONL trace.
    #[arg(long)]
    write_traces: bool,
}

impl Cli {
    fn overrides(&self) -> Result<FileConfig, Failure> {
        Ok(FileConfig {
            n: self.n,
            d: self.d,
            r: self.r,
            initials: self.initials.as_deref().map(parse_initials).transpose()?,
            algs: self.algs.clone().map(OneOrMany::Many),
            dda_variant: self.dda_variant.clone(),
            seq: self.seq.clone(),
            p: self.p.clone().map(OneOrMany::Many),
            seeds: self.seeds.clone().map(OneOrMany::Many),
            horizon: self.horizon,
            sample_every: self.sample_every,
            out: self.out.clone(),
            k_fold: self.k_fold,
            delay: self.delay.clone(),
            write_traces: self.write_traces.then_some(true),
        })
    }
}

fn execute(cli: Cli) -> Result<(), Failure> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let settings = Settings::resolve(file.merge(cli.overrides()?))?;

    if let Some(trace) = &cli.check_only {
        let reports = experiment::check_only(&settings, trace.as_deref())?;
        let text =
            serde_json::to_string_pretty(&reports).map_err(|e| Failure::io(e.to_string()))?;
        println!("{text}");
        return Ok(());
    }

    let summary = experiment::run_experiment(&settings)?;
    for r in &summary.runs {
        let outcome = match &r.consensus {
            Some(a) => format!("consensus at t={} (signal {})", a.time, a.event),
            None => format!("no consensus, final error {:.3e}", r.final_network_error),
        };
        println!(
            "{:<6} {:<12} seed {:<4} {outcome}",
            r.algorithm, r.sequence, r.seed
        );
    }
    println!(
        "wrote {} runs to {}",
        summary.runs.len(),
        settings.out.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
