//! `oddform`: config-driven verification suites for odd-dimensional unitary
//! groups over finite commutative rings with involution.
//!
//! Exit codes: 0 all checks pass, 1 findings (or budget exhaustion),
//! 2 malformed input.

mod config;
mod suites;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use config::ScenarioConfig;
use suites::{RunReport, SweepMode};

#[derive(Parser)]
#[command(name = "oddform", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Scenario config file (JSON)
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Sweep every index tuple and ring value (default)
    #[arg(long, global = true, conflicts_with = "samples")]
    exhaustive: bool,

    /// Run a seeded sample of this many cases instead of the full sweep
    #[arg(long, global = true)]
    samples: Option<u64>,

    /// Master seed for all sampling (overrides the config seed)
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Element budget for closures (overrides the config budget)
    #[arg(long, global = true)]
    budget: Option<usize>,

    /// Write the JSON report here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Validate the ring context, form parameter and odd form ideal
    Validate,
    /// Run the transvection relation and form identity suite
    Relations,
    /// Compute the configured subgroup closure or normal closure
    Closure,
    /// Compute lower/upper levels and their laws for the configured subgroup
    Levels,
    /// Run the full sandwich verdict at the configured exponent
    Sandwich,
    /// Verify the proof-step identities (extraction lemmas, step 1, arrows)
    Proofcheck,
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    if let Ok(threads) = std::env::var("ODDFORM_THREADS") {
        if let Ok(k) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
        } else {
            eprintln!("ODDFORM_THREADS must be an integer");
            return ExitCode::from(2);
        }
    }

    let config_path = match &cli.config {
        Some(p) => p.clone(),
        None => {
            eprintln!("--config <path> is required");
            return ExitCode::from(2);
        }
    };
    let mut cfg = match ScenarioConfig::load(&config_path) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("{msg}");
            return ExitCode::from(2);
        }
    };
    if let Some(b) = cli.budget {
        cfg.budget = Some(b);
    }
    let seed = cli.seed.unwrap_or_else(|| cfg.master_seed());
    let mode = match cli.samples {
        Some(n) => SweepMode::Sampled(n),
        None => SweepMode::Exhaustive,
    };

    let started = Instant::now();
    let suite_name = match cli.command {
        Command::Validate => "validate",
        Command::Relations => "relations",
        Command::Closure => "closure",
        Command::Levels => "levels",
        Command::Sandwich => "sandwich",
        Command::Proofcheck => "proofcheck",
    };
    let report: Result<RunReport, oddform_core::Error> = match cli.command {
        Command::Validate => Ok(suites::run_validate(&cfg, seed)),
        Command::Relations => suites::run_relations_suite(&cfg, seed, mode),
        Command::Closure => suites::run_closure_suite(&cfg, seed),
        Command::Levels => suites::run_levels_suite(&cfg, seed),
        Command::Sandwich => suites::run_sandwich_suite(&cfg, seed),
        Command::Proofcheck => suites::run_proofcheck_suite(&cfg, seed, mode),
    };
    let report = match report {
        Ok(r) => r,
        Err(oddform_core::Error::MalformedSpec(msg)) => {
            eprintln!("invalid input: {msg}");
            return ExitCode::from(2);
        }
        Err(oddform_core::Error::ParseElement(s)) => {
            eprintln!("invalid input: cannot parse element {s:?}");
            return ExitCode::from(2);
        }
        Err(e) => {
            eprintln!("suite {suite_name} failed: {e}");
            return ExitCode::from(1);
        }
    };

    // timing stays on stderr so the report is byte-identical across runs
    eprintln!(
        "suite={} wall_ms={}",
        report.suite,
        started.elapsed().as_millis()
    );

    let text = report.to_json();
    match &cli.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                eprintln!("cannot write report {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{text}"),
    }
    if report.failures() > 0 {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}
