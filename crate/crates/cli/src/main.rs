//! Command-line front end: run experiments, summarize records, list cones.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use vogp::harness::{self, RunConfig, SummaryFile};
use vogp::ConeOrder;

#[derive(Parser)]
#[command(name = "vogp", version, about = "Pareto set identification under ordering cones")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a TOML config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Added to every seed in the config.
        #[arg(long, default_value_t = 0)]
        seed_offset: u64,
        /// Overrides the config's output directory.
        #[arg(long)]
        outdir: Option<PathBuf>,
    },
    /// Recompute aggregate statistics from per-seed records.
    Metrics {
        /// A run directory or a single `seed_<k>.jsonl` file.
        #[arg(long)]
        records: PathBuf,
    },
    /// Inspect builtin ordering cones.
    Cones {
        #[command(subcommand)]
        action: ConesAction,
    },
}

#[derive(Subcommand)]
enum ConesAction {
    /// Print every builtin cone with its matrix and ordering hardness.
    List,
}

fn run(config: &Path, seed_offset: u64, outdir: Option<PathBuf>) -> Result<(), Box<dyn std::error::Error>> {
    let mut cfg = RunConfig::load(config)?;
    for s in &mut cfg.seeds {
        *s += seed_offset;
    }
    if let Some(dir) = outdir {
        cfg.outdir = dir;
    }
    let result = harness::run_experiment(&cfg)?;
    harness::write_outputs(&result, &cfg.outdir)?;
    println!("{}", serde_json::to_string_pretty(&result.aggregate)?);
    Ok(())
}

fn metrics(records: &Path) -> Result<(), Box<dyn std::error::Error>> {
    let runs = harness::load_records(records)?;
    let summary_path = if records.is_dir() { Some(records.join("summary.json")) } else { None };
    let stored: Option<SummaryFile> = match summary_path.filter(|p| p.exists()) {
        Some(p) => Some(serde_json::from_str(&std::fs::read_to_string(p)?)?),
        None => None,
    };
    // Stored summaries cover all seeds; skip the comparison when reading one file.
    let agg = harness::check_consistency(&runs, stored.as_ref().map(|s| &s.aggregate))?;
    println!("{}", serde_json::to_string_pretty(&agg)?);
    Ok(())
}

fn cones_list() -> Result<(), Box<dyn std::error::Error>> {
    for (name, description) in vogp::cone::BUILTIN_CONES {
        println!("{name}: {description}");
        for dim in [2, 3] {
            let Ok(cone) = ConeOrder::builtin(name, dim) else { continue };
            println!("  M = {dim}: d_C = {:.6}", cone.d_c());
            for row in cone.w() {
                let cells: Vec<String> = row.iter().map(|v| format!("{v:9.5}")).collect();
                println!("    {}", cells.join(" "));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, seed_offset, outdir } => run(&config, seed_offset, outdir),
        Command::Metrics { records } => metrics(&records),
        Command::Cones { action: ConesAction::List } => cones_list(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
