use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use updown_cli::experiments::UPDOWN;
use updown_cli::output::{ensure_dir, write_csv, write_sidecar};
use updown_cli::{
    gen_tables, run_convergence_experiment, run_segment_profile, run_variance_experiment, CliError, ExperimentConfig,
};

#[derive(Parser)]
#[command(name = "updown", version, about = "Upsampling-downsampling SMC experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Variance of the estimates against M at fixed MN.
    Variance(RunArgs),
    /// RMSE against N, with the importance-sampling baseline.
    Converge(RunArgs),
    /// Per-position estimates from one run.
    Profile(RunArgs),
    /// Write synthetic tables, a mini protein and a profile config.
    GenTables {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Args)]
struct RunArgs {
    /// TOML config, or JSON for a `.json` path.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; overrides the config `out`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; defaults to the number of cores.
    #[arg(long)]
    threads: Option<usize>,
}

impl RunArgs {
    fn load(&self) -> Result<(ExperimentConfig, PathBuf), CliError> {
        let mut config = ExperimentConfig::load(&self.config)?;
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(out) = &self.out {
            config.out = Some(out.clone());
        }
        let out = config.out.clone().unwrap_or_else(|| PathBuf::from("updown-out"));
        ensure_dir(&out)?;
        Ok((config, out))
    }
}

fn with_threads<T>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError>
where
    T: Send,
{
    match threads {
        None => Ok(f()),
        Some(0) => Err(CliError::Config("--threads must be at least 1".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

fn variance(args: &RunArgs) -> Result<(), CliError> {
    let (config, out) = args.load()?;
    let result = with_threads(args.threads, || run_variance_experiment(&config))??;
    let files = vec![
        write_csv(&out, "results.csv", &result.rows)?,
        write_csv(&out, "summary.csv", &result.summary)?,
        write_csv(&out, "timings.csv", &result.timings)?,
    ];
    let empty: Vec<String> =
        result.summary.iter().filter(|s| s.completed == 0).map(|s| format!("M = {}, N = {}", s.m, s.n)).collect();
    let mut cells: Vec<_> = result
        .summary
        .iter()
        .map(|s| json!({ "m": s.m, "n": s.n, "completed": s.completed, "died": s.died }))
        .collect();
    cells.dedup();
    with_threads(args.threads, || write_sidecar(&out, "variance", &config, &files, json!({ "cells": cells })))??;
    if !empty.is_empty() {
        return Err(CliError::AllDied(format!("every repetition died in cell(s) {}", dedup(empty).join("; "))));
    }
    Ok(())
}

fn converge(args: &RunArgs) -> Result<(), CliError> {
    let (config, out) = args.load()?;
    let result = with_threads(args.threads, || run_convergence_experiment(&config))??;
    let files = vec![
        write_csv(&out, "results.csv", &result.rows)?,
        write_csv(&out, "rmse.csv", &result.rmse)?,
        write_csv(&out, "slopes.csv", &result.slopes)?,
        write_csv(&out, "truth.csv", &result.truth)?,
        write_csv(&out, "timings.csv", &result.timings)?,
    ];
    with_threads(args.threads, || {
        write_sidecar(&out, "converge", &config, &files, json!({ "slopes": result.slopes }))
    })??;
    let empty: Vec<String> =
        result.rmse.iter().filter(|r| r.method == UPDOWN && r.completed == 0).map(|r| format!("N = {}", r.n)).collect();
    if !empty.is_empty() {
        return Err(CliError::AllDied(format!("every updown repetition died at {}", dedup(empty).join("; "))));
    }
    Ok(())
}

fn profile(args: &RunArgs) -> Result<(), CliError> {
    let (config, out) = args.load()?;
    let result = with_threads(args.threads, || run_segment_profile(&config))??;
    let files =
        vec![write_csv(&out, "profile.csv", &result.rows)?, write_csv(&out, "diagnostics.csv", &result.diagnostics)?];
    let summary = json!({
        "n_distinct": result.n_distinct,
        "ess": result.ess,
        "runtime_s": result.runtime_s,
        "died_at": result.died_at,
    });
    with_threads(args.threads, || write_sidecar(&out, "profile", &config, &files, summary))??;
    if let Some(step) = result.died_at {
        return Err(CliError::AllDied(format!("no particle has positive weight after step {step}")));
    }
    Ok(())
}

fn dedup(mut v: Vec<String>) -> Vec<String> {
    v.dedup();
    v
}

fn generate(out: &Path, seed: u64) -> Result<(), CliError> {
    ensure_dir(out)?;
    for f in gen_tables(seed, out)? {
        println!("{}", f.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Variance(a) => variance(a),
        Command::Converge(a) => converge(a),
        Command::Profile(a) => profile(a),
        Command::GenTables { out, seed } => generate(out, *seed),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
