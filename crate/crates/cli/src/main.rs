//! `hintbandit`: run, sweep and calibrate hint-aware bandit experiments.
//!
//! Every flag can also be set through an environment variable named
//! `HINTBANDIT_<FLAG>` (for example `HINTBANDIT_THREADS=4`).
//!
//! Exit codes: 0 success, 2 configuration or usage error, 3 runtime failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hintbandit::harness::{
    calibrate_w, estimate, run_experiment, sweep_frontier, to_json, write_outputs, write_run, ExperimentConfig,
    RunOptions, SeedSpec,
};
use hintbandit::BanditError;

#[derive(Parser)]
#[command(name = "hintbandit", version, about = "Hint-aware linear bandit experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Output directory.
    #[arg(long, env = "HINTBANDIT_OUT", default_value = "out")]
    out: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long, env = "HINTBANDIT_THREADS")]
    threads: Option<usize>,
    /// Replace the configured seeds by this many consecutive ones.
    #[arg(long, env = "HINTBANDIT_SEEDS")]
    seeds: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write trace.csv, summary.json and manifest.json.
    Run {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run a frontier-policy experiment once per target G.
    SweepFrontier {
        config: PathBuf,
        /// Comma-separated G values.
        #[arg(long, env = "HINTBANDIT_G_VALUES", value_delimiter = ',', required = true)]
        g_values: Vec<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Run only the estimation phases and report r, r_perp and sample counts.
    Estimate {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Fit the default W from OFUL's regret quantiles.
    CalibrateW {
        /// Comma-separated dimensions.
        #[arg(value_delimiter = ',', required = true)]
        dims: Vec<usize>,
        horizon: u64,
        /// First seed of the replication range.
        #[arg(long, env = "HINTBANDIT_BASE_SEED", default_value_t = 0)]
        base_seed: u64,
        #[command(flatten)]
        common: Common,
    },
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<BanditError> for Failure {
    fn from(e: BanditError) -> Self {
        match e {
            BanditError::Config { .. } => Failure::Config(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

fn load(path: &Path, common: &Common) -> Result<ExperimentConfig, Failure> {
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(n) = common.seeds {
        let base_seed = match &cfg.seeds {
            SeedSpec::Range { base_seed, .. } => *base_seed,
            SeedSpec::List { list } => list.first().copied().unwrap_or(0),
        };
        cfg.seeds = SeedSpec::Range { base_seed, n_reps: n };
        cfg.validate()?;
    }
    Ok(cfg)
}

fn fmt(x: Option<f64>) -> String {
    x.map_or_else(|| "-".to_string(), |v| format!("{v:.3}"))
}

fn execute(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run { config, common } => {
            let cfg = load(&config, &common)?;
            let opts = RunOptions { threads: common.threads };
            let summary = run_experiment(&cfg, opts)?;
            write_run(&common.out, &cfg, &summary)?;
            println!(
                "{}: {} seeds, median regret {}, median hint regret {}, failed {}",
                cfg.name,
                summary.seeds.len(),
                fmt(summary.median_regret()),
                fmt(summary.median_hint_regret()),
                summary.failed_seeds.len()
            );
            if !summary.failed_seeds.is_empty() {
                return Err(Failure::Runtime(format!("seeds {:?} failed", summary.failed_seeds)));
            }
        }
        Command::SweepFrontier { config, g_values, common } => {
            let cfg = load(&config, &common)?;
            let table = sweep_frontier(&cfg, &g_values, RunOptions { threads: common.threads })?;
            let csv = table.csv();
            write_outputs(
                &common.out,
                "sweep-frontier",
                Some(&cfg),
                Vec::new(),
                &[("frontier.csv", csv.clone()), ("frontier.json", to_json(&table))],
            )?;
            print!("{csv}");
        }
        Command::Estimate { config, common } => {
            let cfg = load(&config, &common)?;
            let report = estimate(&cfg, RunOptions { threads: common.threads })?;
            write_outputs(&common.out, "estimate", Some(&cfg), Vec::new(), &[("estimate.json", to_json(&report))])?;
            println!("seed,r,r_perp,true_r_perp,norm_samples,total_samples,committed");
            for r in &report.records {
                println!(
                    "{},{},{},{:.3},{},{},{}",
                    r.seed,
                    fmt(r.r),
                    fmt(r.r_perp),
                    r.true_r_perp,
                    r.norm_samples.map_or_else(|| "-".into(), |n| n.to_string()),
                    r.total_samples,
                    r.committed.as_deref().or(r.error.as_deref()).unwrap_or("-")
                );
            }
        }
        Command::CalibrateW {
            dims,
            horizon,
            base_seed,
            common,
        } => {
            if dims.is_empty() {
                return Err(Failure::Config("config error at `dims`: empty list".into()));
            }
            let seeds = SeedSpec::Range {
                base_seed,
                n_reps: common.seeds.unwrap_or(20),
            };
            let cal = calibrate_w(&dims, horizon, seeds.clone(), RunOptions { threads: common.threads })?;
            write_outputs(
                &common.out,
                "calibrate-w",
                None,
                seeds.seeds(),
                &[("calibration.json", to_json(&cal))],
            )?;
            println!("dim,median_regret,q95_regret,w");
            for r in &cal.rows {
                println!("{},{:.2},{:.2},{:.5}", r.dim, r.median_regret, r.q95_regret, r.w);
            }
            println!("W = {:.5}", cal.w);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
    }
}
