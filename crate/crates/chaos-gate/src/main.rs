//! `chaos-gate` — experiment front end.
//!
//! Subcommands mirror the experiment harness: `build-pce`, `table1`,
//! `figure1`, `figure2`, `fields`, `smallnoise`, `cost`. Configuration comes
//! from an optional `key=value` file plus flag overrides; outputs are CSV
//! (with `#` metadata headers) and SVG under the output directory.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use chaos_core::experiments::{
    self, ExperimentConfig, RunReport,
};

#[derive(Parser)]
#[command(name = "chaos-gate", version, about = "Surrogate-posterior experiments for an elliptic inverse problem")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// plain-text key=value configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    /// master seed override
    #[arg(long)]
    seed: Option<u64>,
    /// output directory override
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Build a PCE surrogate and persist its coefficient table
    BuildPce {
        #[command(flatten)]
        common: Common,
        /// truncation order (even)
        #[arg(long)]
        order: u32,
    },
    /// Pointwise relative-error table at (0.5, 0.5625) over the θ₁ sweep
    Table1 {
        #[command(flatten)]
        common: Common,
        /// sweep bounds a:b (default -8:2)
        #[arg(long, value_parser = parse_range)]
        theta1_range: Option<(i64, i64)>,
    },
    /// Full-field FEM vs PCE contours at θ=(−2,−1,1) and (−8,−1,1)
    Figure1 {
        #[command(flatten)]
        common: Common,
    },
    /// Estimation-error sweep for exact and surrogate posteriors
    Figure2 {
        #[command(flatten)]
        common: Common,
        /// sweep bounds a:b (default -10:2)
        #[arg(long, value_parser = parse_range)]
        theta1_range: Option<(i64, i64)>,
    },
    /// Log-permeability reconstructions at a strongly informative parameter
    Fields {
        #[command(flatten)]
        common: Common,
        /// true θ₁ (default -15)
        #[arg(long, default_value_t = -15.0)]
        theta1: f64,
    },
    /// Small-noise claim curves on the toy models
    Smallnoise {
        #[command(flatten)]
        common: Common,
    },
    /// PDE-solve cost accounting and reconciliation
    Cost {
        #[command(flatten)]
        common: Common,
    },
}

fn parse_range(value: &str) -> Result<(i64, i64), String> {
    let (a, b) = value.split_once(':').ok_or("expected a:b")?;
    let lo = a.trim().parse().map_err(|_| format!("bad bound {a}"))?;
    let hi = b.trim().parse().map_err(|_| format!("bad bound {b}"))?;
    if lo > hi {
        return Err(format!("empty range {lo}:{hi}"));
    }
    Ok((lo, hi))
}

fn load_config(common: &Common) -> chaos_core::Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &common.out {
        cfg.out_dir = out.clone();
    }
    Ok(cfg)
}

fn run() -> chaos_core::Result<RunReport> {
    let cli = Cli::parse();
    match cli.command {
        Command::BuildPce { common, order } => {
            let cfg = load_config(&common)?;
            Ok(experiments::run_build_pce(&cfg, order)?.report)
        }
        Command::Table1 {
            common,
            theta1_range,
        } => {
            let mut cfg = load_config(&common)?;
            if theta1_range.is_some() {
                cfg.theta1_range = theta1_range;
            }
            Ok(experiments::run_table1(&cfg)?.report)
        }
        Command::Figure1 { common } => {
            let cfg = load_config(&common)?;
            Ok(experiments::run_figure1(&cfg)?.report)
        }
        Command::Figure2 {
            common,
            theta1_range,
        } => {
            let mut cfg = load_config(&common)?;
            if theta1_range.is_some() {
                cfg.theta1_range = theta1_range;
            }
            Ok(experiments::run_figure2(&cfg)?.report)
        }
        Command::Fields { common, theta1 } => {
            let cfg = load_config(&common)?;
            Ok(experiments::run_fields(&cfg, theta1)?.report)
        }
        Command::Smallnoise { common } => {
            let cfg = load_config(&common)?;
            Ok(experiments::run_smallnoise(&cfg)?.report)
        }
        Command::Cost { common } => {
            let cfg = load_config(&common)?;
            Ok(experiments::run_cost_report(&cfg)?.report)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(report) => {
            print!("{}", report.summary());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
