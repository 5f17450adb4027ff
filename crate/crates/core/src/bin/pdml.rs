use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pdml_core::cli::{cmd_design, cmd_eval, cmd_simulate, cmd_trace, Overrides, RunConfig};
use pdml_core::{DetectorKind, Error, Result};

/// Power-distortion GNSS interference classifier.
#[derive(Parser)]
#[command(name = "pdml", version)]
struct Cli {
    /// Worker threads for dataset generation (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML run configuration; defaults are used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    detector: Option<DetectorKind>,
    #[arg(long)]
    taps: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn load(&self) -> Result<RunConfig> {
        let base = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        Ok(base.apply(&Overrides {
            seed: self.seed,
            detector: self.detector,
            taps: self.taps,
            out: self.out.clone(),
        }))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a labeled Monte-Carlo dataset.
    Simulate(Common),
    /// Design decision regions from a dataset.
    Design {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        dataset: PathBuf,
    },
    /// Evaluate a dataset against saved regions.
    Eval {
        #[arg(long)]
        regions: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run a scripted attack schedule through saved regions.
    Trace {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        schedule: PathBuf,
        #[arg(long)]
        regions: PathBuf,
    },
}

fn report(path: &Path) {
    println!("wrote {}", path.display());
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::Simulate(common) => {
            let out = cmd_simulate(&common.load()?)?;
            println!("{} measurements", out.samples.len());
            report(&out.path);
        }
        Command::Design { common, dataset } => {
            let out = cmd_design(&common.load()?, &dataset)?;
            let counts = out.regions.label_counts();
            println!(
                "cells per label: H0={} H1={} H2={} H3={}; clamped samples: {}",
                counts[0], counts[1], counts[2], counts[3], out.regions.provenance.clamped
            );
            report(&out.regions_path);
            report(&out.svg_path);
        }
        Command::Eval {
            regions,
            dataset,
            out,
        } => {
            let out = cmd_eval(&regions, &dataset, &out)?;
            print!("{}", out.summary);
            report(&out.confusion_path);
            report(&out.summary_path);
        }
        Command::Trace {
            common,
            schedule,
            regions,
        } => {
            let out = cmd_trace(&common.load()?, &schedule, &regions)?;
            if let Some(last) = out.timeline.cumulative.last() {
                println!(
                    "final cumulative: H0={:.3} H1={:.3} H2={:.3} H3={:.3}",
                    last[0], last[1], last[2], last[3]
                );
            }
            report(&out.trace_path);
            report(&out.svg_path);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.category());
            ExitCode::FAILURE
        }
    }
}
