// Copyright 2026 The homjump Authors
// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use homjump_cli::{run, Command, ExperimentConfig, RunOptions};

/// Quantum-jump simulation of two-photon interference at a beam splitter.
#[derive(Debug, Parser)]
#[command(name = "homjump", version)]
struct Args {
    #[arg(value_enum)]
    command: Command,

    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,

    /// Output directory; defaults to the config's `output` field.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Worker threads (default: all cores).
    #[arg(long, env = "HOMJUMP_THREADS")]
    threads: Option<usize>,

    /// Overrides the config's base_seed.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = ExperimentConfig::load(&args.config).and_then(|cfg| {
        run(
            args.command,
            cfg,
            &RunOptions {
                out_dir: args.out,
                threads: args.threads,
                seed: args.seed,
            },
        )
    });
    match result {
        Ok(summary) => {
            for f in &summary.files {
                eprintln!("wrote {}", f.path.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("homjump: {e}");
            ExitCode::FAILURE
        }
    }
}
