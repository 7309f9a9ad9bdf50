// Copyright 2026 The homjump Authors
// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use homjump_core::engine::{Simulator, TrajectoryRecord};
use homjump_core::sources::{SingleCavityParams, SourceParams};
use homjump_core::statistics::{
    coincidence_sweep, delay_histogram, expectation_series, independent_union, CoincidenceResult,
    DelayHistogram, ExpectationSeries,
};
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};
use crate::output::{self, WrittenFile};

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    /// Trajectory-averaged expectation values on a time grid.
    Evolve,
    /// Same-detector fraction over a sweep of rate ratios.
    Coincidence,
    /// Histogram of click delays, split by detector agreement.
    Delays,
    /// Delay histogram for two independently simulated single sources.
    Independent,
    /// Wall time of the evolve workload for several trajectory counts.
    Scaling,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Command::Evolve => "evolve",
            Command::Coincidence => "coincidence",
            Command::Delays => "delays",
            Command::Independent => "independent",
            Command::Scaling => "scaling",
        })
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out_dir: Option<PathBuf>,
    /// Worker threads; `None` uses every available core.
    pub threads: Option<usize>,
    /// Overrides `base_seed` from the config.
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResultManifest {
    pub artifact: String,
    pub version: String,
    pub command: String,
    pub config: ExperimentConfig,
    pub threads: usize,
    pub runtime_seconds: f64,
    /// File name to SHA-256.
    pub files: BTreeMap<String, String>,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub out_dir: PathBuf,
    pub files: Vec<WrittenFile>,
    pub manifest: ResultManifest,
}

fn simulator(cfg: &ExperimentConfig, source: &SourceParams) -> Result<Simulator> {
    Ok(Simulator::new(Arc::new(source.build()?), cfg.t_max)?)
}

pub fn evolve(cfg: &ExperimentConfig) -> Result<ExpectationSeries> {
    let sim = simulator(cfg, &cfg.source)?;
    Ok(expectation_series(
        &sim,
        cfg.base_seed,
        cfg.n_trajectories,
        &cfg.grid()?,
    )?)
}

pub fn coincidence(cfg: &ExperimentConfig) -> Result<Vec<(f64, CoincidenceResult)>> {
    let sweep = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Config("the coincidence command needs a sweep".into()))?;
    Ok(coincidence_sweep(
        &cfg.source,
        sweep.variable,
        &sweep.ratios,
        cfg.n_trajectories,
        cfg.t_max,
        cfg.base_seed,
    )?)
}

pub fn delays(cfg: &ExperimentConfig) -> Result<(Vec<TrajectoryRecord>, DelayHistogram)> {
    let records = simulator(cfg, &cfg.source)?.run_ensemble(cfg.base_seed, cfg.n_trajectories)?;
    let h = delay_histogram(&records, cfg.bin_width)?;
    Ok((records, h))
}

/// The two single-source parameter sets: a `single_cavity_qed` source is
/// used twice, a `cavity_qed` source is split into its subsystems.
pub fn independent_sources(
    source: &SourceParams,
) -> Result<(SingleCavityParams, SingleCavityParams)> {
    match source {
        SourceParams::SingleCavityQed(p) => Ok((*p, *p)),
        SourceParams::CavityQed(p) => Ok((p.subsystem(1), p.subsystem(2))),
        SourceParams::TwoAtom(_) => Err(CliError::Config(
            "the independent command needs a single_cavity_qed or cavity_qed source".into(),
        )),
    }
}

/// Runs source A on seeds `[base, base + N)` and source B on `[base + N, base + 2N)`.
pub fn independent(cfg: &ExperimentConfig) -> Result<DelayHistogram> {
    let (a, b) = independent_sources(&cfg.source)?;
    let n = cfg.n_trajectories;
    let ra = simulator(cfg, &SourceParams::SingleCavityQed(a))?.run_ensemble(cfg.base_seed, n)?;
    let rb = simulator(cfg, &SourceParams::SingleCavityQed(b))?
        .run_ensemble(cfg.base_seed.wrapping_add(n), n)?;
    Ok(independent_union(&ra, &rb, cfg.bin_width)?)
}

/// Wall time of [`evolve`] (or of a bare ensemble when no grid is configured)
/// for each trajectory count in `n_list`.
pub fn scaling(cfg: &ExperimentConfig) -> Result<Vec<(u64, f64)>> {
    let list = cfg
        .n_list
        .as_ref()
        .ok_or_else(|| CliError::Config("the scaling command needs n_list".into()))?;
    let sim = simulator(cfg, &cfg.source)?;
    let grid = cfg.t_grid.map(|g| g.points());
    list.iter()
        .map(|&n| {
            let start = Instant::now();
            match &grid {
                Some(grid) => {
                    expectation_series(&sim, cfg.base_seed, n, grid)?;
                }
                None => {
                    sim.run_ensemble(cfg.base_seed, n)?;
                }
            }
            Ok((n, start.elapsed().as_secs_f64()))
        })
        .collect()
}

fn execute(
    command: Command,
    cfg: &ExperimentConfig,
    dir: &std::path::Path,
) -> Result<Vec<WrittenFile>> {
    use output::*;
    Ok(match command {
        Command::Evolve => {
            let s = evolve(cfg)?;
            vec![write_csv(
                dir,
                "expectations.csv",
                &EXPECTATIONS_HEADER,
                &expectation_rows(&s),
            )?]
        }
        Command::Coincidence => {
            let points = coincidence(cfg)?;
            vec![write_csv(
                dir,
                "coincidence.csv",
                &COINCIDENCE_HEADER,
                &coincidence_rows(&points),
            )?]
        }
        Command::Delays => {
            let (_, h) = delays(cfg)?;
            vec![write_csv(
                dir,
                "delays.csv",
                &DELAYS_HEADER,
                &delay_rows(&h),
            )?]
        }
        Command::Independent => {
            let h = independent(cfg)?;
            vec![write_csv(
                dir,
                "delays.csv",
                &DELAYS_HEADER,
                &delay_rows(&h),
            )?]
        }
        Command::Scaling => {
            let points = scaling(cfg)?;
            vec![write_csv(
                dir,
                "scaling.csv",
                &SCALING_HEADER,
                &scaling_rows(&points),
            )?]
        }
    })
}

/// Runs `command`, writes its data files and then `manifest.json` into the output directory.
pub fn run(command: Command, mut cfg: ExperimentConfig, opts: &RunOptions) -> Result<RunSummary> {
    if let Some(seed) = opts.seed {
        cfg.base_seed = seed;
    }
    cfg.validate()?;
    let out_dir = opts
        .out_dir
        .clone()
        .or_else(|| cfg.output.clone())
        .ok_or_else(|| {
            CliError::Config("no output directory: pass --out or set `output`".into())
        })?;
    std::fs::create_dir_all(&out_dir).map_err(|e| CliError::io(&out_dir, e))?;

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = opts.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be >= 1".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Config(format!("cannot start worker pool: {e}")))?;

    let start = Instant::now();
    let files = pool.install(|| execute(command, &cfg, &out_dir))?;
    let runtime_seconds = start.elapsed().as_secs_f64();

    let manifest = ResultManifest {
        artifact: "homjump".into(),
        version: format!("homjump {}", env!("CARGO_PKG_VERSION")),
        command: command.to_string(),
        config: cfg,
        threads: pool.current_num_threads(),
        runtime_seconds,
        files: files
            .iter()
            .map(|f| (f.name.clone(), f.sha256.clone()))
            .collect(),
    };
    let mut json = serde_json::to_vec_pretty(&manifest)
        .map_err(|e| CliError::Config(format!("manifest encoding: {e}")))?;
    json.push(b'\n');
    output::write_atomic(&out_dir.join(MANIFEST_NAME), &json)?;
    Ok(RunSummary {
        out_dir,
        files,
        manifest,
    })
}
