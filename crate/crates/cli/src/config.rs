// Copyright 2026 The homjump Authors
// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};

use homjump_core::sources::SourceParams;
use homjump_core::statistics::SweepVariable;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const SCHEMA_VERSION: u32 = 1;

fn default_bin_width() -> f64 {
    0.25
}

/// Evenly spaced output times `start, start + step, …` up to `stop`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl GridSpec {
    /// Points are `start + k·step` (no accumulated rounding); `stop` is
    /// included when it falls on the grid up to a relative 1e-9 of `step`.
    pub fn points(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        (0..=n)
            .map(|k| (self.start + k as f64 * self.step).min(self.stop))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub ratios: Vec<f64>,
}

/// One experiment, read from a JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub source: SourceParams,
    pub n_trajectories: u64,
    pub t_max: f64,
    pub base_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_grid: Option<GridSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(default = "default_bin_width")]
    pub bin_width: f64,
    /// Trajectory counts for the scaling command.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_list: Option<Vec<u64>>,
    /// Output directory used when `--out` is not given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if self.schema_version != SCHEMA_VERSION {
            return bad(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            ));
        }
        self.source.validate()?;
        if self.n_trajectories < 1 {
            return bad("n_trajectories must be >= 1".into());
        }
        if !(self.t_max > 0.0) || !self.t_max.is_finite() {
            return bad(format!(
                "t_max must be positive and finite, got {}",
                self.t_max
            ));
        }
        if !(self.bin_width > 0.0) || !self.bin_width.is_finite() {
            return bad(format!(
                "bin_width must be positive, got {}",
                self.bin_width
            ));
        }
        if let Some(g) = &self.t_grid {
            if !(g.step > 0.0) || !g.step.is_finite() {
                return bad(format!("t_grid.step must be positive, got {}", g.step));
            }
            if !(g.start >= 0.0) || !(g.stop >= g.start) || !(g.stop <= self.t_max) {
                return bad(format!(
                    "t_grid must satisfy 0 <= start <= stop <= t_max, got [{}, {}] with t_max {}",
                    g.start, g.stop, self.t_max
                ));
            }
        }
        if let Some(s) = &self.sweep {
            if s.ratios.is_empty() {
                return bad("sweep.ratios must not be empty".into());
            }
        }
        if let Some(list) = &self.n_list {
            if list.is_empty() || list.contains(&0) {
                return bad("n_list must be non-empty with positive entries".into());
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Vec<f64>> {
        self.t_grid
            .map(|g| g.points())
            .ok_or_else(|| CliError::Config("this command needs a t_grid".into()))
    }
}
