// Copyright 2026 The homjump Authors
// SPDX-License-Identifier: Apache-2.0

//! Library side of the `homjump` command: config parsing, commands and output.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use commands::{run, Command, RunOptions, RunSummary};
pub use config::ExperimentConfig;
pub use error::{CliError, Result};
