// Copyright 2026 The homjump Authors
// SPDX-License-Identifier: Apache-2.0

pub mod algebra;
pub mod analytic;
pub mod engine;
pub mod error;
pub mod sources;
pub mod statistics;

pub use error::{Error, Result};
