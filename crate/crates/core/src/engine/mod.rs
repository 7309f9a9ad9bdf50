// Copyright 2026 The homjump Authors
// SPDX-License-Identifier: Apache-2.0

//! Monte-Carlo wavefunction engine and its master-equation reference.

mod lindblad;
mod propagator;
mod trajectory;

pub use lindblad::{lindblad_oracle, Liouvillian};
pub use propagator::{Propagator, Segment, DEFAULT_NORM_TOLERANCE, SPECTRAL_CONDITION_LIMIT};
pub use trajectory::{
    is_ground, run_trajectory, select_channel, trajectory_rng, Simulator, TrajectoryConfig,
    TrajectoryEvent, TrajectoryObserver, TrajectoryRecord, TrajectoryRng, GROUND_TOLERANCE,
};
