// Copyright 2026 The homjump Authors
// SPDX-License-Identifier: Apache-2.0

use std::ops::Range;
use std::sync::Arc;

use rand::distributions::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::propagator::{Propagator, DEFAULT_NORM_TOLERANCE};
use crate::algebra::{apply, StateVector};
use crate::error::{Error, Result};
use crate::sources::{ChannelLabel, JumpChannel, SystemModel};

/// A state counts as the global ground state once its population there
/// reaches `1 − GROUND_TOLERANCE`.
pub const GROUND_TOLERANCE: f64 = 1e-12;

/// Per-trajectory generator. Each trajectory owns a stream seeded with
/// `base_seed + index`, so results do not depend on scheduling.
pub type TrajectoryRng = ChaCha8Rng;

pub fn trajectory_rng(seed: u64) -> TrajectoryRng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryEvent {
    pub time: f64,
    pub channel: ChannelLabel,
}

/// One stochastic realization.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub events: Vec<TrajectoryEvent>,
    /// Normalized state at `terminated_at`.
    pub final_state: StateVector,
    /// Time of the last jump if the ground state was reached, otherwise the horizon.
    pub terminated_at: f64,
    pub horizon: f64,
    pub rng_seed: u64,
}

impl TrajectoryRecord {
    pub fn detector_events(&self) -> impl Iterator<Item = &TrajectoryEvent> + '_ {
        self.events.iter().filter(|e| e.channel.is_detector())
    }

    /// First two detector clicks, if there were at least two.
    pub fn first_two_clicks(&self) -> Option<(TrajectoryEvent, TrajectoryEvent)> {
        let mut clicks = self.detector_events();
        Some((*clicks.next()?, *clicks.next()?))
    }

    pub fn n_clicks(&self) -> usize {
        self.detector_events().count()
    }

    pub fn reached_ground(&self) -> bool {
        self.terminated_at < self.horizon || is_ground(&self.final_state)
    }
}

#[derive(Debug, Clone)]
pub struct TrajectoryConfig {
    pub model: Arc<SystemModel>,
    pub t_max: f64,
    pub norm_root_tolerance: f64,
    pub rng_seed: u64,
}

impl TrajectoryConfig {
    pub fn new(model: Arc<SystemModel>, t_max: f64, rng_seed: u64) -> Self {
        TrajectoryConfig {
            model,
            t_max,
            norm_root_tolerance: DEFAULT_NORM_TOLERANCE,
            rng_seed,
        }
    }
}

/// Runs a single trajectory. Builds a fresh propagator; use [`Simulator`] for ensembles.
pub fn run_trajectory(cfg: &TrajectoryConfig) -> Result<TrajectoryRecord> {
    let sim = Simulator::with_tolerance(cfg.model.clone(), cfg.t_max, cfg.norm_root_tolerance)?;
    sim.run(cfg.rng_seed)
}

/// Picks the channel whose cumulative weight first exceeds `u · Σw`, with
/// weights `‖J_c ψ‖²` on the unnormalized pre-jump state, in declared order.
pub fn select_channel(psi: &StateVector, channels: &[JumpChannel], u: f64) -> Result<usize> {
    if !(0.0..1.0).contains(&u) {
        return Err(Error::invalid(format!(
            "channel draw must lie in [0, 1), got {u}"
        )));
    }
    let weights = channels
        .iter()
        .map(|c| Ok(apply(c.operator(), psi)?.norm_sq()))
        .collect::<Result<Vec<f64>>>()?;
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Logic(
            "jump sampled but every channel weight is zero".into(),
        ));
    }
    let target = u * total;
    let mut acc = 0.0;
    let mut last_active = 0;
    for (i, w) in weights.iter().enumerate() {
        if *w > 0.0 {
            last_active = i;
            acc += w;
            if target < acc {
                return Ok(i);
            }
        }
    }
    // rounding in the running sum
    Ok(last_active)
}

/// Whether a normalized state lies in the all-ground basis ket.
pub fn is_ground(psi: &StateVector) -> bool {
    psi.amplitudes()[0].norm_sqr() >= (1.0 - GROUND_TOLERANCE) * psi.norm_sq()
}

/// Callbacks invoked while a trajectory runs.
pub trait TrajectoryObserver {
    /// Normalized conditional state at grid point `index`. A grid time equal
    /// to a jump time sees the post-jump state.
    fn grid_state(&mut self, _index: usize, _t: f64, _state: &StateVector) {}

    /// `pre` is the unnormalized state just before the jump, `post` the renormalized one after.
    fn jump(&mut self, _event: &TrajectoryEvent, _pre: &StateVector, _post: &StateVector) {}
}

impl TrajectoryObserver for () {}

/// A model with its propagator, ready to run many trajectories.
#[derive(Debug, Clone)]
pub struct Simulator {
    model: Arc<SystemModel>,
    propagator: Propagator,
    t_max: f64,
    tolerance: f64,
}

impl Simulator {
    pub fn new(model: Arc<SystemModel>, t_max: f64) -> Result<Self> {
        Self::with_tolerance(model, t_max, DEFAULT_NORM_TOLERANCE)
    }

    pub fn with_tolerance(model: Arc<SystemModel>, t_max: f64, tolerance: f64) -> Result<Self> {
        if !(t_max > 0.0) || !t_max.is_finite() {
            return Err(Error::invalid(format!(
                "t_max must be positive and finite, got {t_max}"
            )));
        }
        if !(tolerance > 0.0) {
            return Err(Error::invalid("norm root tolerance must be positive"));
        }
        let propagator = Propagator::new(model.h_nonhermitian())?;
        Ok(Simulator {
            model,
            propagator,
            t_max,
            tolerance,
        })
    }

    pub fn model(&self) -> &Arc<SystemModel> {
        &self.model
    }

    pub fn propagator(&self) -> &Propagator {
        &self.propagator
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn run(&self, seed: u64) -> Result<TrajectoryRecord> {
        self.run_with(seed, &[], &mut ())
    }

    /// Runs one trajectory, reporting grid states and jumps to `observer`.
    /// `grid` must be non-decreasing and inside `[0, t_max]`.
    pub fn run_with(
        &self,
        seed: u64,
        grid: &[f64],
        observer: &mut impl TrajectoryObserver,
    ) -> Result<TrajectoryRecord> {
        check_grid(grid, self.t_max)?;
        self.run_inner(seed, grid, observer)
            .map_err(|e| e.with_context(format!("trajectory with seed {seed}")))
    }

    fn run_inner(
        &self,
        seed: u64,
        grid: &[f64],
        observer: &mut impl TrajectoryObserver,
    ) -> Result<TrajectoryRecord> {
        let mut rng = trajectory_rng(seed);
        let channels = self.model.channels();
        let mut psi = self.model.initial_state().clone();
        let mut t = 0.0;
        let mut next_grid = 0;
        let mut events = Vec::new();

        loop {
            let r: f64 = rng.sample(Open01);
            let segment = self.propagator.segment(&psi)?;
            let jump = segment.first_crossing(r, self.t_max - t, self.tolerance)?;
            let stop = jump.map_or(self.t_max, |dt| t + dt);
            while next_grid < grid.len()
                && (grid[next_grid] < stop || (jump.is_none() && grid[next_grid] <= stop))
            {
                let tg = grid[next_grid];
                let state = segment.state_at((tg - t).max(0.0))?.normalized()?;
                observer.grid_state(next_grid, tg, &state);
                next_grid += 1;
            }
            let Some(dt) = jump else {
                let final_state = segment.state_at(self.t_max - t)?.normalized()?;
                return Ok(TrajectoryRecord {
                    events,
                    final_state,
                    terminated_at: self.t_max,
                    horizon: self.t_max,
                    rng_seed: seed,
                });
            };

            let pre = segment.state_at(dt)?;
            let u: f64 = rng.gen();
            let c = select_channel(&pre, channels, u)?;
            let post = apply(channels[c].operator(), &pre)?.normalized()?;
            let mut t_jump = t + dt;
            if t_jump <= t {
                t_jump = f64::from_bits(t.to_bits() + 1);
            }
            let event = TrajectoryEvent {
                time: t_jump,
                channel: channels[c].label(),
            };
            observer.jump(&event, &pre, &post);
            events.push(event);
            psi = post;
            t = t_jump;

            if is_ground(&psi) {
                while next_grid < grid.len() {
                    observer.grid_state(next_grid, grid[next_grid], &psi);
                    next_grid += 1;
                }
                return Ok(TrajectoryRecord {
                    events,
                    final_state: psi,
                    terminated_at: t,
                    horizon: self.t_max,
                    rng_seed: seed,
                });
            }
        }
    }

    /// Runs trajectories `base_seed + i` for `i` in `indices`, in parallel on
    /// the current rayon pool, returning results in index order.
    pub fn map_ensemble<T, F>(&self, base_seed: u64, indices: Range<u64>, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(&Simulator, u64) -> Result<T> + Sync,
    {
        indices
            .into_par_iter()
            .map(|i| f(self, base_seed.wrapping_add(i)))
            .collect()
    }

    pub fn run_ensemble(&self, base_seed: u64, n: u64) -> Result<Vec<TrajectoryRecord>> {
        self.map_ensemble(base_seed, 0..n, |sim, seed| sim.run(seed))
    }
}

fn check_grid(grid: &[f64], t_max: f64) -> Result<()> {
    if grid.iter().any(|t| !(*t >= 0.0 && *t <= t_max)) {
        return Err(Error::invalid(format!(
            "grid times must lie in [0, {t_max}]"
        )));
    }
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::invalid("grid times must be non-decreasing"));
    }
    Ok(())
}
