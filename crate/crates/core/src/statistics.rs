// Copyright 2026 The homjump Authors
// SPDX-License-Identifier: Apache-2.0

//! Ensemble observables: expectation series, coincidence fractions and delay histograms.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::algebra::{BasisLayout, SiteKind, StateVector};
use crate::engine::{Simulator, TrajectoryObserver, TrajectoryRecord};
use crate::error::{Error, Result};
use crate::sources::{ChannelLabel, SourceParams, SystemModel};

/// Trajectories handed to the thread pool at once. Fixed so that memory stays
/// bounded and the reduction order never depends on the pool size.
const CHUNK: u64 = 1024;

/// Observables tracked by [`expectation_series`], in output order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Observable {
    /// `a₁†a₁`
    N1,
    /// `a₂†a₂`
    N2,
    /// `σ₁†σ₁`
    E1,
    /// `σ₂†σ₂`
    E2,
    /// Sum of all of the above.
    Total,
}

impl Observable {
    pub const ALL: [Observable; 5] = [
        Observable::N1,
        Observable::N2,
        Observable::E1,
        Observable::E2,
        Observable::Total,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Observable::N1 => "n1",
            Observable::N2 => "n2",
            Observable::E1 => "e1",
            Observable::E2 => "e2",
            Observable::Total => "total",
        }
    }
}

/// Diagonal values of each observable in the product basis. Sites absent from
/// the layout contribute zero, e.g. `n1` on the two-atom model.
#[derive(Debug, Clone)]
pub struct DiagonalObservables {
    values: Vec<[f64; 5]>,
}

impl DiagonalObservables {
    pub fn new(layout: &BasisLayout) -> Self {
        let atoms = layout.sites_of_kind(SiteKind::Atom);
        let cavities = layout.sites_of_kind(SiteKind::Cavity);
        let values = (0..layout.dim())
            .map(|idx| {
                let local = layout.local_indices(idx);
                let level =
                    |sites: &[usize], k: usize| sites.get(k).map_or(0.0, |&s| local[s] as f64);
                let n1 = level(&cavities, 0);
                let n2 = level(&cavities, 1);
                let e1 = level(&atoms, 0);
                let e2 = level(&atoms, 1);
                [n1, n2, e1, e2, n1 + n2 + e1 + e2]
            })
            .collect();
        DiagonalObservables { values }
    }

    /// Expectations of all observables in a normalized state.
    pub fn evaluate(&self, psi: &StateVector) -> [f64; 5] {
        let mut out = [0.0; 5];
        for (amp, vals) in psi.amplitudes().iter().zip(&self.values) {
            let p = amp.norm_sqr();
            for (o, v) in out.iter_mut().zip(vals) {
                *o += p * v;
            }
        }
        out
    }

    /// Expectations from the diagonal of a density matrix.
    pub fn evaluate_populations(&self, populations: &[f64]) -> [f64; 5] {
        let mut out = [0.0; 5];
        for (p, vals) in populations.iter().zip(&self.values) {
            for (o, v) in out.iter_mut().zip(vals) {
                *o += p * v;
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ObservableSeries {
    pub mean: Vec<f64>,
    /// Sample standard deviation over trajectories divided by `√N`.
    pub se: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpectationSeries {
    pub t_grid: Vec<f64>,
    pub n_trajectories: u64,
    pub n1: ObservableSeries,
    pub n2: ObservableSeries,
    pub e1: ObservableSeries,
    pub e2: ObservableSeries,
    pub total: ObservableSeries,
}

impl ExpectationSeries {
    pub fn get(&self, obs: Observable) -> &ObservableSeries {
        match obs {
            Observable::N1 => &self.n1,
            Observable::N2 => &self.n2,
            Observable::E1 => &self.e1,
            Observable::E2 => &self.e2,
            Observable::Total => &self.total,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Welford {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn standard_error(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        (self.m2 / (self.n - 1) as f64 / self.n as f64).sqrt()
    }
}

struct GridSampler<'a> {
    observables: &'a DiagonalObservables,
    samples: Vec<[f64; 5]>,
}

impl TrajectoryObserver for GridSampler<'_> {
    fn grid_state(&mut self, index: usize, _t: f64, state: &StateVector) {
        self.samples[index] = self.observables.evaluate(state);
    }
}

/// Trajectory-averaged expectations of the five observables on `t_grid`, over
/// trajectories seeded `base_seed .. base_seed + n`.
pub fn expectation_series(
    sim: &Simulator,
    base_seed: u64,
    n: u64,
    t_grid: &[f64],
) -> Result<ExpectationSeries> {
    if n == 0 {
        return Err(Error::invalid(
            "expectation series needs at least one trajectory",
        ));
    }
    let observables = DiagonalObservables::new(sim.model().layout());
    let mut acc = vec![[Welford::default(); 5]; t_grid.len()];
    let mut start = 0;
    while start < n {
        let end = (start + CHUNK).min(n);
        let chunk = sim.map_ensemble(base_seed, start..end, |s, seed| {
            let mut sampler = GridSampler {
                observables: &observables,
                samples: vec![[0.0; 5]; t_grid.len()],
            };
            s.run_with(seed, t_grid, &mut sampler)?;
            Ok(sampler.samples)
        })?;
        for samples in chunk {
            for (slot, values) in acc.iter_mut().zip(samples) {
                for (w, v) in slot.iter_mut().zip(values) {
                    w.push(v);
                }
            }
        }
        start = end;
    }
    let series = |k: usize| ObservableSeries {
        mean: acc.iter().map(|a| a[k].mean).collect(),
        se: acc.iter().map(|a| a[k].standard_error()).collect(),
    };
    Ok(ExpectationSeries {
        t_grid: t_grid.to_vec(),
        n_trajectories: n,
        n1: series(0),
        n2: series(1),
        e1: series(2),
        e2: series(3),
        total: series(4),
    })
}

/// Same-detector statistics over an ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoincidenceResult {
    pub n_trajectories: u64,
    pub n_two_click: u64,
    pub n_same_detector: u64,
    pub n_diff_detector: u64,
    /// Records with fewer than two detector clicks.
    pub n_discarded: u64,
    /// `n_same_detector / n_two_click`
    pub coincidence_fraction: f64,
    /// Binomial standard error `√(f(1−f)/n_two_click)`.
    pub standard_error: f64,
}

impl CoincidenceResult {
    pub fn from_counts(n_same: u64, n_diff: u64, n_discarded: u64) -> Result<Self> {
        let n_two = n_same + n_diff;
        if n_two == 0 {
            return Err(Error::UndefinedFraction);
        }
        let f = n_same as f64 / n_two as f64;
        Ok(CoincidenceResult {
            n_trajectories: n_two + n_discarded,
            n_two_click: n_two,
            n_same_detector: n_same,
            n_diff_detector: n_diff,
            n_discarded,
            coincidence_fraction: f,
            standard_error: (f * (1.0 - f) / n_two as f64).sqrt(),
        })
    }

    pub fn visibility(&self) -> f64 {
        crate::analytic::visibility(self.n_same_detector as f64, self.n_diff_detector as f64)
            .expect("counts are non-negative and not both zero")
    }
}

/// Classifies each record by its first two detector clicks.
pub fn coincidence_stats(records: &[TrajectoryRecord]) -> Result<CoincidenceResult> {
    let (mut same, mut diff, mut discarded) = (0, 0, 0);
    for r in records {
        match r.first_two_clicks() {
            Some((a, b)) if a.channel == b.channel => same += 1,
            Some(_) => diff += 1,
            None => discarded += 1,
        }
    }
    CoincidenceResult::from_counts(same, diff, discarded)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepVariable {
    /// `κ₂ = ratio · κ₁`
    #[serde(rename = "kappa_2_ratio")]
    Kappa2Ratio,
    /// `γ₂ = ratio · γ₁`
    #[serde(rename = "gamma_2_ratio")]
    Gamma2Ratio,
}

impl SweepVariable {
    /// `base` with the swept rate of source 2 set to `ratio` times that of source 1.
    pub fn apply(self, base: &SourceParams, ratio: f64) -> Result<SourceParams> {
        let mut p = *base;
        match (self, &mut p) {
            (SweepVariable::Kappa2Ratio, SourceParams::CavityQed(c)) => {
                c.kappa_2 = ratio * c.kappa_1
            }
            (SweepVariable::Gamma2Ratio, SourceParams::CavityQed(c)) => {
                c.gamma_2 = ratio * c.gamma_1
            }
            (SweepVariable::Gamma2Ratio, SourceParams::TwoAtom(a)) => a.gamma_2 = ratio * a.gamma_1,
            (v, _) => {
                return Err(Error::invalid(format!(
                    "sweep variable {v:?} does not apply to this source type"
                )))
            }
        }
        Ok(p)
    }
}

/// One [`CoincidenceResult`] per ratio. Every point reuses seeds
/// `base_seed .. base_seed + n_traj`.
pub fn coincidence_sweep(
    base: &SourceParams,
    variable: SweepVariable,
    ratios: &[f64],
    n_traj: u64,
    t_max: f64,
    base_seed: u64,
) -> Result<Vec<(f64, CoincidenceResult)>> {
    if n_traj < 100 {
        return Err(Error::invalid(format!(
            "sweep needs at least 100 trajectories per point, got {n_traj}"
        )));
    }
    ratios
        .iter()
        .map(|&ratio| {
            let point = || -> Result<CoincidenceResult> {
                if !(ratio >= 1.0) || !ratio.is_finite() {
                    return Err(Error::invalid(format!(
                        "sweep ratios must be finite and >= 1, got {ratio}"
                    )));
                }
                let model = Arc::new(variable.apply(base, ratio)?.build()?);
                let records = Simulator::new(model, t_max)?.run_ensemble(base_seed, n_traj)?;
                coincidence_stats(&records)
            };
            point()
                .map(|r| (ratio, r))
                .map_err(|e| e.with_context(format!("sweep ratio {ratio}")))
        })
        .collect()
}

/// Counts of click-pair delays, split by whether both clicks hit the same detector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelayHistogram {
    pub bin_width: f64,
    /// `n_bins + 1` edges starting at 0.
    pub edges: Vec<f64>,
    pub coincidence: Vec<u64>,
    pub anticoincidence: Vec<u64>,
}

impl DelayHistogram {
    /// Empty histogram with bins of `bin_width` covering `[0, span]`.
    pub fn new(bin_width: f64, span: f64) -> Result<Self> {
        if !(bin_width > 0.0) || !bin_width.is_finite() {
            return Err(Error::invalid(format!(
                "bin width must be positive, got {bin_width}"
            )));
        }
        if !(span >= 0.0) || !span.is_finite() {
            return Err(Error::invalid(format!(
                "histogram span must be finite and >= 0, got {span}"
            )));
        }
        let n_bins = (span / bin_width).ceil() as usize;
        Ok(DelayHistogram {
            bin_width,
            edges: (0..=n_bins).map(|k| k as f64 * bin_width).collect(),
            coincidence: vec![0; n_bins],
            anticoincidence: vec![0; n_bins],
        })
    }

    pub fn n_bins(&self) -> usize {
        self.coincidence.len()
    }

    /// Adds one delay; values past the last edge land in the last bin.
    pub fn record(&mut self, delay: f64, same_detector: bool) -> Result<()> {
        if !(delay >= 0.0) || self.n_bins() == 0 {
            return Err(Error::invalid(format!(
                "delay {delay} outside histogram range"
            )));
        }
        let k = ((delay / self.bin_width) as usize).min(self.n_bins() - 1);
        if same_detector {
            self.coincidence[k] += 1;
        } else {
            self.anticoincidence[k] += 1;
        }
        Ok(())
    }

    pub fn total_coincidence(&self) -> u64 {
        self.coincidence.iter().sum()
    }

    pub fn total_anticoincidence(&self) -> u64 {
        self.anticoincidence.iter().sum()
    }
}

fn max_horizon<'a>(records: impl IntoIterator<Item = &'a TrajectoryRecord>) -> f64 {
    records.into_iter().map(|r| r.horizon).fold(0.0, f64::max)
}

/// Histogram of `t₂ − t₁` over records with two detector clicks.
pub fn delay_histogram(records: &[TrajectoryRecord], bin_width: f64) -> Result<DelayHistogram> {
    let mut h = DelayHistogram::new(bin_width, max_horizon(records))?;
    for r in records {
        if let Some((a, b)) = r.first_two_clicks() {
            h.record(b.time - a.time, a.channel == b.channel)?;
        }
    }
    Ok(h)
}

fn first_click(r: &TrajectoryRecord) -> Option<(f64, ChannelLabel)> {
    r.detector_events().next().map(|e| (e.time, e.channel))
}

/// Pairs record `i` of `a` with record `i` of `b`, each from a single source
/// split onto both detectors, and histograms `|t_b − t_a|` of their first
/// clicks. Pairs where either record has no click are skipped.
pub fn independent_union(
    a: &[TrajectoryRecord],
    b: &[TrajectoryRecord],
    bin_width: f64,
) -> Result<DelayHistogram> {
    if a.len() != b.len() {
        return Err(Error::invalid(format!(
            "ensembles differ in length ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    let mut h = DelayHistogram::new(bin_width, max_horizon(a.iter().chain(b)))?;
    for (ra, rb) in a.iter().zip(b) {
        if let (Some((ta, la)), Some((tb, lb))) = (first_click(ra), first_click(rb)) {
            h.record((tb - ta).abs(), la == lb)?;
        }
    }
    Ok(h)
}

/// Lindblad-oracle expectations of the five observables at each density matrix.
pub fn oracle_expectations(
    model: &SystemModel,
    rhos: &[crate::algebra::OperatorMatrix],
) -> Vec<[f64; 5]> {
    let obs = DiagonalObservables::new(model.layout());
    rhos.iter()
        .map(|rho| {
            let pops: Vec<f64> = (0..rho.dim()).map(|i| rho.entries()[(i, i)].re).collect();
            obs.evaluate_populations(&pops)
        })
        .collect()
}
