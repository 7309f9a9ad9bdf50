// Copyright 2026 The homjump Authors
// SPDX-License-Identifier: Apache-2.0

//! Exact no-jump evolution `exp(-i H_NH t)` and waiting-time sampling.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::algebra::{eigendecompose_general, BasisLayout, OperatorMatrix, StateVector, I};
use crate::error::{Error, Result};

/// Above this eigenvector condition number the spectral route loses more than
/// ~1e-10 of accuracy, and propagation switches to the dyadic table.
pub const SPECTRAL_CONDITION_LIMIT: f64 = 1e6;

/// Default target for `|‖ψ(t)‖² − r|` when solving for a jump time.
pub const DEFAULT_NORM_TOLERANCE: f64 = 1e-10;

const ROOT_MAX_ITERATIONS: usize = 200;

// Dyadic table covers steps 2^MIN_EXP ..= 2^MAX_EXP.
const MIN_EXP: i32 = -46;
const MAX_EXP: i32 = 10;

#[derive(Debug, Clone)]
enum Method {
    /// `V · diag(exp(-iλt)) · V⁻¹`
    Spectral {
        rates: DVector<Complex64>,
        vectors: DMatrix<Complex64>,
        inverse: DMatrix<Complex64>,
    },
    /// Products of precomputed `exp(-iH 2^k)`; used when `H_NH` is defective or
    /// close to it (exceptional points of the atom-cavity blocks).
    Dyadic {
        generator: DMatrix<Complex64>,
        table: Vec<DMatrix<Complex64>>,
    },
}

/// Time-evolution under a fixed non-Hermitian Hamiltonian, built once per model.
#[derive(Debug, Clone)]
pub struct Propagator {
    layout: BasisLayout,
    rate_scale: f64,
    method: Method,
}

impl Propagator {
    pub fn new(h_nonhermitian: &OperatorMatrix) -> Result<Self> {
        let layout = h_nonhermitian.layout().clone();
        let rate_scale = h_nonhermitian.inf_norm().max(1e-12);
        let method = match eigendecompose_general(h_nonhermitian) {
            Ok(eig) if eig.condition <= SPECTRAL_CONDITION_LIMIT => Method::Spectral {
                rates: DVector::from_iterator(eig.values.len(), eig.values.iter().map(|l| -I * l)),
                vectors: eig.vectors,
                inverse: eig.inverse,
            },
            Ok(_) | Err(Error::NumericalFailure(_)) => dyadic(h_nonhermitian)?,
            Err(e) => return Err(e),
        };
        Ok(Propagator {
            layout,
            rate_scale,
            method,
        })
    }

    /// Whether the eigendecomposition route is in use.
    pub fn is_spectral(&self) -> bool {
        matches!(self.method, Method::Spectral { .. })
    }

    pub fn layout(&self) -> &BasisLayout {
        &self.layout
    }

    pub fn rate_scale(&self) -> f64 {
        self.rate_scale
    }

    /// `exp(-i H_NH dt) ψ`, unnormalized.
    pub fn propagate(&self, psi: &StateVector, dt: f64) -> Result<StateVector> {
        let segment = self.segment(psi)?;
        segment.state_at(dt)
    }

    /// Prepares repeated evaluation of the no-jump evolution from `psi`.
    pub fn segment(&self, psi: &StateVector) -> Result<Segment<'_>> {
        if psi.layout() != &self.layout {
            return Err(Error::invalid("state layout differs from the propagator's"));
        }
        let coeffs = match &self.method {
            Method::Spectral { inverse, .. } => inverse * psi.amplitudes(),
            Method::Dyadic { .. } => psi.amplitudes().clone(),
        };
        Ok(Segment {
            propagator: self,
            coeffs,
        })
    }

    /// Time at which `‖propagate(ψ, t)‖²` falls to `r`, or `None` if it stays
    /// above `r` up to `t_max`.
    pub fn sample_jump_time(
        &self,
        psi: &StateVector,
        r: f64,
        t_max: f64,
        tolerance: f64,
    ) -> Result<Option<f64>> {
        self.segment(psi)?.first_crossing(r, t_max, tolerance)
    }
}

fn dyadic(h: &OperatorMatrix) -> Result<Method> {
    let generator = h.entries().map(|x| -I * x);
    let table = (MIN_EXP..=MAX_EXP)
        .map(|k| generator.scale(2f64.powi(k)).exp())
        .collect::<Vec<_>>();
    if table.iter().any(|m| m.iter().any(|x| !x.is_finite())) {
        return Err(Error::numerical(
            "matrix exponential produced non-finite entries",
        ));
    }
    Ok(Method::Dyadic { generator, table })
}

/// No-jump evolution from a fixed starting state.
#[derive(Debug, Clone)]
pub struct Segment<'a> {
    propagator: &'a Propagator,
    /// Spectral: eigenbasis coefficients. Dyadic: the starting amplitudes.
    coeffs: DVector<Complex64>,
}

impl Segment<'_> {
    pub fn amplitudes_at(&self, t: f64) -> Result<DVector<Complex64>> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::invalid(format!(
                "propagation time must be finite and >= 0, got {t}"
            )));
        }
        Ok(match &self.propagator.method {
            Method::Spectral { rates, vectors, .. } => {
                let phased = self.coeffs.zip_map(rates, |c, k| c * (k * t).exp());
                vectors * phased
            }
            Method::Dyadic { generator, table } => dyadic_apply(generator, table, &self.coeffs, t),
        })
    }

    pub fn state_at(&self, t: f64) -> Result<StateVector> {
        let amps = self.amplitudes_at(t)?;
        StateVector::new(self.propagator.layout.clone(), amps)
    }

    pub fn norm_sq_at(&self, t: f64) -> Result<f64> {
        Ok(self.amplitudes_at(t)?.norm_squared())
    }

    /// Bracketing root search for `‖ψ(t)‖² = r` on `[0, span]`.
    ///
    /// The bracket grows by doubling from `0.1 / rate_scale`; the root is then
    /// refined by Illinois regula falsi until the squared norm is within
    /// `tolerance` of `r`. The squared norm is non-increasing in `t`.
    pub fn first_crossing(&self, r: f64, span: f64, tolerance: f64) -> Result<Option<f64>> {
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::invalid(format!(
                "jump threshold must lie in (0, 1), got {r}"
            )));
        }
        if !(tolerance > 0.0) {
            return Err(Error::invalid("root tolerance must be positive"));
        }
        if !(span > 0.0) {
            return Ok(None);
        }
        let f = |t: f64| -> Result<f64> { Ok(self.norm_sq_at(t)? - r) };

        let f_end = f(span)?;
        if f_end > 0.0 {
            return Ok(None);
        }
        let (mut lo, mut f_lo) = (0.0, f(0.0)?);
        if f_lo <= 0.0 {
            return Err(Error::Logic(format!(
                "segment starts with squared norm {} at or below threshold {r}",
                f_lo + r
            )));
        }

        let mut step = 0.1 / self.propagator.rate_scale;
        let (mut hi, mut f_hi) = loop {
            let t = step.min(span);
            let ft = if t == span { f_end } else { f(t)? };
            if ft <= 0.0 {
                break (t, ft);
            }
            lo = t;
            f_lo = ft;
            step *= 2.0;
        };
        if f_hi.abs() <= tolerance {
            return Ok(Some(hi));
        }

        // Illinois: halve the retained endpoint's value when the same side is kept twice.
        let mut side = 0i8;
        for _ in 0..ROOT_MAX_ITERATIONS {
            let width = hi - lo;
            let mut c = hi - f_hi * width / (f_hi - f_lo);
            if !(c > lo && c < hi) {
                c = lo + 0.5 * width;
            }
            let fc = f(c)?;
            if fc.abs() <= tolerance || width <= 4.0 * f64::EPSILON * hi {
                return Ok(Some(c));
            }
            if fc > 0.0 {
                lo = c;
                f_lo = fc;
                if side == 1 {
                    f_hi *= 0.5;
                }
                side = 1;
            } else {
                hi = c;
                f_hi = fc;
                if side == -1 {
                    f_lo *= 0.5;
                }
                side = -1;
            }
        }
        Err(Error::numerical(format!(
            "jump-time root search did not converge in {ROOT_MAX_ITERATIONS} iterations (bracket [{lo}, {hi}])"
        )))
    }
}

fn dyadic_apply(
    generator: &DMatrix<Complex64>,
    table: &[DMatrix<Complex64>],
    start: &DVector<Complex64>,
    t: f64,
) -> DVector<Complex64> {
    let mut v = start.clone();
    let mut rem = t;
    let largest = 2f64.powi(MAX_EXP);
    while rem >= largest {
        v = &table[table.len() - 1] * v;
        rem -= largest;
    }
    for (offset, u) in table.iter().enumerate().rev() {
        let step = 2f64.powi(MIN_EXP + offset as i32);
        if rem >= step {
            // exact: step <= rem < 2 * step
            v = u * v;
            rem -= step;
        }
    }
    if rem > 0.0 {
        // rem < 2^MIN_EXP, so the second-order Taylor remainder is far below rounding.
        let g1 = generator * &v * Complex64::new(rem, 0.0);
        let g2 = generator * &g1 * Complex64::new(0.5 * rem, 0.0);
        v += g1 + g2;
    }
    v
}
