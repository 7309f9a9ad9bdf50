// Copyright 2026 The homjump Authors
// SPDX-License-Identifier: Apache-2.0

//! Closed-form states and rates for identical sources, used as references.
//!
//! The cavity expressions use per-component loss exponents rather than the
//! spectrum of the effective Hamiltonian, so they coincide with exact
//! propagation only in the regimes noted on each function.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::algebra::{BasisLayout, OperatorMatrix, SiteKind, StateVector, I, ONE, ZERO};
use crate::error::{Error, Result};
use crate::sources::{CavityQEDParams, ChannelLabel, TwoAtomParams};

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn identical_atoms(p: &TwoAtomParams) -> Result<(f64, f64)> {
    p.validate()?;
    if p.gamma_1 != p.gamma_2 || p.omega_eg_1 != p.omega_eg_2 {
        return Err(Error::invalid("closed form requires identical atoms"));
    }
    Ok((p.gamma_1, p.omega_eg_1))
}

fn identical_cavities(p: &CavityQEDParams) -> Result<(f64, f64, f64)> {
    p.validate()?;
    if p.g_1 != p.g_2 || p.kappa_1 != p.kappa_2 || p.gamma_1 != p.gamma_2 {
        return Err(Error::invalid(
            "closed form requires identical atom-cavity systems",
        ));
    }
    Ok((p.g_1, p.kappa_1, p.gamma_1))
}

fn detector_sign(which: ChannelLabel) -> Result<f64> {
    match which {
        ChannelLabel::DetectorPlus => Ok(1.0),
        ChannelLabel::DetectorMinus => Ok(-1.0),
        other => Err(Error::invalid(format!("{other} is not a detector channel"))),
    }
}

fn superpose(layout: &BasisLayout, terms: &[(Complex64, &[usize])]) -> Result<StateVector> {
    let mut amps = nalgebra::DVector::from_element(layout.dim(), ZERO);
    for (coeff, ket) in terms {
        amps[layout.index_of(ket)?] += coeff;
    }
    StateVector::new(layout.clone(), amps)
}

/// `e^{-2iωt} e^{-γt} |e₁e₂⟩`, unnormalized.
pub fn two_atom_no_jump_state(t: f64, p: &TwoAtomParams) -> Result<StateVector> {
    let (gamma, omega) = identical_atoms(p)?;
    let amp = (-2.0 * I * omega * t).exp() * (-gamma * t).exp();
    superpose(&BasisLayout::two_atoms(), &[(amp, &[1, 1])])
}

/// `e^{-2iωt₁} (|g₁e₂⟩ ± |e₁g₂⟩)/√2`, the sign set by the detector that clicked.
pub fn two_atom_post_first_jump(
    t1: f64,
    p: &TwoAtomParams,
    which: ChannelLabel,
) -> Result<StateVector> {
    let (_, omega) = identical_atoms(p)?;
    let sign = detector_sign(which)?;
    let phase = (-2.0 * I * omega * t1).exp() * std::f64::consts::FRAC_1_SQRT_2;
    superpose(
        &BasisLayout::two_atoms(),
        &[(phase, &[0, 1]), (phase * sign, &[1, 0])],
    )
}

/// `e^{-iω(t+t₁)} e^{-γ(t−t₁)/2} (|g₁e₂⟩ ± |e₁g₂⟩)/√2` for `t₁ ≤ t`.
pub fn two_atom_pre_second_jump_state(
    t: f64,
    t1: f64,
    p: &TwoAtomParams,
    first: ChannelLabel,
) -> Result<StateVector> {
    let (gamma, omega) = identical_atoms(p)?;
    if !(t >= t1 && t1 >= 0.0) {
        return Err(Error::invalid("need t >= t1 >= 0"));
    }
    let sign = detector_sign(first)?;
    let amp = (-I * omega * (t + t1)).exp()
        * (-gamma * (t - t1) / 2.0).exp()
        * std::f64::consts::FRAC_1_SQRT_2;
    superpose(
        &BasisLayout::two_atoms(),
        &[(amp, &[0, 1]), (amp * sign, &[1, 0])],
    )
}

/// Density of the second click time, `Δt = t₂ − t₁`, given the first click.
pub fn two_atom_second_jump_probability_density(
    delta_t: f64,
    p: &TwoAtomParams,
    same_detector: bool,
) -> Result<f64> {
    let (gamma, _) = identical_atoms(p)?;
    if !(delta_t >= 0.0) {
        return Err(Error::invalid(format!("delay must be >= 0, got {delta_t}")));
    }
    Ok(if same_detector {
        gamma * (-gamma * delta_t).exp()
    } else {
        0.0
    })
}

/// `|P_same − P_diff| / (P_same + P_diff)`.
pub fn visibility(p_same: f64, p_diff: f64) -> Result<f64> {
    if !(p_same >= 0.0 && p_diff >= 0.0) || !p_same.is_finite() || !p_diff.is_finite() {
        return Err(Error::invalid(
            "probabilities must be finite and non-negative",
        ));
    }
    let total = p_same + p_diff;
    if total == 0.0 {
        return Err(Error::invalid(
            "visibility undefined when both probabilities are zero",
        ));
    }
    Ok((p_same - p_diff).abs() / total)
}

/// Lossless Jaynes–Cummings evolution `exp(-iHt)` with `H = G Σ_j (a_j†σ_j + σ_j†a_j)`,
/// written out per atom-cavity pair in the dressed-state form:
///
/// `cos(Gt√(N+1))|e⟩⟨e| + cos(Gt√N)|g⟩⟨g| − i[(N+1)^{-1/2} sin(Gt√(N+1)) a |e⟩⟨g| + a† sin(Gt√(N+1)) (N+1)^{-1/2} |g⟩⟨e|]`.
///
/// Atoms are paired with cavities in site order. On a truncated cavity the
/// top state `|e, d−1⟩` has no partner and is left unchanged, which makes the
/// result equal to the exponential of the truncated Hamiltonian.
pub fn jc_propagator(t: f64, g: f64, layout: &BasisLayout) -> Result<OperatorMatrix> {
    let atoms = layout.sites_of_kind(SiteKind::Atom);
    let cavities = layout.sites_of_kind(SiteKind::Cavity);
    if atoms.is_empty() || atoms.len() != cavities.len() {
        return Err(Error::invalid(
            "layout must pair every atom with one cavity",
        ));
    }
    if !t.is_finite() || !g.is_finite() {
        return Err(Error::invalid("time and coupling must be finite"));
    }
    let dim = layout.dim();
    let mut u = DMatrix::identity(dim, dim);
    for (&a, &m) in atoms.iter().zip(&cavities) {
        let d = layout.sites()[m].dim;
        let mut pair = DMatrix::from_element(dim, dim, ZERO);
        for col in 0..dim {
            let local = layout.local_indices(col);
            let n = local[m];
            let mut target = local.clone();
            if local[a] == 1 {
                // |e, n⟩ → cos(Gt√(n+1)) |e, n⟩ − i sin(Gt√(n+1)) |g, n+1⟩
                if n + 1 >= d {
                    pair[(col, col)] = ONE;
                    continue;
                }
                let w = g * t * ((n + 1) as f64).sqrt();
                pair[(col, col)] = c(w.cos());
                target[a] = 0;
                target[m] = n + 1;
                pair[(layout.index_of(&target)?, col)] = -I * w.sin();
            } else {
                // |g, n⟩ → cos(Gt√n) |g, n⟩ − i sin(Gt√n) |e, n−1⟩
                let w = g * t * (n as f64).sqrt();
                pair[(col, col)] = c(w.cos());
                if n > 0 {
                    target[a] = 1;
                    target[m] = n - 1;
                    pair[(layout.index_of(&target)?, col)] = -I * w.sin();
                }
            }
        }
        u = pair * u;
    }
    OperatorMatrix::new(layout.clone(), u)
}

/// No-jump state for identical systems, unnormalized:
///
/// `e^{-κt} cos²(Gt) |gg;11⟩ − i e^{-(κ/2+γ/4)t} cos(Gt) sin(Gt) (|eg;01⟩ + |ge;10⟩) − e^{-γt/2} sin²(Gt) |ee;00⟩`.
///
/// Matches exact propagation when κ = γ = 0, or when G = 0 (only the first
/// term survives). With losses and coupling both present the exponents differ
/// from those of the effective Hamiltonian.
pub fn jc_no_jump_state(t: f64, p: &CavityQEDParams) -> Result<StateVector> {
    let (g, kappa, gamma) = identical_cavities(p)?;
    let layout = BasisLayout::two_cavity_qed(p.fock_cutoff)?;
    let (s, co) = (g * t).sin_cos();
    let cross = -I * (-(kappa / 2.0 + gamma / 4.0) * t).exp() * co * s;
    superpose(
        &layout,
        &[
            (c((-kappa * t).exp() * co * co), &[0, 0, 1, 1]),
            (cross, &[1, 0, 0, 1]),
            (cross, &[0, 1, 1, 0]),
            (c(-(-gamma * t / 2.0).exp() * s * s), &[1, 1, 0, 0]),
        ],
    )
}

/// Normalized state right after the first click at `t₁`, identical systems.
///
/// `DetectorPlus`: `[cos(Gt₁)(|gg;10⟩ + |gg;01⟩) − i sin(Gt₁)(|ge;00⟩ + |eg;00⟩)]/√2`.
/// `DetectorMinus` negates the two components whose excitation sits in system 1
/// (`|gg;10⟩` and `|eg;00⟩`), as `a₁ − a₂` requires. Exact when κ = γ.
pub fn jc_post_first_jump(
    t1: f64,
    g: f64,
    which: ChannelLabel,
    fock_cutoff: usize,
) -> Result<StateVector> {
    let sign = detector_sign(which)?;
    let layout = BasisLayout::two_cavity_qed(fock_cutoff)?;
    let (s, co) = (g * t1).sin_cos();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    superpose(
        &layout,
        &[
            (c(h * co * sign), &[0, 0, 1, 0]),
            (c(h * co), &[0, 0, 0, 1]),
            (-I * h * s, &[0, 1, 0, 0]),
            (-I * h * s * sign, &[1, 0, 0, 0]),
        ],
    )
}

/// State between the clicks, `Δt = t − t₁`, after the first click at `t₁`:
///
/// `[e^{-κΔt/2}(cos Gt₁ cos GΔt − sin Gt₁ sin GΔt)(|gg;10⟩ + |gg;01⟩) − i e^{-γΔt/4}(sin Gt₁ cos GΔt + cos Gt₁ sin GΔt)(|eg;00⟩ + |ge;00⟩)]/√2`.
///
/// `DetectorMinus` flips the same components as in [`jc_post_first_jump`].
/// Matches exact propagation in the lossless limit and when G = 0.
pub fn jc_pre_second_jump_state(
    t1: f64,
    delta_t: f64,
    p: &CavityQEDParams,
    first: ChannelLabel,
) -> Result<StateVector> {
    let (g, kappa, gamma) = identical_cavities(p)?;
    let sign = detector_sign(first)?;
    if !(delta_t >= 0.0) {
        return Err(Error::invalid("delay must be >= 0"));
    }
    let layout = BasisLayout::two_cavity_qed(p.fock_cutoff)?;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let photon = h * (-kappa * delta_t / 2.0).exp() * (g * t1 + g * delta_t).cos();
    let atom = -I * h * (-gamma * delta_t / 4.0).exp() * (g * t1 + g * delta_t).sin();
    superpose(
        &layout,
        &[
            (c(photon * sign), &[0, 0, 1, 0]),
            (c(photon), &[0, 0, 0, 1]),
            (atom, &[0, 1, 0, 0]),
            (atom * sign, &[1, 0, 0, 0]),
        ],
    )
}

/// Amplitude on `|gg;00⟩` after the second click.
///
/// Same detector twice: `√κ e^{-κδt/2} cos(G(t₁ + δt))`; different detectors: 0.
/// Exact against propagation of the post-jump state when κ = γ.
pub fn jc_second_jump_amplitude(
    t1: f64,
    delta_t: f64,
    p: &CavityQEDParams,
    first: ChannelLabel,
    second: ChannelLabel,
) -> Result<Complex64> {
    let (g, kappa, _) = identical_cavities(p)?;
    let (a, b) = (detector_sign(first)?, detector_sign(second)?);
    if !(delta_t >= 0.0) {
        return Err(Error::invalid("delay must be >= 0"));
    }
    if a != b {
        return Ok(ZERO);
    }
    Ok(c(kappa.sqrt()
        * (-kappa * delta_t / 2.0).exp()
        * (g * (t1 + delta_t)).cos()))
}
