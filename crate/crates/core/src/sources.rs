// Copyright 2026 The homjump Authors
// SPDX-License-Identifier: Apache-2.0

//! Single-photon source models placed in front of a 50/50 beam splitter.
//!
//! All rates are in units of a reference rate and ħ = 1.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{embed, local, BasisLayout, OperatorMatrix, SiteKind, StateVector};
use crate::error::{Error, Result};

/// Two initially excited two-level atoms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoAtomParams {
    #[serde(default)]
    pub omega_eg_1: f64,
    #[serde(default)]
    pub omega_eg_2: f64,
    pub gamma_1: f64,
    pub gamma_2: f64,
}

impl TwoAtomParams {
    /// Identical atoms in the rotating frame.
    pub fn identical(gamma: f64) -> Self {
        TwoAtomParams {
            omega_eg_1: 0.0,
            omega_eg_2: 0.0,
            gamma_1: gamma,
            gamma_2: gamma,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, g) in [("gamma_1", self.gamma_1), ("gamma_2", self.gamma_2)] {
            if !(g > 0.0) || !g.is_finite() {
                return Err(Error::invalid(format!(
                    "{name} must be positive and finite, got {g}"
                )));
            }
        }
        for (name, w) in [
            ("omega_eg_1", self.omega_eg_1),
            ("omega_eg_2", self.omega_eg_2),
        ] {
            if !w.is_finite() {
                return Err(Error::invalid(format!("{name} must be finite")));
            }
        }
        Ok(())
    }
}

fn default_cutoff() -> usize {
    2
}

/// Two Jaynes–Cummings atom-cavity systems, each holding one photon at t = 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavityQEDParams {
    pub g_1: f64,
    pub g_2: f64,
    pub kappa_1: f64,
    pub kappa_2: f64,
    pub gamma_1: f64,
    pub gamma_2: f64,
    #[serde(default = "default_cutoff")]
    pub fock_cutoff: usize,
}

impl CavityQEDParams {
    /// Both subsystems share `g`, `kappa` and `gamma`.
    pub fn identical(g: f64, kappa: f64, gamma: f64) -> Self {
        CavityQEDParams {
            g_1: g,
            g_2: g,
            kappa_1: kappa,
            kappa_2: kappa,
            gamma_1: gamma,
            gamma_2: gamma,
            fock_cutoff: 2,
        }
    }

    /// Cooperativity 2g²/(κγ) of subsystem 1 or 2; infinite when γ = 0.
    pub fn cooperativity(&self, subsystem: usize) -> f64 {
        let (g, kappa, gamma) = match subsystem {
            1 => (self.g_1, self.kappa_1, self.gamma_1),
            2 => (self.g_2, self.kappa_2, self.gamma_2),
            _ => panic!("subsystem must be 1 or 2"),
        };
        2.0 * g * g / (kappa * gamma)
    }

    pub fn validate(&self) -> Result<()> {
        if self.fock_cutoff < 2 {
            return Err(Error::invalid(format!(
                "fock_cutoff must be >= 2, got {}",
                self.fock_cutoff
            )));
        }
        for (name, k) in [("kappa_1", self.kappa_1), ("kappa_2", self.kappa_2)] {
            if !(k > 0.0) || !k.is_finite() {
                return Err(Error::invalid(format!(
                    "{name} must be positive and finite, got {k}"
                )));
            }
        }
        for (name, v) in [
            ("g_1", self.g_1),
            ("g_2", self.g_2),
            ("gamma_1", self.gamma_1),
            ("gamma_2", self.gamma_2),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::invalid(format!(
                    "{name} must be non-negative and finite, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// One atom-cavity system whose output is split 50/50 onto two detectors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SingleCavityParams {
    pub g: f64,
    pub kappa: f64,
    pub gamma: f64,
    #[serde(default = "default_cutoff")]
    pub fock_cutoff: usize,
}

impl SingleCavityParams {
    pub fn validate(&self) -> Result<()> {
        CavityQEDParams::identical(self.g, self.kappa, self.gamma)
            .with_cutoff(self.fock_cutoff)
            .validate()
    }
}

impl CavityQEDParams {
    pub fn with_cutoff(mut self, fock_cutoff: usize) -> Self {
        self.fock_cutoff = fock_cutoff;
        self
    }

    /// Parameters of subsystem 1 or 2 as a stand-alone source.
    pub fn subsystem(&self, subsystem: usize) -> SingleCavityParams {
        match subsystem {
            1 => SingleCavityParams {
                g: self.g_1,
                kappa: self.kappa_1,
                gamma: self.gamma_1,
                fock_cutoff: self.fock_cutoff,
            },
            2 => SingleCavityParams {
                g: self.g_2,
                kappa: self.kappa_2,
                gamma: self.gamma_2,
                fock_cutoff: self.fock_cutoff,
            },
            _ => panic!("subsystem must be 1 or 2"),
        }
    }
}

/// Any of the supported source setups.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SourceParams {
    TwoAtom(TwoAtomParams),
    CavityQed(CavityQEDParams),
    SingleCavityQed(SingleCavityParams),
}

impl SourceParams {
    pub fn build(&self) -> Result<SystemModel> {
        match self {
            SourceParams::TwoAtom(p) => build_two_atom_model(p),
            SourceParams::CavityQed(p) => build_cavity_qed_model(p),
            SourceParams::SingleCavityQed(p) => build_single_cavity_model(p),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SourceParams::TwoAtom(p) => p.validate(),
            SourceParams::CavityQed(p) => p.validate(),
            SourceParams::SingleCavityQed(p) => p.validate(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ChannelLabel {
    DetectorPlus,
    DetectorMinus,
    AtomLoss1,
    AtomLoss2,
}

impl ChannelLabel {
    pub fn is_detector(self) -> bool {
        matches!(
            self,
            ChannelLabel::DetectorPlus | ChannelLabel::DetectorMinus
        )
    }
}

impl fmt::Display for ChannelLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ChannelLabel::DetectorPlus => "D+",
            ChannelLabel::DetectorMinus => "D-",
            ChannelLabel::AtomLoss1 => "loss1",
            ChannelLabel::AtomLoss2 => "loss2",
        };
        f.write_str(s)
    }
}

/// A labeled jump operator. Detector channels reach the beam-splitter outputs;
/// loss channels remove energy without a click.
#[derive(Debug, Clone)]
pub struct JumpChannel {
    label: ChannelLabel,
    operator: OperatorMatrix,
    /// `operator† operator`, cached for weight evaluation.
    rate: OperatorMatrix,
}

impl JumpChannel {
    pub fn new(label: ChannelLabel, operator: OperatorMatrix) -> Self {
        let rate = operator.gram();
        JumpChannel {
            label,
            operator,
            rate,
        }
    }

    pub fn label(&self) -> ChannelLabel {
        self.label
    }

    pub fn is_detector(&self) -> bool {
        self.label.is_detector()
    }

    pub fn operator(&self) -> &OperatorMatrix {
        &self.operator
    }

    /// `J† J`
    pub fn rate_operator(&self) -> &OperatorMatrix {
        &self.rate
    }
}

/// A source setup: Hamiltonian, jump channels and initial state.
#[derive(Debug, Clone)]
pub struct SystemModel {
    layout: BasisLayout,
    hamiltonian_hermitian: OperatorMatrix,
    channels: Vec<JumpChannel>,
    initial_state: StateVector,
    h_nonhermitian: OperatorMatrix,
}

impl SystemModel {
    /// Assembles a model; the effective Hamiltonian is `H − (i/2) Σ_c J_c† J_c` over every channel.
    pub fn new(
        hamiltonian_hermitian: OperatorMatrix,
        channels: Vec<JumpChannel>,
        initial_state: StateVector,
    ) -> Result<Self> {
        let layout = hamiltonian_hermitian.layout().clone();
        if !hamiltonian_hermitian.is_hermitian(1e-12) {
            return Err(Error::invalid("Hamiltonian is not Hermitian"));
        }
        if channels.iter().any(|c| c.operator().layout() != &layout) {
            return Err(Error::invalid(
                "jump channel layout differs from the Hamiltonian's",
            ));
        }
        if initial_state.layout() != &layout {
            return Err(Error::invalid(
                "initial state layout differs from the Hamiltonian's",
            ));
        }
        if (initial_state.norm_sq() - 1.0).abs() > 1e-12 {
            return Err(Error::invalid("initial state must be normalized"));
        }
        let damping = channels
            .iter()
            .fold(OperatorMatrix::zeros(&layout), |acc, c| {
                acc + c.rate_operator()
            });
        let h_nonhermitian =
            &hamiltonian_hermitian - &damping.scale_complex(Complex64::new(0.0, 0.5));
        Ok(SystemModel {
            layout,
            hamiltonian_hermitian,
            channels,
            initial_state,
            h_nonhermitian,
        })
    }

    pub fn layout(&self) -> &BasisLayout {
        &self.layout
    }

    pub fn hamiltonian_hermitian(&self) -> &OperatorMatrix {
        &self.hamiltonian_hermitian
    }

    pub fn channels(&self) -> &[JumpChannel] {
        &self.channels
    }

    pub fn channel(&self, label: ChannelLabel) -> Option<&JumpChannel> {
        self.channels.iter().find(|c| c.label() == label)
    }

    pub fn initial_state(&self) -> &StateVector {
        &self.initial_state
    }

    pub fn h_nonhermitian(&self) -> &OperatorMatrix {
        &self.h_nonhermitian
    }

    /// Upper bound on the magnitude of any rate in the model (∞-norm of the
    /// effective Hamiltonian), floored at a tiny positive value.
    pub fn rate_scale(&self) -> f64 {
        self.h_nonhermitian.inf_norm().max(1e-12)
    }

    /// Number of excitations detector channels could still remove, for the initial state.
    pub fn initial_excitations(&self) -> f64 {
        crate::algebra::expectation(&total_excitation(&self.layout), &self.initial_state)
            .map(|z| z.re)
            .unwrap_or(0.0)
    }
}

/// Σ over all sites of the local number operator (a†a or σ†σ).
pub fn total_excitation(layout: &BasisLayout) -> OperatorMatrix {
    (0..layout.n_sites()).fold(OperatorMatrix::zeros(layout), |acc, s| {
        acc + embed(&local::number(layout.sites()[s].dim), s, layout).expect("site in range")
    })
}

/// `((j1 + j2)/√2, (j1 − j2)/√2)`
pub fn beam_splitter_mix(
    j1: &OperatorMatrix,
    j2: &OperatorMatrix,
) -> Result<(OperatorMatrix, OperatorMatrix)> {
    if j1.layout() != j2.layout() {
        return Err(Error::invalid(
            "beam splitter inputs act on different layouts",
        ));
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Ok(((j1 + j2).scale(s), (j1 - j2).scale(s)))
}

fn site_op(m: &DMatrix<Complex64>, site: usize, layout: &BasisLayout) -> OperatorMatrix {
    embed(m, site, layout).expect("model layouts are built to match their local operators")
}

pub fn build_two_atom_model(p: &TwoAtomParams) -> Result<SystemModel> {
    p.validate()?;
    let layout = BasisLayout::two_atoms();
    let sigma = [
        site_op(&local::sigma_minus(), 0, &layout),
        site_op(&local::sigma_minus(), 1, &layout),
    ];
    let h = sigma[0].gram().scale(p.omega_eg_1) + sigma[1].gram().scale(p.omega_eg_2);
    let (plus, minus) = beam_splitter_mix(
        &sigma[0].scale(p.gamma_1.sqrt()),
        &sigma[1].scale(p.gamma_2.sqrt()),
    )?;
    let channels = vec![
        JumpChannel::new(ChannelLabel::DetectorPlus, plus),
        JumpChannel::new(ChannelLabel::DetectorMinus, minus),
    ];
    let initial = layout.ket(&[1, 1])?;
    SystemModel::new(h, channels, initial)
}

/// Jaynes–Cummings coupling `g (a†σ + σ†a)` between an atom site and a cavity site.
fn jc_coupling(g: f64, atom: usize, cavity: usize, layout: &BasisLayout) -> OperatorMatrix {
    let cutoff = layout.sites()[cavity].dim;
    let sigma = site_op(&local::sigma_minus(), atom, layout);
    let a = site_op(&local::annihilation(cutoff), cavity, layout);
    let exchange = &a.adjoint() * &sigma;
    (&exchange + &exchange.adjoint()).scale(g)
}

pub fn build_cavity_qed_model(p: &CavityQEDParams) -> Result<SystemModel> {
    p.validate()?;
    let layout = BasisLayout::two_cavity_qed(p.fock_cutoff)?;
    let atoms = layout.sites_of_kind(SiteKind::Atom);
    let cavities = layout.sites_of_kind(SiteKind::Cavity);
    let h = jc_coupling(p.g_1, atoms[0], cavities[0], &layout)
        + jc_coupling(p.g_2, atoms[1], cavities[1], &layout);

    let a1 = site_op(&local::annihilation(p.fock_cutoff), cavities[0], &layout);
    let a2 = site_op(&local::annihilation(p.fock_cutoff), cavities[1], &layout);
    let (plus, minus) =
        beam_splitter_mix(&a1.scale(p.kappa_1.sqrt()), &a2.scale(p.kappa_2.sqrt()))?;
    let s1 = site_op(&local::sigma_minus(), atoms[0], &layout);
    let s2 = site_op(&local::sigma_minus(), atoms[1], &layout);
    let channels = vec![
        JumpChannel::new(ChannelLabel::DetectorPlus, plus),
        JumpChannel::new(ChannelLabel::DetectorMinus, minus),
        JumpChannel::new(ChannelLabel::AtomLoss1, s1.scale(p.gamma_1.sqrt())),
        JumpChannel::new(ChannelLabel::AtomLoss2, s2.scale(p.gamma_2.sqrt())),
    ];
    let initial = layout.ket(&[0, 0, 1, 1])?;
    SystemModel::new(h, channels, initial)
}

/// One atom-cavity source; its leakage is split evenly onto two detectors,
/// each with operator √(κ/2)·a.
pub fn build_single_cavity_model(p: &SingleCavityParams) -> Result<SystemModel> {
    p.validate()?;
    let layout = BasisLayout::single_cavity_qed(p.fock_cutoff)?;
    let h = jc_coupling(p.g, 0, 1, &layout);
    let half =
        site_op(&local::annihilation(p.fock_cutoff), 1, &layout).scale((p.kappa / 2.0).sqrt());
    let sigma = site_op(&local::sigma_minus(), 0, &layout);
    let channels = vec![
        JumpChannel::new(ChannelLabel::DetectorPlus, half.clone()),
        JumpChannel::new(ChannelLabel::DetectorMinus, half),
        JumpChannel::new(ChannelLabel::AtomLoss1, sigma.scale(p.gamma.sqrt())),
    ];
    let initial = layout.ket(&[0, 1])?;
    SystemModel::new(h, channels, initial)
}
