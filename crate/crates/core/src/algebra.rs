// Copyright 2026 The homjump Authors
// SPDX-License-Identifier: Apache-2.0

//! Dense complex linear algebra on small tensor-product Hilbert spaces.
//!
//! Kets are indexed big-endian over the sites of a [`BasisLayout`]: for local
//! indices `(i0, .., ik)` and dimensions `(d0, .., dk)` the flat index is
//! `((i0 * d1 + i1) * d2 + i2) ...`. Atom index 0 is |g>, 1 is |e>; cavity
//! index n is the Fock state |n>.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Complex amplitude, with `re`/`im` in dimensionless units.
pub type ComplexAmplitude = Complex64;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub(crate) const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SiteKind {
    Atom,
    Cavity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Site {
    pub kind: SiteKind,
    pub dim: usize,
}

impl Site {
    pub fn atom() -> Self {
        Site {
            kind: SiteKind::Atom,
            dim: 2,
        }
    }

    pub fn cavity(fock_cutoff: usize) -> Self {
        Site {
            kind: SiteKind::Cavity,
            dim: fock_cutoff,
        }
    }
}

/// Ordered list of sites spanning a tensor-product basis.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BasisLayout {
    sites: Arc<[Site]>,
    dim: usize,
}

impl BasisLayout {
    pub fn new(sites: Vec<Site>) -> Result<Self> {
        if sites.is_empty() {
            return Err(Error::invalid("a basis layout needs at least one site"));
        }
        if let Some(bad) = sites.iter().find(|s| s.dim < 2) {
            return Err(Error::invalid(format!(
                "site local dimension must be >= 2, got {}",
                bad.dim
            )));
        }
        let dim = sites
            .iter()
            .try_fold(1usize, |acc, s| acc.checked_mul(s.dim))
            .ok_or_else(|| Error::invalid("basis dimension overflows"))?;
        Ok(BasisLayout {
            sites: sites.into(),
            dim,
        })
    }

    /// atom1 ⊗ atom2.
    pub fn two_atoms() -> Self {
        Self::new(vec![Site::atom(), Site::atom()]).expect("static layout")
    }

    /// atom1 ⊗ atom2 ⊗ cavity1 ⊗ cavity2.
    pub fn two_cavity_qed(fock_cutoff: usize) -> Result<Self> {
        Self::new(vec![
            Site::atom(),
            Site::atom(),
            Site::cavity(fock_cutoff),
            Site::cavity(fock_cutoff),
        ])
    }

    /// atom ⊗ cavity.
    pub fn single_cavity_qed(fock_cutoff: usize) -> Result<Self> {
        Self::new(vec![Site::atom(), Site::cavity(fock_cutoff)])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn n_sites(&self) -> usize {
        self.sites.len()
    }

    /// Positions of all sites of the given kind, in layout order.
    pub fn sites_of_kind(&self, kind: SiteKind) -> Vec<usize> {
        self.sites
            .iter()
            .enumerate()
            .filter(|(_, s)| s.kind == kind)
            .map(|(i, _)| i)
            .collect()
    }

    /// Flat index of the product ket with the given local indices.
    pub fn index_of(&self, local: &[usize]) -> Result<usize> {
        if local.len() != self.sites.len() {
            return Err(Error::invalid(format!(
                "expected {} local indices, got {}",
                self.sites.len(),
                local.len()
            )));
        }
        let mut index = 0;
        for (site, &i) in self.sites.iter().zip(local) {
            if i >= site.dim {
                return Err(Error::invalid(format!(
                    "local index {i} out of range for site of dimension {}",
                    site.dim
                )));
            }
            index = index * site.dim + i;
        }
        Ok(index)
    }

    /// Inverse of [`BasisLayout::index_of`].
    pub fn local_indices(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.sites.len()];
        for (slot, site) in out.iter_mut().zip(self.sites.iter()).rev() {
            *slot = index % site.dim;
            index /= site.dim;
        }
        out
    }

    /// Local index of `site` within the flat basis index `index`.
    pub fn local_index(&self, index: usize, site: usize) -> usize {
        let stride: usize = self.sites[site + 1..].iter().map(|s| s.dim).product();
        (index / stride) % self.sites[site].dim
    }

    /// Product ket with the given local indices.
    pub fn ket(&self, local: &[usize]) -> Result<StateVector> {
        let index = self.index_of(local)?;
        let mut amps = DVector::zeros(self.dim);
        amps[index] = ONE;
        Ok(StateVector {
            layout: self.clone(),
            amplitudes: amps,
        })
    }

    /// The state with every site in local index 0.
    pub fn ground(&self) -> StateVector {
        let mut amps = DVector::zeros(self.dim);
        amps[0] = ONE;
        StateVector {
            layout: self.clone(),
            amplitudes: amps,
        }
    }
}

impl fmt::Debug for BasisLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.sites.iter()).finish()
    }
}

fn ensure_same_layout(a: &BasisLayout, b: &BasisLayout, what: &str) -> Result<()> {
    if a != b {
        return Err(Error::invalid(format!(
            "{what}: layout mismatch ({a:?} vs {b:?})"
        )));
    }
    Ok(())
}

/// Complex amplitude vector over a [`BasisLayout`]; unnormalized between jumps.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    layout: BasisLayout,
    amplitudes: DVector<Complex64>,
}

impl StateVector {
    pub fn new(layout: BasisLayout, amplitudes: DVector<Complex64>) -> Result<Self> {
        if amplitudes.len() != layout.dim() {
            return Err(Error::invalid(format!(
                "amplitude vector has length {}, layout dimension is {}",
                amplitudes.len(),
                layout.dim()
            )));
        }
        if amplitudes.iter().any(|a| !a.is_finite()) {
            return Err(Error::numerical("state has non-finite amplitudes"));
        }
        Ok(StateVector { layout, amplitudes })
    }

    pub fn layout(&self) -> &BasisLayout {
        &self.layout
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> DVector<Complex64> {
        self.amplitudes
    }

    pub fn amplitude(&self, local: &[usize]) -> Result<Complex64> {
        Ok(self.amplitudes[self.layout.index_of(local)?])
    }

    pub fn norm_sq(&self) -> f64 {
        self.amplitudes.norm_squared()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// Returns the state scaled to unit norm.
    pub fn normalized(&self) -> Result<StateVector> {
        let n = self.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::numerical(format!(
                "cannot normalize a state of norm {n}"
            )));
        }
        Ok(StateVector {
            layout: self.layout.clone(),
            amplitudes: self.amplitudes.unscale(n),
        })
    }

    /// <self|other>
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        ensure_same_layout(&self.layout, &other.layout, "inner product")?;
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// Phase-insensitive overlap |<a|b>|^2 / (<a|a><b|b>).
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        let overlap = self.inner(other)?.norm_sqr();
        let denom = self.norm_sq() * other.norm_sq();
        if !(denom > 0.0) {
            return Err(Error::invalid("fidelity with a zero vector"));
        }
        Ok(overlap / denom)
    }

    pub fn scaled(&self, factor: Complex64) -> StateVector {
        StateVector {
            layout: self.layout.clone(),
            amplitudes: self.amplitudes.scale_c(factor),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.amplitudes.iter().all(|a| a.is_finite())
    }

    /// Largest absolute component-wise difference.
    pub fn max_abs_diff(&self, other: &StateVector) -> Result<f64> {
        ensure_same_layout(&self.layout, &other.layout, "state difference")?;
        Ok(self
            .amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// Sum of two states on the same layout.
    pub fn plus(&self, other: &StateVector) -> Result<StateVector> {
        ensure_same_layout(&self.layout, &other.layout, "state sum")?;
        Ok(StateVector {
            layout: self.layout.clone(),
            amplitudes: &self.amplitudes + &other.amplitudes,
        })
    }
}

trait ScaleComplex {
    fn scale_c(&self, factor: Complex64) -> Self;
}

impl ScaleComplex for DVector<Complex64> {
    fn scale_c(&self, factor: Complex64) -> Self {
        self.map(|a| a * factor)
    }
}

/// Dense complex square matrix acting on a [`BasisLayout`].
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    layout: BasisLayout,
    entries: DMatrix<Complex64>,
}

impl OperatorMatrix {
    pub fn new(layout: BasisLayout, entries: DMatrix<Complex64>) -> Result<Self> {
        let d = layout.dim();
        if entries.nrows() != d || entries.ncols() != d {
            return Err(Error::invalid(format!(
                "operator is {}x{}, layout dimension is {d}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        Ok(OperatorMatrix { layout, entries })
    }

    pub fn zeros(layout: &BasisLayout) -> Self {
        let d = layout.dim();
        OperatorMatrix {
            layout: layout.clone(),
            entries: DMatrix::zeros(d, d),
        }
    }

    pub fn identity(layout: &BasisLayout) -> Self {
        let d = layout.dim();
        OperatorMatrix {
            layout: layout.clone(),
            entries: DMatrix::identity(d, d),
        }
    }

    pub fn layout(&self) -> &BasisLayout {
        &self.layout
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    pub fn adjoint(&self) -> OperatorMatrix {
        OperatorMatrix {
            layout: self.layout.clone(),
            entries: self.entries.adjoint(),
        }
    }

    pub fn scale(&self, factor: f64) -> OperatorMatrix {
        self.scale_complex(Complex64::new(factor, 0.0))
    }

    pub fn scale_complex(&self, factor: Complex64) -> OperatorMatrix {
        OperatorMatrix {
            layout: self.layout.clone(),
            entries: self.entries.map(|a| a * factor),
        }
    }

    /// `self† self`
    pub fn gram(&self) -> OperatorMatrix {
        OperatorMatrix {
            layout: self.layout.clone(),
            entries: self.entries.adjoint() * &self.entries,
        }
    }

    /// `[self, other]`
    pub fn commutator(&self, other: &OperatorMatrix) -> OperatorMatrix {
        self * other - other * self
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    /// Maximum absolute row sum.
    pub fn inf_norm(&self) -> f64 {
        self.entries
            .row_iter()
            .map(|row| row.iter().map(|a| a.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &OperatorMatrix) -> f64 {
        assert_eq!(self.layout, other.layout, "layout mismatch");
        (&self.entries - &other.entries)
            .iter()
            .map(|a| a.norm())
            .fold(0.0, f64::max)
    }

    /// `‖A − A†‖_max <= tol`
    pub fn is_hermitian(&self, tol: f64) -> bool {
        let d = self.dim();
        (0..d).all(|i| {
            (i..d).all(|j| (self.entries[(i, j)] - self.entries[(j, i)].conj()).norm() <= tol)
        })
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|a| a.is_finite())
    }

    /// `tr(self · rho)`
    pub fn trace_product(&self, rho: &OperatorMatrix) -> Complex64 {
        assert_eq!(self.layout, rho.layout, "layout mismatch");
        let d = self.dim();
        let mut acc = ZERO;
        for i in 0..d {
            for k in 0..d {
                acc += self.entries[(i, k)] * rho.entries[(k, i)];
            }
        }
        acc
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.trace()
    }

    /// `|psi><psi|`
    pub fn projector(psi: &StateVector) -> OperatorMatrix {
        OperatorMatrix {
            layout: psi.layout.clone(),
            entries: psi.amplitudes() * psi.amplitudes().adjoint(),
        }
    }
}

macro_rules! binary_op {
    ($tr:ident, $method:ident, $op:tt) => {
        impl $tr<&OperatorMatrix> for &OperatorMatrix {
            type Output = OperatorMatrix;
            fn $method(self, rhs: &OperatorMatrix) -> OperatorMatrix {
                assert_eq!(self.layout, rhs.layout, "layout mismatch");
                OperatorMatrix {
                    layout: self.layout.clone(),
                    entries: &self.entries $op &rhs.entries,
                }
            }
        }
        impl $tr<OperatorMatrix> for OperatorMatrix {
            type Output = OperatorMatrix;
            fn $method(self, rhs: OperatorMatrix) -> OperatorMatrix {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&OperatorMatrix> for OperatorMatrix {
            type Output = OperatorMatrix;
            fn $method(self, rhs: &OperatorMatrix) -> OperatorMatrix {
                (&self).$method(rhs)
            }
        }
    };
}

binary_op!(Add, add, +);
binary_op!(Sub, sub, -);
binary_op!(Mul, mul, *);

impl Neg for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn neg(self) -> OperatorMatrix {
        self.scale(-1.0)
    }
}

/// Identity-padded Kronecker embedding of `local_op` at `site_index`.
pub fn embed(
    local_op: &DMatrix<Complex64>,
    site_index: usize,
    layout: &BasisLayout,
) -> Result<OperatorMatrix> {
    let sites = layout.sites();
    let site = sites.get(site_index).ok_or_else(|| {
        Error::invalid(format!(
            "site index {site_index} out of range for a {}-site layout",
            sites.len()
        ))
    })?;
    if local_op.nrows() != site.dim || local_op.ncols() != site.dim {
        return Err(Error::invalid(format!(
            "local operator is {}x{} but site {site_index} has dimension {}",
            local_op.nrows(),
            local_op.ncols(),
            site.dim
        )));
    }
    let left: usize = sites[..site_index].iter().map(|s| s.dim).product();
    let right: usize = sites[site_index + 1..].iter().map(|s| s.dim).product();
    let entries = DMatrix::<Complex64>::identity(left, left)
        .kronecker(local_op)
        .kronecker(&DMatrix::<Complex64>::identity(right, right));
    OperatorMatrix::new(layout.clone(), entries)
}

/// `A · psi`, unnormalized.
pub fn apply(a: &OperatorMatrix, psi: &StateVector) -> Result<StateVector> {
    ensure_same_layout(&a.layout, &psi.layout, "apply")?;
    Ok(StateVector {
        layout: psi.layout.clone(),
        amplitudes: &a.entries * &psi.amplitudes,
    })
}

/// `<psi|A|psi>`
pub fn expectation(a: &OperatorMatrix, psi: &StateVector) -> Result<Complex64> {
    ensure_same_layout(&a.layout, &psi.layout, "expectation")?;
    Ok(psi.amplitudes.dotc(&(&a.entries * &psi.amplitudes)))
}

/// Local operators on a single site.
pub mod local {
    use super::*;

    /// Atomic lowering operator |g><e|.
    pub fn sigma_minus() -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(2, 2);
        m[(0, 1)] = ONE;
        m
    }

    /// Bosonic annihilation operator truncated to `cutoff` Fock levels.
    pub fn annihilation(cutoff: usize) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(cutoff, cutoff);
        for n in 1..cutoff {
            m[(n - 1, n)] = Complex64::new((n as f64).sqrt(), 0.0);
        }
        m
    }

    /// Diagonal operator with the local index as eigenvalue (σ†σ for an atom, a†a for a cavity).
    pub fn number(dim: usize) -> DMatrix<Complex64> {
        DMatrix::from_diagonal(&DVector::from_fn(dim, |n, _| Complex64::new(n as f64, 0.0)))
    }

    pub fn identity(dim: usize) -> DMatrix<Complex64> {
        DMatrix::identity(dim, dim)
    }
}

/// Right-eigenvector decomposition `A = V · diag(λ) · V⁻¹` of a general complex matrix.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: Vec<Complex64>,
    pub vectors: DMatrix<Complex64>,
    pub inverse: DMatrix<Complex64>,
    /// 1-norm condition number of `vectors` (columns normalized to unit length).
    pub condition: f64,
}

impl EigenDecomposition {
    pub fn reconstruct(&self) -> DMatrix<Complex64> {
        let d = DMatrix::from_diagonal(&DVector::from_column_slice(&self.values));
        &self.vectors * d * &self.inverse
    }
}

/// Condition numbers above this are reported as a numerical failure.
pub const MAX_EIGENVECTOR_CONDITION: f64 = 1e12;

const SCHUR_MAX_ITERATIONS: usize = 10_000;

/// Eigendecomposition of a general (non-Hermitian) complex matrix via complex
/// Schur form and triangular back-substitution.
pub fn eigendecompose_general(a: &OperatorMatrix) -> Result<EigenDecomposition> {
    eigendecompose_matrix(&a.entries)
}

pub(crate) fn eigendecompose_matrix(a: &DMatrix<Complex64>) -> Result<EigenDecomposition> {
    let n = a.nrows();
    if n == 0 || a.ncols() != n {
        return Err(Error::invalid(
            "eigendecomposition needs a non-empty square matrix",
        ));
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::numerical("matrix has non-finite entries"));
    }
    let scale = a.iter().map(|x| x.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Ok(EigenDecomposition {
            values: vec![ZERO; n],
            vectors: DMatrix::identity(n, n),
            inverse: DMatrix::identity(n, n),
            condition: 1.0,
        });
    }

    let schur = nalgebra::linalg::Schur::try_new(a.clone(), f64::EPSILON, SCHUR_MAX_ITERATIONS)
        .ok_or_else(|| Error::numerical("Schur iteration did not converge"))?;
    let (q, t) = schur.unpack();

    let values: Vec<Complex64> = (0..n).map(|k| t[(k, k)]).collect();
    let small = f64::EPSILON * scale;

    // Eigenvectors of the triangular factor by back-substitution.
    let mut y = DMatrix::<Complex64>::zeros(n, n);
    for k in 0..n {
        let lambda = values[k];
        y[(k, k)] = ONE;
        for j in (0..k).rev() {
            let mut acc = ZERO;
            for m in (j + 1)..=k {
                acc += t[(j, m)] * y[(m, k)];
            }
            let mut denom = t[(j, j)] - lambda;
            if denom.norm() < small {
                denom = Complex64::new(small, 0.0);
            }
            y[(j, k)] = -acc / denom;
        }
    }
    let mut vectors = &q * y;
    for mut col in vectors.column_iter_mut() {
        let norm = col.norm();
        if norm > 0.0 {
            col.unscale_mut(norm);
        }
    }

    let inverse = vectors
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::numerical("eigenvector matrix is singular (defective matrix)"))?;
    let condition = one_norm(&vectors) * one_norm(&inverse);
    if !condition.is_finite() || condition > MAX_EIGENVECTOR_CONDITION {
        return Err(Error::numerical(format!(
            "eigenvector matrix is ill-conditioned (condition number {condition:.3e} > {MAX_EIGENVECTOR_CONDITION:.0e})"
        )));
    }
    Ok(EigenDecomposition {
        values,
        vectors,
        inverse,
        condition,
    })
}

pub(crate) fn one_norm(m: &DMatrix<Complex64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|x| x.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}
