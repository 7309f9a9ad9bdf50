// Copyright 2026 The homjump Authors
// SPDX-License-Identifier: Apache-2.0

//! Brute-force density-matrix integration, used as a reference for trajectory averages.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::algebra::{OperatorMatrix, I};
use crate::error::{Error, Result};
use crate::sources::SystemModel;

const STEP_FACTOR: f64 = 1e-3;
const TRACE_FAILURE: f64 = 1e-6;

/// Sparse Lindblad generator acting on row-major `vec(ρ)` (entry `i·d + j` is `ρ_ij`).
#[derive(Debug, Clone)]
pub struct Liouvillian {
    dim: usize,
    row_start: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<Complex64>,
}

impl Liouvillian {
    /// `dρ/dt = −i(H_NH ρ − ρ H_NH†) + Σ_c J_c ρ J_c†`
    pub fn new(model: &SystemModel) -> Self {
        let d = model.layout().dim();
        let h = model.h_nonhermitian().entries();
        let left = h.map(|x| -I * x);
        let right = h.adjoint().map(|x| I * x);
        let mut triplets: Vec<(usize, usize, Complex64)> = Vec::new();
        for (i, k, a) in nonzeros(&left) {
            for j in 0..d {
                triplets.push((i * d + j, k * d + j, a));
            }
        }
        for (k, j, b) in nonzeros(&right) {
            for i in 0..d {
                triplets.push((i * d + j, i * d + k, b));
            }
        }
        for c in model.channels() {
            let nz = nonzeros(c.operator().entries());
            for &(i, k, a) in &nz {
                for &(j, l, b) in &nz {
                    triplets.push((i * d + j, k * d + l, a * b.conj()));
                }
            }
        }
        triplets.sort_by_key(|&(r, c, _)| (r, c));

        let n = d * d;
        let mut row_start = vec![0; n + 1];
        let mut cols = Vec::new();
        let mut values: Vec<Complex64> = Vec::new();
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *values.last_mut().expect("entry exists") += v;
            } else {
                cols.push(c);
                values.push(v);
                row_start[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..n {
            row_start[r + 1] += row_start[r];
        }
        Liouvillian {
            dim: d,
            row_start,
            cols,
            values,
        }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// `out = L x`
    pub fn apply_into(&self, x: &[Complex64], out: &mut [Complex64]) {
        for (r, o) in out.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in self.row_start[r]..self.row_start[r + 1] {
                acc += self.values[k] * x[self.cols[k]];
            }
            *o = acc;
        }
    }

    fn trace(&self, x: &[Complex64]) -> Complex64 {
        (0..self.dim).map(|i| x[i * self.dim + i]).sum()
    }
}

fn nonzeros(m: &DMatrix<Complex64>) -> Vec<(usize, usize, Complex64)> {
    let mut out = Vec::new();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let v = m[(i, j)];
            if v != Complex64::new(0.0, 0.0) {
                out.push((i, j, v));
            }
        }
    }
    out
}

/// Density matrices at each time of `t_grid`, starting from the model's
/// initial pure state at `t = 0`.
///
/// Integration is classic RK4 with a fixed step no larger than
/// `1e-3 / rate_scale`, aligned to the grid.
pub fn lindblad_oracle(model: &SystemModel, t_grid: &[f64]) -> Result<Vec<OperatorMatrix>> {
    if t_grid.first().is_some_and(|t| !(*t >= 0.0)) || t_grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::invalid(
            "time grid must be finite and start at or after 0",
        ));
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("time grid must be strictly increasing"));
    }
    let liouvillian = Liouvillian::new(model);
    let d = model.layout().dim();
    let n = d * d;
    let psi = model.initial_state().amplitudes();
    let mut rho: Vec<Complex64> = (0..n).map(|k| psi[k / d] * psi[k % d].conj()).collect();

    let h_max = STEP_FACTOR / model.rate_scale();
    let mut k1 = vec![Complex64::new(0.0, 0.0); n];
    let mut k2 = k1.clone();
    let mut k3 = k1.clone();
    let mut k4 = k1.clone();
    let mut tmp = k1.clone();

    let mut t = 0.0;
    let mut out = Vec::with_capacity(t_grid.len());
    for &target in t_grid {
        let span = target - t;
        if span > 0.0 {
            let steps = (span / h_max).ceil() as usize;
            let h = span / steps as f64;
            for _ in 0..steps {
                liouvillian.apply_into(&rho, &mut k1);
                axpy_into(&rho, &k1, 0.5 * h, &mut tmp);
                liouvillian.apply_into(&tmp, &mut k2);
                axpy_into(&rho, &k2, 0.5 * h, &mut tmp);
                liouvillian.apply_into(&tmp, &mut k3);
                axpy_into(&rho, &k3, h, &mut tmp);
                liouvillian.apply_into(&tmp, &mut k4);
                for i in 0..n {
                    rho[i] += (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * (h / 6.0);
                }
            }
        }
        t = target;
        let tr = liouvillian.trace(&rho);
        if (tr - 1.0).norm() > TRACE_FAILURE || rho.iter().any(|x| !x.is_finite()) {
            return Err(Error::numerical(format!(
                "density-matrix trace drifted to {tr} at t = {t}"
            )));
        }
        let m = DMatrix::from_row_slice(d, d, &rho);
        out.push(OperatorMatrix::new(model.layout().clone(), m)?);
    }
    Ok(out)
}

fn axpy_into(x: &[Complex64], k: &[Complex64], h: f64, out: &mut [Complex64]) {
    for ((o, a), b) in out.iter_mut().zip(x).zip(k) {
        *o = a + b * h;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{embed, local};
    use crate::sources::{
        build_cavity_qed_model, build_two_atom_model, CavityQEDParams, TwoAtomParams,
    };
    use approx::assert_abs_diff_eq;
    use nalgebra::DVector;

    fn observable(model: &SystemModel, site: usize) -> OperatorMatrix {
        let dim = model.layout().sites()[site].dim;
        embed(&local::number(dim), site, model.layout()).unwrap()
    }

    fn dense_generator(model: &SystemModel) -> DMatrix<Complex64> {
        let l = Liouvillian::new(model);
        let n = l.dim * l.dim;
        let mut m = DMatrix::zeros(n, n);
        for c in 0..n {
            let mut e = vec![Complex64::new(0.0, 0.0); n];
            e[c] = Complex64::new(1.0, 0.0);
            let mut col = vec![Complex64::new(0.0, 0.0); n];
            l.apply_into(&e, &mut col);
            for r in 0..n {
                m[(r, c)] = col[r];
            }
        }
        m
    }

    #[test]
    fn generator_matches_commutator_form() {
        let model = build_cavity_qed_model(&CavityQEDParams {
            kappa_2: 3.0,
            gamma_2: 0.4,
            ..CavityQEDParams::identical(1.5, 1.0, 1.0)
        })
        .unwrap();
        let gen = dense_generator(&model);
        let d = model.layout().dim();
        // random-ish Hermitian ρ
        let a = DMatrix::from_fn(d, d, |i, j| {
            Complex64::new((i * 7 + j * 3) as f64 % 5.0, (i + 2 * j) as f64 % 3.0)
        });
        let rho = &a * a.adjoint();
        let h = model.hamiltonian_hermitian().entries();
        let mut expected = (h * &rho - &rho * h).map(|x| -I * x);
        for c in model.channels() {
            let j = c.operator().entries();
            let jj = j.adjoint() * j;
            expected += j * &rho * j.adjoint() - (&jj * &rho + &rho * &jj).map(|x| 0.5 * x);
        }
        let vec_rho = DVector::from_iterator(d * d, (0..d * d).map(|k| rho[(k / d, k % d)]));
        let got = &gen * vec_rho;
        for k in 0..d * d {
            assert!((got[k] - expected[(k / d, k % d)]).norm() < 1e-10);
        }
    }

    #[test]
    fn initial_density_is_pure_state() {
        let m = build_two_atom_model(&TwoAtomParams::identical(1.0)).unwrap();
        let out = lindblad_oracle(&m, &[0.0]).unwrap();
        let expected = OperatorMatrix::projector(m.initial_state());
        assert!(out[0].max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn cavity_population_decays_exponentially() {
        let kappa = 1.7;
        let m = build_cavity_qed_model(&CavityQEDParams::identical(0.0, kappa, 0.0)).unwrap();
        let n1 = observable(&m, 2);
        let grid = [0.25, 0.5, 1.0, 2.0, 3.0];
        let rhos = lindblad_oracle(&m, &grid).unwrap();
        for (t, rho) in grid.iter().zip(&rhos) {
            assert_abs_diff_eq!(
                n1.trace_product(rho).re,
                (-kappa * t).exp(),
                epsilon = 1e-10
            );
            assert_abs_diff_eq!(rho.trace().re, 1.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn atom_population_decays_exponentially() {
        let m = build_two_atom_model(&TwoAtomParams::identical(1.0)).unwrap();
        let e1 = observable(&m, 0);
        let grid: Vec<f64> = (1..=20).map(|k| k as f64 * 0.25).collect();
        let rhos = lindblad_oracle(&m, &grid).unwrap();
        for (t, rho) in grid.iter().zip(&rhos) {
            assert_abs_diff_eq!(e1.trace_product(rho).re, (-t).exp(), epsilon = 1e-10);
            assert_abs_diff_eq!(rho.trace().re, 1.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn rejects_bad_grids() {
        let m = build_two_atom_model(&TwoAtomParams::identical(1.0)).unwrap();
        assert!(lindblad_oracle(&m, &[-1.0]).is_err());
        assert!(lindblad_oracle(&m, &[1.0, 1.0]).is_err());
        assert!(lindblad_oracle(&m, &[]).unwrap().is_empty());
    }
}
