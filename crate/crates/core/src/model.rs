//! The β-FPUT chain: parameters, dispersion, classical energies and the dense
//! grid Hamiltonian used as a verification oracle.
//!
//! `H = Σ_j p_j²/(2m) + Σ_j [ κ/2·(q_{j+1}-q_j)² + β/4·(q_{j+1}-q_j)⁴ ]`
//! with periodic boundary conditions (site `N` is site `0`).

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::encoding::GridSpec;
use crate::state::site_register;
use crate::{Error, Result};

/// Largest `N·b` for which dense matrices are built.
pub const ORACLE_MAX_QUBITS: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub n_sites: usize,
    pub mass: f64,
    pub kappa: f64,
    pub beta: f64,
    pub lattice_spacing: f64,
    pub hbar: f64,
}

impl Default for ModelParams {
    /// Unit system `ħ = m = a = κ = 1`, harmonic (`β = 0`), four sites.
    fn default() -> Self {
        Self {
            n_sites: 4,
            mass: 1.0,
            kappa: 1.0,
            beta: 0.0,
            lattice_spacing: 1.0,
            hbar: 1.0,
        }
    }
}

impl ModelParams {
    /// Unit-system chain with `n_sites` sites and anharmonicity `beta`.
    pub fn units(n_sites: usize, beta: f64) -> Result<Self> {
        let p = Self {
            n_sites,
            beta,
            ..Self::default()
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sites < 2 {
            return Err(Error::param(
                "model.n_sites",
                format!("{} < 2", self.n_sites),
            ));
        }
        let positive = [
            ("model.mass", self.mass),
            ("model.lattice_spacing", self.lattice_spacing),
            ("model.hbar", self.hbar),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param(name, format!("{v} must be finite and > 0")));
            }
        }
        // κ = 0 is admitted (free or purely quartic chains are useful limits).
        for (name, v) in [("model.kappa", self.kappa), ("model.beta", self.beta)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::param(name, format!("{v} must be finite and >= 0")));
            }
        }
        Ok(())
    }

    /// Mean of the nonzero normal-mode frequencies.
    pub fn mean_frequency(&self) -> f64 {
        let nonzero: Vec<f64> = (1..self.n_sites)
            .map(|k| omega(self, k))
            .filter(|w| *w > 0.0)
            .collect();
        if nonzero.is_empty() {
            0.0
        } else {
            nonzero.iter().sum::<f64>() / nonzero.len() as f64
        }
    }

    /// Harmonic ground-state width `sqrt(ħ / (2·m·ω̄))` for the mean frequency.
    pub fn default_width(&self) -> Result<f64> {
        let w = self.mean_frequency();
        if w <= 0.0 {
            return Err(Error::param(
                "model.kappa",
                "default width needs a nonzero harmonic frequency",
            ));
        }
        Ok((self.hbar / (2.0 * self.mass * w)).sqrt())
    }
}

fn omega(params: &ModelParams, k: usize) -> f64 {
    let phase = 2.0 * PI * k as f64 / params.n_sites as f64;
    (2.0 * params.kappa / params.mass * (1.0 - phase.cos()))
        .max(0.0)
        .sqrt()
}

/// Normal-mode angular frequency `ω_k = sqrt(2κ/m·(1 - cos(2πk/N)))`.
pub fn dispersion(params: &ModelParams, k: usize) -> Result<f64> {
    if k >= params.n_sites {
        return Err(Error::OutOfRange {
            what: "mode",
            index: k,
            bound: params.n_sites,
        });
    }
    Ok(omega(params, k))
}

#[inline]
pub(crate) fn bond_energy(params: &ModelParams, delta: f64) -> f64 {
    let d2 = delta * delta;
    0.5 * params.kappa * d2 + 0.25 * params.beta * d2 * d2
}

/// Potential energy of a displacement configuration, periodic bonds.
pub fn potential_energy(params: &ModelParams, q: &[f64]) -> Result<f64> {
    check_len(params, q.len())?;
    Ok(potential_unchecked(params, q))
}

pub(crate) fn potential_unchecked(params: &ModelParams, q: &[f64]) -> f64 {
    let n = q.len();
    (0..n)
        .map(|j| bond_energy(params, q[(j + 1) % n] - q[j]))
        .sum()
}

pub fn kinetic_energy(params: &ModelParams, p: &[f64]) -> Result<f64> {
    check_len(params, p.len())?;
    Ok(p.iter().map(|p| p * p).sum::<f64>() / (2.0 * params.mass))
}

fn check_len(params: &ModelParams, len: usize) -> Result<()> {
    if len != params.n_sites {
        return Err(Error::LengthMismatch {
            expected: params.n_sites,
            actual: len,
        });
    }
    Ok(())
}

pub(crate) fn check_oracle_size(params: &ModelParams, grid: &GridSpec) -> Result<usize> {
    let qubits = params.n_sites * grid.bits() as usize;
    if qubits > ORACLE_MAX_QUBITS {
        return Err(Error::OracleTooLarge {
            requested: qubits,
            limit: ORACLE_MAX_QUBITS,
        });
    }
    Ok(qubits)
}

/// Single-site kinetic operator `F† diag(p²/2m) F` in the register basis.
///
/// The momentum grid is even under `s -> -s`, so the matrix is real
/// symmetric.
pub fn site_kinetic_matrix(params: &ModelParams, grid: &GridSpec) -> DMatrix<f64> {
    let levels = grid.levels();
    let energies: Vec<f64> = grid
        .momenta(params.hbar)
        .iter()
        .map(|p| p * p / (2.0 * params.mass))
        .collect();
    DMatrix::from_fn(levels, levels, |x, y| {
        let sum: Complex64 = energies
            .iter()
            .enumerate()
            .map(|(s, e)| {
                let angle = 2.0 * PI * (s as f64) * (x as f64 - y as f64) / levels as f64;
                Complex64::from_polar(*e, angle)
            })
            .sum();
        sum.re / levels as f64
    })
}

/// Dense grid Hamiltonian `H = T + V` of dimension `2^(N·b)`.
pub fn build_dense_hamiltonian(params: &ModelParams, grid: &GridSpec) -> Result<DMatrix<f64>> {
    params.validate()?;
    let qubits = check_oracle_size(params, grid)?;
    let dim = 1usize << qubits;
    let n = params.n_sites;
    let bits = grid.bits();
    let levels = grid.levels();
    let kin = site_kinetic_matrix(params, grid);
    let positions = grid.positions();

    let mut h = DMatrix::<f64>::zeros(dim, dim);
    let mut q = vec![0.0; n];
    for x in 0..dim {
        for (j, qj) in q.iter_mut().enumerate() {
            *qj = positions[site_register(x, j, bits)];
        }
        h[(x, x)] += potential_unchecked(params, &q);
        for j in 0..n {
            let shift = j * bits as usize;
            let xj = site_register(x, j, bits);
            let base = x & !((levels - 1) << shift);
            for y in 0..levels {
                h[(x, base | (y << shift))] += kin[(xj, y)];
            }
        }
    }
    Ok(h)
}
