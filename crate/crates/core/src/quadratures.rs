//! Hermitian cosine/sine quadratures of the Fourier-mode displacement.
//!
//! `Q_k = Q_k^(c) - i·Q_k^(s)` with
//! `Q_k^(c) = Σ_j cos(2πjk/N)/√N · q_j` and `Q_k^(s) = Σ_j sin(2πjk/N)/√N · q_j`.
//! Both are real combinations of the commuting `q_j`, hence diagonal in the
//! position basis; their exponentials are diagonal phases, or equivalently a
//! single layer of `R_z` rotations on the displacement bits.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::encoding::GridSpec;
use crate::exec::{self, Execution};
use crate::model::{self, ModelParams};
use crate::state::{site_register, LatticeState};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuadratureKind {
    Cos,
    Sin,
}

impl fmt::Display for QuadratureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            QuadratureKind::Cos => "cos",
            QuadratureKind::Sin => "sin",
        })
    }
}

impl FromStr for QuadratureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cos" | "c" => Ok(QuadratureKind::Cos),
            "sin" | "s" => Ok(QuadratureKind::Sin),
            other => Err(Error::param(
                "quadrature",
                format!("unknown quadrature {other:?}"),
            )),
        }
    }
}

/// Site weights of both quadratures for one mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureWeights {
    pub mode_k: usize,
    pub w_cos: Vec<f64>,
    pub w_sin: Vec<f64>,
}

/// `w_cos[j] = cos(2πjk/N)/√N`, `w_sin[j] = sin(2πjk/N)/√N`.
pub fn weights(n_sites: usize, k: usize) -> Result<QuadratureWeights> {
    if n_sites == 0 {
        return Err(Error::param("n_sites", "must be positive"));
    }
    if k >= n_sites {
        return Err(Error::OutOfRange {
            what: "mode",
            index: k,
            bound: n_sites,
        });
    }
    let norm = 1.0 / (n_sites as f64).sqrt();
    let mut w_cos = Vec::with_capacity(n_sites);
    let mut w_sin = Vec::with_capacity(n_sites);
    for j in 0..n_sites {
        // reduce jk mod N first so exact zeros stay exact at multiples of π/2
        let m = (j * k) % n_sites;
        let (s, c) = exact_sin_cos(m, n_sites);
        w_cos.push(c * norm);
        w_sin.push(s * norm);
    }
    Ok(QuadratureWeights {
        mode_k: k,
        w_cos,
        w_sin,
    })
}

/// `sin`/`cos` of `2πm/n`, exact at multiples of a quarter turn.
fn exact_sin_cos(m: usize, n: usize) -> (f64, f64) {
    if (4 * m) % n == 0 {
        match 4 * m / n {
            0 => (0.0, 1.0),
            1 => (1.0, 0.0),
            2 => (0.0, -1.0),
            _ => (-1.0, 0.0),
        }
    } else {
        (2.0 * PI * m as f64 / n as f64).sin_cos()
    }
}

impl QuadratureWeights {
    pub fn n_sites(&self) -> usize {
        self.w_cos.len()
    }

    pub fn of(&self, kind: QuadratureKind) -> &[f64] {
        match kind {
            QuadratureKind::Cos => &self.w_cos,
            QuadratureKind::Sin => &self.w_sin,
        }
    }

    /// Eigenvalue `Σ_j w_j q(x_j)` of the quadrature at every global index.
    pub fn operator_values(&self, grid: &GridSpec, kind: QuadratureKind) -> Vec<f64> {
        self.operator_values_with(Execution::default(), grid, kind)
    }

    pub fn operator_values_with(
        &self,
        exec: Execution,
        grid: &GridSpec,
        kind: QuadratureKind,
    ) -> Vec<f64> {
        let w = self.of(kind);
        let bits = grid.bits();
        let positions = grid.positions();
        let dim = 1usize << (self.n_sites() * bits as usize);
        exec::collect_indexed(exec, dim, |x| {
            w.iter()
                .enumerate()
                .map(|(j, wj)| wj * positions[site_register(x, j, bits)])
                .sum()
        })
    }

    /// Largest `|Σ_j w_j q_j|` over all grid configurations.
    pub fn operator_bound(&self, grid: &GridSpec, kind: QuadratureKind) -> f64 {
        let positions = grid.positions();
        let lo = positions.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = positions.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        // separable: each site independently pushes the sum up or down
        let (mut top, mut bottom) = (0.0, 0.0);
        for w in self.of(kind) {
            let (a, b) = (w * lo, w * hi);
            top += a.max(b);
            bottom += a.min(b);
        }
        f64::max(top, -bottom)
    }
}

fn check_weights(state: &LatticeState, grid: &GridSpec, w: &QuadratureWeights) -> Result<()> {
    state.check_shape(w.n_sites(), grid.bits())
}

/// Applies `exp(i·θ·Q^(which))` as a diagonal phase.
pub fn apply_exp_quadrature(
    state: &mut LatticeState,
    grid: &GridSpec,
    weights: &QuadratureWeights,
    which: QuadratureKind,
    theta: f64,
) -> Result<()> {
    check_weights(state, grid, weights)?;
    if theta == 0.0 {
        return Ok(());
    }
    let w = weights.of(which);
    let bits = grid.bits();
    let positions = grid.positions();
    state.apply_diagonal_phase(|x| {
        theta
            * w.iter()
                .enumerate()
                .map(|(j, wj)| wj * positions[site_register(x, j, bits)])
                .sum::<f64>()
    });
    Ok(())
}

/// One `R_z(angle)` on bit `bit` of site `site`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RzAngle {
    pub site: usize,
    pub bit: u32,
    pub angle: f64,
}

/// Per-bit rotation angles `φ_{j,r} = θ·Δq·w_j·w_r^bit`, in radians, unreduced.
///
/// `Π R_z(φ_{j,r})` equals `exp(i·θ·Q)` up to a global phase; see
/// [`rz_global_phase`] for the offset-grid constant.
pub fn rz_angles(
    grid: &GridSpec,
    weights: &QuadratureWeights,
    which: QuadratureKind,
    theta: f64,
) -> Vec<RzAngle> {
    let dq = grid.spacing();
    let mut out = Vec::with_capacity(weights.n_sites() * grid.bits() as usize);
    for (site, wj) in weights.of(which).iter().enumerate() {
        for bit in 0..grid.bits() {
            let wr = grid.bit_weight(bit).expect("bit in range") as f64;
            out.push(RzAngle {
                site,
                bit,
                angle: theta * dq * wj * wr,
            });
        }
    }
    out
}

/// Phase `θ·Σ_j w_j·offset` dropped when `exp(iθQ)` is synthesized from
/// per-bit rotations (nonzero only on the offset grid).
pub fn rz_global_phase(
    grid: &GridSpec,
    weights: &QuadratureWeights,
    which: QuadratureKind,
    theta: f64,
) -> f64 {
    theta * grid.position_offset() * weights.of(which).iter().sum::<f64>()
}

/// Sparse real matrix with per-row `(column, value)` lists.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    dim: usize,
    rows: Vec<Vec<(usize, f64)>>,
}

impl SparseMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            rows: vec![Vec::new(); dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn add(&mut self, row: usize, col: usize, value: f64) {
        if value == 0.0 {
            return;
        }
        let r = &mut self.rows[row];
        match r.iter_mut().find(|(c, _)| *c == col) {
            Some((_, v)) => *v += value,
            None => r.push((col, value)),
        }
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.rows[row]
            .iter()
            .find(|(c, _)| *c == col)
            .map_or(0.0, |(_, v)| *v)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.dim);
        for (r, row) in self.rows.iter().enumerate() {
            for &(k, a) in row {
                for &(c, b) in &other.rows[k] {
                    out.add(r, c, a * b);
                }
            }
        }
        out
    }

    /// Largest absolute entry of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut worst = 0.0_f64;
        for r in 0..self.dim {
            for &(c, _) in self.rows[r].iter().chain(&other.rows[r]) {
                worst = worst.max((self.get(r, c) - other.get(r, c)).abs());
            }
        }
        worst
    }

    pub fn is_diagonal(&self) -> bool {
        self.rows
            .iter()
            .enumerate()
            .all(|(r, row)| row.iter().all(|(c, v)| *c == r || *v == 0.0))
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|r| self.get(r, r)).collect()
    }
}

/// Quadrature `Σ_j w_j q̂_j` assembled from embedded single-site operators.
pub fn quadrature_matrix(
    n_sites: usize,
    grid: &GridSpec,
    weights: &QuadratureWeights,
    which: QuadratureKind,
) -> Result<SparseMatrix> {
    let params = ModelParams::units(n_sites, 0.0)?;
    let qubits = model::check_oracle_size(&params, grid)?;
    let dim = 1usize << qubits;
    let levels = grid.levels();
    let bits = grid.bits();
    // single-site position operator, stored generally
    let mut site_q = SparseMatrix::zeros(levels);
    for (x, q) in grid.positions().iter().enumerate() {
        site_q.add(x, x, *q);
    }
    let mut m = SparseMatrix::zeros(dim);
    for (j, wj) in weights.of(which).iter().enumerate() {
        let shift = j * bits as usize;
        for x in 0..dim {
            let xj = site_register(x, j, bits);
            let base = x & !((levels - 1) << shift);
            for &(y, v) in &site_q.rows[xj] {
                m.add(x, base | (y << shift), wj * v);
            }
        }
    }
    Ok(m)
}

/// `max |[Q_k^(c), Q_k^(s)]|` from explicitly assembled operators.
pub fn commutator_norm(n_sites: usize, k: usize, grid: &GridSpec) -> Result<f64> {
    let w = weights(n_sites, k)?;
    let c = quadrature_matrix(n_sites, grid, &w, QuadratureKind::Cos)?;
    let s = quadrature_matrix(n_sites, grid, &w, QuadratureKind::Sin)?;
    Ok(c.mul(&s).max_abs_diff(&s.mul(&c)))
}

/// `‖exp(iαQ^(c) + iβQ^(s))ψ - exp(iαQ^(c))·exp(iβQ^(s))ψ‖` for a given state.
///
/// The joint exponential comes from the assembled generator, which must be
/// diagonal; the product side uses [`apply_exp_quadrature`].
pub fn factorization_deviation(
    state: &LatticeState,
    grid: &GridSpec,
    k: usize,
    alpha: f64,
    beta: f64,
) -> Result<f64> {
    let n = state.n_sites();
    let w = weights(n, k)?;
    let c = quadrature_matrix(n, grid, &w, QuadratureKind::Cos)?;
    let s = quadrature_matrix(n, grid, &w, QuadratureKind::Sin)?;
    if !(c.is_diagonal() && s.is_diagonal()) {
        return Err(Error::param(
            "quadrature",
            "assembled quadrature is not diagonal",
        ));
    }
    let (dc, ds) = (c.diagonal(), s.diagonal());
    let joint: Vec<Complex64> = state
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(x, a)| a * Complex64::cis(alpha * dc[x] + beta * ds[x]))
        .collect();
    let mut product = state.clone();
    apply_exp_quadrature(&mut product, grid, &w, QuadratureKind::Sin, beta)?;
    apply_exp_quadrature(&mut product, grid, &w, QuadratureKind::Cos, alpha)?;
    Ok(joint
        .iter()
        .zip(product.amplitudes())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::EncodingKind;
    use proptest::prelude::*;

    fn grid(bits: u32, kind: EncodingKind) -> GridSpec {
        GridSpec::new(bits, 1.7, kind).unwrap()
    }

    #[test]
    fn weight_examples() {
        let w = weights(4, 0).unwrap();
        assert_eq!(w.w_cos, vec![0.5; 4]);
        assert_eq!(w.w_sin, vec![0.0; 4]);
        let w = weights(4, 1).unwrap();
        assert_eq!(w.w_cos, vec![0.5, 0.0, -0.5, 0.0]);
        assert_eq!(w.w_sin, vec![0.0, 0.5, 0.0, -0.5]);
        for n in 2..9 {
            for k in 0..n {
                let w = weights(n, k).unwrap();
                assert_eq!(w.w_cos[0], 1.0 / (n as f64).sqrt());
                assert_eq!(w.w_sin[0], 0.0);
            }
        }
        assert!(weights(4, 4).is_err());
    }

    #[test]
    fn weight_norms_and_parity() {
        for n in 2..12 {
            for k in 1..n {
                let w = weights(n, k).unwrap();
                let total: f64 = w.w_cos.iter().chain(&w.w_sin).map(|x| x * x).sum();
                assert!((total - 1.0).abs() < 1e-12);
                let m = weights(n, n - k).unwrap();
                for j in 0..n {
                    assert!((m.w_cos[j] - w.w_cos[j]).abs() < 1e-15);
                    assert!((m.w_sin[j] + w.w_sin[j]).abs() < 1e-15);
                }
            }
        }
    }

    fn test_state(n: usize, bits: u32, kind: EncodingKind) -> (GridSpec, LatticeState) {
        let g = grid(bits, kind);
        let p = ModelParams::units(n, 0.0).unwrap();
        let mut s = LatticeState::init_product_gaussian(&p, &g, 0.6).unwrap();
        s.apply_diagonal_phase(|x| (x as f64 * 0.71).sin());
        (g, s)
    }

    #[test]
    fn exp_quadrature_identities() {
        let (g, s) = test_state(3, 3, EncodingKind::UnsignedOffset);
        let w = weights(3, 1).unwrap();
        let mut a = s.clone();
        apply_exp_quadrature(&mut a, &g, &w, QuadratureKind::Cos, 0.0).unwrap();
        assert_eq!(a, s);

        let mut cs = s.clone();
        apply_exp_quadrature(&mut cs, &g, &w, QuadratureKind::Cos, 0.8).unwrap();
        apply_exp_quadrature(&mut cs, &g, &w, QuadratureKind::Sin, -1.1).unwrap();
        let mut sc = s.clone();
        apply_exp_quadrature(&mut sc, &g, &w, QuadratureKind::Sin, -1.1).unwrap();
        apply_exp_quadrature(&mut sc, &g, &w, QuadratureKind::Cos, 0.8).unwrap();
        let d: f64 = cs
            .amplitudes()
            .iter()
            .zip(sc.amplitudes())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(d < 1e-12);

        let mut back = s.clone();
        apply_exp_quadrature(&mut back, &g, &w, QuadratureKind::Sin, 0.9).unwrap();
        apply_exp_quadrature(&mut back, &g, &w, QuadratureKind::Sin, -0.9).unwrap();
        let d: f64 = back
            .amplitudes()
            .iter()
            .zip(s.amplitudes())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(d < 1e-12);
        assert!((back.norm() - s.norm()).abs() < 1e-12);
    }

    #[test]
    fn rz_trivial_cases() {
        let g = grid(3, EncodingKind::UnsignedOffset);
        let w = weights(2, 1).unwrap();
        assert!(rz_angles(&g, &w, QuadratureKind::Cos, 0.0)
            .iter()
            .all(|r| r.angle == 0.0));
        let w0 = weights(2, 0).unwrap();
        let angles = rz_angles(&g, &w0, QuadratureKind::Sin, 1.3);
        assert_eq!(angles.len(), 6);
        assert!(angles.iter().all(|r| r.angle == 0.0));
    }

    /// Product of explicit `R_z = diag(e^{-iφ/2}, e^{iφ/2})` matrices compared
    /// with the diagonal of `exp(iθQ)`, enumerating every grid point.
    #[test]
    fn rz_layer_reproduces_exponential_up_to_global_phase() {
        for kind in [EncodingKind::UnsignedOffset, EncodingKind::TwosComplement] {
            let g = grid(3, kind);
            for k in 0..2 {
                let w = weights(2, k).unwrap();
                for which in [QuadratureKind::Cos, QuadratureKind::Sin] {
                    let theta = 0.83;
                    let angles = rz_angles(&g, &w, which, theta);
                    let pos = g.positions();
                    let wq = w.of(which);
                    let mut ratio0: Option<Complex64> = None;
                    let mut worst = 0.0_f64;
                    for x in 0..64usize {
                        let mut rz = Complex64::new(1.0, 0.0);
                        for r in &angles {
                            let bit = (x >> (r.site * 3 + r.bit as usize)) & 1;
                            let sign = if bit == 1 { 1.0 } else { -1.0 };
                            rz *= Complex64::cis(sign * r.angle / 2.0);
                        }
                        let exact =
                            Complex64::cis(theta * (wq[0] * pos[x & 7] + wq[1] * pos[x >> 3]));
                        let ratio = exact / rz;
                        let r0 = *ratio0.get_or_insert(ratio);
                        worst = worst.max((ratio - r0).norm());
                    }
                    assert!(worst <= 1e-10, "{kind:?} k={k} {which}: {worst}");
                }
            }
        }
    }

    #[test]
    fn global_phase_accounts_for_offset() {
        let g = grid(3, EncodingKind::UnsignedOffset);
        let w = weights(2, 0).unwrap();
        let theta = 0.4;
        let angles = rz_angles(&g, &w, QuadratureKind::Cos, theta);
        let global = rz_global_phase(&g, &w, QuadratureKind::Cos, theta);
        let values = w.operator_values(&g, QuadratureKind::Cos);
        for (x, v) in values.iter().enumerate() {
            let bits_phase: f64 = angles
                .iter()
                .filter(|r| (x >> (r.site * 3 + r.bit as usize)) & 1 == 1)
                .map(|r| r.angle)
                .sum();
            assert!((bits_phase + global - theta * v).abs() < 1e-12);
        }
        let twos = grid(3, EncodingKind::TwosComplement);
        assert_eq!(rz_global_phase(&twos, &w, QuadratureKind::Cos, theta), 0.0);
    }

    #[test]
    fn commutator_vanishes() {
        assert_eq!(
            commutator_norm(4, 1, &grid(2, EncodingKind::UnsignedOffset)).unwrap(),
            0.0
        );
        assert_eq!(
            commutator_norm(3, 0, &grid(3, EncodingKind::TwosComplement)).unwrap(),
            0.0
        );
        assert!(commutator_norm(5, 1, &grid(3, EncodingKind::UnsignedOffset)).is_err());
    }

    #[test]
    fn sparse_product_detects_noncommuting_operators() {
        // sanity check of the commutator machinery on σx, σz
        let mut x = SparseMatrix::zeros(2);
        x.add(0, 1, 1.0);
        x.add(1, 0, 1.0);
        let mut z = SparseMatrix::zeros(2);
        z.add(0, 0, 1.0);
        z.add(1, 1, -1.0);
        assert_eq!(x.mul(&z).max_abs_diff(&z.mul(&x)), 2.0);
        assert!(!x.is_diagonal());
    }

    #[test]
    fn quadratures_are_real_diagonal() {
        let g = grid(2, EncodingKind::UnsignedOffset);
        let w = weights(3, 2).unwrap();
        for which in [QuadratureKind::Cos, QuadratureKind::Sin] {
            let m = quadrature_matrix(3, &g, &w, which).unwrap();
            assert!(m.is_diagonal());
            let values = w.operator_values(&g, which);
            for (a, b) in m.diagonal().iter().zip(&values) {
                assert!((a - b).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn operator_bound_is_attained() {
        let g = grid(3, EncodingKind::UnsignedOffset);
        for k in 0..3 {
            let w = weights(3, k).unwrap();
            for which in [QuadratureKind::Cos, QuadratureKind::Sin] {
                let brute = w
                    .operator_values(&g, which)
                    .iter()
                    .map(|v| v.abs())
                    .fold(0.0, f64::max);
                assert!((w.operator_bound(&g, which) - brute).abs() < 1e-12);
            }
        }
    }

    proptest! {
        #[test]
        fn exponential_factorizes(alpha in -3.0f64..3.0, beta in -3.0f64..3.0, k in 0usize..4) {
            let (g, s) = test_state(4, 2, EncodingKind::UnsignedOffset);
            prop_assert!(factorization_deviation(&s, &g, k, alpha, beta).unwrap() <= 1e-12);
        }
    }
}
