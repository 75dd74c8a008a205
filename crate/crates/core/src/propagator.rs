//! Split-operator time evolution.
//!
//! The kinetic factor `exp(-i·τ·Σ p_j²/(2mħ))` is applied per site as
//! forward DFT, momentum phase, inverse DFT. The potential factor
//! `exp(-i·τ·V(q)/ħ)` is one diagonal phase in the position basis, which is
//! the same unitary the reversible bond arithmetic realizes gate by gate.
//!
//! DFT convention: `F[s, x] = exp(-2πi·x·s/2^b)/sqrt(2^b)`, momenta centred
//! (see [`GridSpec::momentum_value`]).

use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::encoding::GridSpec;
use crate::exec::{self, Execution, CHUNK};
use crate::model::{self, ModelParams};
use crate::state::{site_register, LatticeState};
use crate::{Error, Result};

/// Boundary probability above which evolution logs a wrap-around warning.
pub const BOUNDARY_WARNING_MASS: f64 = 1e-6;

/// Lines per batch when a site register is contiguous (site 0).
const CONTIGUOUS_LINES: usize = 64;
/// Columns gathered per batch for strided site registers.
const TILE_COLUMNS: usize = 64;
const PHASE_CACHE_ENTRIES: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrotterOrder {
    First,
    Second,
    Suzuki4,
}

impl TrotterOrder {
    /// Formal order of accuracy: 1, 2 or 4.
    pub fn accuracy(self) -> u32 {
        match self {
            TrotterOrder::First => 1,
            TrotterOrder::Second => 2,
            TrotterOrder::Suzuki4 => 4,
        }
    }
}

impl FromStr for TrotterOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "first" | "1" => Ok(TrotterOrder::First),
            "second" | "2" => Ok(TrotterOrder::Second),
            "suzuki4" | "4" => Ok(TrotterOrder::Suzuki4),
            other => Err(Error::param(
                "trotter.order",
                format!("unknown order {other:?} (expected first, second or suzuki4)"),
            )),
        }
    }
}

impl fmt::Display for TrotterOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TrotterOrder::First => "first",
            TrotterOrder::Second => "second",
            TrotterOrder::Suzuki4 => "suzuki4",
        })
    }
}

/// Suzuki triple-jump weight `s = 1/(4 - 4^(1/3))`.
pub fn suzuki4_weight() -> f64 {
    1.0 / (4.0 - 4f64.cbrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrotterPlan {
    pub order: TrotterOrder,
    pub dt: f64,
    pub n_steps: usize,
}

impl TrotterPlan {
    pub fn new(order: TrotterOrder, dt: f64, n_steps: usize) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::param(
                "trotter.dt",
                format!("{dt} must be finite and > 0"),
            ));
        }
        if n_steps == 0 {
            return Err(Error::param("trotter.steps", "must be >= 1"));
        }
        Ok(Self { order, dt, n_steps })
    }

    pub fn total_time(&self) -> f64 {
        self.dt * self.n_steps as f64
    }
}

/// Number of whole steps of length `dt` spanning `t`, if `t` lies on the grid.
pub fn steps_for_time(t: f64, dt: f64) -> Result<usize> {
    let ratio = t / dt;
    let n = ratio.round();
    if !(t.is_finite() && t >= 0.0) || (ratio - n).abs() > 1e-9 * n.max(1.0) {
        return Err(Error::NotOnTimeGrid { t, dt });
    }
    Ok(n as usize)
}

/// Transform pair used by the kinetic factor.
///
/// `BrokenInverse` replaces the inverse DFT by a second forward DFT. It is
/// not a valid propagator; it exists as a negative control for validation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DftPair {
    #[default]
    Standard,
    BrokenInverse,
}

/// Numerically exact Trotter factors for one chain on one grid.
pub struct Propagator {
    params: ModelParams,
    grid: GridSpec,
    exec: Execution,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// `p(s)²/(2m)` in natural frequency order.
    kinetic_energies: Vec<f64>,
    /// `V(q(X))` for every global index.
    potential: Vec<f64>,
    phase_cache: Mutex<Vec<(u64, Arc<Vec<Complex64>>)>>,
}

impl fmt::Debug for Propagator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Propagator")
            .field("params", &self.params)
            .field("grid", &self.grid)
            .field("exec", &self.exec)
            .finish_non_exhaustive()
    }
}

impl Propagator {
    pub fn new(params: &ModelParams, grid: &GridSpec) -> Result<Self> {
        Self::with_options(params, grid, Execution::default(), DftPair::Standard)
    }

    pub fn with_options(
        params: &ModelParams,
        grid: &GridSpec,
        exec: Execution,
        dft: DftPair,
    ) -> Result<Self> {
        params.validate()?;
        let levels = grid.levels();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(levels);
        let inverse = match dft {
            DftPair::Standard => planner.plan_fft_inverse(levels),
            DftPair::BrokenInverse => Arc::clone(&forward),
        };
        let kinetic_energies = grid
            .momenta(params.hbar)
            .iter()
            .map(|p| p * p / (2.0 * params.mass))
            .collect();

        let n = params.n_sites;
        let bits = grid.bits();
        let qubits = n * bits as usize;
        if qubits >= usize::BITS as usize {
            return Err(Error::Capacity {
                requested: qubits,
                limit: usize::BITS as usize - 1,
            });
        }
        let positions = grid.positions();
        let p = *params;
        let potential = exec::collect_indexed(exec, 1usize << qubits, |x| {
            let mut e = 0.0;
            for j in 0..n {
                let a = positions[site_register(x, j, bits)];
                let b = positions[site_register(x, (j + 1) % n, bits)];
                e += model::bond_energy(&p, b - a);
            }
            e
        });

        Ok(Self {
            params: *params,
            grid: *grid,
            exec,
            forward,
            inverse,
            kinetic_energies,
            potential,
            phase_cache: Mutex::new(Vec::new()),
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn execution(&self) -> Execution {
        self.exec
    }

    /// Diagonal of `V` in the position basis.
    pub fn potential_diagonal(&self) -> &[f64] {
        &self.potential
    }

    fn check(&self, state: &LatticeState) -> Result<()> {
        state.check_shape(self.params.n_sites, self.grid.bits())
    }

    /// `exp(-i·τ·H_kin/ħ)`: every momentum component picks up
    /// `exp(-i·p²·τ/(2mħ))`. The symmetric half-step is `τ = Δt/2`.
    pub fn kinetic_step(&self, state: &mut LatticeState, tau: f64) -> Result<()> {
        self.check(state)?;
        if tau == 0.0 {
            return Ok(());
        }
        let levels = self.grid.levels();
        let scale = 1.0 / levels as f64;
        let hbar = self.params.hbar;
        let phases: Vec<Complex64> = self
            .kinetic_energies
            .iter()
            .map(|e| Complex64::from_polar(scale, -e * tau / hbar))
            .collect();
        let forward = &self.forward;
        let inverse = &self.inverse;
        let kernel = |buf: &mut [Complex64]| {
            forward.process(buf);
            for line in buf.chunks_exact_mut(levels) {
                for (a, ph) in line.iter_mut().zip(&phases) {
                    *a *= ph;
                }
            }
            inverse.process(buf);
        };
        for site in 0..self.params.n_sites {
            transform_site_lines(
                self.exec,
                state.amplitudes_mut(),
                self.grid.bits(),
                site,
                &kernel,
            );
        }
        Ok(())
    }

    fn potential_phases(&self, tau: f64) -> Arc<Vec<Complex64>> {
        let key = tau.to_bits();
        {
            let cache = self.phase_cache.lock().expect("phase cache poisoned");
            if let Some((_, v)) = cache.iter().find(|(k, _)| *k == key) {
                return Arc::clone(v);
            }
        }
        let rate = -tau / self.params.hbar;
        let v = Arc::new(exec::collect_indexed(
            self.exec,
            self.potential.len(),
            |x| Complex64::cis(rate * self.potential[x]),
        ));
        let mut cache = self.phase_cache.lock().expect("phase cache poisoned");
        if cache.len() >= PHASE_CACHE_ENTRIES {
            cache.remove(0);
        }
        cache.push((key, Arc::clone(&v)));
        v
    }

    /// `exp(-i·τ·V(q)/ħ)` as a diagonal phase.
    pub fn potential_step(&self, state: &mut LatticeState, tau: f64) -> Result<()> {
        self.check(state)?;
        if tau == 0.0 {
            return Ok(());
        }
        let phases = self.potential_phases(tau);
        exec::for_each_chunk(self.exec, state.amplitudes_mut(), CHUNK, |offset, c| {
            let n = c.len();
            for (a, ph) in c.iter_mut().zip(&phases[offset..offset + n]) {
                *a *= ph;
            }
        });
        Ok(())
    }

    fn second_order(&self, state: &mut LatticeState, dt: f64) -> Result<()> {
        self.kinetic_step(state, 0.5 * dt)?;
        self.potential_step(state, dt)?;
        self.kinetic_step(state, 0.5 * dt)
    }

    /// One product-formula step of length `dt`.
    pub fn trotter_step(
        &self,
        state: &mut LatticeState,
        dt: f64,
        order: TrotterOrder,
    ) -> Result<()> {
        match order {
            TrotterOrder::First => {
                self.kinetic_step(state, dt)?;
                self.potential_step(state, dt)
            }
            TrotterOrder::Second => self.second_order(state, dt),
            TrotterOrder::Suzuki4 => {
                let s = suzuki4_weight();
                for w in [s, s, 1.0 - 4.0 * s, s, s] {
                    self.second_order(state, w * dt)?;
                }
                Ok(())
            }
        }
    }

    /// Applies `plan.n_steps` steps.
    pub fn evolve(&self, state: &mut LatticeState, plan: &TrotterPlan) -> Result<()> {
        self.evolve_steps(state, plan.dt, plan.order, plan.n_steps)?;
        let edge = state.boundary_mass(&self.grid);
        if edge > BOUNDARY_WARNING_MASS {
            log::warn!(
                "boundary probability {edge:.3e} exceeds {BOUNDARY_WARNING_MASS:e}; \
                 the periodic grid may be wrapping (increase grid.q_max)"
            );
        }
        Ok(())
    }

    /// Like [`evolve`](Self::evolve) without plan validation or the boundary
    /// check; `dt` may be negative for backward evolution.
    ///
    /// Kinetic factors that meet at step boundaries are fused into one
    /// (`K(a)·K(b) = K(a+b)` exactly), so `n` second-order steps cost `n + 1`
    /// kinetic applications instead of `2n`.
    pub fn evolve_steps(
        &self,
        state: &mut LatticeState,
        dt: f64,
        order: TrotterOrder,
        n_steps: usize,
    ) -> Result<()> {
        self.check(state)?;
        let mut pending = 0.0;
        for _ in 0..n_steps {
            for (kinetic, tau) in step_schedule(order, dt) {
                if kinetic {
                    pending += tau;
                } else {
                    self.kinetic_step(state, pending)?;
                    pending = 0.0;
                    self.potential_step(state, tau)?;
                }
            }
        }
        self.kinetic_step(state, pending)
    }

    /// `⟨H_kin⟩`, summing `|ψ̃|²·p²/(2m)` site by site in momentum space.
    pub fn kinetic_expectation(&self, state: &LatticeState) -> Result<f64> {
        self.check(state)?;
        let levels = self.grid.levels();
        let bits = self.grid.bits();
        let mut total = 0.0;
        for site in 0..self.params.n_sites {
            let mut work = state.clone();
            let forward = &self.forward;
            transform_site_lines(
                self.exec,
                work.amplitudes_mut(),
                bits,
                site,
                &|buf: &mut [Complex64]| forward.process(buf),
            );
            let energies = &self.kinetic_energies;
            let site_sum: f64 =
                exec::sum_chunks(self.exec, work.amplitudes(), CHUNK, |offset, c| {
                    c.iter()
                        .enumerate()
                        .map(|(i, a)| {
                            a.norm_sqr() * energies[site_register(offset + i, site, bits)]
                        })
                        .sum::<f64>()
                });
            total += site_sum / levels as f64;
        }
        Ok(total)
    }

    pub fn potential_expectation(&self, state: &LatticeState) -> Result<f64> {
        self.check(state)?;
        Ok(state.expectation_diagonal(|x| self.potential[x]))
    }
}

/// Factor sequence `(is_kinetic, τ)` of one step, in application order.
fn step_schedule(order: TrotterOrder, dt: f64) -> Vec<(bool, f64)> {
    let second = |h: f64| [(true, 0.5 * h), (false, h), (true, 0.5 * h)];
    match order {
        TrotterOrder::First => vec![(true, dt), (false, dt)],
        TrotterOrder::Second => second(dt).to_vec(),
        TrotterOrder::Suzuki4 => {
            let s = suzuki4_weight();
            [s, s, 1.0 - 4.0 * s, s, s]
                .iter()
                .flat_map(|w| second(w * dt))
                .collect()
        }
    }
}

/// Runs `kernel` over batches of site-`site` lines.
///
/// Each batch handed to `kernel` is line-major: consecutive runs of `2^b`
/// amplitudes, each run one site register with all other sites fixed, in
/// natural register order. Results are written back in place.
fn transform_site_lines<K>(
    exec: Execution,
    data: &mut [Complex64],
    bits: u32,
    site: usize,
    kernel: &K,
) where
    K: Fn(&mut [Complex64]) + Sync,
{
    let levels = 1usize << bits;
    let stride = 1usize << (site * bits as usize);
    if stride == 1 {
        let batch = (levels * CONTIGUOUS_LINES).min(data.len());
        exec::for_each_chunk(exec, data, batch, |_, chunk| kernel(chunk));
        return;
    }

    // Strided register: view each block of `levels·stride` amplitudes as
    // `levels` rows of length `stride`; a line is one column. Columns are
    // grouped into tiles of disjoint row slices so tiles can run concurrently.
    let width = stride.min(TILE_COLUMNS);
    let tiles_per_block = stride / width;
    let mut tiles: Vec<Vec<&mut [Complex64]>> = Vec::with_capacity(data.len() / (levels * width));
    for block in data.chunks_mut(levels * stride) {
        let base = tiles.len();
        tiles.extend((0..tiles_per_block).map(|_| Vec::with_capacity(levels)));
        for row in block.chunks_mut(stride) {
            for (t, piece) in row.chunks_mut(width).enumerate() {
                tiles[base + t].push(piece);
            }
        }
    }
    exec::for_each_mut(exec, &mut tiles, |tile| {
        let mut buf = vec![Complex64::new(0.0, 0.0); levels * width];
        for (x, row) in tile.iter().enumerate() {
            for (c, a) in row.iter().enumerate() {
                buf[c * levels + x] = *a;
            }
        }
        kernel(&mut buf);
        for (x, row) in tile.iter_mut().enumerate() {
            for (c, a) in row.iter_mut().enumerate() {
                *a = buf[c * levels + x];
            }
        }
    });
}

/// Exact evolution `exp(-iHt/ħ)` through a dense eigendecomposition of the
/// grid Hamiltonian. Limited to `N·b <= 14`.
pub struct DenseOracle {
    n_sites: usize,
    bits: u32,
    hbar: f64,
    hamiltonian: DMatrix<f64>,
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<f64>,
}

impl DenseOracle {
    pub fn new(params: &ModelParams, grid: &GridSpec) -> Result<Self> {
        let hamiltonian = model::build_dense_hamiltonian(params, grid)?;
        let eig = SymmetricEigen::new(hamiltonian.clone());
        Ok(Self {
            n_sites: params.n_sites,
            bits: grid.bits(),
            hbar: params.hbar,
            hamiltonian,
            eigenvalues: eig.eigenvalues,
            eigenvectors: eig.eigenvectors,
        })
    }

    pub fn hamiltonian(&self) -> &DMatrix<f64> {
        &self.hamiltonian
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    fn split(state: &LatticeState) -> (DVector<f64>, DVector<f64>) {
        let re = DVector::from_iterator(state.dim(), state.amplitudes().iter().map(|a| a.re));
        let im = DVector::from_iterator(state.dim(), state.amplitudes().iter().map(|a| a.im));
        (re, im)
    }

    /// Eigenbasis coefficients `V^T ψ`.
    fn coefficients(&self, state: &LatticeState) -> Vec<Complex64> {
        let (re, im) = Self::split(state);
        let cr = self.eigenvectors.tr_mul(&re);
        let ci = self.eigenvectors.tr_mul(&im);
        cr.iter()
            .zip(ci.iter())
            .map(|(r, i)| Complex64::new(*r, *i))
            .collect()
    }

    pub fn exact_evolve(&self, state: &mut LatticeState, t: f64) -> Result<()> {
        state.check_shape(self.n_sites, self.bits)?;
        let coeffs = self.coefficients(state);
        let rotated: Vec<Complex64> = coeffs
            .iter()
            .zip(self.eigenvalues.iter())
            .map(|(c, e)| c * Complex64::cis(-e * t / self.hbar))
            .collect();
        let re = DVector::from_iterator(rotated.len(), rotated.iter().map(|c| c.re));
        let im = DVector::from_iterator(rotated.len(), rotated.iter().map(|c| c.im));
        let out_re = &self.eigenvectors * re;
        let out_im = &self.eigenvectors * im;
        for (a, (r, i)) in state
            .amplitudes_mut()
            .iter_mut()
            .zip(out_re.iter().zip(out_im.iter()))
        {
            *a = Complex64::new(*r, *i);
        }
        Ok(())
    }

    /// `⟨ψ|H|ψ⟩` from the dense matrix.
    pub fn energy(&self, state: &LatticeState) -> Result<f64> {
        state.check_shape(self.n_sites, self.bits)?;
        let (re, im) = Self::split(state);
        Ok(re.dot(&(&self.hamiltonian * &re)) + im.dot(&(&self.hamiltonian * &im)))
    }
}

/// One-shot exact evolution; builds and discards a [`DenseOracle`].
pub fn exact_evolve(
    state: &mut LatticeState,
    params: &ModelParams,
    grid: &GridSpec,
    t: f64,
) -> Result<()> {
    DenseOracle::new(params, grid)?.exact_evolve(state, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::EncodingKind;

    fn setup(n: usize, bits: u32, beta: f64) -> (ModelParams, GridSpec, LatticeState) {
        let p = ModelParams::units(n, beta).unwrap();
        let g = GridSpec::with_default_q_max(&p, bits, EncodingKind::UnsignedOffset).unwrap();
        let s = LatticeState::init_product_gaussian(&p, &g, p.default_width().unwrap()).unwrap();
        (p, g, s)
    }

    fn distance(a: &LatticeState, b: &LatticeState) -> f64 {
        a.amplitudes()
            .iter()
            .zip(b.amplitudes())
            .map(|(x, y)| (x - y).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Naive per-site DFT by explicit summation, independent of rustfft.
    fn naive_kinetic(p: &ModelParams, g: &GridSpec, s: &LatticeState, tau: f64) -> LatticeState {
        let levels = g.levels();
        let bits = g.bits();
        let kin = g.momenta(p.hbar);
        let mut cur = s.amplitudes().to_vec();
        for j in 0..p.n_sites {
            let mut next = vec![Complex64::new(0.0, 0.0); cur.len()];
            let shift = j * bits as usize;
            for (x, out) in next.iter_mut().enumerate() {
                let xj = site_register(x, j, bits);
                let base = x & !((levels - 1) << shift);
                for y in 0..levels {
                    // U[xj, y] = (1/L) Σ_s e^{2πi s xj/L} e^{-i p_s² τ/2mħ} e^{-2πi s y/L}
                    let mut u = Complex64::new(0.0, 0.0);
                    for (sidx, ps) in kin.iter().enumerate() {
                        let ang = 2.0 * std::f64::consts::PI * sidx as f64 * (xj as f64 - y as f64)
                            / levels as f64
                            - ps * ps * tau / (2.0 * p.mass * p.hbar);
                        u += Complex64::cis(ang);
                    }
                    *out += u / levels as f64 * cur[base | (y << shift)];
                }
            }
            cur = next;
        }
        LatticeState::from_amplitudes(p.n_sites, bits, cur).unwrap()
    }

    #[test]
    fn kinetic_matches_naive_dft() {
        let (p, g, mut s) = setup(3, 3, 0.0);
        s.apply_diagonal_phase(|x| 0.37 * x as f64);
        let expected = naive_kinetic(&p, &g, &s, 0.29);
        let prop = Propagator::new(&p, &g).unwrap();
        prop.kinetic_step(&mut s, 0.29).unwrap();
        assert!(distance(&s, &expected) < 1e-12);
    }

    #[test]
    fn kinetic_identity_and_additivity() {
        let (p, g, s) = setup(2, 4, 0.5);
        let prop = Propagator::new(&p, &g).unwrap();
        let mut a = s.clone();
        prop.kinetic_step(&mut a, 0.0).unwrap();
        assert!(distance(&a, &s) < 1e-12);

        let mut b = s.clone();
        prop.kinetic_step(&mut b, 0.13).unwrap();
        prop.kinetic_step(&mut b, 0.21).unwrap();
        let mut c = s.clone();
        prop.kinetic_step(&mut c, 0.34).unwrap();
        assert!(distance(&b, &c) < 1e-11);
        assert!((b.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn momentum_eigenstate_only_acquires_phase() {
        let (p, g, _) = setup(2, 3, 0.0);
        let levels = g.levels();
        // plane wave with frequency index 3 on site 0, index 5 on site 1
        let amps: Vec<Complex64> = (0..levels * levels)
            .map(|x| {
                let (a, b) = (x % levels, x / levels);
                let ang = 2.0 * std::f64::consts::PI * (3 * a + 5 * b) as f64 / levels as f64;
                Complex64::from_polar(1.0 / levels as f64, ang)
            })
            .collect();
        let s = LatticeState::from_amplitudes(2, 3, amps).unwrap();
        let prop = Propagator::new(&p, &g).unwrap();
        let mut t = s.clone();
        prop.kinetic_step(&mut t, 0.7).unwrap();
        assert!((s.inner(&t).unwrap().norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn potential_cases() {
        let (p, g, s) = setup(2, 3, 1.0);
        let prop = Propagator::new(&p, &g).unwrap();
        let mut a = s.clone();
        prop.potential_step(&mut a, 0.0).unwrap();
        assert_eq!(a, s);

        let free = ModelParams {
            kappa: 0.0,
            beta: 0.0,
            ..p
        };
        let fp = Propagator::new(&free, &g).unwrap();
        let mut b = s.clone();
        fp.potential_step(&mut b, 0.8).unwrap();
        assert!(distance(&b, &s) < 1e-15);

        let mut e = LatticeState::basis(2, 3, 19).unwrap();
        prop.potential_step(&mut e, 0.8).unwrap();
        assert!((e.amplitudes()[19].norm() - 1.0).abs() < 1e-12);
        let pos = g.positions();
        let v = model::potential_energy(&p, &[pos[19 % 8], pos[19 / 8]]).unwrap();
        assert!((e.amplitudes()[19] - Complex64::cis(-v * 0.8)).norm() < 1e-12);
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let (p, g, _) = setup(2, 3, 0.0);
        let prop = Propagator::new(&p, &g).unwrap();
        let mut wrong = LatticeState::zeros(3, 3).unwrap();
        assert!(prop.kinetic_step(&mut wrong, 0.1).is_err());
        assert!(prop.potential_step(&mut wrong, 0.1).is_err());
    }

    #[test]
    fn commuting_limit_matches_oracle_for_all_orders() {
        let p = ModelParams {
            kappa: 0.0,
            beta: 0.0,
            ..ModelParams::units(2, 0.0).unwrap()
        };
        let g = GridSpec::new(3, 2.0, EncodingKind::UnsignedOffset).unwrap();
        let s0 = LatticeState::product_gaussian(&p, &g, 0.5, Some(&[0.3, -0.4]), 26).unwrap();
        let oracle = DenseOracle::new(&p, &g).unwrap();
        let mut exact = s0.clone();
        oracle.exact_evolve(&mut exact, 0.9).unwrap();
        let prop = Propagator::new(&p, &g).unwrap();
        for order in [
            TrotterOrder::First,
            TrotterOrder::Second,
            TrotterOrder::Suzuki4,
        ] {
            let mut s = s0.clone();
            prop.evolve(&mut s, &TrotterPlan::new(order, 0.3, 3).unwrap())
                .unwrap();
            assert!(distance(&s, &exact) < 1e-10, "{order}");
        }
    }

    #[test]
    fn evolve_composes() {
        let (p, g, s) = setup(2, 3, 1.0);
        let prop = Propagator::new(&p, &g).unwrap();
        let mut one = s.clone();
        prop.trotter_step(&mut one, 0.05, TrotterOrder::Second)
            .unwrap();
        let mut planned = s.clone();
        prop.evolve(
            &mut planned,
            &TrotterPlan::new(TrotterOrder::Second, 0.05, 1).unwrap(),
        )
        .unwrap();
        assert_eq!(one, planned);

        let mut long = s.clone();
        prop.evolve_steps(&mut long, 0.05, TrotterOrder::Second, 8)
            .unwrap();
        let mut twice = s.clone();
        prop.evolve_steps(&mut twice, 0.05, TrotterOrder::Second, 4)
            .unwrap();
        prop.evolve_steps(&mut twice, 0.05, TrotterOrder::Second, 4)
            .unwrap();
        // fused boundary kinetic factors differ from unfused ones by roundoff only
        assert!(distance(&long, &twice) < 1e-13);

        let mut stepped = s.clone();
        for _ in 0..8 {
            prop.trotter_step(&mut stepped, 0.05, TrotterOrder::Suzuki4)
                .unwrap();
        }
        let mut fused = s.clone();
        prop.evolve_steps(&mut fused, 0.05, TrotterOrder::Suzuki4, 8)
            .unwrap();
        assert!(distance(&stepped, &fused) < 1e-12);
    }

    #[test]
    fn time_reversal() {
        let (p, g, s) = setup(3, 3, 1.0);
        let prop = Propagator::new(&p, &g).unwrap();
        for order in [TrotterOrder::Second, TrotterOrder::Suzuki4] {
            let mut x = s.clone();
            prop.evolve_steps(&mut x, 0.04, order, 25).unwrap();
            prop.evolve_steps(&mut x, -0.04, order, 25).unwrap();
            let fid = s.inner(&x).unwrap().norm();
            assert!(1.0 - fid < 1e-10);
        }
    }

    #[test]
    fn oracle_properties() {
        let (p, g, s) = setup(2, 3, 1.0);
        let oracle = DenseOracle::new(&p, &g).unwrap();
        let mut a = s.clone();
        oracle.exact_evolve(&mut a, 0.0).unwrap();
        assert!(distance(&a, &s) < 1e-12);

        let e0 = oracle.energy(&s).unwrap();
        let mut b = s.clone();
        oracle.exact_evolve(&mut b, 0.4).unwrap();
        oracle.exact_evolve(&mut b, 0.9).unwrap();
        assert!((oracle.energy(&b).unwrap() - e0).abs() <= 1e-9 * e0.abs());
        assert!((b.norm() - 1.0).abs() < 1e-10);
        let mut c = s.clone();
        oracle.exact_evolve(&mut c, 1.3).unwrap();
        assert!(distance(&b, &c) < 1e-9);
    }

    #[test]
    fn energy_split_matches_dense_hamiltonian() {
        let (p, g, mut s) = setup(2, 3, 0.8);
        s.apply_diagonal_phase(|x| 0.2 * x as f64);
        let prop = Propagator::new(&p, &g).unwrap();
        let oracle = DenseOracle::new(&p, &g).unwrap();
        let total = prop.kinetic_expectation(&s).unwrap() + prop.potential_expectation(&s).unwrap();
        assert!((total - oracle.energy(&s).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn sequential_and_parallel_agree_bitwise() {
        let (p, g, s) = setup(3, 4, 1.0);
        let seq =
            Propagator::with_options(&p, &g, Execution::Sequential, DftPair::Standard).unwrap();
        let par = Propagator::with_options(&p, &g, Execution::Parallel, DftPair::Standard).unwrap();
        let mut a = s.clone();
        let mut b = s.clone();
        seq.evolve_steps(&mut a, 0.05, TrotterOrder::Suzuki4, 3)
            .unwrap();
        par.evolve_steps(&mut b, 0.05, TrotterOrder::Suzuki4, 3)
            .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn time_grid() {
        assert_eq!(steps_for_time(0.3, 0.1).unwrap(), 3);
        assert_eq!(steps_for_time(0.0, 0.1).unwrap(), 0);
        assert!(steps_for_time(0.25, 0.1).is_err());
        assert!(steps_for_time(-0.2, 0.1).is_err());
        assert!(TrotterPlan::new(TrotterOrder::First, 0.0, 3).is_err());
        assert!(TrotterPlan::new(TrotterOrder::First, 0.1, 0).is_err());
        assert!("third".parse::<TrotterOrder>().is_err());
    }
}
