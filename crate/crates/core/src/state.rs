//! Dense lattice wavefunction over `N` site registers of `b` qubits each.
//!
//! Amplitudes are stored site-major: global index `X = Σ_j x_j·2^(j·b)`, so
//! site `j` occupies bits `[j·b, (j+1)·b)` and every per-site operation has a
//! power-of-two stride.

use std::io::{Read, Write};

use num_complex::Complex64;

use crate::encoding::GridSpec;
use crate::exec::{self, Execution, CHUNK};
use crate::model::ModelParams;
use crate::{Error, Result};

/// Default ceiling on `N·b` for statevector allocation (2^26 amplitudes = 1 GiB).
pub const DEFAULT_MAX_QUBITS: usize = 26;

const CHECKPOINT_MAGIC: &[u8; 8] = b"FPUTSTAT";

/// Register value of site `j` inside global index `x`.
#[inline]
pub fn site_register(x: usize, j: usize, bits: u32) -> usize {
    (x >> (j * bits as usize)) & ((1 << bits) - 1)
}

/// Global index from per-site register values.
pub fn encode_index(registers: &[usize], bits: u32) -> usize {
    registers
        .iter()
        .enumerate()
        .fold(0, |acc, (j, x)| acc | (x << (j * bits as usize)))
}

/// Per-site register values of global index `x`.
pub fn decode_index(x: usize, n_sites: usize, bits: u32) -> Vec<usize> {
    (0..n_sites).map(|j| site_register(x, j, bits)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeState {
    amps: Vec<Complex64>,
    n_sites: usize,
    bits: u32,
}

impl LatticeState {
    /// `|0...0⟩` after checking `N·b` against `max_qubits`.
    pub fn zeros_with_limit(n_sites: usize, bits: u32, max_qubits: usize) -> Result<Self> {
        let qubits = n_sites * bits as usize;
        if qubits > max_qubits || qubits >= usize::BITS as usize {
            return Err(Error::Capacity {
                requested: qubits,
                limit: max_qubits,
            });
        }
        let dim = 1usize << qubits;
        let mut amps = Vec::new();
        amps.try_reserve_exact(dim).map_err(|_| Error::Capacity {
            requested: qubits,
            limit: max_qubits,
        })?;
        amps.resize(dim, Complex64::new(0.0, 0.0));
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(Self {
            amps,
            n_sites,
            bits,
        })
    }

    pub fn zeros(n_sites: usize, bits: u32) -> Result<Self> {
        Self::zeros_with_limit(n_sites, bits, DEFAULT_MAX_QUBITS)
    }

    /// Computational basis state `|X⟩`.
    pub fn basis(n_sites: usize, bits: u32, index: usize) -> Result<Self> {
        let mut s = Self::zeros(n_sites, bits)?;
        if index >= s.dim() {
            return Err(Error::OutOfRange {
                what: "basis index",
                index,
                bound: s.dim(),
            });
        }
        s.amps[0] = Complex64::new(0.0, 0.0);
        s.amps[index] = Complex64::new(1.0, 0.0);
        Ok(s)
    }

    pub fn from_amplitudes(n_sites: usize, bits: u32, amps: Vec<Complex64>) -> Result<Self> {
        let expected = 1usize << (n_sites * bits as usize);
        if amps.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                actual: amps.len(),
            });
        }
        Ok(Self {
            amps,
            n_sites,
            bits,
        })
    }

    /// Normalized product of Gaussians `exp(-(q_j - c_j)²/(4σ²))`.
    ///
    /// `centers` are absolute displacements; `None` centers every site on the
    /// grid midpoint `-Δq/2`, which makes the state exactly symmetric under
    /// the grid reflection `x -> 2^b - 1 - x`.
    pub fn product_gaussian(
        params: &ModelParams,
        grid: &GridSpec,
        width: f64,
        centers: Option<&[f64]>,
        max_qubits: usize,
    ) -> Result<Self> {
        params.validate()?;
        if !(width.is_finite() && width > 0.0) {
            return Err(Error::param(
                "width",
                format!("{width} must be finite and > 0"),
            ));
        }
        let n = params.n_sites;
        let centers: Vec<f64> = match centers {
            Some(c) if c.len() != n => {
                return Err(Error::LengthMismatch {
                    expected: n,
                    actual: c.len(),
                })
            }
            Some(c) => c.to_vec(),
            None => vec![grid.center(); n],
        };
        let positions = grid.positions();
        let profiles: Vec<Vec<f64>> = centers
            .iter()
            .map(|c| {
                let raw: Vec<f64> = positions
                    .iter()
                    .map(|q| (-(q - c) * (q - c) / (4.0 * width * width)).exp())
                    .collect();
                let norm = raw.iter().map(|a| a * a).sum::<f64>().sqrt();
                raw.into_iter().map(|a| a / norm).collect()
            })
            .collect();

        let mut state = Self::zeros_with_limit(n, grid.bits(), max_qubits)?;
        let bits = grid.bits();
        exec::for_each_chunk(
            Execution::default(),
            &mut state.amps,
            CHUNK,
            |offset, chunk| {
                for (i, a) in chunk.iter_mut().enumerate() {
                    let x = offset + i;
                    let amp: f64 = profiles
                        .iter()
                        .enumerate()
                        .map(|(j, prof)| prof[site_register(x, j, bits)])
                        .product();
                    *a = Complex64::new(amp, 0.0);
                }
            },
        );
        state.normalize();
        Ok(state)
    }

    /// Product Gaussian with the default width centred on the grid midpoint.
    pub fn init_product_gaussian(
        params: &ModelParams,
        grid: &GridSpec,
        width: f64,
    ) -> Result<Self> {
        Self::product_gaussian(params, grid, width, None, DEFAULT_MAX_QUBITS)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn check_shape(&self, n_sites: usize, bits: u32) -> Result<()> {
        if self.n_sites != n_sites || self.bits != bits {
            return Err(Error::ShapeMismatch {
                sites: n_sites,
                bits,
                found_sites: self.n_sites,
                found_bits: self.bits,
            });
        }
        Ok(())
    }

    pub fn check_same_shape(&self, other: &Self) -> Result<()> {
        other.check_shape(self.n_sites, self.bits)
    }

    pub fn norm_sqr(&self) -> f64 {
        exec::sum_chunks(Execution::default(), &self.amps, CHUNK, |_, c| {
            c.iter().map(|a| a.norm_sqr()).sum::<f64>()
        })
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Rescales to unit norm; a zero vector is left untouched.
    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            let inv = 1.0 / n;
            exec::for_each_chunk(Execution::default(), &mut self.amps, CHUNK, |_, c| {
                c.iter_mut().for_each(|a| *a *= inv)
            });
        }
    }

    /// `⟨self|other⟩ = Σ conj(self)·other`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        self.check_same_shape(other)?;
        Ok(inner_slices(Execution::default(), &self.amps, &other.amps))
    }

    /// Multiplies amplitude `X` by `exp(i·phase(X))`.
    pub fn apply_diagonal_phase<F>(&mut self, phase: F)
    where
        F: Fn(usize) -> f64 + Sync + Send,
    {
        self.apply_diagonal_phase_with(Execution::default(), phase)
    }

    pub fn apply_diagonal_phase_with<F>(&mut self, exec: Execution, phase: F)
    where
        F: Fn(usize) -> f64 + Sync + Send,
    {
        exec::for_each_chunk(exec, &mut self.amps, CHUNK, |offset, c| {
            for (i, a) in c.iter_mut().enumerate() {
                *a *= Complex64::cis(phase(offset + i));
            }
        });
    }

    /// `Σ_X |ψ(X)|²·f(X)` for a real diagonal observable.
    pub fn expectation_diagonal<F>(&self, f: F) -> f64
    where
        F: Fn(usize) -> f64 + Sync + Send,
    {
        exec::sum_chunks(Execution::default(), &self.amps, CHUNK, |offset, c| {
            c.iter()
                .enumerate()
                .map(|(i, a)| a.norm_sqr() * f(offset + i))
                .sum::<f64>()
        })
    }

    /// `⟨q_j⟩` for every site.
    pub fn mean_displacements(&self, grid: &GridSpec) -> Vec<f64> {
        let positions = grid.positions();
        (0..self.n_sites)
            .map(|j| self.expectation_diagonal(|x| positions[site_register(x, j, self.bits)]))
            .collect()
    }

    /// Probability of finding any site on its outermost grid point.
    pub fn boundary_mass(&self, grid: &GridSpec) -> f64 {
        let positions = grid.positions();
        let lo = positions.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = positions.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let bits = self.bits;
        let n = self.n_sites;
        self.expectation_diagonal(|x| {
            let edge = (0..n).any(|j| {
                let q = positions[site_register(x, j, bits)];
                q == lo || q == hi
            });
            if edge {
                1.0
            } else {
                0.0
            }
        })
    }

    /// Binary checkpoint: `FPUTSTAT`, u32 N, u32 b, then little-endian
    /// `(re, im)` f64 pairs.
    pub fn write_checkpoint<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(CHECKPOINT_MAGIC)?;
        w.write_all(&(self.n_sites as u32).to_le_bytes())?;
        w.write_all(&self.bits.to_le_bytes())?;
        let mut buf = Vec::with_capacity(16 * self.amps.len());
        for a in &self.amps {
            buf.extend_from_slice(&a.re.to_le_bytes());
            buf.extend_from_slice(&a.im.to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_checkpoint<R: Read>(mut r: R, max_qubits: usize) -> Result<Self> {
        let mut header = [0u8; 16];
        r.read_exact(&mut header)?;
        if &header[..8] != CHECKPOINT_MAGIC {
            return Err(Error::Checkpoint("bad magic".into()));
        }
        let n_sites = u32::from_le_bytes(header[8..12].try_into().unwrap()) as usize;
        let bits = u32::from_le_bytes(header[12..16].try_into().unwrap());
        let mut state = Self::zeros_with_limit(n_sites, bits, max_qubits)?;
        let mut body = Vec::new();
        r.read_to_end(&mut body)?;
        if body.len() != 16 * state.dim() {
            return Err(Error::Checkpoint(format!(
                "expected {} payload bytes, found {}",
                16 * state.dim(),
                body.len()
            )));
        }
        for (a, raw) in state.amps.iter_mut().zip(body.chunks_exact(16)) {
            let re = f64::from_le_bytes(raw[..8].try_into().unwrap());
            let im = f64::from_le_bytes(raw[8..].try_into().unwrap());
            *a = Complex64::new(re, im);
        }
        Ok(state)
    }
}

pub(crate) fn inner_slices(exec: Execution, lhs: &[Complex64], rhs: &[Complex64]) -> Complex64 {
    debug_assert_eq!(lhs.len(), rhs.len());
    exec::sum_chunks(exec, lhs, CHUNK, |offset, c| {
        c.iter()
            .zip(&rhs[offset..offset + c.len()])
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
    })
}
