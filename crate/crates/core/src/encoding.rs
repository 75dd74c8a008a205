//! Register-value to physical-grid maps for a single lattice site.
//!
//! A site displacement is stored on `b` qubits. Register value `x` maps to a
//! displacement on a uniform grid of `2^b` points with spacing
//! `Δq = 2·q_max / 2^b`, covering `[-q_max, q_max - Δq]`. Two bit layouts are
//! supported:
//!
//! - [`EncodingKind::UnsignedOffset`]: `q = -q_max + x·Δq`;
//! - [`EncodingKind::TwosComplement`]: the top bit carries weight `-2^(b-1)`,
//!   `q = signed(x)·Δq`.
//!
//! Momenta use the centered DFT frequency convention, so `p(s)` is signed and
//! `p(s)^2` is even under `s -> 2^b - s`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::model::ModelParams;
use crate::{Error, Result};

pub const MIN_BITS: u32 = 2;
pub const MAX_BITS: u32 = 12;

/// Default multiplier for [`GridSpec::default_q_max`].
pub const DEFAULT_Q_MAX_WIDTHS: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum EncodingKind {
    #[default]
    #[serde(rename = "offset")]
    UnsignedOffset,
    #[serde(rename = "twos")]
    TwosComplement,
}

impl std::str::FromStr for EncodingKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "offset" => Ok(EncodingKind::UnsignedOffset),
            "twos" => Ok(EncodingKind::TwosComplement),
            other => Err(Error::param(
                "grid.encoding",
                format!("unknown encoding {other:?} (expected \"offset\" or \"twos\")"),
            )),
        }
    }
}

/// Per-site displacement grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    bits: u32,
    q_max: f64,
    kind: EncodingKind,
}

impl GridSpec {
    pub fn new(bits: u32, q_max: f64, kind: EncodingKind) -> Result<Self> {
        if !(MIN_BITS..=MAX_BITS).contains(&bits) {
            return Err(Error::param(
                "grid.bits",
                format!("{bits} outside [{MIN_BITS}, {MAX_BITS}]"),
            ));
        }
        if !(q_max.is_finite() && q_max > 0.0) {
            return Err(Error::param(
                "grid.q_max",
                format!("{q_max} must be finite and > 0"),
            ));
        }
        Ok(Self { bits, q_max, kind })
    }

    /// Grid sized to a few harmonic ground-state widths of the stiffest mode:
    /// `q_max = c·sqrt(ħ / (2·m·ω_max))·sqrt(b)` with `c = 4`.
    pub fn default_q_max(params: &ModelParams, bits: u32) -> Result<f64> {
        let omega_max = (0..params.n_sites)
            .map(|k| crate::model::dispersion(params, k))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0_f64, f64::max);
        if omega_max <= 0.0 {
            return Err(Error::param(
                "grid.q_max",
                "no default for a chain without harmonic coupling (kappa = 0); set it explicitly",
            ));
        }
        Ok(DEFAULT_Q_MAX_WIDTHS
            * (params.hbar / (2.0 * params.mass * omega_max)).sqrt()
            * f64::from(bits).sqrt())
    }

    pub fn with_default_q_max(params: &ModelParams, bits: u32, kind: EncodingKind) -> Result<Self> {
        Self::new(bits, Self::default_q_max(params, bits)?, kind)
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn q_max(&self) -> f64 {
        self.q_max
    }

    pub fn kind(&self) -> EncodingKind {
        self.kind
    }

    /// Number of grid points per site, `2^b`.
    pub fn levels(&self) -> usize {
        1 << self.bits
    }

    /// Grid spacing `Δq = 2·q_max / 2^b`.
    pub fn spacing(&self) -> f64 {
        2.0 * self.q_max / self.levels() as f64
    }

    /// Midpoint of the representable range, `-Δq/2` for both encodings.
    pub fn center(&self) -> f64 {
        -0.5 * self.spacing()
    }

    /// Signed integer represented by register value `x` (no range check).
    fn signed_index(&self, x: usize) -> i64 {
        let x = x as i64;
        match self.kind {
            EncodingKind::UnsignedOffset => x - (1_i64 << (self.bits - 1)),
            EncodingKind::TwosComplement => {
                if x >= 1_i64 << (self.bits - 1) {
                    x - (1_i64 << self.bits)
                } else {
                    x
                }
            }
        }
    }

    pub fn position_value(&self, x: usize) -> Result<f64> {
        self.check_register(x, "register value")?;
        Ok(self.position_unchecked(x))
    }

    #[inline]
    pub(crate) fn position_unchecked(&self, x: usize) -> f64 {
        // offset grid: -q_max + x·Δq == (x - 2^(b-1))·Δq
        self.signed_index(x) as f64 * self.spacing()
    }

    /// All `2^b` displacement values, indexed by register value.
    pub fn positions(&self) -> Vec<f64> {
        (0..self.levels())
            .map(|x| self.position_unchecked(x))
            .collect()
    }

    /// Centered DFT frequency: `s` for `s < 2^(b-1)`, else `s - 2^b`.
    pub fn wrapped_frequency(&self, s: usize) -> Result<i64> {
        self.check_register(s, "frequency index")?;
        Ok(self.wrap_unchecked(s))
    }

    #[inline]
    fn wrap_unchecked(&self, s: usize) -> i64 {
        let s = s as i64;
        if s < 1_i64 << (self.bits - 1) {
            s
        } else {
            s - (1_i64 << self.bits)
        }
    }

    /// Momentum `p = 2πħ / (2^b·Δq) · wrap(s)` at DFT frequency index `s`.
    pub fn momentum_value(&self, hbar: f64, s: usize) -> Result<f64> {
        self.check_register(s, "frequency index")?;
        Ok(self.momentum_unchecked(hbar, s))
    }

    #[inline]
    pub(crate) fn momentum_unchecked(&self, hbar: f64, s: usize) -> f64 {
        self.momentum_quantum(hbar) * self.wrap_unchecked(s) as f64
    }

    /// Momentum grid spacing `2πħ / (2^b·Δq)`.
    pub fn momentum_quantum(&self, hbar: f64) -> f64 {
        2.0 * PI * hbar / (self.levels() as f64 * self.spacing())
    }

    pub fn momenta(&self, hbar: f64) -> Vec<f64> {
        (0..self.levels())
            .map(|s| self.momentum_unchecked(hbar, s))
            .collect()
    }

    /// Weight of bit `r` in the binary expansion of the encoded integer.
    pub fn bit_weight(&self, r: u32) -> Result<i64> {
        if r >= self.bits {
            return Err(Error::OutOfRange {
                what: "bit",
                index: r as usize,
                bound: self.bits as usize,
            });
        }
        Ok(match self.kind {
            EncodingKind::TwosComplement if r == self.bits - 1 => -(1_i64 << r),
            _ => 1_i64 << r,
        })
    }

    /// Constant displacement not captured by the bit expansion:
    /// `position_value(x) = Δq·Σ_r bit_weight(r)·bit_r(x) + offset`.
    pub fn position_offset(&self) -> f64 {
        match self.kind {
            EncodingKind::UnsignedOffset => -self.q_max,
            EncodingKind::TwosComplement => 0.0,
        }
    }

    fn check_register(&self, x: usize, what: &'static str) -> Result<()> {
        if x >= self.levels() {
            return Err(Error::OutOfRange {
                what,
                index: x,
                bound: self.levels(),
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(bits: u32, q_max: f64, kind: EncodingKind) -> GridSpec {
        GridSpec::new(bits, q_max, kind).unwrap()
    }

    #[test]
    fn position_examples() {
        let off = grid(2, 1.0, EncodingKind::UnsignedOffset);
        assert_eq!(off.position_value(0).unwrap(), -1.0);
        let twos = grid(2, 1.0, EncodingKind::TwosComplement);
        assert_eq!(twos.position_value(2).unwrap(), -1.0);
        assert_eq!(twos.position_value(1).unwrap(), 0.5);
        assert!(off.position_value(4).is_err());
    }

    #[test]
    fn momentum_examples() {
        let g = grid(2, 1.0, EncodingKind::UnsignedOffset);
        assert_eq!(g.spacing(), 0.5);
        assert_eq!(g.momentum_value(1.0, 0).unwrap(), 0.0);
        let wraps: Vec<i64> = (0..4).map(|s| g.wrapped_frequency(s).unwrap()).collect();
        assert_eq!(wraps, vec![0, 1, -2, -1]);
        assert!((g.momentum_value(1.0, 1).unwrap() - PI).abs() < 1e-15);
        assert!(g.momentum_value(1.0, 4).is_err());
    }

    #[test]
    fn bit_weight_examples() {
        let u = grid(4, 1.0, EncodingKind::UnsignedOffset);
        assert_eq!(u.bit_weight(3).unwrap(), 8);
        let t = grid(4, 1.0, EncodingKind::TwosComplement);
        assert_eq!(t.bit_weight(3).unwrap(), -8);
        assert_eq!(t.bit_weight(0).unwrap(), 1);
        assert!(t.bit_weight(4).is_err());
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(GridSpec::new(1, 1.0, EncodingKind::UnsignedOffset).is_err());
        assert!(GridSpec::new(13, 1.0, EncodingKind::UnsignedOffset).is_err());
        assert!(GridSpec::new(3, 0.0, EncodingKind::UnsignedOffset).is_err());
        assert!(GridSpec::new(3, f64::NAN, EncodingKind::TwosComplement).is_err());
    }

    #[test]
    fn offset_grid_is_mirror_symmetric() {
        let g = grid(5, 2.3, EncodingKind::UnsignedOffset);
        let top = g.levels() - 1;
        for x in 0..g.levels() {
            let sum = g.position_value(x).unwrap() + g.position_value(top - x).unwrap();
            assert!((sum + g.spacing()).abs() < 1e-12);
        }
        let p = g.positions();
        assert!(p.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn momenta_pair_except_nyquist() {
        for bits in 2..=6 {
            let g = grid(bits, 1.7, EncodingKind::UnsignedOffset);
            let n = g.levels();
            for s in 1..n {
                if s == n / 2 {
                    continue;
                }
                assert_eq!(
                    g.momentum_value(1.3, s).unwrap(),
                    -g.momentum_value(1.3, n - s).unwrap()
                );
            }
        }
    }

    #[test]
    fn bit_expansion_reproduces_positions_exhaustively() {
        for kind in [EncodingKind::TwosComplement, EncodingKind::UnsignedOffset] {
            for bits in 2..=6 {
                let g = grid(bits, 0.9, kind);
                for x in 0..g.levels() {
                    let weighted: i64 = (0..bits)
                        .filter(|r| (x >> r) & 1 == 1)
                        .map(|r| g.bit_weight(r).unwrap())
                        .sum();
                    let rebuilt = weighted as f64 * g.spacing() + g.position_offset();
                    assert!((rebuilt - g.position_value(x).unwrap()).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn encodings_cover_the_same_points() {
        let a = grid(4, 1.0, EncodingKind::UnsignedOffset);
        let b = grid(4, 1.0, EncodingKind::TwosComplement);
        let mut pa = a.positions();
        let mut pb = b.positions();
        pa.sort_by(f64::total_cmp);
        pb.sort_by(f64::total_cmp);
        assert_eq!(pa, pb);
        assert_eq!(pa[0], -1.0);
        assert_eq!(*pa.last().unwrap(), 1.0 - a.spacing());
    }

    #[test]
    fn encoding_parses_config_names() {
        assert_eq!(
            "offset".parse::<EncodingKind>().unwrap(),
            EncodingKind::UnsignedOffset
        );
        assert_eq!(
            "twos".parse::<EncodingKind>().unwrap(),
            EncodingKind::TwosComplement
        );
        assert!("signed".parse::<EncodingKind>().is_err());
    }
}
