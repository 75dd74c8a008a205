//! Numerical experiments shared by the `validate` command and the test
//! suites, plus the named check list itself.
//!
//! Everything here runs at oracle scale (`N·b <= 14`) unless a caller asks
//! for more.

use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;
use serde::Serialize;

use crate::circuit::{self, ScheduleMode, TrotterCircuitSpec};
use crate::correlator::{self, Estimator, GeneratingFunction, GeneratingKind};
use crate::encoding::{EncodingKind, GridSpec};
use crate::exec::Execution;
use crate::model::{self, ModelParams};
use crate::propagator::{DenseOracle, DftPair, Propagator, TrotterOrder};
use crate::quadratures::{self, QuadratureKind};
use crate::state::{LatticeState, DEFAULT_MAX_QUBITS};
use crate::{Error, Result};

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    linear_slope(&lx, &ly)
}

fn linear_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let num: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    num / den
}

/// Site centres `A·cos(2πjk/N)`: a product state with a nonzero mean in
/// mode `k` only.
pub fn mode_displaced_centers(n_sites: usize, k: usize, amplitude: f64) -> Result<Vec<f64>> {
    // cosine weights are exact at quarter turns
    let scale = amplitude * (n_sites as f64).sqrt();
    Ok(quadratures::weights(n_sites, k)?
        .w_cos
        .iter()
        .map(|w| w * scale)
        .collect())
}

fn distance(a: &LatticeState, b: &LatticeState) -> f64 {
    a.amplitudes()
        .iter()
        .zip(b.amplitudes())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Grid half-width for the Trotter order study on `N=2, b=3, β=1`. The
/// default `q_max` puts quartic energies of several hundred on this coarse
/// grid, which keeps `Δt ∈ [0.025, 0.2]` out of the asymptotic regime.
pub const TROTTER_STUDY_Q_MAX: f64 = 1.5;
pub const TROTTER_STUDY_WIDTH: f64 = 0.8;
pub const TROTTER_STUDY_DTS: [f64; 4] = [0.2, 0.1, 0.05, 0.025];

/// Expected slope and tolerance for each order in the study.
pub fn trotter_slope_target(order: TrotterOrder) -> (f64, f64) {
    match order {
        TrotterOrder::First => (1.0, 0.3),
        TrotterOrder::Second => (2.0, 0.3),
        TrotterOrder::Suzuki4 => (4.0, 0.5),
    }
}

/// Global state error `‖ψ_Trotter(1) - ψ_exact(1)‖` on `N=2, b=3, β=1`
/// for each step in `dts` (each must divide 1).
pub fn trotter_errors(order: TrotterOrder, dts: &[f64], dft: DftPair) -> Result<Vec<f64>> {
    let params = ModelParams::units(2, 1.0)?;
    let grid = GridSpec::new(3, TROTTER_STUDY_Q_MAX, EncodingKind::UnsignedOffset)?;
    let prop = Propagator::with_options(&params, &grid, Execution::Sequential, dft)?;
    let oracle = DenseOracle::new(&params, &grid)?;
    let psi0 = LatticeState::init_product_gaussian(&params, &grid, TROTTER_STUDY_WIDTH)?;
    let mut exact = psi0.clone();
    oracle.exact_evolve(&mut exact, 1.0)?;
    dts.iter()
        .map(|&dt| {
            let steps = crate::propagator::steps_for_time(1.0, dt)?;
            let mut s = psi0.clone();
            prop.evolve_steps(&mut s, dt, order, steps)?;
            Ok(distance(&s, &exact))
        })
        .collect()
}

/// Harmonic chain (`β = 0`) with a mode-displaced product Gaussian.
///
/// An inversion-symmetric state centred on the grid makes `⟨Q_k Q_k⟩` and
/// every odd moment of `Q` vanish for `k ≠ 0, N/2`, hiding both the signal
/// and the leading rectangle-rule bias; displacing mode `k` restores them.
#[derive(Debug, Clone)]
pub struct HarmonicCase {
    pub params: ModelParams,
    pub grid: GridSpec,
    pub state: LatticeState,
    pub mode_k: usize,
}

pub const HARMONIC_AMPLITUDE: f64 = 1.0;

impl HarmonicCase {
    pub fn new(n_sites: usize, bits: u32, mode_k: usize) -> Result<Self> {
        let params = ModelParams::units(n_sites, 0.0)?;
        let grid = GridSpec::with_default_q_max(&params, bits, EncodingKind::UnsignedOffset)?;
        let centers = mode_displaced_centers(n_sites, mode_k, HARMONIC_AMPLITUDE)?;
        let state = LatticeState::product_gaussian(
            &params,
            &grid,
            params.default_width()?,
            Some(&centers),
            DEFAULT_MAX_QUBITS,
        )?;
        Ok(Self {
            params,
            grid,
            state,
            mode_k,
        })
    }

    pub fn propagator(&self, exec: Execution) -> Result<Propagator> {
        Propagator::with_options(&self.params, &self.grid, exec, DftPair::Standard)
    }

    pub fn omega(&self) -> f64 {
        model::dispersion(&self.params, self.mode_k).expect("mode checked at construction")
    }
}

/// `|estimate - direct|` of the reconstructed correlator at lag `t` for each
/// `h`; generating values are exact, so only the finite-difference bias
/// remains.
pub fn estimator_biases(
    case: &HarmonicCase,
    estimator: Estimator,
    hs: &[f64],
    t: f64,
    dt: f64,
) -> Result<Vec<f64>> {
    let prop = case.propagator(Execution::Sequential)?;
    let gf = GeneratingFunction::new(&prop, &case.state, case.mode_k, TrotterOrder::Second, dt)?;
    let direct: Vec<Complex64> = GeneratingKind::ALL
        .iter()
        .map(|&k| gf.direct_correlator(k, t))
        .collect::<Result<_>>()?;
    let exact = correlator::reconstruct_correlator(direct[0], direct[1], direct[2], direct[3]);
    hs.iter()
        .map(|&h| {
            let e = correlator::correlator_series(&gf, &[t], &[estimator], h, None)?;
            Ok((e[0].value - exact).norm())
        })
        .collect()
}

/// `⟨ψ₀|U†(t) Q_k U(t) Q_k|ψ₀⟩` with `U` from the dense oracle and
/// `Q_k = Q^(c) - i·Q^(s)` applied as a diagonal.
pub fn oracle_correlator(case: &HarmonicCase, oracle: &DenseOracle, t: f64) -> Result<Complex64> {
    let w = quadratures::weights(case.params.n_sites, case.mode_k)?;
    let qc = w.operator_values(&case.grid, QuadratureKind::Cos);
    let qs = w.operator_values(&case.grid, QuadratureKind::Sin);
    let qk: Vec<Complex64> = qc
        .iter()
        .zip(&qs)
        .map(|(c, s)| Complex64::new(*c, -*s))
        .collect();
    let mut bra = case.state.clone();
    oracle.exact_evolve(&mut bra, t)?;
    let amps: Vec<Complex64> = case
        .state
        .amplitudes()
        .iter()
        .zip(&qk)
        .map(|(a, q)| a * q)
        .collect();
    let mut ket = LatticeState::from_amplitudes(case.params.n_sites, case.grid.bits(), amps)?;
    oracle.exact_evolve(&mut ket, t)?;
    Ok(bra
        .amplitudes()
        .iter()
        .zip(ket.amplitudes())
        .zip(&qk)
        .map(|((b, k), q)| b.conj() * q * k)
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShotNoisePoint {
    pub shots: u64,
    pub empirical_std: f64,
    pub model: f64,
}

/// Spread of the shot-sampled rectangle estimate of the `cc` correlator at
/// `t = 0` over `seeds` repetitions, for each shot count.
///
/// The spread is the complex standard deviation `sqrt(E|z - z̄|²)`: both the
/// real and imaginary Hadamard tests contribute noise.
pub fn shot_noise_study(
    case: &HarmonicCase,
    h: f64,
    shots: &[u64],
    seeds: u64,
) -> Result<Vec<ShotNoisePoint>> {
    let prop = case.propagator(Execution::Sequential)?;
    let gf = GeneratingFunction::new(&prop, &case.state, case.mode_k, TrotterOrder::Second, 0.01)?;
    let exact: Vec<((f64, f64), Complex64)> = Estimator::Rect
        .stencil(h)
        .into_iter()
        .map(|(a, b)| Ok(((a, b), gf.value(GeneratingKind::Cc, a, b, 0.0)?)))
        .collect::<Result<_>>()?;
    let lookup = |a: f64, b: f64| -> Result<Complex64> {
        exact
            .iter()
            .find(|(k, _)| *k == (a, b))
            .map(|(_, v)| *v)
            .ok_or_else(|| Error::param("stencil", "point not precomputed"))
    };
    shots
        .iter()
        .map(|&m| {
            let samples: Vec<Complex64> = (0..seeds)
                .map(|s| {
                    let f = correlator::sampled(lookup, m, correlator::derive_seed(0x5EED, s));
                    Ok(correlator::rect_estimator(f, 0.0, h, 1.0)?.value)
                })
                .collect::<Result<_>>()?;
            let n = samples.len() as f64;
            let mean = samples.iter().sum::<Complex64>() / n;
            let var = samples.iter().map(|z| (z - mean).norm_sqr()).sum::<f64>() / (n - 1.0);
            Ok(ShotNoisePoint {
                shots: m,
                empirical_std: var.sqrt(),
                model: correlator::stat_error_model(h, m),
            })
        })
        .collect()
}

/// Sign changes of `values`, located by linear interpolation.
pub fn zero_crossings(times: &[f64], values: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 1..values.len().min(times.len()) {
        let (a, b) = (values[i - 1], values[i]);
        if a == 0.0 {
            out.push(times[i - 1]);
        } else if a * b < 0.0 {
            out.push(times[i - 1] + (times[i] - times[i - 1]) * a / (a - b));
        }
    }
    out
}

/// Angular frequency from a least-squares fit of successive zero crossings
/// (spaced by half a period). Needs at least two crossings.
pub fn crossing_frequency(times: &[f64], values: &[f64]) -> Option<f64> {
    let c = zero_crossings(times, values);
    if c.len() < 2 {
        return None;
    }
    let idx: Vec<f64> = (0..c.len()).map(|i| i as f64).collect();
    Some(PI / linear_slope(&idx, &c))
}

/// Reconstructed correlator time series on `t = 0, s·dt, 2s·dt, ...` up to
/// `t_end`, with exact generating values.
pub fn correlator_time_series(
    case: &HarmonicCase,
    exec: Execution,
    estimator: Estimator,
    h: f64,
    dt: f64,
    stride: usize,
    t_end: f64,
) -> Result<Vec<(f64, Complex64, f64)>> {
    let prop = case.propagator(exec)?;
    let gf = GeneratingFunction::new(&prop, &case.state, case.mode_k, TrotterOrder::Second, dt)?;
    let n = (t_end / (dt * stride as f64)).floor() as usize;
    let times: Vec<f64> = (0..=n).map(|i| (i * stride) as f64 * dt).collect();
    Ok(
        correlator::correlator_series(&gf, &times, &[estimator], h, None)?
            .into_iter()
            .map(|e| (e.time_lag, e.value, e.bias_bound))
            .collect(),
    )
}

/// Per-step gate totals for a sweep of `bits` at fixed `N`, and of `N` at
/// fixed `b`.
pub fn gate_scaling_exponents(
    n_fixed: usize,
    bits: &[u32],
    b_fixed: u32,
    sites: &[usize],
) -> Result<(f64, f64)> {
    let total = |n: usize, b: u32| -> Result<f64> {
        let ir = circuit::build_trotter_circuit(&TrotterCircuitSpec {
            n_sites: n,
            bits: b,
            ancilla: 2 * b as usize,
            order: TrotterOrder::Second,
            n_steps: 1,
            mode: ScheduleMode::Parallel,
            merge_kinetic: false,
        })?;
        Ok(ir.gate_counts().total() as f64)
    };
    let gb: Vec<f64> = bits
        .iter()
        .map(|&b| total(n_fixed, b))
        .collect::<Result<_>>()?;
    let gn: Vec<f64> = sites
        .iter()
        .map(|&n| total(n, b_fixed))
        .collect::<Result<_>>()?;
    let bx: Vec<f64> = bits.iter().map(|&b| f64::from(b)).collect();
    let nx: Vec<f64> = sites.iter().map(|&n| n as f64).collect();
    Ok((log_log_slope(&bx, &gb), log_log_slope(&nx, &gn)))
}

/// Checks `total_depth(n) == n·total_depth(1)` for `n = 1..=max_steps`.
pub fn depth_linearity(n_sites: usize, bits: u32, max_steps: usize) -> Result<bool> {
    let spec = |n| TrotterCircuitSpec {
        n_sites,
        bits,
        ancilla: 2 * bits as usize,
        order: TrotterOrder::Second,
        n_steps: n,
        mode: ScheduleMode::Parallel,
        merge_kinetic: false,
    };
    let one = circuit::build_trotter_circuit(&spec(1))?.depth();
    for n in 1..=max_steps {
        if circuit::build_trotter_circuit(&spec(n))?.depth() != n * one {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    /// Wall time; kept out of the serialized report so reruns diff cleanly.
    #[serde(skip)]
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub passed: bool,
    pub checks: Vec<CheckOutcome>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ValidationOptions {
    /// DFT pair used by the propagator in the Trotter checks; the broken
    /// pair is a negative control.
    pub dft: DftPair,
}

type CheckFn = fn(&ValidationOptions) -> Result<(bool, String)>;

/// Names of the checks [`run_validation`] performs, in order.
pub fn check_names() -> Vec<&'static str> {
    CHECKS.iter().map(|(n, _)| *n).collect()
}

const CHECKS: &[(&str, CheckFn)] = &[
    ("table1_regression", check_table1),
    ("qubits_total_formula", check_qtot),
    ("quadrature_commutation", check_commutation),
    ("rz_synthesis", check_rz),
    ("trotter_vs_oracle", check_trotter_oracle),
    ("trotter_order_slopes", check_trotter_slopes),
    ("unitarity", check_unitarity),
    ("generating_normalization", check_f00),
    ("estimator_bias_orders", check_bias_orders),
    ("correlator_vs_oracle", check_correlator_oracle),
    ("harmonic_frequency", check_frequency),
    ("shot_noise_scaling", check_shot_noise),
    ("depth_linearity", check_depth),
    ("gate_count_scaling", check_gate_scaling),
    ("uncompute_symmetry", check_mirrors),
];

/// Runs every check; failures and errors are recorded, never short-circuit.
pub fn run_validation(opts: &ValidationOptions) -> ValidationReport {
    let checks: Vec<CheckOutcome> = CHECKS
        .iter()
        .map(|(name, f)| {
            let start = Instant::now();
            let (passed, detail) = match f(opts) {
                Ok(r) => r,
                Err(e) => (false, format!("error: {e}")),
            };
            log::info!("check {name}: {}", if passed { "pass" } else { "FAIL" });
            CheckOutcome {
                name,
                passed,
                detail,
                seconds: start.elapsed().as_secs_f64(),
            }
        })
        .collect();
    ValidationReport {
        passed: checks.iter().all(|c| c.passed),
        checks,
    }
}

fn check_table1(_: &ValidationOptions) -> Result<(bool, String)> {
    let rows = circuit::table1()?;
    let got: Vec<(usize, usize)> = rows
        .iter()
        .map(|r| (r.qubits_serial, r.qubits_parallel))
        .collect();
    let ok = got == [(60, 144), (108, 288), (204, 576)];
    Ok((ok, format!("{got:?}")))
}

fn check_qtot(_: &ValidationOptions) -> Result<(bool, String)> {
    let mut bad = Vec::new();
    for n in 2..=40usize {
        for b in 2..=12u32 {
            let expect = (3 * n * b as usize).div_ceil(2);
            if circuit::qubits_total_formula(n, b) != expect {
                bad.push((n, b));
            }
        }
    }
    Ok((bad.is_empty(), format!("mismatches {bad:?}")))
}

fn check_commutation(_: &ValidationOptions) -> Result<(bool, String)> {
    let mut worst_comm = 0.0_f64;
    let mut worst_fact = 0.0_f64;
    for n in 2..=4usize {
        let params = ModelParams::units(n, 0.0)?;
        for b in 2..=3u32 {
            let grid = GridSpec::with_default_q_max(&params, b, EncodingKind::UnsignedOffset)?;
            let state =
                LatticeState::init_product_gaussian(&params, &grid, params.default_width()?)?;
            for k in 0..n {
                worst_comm = worst_comm.max(quadratures::commutator_norm(n, k, &grid)?);
                worst_fact = worst_fact.max(quadratures::factorization_deviation(
                    &state, &grid, k, 0.7, -1.3,
                )?);
            }
        }
    }
    Ok((
        worst_comm == 0.0 && worst_fact <= 1e-12,
        format!("max commutator {worst_comm:e}, max factorization deviation {worst_fact:e}"),
    ))
}

fn check_rz(_: &ValidationOptions) -> Result<(bool, String)> {
    let mut worst = 0.0_f64;
    for kind in [EncodingKind::UnsignedOffset, EncodingKind::TwosComplement] {
        let grid = GridSpec::new(3, 2.0, kind)?;
        let w = quadratures::weights(2, 1)?;
        for which in [QuadratureKind::Cos, QuadratureKind::Sin] {
            let theta = 0.37;
            let angles = quadratures::rz_angles(&grid, &w, which, theta);
            let global = quadratures::rz_global_phase(&grid, &w, which, theta);
            let q = w.operator_values(&grid, which);
            for (x, qx) in q.iter().enumerate() {
                let phase: f64 = angles
                    .iter()
                    .filter(|a| (x >> (a.site * 3 + a.bit as usize)) & 1 == 1)
                    .map(|a| a.angle)
                    .sum::<f64>()
                    + global;
                worst = worst.max((phase - theta * qx).abs());
            }
        }
    }
    Ok((worst <= 1e-10, format!("max phase deviation {worst:e}")))
}

fn check_trotter_oracle(opts: &ValidationOptions) -> Result<(bool, String)> {
    let err = trotter_errors(TrotterOrder::Suzuki4, &[0.025], opts.dft)?[0];
    Ok((
        err <= 1e-4,
        format!("suzuki4 error at dt=0.025: {err:e} (limit 1e-4)"),
    ))
}

fn check_trotter_slopes(opts: &ValidationOptions) -> Result<(bool, String)> {
    let mut ok = true;
    let mut detail = Vec::new();
    for order in [
        TrotterOrder::First,
        TrotterOrder::Second,
        TrotterOrder::Suzuki4,
    ] {
        let errs = trotter_errors(order, &TROTTER_STUDY_DTS, opts.dft)?;
        let s = log_log_slope(&TROTTER_STUDY_DTS, &errs);
        let (target, tol) = trotter_slope_target(order);
        ok &= (s - target).abs() <= tol;
        detail.push(format!("{order} {s:.3}"));
    }
    Ok((ok, detail.join(", ")))
}

fn check_unitarity(opts: &ValidationOptions) -> Result<(bool, String)> {
    let params = ModelParams::units(3, 1.0)?;
    let grid = GridSpec::with_default_q_max(&params, 4, EncodingKind::UnsignedOffset)?;
    let prop = Propagator::with_options(&params, &grid, Execution::Sequential, opts.dft)?;
    let mut s = LatticeState::init_product_gaussian(&params, &grid, params.default_width()?)?;
    prop.evolve_steps(&mut s, 0.01, TrotterOrder::Second, 1000)?;
    let drift = (s.norm() - 1.0).abs();
    Ok((
        drift <= 1e-10,
        format!("norm drift after 1000 steps {drift:e}"),
    ))
}

fn check_f00(_: &ValidationOptions) -> Result<(bool, String)> {
    let case = HarmonicCase::new(3, 3, 1)?;
    let prop = case.propagator(Execution::Sequential)?;
    let gf = GeneratingFunction::new(&prop, &case.state, 1, TrotterOrder::Second, 0.05)?;
    let mut worst = 0.0_f64;
    for t in [0.0, 0.35, 1.2, 2.05] {
        for kind in GeneratingKind::ALL {
            worst = worst.max((gf.value(kind, 0.0, 0.0, t)? - 1.0).norm());
        }
    }
    Ok((worst <= 1e-10, format!("max |F(0,0) - 1| {worst:e}")))
}

pub const BIAS_STUDY_HS: [f64; 4] = [0.4, 0.2, 0.1, 0.05];

fn check_bias_orders(_: &ValidationOptions) -> Result<(bool, String)> {
    let case = HarmonicCase::new(2, 4, 1)?;
    let mut ok = true;
    let mut detail = Vec::new();
    for (est, lo, hi) in [
        (Estimator::Rect, 0.7, 1.3),
        (Estimator::Central, 1.6, 2.4),
        (Estimator::Richardson, 1.6, 2.4),
    ] {
        let b = estimator_biases(&case, est, &BIAS_STUDY_HS, 0.5, 0.01)?;
        let s = log_log_slope(&BIAS_STUDY_HS, &b);
        ok &= (lo..=hi).contains(&s);
        detail.push(format!("{est} {s:.3}"));
    }
    Ok((ok, detail.join(", ")))
}

fn check_correlator_oracle(_: &ValidationOptions) -> Result<(bool, String)> {
    let case = HarmonicCase::new(2, 4, 1)?;
    let oracle = DenseOracle::new(&case.params, &case.grid)?;
    let series = correlator_time_series(
        &case,
        Execution::Sequential,
        Estimator::Richardson,
        0.05,
        0.01,
        25,
        2.0,
    )?;
    let mut worst = f64::NEG_INFINITY;
    for (t, v, bound) in &series {
        let exact = oracle_correlator(&case, &oracle, *t)?;
        worst = worst.max((v - exact).norm() - bound - 1e-6);
    }
    Ok((
        worst <= 0.0,
        format!("max excess over bias bound {worst:e}"),
    ))
}

fn check_frequency(_: &ValidationOptions) -> Result<(bool, String)> {
    let case = HarmonicCase::new(2, 5, 1)?;
    let omega = case.omega();
    let t_end = 4.0 * PI / omega;
    let series = correlator_time_series(
        &case,
        Execution::default(),
        Estimator::Richardson,
        0.05,
        0.01,
        2,
        t_end,
    )?;
    let times: Vec<f64> = series.iter().map(|s| s.0).collect();
    let re: Vec<f64> = series.iter().map(|s| s.1.re).collect();
    match crossing_frequency(&times, &re) {
        Some(w) => {
            let rel = (w / omega - 1.0).abs();
            Ok((
                rel <= 0.05,
                format!("fitted {w:.5}, dispersion {omega:.5}, rel {rel:.2e}"),
            ))
        }
        None => Ok((false, "fewer than two zero crossings".into())),
    }
}

fn check_shot_noise(_: &ValidationOptions) -> Result<(bool, String)> {
    let case = HarmonicCase::new(2, 4, 1)?;
    let shots = [256, 1024, 4096, 16384];
    let pts = shot_noise_study(&case, 0.2, &shots, 200)?;
    let ms: Vec<f64> = shots.iter().map(|&m| m as f64).collect();
    let stds: Vec<f64> = pts.iter().map(|p| p.empirical_std).collect();
    let slope = log_log_slope(&ms, &stds);
    let within = pts
        .iter()
        .all(|p| (0.5..=2.0).contains(&(p.empirical_std / p.model)));
    Ok((
        (slope + 0.5).abs() <= 0.1 && within,
        format!(
            "slope {slope:.3}, std/model {:?}",
            pts.iter()
                .map(|p| (p.empirical_std / p.model * 1000.0).round() / 1000.0)
                .collect::<Vec<_>>()
        ),
    ))
}

fn check_depth(_: &ValidationOptions) -> Result<(bool, String)> {
    let ok = depth_linearity(4, 2, 50)?;
    Ok((ok, "N=4, b=2, n=1..50".into()))
}

fn check_gate_scaling(_: &ValidationOptions) -> Result<(bool, String)> {
    let (sb, sn) = gate_scaling_exponents(4, &[8, 16, 32], 4, &[4, 8, 16, 32])?;
    Ok((
        (sb - 2.0).abs() <= 0.05 && (sn - 1.0).abs() <= 0.05,
        format!("exponent vs b {sb:.4}, vs N {sn:.4}"),
    ))
}

fn check_mirrors(_: &ValidationOptions) -> Result<(bool, String)> {
    let ir = circuit::build_trotter_circuit(&TrotterCircuitSpec {
        n_sites: 5,
        bits: 3,
        ancilla: 6,
        order: TrotterOrder::Second,
        n_steps: 2,
        mode: ScheduleMode::Serial,
        merge_kinetic: false,
    })?;
    Ok((
        ir.mirrors_consistent(),
        format!("{} mirrored blocks", ir.mirrors().len()),
    ))
}
