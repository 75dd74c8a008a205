//! Mode-resolved displacement correlators from generating functions.
//!
//! For quadratures `A, B ∈ {Q^(c), Q^(s)}` of one mode,
//! `F_AB(θ₁, θ₂; t) = ⟨ψ₀| U†(t) e^{iθ₁A} U(t) e^{iθ₂B} |ψ₀⟩` and
//! `⟨A(t) B(0)⟩ = -∂θ₁∂θ₂ F_AB` at the origin. The mixed derivative is taken
//! with finite differences ([`Estimator`]) and the four quadrature
//! correlators are recombined into `⟨Q_k(t) Q_k(0)⟩` by
//! [`reconstruct_correlator`].
//!
//! Generating values are exact statevector overlaps; [`shot_sample`] layers
//! Hadamard-test sampling noise on top when requested.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::exec::{self, Execution, CHUNK};
use crate::propagator::{steps_for_time, Propagator, TrotterOrder};
use crate::quadratures::{self, QuadratureKind, QuadratureWeights};
use crate::state::LatticeState;
use crate::{Error, Result};

/// Which quadrature sits at time `t` (first) and at time `0` (second).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeneratingKind {
    Cc,
    Ss,
    Cs,
    Sc,
}

impl GeneratingKind {
    pub const ALL: [GeneratingKind; 4] = [
        GeneratingKind::Cc,
        GeneratingKind::Ss,
        GeneratingKind::Cs,
        GeneratingKind::Sc,
    ];

    pub fn at_t(self) -> QuadratureKind {
        match self {
            GeneratingKind::Cc | GeneratingKind::Cs => QuadratureKind::Cos,
            GeneratingKind::Ss | GeneratingKind::Sc => QuadratureKind::Sin,
        }
    }

    pub fn at_zero(self) -> QuadratureKind {
        match self {
            GeneratingKind::Cc | GeneratingKind::Sc => QuadratureKind::Cos,
            GeneratingKind::Ss | GeneratingKind::Cs => QuadratureKind::Sin,
        }
    }
}

impl fmt::Display for GeneratingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GeneratingKind::Cc => "cc",
            GeneratingKind::Ss => "ss",
            GeneratingKind::Cs => "cs",
            GeneratingKind::Sc => "sc",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratingPoint {
    pub kind: GeneratingKind,
    pub theta1: f64,
    pub theta2: f64,
    pub time_lag: f64,
    pub value: Complex64,
    pub shots: Option<u64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Estimator {
    Rect,
    Central,
    Richardson,
}

impl Estimator {
    pub const ALL: [Estimator; 3] = [Estimator::Rect, Estimator::Central, Estimator::Richardson];

    /// Source-strength points `(θ₁, θ₂)` the estimator evaluates, in the
    /// order it consumes them.
    pub fn stencil(self, h: f64) -> Vec<(f64, f64)> {
        let rect = |h: f64| vec![(h, h), (h, 0.0), (0.0, h), (0.0, 0.0)];
        match self {
            Estimator::Rect => rect(h),
            Estimator::Central => vec![(h, h), (h, -h), (-h, h), (-h, -h)],
            Estimator::Richardson => {
                let mut pts = rect(0.5 * h);
                pts.extend(rect(h));
                pts
            }
        }
    }

    /// Order-of-magnitude bias bound for quadrature norm `q_bound`:
    /// `h·Q³` (rect), `h²·Q⁴` (central and Richardson, unit constant).
    pub fn bias_bound(self, h: f64, q_bound: f64) -> f64 {
        match self {
            Estimator::Rect => h * q_bound.powi(3),
            Estimator::Central | Estimator::Richardson => h * h * q_bound.powi(4),
        }
    }

    pub fn estimate<F>(
        self,
        f: F,
        time_lag: f64,
        h: f64,
        q_bound: f64,
    ) -> Result<CorrelatorEstimate>
    where
        F: FnMut(f64, f64) -> Result<Complex64>,
    {
        match self {
            Estimator::Rect => rect_estimator(f, time_lag, h, q_bound),
            Estimator::Central => central_estimator(f, time_lag, h, q_bound),
            Estimator::Richardson => richardson_estimator(f, time_lag, h, q_bound),
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Estimator::Rect => "rect",
            Estimator::Central => "central",
            Estimator::Richardson => "richardson",
        })
    }
}

impl FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rect" => Ok(Estimator::Rect),
            "central" => Ok(Estimator::Central),
            "richardson" => Ok(Estimator::Richardson),
            other => Err(Error::param(
                "correlator.estimator",
                format!("unknown estimator {other:?} (expected rect, central or richardson)"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelatorEstimate {
    pub time_lag: f64,
    pub value: Complex64,
    pub estimator: Estimator,
    pub h: f64,
    pub bias_bound: f64,
}

fn check_step(h: f64) -> Result<()> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::param(
            "correlator.h",
            format!("{h} must be finite and > 0"),
        ));
    }
    Ok(())
}

fn rect_value<F>(f: &mut F, h: f64) -> Result<Complex64>
where
    F: FnMut(f64, f64) -> Result<Complex64>,
{
    let s = f(h, h)? - f(h, 0.0)? - f(0.0, h)? + f(0.0, 0.0)?;
    Ok(-s / (h * h))
}

/// `-[F(h,h) - F(h,0) - F(0,h) + F(0,0)] / h²`, first order in `h`.
pub fn rect_estimator<F>(
    mut f: F,
    time_lag: f64,
    h: f64,
    q_bound: f64,
) -> Result<CorrelatorEstimate>
where
    F: FnMut(f64, f64) -> Result<Complex64>,
{
    check_step(h)?;
    Ok(CorrelatorEstimate {
        time_lag,
        value: rect_value(&mut f, h)?,
        estimator: Estimator::Rect,
        h,
        bias_bound: Estimator::Rect.bias_bound(h, q_bound),
    })
}

/// `-[F(h,h) - F(h,-h) - F(-h,h) + F(-h,-h)] / (4h²)`, second order in `h`.
pub fn central_estimator<F>(
    mut f: F,
    time_lag: f64,
    h: f64,
    q_bound: f64,
) -> Result<CorrelatorEstimate>
where
    F: FnMut(f64, f64) -> Result<Complex64>,
{
    check_step(h)?;
    let s = f(h, h)? - f(h, -h)? - f(-h, h)? + f(-h, -h)?;
    Ok(CorrelatorEstimate {
        time_lag,
        value: -s / (4.0 * h * h),
        estimator: Estimator::Central,
        h,
        bias_bound: Estimator::Central.bias_bound(h, q_bound),
    })
}

/// `2·rect(h/2) - rect(h)`, cancelling the linear bias of the rectangle rule.
pub fn richardson_estimator<F>(
    mut f: F,
    time_lag: f64,
    h: f64,
    q_bound: f64,
) -> Result<CorrelatorEstimate>
where
    F: FnMut(f64, f64) -> Result<Complex64>,
{
    check_step(h)?;
    let half = rect_value(&mut f, 0.5 * h)?;
    let full = rect_value(&mut f, h)?;
    Ok(CorrelatorEstimate {
        time_lag,
        value: 2.0 * half - full,
        estimator: Estimator::Richardson,
        h,
        bias_bound: Estimator::Richardson.bias_bound(h, q_bound),
    })
}

/// `⟨Q_k(t)Q_k(0)⟩ = (cc - ss) - i·(cs + sc)` for `Q_k = Q^(c) - i·Q^(s)`.
pub fn reconstruct_correlator(
    cc: Complex64,
    ss: Complex64,
    cs: Complex64,
    sc: Complex64,
) -> Complex64 {
    (cc - ss) - Complex64::i() * (cs + sc)
}

/// Shot-noise scale `2/(h²·√M)` of the rectangle estimator.
pub fn stat_error_model(h: f64, shots: u64) -> f64 {
    2.0 / (h * h * (shots as f64).sqrt())
}

/// Circuit executions `4·N_τ·M` for `N_τ` time lags at `M` shots each.
pub fn executions(n_lags: usize, shots: u64) -> u64 {
    4 * n_lags as u64 * shots
}

const SAMPLE_TOLERANCE: f64 = 1e-9;

fn outcome_probability(x: f64, what: &'static str) -> Result<f64> {
    let p = 0.5 * (1.0 + x);
    if !(p.is_finite() && (-SAMPLE_TOLERANCE..=1.0 + SAMPLE_TOLERANCE).contains(&p)) {
        return Err(Error::param(what, format!("{x} outside [-1, 1]")));
    }
    Ok(p.clamp(0.0, 1.0))
}

/// Emulated Hadamard test: `M` ancilla outcomes with `P(+1) = (1 + Re v)/2`
/// and `M` more with `(1 + Im v)/2`, from independent streams of `seed`.
/// Returns `(2p̂_re - 1) + i(2p̂_im - 1)`.
pub fn shot_sample(value: Complex64, shots: u64, seed: u64) -> Result<Complex64> {
    if shots == 0 {
        return Err(Error::param("correlator.shots", "must be >= 1"));
    }
    let p_re = outcome_probability(value.re, "value.re")?;
    let p_im = outcome_probability(value.im, "value.im")?;
    let draw = |p: f64, stream: u64| -> Result<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let hits = Binomial::new(shots, p)
            .map_err(|e| Error::param("shot probability", e.to_string()))?
            .sample(&mut rng);
        Ok(2.0 * hits as f64 / shots as f64 - 1.0)
    };
    Ok(Complex64::new(draw(p_re, 0)?, draw(p_im, 1)?))
}

/// SplitMix64 finalizer, used to derive per-point seeds from a base seed.
pub fn derive_seed(base: u64, salt: u64) -> u64 {
    let mut z = base ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Wraps an exact evaluator so the `n`-th call is shot-sampled with seed
/// `derive_seed(seed, n)`.
pub fn sampled<F>(mut f: F, shots: u64, seed: u64) -> impl FnMut(f64, f64) -> Result<Complex64>
where
    F: FnMut(f64, f64) -> Result<Complex64>,
{
    let mut calls = 0u64;
    move |a, b| {
        let v = f(a, b)?;
        let s = derive_seed(seed, calls);
        calls += 1;
        shot_sample(v, shots, s)
    }
}

/// Generating functions of one mode for a fixed initial state and Trotter
/// step.
pub struct GeneratingFunction<'a> {
    propagator: &'a Propagator,
    psi0: &'a LatticeState,
    weights: QuadratureWeights,
    order: TrotterOrder,
    dt: f64,
    q_cos: Vec<f64>,
    q_sin: Vec<f64>,
}

impl<'a> GeneratingFunction<'a> {
    pub fn new(
        propagator: &'a Propagator,
        psi0: &'a LatticeState,
        mode_k: usize,
        order: TrotterOrder,
        dt: f64,
    ) -> Result<Self> {
        let params = propagator.params();
        let grid = propagator.grid();
        psi0.check_shape(params.n_sites, grid.bits())?;
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::param(
                "trotter.dt",
                format!("{dt} must be finite and > 0"),
            ));
        }
        let weights = quadratures::weights(params.n_sites, mode_k)?;
        let exec = propagator.execution();
        let q_cos = weights.operator_values_with(exec, grid, QuadratureKind::Cos);
        let q_sin = weights.operator_values_with(exec, grid, QuadratureKind::Sin);
        Ok(Self {
            propagator,
            psi0,
            weights,
            order,
            dt,
            q_cos,
            q_sin,
        })
    }

    pub fn weights(&self) -> &QuadratureWeights {
        &self.weights
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn values(&self, kind: QuadratureKind) -> &[f64] {
        match kind {
            QuadratureKind::Cos => &self.q_cos,
            QuadratureKind::Sin => &self.q_sin,
        }
    }

    /// Norm bound used in estimator bias bounds: the larger grid maximum of
    /// the two quadratures involved.
    pub fn q_bound(&self, kind: GeneratingKind) -> f64 {
        let grid = self.propagator.grid();
        self.weights
            .operator_bound(grid, kind.at_t())
            .max(self.weights.operator_bound(grid, kind.at_zero()))
    }

    fn evolve(&self, state: &mut LatticeState, steps: usize) -> Result<()> {
        self.propagator
            .evolve_steps(state, self.dt, self.order, steps)
    }

    /// `F(θ₁, θ₂; t)` by two forward evolutions and one overlap.
    pub fn value(
        &self,
        kind: GeneratingKind,
        theta1: f64,
        theta2: f64,
        t: f64,
    ) -> Result<Complex64> {
        let steps = steps_for_time(t, self.dt)?;
        let grid = self.propagator.grid();
        let mut bra = self.psi0.clone();
        self.evolve(&mut bra, steps)?;
        let mut ket = self.psi0.clone();
        quadratures::apply_exp_quadrature(&mut ket, grid, &self.weights, kind.at_zero(), theta2)?;
        self.evolve(&mut ket, steps)?;
        quadratures::apply_exp_quadrature(&mut ket, grid, &self.weights, kind.at_t(), theta1)?;
        bra.inner(&ket)
    }

    pub fn point(
        &self,
        kind: GeneratingKind,
        theta1: f64,
        theta2: f64,
        t: f64,
    ) -> Result<GeneratingPoint> {
        Ok(GeneratingPoint {
            kind,
            theta1,
            theta2,
            time_lag: t,
            value: self.value(kind, theta1, theta2, t)?,
            shots: None,
            seed: None,
        })
    }

    /// Reference two-time correlator `⟨ψ₀|U†(t) A U(t) B|ψ₀⟩` by direct
    /// multiplication with the quadrature diagonals (no finite differences).
    pub fn direct_correlator(&self, kind: GeneratingKind, t: f64) -> Result<Complex64> {
        let steps = steps_for_time(t, self.dt)?;
        let mut bra = self.psi0.clone();
        self.evolve(&mut bra, steps)?;
        let b = self.values(kind.at_zero());
        let amps: Vec<Complex64> = self
            .psi0
            .amplitudes()
            .iter()
            .zip(b)
            .map(|(a, q)| a * q)
            .collect();
        let p = self.propagator.params();
        let mut ket = LatticeState::from_amplitudes(p.n_sites, self.psi0.bits(), amps)?;
        self.evolve(&mut ket, steps)?;
        let a = self.values(kind.at_t());
        Ok(bra
            .amplitudes()
            .iter()
            .zip(ket.amplitudes())
            .zip(a)
            .map(|((x, y), q)| x.conj() * y * q)
            .sum())
    }

    /// Evaluates many generating values over a set of time lags in a single
    /// forward sweep.
    ///
    /// Each distinct ket `e^{iθ₂B}ψ₀` is evolved once, step by step; at each
    /// requested lag every `(kind, θ₁, θ₂)` in `points` is read off as an
    /// overlap with `U(t)ψ₀`. Kets are advanced concurrently when the
    /// propagator runs in parallel mode.
    pub fn sweep(
        &self,
        times: &[f64],
        points: &[(GeneratingKind, f64, f64)],
    ) -> Result<GeneratingTable> {
        let mut steps: Vec<usize> = times
            .iter()
            .map(|t| steps_for_time(*t, self.dt))
            .collect::<Result<_>>()?;
        let mut order: Vec<usize> = (0..times.len()).collect();
        order.sort_by_key(|&i| steps[i]);

        // distinct kets: θ₂ = 0 is shared by both quadratures
        let mut kets: Vec<(QuadratureKind, u64)> = vec![(QuadratureKind::Cos, 0f64.to_bits())];
        let key = |q: QuadratureKind, th: f64| {
            if th == 0.0 {
                (QuadratureKind::Cos, 0f64.to_bits())
            } else {
                (q, th.to_bits())
            }
        };
        for &(kind, _, th2) in points {
            let k = key(kind.at_zero(), th2);
            if !kets.contains(&k) {
                kets.push(k);
            }
        }
        // distinct bra-side phases (θ₁ ≠ 0)
        let mut phases: Vec<(QuadratureKind, u64)> = Vec::new();
        for &(kind, th1, _) in points {
            if th1 != 0.0 && !phases.contains(&(kind.at_t(), th1.to_bits())) {
                phases.push((kind.at_t(), th1.to_bits()));
            }
        }
        let plan: Vec<(Option<usize>, usize)> = points
            .iter()
            .map(|&(kind, th1, th2)| {
                let ph = (th1 != 0.0).then(|| {
                    phases
                        .iter()
                        .position(|p| *p == (kind.at_t(), th1.to_bits()))
                        .unwrap()
                });
                let ket = kets
                    .iter()
                    .position(|k| *k == key(kind.at_zero(), th2))
                    .unwrap();
                (ph, ket)
            })
            .collect();

        let grid = self.propagator.grid();
        let mut states: Vec<LatticeState> = kets
            .iter()
            .map(|&(q, bits)| {
                let mut s = self.psi0.clone();
                quadratures::apply_exp_quadrature(
                    &mut s,
                    grid,
                    &self.weights,
                    q,
                    f64::from_bits(bits),
                )?;
                Ok(s)
            })
            .collect::<Result<_>>()?;

        let exec = self.propagator.execution();
        let mut values = vec![Vec::new(); times.len()];
        let mut current = 0usize;
        for &ti in &order {
            let advance = steps[ti] - current;
            if advance > 0 {
                let mut results: Vec<Result<()>> = states.iter().map(|_| Ok(())).collect();
                let mut work: Vec<(&mut LatticeState, &mut Result<()>)> =
                    states.iter_mut().zip(results.iter_mut()).collect();
                exec::for_each_mut(exec, &mut work, |(s, r)| **r = self.evolve(s, advance));
                results.into_iter().collect::<Result<Vec<_>>>()?;
                current = steps[ti];
            }
            values[ti] = self.overlaps(exec, &states, &phases, &plan);
        }
        steps.clear();
        Ok(GeneratingTable {
            times: times.to_vec(),
            points: points.to_vec(),
            values,
        })
    }

    fn overlaps(
        &self,
        exec: Execution,
        states: &[LatticeState],
        phases: &[(QuadratureKind, u64)],
        plan: &[(Option<usize>, usize)],
    ) -> Vec<Complex64> {
        let bra = states[0].amplitudes();
        let n_points = plan.len();
        let zero = Complex64::new(0.0, 0.0);
        let per_chunk = |offset: usize, chunk: &[Complex64]| -> Vec<Complex64> {
            let mut acc = vec![zero; n_points];
            let mut weighted = vec![zero; phases.len()];
            for (i, b) in chunk.iter().enumerate() {
                let x = offset + i;
                let bc = b.conj();
                for (w, &(q, th)) in weighted.iter_mut().zip(phases) {
                    *w = bc * Complex64::cis(f64::from_bits(th) * self.values(q)[x]);
                }
                for (a, &(ph, ket)) in acc.iter_mut().zip(plan) {
                    let left = ph.map_or(bc, |p| weighted[p]);
                    *a += left * states[ket].amplitudes()[x];
                }
            }
            acc
        };
        let partial: Vec<Vec<Complex64>> = {
            let chunks: Vec<usize> = (0..bra.len().div_ceil(CHUNK)).collect();
            exec::collect_indexed(exec, chunks.len(), |c| {
                let start = c * CHUNK;
                let end = (start + CHUNK).min(bra.len());
                per_chunk(start, &bra[start..end])
            })
        };
        let mut total = vec![zero; n_points];
        for part in partial {
            for (t, p) in total.iter_mut().zip(part) {
                *t += p;
            }
        }
        total
    }
}

/// Generating values indexed by time lag and `(kind, θ₁, θ₂)`.
#[derive(Debug, Clone)]
pub struct GeneratingTable {
    times: Vec<f64>,
    points: Vec<(GeneratingKind, f64, f64)>,
    values: Vec<Vec<Complex64>>,
}

impl GeneratingTable {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn get(
        &self,
        time_index: usize,
        kind: GeneratingKind,
        theta1: f64,
        theta2: f64,
    ) -> Result<Complex64> {
        let row = self.values.get(time_index).ok_or(Error::OutOfRange {
            what: "time lag",
            index: time_index,
            bound: self.times.len(),
        })?;
        self.points
            .iter()
            .position(|&(k, a, b)| {
                k == kind && a.to_bits() == theta1.to_bits() && b.to_bits() == theta2.to_bits()
            })
            .map(|i| row[i])
            .ok_or_else(|| {
                Error::param(
                    "generating point",
                    format!("({kind}, {theta1}, {theta2}) was not part of the sweep"),
                )
            })
    }

    /// Evaluator closure for one `(time, kind)` pair.
    pub fn evaluator(
        &self,
        time_index: usize,
        kind: GeneratingKind,
    ) -> impl FnMut(f64, f64) -> Result<Complex64> + '_ {
        move |a, b| self.get(time_index, kind, a, b)
    }
}

/// Shot budget for sampled estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotConfig {
    pub shots: u64,
    pub seed: u64,
}

/// One reconstructed correlator estimate, as written to CSV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelatorRow {
    pub t: f64,
    pub h: f64,
    pub estimator: Estimator,
    pub re: f64,
    pub im: f64,
    pub bias_bound: f64,
    pub shots: Option<u64>,
    pub seed: Option<u64>,
    pub n_exec: u64,
}

/// Per-lag estimates of the four quadrature correlators and their
/// reconstruction.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesEntry {
    pub time_lag: f64,
    pub estimator: Estimator,
    pub components: [CorrelatorEstimate; 4],
    pub value: Complex64,
    pub bias_bound: f64,
}

/// Estimates `⟨Q_k(t)Q_k(0)⟩` at every lag in `times` with each estimator.
///
/// With `shots`, every generating value is shot-sampled; the seed for lag
/// `i`, kind `g` and estimator `e` is derived from the base seed so reruns
/// are bit-identical.
pub fn correlator_series(
    gf: &GeneratingFunction<'_>,
    times: &[f64],
    estimators: &[Estimator],
    h: f64,
    shots: Option<ShotConfig>,
) -> Result<Vec<SeriesEntry>> {
    check_step(h)?;
    let mut points = Vec::new();
    for &kind in &GeneratingKind::ALL {
        for e in estimators {
            for (a, b) in e.stencil(h) {
                if !points.contains(&(kind, a, b)) {
                    points.push((kind, a, b));
                }
            }
        }
    }
    let table = gf.sweep(times, &points)?;
    let mut out = Vec::with_capacity(times.len() * estimators.len());
    for (ti, &t) in times.iter().enumerate() {
        for (ei, &est) in estimators.iter().enumerate() {
            let mut comps = Vec::with_capacity(4);
            for (gi, &kind) in GeneratingKind::ALL.iter().enumerate() {
                let q = gf.q_bound(kind);
                let f = table.evaluator(ti, kind);
                let c = match shots {
                    None => est.estimate(f, t, h, q)?,
                    Some(cfg) => {
                        let salt = ((ti as u64) << 8) | ((ei as u64) << 4) | gi as u64;
                        est.estimate(sampled(f, cfg.shots, derive_seed(cfg.seed, salt)), t, h, q)?
                    }
                };
                comps.push(c);
            }
            let components: [CorrelatorEstimate; 4] = comps.try_into().expect("four kinds");
            let value = reconstruct_correlator(
                components[0].value,
                components[1].value,
                components[2].value,
                components[3].value,
            );
            let bias_bound = components.iter().map(|c| c.bias_bound).sum();
            out.push(SeriesEntry {
                time_lag: t,
                estimator: est,
                components,
                value,
                bias_bound,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::{EncodingKind, GridSpec};
    use crate::model::ModelParams;

    fn poly(c: f64) -> impl FnMut(f64, f64) -> Result<Complex64> {
        move |a, b| Ok(Complex64::new(1.0 - a * b * c, 0.0))
    }

    #[test]
    fn quadratic_generator_is_exact_for_all_estimators() {
        for est in Estimator::ALL {
            for h in [0.3, 0.01] {
                let e = est.estimate(poly(0.7), 0.0, h, 1.0).unwrap();
                assert!((e.value.re - 0.7).abs() < 1e-12, "{est}");
                assert_eq!(e.estimator, est);
            }
        }
    }

    #[test]
    fn rect_on_exponential_generator_converges_quadratically() {
        // F = exp(-θ₁θ₂C): rect = -(e^{-h²C} - 1)/h² = C - h²C²/2 + ...
        let c = 0.8;
        let err = |h: f64| {
            let f = move |a: f64, b: f64| Ok(Complex64::new((-a * b * c).exp(), 0.0));
            (rect_estimator(f, 0.0, h, 1.0).unwrap().value.re - c).abs()
        };
        let slope = (err(0.1) / err(0.05)).log2();
        assert!((slope - 2.0).abs() < 0.05, "{slope}");
    }

    #[test]
    fn central_cancels_cubic_contamination() {
        let f = |a: f64, b: f64| {
            Ok(Complex64::new(
                1.0 - 0.5 * a * b + 0.3 * a * a * b + 0.2 * a * b * b,
                0.0,
            ))
        };
        let e = central_estimator(f, 0.0, 0.25, 1.0).unwrap();
        assert!((e.value.re - 0.5).abs() < 1e-12);
        // the rectangle rule sees it
        let r = rect_estimator(f, 0.0, 0.25, 1.0).unwrap();
        assert!((r.value.re - 0.5).abs() > 1e-3);
    }

    #[test]
    fn richardson_removes_linear_bias_exactly() {
        // rect(h) = C + a·h for this generator
        let f = |a: f64, b: f64| Ok(Complex64::new(1.0 - 0.4 * a * b - 0.6 * a * a * b, 0.0));
        let r = rect_estimator(f, 0.0, 0.2, 1.0).unwrap();
        assert!((r.value.re - (0.4 + 0.6 * 0.2)).abs() < 1e-12);
        let e = richardson_estimator(f, 0.0, 0.2, 1.0).unwrap();
        assert!((e.value.re - 0.4).abs() < 1e-12);
    }

    #[test]
    fn degenerate_steps_rejected() {
        assert!(rect_estimator(poly(1.0), 0.0, 0.0, 1.0).is_err());
        assert!(central_estimator(poly(1.0), 0.0, -0.1, 1.0).is_err());
        assert!(richardson_estimator(poly(1.0), 0.0, f64::NAN, 1.0).is_err());
    }

    #[test]
    fn bias_bounds() {
        let r = rect_estimator(poly(1.0), 0.0, 0.1, 2.0).unwrap();
        assert!((r.bias_bound - 0.8).abs() < 1e-12);
        let c = central_estimator(poly(1.0), 0.0, 0.1, 2.0).unwrap();
        assert!((c.bias_bound - 0.16).abs() < 1e-12);
    }

    #[test]
    fn reconstruction_examples() {
        let z = Complex64::new(0.0, 0.0);
        let a = Complex64::new(0.3, 0.1);
        let b = Complex64::new(-0.2, 0.4);
        assert_eq!(reconstruct_correlator(a, b, z, z), a - b);
        assert_eq!(reconstruct_correlator(z, z, z, z), z);
        assert_eq!(reconstruct_correlator(a, a, b, -b), z);
    }

    #[test]
    fn stat_model_scaling() {
        let base = stat_error_model(0.2, 1000);
        assert!((base / stat_error_model(0.2, 2000) - 2f64.sqrt()).abs() < 1e-12);
        assert!((stat_error_model(0.1, 1000) / base - 4.0).abs() < 1e-12);
        assert_eq!(executions(0, 100), 0);
        assert_eq!(executions(5, 100), 2000);
    }

    #[test]
    fn shot_sampler_contracts() {
        let one = shot_sample(Complex64::new(1.0, 0.0), 500, 3).unwrap();
        assert_eq!(one.re, 1.0);
        let v = Complex64::new(0.3, -0.6);
        assert_eq!(
            shot_sample(v, 1000, 42).unwrap(),
            shot_sample(v, 1000, 42).unwrap()
        );
        assert_ne!(
            shot_sample(v, 1000, 42).unwrap(),
            shot_sample(v, 1000, 43).unwrap()
        );
        assert!(shot_sample(Complex64::new(1.2, 0.0), 10, 0).is_err());
        assert!(shot_sample(v, 0, 0).is_err());
        // tolerance for roundoff just outside the unit disk
        assert!(shot_sample(Complex64::new(1.0 + 1e-12, 0.0), 10, 0).is_ok());
    }

    #[test]
    fn shot_sampler_variance_matches_binomial() {
        let v = Complex64::new(0.4, 0.0);
        let m = 10_000u64;
        let samples: Vec<f64> = (0..200).map(|s| shot_sample(v, m, s).unwrap().re).collect();
        let mean = samples.iter().sum::<f64>() / 200.0;
        let std = (samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 199.0).sqrt();
        let expected = (1.0 - 0.16f64).sqrt() / (m as f64).sqrt();
        assert!((std / expected - 1.0).abs() < 0.2, "{std} vs {expected}");
    }

    fn small_problem(beta: f64) -> (Propagator, LatticeState) {
        let p = ModelParams::units(3, beta).unwrap();
        let g = GridSpec::with_default_q_max(&p, 3, EncodingKind::UnsignedOffset).unwrap();
        let prop = Propagator::new(&p, &g).unwrap();
        let s = LatticeState::product_gaussian(&p, &g, 0.5, Some(&[0.4, -0.1, 0.0]), 26).unwrap();
        (prop, s)
    }

    #[test]
    fn generating_value_identities() {
        let (prop, s) = small_problem(0.5);
        let gf = GeneratingFunction::new(&prop, &s, 1, TrotterOrder::Second, 0.05).unwrap();
        for kind in GeneratingKind::ALL {
            for t in [0.0, 0.35] {
                let v = gf.value(kind, 0.0, 0.0, t).unwrap();
                assert!((v - 1.0).norm() < 1e-10);
                let w = gf.value(kind, 0.7, -0.4, t).unwrap();
                assert!(w.norm() <= 1.0 + 1e-9);
            }
        }
        let inv = gf.value(GeneratingKind::Cc, 0.6, -0.6, 0.0).unwrap();
        assert!((inv - 1.0).norm() < 1e-10);
        let a = gf.value(GeneratingKind::Cc, 0.3, 0.8, 0.0).unwrap();
        let b = gf.value(GeneratingKind::Cc, 0.8, 0.3, 0.0).unwrap();
        assert!((a - b).norm() < 1e-10);
        assert!(matches!(
            gf.value(GeneratingKind::Cc, 0.1, 0.1, 0.125),
            Err(Error::NotOnTimeGrid { .. })
        ));
    }

    #[test]
    fn sweep_matches_direct_evaluation() {
        let (prop, s) = small_problem(0.8);
        let gf = GeneratingFunction::new(&prop, &s, 1, TrotterOrder::Second, 0.05).unwrap();
        let times = [0.3, 0.0, 0.15];
        let mut points = Vec::new();
        for kind in GeneratingKind::ALL {
            for (a, b) in Estimator::Central.stencil(0.2) {
                points.push((kind, a, b));
            }
            points.push((kind, 0.0, 0.1));
        }
        let table = gf.sweep(&times, &points).unwrap();
        for (ti, &t) in times.iter().enumerate() {
            for &(kind, a, b) in &points {
                let direct = gf.value(kind, a, b, t).unwrap();
                let swept = table.get(ti, kind, a, b).unwrap();
                assert!((direct - swept).norm() < 1e-12);
            }
        }
        assert!(table.get(0, GeneratingKind::Cc, 0.5, 0.5).is_err());
    }

    #[test]
    fn estimators_converge_to_direct_correlator() {
        let (prop, s) = small_problem(0.3);
        let gf = GeneratingFunction::new(&prop, &s, 1, TrotterOrder::Second, 0.05).unwrap();
        for kind in GeneratingKind::ALL {
            let exact = gf.direct_correlator(kind, 0.2).unwrap();
            let q = gf.q_bound(kind);
            let mut f = |a, b| gf.value(kind, a, b, 0.2);
            let e = central_estimator(&mut f, 0.2, 1e-3, q).unwrap();
            assert!(
                (e.value - exact).norm() < 1e-5,
                "{kind}: {} vs {}",
                e.value,
                exact
            );
        }
    }

    #[test]
    fn sampled_series_is_deterministic() {
        let (prop, s) = small_problem(0.0);
        let gf = GeneratingFunction::new(&prop, &s, 1, TrotterOrder::Second, 0.05).unwrap();
        let shots = Some(ShotConfig {
            shots: 256,
            seed: 9,
        });
        let a = correlator_series(&gf, &[0.0, 0.1], &Estimator::ALL, 0.2, shots).unwrap();
        let b = correlator_series(&gf, &[0.0, 0.1], &Estimator::ALL, 0.2, shots).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 6);
        let empty = correlator_series(&gf, &[], &Estimator::ALL, 0.2, None).unwrap();
        assert!(empty.is_empty());
    }
}
