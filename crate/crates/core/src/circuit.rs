//! Gate-level IR of the Trotter circuit and logical resource estimates.
//!
//! The IR is used for counting and depth accounting only; the executable
//! semantics live in [`crate::propagator`]. Arithmetic blocks (subtractors,
//! squaring networks) are emitted as Toffoli/CNOT patterns whose sizes follow
//! the cost model in [`CostModel`]; their operand wiring is representative,
//! not a verified reversible circuit.
//!
//! Depth is computed by greedy (as-soon-as-possible) layering within
//! barrier-delimited segments, and segment depths add. Every builder places a
//! barrier after each kinetic or potential layer, which makes depth exactly
//! additive over Trotter steps.

use std::fmt::{self, Write as _};
use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::encoding::GridSpec;
use crate::propagator::TrotterOrder;
use crate::quadratures::{self, QuadratureKind, QuadratureWeights};
use crate::{Error, Result};

/// Declared constants of the gate cost model.
///
/// The asymptotic scalings are standard; the constants are assumptions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostModel {
    /// Toffolis per `b²` unit of a squaring network.
    pub squaring_toffoli_per_b2: usize,
    /// CNOTs per bit of a ripple-borrow subtractor.
    pub subtractor_cnot_per_bit: usize,
    /// Toffolis per bit of a ripple-borrow subtractor.
    pub subtractor_toffoli_per_bit: usize,
    /// Prefactor of the Trotter step-count model.
    pub step_prefactor: f64,
    /// `O(1)` term of the total logical-qubit formula.
    pub qubit_constant: usize,
}

pub const COST_MODEL: CostModel = CostModel {
    squaring_toffoli_per_b2: 6,
    subtractor_cnot_per_bit: 2,
    subtractor_toffoli_per_bit: 1,
    step_prefactor: 1.0,
    qubit_constant: 0,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GateKind {
    H,
    /// Controlled phase `2π/2^level`.
    CPhase(u32),
    Rz(f64),
    Cnot,
    Toffoli,
    Phase(f64),
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::H | GateKind::Rz(_) | GateKind::Phase(_) => 1,
            GateKind::CPhase(_) | GateKind::Cnot => 2,
            GateKind::Toffoli => 3,
        }
    }

    fn mnemonic(self) -> &'static str {
        match self {
            GateKind::H => "H",
            GateKind::CPhase(_) => "CPHASE",
            GateKind::Rz(_) => "RZ",
            GateKind::Cnot => "CNOT",
            GateKind::Toffoli => "TOFFOLI",
            GateKind::Phase(_) => "PHASE",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub kind: GateKind,
    pub operands: Vec<usize>,
}

impl Gate {
    pub fn new(kind: GateKind, operands: Vec<usize>) -> Result<Self> {
        if operands.len() != kind.arity() {
            return Err(Error::param(
                "gate",
                format!(
                    "{} takes {} operands, got {}",
                    kind.mnemonic(),
                    kind.arity(),
                    operands.len()
                ),
            ));
        }
        for (i, q) in operands.iter().enumerate() {
            if operands[..i].contains(q) {
                return Err(Error::param("gate", format!("repeated operand {q}")));
            }
        }
        Ok(Self { kind, operands })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LayerTag {
    Kinetic,
    PotentialEven,
    PotentialOdd,
    Quadrature,
    Measure,
}

impl LayerTag {
    fn name(self) -> &'static str {
        match self {
            LayerTag::Kinetic => "kinetic",
            LayerTag::PotentialEven => "potential-even",
            LayerTag::PotentialOdd => "potential-odd",
            LayerTag::Quadrature => "quadrature",
            LayerTag::Measure => "measure",
        }
    }
}

impl FromStr for LayerTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            LayerTag::Kinetic,
            LayerTag::PotentialEven,
            LayerTag::PotentialOdd,
            LayerTag::Quadrature,
            LayerTag::Measure,
        ]
        .into_iter()
        .find(|t| t.name() == s)
        .ok_or_else(|| Error::param("layer tag", format!("unknown tag {s:?}")))
    }
}

/// A compute block and the gate range that must undo it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mirror {
    pub compute: Range<usize>,
    pub uncompute: Range<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScheduleMode {
    /// One shared ancilla bank; sites are processed one after another.
    Serial,
    /// One ancilla bank per site; sites run concurrently.
    Parallel,
}

impl fmt::Display for ScheduleMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScheduleMode::Serial => "serial",
            ScheduleMode::Parallel => "parallel",
        })
    }
}

impl FromStr for ScheduleMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "serial" => Ok(ScheduleMode::Serial),
            "parallel" => Ok(ScheduleMode::Parallel),
            other => Err(Error::param(
                "resources.mode",
                format!("unknown mode {other:?} (expected serial or parallel)"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateCounts {
    pub hadamard: usize,
    pub cphase: usize,
    /// Single-qubit diagonal rotations (`RZ` and `PHASE`).
    pub rz: usize,
    pub toffoli: usize,
    pub cnot: usize,
}

impl GateCounts {
    pub fn total(&self) -> usize {
        self.hadamard + self.cphase + self.rz + self.toffoli + self.cnot
    }

    pub fn scaled(&self, n: usize) -> Self {
        Self {
            hadamard: self.hadamard * n,
            cphase: self.cphase * n,
            rz: self.rz * n,
            toffoli: self.toffoli * n,
            cnot: self.cnot * n,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CircuitIR {
    n_qubits: usize,
    gates: Vec<Gate>,
    tags: Vec<Option<LayerTag>>,
    /// Gate indices before which a barrier sits.
    barriers: Vec<usize>,
    mirrors: Vec<Mirror>,
    global_phase: f64,
}

impl CircuitIR {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            ..Self::default()
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn tags(&self) -> &[Option<LayerTag>] {
        &self.tags
    }

    pub fn barriers(&self) -> &[usize] {
        &self.barriers
    }

    pub fn mirrors(&self) -> &[Mirror] {
        &self.mirrors
    }

    pub fn global_phase(&self) -> f64 {
        self.global_phase
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn push(
        &mut self,
        kind: GateKind,
        operands: &[usize],
        tag: Option<LayerTag>,
    ) -> Result<()> {
        let gate = Gate::new(kind, operands.to_vec())?;
        if let Some(&q) = gate.operands.iter().find(|&&q| q >= self.n_qubits) {
            return Err(Error::OutOfRange {
                what: "qubit",
                index: q,
                bound: self.n_qubits,
            });
        }
        self.gates.push(gate);
        self.tags.push(tag);
        Ok(())
    }

    // builders only emit validated operands
    fn emit(&mut self, kind: GateKind, operands: &[usize], tag: LayerTag) {
        self.push(kind, operands, Some(tag))
            .expect("builder emitted an invalid gate");
    }

    /// Closes the current layering segment.
    pub fn barrier(&mut self) {
        if self.barriers.last() != Some(&self.gates.len()) {
            self.barriers.push(self.gates.len());
        }
    }

    pub fn add_global_phase(&mut self, phase: f64) {
        self.global_phase += phase;
    }

    /// Appends `other` on the same register (qubit counts must agree),
    /// followed by a barrier.
    pub fn append(&mut self, other: &CircuitIR) -> Result<()> {
        if other.n_qubits > self.n_qubits {
            return Err(Error::LengthMismatch {
                expected: self.n_qubits,
                actual: other.n_qubits,
            });
        }
        let off = self.gates.len();
        self.barrier();
        self.gates.extend(other.gates.iter().cloned());
        self.tags.extend(other.tags.iter().copied());
        for &b in &other.barriers {
            if b > 0 {
                self.barriers.push(b + off);
            }
        }
        self.barrier();
        for m in &other.mirrors {
            self.mirrors.push(Mirror {
                compute: m.compute.start + off..m.compute.end + off,
                uncompute: m.uncompute.start + off..m.uncompute.end + off,
            });
        }
        self.global_phase += other.global_phase;
        Ok(())
    }

    pub fn gate_counts(&self) -> GateCounts {
        let mut c = GateCounts::default();
        for g in &self.gates {
            match g.kind {
                GateKind::H => c.hadamard += 1,
                GateKind::CPhase(_) => c.cphase += 1,
                GateKind::Rz(_) | GateKind::Phase(_) => c.rz += 1,
                GateKind::Toffoli => c.toffoli += 1,
                GateKind::Cnot => c.cnot += 1,
            }
        }
        c
    }

    /// Greedy layered depth; barrier segments are layered independently and
    /// their depths summed.
    pub fn depth(&self) -> usize {
        let mut ready = vec![0usize; self.n_qubits];
        let mut base = 0usize;
        let mut top = 0usize;
        let mut next_barrier = self.barriers.iter().peekable();
        for (i, g) in self.gates.iter().enumerate() {
            while next_barrier.peek().is_some_and(|&&b| b <= i) {
                base = top;
                next_barrier.next();
            }
            let layer = g.operands.iter().map(|&q| ready[q]).fold(base, usize::max);
            for &q in &g.operands {
                ready[q] = layer + 1;
            }
            top = top.max(layer + 1);
        }
        top
    }

    /// Whether every recorded uncompute range is the reverse of its compute
    /// range (all mirrored gates are self-inverse).
    pub fn mirrors_consistent(&self) -> bool {
        self.mirrors.iter().all(|m| {
            let c = &self.gates[m.compute.clone()];
            let u = &self.gates[m.uncompute.clone()];
            !c.is_empty()
                && c.len() == u.len()
                && c.iter()
                    .all(|g| matches!(g.kind, GateKind::Cnot | GateKind::Toffoli | GateKind::H))
                && c.iter().rev().zip(u).all(|(a, b)| a == b)
                && m.compute.end <= m.uncompute.start
        })
    }

    fn push_mirror_of(&mut self, compute: Range<usize>) {
        let start = self.gates.len();
        for i in compute.clone().rev() {
            self.gates.push(self.gates[i].clone());
            self.tags.push(self.tags[i]);
        }
        self.mirrors.push(Mirror {
            compute,
            uncompute: start..self.gates.len(),
        });
    }
}

/// Textbook QFT on `b` qubits without the final bit-reversal swaps
/// (absorbed into qubit relabeling).
pub fn build_qft_ir(b: u32) -> Result<CircuitIR> {
    if b == 0 {
        return Err(Error::param("bits", "QFT needs at least one qubit"));
    }
    let reg: Vec<usize> = (0..b as usize).collect();
    let mut ir = CircuitIR::new(b as usize);
    qft(&mut ir, &reg, LayerTag::Kinetic, false);
    Ok(ir)
}

fn qft(ir: &mut CircuitIR, reg: &[usize], tag: LayerTag, inverse: bool) {
    let b = reg.len();
    let mut ops: Vec<(GateKind, Vec<usize>)> = Vec::with_capacity(b * (b + 1) / 2);
    for i in 0..b {
        ops.push((GateKind::H, vec![reg[i]]));
        for j in i + 1..b {
            ops.push((GateKind::CPhase((j - i + 1) as u32), vec![reg[j], reg[i]]));
        }
    }
    if inverse {
        ops.reverse();
    }
    for (k, o) in ops {
        ir.emit(k, &o, tag);
    }
}

/// Modeled squaring network: `c_sq·b²` Toffolis from `input` into `work`.
fn squaring(ir: &mut CircuitIR, input: &[usize], work: &[usize], tag: LayerTag) -> Range<usize> {
    let b = input.len();
    let start = ir.len();
    for r in 0..COST_MODEL.squaring_toffoli_per_b2 {
        for i in 0..b {
            for j in 0..b {
                let partner = input[(i + 1 + j % (b - 1)) % b];
                let target = work[(r * b * b + i * b + j) % work.len()];
                ir.emit(GateKind::Toffoli, &[input[i], partner, target], tag);
            }
        }
    }
    start..ir.len()
}

/// Ripple-borrow subtractor writing `right - left` into `diff`.
fn subtractor(
    ir: &mut CircuitIR,
    left: &[usize],
    right: &[usize],
    diff: &[usize],
    tag: LayerTag,
) -> Range<usize> {
    let b = diff.len();
    let start = ir.len();
    for i in 0..b {
        ir.emit(GateKind::Cnot, &[right[i], diff[i]], tag);
        ir.emit(GateKind::Cnot, &[left[i], diff[i]], tag);
        ir.emit(
            GateKind::Toffoli,
            &[left[i], diff[i], diff[(i + 1) % b]],
            tag,
        );
    }
    debug_assert_eq!(
        ir.len() - start,
        b * (COST_MODEL.subtractor_cnot_per_bit + COST_MODEL.subtractor_toffoli_per_bit)
    );
    start..ir.len()
}

fn check_sizes(n_sites: usize, bits: u32) -> Result<()> {
    if n_sites < 2 {
        return Err(Error::param(
            "model.n_sites",
            format!("{n_sites} must be >= 2"),
        ));
    }
    if bits < 2 {
        return Err(Error::param("grid.bits", format!("{bits} must be >= 2")));
    }
    Ok(())
}

/// Qubits used by [`build_kinetic_layer_ir`]: `N·b + a` (serial) or
/// `N·(b + a)` (parallel).
pub fn kinetic_footprint(n_sites: usize, bits: u32, ancilla: usize, mode: ScheduleMode) -> usize {
    let b = bits as usize;
    match mode {
        ScheduleMode::Serial => n_sites * b + ancilla,
        ScheduleMode::Parallel => n_sites * (b + ancilla),
    }
}

/// One kinetic factor: per site QFT, squaring into the ancilla bank, `b`
/// phase kicks, uncompute, inverse QFT.
pub fn build_kinetic_layer_ir(
    n_sites: usize,
    bits: u32,
    ancilla: usize,
    mode: ScheduleMode,
) -> Result<CircuitIR> {
    check_sizes(n_sites, bits)?;
    let b = bits as usize;
    if ancilla < b {
        return Err(Error::param(
            "resources.ancilla",
            format!("ancilla budget {ancilla} must be >= bits {b}"),
        ));
    }
    let mut ir = CircuitIR::new(kinetic_footprint(n_sites, bits, ancilla, mode));
    let tag = LayerTag::Kinetic;
    for j in 0..n_sites {
        let site: Vec<usize> = (j * b..(j + 1) * b).collect();
        let bank_start = match mode {
            ScheduleMode::Serial => n_sites * b,
            ScheduleMode::Parallel => n_sites * b + j * ancilla,
        };
        let bank: Vec<usize> = (bank_start..bank_start + ancilla).collect();
        qft(&mut ir, &site, tag, false);
        let sq = squaring(&mut ir, &site, &bank, tag);
        for r in 0..b {
            ir.emit(GateKind::CPhase(r as u32 + 1), &[bank[r], site[r]], tag);
        }
        ir.push_mirror_of(sq);
        qft(&mut ir, &site, tag, true);
    }
    ir.barrier();
    Ok(ir)
}

/// Bonds `(j, j+1 mod N)` grouped into layers of disjoint bonds: even `j`,
/// odd `j`, and for odd `N` a residual layer holding the wrap-around bond.
pub fn bond_layers(n_sites: usize) -> Vec<Vec<usize>> {
    let mut even: Vec<usize> = (0..n_sites).step_by(2).collect();
    let odd: Vec<usize> = (1..n_sites).step_by(2).collect();
    let mut layers = Vec::new();
    let residual = if n_sites % 2 == 1 { even.pop() } else { None };
    layers.push(even);
    layers.push(odd);
    if let Some(r) = residual {
        layers.push(vec![r]);
    }
    layers
}

/// Registers per concurrent bond: difference, square, fourth power.
const BOND_REGISTERS: usize = 3;

/// One potential factor: per bond SUB, Φ₂ (square, phase, unsquare), Φ₄
/// (square twice, phase, unsquare twice), UNSUB. Bonds in a layer run in
/// parallel on their own ancilla slot.
pub fn build_potential_layer_ir(n_sites: usize, bits: u32) -> Result<CircuitIR> {
    check_sizes(n_sites, bits)?;
    let b = bits as usize;
    let layers = bond_layers(n_sites);
    let slots = layers.iter().map(Vec::len).max().unwrap_or(0);
    let mut ir = CircuitIR::new(n_sites * b + slots * BOND_REGISTERS * b);
    for (li, layer) in layers.iter().enumerate() {
        let tag = if li % 2 == 0 {
            LayerTag::PotentialEven
        } else {
            LayerTag::PotentialOdd
        };
        for (slot, &bond) in layer.iter().enumerate() {
            let left: Vec<usize> = (bond * b..(bond + 1) * b).collect();
            let r = (bond + 1) % n_sites;
            let right: Vec<usize> = (r * b..(r + 1) * b).collect();
            let base = n_sites * b + slot * BOND_REGISTERS * b;
            let diff: Vec<usize> = (base..base + b).collect();
            let sq: Vec<usize> = (base + b..base + 2 * b).collect();
            let quart: Vec<usize> = (base + 2 * b..base + 3 * b).collect();

            let sub = subtractor(&mut ir, &left, &right, &diff, tag);
            // Φ₂
            let s2 = squaring(&mut ir, &diff, &sq, tag);
            for (i, &q) in sq.iter().enumerate() {
                ir.emit(GateKind::Rz(unit_angle(i)), &[q], tag);
            }
            ir.push_mirror_of(s2);
            // Φ₄
            let s4a = squaring(&mut ir, &diff, &sq, tag);
            let s4b = squaring(&mut ir, &sq, &quart, tag);
            for (i, &q) in quart.iter().enumerate() {
                ir.emit(GateKind::Rz(unit_angle(i)), &[q], tag);
            }
            ir.push_mirror_of(s4b);
            ir.push_mirror_of(s4a);
            ir.push_mirror_of(sub);
        }
        ir.barrier();
    }
    Ok(ir)
}

/// Placeholder rotation angle `2^-i` for parameter-free builders; the
/// physical angles scale with `τ` and the couplings.
fn unit_angle(i: usize) -> f64 {
    (-(i as f64)).exp2()
}

/// Layer sequence `(is_kinetic)` of one Trotter step.
fn step_layers(order: TrotterOrder) -> Vec<bool> {
    match order {
        TrotterOrder::First => vec![true, false],
        TrotterOrder::Second => vec![true, false, true],
        TrotterOrder::Suzuki4 => (0..5).flat_map(|_| [true, false, true]).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrotterCircuitSpec {
    pub n_sites: usize,
    pub bits: u32,
    pub ancilla: usize,
    pub order: TrotterOrder,
    pub n_steps: usize,
    pub mode: ScheduleMode,
    /// Fuse adjacent kinetic layers, including across step boundaries.
    pub merge_kinetic: bool,
}

/// Concatenated Trotter circuit. Without merging, each step contributes
/// the same gates and depth.
pub fn build_trotter_circuit(spec: &TrotterCircuitSpec) -> Result<CircuitIR> {
    let kin = build_kinetic_layer_ir(spec.n_sites, spec.bits, spec.ancilla, spec.mode)?;
    let pot = build_potential_layer_ir(spec.n_sites, spec.bits)?;
    let mut seq: Vec<bool> = Vec::new();
    for _ in 0..spec.n_steps {
        for k in step_layers(spec.order) {
            if spec.merge_kinetic && k && seq.last() == Some(&true) {
                continue;
            }
            seq.push(k);
        }
    }
    let mut ir = CircuitIR::new(kin.n_qubits().max(pot.n_qubits()));
    for k in seq {
        ir.append(if k { &kin } else { &pot })?;
    }
    Ok(ir)
}

/// `exp(iθQ)` as per-bit `RZ` gates on the `N·b` system register; the
/// offset-grid constant goes to the global phase.
pub fn build_quadrature_layer_ir(
    grid: &GridSpec,
    weights: &QuadratureWeights,
    which: QuadratureKind,
    theta: f64,
) -> CircuitIR {
    let b = grid.bits() as usize;
    let mut ir = CircuitIR::new(weights.n_sites() * b);
    for a in quadratures::rz_angles(grid, weights, which, theta) {
        ir.emit(
            GateKind::Rz(a.angle),
            &[a.site * b + a.bit as usize],
            LayerTag::Quadrature,
        );
    }
    ir.add_global_phase(quadratures::rz_global_phase(grid, weights, which, theta));
    ir.barrier();
    ir
}

/// Model step count `ceil(Λ·t^(1+1/k)·ε^(-1/k))` for a formula of order
/// `k` (`k = 2p` for a `2p`-th order Suzuki formula).
pub fn trotter_steps(order: TrotterOrder, t: f64, epsilon: f64) -> Result<usize> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::param(
            "resources.t",
            format!("{t} must be finite and > 0"),
        ));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::param(
            "resources.epsilon",
            format!("{epsilon} must lie in (0, 1)"),
        ));
    }
    let k = f64::from(order.accuracy());
    let n = COST_MODEL.step_prefactor * t.powf(1.0 + 1.0 / k) * epsilon.powf(-1.0 / k);
    // absorb roundoff so exact integers do not round up
    Ok(((n * (1.0 - 1e-12)).ceil() as usize).max(1))
}

/// Closed-form total: system register plus one `b`-qubit bond register for
/// each of the `N/2` bonds of a layer, `ceil(3Nb/2) + const`.
pub fn qubits_total_formula(n_sites: usize, bits: u32) -> usize {
    (3 * n_sites * bits as usize).div_ceil(2) + COST_MODEL.qubit_constant
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResourceReport {
    pub n_sites: usize,
    pub bits: u32,
    pub ancilla_budget: usize,
    pub order: TrotterOrder,
    pub mode: ScheduleMode,
    pub t: f64,
    pub epsilon: f64,
    pub qubits_serial: usize,
    pub qubits_parallel: usize,
    pub qubits_total_formula: usize,
    /// Gate counts of one Trotter step.
    pub gate_counts: GateCounts,
    pub total_gates: usize,
    pub depth_per_step: usize,
    pub trotter_steps: usize,
    pub total_depth: usize,
    pub measurement_depth: usize,
    /// Layered depth of a single kinetic factor in this IR.
    pub kinetic_layer_depth: usize,
    /// Kinetic depth under the linear-in-`b` and quadratic-in-`b` readings.
    pub kinetic_depth_linear_model: usize,
    pub kinetic_depth_quadratic_model: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResourceQuery {
    pub n_sites: usize,
    pub bits: u32,
    pub ancilla: usize,
    pub order: TrotterOrder,
    pub t: f64,
    pub epsilon: f64,
    pub mode: ScheduleMode,
}

/// Qubit figures from the closed forms, gates and depth from one step of
/// [`build_trotter_circuit`] scaled by the model step count.
pub fn resource_report(q: &ResourceQuery) -> Result<ResourceReport> {
    let n = trotter_steps(q.order, q.t, q.epsilon)?;
    let step = build_trotter_circuit(&TrotterCircuitSpec {
        n_sites: q.n_sites,
        bits: q.bits,
        ancilla: q.ancilla,
        order: q.order,
        n_steps: 1,
        mode: q.mode,
        merge_kinetic: false,
    })?;
    let kin = build_kinetic_layer_ir(q.n_sites, q.bits, q.ancilla, q.mode)?;
    let counts = step.gate_counts();
    let depth_per_step = step.depth();
    let measurement_depth = 0;
    let b = q.bits as usize;
    Ok(ResourceReport {
        n_sites: q.n_sites,
        bits: q.bits,
        ancilla_budget: q.ancilla,
        order: q.order,
        mode: q.mode,
        t: q.t,
        epsilon: q.epsilon,
        qubits_serial: kinetic_footprint(q.n_sites, q.bits, q.ancilla, ScheduleMode::Serial),
        qubits_parallel: kinetic_footprint(q.n_sites, q.bits, q.ancilla, ScheduleMode::Parallel),
        qubits_total_formula: qubits_total_formula(q.n_sites, q.bits),
        gate_counts: counts,
        total_gates: counts.total() * n,
        depth_per_step,
        trotter_steps: n,
        total_depth: n * depth_per_step + measurement_depth,
        measurement_depth,
        kinetic_layer_depth: kin.depth(),
        kinetic_depth_linear_model: b,
        kinetic_depth_quadratic_model: b * b,
    })
}

/// The three illustrative rows `(N, b=6, a=12)` for `N ∈ {8, 16, 32}`.
pub fn table1() -> Result<Vec<ResourceReport>> {
    [8, 16, 32]
        .into_iter()
        .map(|n| {
            resource_report(&ResourceQuery {
                n_sites: n,
                bits: 6,
                ancilla: 12,
                order: TrotterOrder::Second,
                t: 1.0,
                epsilon: 0.01,
                mode: ScheduleMode::Parallel,
            })
        })
        .collect()
}

/// Text form: a `qubits N` header, an optional `global_phase φ` line, then one
/// line per gate (`KIND[:level] operands [angle] [@tag]`), `barrier` lines
/// and trailing `mirror c0 c1 u0 u1` records.
pub fn export_ir_text(ir: &CircuitIR) -> String {
    let mut out = String::new();
    writeln!(out, "qubits {}", ir.n_qubits).unwrap();
    if ir.global_phase != 0.0 {
        writeln!(out, "global_phase {:?}", ir.global_phase).unwrap();
    }
    let mut barriers = ir.barriers.iter().peekable();
    for (i, (g, tag)) in ir.gates.iter().zip(&ir.tags).enumerate() {
        while barriers.next_if(|&&b| b == i).is_some() {
            out.push_str("barrier\n");
        }
        out.push_str(g.kind.mnemonic());
        if let GateKind::CPhase(l) = g.kind {
            write!(out, ":{l}").unwrap();
        }
        for q in &g.operands {
            write!(out, " {q}").unwrap();
        }
        if let GateKind::Rz(a) | GateKind::Phase(a) = g.kind {
            write!(out, " {a:?}").unwrap();
        }
        if let Some(t) = tag {
            write!(out, " @{}", t.name()).unwrap();
        }
        out.push('\n');
    }
    for _ in barriers {
        out.push_str("barrier\n");
    }
    for m in &ir.mirrors {
        writeln!(
            out,
            "mirror {} {} {} {}",
            m.compute.start, m.compute.end, m.uncompute.start, m.uncompute.end
        )
        .unwrap();
    }
    out
}

fn parse_err(line: usize, reason: impl Into<String>) -> Error {
    Error::Parse {
        line,
        reason: reason.into(),
    }
}

fn parse_num<T: FromStr>(tok: &str, line: usize) -> Result<T> {
    tok.parse()
        .map_err(|_| parse_err(line, format!("bad number {tok:?}")))
}

/// Inverse of [`export_ir_text`].
pub fn parse_ir_text(text: &str) -> Result<CircuitIR> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (ln, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, "missing `qubits` header"))?;
    let n = match header.split_whitespace().collect::<Vec<_>>()[..] {
        ["qubits", n] => parse_num(n, ln)?,
        _ => return Err(parse_err(ln, "expected `qubits N`")),
    };
    let mut ir = CircuitIR::new(n);
    for (ln, line) in lines {
        let mut toks: Vec<&str> = line.split_whitespace().collect();
        let tag = match toks.last() {
            Some(t) if t.starts_with('@') => {
                let t = t[1..]
                    .parse::<LayerTag>()
                    .map_err(|e| parse_err(ln, e.to_string()))?;
                toks.pop();
                Some(t)
            }
            _ => None,
        };
        let (head, rest) = toks.split_first().expect("non-empty line");
        match *head {
            "global_phase" if rest.len() == 1 => ir.global_phase = parse_num(rest[0], ln)?,
            "barrier" if rest.is_empty() => ir.barrier_at(ir.len()),
            "mirror" if rest.len() == 4 => {
                let v: Vec<usize> = rest
                    .iter()
                    .map(|t| parse_num(t, ln))
                    .collect::<Result<_>>()?;
                if v[1] > ir.len() || v[3] > ir.len() || v[0] > v[1] || v[2] > v[3] {
                    return Err(parse_err(ln, "mirror range outside the gate list"));
                }
                ir.mirrors.push(Mirror {
                    compute: v[0]..v[1],
                    uncompute: v[2]..v[3],
                });
            }
            _ => {
                let (name, level) = match head.split_once(':') {
                    Some((n, l)) => (n, Some(parse_num::<u32>(l, ln)?)),
                    None => (*head, None),
                };
                let angled = matches!(name, "RZ" | "PHASE");
                let (ops, angle) = if angled {
                    let (a, ops) = rest
                        .split_last()
                        .ok_or_else(|| parse_err(ln, "missing angle"))?;
                    (ops, Some(parse_num::<f64>(a, ln)?))
                } else {
                    (rest, None)
                };
                let kind = match (name, level, angle) {
                    ("H", None, None) => GateKind::H,
                    ("CPHASE", Some(l), None) => GateKind::CPhase(l),
                    ("RZ", None, Some(a)) => GateKind::Rz(a),
                    ("PHASE", None, Some(a)) => GateKind::Phase(a),
                    ("CNOT", None, None) => GateKind::Cnot,
                    ("TOFFOLI", None, None) => GateKind::Toffoli,
                    _ => return Err(parse_err(ln, format!("unrecognized line {line:?}"))),
                };
                let ops: Vec<usize> = ops
                    .iter()
                    .map(|t| parse_num(t, ln))
                    .collect::<Result<_>>()?;
                ir.push(kind, &ops, tag)
                    .map_err(|e| parse_err(ln, e.to_string()))?;
            }
        }
    }
    Ok(ir)
}

impl CircuitIR {
    fn barrier_at(&mut self, at: usize) {
        self.barriers.push(at);
    }
}
