//! Run configuration: a sectioned TOML file where every key has a default.

use std::fmt;
use std::path::{Path, PathBuf};

use fput_core::circuit::ScheduleMode;
use fput_core::correlator::Estimator;
use fput_core::state::DEFAULT_MAX_QUBITS;
use fput_core::{EncodingKind, GridSpec, ModelParams, TrotterOrder};
use serde::Deserialize;

/// Configuration problem, with the 1-based line it refers to when known.
#[derive(Debug)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "config line {l}: {}", self.message),
            None => write!(f, "config: {}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub n_sites: usize,
    pub mass: f64,
    pub kappa: f64,
    pub beta: f64,
    pub lattice_spacing: f64,
    pub hbar: f64,
}

impl Default for ModelSection {
    fn default() -> Self {
        let p = ModelParams::default();
        Self {
            n_sites: p.n_sites,
            mass: p.mass,
            kappa: p.kappa,
            beta: p.beta,
            lattice_spacing: p.lattice_spacing,
            hbar: p.hbar,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub bits: u32,
    /// Half-width; derived from the highest normal-mode frequency if unset.
    pub q_max: Option<f64>,
    pub encoding: String,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            bits: 4,
            q_max: None,
            encoding: "offset".into(),
        }
    }
}

/// Initial product Gaussian. `centers` wins over `mode_amplitude`; with
/// neither, every site sits on the grid midpoint.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StateSection {
    pub width: Option<f64>,
    pub centers: Option<Vec<f64>>,
    /// Displaces site `j` by `A·cos(2πjk/N)` for the correlator mode `k`.
    pub mode_amplitude: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrotterSection {
    pub order: String,
    pub dt: f64,
    pub steps: usize,
}

impl Default for TrotterSection {
    fn default() -> Self {
        Self {
            order: "second".into(),
            dt: 0.01,
            steps: 100,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(String),
    Many(Vec<String>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorrelatorSection {
    pub mode_k: usize,
    pub h: f64,
    pub estimator: OneOrMany,
    pub times: Vec<f64>,
    pub shots: Option<u64>,
    pub seed: u64,
}

impl Default for CorrelatorSection {
    fn default() -> Self {
        Self {
            mode_k: 1,
            h: 0.05,
            estimator: OneOrMany::One("richardson".into()),
            times: vec![0.0, 0.5, 1.0],
            shots: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResourcesSection {
    /// Ancilla budget `a`; defaults to `2b`.
    pub ancilla: Option<usize>,
    pub t: f64,
    pub epsilon: f64,
    pub mode: String,
    /// Also write the one-step circuit in IR text form.
    pub export_ir: bool,
}

impl Default for ResourcesSection {
    fn default() -> Self {
        Self {
            ancilla: None,
            t: 1.0,
            epsilon: 0.01,
            mode: "parallel".into(),
            export_ir: false,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub directory: PathBuf,
    pub format: String,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("fput-out"),
            format: "csv".into(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LimitsSection {
    /// Largest statevector, in qubits `N·b`, any command may allocate.
    pub max_qubits: usize,
}

impl Default for LimitsSection {
    fn default() -> Self {
        Self {
            max_qubits: DEFAULT_MAX_QUBITS,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidateSection {
    /// Swap the inverse DFT for a forward one (negative control).
    pub broken_dft: bool,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawConfig {
    model: ModelSection,
    grid: GridSection,
    state: StateSection,
    trotter: TrotterSection,
    correlator: CorrelatorSection,
    resources: ResourcesSection,
    output: OutputSection,
    limits: LimitsSection,
    validate: ValidateSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Fully checked configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub params: ModelParams,
    pub bits: u32,
    pub q_max: Option<f64>,
    pub encoding: EncodingKind,
    pub state: StateSection,
    pub order: TrotterOrder,
    pub dt: f64,
    pub steps: usize,
    pub mode_k: usize,
    pub h: f64,
    pub estimators: Vec<Estimator>,
    pub times: Vec<f64>,
    pub shots: Option<u64>,
    pub seed: u64,
    pub ancilla: usize,
    pub resource_t: f64,
    pub epsilon: f64,
    pub schedule: ScheduleMode,
    pub export_ir: bool,
    pub output_dir: PathBuf,
    pub format: OutputFormat,
    pub max_qubits: usize,
    pub broken_dft: bool,
}

/// Line of `key` inside `[section]`, by a plain scan of the source text.
fn key_line(text: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = String::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            current = name.trim().to_string();
            continue;
        }
        if current == section {
            if let Some((k, _)) = line.split_once('=') {
                if k.trim() == key {
                    return Some(i + 1);
                }
            }
        }
    }
    None
}

struct Checker<'a> {
    text: &'a str,
}

impl Checker<'_> {
    fn err(&self, section: &str, key: &str, message: impl Into<String>) -> ConfigError {
        ConfigError {
            line: key_line(self.text, section, key),
            message: format!("{section}.{key}: {}", message.into()),
        }
    }

    fn positive(&self, section: &str, key: &str, v: f64) -> Result<f64, ConfigError> {
        if v.is_finite() && v > 0.0 {
            Ok(v)
        } else {
            Err(self.err(section, key, format!("{v} must be finite and > 0")))
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
            line: None,
            message: format!("cannot read {}: {e}", path.display()),
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError {
            line: e.span().map(|s| text[..s.start].matches('\n').count() + 1),
            message: e.message().to_string(),
        })?;
        let c = Checker { text };

        let m = &raw.model;
        let params = ModelParams {
            n_sites: m.n_sites,
            mass: m.mass,
            kappa: m.kappa,
            beta: m.beta,
            lattice_spacing: m.lattice_spacing,
            hbar: m.hbar,
        };
        if m.n_sites < 2 {
            return Err(c.err("model", "n_sites", format!("{} must be >= 2", m.n_sites)));
        }
        c.positive("model", "mass", m.mass)?;
        c.positive("model", "hbar", m.hbar)?;
        c.positive("model", "lattice_spacing", m.lattice_spacing)?;
        if !(m.kappa.is_finite() && m.kappa >= 0.0) {
            return Err(c.err(
                "model",
                "kappa",
                format!("{} must be finite and >= 0", m.kappa),
            ));
        }
        if !(m.beta.is_finite() && m.beta >= 0.0) {
            return Err(c.err(
                "model",
                "beta",
                format!("{} must be finite and >= 0", m.beta),
            ));
        }
        params
            .validate()
            .map_err(|e| c.err("model", "n_sites", e.to_string()))?;

        let g = &raw.grid;
        let encoding: EncodingKind = g
            .encoding
            .parse()
            .map_err(|e: fput_core::Error| c.err("grid", "encoding", e.to_string()))?;
        if !(2..=12).contains(&g.bits) {
            return Err(c.err("grid", "bits", format!("{} must lie in 2..=12", g.bits)));
        }
        if let Some(q) = g.q_max {
            c.positive("grid", "q_max", q)?;
        } else if params.kappa == 0.0 {
            return Err(c.err(
                "model",
                "kappa",
                "is 0, so grid.q_max must be set explicitly",
            ));
        }

        let s = &raw.state;
        if let Some(w) = s.width {
            c.positive("state", "width", w)?;
        } else if params.kappa == 0.0 {
            return Err(c.err(
                "model",
                "kappa",
                "is 0, so state.width must be set explicitly",
            ));
        }
        if let Some(cs) = &s.centers {
            if cs.len() != params.n_sites {
                return Err(c.err(
                    "state",
                    "centers",
                    format!("expected {} values, got {}", params.n_sites, cs.len()),
                ));
            }
            if cs.iter().any(|v| !v.is_finite()) {
                return Err(c.err("state", "centers", "values must be finite"));
            }
        }
        if let Some(a) = s.mode_amplitude {
            if !a.is_finite() {
                return Err(c.err("state", "mode_amplitude", "must be finite"));
            }
        }

        let t = &raw.trotter;
        let order: TrotterOrder = t
            .order
            .parse()
            .map_err(|e: fput_core::Error| c.err("trotter", "order", e.to_string()))?;
        let dt = c.positive("trotter", "dt", t.dt)?;

        let k = &raw.correlator;
        if k.mode_k >= params.n_sites {
            return Err(c.err(
                "correlator",
                "mode_k",
                format!("{} must be < n_sites = {}", k.mode_k, params.n_sites),
            ));
        }
        let h = c.positive("correlator", "h", k.h)?;
        let names = match &k.estimator {
            OneOrMany::One(s) => vec![s.clone()],
            OneOrMany::Many(v) => v.clone(),
        };
        if names.is_empty() {
            return Err(c.err(
                "correlator",
                "estimator",
                "at least one estimator is required",
            ));
        }
        let estimators = names
            .iter()
            .map(|n| n.parse::<Estimator>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| c.err("correlator", "estimator", e.to_string()))?;
        for &time in &k.times {
            if !(time.is_finite() && time >= 0.0) {
                return Err(c.err(
                    "correlator",
                    "times",
                    format!("{time} must be finite and >= 0"),
                ));
            }
            fput_core::propagator::steps_for_time(time, dt).map_err(|_| {
                c.err(
                    "correlator",
                    "times",
                    format!("{time} is not a multiple of trotter.dt = {dt}"),
                )
            })?;
        }
        if k.shots == Some(0) {
            return Err(c.err("correlator", "shots", "must be >= 1"));
        }

        let r = &raw.resources;
        let ancilla = r.ancilla.unwrap_or(2 * g.bits as usize);
        if ancilla < g.bits as usize {
            return Err(c.err(
                "resources",
                "ancilla",
                format!("{ancilla} must be >= grid.bits = {}", g.bits),
            ));
        }
        c.positive("resources", "t", r.t)?;
        if !(r.epsilon > 0.0 && r.epsilon < 1.0) {
            return Err(c.err(
                "resources",
                "epsilon",
                format!("{} must lie in (0, 1)", r.epsilon),
            ));
        }
        let schedule: ScheduleMode = r
            .mode
            .parse()
            .map_err(|e: fput_core::Error| c.err("resources", "mode", e.to_string()))?;

        let format = match raw.output.format.as_str() {
            "csv" => OutputFormat::Csv,
            "json" => OutputFormat::Json,
            other => {
                return Err(c.err(
                    "output",
                    "format",
                    format!("unknown format {other:?} (expected csv or json)"),
                ))
            }
        };
        if raw.limits.max_qubits == 0 {
            return Err(c.err("limits", "max_qubits", "must be >= 1"));
        }

        Ok(RunConfig {
            params,
            bits: g.bits,
            q_max: g.q_max,
            encoding,
            state: raw.state.clone(),
            order,
            dt,
            steps: t.steps,
            mode_k: k.mode_k,
            h,
            estimators,
            times: k.times.clone(),
            shots: k.shots,
            seed: k.seed,
            ancilla,
            resource_t: r.t,
            epsilon: r.epsilon,
            schedule,
            export_ir: r.export_ir,
            output_dir: raw.output.directory.clone(),
            format,
            max_qubits: raw.limits.max_qubits,
            broken_dft: raw.validate.broken_dft,
        })
    }

    pub fn grid(&self) -> fput_core::Result<GridSpec> {
        match self.q_max {
            Some(q) => GridSpec::new(self.bits, q, self.encoding),
            None => GridSpec::with_default_q_max(&self.params, self.bits, self.encoding),
        }
    }

    pub fn qubits(&self) -> usize {
        self.params.n_sites * self.bits as usize
    }
}
