use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use fput_core::circuit::{self, ResourceQuery, ResourceReport, TrotterCircuitSpec};
use fput_core::correlator::{self, CorrelatorRow, GeneratingFunction, ShotConfig};
use fput_core::propagator::DftPair;
use fput_core::validation::{self, ValidationOptions, ValidationReport};
use fput_core::{Execution, LatticeState, Propagator};
use serde::Serialize;

use crate::config::{ConfigError, OutputFormat, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_CAPACITY: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Core(#[from] fput_core::Error),
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{failed} of {total} validation checks failed")]
    Validation { failed: usize, total: usize },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(
                fput_core::Error::Capacity { .. } | fput_core::Error::OracleTooLarge { .. },
            ) => EXIT_CAPACITY,
            CliError::Validation { .. } => EXIT_VALIDATION,
            _ => EXIT_CONFIG,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Refuses any statevector above the configured ceiling, before allocating.
pub fn capacity_guard(cfg: &RunConfig) -> CliResult<()> {
    let requested = cfg.qubits();
    if requested > cfg.max_qubits {
        return Err(fput_core::Error::Capacity {
            requested,
            limit: cfg.max_qubits,
        }
        .into());
    }
    Ok(())
}

/// Initial product Gaussian described by the `[state]` section.
pub fn initial_state(cfg: &RunConfig) -> CliResult<LatticeState> {
    capacity_guard(cfg)?;
    let grid = cfg.grid()?;
    let width = match cfg.state.width {
        Some(w) => w,
        None => cfg.params.default_width()?,
    };
    let centers = match (&cfg.state.centers, cfg.state.mode_amplitude) {
        (Some(c), _) => Some(c.clone()),
        (None, Some(a)) => Some(validation::mode_displaced_centers(
            cfg.params.n_sites,
            cfg.mode_k,
            a,
        )?),
        (None, None) => None,
    };
    Ok(LatticeState::product_gaussian(
        &cfg.params,
        &grid,
        width,
        centers.as_deref(),
        cfg.max_qubits,
    )?)
}

fn propagator(cfg: &RunConfig, exec: Execution) -> CliResult<Propagator> {
    capacity_guard(cfg)?;
    Ok(Propagator::with_options(
        &cfg.params,
        &cfg.grid()?,
        exec,
        DftPair::Standard,
    )?)
}

fn create(dir: &Path, name: &str) -> CliResult<BufWriter<File>> {
    fs::create_dir_all(dir)?;
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn write_json<T: Serialize + ?Sized>(dir: &Path, name: &str, value: &T) -> CliResult<()> {
    let mut w = create(dir, name)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

fn extension(format: OutputFormat) -> &'static str {
    match format {
        OutputFormat::Csv => "csv",
        OutputFormat::Json => "json",
    }
}

/// One line of the simulate observables table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObservableRow {
    pub step: usize,
    pub t: f64,
    pub norm: f64,
    pub kinetic: f64,
    pub potential: f64,
    pub total: f64,
    pub displacements: Vec<f64>,
}

#[derive(Debug)]
pub struct SimulateOutput {
    pub rows: Vec<ObservableRow>,
    pub observables: PathBuf,
    pub checkpoint: PathBuf,
}

pub fn simulate(cfg: &RunConfig, exec: Execution) -> CliResult<SimulateOutput> {
    let mut state = initial_state(cfg)?;
    let prop = propagator(cfg, exec)?;
    let grid = *prop.grid();
    let mut rows = Vec::with_capacity(cfg.steps + 1);
    for step in 0..=cfg.steps {
        if step > 0 {
            prop.evolve_steps(&mut state, cfg.dt, cfg.order, 1)?;
        }
        let kinetic = prop.kinetic_expectation(&state)?;
        let potential = prop.potential_expectation(&state)?;
        rows.push(ObservableRow {
            step,
            t: step as f64 * cfg.dt,
            norm: state.norm(),
            kinetic,
            potential,
            total: kinetic + potential,
            displacements: state.mean_displacements(&grid),
        });
    }

    let name = format!("observables.{}", extension(cfg.format));
    let observables = cfg.output_dir.join(&name);
    match cfg.format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(create(&cfg.output_dir, &name)?);
            let mut header: Vec<String> = ["step", "t", "norm", "kinetic", "potential", "total"]
                .iter()
                .map(|s| s.to_string())
                .collect();
            header.extend((0..cfg.params.n_sites).map(|j| format!("q_{j}")));
            w.write_record(&header)?;
            for r in &rows {
                let mut rec = vec![
                    r.step.to_string(),
                    r.t.to_string(),
                    r.norm.to_string(),
                    r.kinetic.to_string(),
                    r.potential.to_string(),
                    r.total.to_string(),
                ];
                rec.extend(r.displacements.iter().map(f64::to_string));
                w.write_record(&rec)?;
            }
            w.flush()?;
        }
        OutputFormat::Json => write_json(&cfg.output_dir, &name, &rows)?,
    }

    let checkpoint = cfg.output_dir.join("state.chk");
    let mut w = create(&cfg.output_dir, "state.chk")?;
    state.write_checkpoint(&mut w)?;
    w.flush()?;
    Ok(SimulateOutput {
        rows,
        observables,
        checkpoint,
    })
}

#[derive(Debug)]
pub struct CorrelatorOutput {
    pub rows: Vec<CorrelatorRow>,
    pub path: PathBuf,
    /// Total circuit executions `4·N_τ·M`; zero in exact mode.
    pub n_exec: u64,
}

pub fn correlator(cfg: &RunConfig, exec: Execution) -> CliResult<CorrelatorOutput> {
    let shots = cfg.shots.map(|m| ShotConfig {
        shots: m,
        seed: cfg.seed,
    });
    let mut rows = Vec::new();
    if !cfg.times.is_empty() {
        let state = initial_state(cfg)?;
        let prop = propagator(cfg, exec)?;
        let gf = GeneratingFunction::new(&prop, &state, cfg.mode_k, cfg.order, cfg.dt)?;
        for e in correlator::correlator_series(&gf, &cfg.times, &cfg.estimators, cfg.h, shots)? {
            rows.push(CorrelatorRow {
                t: e.time_lag,
                h: cfg.h,
                estimator: e.estimator,
                re: e.value.re,
                im: e.value.im,
                bias_bound: e.bias_bound,
                shots: cfg.shots,
                seed: shots.map(|s| s.seed),
                n_exec: cfg.shots.map_or(0, |m| correlator::executions(1, m)),
            });
        }
    } else {
        capacity_guard(cfg)?;
    }
    let n_exec = cfg
        .shots
        .map_or(0, |m| correlator::executions(cfg.times.len(), m));

    let name = format!("correlator.{}", extension(cfg.format));
    let path = cfg.output_dir.join(&name);
    match cfg.format {
        OutputFormat::Csv => {
            let mut w = csv::WriterBuilder::new()
                .has_headers(false)
                .from_writer(create(&cfg.output_dir, &name)?);
            // serde writes the header only with the first row
            w.write_record([
                "t",
                "h",
                "estimator",
                "re",
                "im",
                "bias_bound",
                "shots",
                "seed",
                "n_exec",
            ])?;
            for r in &rows {
                w.serialize(r)?;
            }
            w.flush()?;
        }
        OutputFormat::Json => write_json(&cfg.output_dir, &name, &rows)?,
    }
    Ok(CorrelatorOutput { rows, path, n_exec })
}

#[derive(Debug)]
pub struct ResourcesOutput {
    pub reports: Vec<ResourceReport>,
    pub path: PathBuf,
    pub ir_path: Option<PathBuf>,
}

pub fn resources(cfg: &RunConfig, table1: bool) -> CliResult<ResourcesOutput> {
    if table1 {
        let reports = circuit::table1()?;
        let path = cfg.output_dir.join("table1.json");
        write_json(&cfg.output_dir, "table1.json", &reports)?;
        return Ok(ResourcesOutput {
            reports,
            path,
            ir_path: None,
        });
    }
    let query = ResourceQuery {
        n_sites: cfg.params.n_sites,
        bits: cfg.bits,
        ancilla: cfg.ancilla,
        order: cfg.order,
        t: cfg.resource_t,
        epsilon: cfg.epsilon,
        mode: cfg.schedule,
    };
    let report = circuit::resource_report(&query)?;
    let path = cfg.output_dir.join("resources.json");
    write_json(&cfg.output_dir, "resources.json", &report)?;
    let ir_path = if cfg.export_ir {
        let ir = circuit::build_trotter_circuit(&TrotterCircuitSpec {
            n_sites: query.n_sites,
            bits: query.bits,
            ancilla: query.ancilla,
            order: query.order,
            n_steps: 1,
            mode: query.mode,
            merge_kinetic: false,
        })?;
        let mut w = create(&cfg.output_dir, "trotter_step.ir")?;
        w.write_all(circuit::export_ir_text(&ir).as_bytes())?;
        w.flush()?;
        Some(cfg.output_dir.join("trotter_step.ir"))
    } else {
        None
    };
    Ok(ResourcesOutput {
        reports: vec![report],
        path,
        ir_path,
    })
}

#[derive(Debug)]
pub struct ValidateOutput {
    pub report: ValidationReport,
    pub path: PathBuf,
}

/// Runs the full check suite and writes `validation.json`. A failed check is
/// reported through [`ValidateOutput::into_result`], after the file exists.
pub fn validate(cfg: &RunConfig) -> CliResult<ValidateOutput> {
    let opts = ValidationOptions {
        dft: if cfg.broken_dft {
            DftPair::BrokenInverse
        } else {
            DftPair::Standard
        },
    };
    let report = validation::run_validation(&opts);
    let path = cfg.output_dir.join("validation.json");
    write_json(&cfg.output_dir, "validation.json", &report)?;
    Ok(ValidateOutput { report, path })
}

impl ValidateOutput {
    pub fn into_result(self) -> CliResult<ValidationReport> {
        let failed = self.report.checks.iter().filter(|c| !c.passed).count();
        if failed > 0 {
            return Err(CliError::Validation {
                failed,
                total: self.report.checks.len(),
            });
        }
        Ok(self.report)
    }
}
