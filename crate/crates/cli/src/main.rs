use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fput_cli::commands::{self, CliResult, EXIT_CONFIG, EXIT_OK};
use fput_cli::config::{ConfigError, RunConfig};
use fput_core::Execution;

#[derive(Debug, Parser)]
#[command(
    name = "fput",
    version,
    about = "Digital simulation of the quantum beta-FPUT chain"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML run configuration; every key has a default.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Worker threads for amplitude kernels and generating-function sweeps.
    #[arg(long, global = true, value_name = "K", default_value_t = 1)]
    jobs: usize,

    /// Overrides correlator.seed.
    #[arg(long, global = true, value_name = "S")]
    seed: Option<u64>,

    /// Overrides output.directory.
    #[arg(long, global = true, value_name = "DIR")]
    output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Trotter evolution with per-step observables and a final checkpoint.
    Simulate,
    /// Mode correlator estimates from quadrature generating functions.
    Correlator,
    /// Logical resource report for the configured Trotter circuit.
    Resources {
        /// Print the (N, b=6, a=12) rows for N in {8, 16, 32} instead.
        #[arg(long)]
        table1: bool,
    },
    /// Runs the oracle-scale check suite.
    Validate,
}

fn load(cli: &Cli) -> CliResult<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::parse("")?,
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(dir) = &cli.output {
        cfg.output_dir = dir.clone();
    }
    Ok(cfg)
}

fn execution(jobs: usize) -> CliResult<Execution> {
    match jobs {
        0 => Err(ConfigError {
            line: None,
            message: "--jobs must be >= 1".into(),
        }
        .into()),
        1 => Ok(Execution::Sequential),
        _ if cfg!(feature = "parallel") => Ok(Execution::Parallel),
        _ => {
            log::warn!("built without the parallel feature; --jobs {jobs} runs sequentially");
            Ok(Execution::Sequential)
        }
    }
}

fn run(cli: &Cli) -> CliResult<()> {
    let cfg = load(cli)?;
    let exec = execution(cli.jobs)?;
    match cli.command {
        Command::Simulate => {
            let out = commands::simulate(&cfg, exec)?;
            let last = out.rows.last().expect("initial row always present");
            println!(
                "simulate: {} steps, final norm {:.15}, total energy {} -> {}",
                cfg.steps, last.norm, out.rows[0].total, last.total
            );
            println!("wrote {}", out.observables.display());
            println!("wrote {}", out.checkpoint.display());
        }
        Command::Correlator => {
            let out = commands::correlator(&cfg, exec)?;
            println!(
                "correlator: {} rows, N_tau = {}, M = {}, N_exec = {}",
                out.rows.len(),
                cfg.times.len(),
                cfg.shots.map_or("exact".to_string(), |m| m.to_string()),
                out.n_exec
            );
            println!("wrote {}", out.path.display());
        }
        Command::Resources { table1 } => {
            let out = commands::resources(&cfg, table1)?;
            for r in &out.reports {
                println!(
                    "N={} b={} a={} qubits serial={} parallel={} total_formula={} gates/step={} depth/step={} steps={} total_depth={}",
                    r.n_sites,
                    r.bits,
                    r.ancilla_budget,
                    r.qubits_serial,
                    r.qubits_parallel,
                    r.qubits_total_formula,
                    r.gate_counts.total(),
                    r.depth_per_step,
                    r.trotter_steps,
                    r.total_depth
                );
            }
            println!("wrote {}", out.path.display());
            if let Some(p) = out.ir_path {
                println!("wrote {}", p.display());
            }
        }
        Command::Validate => {
            let out = commands::validate(&cfg)?;
            for c in &out.report.checks {
                println!(
                    "{} {:<26} {:>7.2}s  {}",
                    if c.passed { "pass" } else { "FAIL" },
                    c.name,
                    c.seconds,
                    c.detail
                );
            }
            println!("wrote {}", out.path.display());
            out.into_result()?;
        }
    }
    Ok(())
}

fn run_in_pool(cli: &Cli) -> CliResult<()> {
    #[cfg(feature = "parallel")]
    if cli.jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.jobs)
            .build()
            .map_err(|e| ConfigError {
                line: None,
                message: format!("cannot start {} worker threads: {e}", cli.jobs),
            })?;
        return pool.install(|| run(cli));
    }
    run(cli)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run_in_pool(&cli) {
        Ok(()) => ExitCode::from(EXIT_OK as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
