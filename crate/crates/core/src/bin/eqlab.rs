use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use eqlab::harness::{self, ExperimentConfig, HamiltonianSource, Mode};
use eqlab::stats;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    CheckGaps,
    Theorem1,
    Corollary,
    Subsystem,
    Universality,
    Counterexample,
    Sweep,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::CheckGaps => Mode::CheckGaps,
            ModeArg::Theorem1 => Mode::Theorem1,
            ModeArg::Corollary => Mode::Corollary,
            ModeArg::Subsystem => Mode::Subsystem,
            ModeArg::Universality => Mode::Universality,
            ModeArg::Counterexample => Mode::Counterexample,
            ModeArg::Sweep => Mode::Sweep,
        }
    }
}

/// Equilibration bounds for finite-dimensional quantum systems.
///
/// Exit status: 0 when every checked inequality holds, 2 when a bound is
/// violated (or the gap condition fails for check-gaps), 1 on error.
#[derive(Debug, Parser)]
#[command(name = "eqlab", version)]
struct Cli {
    mode: ModeArg,
    /// Experiment configuration (JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for report.json and series.csv; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Ancilla dimension for the counterexample.
    #[arg(long)]
    k: Option<usize>,
    /// Hamiltonian file, overriding the config.
    #[arg(long)]
    hamiltonian: Option<PathBuf>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
}

fn configure(cli: &Cli) -> eqlab::Result<ExperimentConfig> {
    let mode = Mode::from(cli.mode);
    let mut config = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(m) = config.mode {
        if m != mode {
            return Err(eqlab::Error::config(
                "mode",
                format!("config says {} but {} was requested", m.name(), mode.name()),
            ));
        }
    }
    config.mode = Some(mode);
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(k) = cli.k {
        config.k = Some(k);
    }
    if let Some(path) = &cli.hamiltonian {
        let cwd = std::env::current_dir()?;
        config.hamiltonian = Some(HamiltonianSource::File(cwd.join(path)));
    }
    if cli.out.is_some() {
        config.out = cli.out.clone();
    } else if let Some(out) = &config.out {
        config.out = Some(config.resolve(out));
    }
    Ok(config)
}

fn execute(cli: &Cli) -> eqlab::Result<i32> {
    let config = configure(cli)?;
    let output = stats::with_threads(cli.threads, || harness::run(&config))??;
    match &config.out {
        Some(dir) => {
            output.write(dir)?;
            eprintln!(
                "{}: {} ({})",
                config.require_mode()?.name(),
                if output.report.passed { "pass" } else { "violation" },
                dir.join(harness::REPORT_FILE).display()
            );
        }
        None => println!("{}", output.report.to_json()?),
    }
    Ok(output.report.exit_code())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
