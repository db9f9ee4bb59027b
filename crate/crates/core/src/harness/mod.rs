//! Config-driven experiments with JSON reports and CSV time series.

mod config;
mod sweep;

use std::fs;
use std::path::Path;

use serde::Serialize;

pub use config::{
    ExperimentConfig, HamiltonianSource, MatrixSource, MeasurementSource, Mode, PartitionSource,
    ScalingSpec, SeriesSpec, SplitSpec, StateJson, StateSource, SweepSpec, SweepState,
    TimeAverageSpec,
};
pub use sweep::{
    sweep, InstanceRecord, Quantiles, ScalingDiagnostic, ScalingPoint, SubsystemRecord,
    SweepSummary,
};

use crate::distinguish::{self, CorollaryReport};
use crate::dynamics::{self, DensityOperator, Trajectory};
use crate::equilibration::{self, Theorem1Report};
use crate::error::{Error, Result};
use crate::matrixkit::{self, CMatrix};
use crate::spectral::{self, GapReport, Hamiltonian};
use crate::stats::Estimate;
use crate::subsystem::{self, SubsystemReport};
use crate::universality::{self, UniversalityReport};

pub const REPORT_FILE: &str = "report.json";
pub const SERIES_FILE: &str = "series.csv";

/// `H = sigma_x (x) I_k`, `rho0 = |0><0| (x) I_k / k`, `A = sigma_z (x) I_k`.
pub fn counterexample_system(k: usize) -> Result<(Hamiltonian, DensityOperator, CMatrix)> {
    if k == 0 {
        return Err(Error::config("k", "must be at least 1"));
    }
    let id = matrixkit::identity(k);
    let h = Hamiltonian::from_matrix(&matrixkit::tensor(&matrixkit::pauli_x(), &id))?;
    let zero = matrixkit::outer(&matrixkit::basis_vector(2, 0));
    let rho0 = DensityOperator::new(matrixkit::tensor(&zero, &id).unscale(k as f64))?;
    let a = matrixkit::tensor(&matrixkit::pauli_z(), &id);
    Ok((h, rho0, a))
}

#[derive(Clone, Debug, Serialize)]
pub struct CounterexampleReport {
    pub k: usize,
    pub sigma_sq: f64,
    pub delta: f64,
    pub d_eff: f64,
    pub purity_omega: f64,
    pub bound_delta: f64,
    pub reimann_purity_bound: f64,
    pub tight: bool,
    pub exceeds_purity_bound: bool,
    pub chain_holds: bool,
}

pub fn counterexample_report(k: usize) -> Result<CounterexampleReport> {
    let (h, rho0, a) = counterexample_system(k)?;
    let r = equilibration::theorem1_report(&h, &rho0, &a)?;
    Ok(CounterexampleReport {
        k,
        sigma_sq: r.sigma_sq,
        delta: r.delta,
        d_eff: r.d_eff,
        purity_omega: r.purity_omega,
        bound_delta: r.bound_delta,
        reimann_purity_bound: r.reimann_purity_bound,
        tight: r.tight,
        exceeds_purity_bound: r.exceeds_purity_bound,
        chain_holds: r.chain_holds,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct GapsResult {
    pub dim: usize,
    pub energies: Vec<f64>,
    pub gaps: GapReport,
}

#[derive(Clone, Debug, Serialize)]
pub struct Theorem1Result {
    pub dim: usize,
    pub theorem1: Theorem1Report,
    pub sampled_sigma_sq: Estimate,
}

#[derive(Clone, Debug, Serialize)]
#[serde(untagged)]
pub enum ReportBody {
    CheckGaps(GapsResult),
    Theorem1(Theorem1Result),
    Corollary(CorollaryReport),
    Subsystem(SubsystemReport),
    Universality(UniversalityReport),
    Counterexample(CounterexampleReport),
    Sweep(SweepSummary),
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub mode: Mode,
    pub seed: u64,
    /// Every asserted inequality holds.
    pub passed: bool,
    pub result: ReportBody,
}

impl Report {
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            2
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Time series with fixed column names; complex columns are split into
/// `_re` and `_im`.
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

impl Series {
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.columns)?;
        for row in &self.rows {
            out.write_record(row.iter().map(|x| format!("{x:.17e}")))?;
        }
        out.flush()?;
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub report: Report,
    pub series: Option<Series>,
}

impl RunOutput {
    /// Writes `report.json` and, when present, `series.csv` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join(REPORT_FILE), self.report.to_json()? + "\n")?;
        if let Some(series) = &self.series {
            series.write_csv(fs::File::create(dir.join(SERIES_FILE))?)?;
        }
        Ok(())
    }
}

fn expectation_series(h: &Hamiltonian, rho0: &DensityOperator, a: &CMatrix, times: &[f64]) -> Result<Series> {
    let traj = Trajectory::new(h, rho0)?;
    let rotated = traj.rotate(a);
    let mean = dynamics::dephase(h, rho0)?.expectation(a);
    let rows = times
        .iter()
        .map(|&t| {
            let e = traj.expectation(&rotated, t);
            vec![t, e.re, e.im, mean.re, mean.im]
        })
        .collect();
    Ok(Series {
        columns: vec!["t", "expectation_re", "expectation_im", "mean_re", "mean_im"],
        rows,
    })
}

fn distance_series(times: &[f64], values: Vec<f64>, bound: f64) -> Series {
    Series {
        columns: vec!["t", "distance", "bound"],
        rows: times.iter().zip(values).map(|(&t, v)| vec![t, v, bound]).collect(),
    }
}

/// Runs one experiment. Deterministic in `(config, seed)`.
pub fn run(config: &ExperimentConfig) -> Result<RunOutput> {
    let mode = config.require_mode()?;
    let seed = config.seed;
    let mut series = None;
    let (passed, result) = match mode {
        Mode::CheckGaps => {
            let h = config.build_hamiltonian()?;
            let gaps = spectral::check_nondegenerate_gaps(&h, h.default_gap_tolerance())?;
            let energies = h.energies();
            let passed = gaps.pass;
            (passed, ReportBody::CheckGaps(GapsResult { dim: h.dim(), energies, gaps }))
        }
        Mode::Theorem1 => {
            let h = config.build_hamiltonian()?;
            let rho0 = config.build_state(&h)?;
            let a = config.build_observable(h.dim())?;
            let conv = config.convention(&h)?;
            let theorem1 = equilibration::theorem1_report(&h, &rho0, &a)?;
            let sampled_sigma_sq = equilibration::sigma_sq_sampled(&h, &rho0, &a, &conv)?;
            if let Some(s) = &config.series {
                series = Some(expectation_series(&h, &rho0, &a, &s.times(conv.t_max))?);
            }
            (
                theorem1.chain_holds,
                ReportBody::Theorem1(Theorem1Result {
                    dim: h.dim(),
                    theorem1,
                    sampled_sigma_sq,
                }),
            )
        }
        Mode::Corollary => {
            let h = config.build_hamiltonian()?;
            let rho0 = config.build_state(&h)?;
            let partition = match &config.partition {
                Some(_) => Some(config.build_partition(&h)?),
                None => None,
            };
            let set = config.build_measurements(&h, partition.as_ref())?;
            let conv = config.convention(&h)?;
            let r = distinguish::corollary_report(&set, &h, &rho0, &conv)?;
            if let Some(s) = &config.series {
                let times = s.times(conv.t_max);
                let omega = dynamics::dephase(&h, &rho0)?;
                let values = distinguish::set_distance_series(&set, &h, &rho0, &omega, &times)?;
                series = Some(distance_series(&times, values, r.bound_weighted));
            }
            (r.holds, ReportBody::Corollary(r))
        }
        Mode::Subsystem => {
            let h = config.build_hamiltonian()?;
            let rho0 = config.build_state(&h)?;
            let split = config.build_split(h.dim())?;
            let conv = config.convention(&h)?;
            let r = subsystem::subsystem_report(&h, &rho0, split, &conv)?;
            if let Some(s) = &config.series {
                let times = s.times(conv.t_max);
                let values = subsystem::subsystem_distance_series(&h, &rho0, split, &times)?;
                series = Some(distance_series(&times, values, r.bound));
            }
            (r.holds || !r.gap_valid, ReportBody::Subsystem(r))
        }
        Mode::Universality => {
            let h = config.build_hamiltonian()?;
            let rho0 = config.build_state(&h)?;
            let partition = config.build_partition(&h)?;
            let set = config.build_measurements(&h, Some(&partition))?;
            let conv = config.convention(&h)?;
            let r = universality::universality_report(&set, &h, &rho0, &partition, config.band, &conv)?;
            if let Some(s) = &config.series {
                let times = s.times(conv.t_max);
                let omega_k = universality::equilibrium_state(&partition, config.band)?;
                let values = distinguish::set_distance_series(&set, &h, &rho0, &omega_k, &times)?;
                series = Some(distance_series(&times, values, r.bound));
            }
            (r.holds, ReportBody::Universality(r))
        }
        Mode::Counterexample => {
            let k = config.k.unwrap_or(5);
            let r = counterexample_report(k)?;
            if let Some(s) = &config.series {
                let (h, rho0, a) = counterexample_system(k)?;
                series = Some(expectation_series(&h, &rho0, &a, &s.times(2.0 * std::f64::consts::PI))?);
            }
            (r.chain_holds && r.tight, ReportBody::Counterexample(r))
        }
        Mode::Sweep => {
            let spec = config.sweep.clone().unwrap_or_default();
            let summary = sweep(&spec, seed)?;
            (summary.passed(), ReportBody::Sweep(summary))
        }
    };
    Ok(RunOutput {
        report: Report {
            mode,
            seed,
            passed,
            result,
        },
        series,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counterexample_values() {
        let r = counterexample_report(5).unwrap();
        assert!((r.sigma_sq - 0.5).abs() < 1e-9);
        assert!((r.delta - 2.0).abs() < 1e-12);
        assert!((r.d_eff - 2.0).abs() < 1e-12);
        assert!((r.purity_omega - 0.1).abs() < 1e-12);
        assert!((r.reimann_purity_bound - 0.4).abs() < 1e-12);
        assert!(r.tight && r.exceeds_purity_bound && r.chain_holds);
    }

    #[test]
    fn counterexample_series_oscillates() {
        let (h, rho0, a) = counterexample_system(2).unwrap();
        let s = expectation_series(&h, &rho0, &a, &[0.0, 0.25, 1.0]).unwrap();
        for row in &s.rows {
            assert!((row[1] - (2.0 * row[0]).cos()).abs() < 1e-12);
            assert!(row[3].abs() < 1e-12);
        }
    }

    #[test]
    fn series_csv_header() {
        let s = distance_series(&[0.0, 1.0], vec![0.5, 0.25], 1.0);
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,distance,bound\n"));
        assert_eq!(text.lines().count(), 3);
    }

    #[test]
    fn missing_fields_name_their_path() {
        let config = ExperimentConfig::from_json(r#"{"mode": "theorem1"}"#).unwrap();
        match run(&config) {
            Err(Error::Config { path, .. }) => assert_eq!(path, "hamiltonian"),
            other => panic!("{other:?}"),
        }
        assert!(ExperimentConfig::from_json(r#"{"mode": "theorem1", "bogus": 1}"#).is_err());
    }

    #[test]
    fn run_is_deterministic() {
        let text = r#"{
            "mode": "theorem1", "seed": 9,
            "hamiltonian": {"ensemble": {"kind": "gue", "dim": 6}},
            "state": "haar_pure",
            "observable": "random",
            "time_average": {"n_samples": 200}
        }"#;
        let config = ExperimentConfig::from_json(text).unwrap();
        let a = run(&config).unwrap().report.to_json().unwrap();
        let b = run(&config).unwrap().report.to_json().unwrap();
        assert_eq!(a, b);
    }
}
