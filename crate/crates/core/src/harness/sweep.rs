use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::config::{ScalingSpec, SweepSpec, SweepState};
use crate::dynamics::{self, DensityOperator, TimeAverageConvention};
use crate::equilibration::{self, BOUND_SLACK};
use crate::error::{Error, Result};
use crate::matrixkit;
use crate::random::{self, Purpose};
use crate::spectral::{self, Ensemble};
use crate::stats;
use crate::subsystem::{self, BipartiteSplit};

/// Offset separating subsystem instance streams from Theorem 1 streams.
const SCALING_INDEX_OFFSET: u64 = 1 << 32;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub index: u64,
    pub d: usize,
    pub gap_valid: bool,
    pub d_eff: f64,
    pub sigma_sq: Option<f64>,
    pub delta: f64,
    pub operator_norm: f64,
    pub bound_delta: f64,
    pub bound_norm: f64,
    /// `sigma^2 4 d_eff / Delta^2`
    pub ratio: Option<f64>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubsystemRecord {
    pub index: u64,
    pub d_s: usize,
    pub d_b: usize,
    pub gap_valid: bool,
    pub d_eff: f64,
    pub bound: f64,
    pub average: f64,
    pub stderr: f64,
    /// `<D> / bound`
    pub ratio: f64,
    /// `<D> sqrt(d_eff)`
    pub scaled_distance: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quantiles {
    pub q05: f64,
    pub q25: f64,
    pub q50: f64,
    pub q75: f64,
    pub q95: f64,
}

impl Quantiles {
    fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        Some(Quantiles {
            q05: stats::quantile(values, 0.05),
            q25: stats::quantile(values, 0.25),
            q50: stats::quantile(values, 0.5),
            q75: stats::quantile(values, 0.75),
            q95: stats::quantile(values, 0.95),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub d_b: usize,
    pub instances: usize,
    pub median_average: f64,
    pub median_bound: f64,
    pub median_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingDiagnostic {
    pub d_s: usize,
    pub points: Vec<ScalingPoint>,
    pub ratio_below_one: bool,
    pub ratio_decreasing: bool,
    pub average_decreasing: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub seed: u64,
    pub instances: Vec<InstanceRecord>,
    pub subsystem: Vec<SubsystemRecord>,
    pub max_ratio: Option<f64>,
    /// Failed Theorem 1 checks among gap-valid instances.
    pub violation_count: usize,
    /// Failed subsystem checks among gap-valid instances.
    pub subsystem_violations: usize,
    pub scaled_distance_quantiles: Option<Quantiles>,
    pub scaling: Option<ScalingDiagnostic>,
}

impl SweepSummary {
    pub fn passed(&self) -> bool {
        self.violation_count == 0 && self.subsystem_violations == 0
    }
}

fn draw_state(state: &SweepState, d: usize, seed: u64, index: u64) -> Result<DensityOperator> {
    let mut rng = random::stream(seed, index, Purpose::State);
    match state {
        SweepState::HaarPure => Ok(DensityOperator::haar_pure(d, &mut rng)),
        SweepState::RandomMixed { rank } => {
            if *rank == 0 || *rank > d {
                return Err(Error::config("sweep.state.random_mixed.rank", format!("must lie in 1..={d}")));
            }
            Ok(DensityOperator::random_mixed(d, *rank, &mut rng))
        }
    }
}

pub(crate) fn theorem1_instance(
    ensemble: Ensemble,
    state: &SweepState,
    d: usize,
    seed: u64,
    index: u64,
) -> Result<InstanceRecord> {
    let h = spectral::random_hamiltonian_with(d, ensemble, &mut random::stream(seed, index, Purpose::Hamiltonian))?;
    let rho0 = draw_state(state, d, seed, index)?;
    let a = random::ginibre(d, &mut random::stream(seed, index, Purpose::Observable));
    let gap_valid = spectral::check_nondegenerate_gaps(&h, h.default_gap_tolerance())?.pass;
    let d_eff = dynamics::effective_dimension(&h, &rho0)?;
    let delta = equilibration::delta(&a)?;
    let operator_norm = matrixkit::operator_norm(&a);
    let bound_delta = delta * delta / (4.0 * d_eff);
    let bound_norm = operator_norm * operator_norm / d_eff;
    let sigma_sq = if gap_valid {
        Some(equilibration::sigma_sq_exact(&h, &rho0, &a)?)
    } else {
        None
    };
    let ratio = sigma_sq.map(|s| s * 4.0 * d_eff / (delta * delta));
    let pass = sigma_sq.is_none_or(|s| {
        s <= bound_delta + BOUND_SLACK && bound_delta <= bound_norm + BOUND_SLACK
    });
    Ok(InstanceRecord {
        index,
        d,
        gap_valid,
        d_eff,
        sigma_sq,
        delta,
        operator_norm,
        bound_delta,
        bound_norm,
        ratio,
        pass,
    })
}

pub(crate) fn subsystem_instance(
    ensemble: Ensemble,
    split: BipartiteSplit,
    n_samples: usize,
    seed: u64,
    index: u64,
) -> Result<SubsystemRecord> {
    let d = split.dim();
    let h = spectral::random_hamiltonian_with(d, ensemble, &mut random::stream(seed, index, Purpose::Hamiltonian))?;
    let rho0 = draw_state(&SweepState::HaarPure, d, seed, index)?;
    let time_seed = random::stream(seed, index, Purpose::Times).next_u64();
    let conv = TimeAverageConvention::for_hamiltonian(&h, n_samples, time_seed);
    let r = subsystem::subsystem_report(&h, &rho0, split, &conv)?;
    Ok(SubsystemRecord {
        index,
        d_s: r.d_s,
        d_b: r.d_b,
        gap_valid: r.gap_valid,
        d_eff: r.d_eff,
        bound: r.bound,
        average: r.estimate,
        stderr: r.stderr,
        ratio: r.estimate / r.bound,
        scaled_distance: r.estimate * r.d_eff.sqrt(),
        pass: r.holds || !r.gap_valid,
    })
}

fn strictly_decreasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] < w[0])
}

fn scaling_diagnostic(spec: &ScalingSpec, records: &[SubsystemRecord]) -> ScalingDiagnostic {
    let points: Vec<ScalingPoint> = spec
        .d_b
        .iter()
        .map(|&d_b| {
            let group: Vec<&SubsystemRecord> = records.iter().filter(|r| r.d_b == d_b).collect();
            let pick = |f: fn(&SubsystemRecord) -> f64| stats::median(&group.iter().map(|r| f(r)).collect::<Vec<_>>());
            ScalingPoint {
                d_b,
                instances: group.len(),
                median_average: pick(|r| r.average),
                median_bound: pick(|r| r.bound),
                median_ratio: pick(|r| r.ratio),
            }
        })
        .collect();
    let ratios: Vec<f64> = points.iter().map(|p| p.median_ratio).collect();
    let averages: Vec<f64> = points.iter().map(|p| p.median_average).collect();
    ScalingDiagnostic {
        d_s: spec.d_s,
        ratio_below_one: ratios.iter().all(|&r| r <= 1.0),
        ratio_decreasing: strictly_decreasing(&ratios),
        average_decreasing: strictly_decreasing(&averages),
        points,
    }
}

/// Seeded ensemble run. Every instance draws from streams keyed by
/// `(seed, index)`, so the summary does not depend on scheduling.
pub fn sweep(spec: &SweepSpec, seed: u64) -> Result<SweepSummary> {
    if spec.instances == 0 && spec.scaling.is_none() {
        return Err(Error::config("sweep.instances", "nothing to run"));
    }
    let jobs: Vec<(usize, u64)> = spec
        .dims
        .iter()
        .enumerate()
        .flat_map(|(j, &d)| (0..spec.instances).map(move |i| (d, (j * spec.instances + i) as u64)))
        .collect();
    let instances = stats::par_map(&jobs, |&(d, index)| {
        theorem1_instance(spec.ensemble, &spec.state, d, seed, index)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let mut subsystem_records = Vec::new();
    let mut scaling = None;
    if let Some(sc) = &spec.scaling {
        let splits = sc
            .d_b
            .iter()
            .map(|&d_b| BipartiteSplit::new(sc.d_s, d_b))
            .collect::<Result<Vec<_>>>()?;
        let jobs: Vec<(BipartiteSplit, u64)> = splits
            .iter()
            .enumerate()
            .flat_map(|(j, &split)| {
                (0..sc.instances).map(move |i| (split, SCALING_INDEX_OFFSET + (j * sc.instances + i) as u64))
            })
            .collect();
        subsystem_records = stats::par_map(&jobs, |&(split, index)| {
            subsystem_instance(spec.ensemble, split, sc.n_samples, seed, index)
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        scaling = Some(scaling_diagnostic(sc, &subsystem_records));
    }

    let max_ratio = instances
        .iter()
        .filter_map(|r| r.ratio)
        .fold(None, |m: Option<f64>, r| Some(m.map_or(r, |m| m.max(r))));
    let violation_count = instances.iter().filter(|r| r.gap_valid && !r.pass).count();
    let subsystem_violations = subsystem_records
        .iter()
        .filter(|r| r.gap_valid && !r.pass)
        .count();
    let scaled: Vec<f64> = subsystem_records.iter().map(|r| r.scaled_distance).collect();
    Ok(SweepSummary {
        seed,
        instances,
        subsystem: subsystem_records,
        max_ratio,
        violation_count,
        subsystem_violations,
        scaled_distance_quantiles: Quantiles::of(&scaled),
        scaling,
    })
}
