//! WebAssembly bindings for the demo page. Every export returns a JSON
//! string; the `*_json` functions hold the logic and run natively too.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use eqlab::dynamics::{self, DensityOperator, TimeAverageConvention, Trajectory};
use eqlab::equilibration;
use eqlab::harness;
use eqlab::random::{self, Purpose};
use eqlab::spectral::{self, Ensemble};
use eqlab::subsystem::{self, BipartiteSplit};

const MAX_DIM: usize = 64;
const MAX_POINTS: usize = 5000;

#[derive(Serialize)]
struct Trace {
    times: Vec<f64>,
    values: Vec<f64>,
    mean: f64,
    sigma_sq: f64,
    bound: f64,
    d_eff: f64,
}

#[derive(Serialize)]
struct CounterexampleTrace {
    report: harness::CounterexampleReport,
    trace: Trace,
}

#[derive(Serialize)]
struct ScanPoint {
    d_b: usize,
    d_eff: f64,
    average: f64,
    stderr: f64,
    bound: f64,
}

fn grid(t_max: f64, n_points: usize) -> Vec<f64> {
    let n = n_points.clamp(2, MAX_POINTS);
    (0..n).map(|i| t_max * i as f64 / (n - 1) as f64).collect()
}

fn trace(
    h: &spectral::Hamiltonian,
    rho0: &DensityOperator,
    a: &eqlab::matrixkit::CMatrix,
    times: Vec<f64>,
) -> eqlab::Result<Trace> {
    let traj = Trajectory::new(h, rho0)?;
    let rotated = traj.rotate(a);
    let values = times.iter().map(|&t| traj.expectation(&rotated, t).re).collect();
    let report = equilibration::theorem1_report(h, rho0, a)?;
    Ok(Trace {
        times,
        values,
        mean: dynamics::dephase(h, rho0)?.expectation(a).re,
        sigma_sq: report.sigma_sq,
        bound: report.bound_delta,
        d_eff: report.d_eff,
    })
}

/// Counterexample report with the `<sigma_z>` oscillation over two periods.
pub fn counterexample_json(k: usize, n_points: usize) -> eqlab::Result<String> {
    if k == 0 || k > MAX_DIM / 2 {
        return Err(eqlab::Error::BadDimension(k));
    }
    let report = harness::counterexample_report(k)?;
    let (h, rho0, a) = harness::counterexample_system(k)?;
    let trace = trace(&h, &rho0, &a, grid(2.0 * std::f64::consts::PI, n_points))?;
    Ok(serde_json::to_string(&CounterexampleTrace { report, trace })?)
}

/// `tr(A rho(t))` for a GUE Hamiltonian, a Haar-random pure state and a
/// random Hermitian observable, with the mean and Theorem 1 bound.
pub fn expectation_trace_json(d: usize, seed: u64, t_max: f64, n_points: usize) -> eqlab::Result<String> {
    if !(2..=MAX_DIM).contains(&d) {
        return Err(eqlab::Error::BadDimension(d));
    }
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(eqlab::Error::config("t_max", "must be positive"));
    }
    let h = spectral::random_hamiltonian_with(d, Ensemble::Gue, &mut random::stream(seed, 0, Purpose::Hamiltonian))?;
    let rho0 = DensityOperator::haar_pure(d, &mut random::stream(seed, 0, Purpose::State));
    let a = random::random_hermitian(d, &mut random::stream(seed, 0, Purpose::Observable));
    Ok(serde_json::to_string(&trace(&h, &rho0, &a, grid(t_max, n_points))?)?)
}

/// Sampled `<D(rho_S(t), omega_S)>` against its bound for `d_B = 1, 2, 4, ...`
/// up to `d_b_max`.
pub fn subsystem_scan_json(d_s: usize, d_b_max: usize, seed: u64, n_samples: usize) -> eqlab::Result<String> {
    if d_s < 2 || d_s * d_b_max > MAX_DIM {
        return Err(eqlab::Error::BadDimension(d_s * d_b_max));
    }
    let mut points = Vec::new();
    let mut d_b = 1;
    while d_b <= d_b_max {
        let split = BipartiteSplit::new(d_s, d_b)?;
        let d = split.dim();
        let index = d_b as u64;
        let h = spectral::random_hamiltonian_with(d, Ensemble::Gue, &mut random::stream(seed, index, Purpose::Hamiltonian))?;
        let rho0 = DensityOperator::haar_pure(d, &mut random::stream(seed, index, Purpose::State));
        let conv = TimeAverageConvention::for_hamiltonian(&h, n_samples.clamp(1, MAX_POINTS), seed ^ index);
        let r = subsystem::subsystem_report(&h, &rho0, split, &conv)?;
        points.push(ScanPoint {
            d_b,
            d_eff: r.d_eff,
            average: r.estimate,
            stderr: r.stderr,
            bound: r.bound,
        });
        d_b *= 2;
    }
    Ok(serde_json::to_string(&points)?)
}

fn js(r: eqlab::Result<String>) -> Result<String, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn counterexample(k: usize, n_points: usize) -> Result<String, JsError> {
    js(counterexample_json(k, n_points))
}

#[wasm_bindgen]
pub fn expectation_trace(d: usize, seed: u32, t_max: f64, n_points: usize) -> Result<String, JsError> {
    js(expectation_trace_json(d, seed as u64, t_max, n_points))
}

#[wasm_bindgen]
pub fn subsystem_scan(d_s: usize, d_b_max: usize, seed: u32, n_samples: usize) -> Result<String, JsError> {
    js(subsystem_scan_json(d_s, d_b_max, seed as u64, n_samples))
}
