//! Fluctuations of `tr(A rho(t))` about their time average and the
//! bound `sigma_A^2 <= Delta(A)^2 / (4 d_eff) <= ||A||^2 / d_eff`.

use serde::{Deserialize, Serialize};

use crate::dynamics::{self, DensityOperator, TimeAverageConvention, Trajectory};
use crate::error::{Error, Result};
use crate::matrixkit::{self, CMatrix, CVector, C64};
use crate::spectral::{self, Hamiltonian};
use crate::stats::{self, Estimate};

/// Slack allowed in the bound chain.
pub const BOUND_SLACK: f64 = 1e-9;

/// Minimizer of `||A - cI||` over complex `c`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShiftMinimum {
    pub shift: C64,
    pub norm: f64,
}

const GOLDEN: f64 = 0.618_033_988_749_894_9;
const DIRECTIONS: usize = 8;
const MAX_CYCLES: usize = 200;

fn shifted_norm(a: &CMatrix, shift: C64) -> f64 {
    let mut m = a.clone();
    for i in 0..m.nrows() {
        m[(i, i)] -= shift;
    }
    matrixkit::operator_norm(&m)
}

fn golden_section<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let mut x1 = hi - GOLDEN * (hi - lo);
    let mut x2 = lo + GOLDEN * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - GOLDEN * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + GOLDEN * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Directional golden-section descent on the convex map `c -> ||A - cI||`,
/// started at `tr(A)/d`.
///
/// Any minimizer lies within `||A - c0 I||` of `c0 = tr(A)/d` because
/// `c0` is in the numerical range of `A`, which bounds every line search.
pub fn min_shifted_norm(a: &CMatrix) -> Result<ShiftMinimum> {
    let d = matrixkit::ensure_square(a)?;
    if d == 0 {
        return Ok(ShiftMinimum {
            shift: C64::new(0.0, 0.0),
            norm: 0.0,
        });
    }
    let mut best = a.trace() / d as f64;
    let mut best_val = shifted_norm(a, best);
    let radius = best_val;
    let zero_val = shifted_norm(a, C64::new(0.0, 0.0));
    if radius == 0.0 {
        return Ok(ShiftMinimum {
            shift: best,
            norm: 0.0,
        });
    }
    let tol = 1e-9 * radius;
    let dirs: Vec<C64> = (0..DIRECTIONS)
        .map(|k| C64::from_polar(1.0, std::f64::consts::PI * k as f64 / DIRECTIONS as f64))
        .collect();
    let mut widths = vec![2.0 * radius; DIRECTIONS];

    for _ in 0..MAX_CYCLES {
        let start_val = best_val;
        let start = best;
        for (dir, width) in dirs.iter().zip(widths.iter_mut()) {
            let line = |s: f64| shifted_norm(a, best + dir * s);
            let (mut step, mut val) = golden_section(line, -*width, *width, tol);
            let mut expansions = 0;
            while step.abs() > 0.9 * *width && expansions < 8 {
                *width *= 2.0;
                (step, val) = golden_section(line, -*width, *width, tol);
                expansions += 1;
            }
            if val < best_val {
                best += dir * step;
                best_val = val;
            }
            *width = (4.0 * step.abs()).clamp(8.0 * tol, 2.0 * radius);
        }
        // Pattern move along the net displacement of this cycle.
        let moved = best - start;
        if moved.norm() > tol {
            let dir = moved / moved.norm();
            let span = 2.0 * moved.norm();
            let (step, val) =
                golden_section(|s| shifted_norm(a, best + dir * s), -span, span, tol);
            if val < best_val {
                best += dir * step;
                best_val = val;
            }
        }
        if start_val - best_val <= 1e-13 * radius && moved.norm() <= tol {
            break;
        }
    }
    if zero_val < best_val {
        return Ok(ShiftMinimum {
            shift: C64::new(0.0, 0.0),
            norm: zero_val,
        });
    }
    Ok(ShiftMinimum {
        shift: best,
        norm: best_val,
    })
}

/// `Delta(A) = 2 min_c ||A - cI||`; the eigenvalue range for Hermitian `A`.
pub fn delta(a: &CMatrix) -> Result<f64> {
    matrixkit::ensure_square(a)?;
    if a.is_empty() {
        return Ok(0.0);
    }
    if matrixkit::is_hermitian(a, matrixkit::HERMITIAN_TOL) {
        let ev = matrixkit::eigenvalues_hermitian(a)?;
        return Ok(ev[ev.len() - 1] - ev[0]);
    }
    Ok(2.0 * min_shifted_norm(a)?.norm)
}

pub(crate) fn require_gap_valid(h: &Hamiltonian) -> Result<()> {
    let report = spectral::check_nondegenerate_gaps(h, h.default_gap_tolerance())?;
    if let Some(q) = report.violations.first() {
        return Err(Error::DegenerateGaps(format!(
            "E_{} - E_{} = {:.6} matches E_{} - E_{} = {:.6} ({} violating quadruples)",
            q.k,
            q.l,
            q.gap_kl,
            q.m,
            q.n,
            q.gap_mn,
            report.violations.len()
        )));
    }
    Ok(())
}

fn check_operator(h: &Hamiltonian, a: &CMatrix) -> Result<()> {
    matrixkit::ensure_dim(a, h.dim())
}

/// `sum_{n != m} |c_n|^2 |c_m|^2 |<m|A|n>|^2` in the adapted basis of `psi`.
fn sigma_sq_pure(h: &Hamiltonian, psi: &CVector, a: &CMatrix) -> Result<f64> {
    let basis = spectral::adapted_eigenbasis(h, psi)?;
    let occ = basis.occupations();
    let images: Vec<CVector> = basis.states.iter().map(|s| a * &s.vector).collect();
    let mut total = 0.0;
    for (m, sm) in basis.states.iter().enumerate() {
        for (n, image) in images.iter().enumerate() {
            if n != m {
                total += occ[n] * occ[m] * sm.vector.dotc(image).norm_sqr();
            }
        }
    }
    Ok(total)
}

/// Closed-form infinite-time variance. Mixed states are purified and
/// evaluated for `A (x) I` under `H (x) I`.
pub fn sigma_sq_exact(h: &Hamiltonian, rho0: &DensityOperator, a: &CMatrix) -> Result<f64> {
    check_operator(h, a)?;
    if rho0.dim() != h.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            found: rho0.dim(),
        });
    }
    require_gap_valid(h)?;
    match rho0.state_vector() {
        Some(psi) => sigma_sq_pure(h, psi, a),
        None => {
            let p = dynamics::purify(rho0)?;
            let lifted = p.lift_hamiltonian(h);
            sigma_sq_pure(&lifted, &p.vector, &p.lift_operator(a))
        }
    }
}

/// Monte-Carlo estimate of `<|tr(A rho(t)) - tr(A omega)|^2>` over the
/// convention's sampled times.
pub fn sigma_sq_sampled(
    h: &Hamiltonian,
    rho0: &DensityOperator,
    a: &CMatrix,
    conv: &TimeAverageConvention,
) -> Result<Estimate> {
    check_operator(h, a)?;
    let traj = Trajectory::new(h, rho0)?;
    let rotated = traj.rotate(a);
    let eq = dynamics::dephase(h, rho0)?.expectation(a);
    let samples = stats::par_map(&conv.sample_times(), |&t| {
        (traj.expectation(&rotated, t) - eq).norm_sqr()
    });
    Ok(Estimate::from_samples(&samples))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Theorem1Report {
    pub sigma_sq: f64,
    pub delta: f64,
    pub operator_norm: f64,
    pub d_eff: f64,
    pub purity_omega: f64,
    /// `Delta(A)^2 / (4 d_eff)`
    pub bound_delta: f64,
    /// `||A||^2 / d_eff`
    pub bound_norm: f64,
    /// `Delta(A)^2 tr(omega^2)`, the earlier purity-based bound.
    pub reimann_purity_bound: f64,
    pub tight: bool,
    pub exceeds_purity_bound: bool,
    pub chain_holds: bool,
}

pub fn theorem1_report(
    h: &Hamiltonian,
    rho0: &DensityOperator,
    a: &CMatrix,
) -> Result<Theorem1Report> {
    let sigma_sq = sigma_sq_exact(h, rho0, a)?;
    let delta = delta(a)?;
    let operator_norm = matrixkit::operator_norm(a);
    let d_eff = dynamics::effective_dimension(h, rho0)?;
    let purity_omega = dynamics::dephase(h, rho0)?.purity();
    let bound_delta = delta * delta / (4.0 * d_eff);
    let bound_norm = operator_norm * operator_norm / d_eff;
    let reimann_purity_bound = delta * delta * purity_omega;
    Ok(Theorem1Report {
        sigma_sq,
        delta,
        operator_norm,
        d_eff,
        purity_omega,
        bound_delta,
        bound_norm,
        reimann_purity_bound,
        tight: (sigma_sq - bound_delta).abs() <= BOUND_SLACK,
        exceeds_purity_bound: sigma_sq > reimann_purity_bound + BOUND_SLACK,
        chain_holds: sigma_sq <= bound_delta + BOUND_SLACK
            && bound_delta <= bound_norm + BOUND_SLACK,
    })
}
