//! Equilibration of a small subsystem `S` of a bipartite system `S (x) B`.

use serde::{Deserialize, Serialize};

use crate::dynamics::{self, DensityOperator, TimeAverageConvention, Trajectory};
use crate::equilibration;
use crate::error::{Error, Result};
use crate::matrixkit::{self, CMatrix, Keep, C64};
use crate::spectral::{self, Hamiltonian};
use crate::stats::{self, Estimate};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BipartiteSplit {
    pub d_s: usize,
    pub d_b: usize,
}

impl BipartiteSplit {
    pub fn new(d_s: usize, d_b: usize) -> Result<Self> {
        if d_s < 2 {
            return Err(Error::BadDimension(d_s));
        }
        if d_b < 1 {
            return Err(Error::BadDimension(d_b));
        }
        Ok(BipartiteSplit { d_s, d_b })
    }

    pub fn dim(&self) -> usize {
        self.d_s * self.d_b
    }

    fn check(&self, d: usize) -> Result<()> {
        if self.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: self.dim(),
            });
        }
        Ok(())
    }
}

/// Clock-and-shift operators
/// `F_{d k0 + k1} = d^{-1/2} sum_l exp(2 pi i l k0 / d) |l + k1 mod d><l|`
/// in the computational basis.
#[derive(Clone, Debug)]
pub struct SchwingerBasis {
    pub d_s: usize,
    pub operators: Vec<CMatrix>,
}

pub fn schwinger_basis(d_s: usize) -> Result<SchwingerBasis> {
    if d_s < 2 {
        return Err(Error::BadDimension(d_s));
    }
    let norm = 1.0 / (d_s as f64).sqrt();
    let mut operators = Vec::with_capacity(d_s * d_s);
    for k0 in 0..d_s {
        for k1 in 0..d_s {
            let mut f = CMatrix::zeros(d_s, d_s);
            for l in 0..d_s {
                let angle = 2.0 * std::f64::consts::PI * (l * k0) as f64 / d_s as f64;
                f[((l + k1) % d_s, l)] = C64::from_polar(norm, angle);
            }
            operators.push(f);
        }
    }
    Ok(SchwingerBasis { d_s, operators })
}

impl SchwingerBasis {
    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    pub fn reconstruct(&self, coefficients: &[C64]) -> CMatrix {
        self.operators
            .iter()
            .zip(coefficients)
            .fold(CMatrix::zeros(self.d_s, self.d_s), |acc, (f, &l)| acc + f * l)
    }

    /// `F_k^dagger (x) I_B`
    pub fn lifted_adjoint(&self, k: usize, d_b: usize) -> CMatrix {
        matrixkit::tensor(&self.operators[k].adjoint(), &matrixkit::identity(d_b))
    }
}

/// `lambda_k = tr(F_k^dagger M)`
pub fn expand_in_basis(m: &CMatrix, basis: &SchwingerBasis) -> Result<Vec<C64>> {
    matrixkit::ensure_dim(m, basis.d_s)?;
    Ok(basis
        .operators
        .iter()
        .map(|f| matrixkit::hs_inner(f, m))
        .collect())
}

/// `lambda_k = tr(X (F_k^dagger (x) I))` for an operator `X` on the full space.
pub fn ambient_coefficients(
    x: &CMatrix,
    basis: &SchwingerBasis,
    split: BipartiteSplit,
) -> Result<Vec<C64>> {
    split.check(x.nrows())?;
    matrixkit::ensure_square(x)?;
    Ok((0..basis.len())
        .map(|k| matrixkit::trace_product(x, &basis.lifted_adjoint(k, split.d_b)))
        .collect())
}

/// `1/2 sqrt(d_S^2 / d_eff)`
pub fn subsystem_bound(
    h: &Hamiltonian,
    rho0: &DensityOperator,
    split: BipartiteSplit,
) -> Result<f64> {
    split.check(h.dim())?;
    equilibration::require_gap_valid(h)?;
    let d_eff = dynamics::effective_dimension(h, rho0)?;
    Ok(bound_from_deff(split.d_s, d_eff))
}

pub fn bound_from_deff(d_s: usize, d_eff: f64) -> f64 {
    0.5 * ((d_s * d_s) as f64 / d_eff).sqrt()
}

/// Reduced subsystem states along a trajectory.
struct ReducedTrajectory {
    traj: Trajectory,
    split: BipartiteSplit,
}

impl ReducedTrajectory {
    fn new(h: &Hamiltonian, rho0: &DensityOperator, split: BipartiteSplit) -> Result<Self> {
        split.check(h.dim())?;
        Ok(ReducedTrajectory {
            traj: Trajectory::new(h, rho0)?,
            split,
        })
    }

    fn reduced(&self, t: f64) -> CMatrix {
        let BipartiteSplit { d_s, d_b } = self.split;
        match self.traj.state_vector(t) {
            Some(psi) => matrixkit::reduce_pure(&psi, d_s, d_b),
            None => matrixkit::partial_trace(&self.traj.density(t), d_s, d_b, Keep::S),
        }
        .expect("dimensions checked on construction")
    }
}

fn reduced_equilibrium(
    h: &Hamiltonian,
    rho0: &DensityOperator,
    split: BipartiteSplit,
) -> Result<CMatrix> {
    let omega = dynamics::dephase(h, rho0)?;
    matrixkit::partial_trace(omega.matrix(), split.d_s, split.d_b, Keep::S)
}

/// Sampled `<D(rho_S(t), omega_S)>`.
pub fn avg_subsystem_distance(
    h: &Hamiltonian,
    rho0: &DensityOperator,
    split: BipartiteSplit,
    conv: &TimeAverageConvention,
) -> Result<Estimate> {
    let samples = subsystem_distance_series(h, rho0, split, &conv.sample_times())?;
    Ok(Estimate::from_samples(&samples))
}

/// `D(rho_S(t), omega_S)` at each of the given times.
pub fn subsystem_distance_series(
    h: &Hamiltonian,
    rho0: &DensityOperator,
    split: BipartiteSplit,
    times: &[f64],
) -> Result<Vec<f64>> {
    let reduced = ReducedTrajectory::new(h, rho0, split)?;
    let omega_s = reduced_equilibrium(h, rho0, split)?;
    let out = stats::par_map(times, |&t| {
        matrixkit::trace_norm(&(reduced.reduced(t) - &omega_s)).map(|x| 0.5 * x)
    });
    out.into_iter().collect()
}

/// Sampled `<|lambda_k(t)|^2>` for each basis operator, where
/// `rho_S(t) - omega_S = sum_k lambda_k(t) F_k`.
pub fn coefficient_variances(
    h: &Hamiltonian,
    rho0: &DensityOperator,
    split: BipartiteSplit,
    conv: &TimeAverageConvention,
) -> Result<Vec<Estimate>> {
    let basis = schwinger_basis(split.d_s)?;
    let reduced = ReducedTrajectory::new(h, rho0, split)?;
    let omega_s = reduced_equilibrium(h, rho0, split)?;
    let per_time: Vec<Vec<f64>> = stats::par_map(&conv.sample_times(), |&t| {
        let diff = reduced.reduced(t) - &omega_s;
        basis
            .operators
            .iter()
            .map(|f| matrixkit::hs_inner(f, &diff).norm_sqr())
            .collect()
    });
    Ok((0..basis.len())
        .map(|k| {
            let column: Vec<f64> = per_time.iter().map(|row| row[k]).collect();
            Estimate::from_samples(&column)
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubsystemReport {
    pub d_s: usize,
    pub d_b: usize,
    pub d_eff: f64,
    pub gap_valid: bool,
    pub bound: f64,
    pub estimate: f64,
    pub stderr: f64,
    /// `estimate <= bound + 3 stderr`; only asserted when `gap_valid`.
    pub holds: bool,
}

/// Bound and sampled average together. Gap-degenerate Hamiltonians are
/// reported rather than refused, so non-equilibrating examples can be shown.
pub fn subsystem_report(
    h: &Hamiltonian,
    rho0: &DensityOperator,
    split: BipartiteSplit,
    conv: &TimeAverageConvention,
) -> Result<SubsystemReport> {
    split.check(h.dim())?;
    let gap_valid = spectral::check_nondegenerate_gaps(h, h.default_gap_tolerance())?.pass;
    let d_eff = dynamics::effective_dimension(h, rho0)?;
    let bound = bound_from_deff(split.d_s, d_eff);
    let est = avg_subsystem_distance(h, rho0, split, conv)?;
    Ok(SubsystemReport {
        d_s: split.d_s,
        d_b: split.d_b,
        d_eff,
        gap_valid,
        bound,
        estimate: est.estimate,
        stderr: est.stderr,
        holds: est.estimate <= bound + 3.0 * est.stderr,
    })
}
