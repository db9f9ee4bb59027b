//! Finite-outcome POVMs, distinguishability under a measurement or a set
//! of measurements, trace distance and the optimal two-outcome measurement.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{self, DensityOperator, TimeAverageConvention, Trajectory};
use crate::equilibration;
use crate::error::{Error, Result};
use crate::matrixkit::{self, CMatrix};
use crate::random;
use crate::spectral::Hamiltonian;
use crate::stats::{self, Estimate};

pub const POVM_TOL: f64 = 1e-9;

/// Outcome probabilities, and differences of probabilities, below this
/// are reported as zero.
pub const PROBABILITY_FLOOR: f64 = 1e-15;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Outcome {
    pub result: String,
    #[serde(with = "matrixkit::json::matrix")]
    pub matrix: CMatrix,
}

/// A measurement: one positive operator per result, summing to identity.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Povm {
    pub label: String,
    pub outcomes: Vec<Outcome>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PovmViolation {
    Empty,
    Shape { result: String, rows: usize, cols: usize },
    NotHermitian { result: String, asymmetry: f64 },
    Positivity { result: String, min_eigenvalue: f64 },
    Completeness { deviation: f64 },
}

impl std::fmt::Display for PovmViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PovmViolation::Empty => write!(f, "no outcomes"),
            PovmViolation::Shape { result, rows, cols } => {
                write!(f, "outcome `{result}` has shape {rows}x{cols}")
            }
            PovmViolation::NotHermitian { result, asymmetry } => {
                write!(f, "outcome `{result}` not Hermitian ({asymmetry:.3e})")
            }
            PovmViolation::Positivity {
                result,
                min_eigenvalue,
            } => write!(f, "outcome `{result}` has eigenvalue {min_eigenvalue:.3e}"),
            PovmViolation::Completeness { deviation } => {
                write!(f, "outcomes sum to identity only within {deviation:.3e}")
            }
        }
    }
}

pub fn validate_povm(p: &Povm) -> Vec<PovmViolation> {
    let mut out = Vec::new();
    let Some(first) = p.outcomes.first() else {
        return vec![PovmViolation::Empty];
    };
    let d = first.matrix.nrows();
    let mut sum = CMatrix::zeros(d, d);
    for o in &p.outcomes {
        let (rows, cols) = o.matrix.shape();
        if rows != d || cols != d {
            out.push(PovmViolation::Shape {
                result: o.result.clone(),
                rows,
                cols,
            });
            continue;
        }
        let asymmetry = matrixkit::hermitian_asymmetry(&o.matrix);
        if asymmetry > POVM_TOL {
            out.push(PovmViolation::NotHermitian {
                result: o.result.clone(),
                asymmetry,
            });
        } else {
            let sym = (&o.matrix + o.matrix.adjoint()).scale(0.5);
            let min_eigenvalue = matrixkit::eigenvalues_hermitian(&sym)
                .ok()
                .and_then(|v| v.first().copied())
                .unwrap_or(f64::NAN);
            if !(min_eigenvalue >= -POVM_TOL) {
                out.push(PovmViolation::Positivity {
                    result: o.result.clone(),
                    min_eigenvalue,
                });
            }
        }
        sum += &o.matrix;
    }
    if out.iter().all(|v| !matches!(v, PovmViolation::Shape { .. })) {
        let deviation = matrixkit::max_abs_diff(&sum, &matrixkit::identity(d));
        if deviation > POVM_TOL {
            out.push(PovmViolation::Completeness { deviation });
        }
    }
    out
}

impl Povm {
    pub fn new(label: impl Into<String>, outcomes: Vec<Outcome>) -> Result<Self> {
        let p = Povm {
            label: label.into(),
            outcomes,
        };
        let violations = validate_povm(&p);
        if !violations.is_empty() {
            let msg: Vec<String> = violations.iter().map(ToString::to_string).collect();
            return Err(Error::InvalidPovm(msg.join("; ")));
        }
        Ok(p)
    }

    pub fn from_operators(label: impl Into<String>, ops: Vec<CMatrix>) -> Result<Self> {
        let outcomes = ops
            .into_iter()
            .enumerate()
            .map(|(i, matrix)| Outcome {
                result: i.to_string(),
                matrix,
            })
            .collect();
        Self::new(label, outcomes)
    }

    /// `{I}`
    pub fn trivial(d: usize) -> Self {
        Povm {
            label: "trivial".into(),
            outcomes: vec![Outcome {
                result: "0".into(),
                matrix: matrixkit::identity(d),
            }],
        }
    }

    /// Projective measurement onto the columns of a unitary.
    pub fn projective(label: impl Into<String>, basis: &CMatrix) -> Result<Self> {
        let ops = (0..basis.ncols())
            .map(|j| matrixkit::outer(&basis.column(j).into_owned()))
            .collect();
        Self::from_operators(label, ops)
    }

    pub fn dim(&self) -> usize {
        self.outcomes.first().map_or(0, |o| o.matrix.nrows())
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    /// `tr(M_r rho)` for each result, with values below
    /// [`PROBABILITY_FLOOR`] in magnitude set to zero.
    pub fn probabilities(&self, rho: &DensityOperator) -> Result<Vec<f64>> {
        if rho.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: rho.dim(),
            });
        }
        Ok(self
            .outcomes
            .iter()
            .map(|o| clamp_probability(rho.expectation(&o.matrix).re))
            .collect())
    }
}

fn clamp_probability(p: f64) -> f64 {
    if p.abs() < PROBABILITY_FLOOR {
        0.0
    } else {
        p
    }
}

fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p
        .iter()
        .zip(q)
        .map(|(a, b)| clamp_probability((a - b).abs()))
        .sum::<f64>()
}

/// `D_M = 1/2 sum_r |tr(M_r rho1) - tr(M_r rho2)|`
pub fn d_povm(p: &Povm, rho1: &DensityOperator, rho2: &DensityOperator) -> Result<f64> {
    Ok(total_variation(&p.probabilities(rho1)?, &p.probabilities(rho2)?))
}

/// Optimal guessing probability `(1 + D_M) / 2` for equal priors.
pub fn success_probability(p: &Povm, rho1: &DensityOperator, rho2: &DensityOperator) -> Result<f64> {
    Ok(0.5 * (1.0 + d_povm(p, rho1, rho2)?))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MeasurementSet {
    pub measurements: Vec<Povm>,
}

impl MeasurementSet {
    pub fn new(measurements: Vec<Povm>) -> Result<Self> {
        if measurements.is_empty() {
            return Err(Error::EmptySet);
        }
        Ok(MeasurementSet { measurements })
    }

    /// `N(M)`: total number of outcomes across all measurements.
    pub fn total_outcomes(&self) -> usize {
        self.measurements.iter().map(Povm::len).sum()
    }

    /// `sum_M sum_r Delta(M_r)`
    pub fn weighted_outcomes(&self) -> Result<f64> {
        let mut total = 0.0;
        for m in &self.measurements {
            for o in &m.outcomes {
                total += equilibration::delta(&o.matrix)?;
            }
        }
        Ok(total)
    }
}

/// `D_set = max_M D_M`
pub fn d_set(s: &MeasurementSet, rho1: &DensityOperator, rho2: &DensityOperator) -> Result<f64> {
    if s.measurements.is_empty() {
        return Err(Error::EmptySet);
    }
    let mut best: f64 = 0.0;
    for m in &s.measurements {
        best = best.max(d_povm(m, rho1, rho2)?);
    }
    Ok(best)
}

fn same_dim(rho1: &DensityOperator, rho2: &DensityOperator) -> Result<()> {
    if rho1.dim() != rho2.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho1.dim(),
            found: rho2.dim(),
        });
    }
    Ok(())
}

/// `1/2 tr|rho1 - rho2|`
pub fn trace_distance(rho1: &DensityOperator, rho2: &DensityOperator) -> Result<f64> {
    same_dim(rho1, rho2)?;
    Ok(0.5 * matrixkit::trace_norm(&(rho1.matrix() - rho2.matrix()))?)
}

/// Projectors onto the non-negative and negative eigenspaces of
/// `rho1 - rho2`; null directions go to the first outcome.
pub fn helstrom_povm(rho1: &DensityOperator, rho2: &DensityOperator) -> Result<Povm> {
    same_dim(rho1, rho2)?;
    let d = rho1.dim();
    let eig = matrixkit::eig_hermitian(&(rho1.matrix() - rho2.matrix()))?;
    let mut plus = CMatrix::zeros(d, d);
    for (i, &lam) in eig.values.iter().enumerate() {
        if lam >= -1e-14 {
            plus += matrixkit::outer(&eig.vectors.column(i).into_owned());
        }
    }
    let minus = matrixkit::identity(d) - &plus;
    Ok(Povm {
        label: "helstrom".into(),
        outcomes: vec![
            Outcome {
                result: "rho1".into(),
                matrix: plus,
            },
            Outcome {
                result: "rho2".into(),
                matrix: minus,
            },
        ],
    })
}

/// Random POVM `M_r = S^{-1/2} G_r S^{-1/2}` with Wishart `G_r` and `S = sum_r G_r`.
pub fn random_povm<R: Rng + ?Sized>(d: usize, outcomes: usize, rng: &mut R) -> Povm {
    let gs: Vec<CMatrix> = (0..outcomes.max(1))
        .map(|_| {
            let x = random::ginibre(d, rng);
            &x * x.adjoint()
        })
        .collect();
    let total = gs.iter().fold(CMatrix::zeros(d, d), |acc, g| acc + g);
    let eig = matrixkit::eig_hermitian(&total).expect("Wishart sum is Hermitian");
    let inv_sqrt = {
        let scaled = CMatrix::from_fn(d, d, |i, j| {
            eig.vectors[(i, j)] / eig.values[j].max(1e-300).sqrt()
        });
        &scaled * eig.vectors.adjoint()
    };
    let outcomes = gs
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let m = &inv_sqrt * g * &inv_sqrt;
            Outcome {
                result: i.to_string(),
                matrix: (&m + m.adjoint()).scale(0.5),
            }
        })
        .collect();
    Povm {
        label: "random".into(),
        outcomes,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorollaryReport {
    pub d_eff: f64,
    pub total_outcomes: usize,
    pub weighted_outcomes: f64,
    /// `sum Delta(M_r) / (4 sqrt(d_eff))`
    pub bound_weighted: f64,
    /// `N(M) / (4 sqrt(d_eff))`
    pub bound_count: f64,
    pub empirical_avg: f64,
    pub stderr: f64,
    pub holds: bool,
}

/// `log10(N / (4 sqrt(d_eff)))`, for sizes too large to represent.
///
/// ```
/// // N_A spin-1/2 particles with d_eff >= d^0.1, 10^19-word descriptions
/// // over a 10^6-word vocabulary, each producing up to 10^21 bytes.
/// let log10_d = 6.02214076e23 * 2f64.log10();
/// let log10_outcomes = 1e19 * 6.0 + 1e21 * 256f64.log10();
/// let b = eqlab::distinguish::log10_count_bound(log10_outcomes, 0.1 * log10_d);
/// assert!(b < -6.5e21 && b > -6.7e21);
/// ```
pub fn log10_count_bound(log10_outcomes: f64, log10_d_eff: f64) -> f64 {
    log10_outcomes - 4f64.log10() - 0.5 * log10_d_eff
}

pub(crate) fn sampled_set_distance(
    s: &MeasurementSet,
    h: &Hamiltonian,
    rho0: &DensityOperator,
    reference: &DensityOperator,
    conv: &TimeAverageConvention,
) -> Result<Vec<f64>> {
    set_distance_series(s, h, rho0, reference, &conv.sample_times())
}

/// `D_set(rho(t), reference)` at each of the given times.
pub fn set_distance_series(
    s: &MeasurementSet,
    h: &Hamiltonian,
    rho0: &DensityOperator,
    reference: &DensityOperator,
    times: &[f64],
) -> Result<Vec<f64>> {
    if s.measurements.is_empty() {
        return Err(Error::EmptySet);
    }
    let traj = Trajectory::new(h, rho0)?;
    let rotated: Vec<Vec<CMatrix>> = s
        .measurements
        .iter()
        .map(|m| m.outcomes.iter().map(|o| traj.rotate(&o.matrix)).collect())
        .collect();
    let reference_probs = s
        .measurements
        .iter()
        .map(|m| m.probabilities(reference))
        .collect::<Result<Vec<_>>>()?;
    Ok(stats::par_map(times, |&t| {
        rotated
            .iter()
            .zip(&reference_probs)
            .map(|(ops, q)| {
                let p: Vec<f64> = ops
                    .iter()
                    .map(|op| clamp_probability(traj.expectation(op, t).re))
                    .collect();
                total_variation(&p, q)
            })
            .fold(0.0, f64::max)
    }))
}

pub fn corollary_report(
    s: &MeasurementSet,
    h: &Hamiltonian,
    rho0: &DensityOperator,
    conv: &TimeAverageConvention,
) -> Result<CorollaryReport> {
    equilibration::require_gap_valid(h)?;
    let d_eff = dynamics::effective_dimension(h, rho0)?;
    let omega = dynamics::dephase(h, rho0)?;
    let weighted_outcomes = s.weighted_outcomes()?;
    let total_outcomes = s.total_outcomes();
    let denom = 4.0 * d_eff.sqrt();
    let samples = sampled_set_distance(s, h, rho0, &omega, conv)?;
    let est = Estimate::from_samples(&samples);
    let bound_weighted = weighted_outcomes / denom;
    Ok(CorollaryReport {
        d_eff,
        total_outcomes,
        weighted_outcomes,
        bound_weighted,
        bound_count: total_outcomes as f64 / denom,
        empirical_avg: est.estimate,
        stderr: est.stderr,
        holds: est.estimate <= bound_weighted + 3.0 * est.stderr,
    })
}
