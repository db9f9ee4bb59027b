//! Subspaces whose states all equilibrate, as seen by a measurement set,
//! to the same maximally mixed state on the subspace.

use serde::{Deserialize, Serialize};

use crate::distinguish::{self, MeasurementSet, Outcome, Povm};
use crate::dynamics::{self, DensityOperator, TimeAverageConvention};
use crate::equilibration;
use crate::error::{Error, Result};
use crate::matrixkit::{self, CMatrix, CVector};
use crate::spectral::Hamiltonian;
use crate::random;
use crate::stats::Estimate;
use rand::Rng;

pub const PARTITION_TOL: f64 = 1e-9;

/// Minimum weight `tr(Pi_k rho0)` for a state to count as lying in `H_k`.
pub const SUPPORT_TOL: f64 = 1e-9;

/// Orthogonal decomposition `H = (+)_k H_k` by projectors `Pi_k`.
#[derive(Clone, Debug)]
pub struct SubspacePartition {
    pub projectors: Vec<CMatrix>,
    pub labels: Vec<String>,
}

impl SubspacePartition {
    pub fn new(projectors: Vec<CMatrix>) -> Self {
        let labels = (0..projectors.len()).map(|k| k.to_string()).collect();
        SubspacePartition { projectors, labels }
    }

    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }

    pub fn projector(&self, k: usize) -> Result<&CMatrix> {
        self.projectors.get(k).ok_or(Error::IndexOutOfRange {
            index: k,
            len: self.projectors.len(),
        })
    }

    /// Measurement with one outcome per subspace.
    pub fn band_measurement(&self) -> Result<Povm> {
        Povm::from_operators("bands", self.projectors.clone())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PartitionViolation {
    Shape { index: usize },
    NotHermitian { index: usize, magnitude: f64 },
    NotIdempotent { index: usize, magnitude: f64 },
    NotOrthogonal { first: usize, second: usize, magnitude: f64 },
    Incomplete { magnitude: f64 },
    DoesNotCommute { index: usize, magnitude: f64 },
}

/// All partition invariants, each violation with its max-entry magnitude.
pub fn validate_partition(h: &Hamiltonian, p: &SubspacePartition) -> Vec<PartitionViolation> {
    let d = h.dim();
    let hm = h.matrix();
    let mut out = Vec::new();
    let mut sum = CMatrix::zeros(d, d);
    for (index, pk) in p.projectors.iter().enumerate() {
        if pk.shape() != (d, d) {
            out.push(PartitionViolation::Shape { index });
            continue;
        }
        let herm = matrixkit::hermitian_asymmetry(pk);
        if herm > PARTITION_TOL {
            out.push(PartitionViolation::NotHermitian {
                index,
                magnitude: herm,
            });
        }
        let idem = matrixkit::max_abs_diff(&(pk * pk), pk);
        if idem > PARTITION_TOL {
            out.push(PartitionViolation::NotIdempotent {
                index,
                magnitude: idem,
            });
        }
        let comm = matrixkit::max_abs(&matrixkit::commutator(pk, &hm));
        if comm > PARTITION_TOL {
            out.push(PartitionViolation::DoesNotCommute {
                index,
                magnitude: comm,
            });
        }
        for (second, other) in p.projectors.iter().enumerate().skip(index + 1) {
            if other.shape() == (d, d) {
                let overlap = matrixkit::max_abs(&(pk * other));
                if overlap > PARTITION_TOL {
                    out.push(PartitionViolation::NotOrthogonal {
                        first: index,
                        second,
                        magnitude: overlap,
                    });
                }
            }
        }
        sum += pk;
    }
    let complete = matrixkit::max_abs_diff(&sum, &matrixkit::identity(d));
    if complete > PARTITION_TOL {
        out.push(PartitionViolation::Incomplete {
            magnitude: complete,
        });
    }
    out
}

/// Energy bands separated by the interior cut points `band_edges`
/// (strictly ascending). Bands containing no level are dropped.
pub fn microcanonical_partition(h: &Hamiltonian, band_edges: &[f64]) -> Result<SubspacePartition> {
    if band_edges.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::config("band_edges", "must be strictly ascending"));
    }
    let tol = h.degeneracy_tolerance();
    for level in h.levels() {
        if let Some(&edge) = band_edges
            .iter()
            .find(|&&e| (e - level.energy).abs() <= tol)
        {
            return Err(Error::EdgeOnLevel {
                edge,
                energy: level.energy,
            });
        }
    }
    let d = h.dim();
    let mut projectors: Vec<CMatrix> = vec![CMatrix::zeros(d, d); band_edges.len() + 1];
    let mut occupied = vec![false; band_edges.len() + 1];
    for level in h.levels() {
        let band = band_edges.partition_point(|&e| e < level.energy);
        projectors[band] += &level.projector;
        occupied[band] = true;
    }
    let mut labels = Vec::new();
    let mut kept = Vec::new();
    for (band, (p, used)) in projectors.into_iter().zip(occupied).enumerate() {
        if used {
            let lo = band.checked_sub(1).map_or(f64::NEG_INFINITY, |i| band_edges[i]);
            let hi = band_edges.get(band).copied().unwrap_or(f64::INFINITY);
            labels.push(format!("[{lo}, {hi})"));
            kept.push(p);
        }
    }
    Ok(SubspacePartition {
        projectors: kept,
        labels,
    })
}

fn eigenstate_residual(hm: &CMatrix, v: &CVector) -> f64 {
    let hv = hm * v;
    let e = v.dotc(&hv);
    (hv - v * e).norm()
}

/// `epsilon = max_{i<j} D_set(|i><i|, |j><j|)` over the supplied energy
/// eigenstates spanning (part of) `H_k`.
pub fn eigenstate_epsilon(
    s: &MeasurementSet,
    h: &Hamiltonian,
    projector: &CMatrix,
    basis: &[CVector],
) -> Result<f64> {
    matrixkit::ensure_dim(projector, h.dim())?;
    let hm = h.matrix();
    let eig_tol = PARTITION_TOL * h.spectral_range().max(1.0);
    let mut states = Vec::with_capacity(basis.len());
    for (index, v) in basis.iter().enumerate() {
        if v.len() != h.dim() {
            return Err(Error::DimensionMismatch {
                expected: h.dim(),
                found: v.len(),
            });
        }
        let residual = (projector * v - v).norm();
        if residual > PARTITION_TOL {
            return Err(Error::BasisNotInSubspace { index, residual });
        }
        let residual = eigenstate_residual(&hm, v);
        if residual > eig_tol {
            return Err(Error::NotEigenstates { index, residual });
        }
        states.push(DensityOperator::pure(v.unscale(v.norm()))?);
    }
    let mut eps: f64 = 0.0;
    for i in 0..states.len() {
        for j in i + 1..states.len() {
            eps = eps.max(distinguish::d_set(s, &states[i], &states[j])?);
        }
    }
    Ok(eps)
}

/// `Omega_k = Pi_k / tr(Pi_k)`
pub fn equilibrium_state(p: &SubspacePartition, k: usize) -> Result<DensityOperator> {
    let pk = p.projector(k)?;
    let rank = pk.trace().re;
    if rank < 0.5 {
        return Err(Error::InvalidState(format!("projector {k} has rank {rank}")));
    }
    DensityOperator::new(pk.unscale(rank))
}

/// Energy eigenstates spanning `Pi_k H` that also diagonalize `omega`.
pub fn omega_eigenbasis(
    h: &Hamiltonian,
    omega: &DensityOperator,
    projector: &CMatrix,
) -> Result<Vec<CVector>> {
    let mut out = Vec::new();
    for level in h.levels() {
        let q = &level.basis;
        let restricted = q.adjoint() * projector * q;
        let eig = matrixkit::eig_hermitian(&restricted)?;
        let cols: Vec<usize> = (0..eig.values.len())
            .filter(|&i| eig.values[i] > 0.5)
            .collect();
        if cols.is_empty() {
            continue;
        }
        let sel = CMatrix::from_fn(q.ncols(), cols.len(), |r, j| eig.vectors[(r, cols[j])]);
        let block = q * sel;
        let w = block.adjoint() * omega.matrix() * &block;
        let weig = matrixkit::eig_hermitian(&w)?;
        for j in 0..weig.values.len() {
            out.push(&block * weig.vectors.column(j));
        }
    }
    Ok(out)
}

/// Two-outcome measurements `{M, I - M}` with
/// `M = sum_k a_k Pi_k + eta X`, `a_k ~ U(0.2, 0.8)` and `X` a random
/// Hermitian operator of unit norm. For `eta = 0` every outcome is
/// constant on each subspace.
pub fn perturbed_band_set<R: Rng + ?Sized>(
    p: &SubspacePartition,
    eta: f64,
    count: usize,
    rng: &mut R,
) -> Result<MeasurementSet> {
    if p.is_empty() {
        return Err(Error::EmptySet);
    }
    if !(0.0..=0.2).contains(&eta) {
        return Err(Error::config("eta", "must lie in [0, 0.2]"));
    }
    let d = p.projectors[0].nrows();
    let measurements = (0..count)
        .map(|i| {
            let mut m0 = CMatrix::zeros(d, d);
            for pk in &p.projectors {
                m0 += pk.scale(rng.random_range(0.2..0.8));
            }
            let x = random::random_hermitian(d, rng);
            let x = x.unscale(matrixkit::operator_norm(&x));
            m0 += x.scale(eta);
            let m1 = matrixkit::identity(d) - &m0;
            Povm::new(
                format!("perturbed-{i}"),
                vec![
                    Outcome { result: "0".into(), matrix: m0 },
                    Outcome { result: "1".into(), matrix: m1 },
                ],
            )
        })
        .collect::<Result<Vec<_>>>()?;
    MeasurementSet::new(measurements)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct UniversalityReport {
    pub band: usize,
    pub epsilon: f64,
    pub d_eff: f64,
    pub total_outcomes: usize,
    /// `N(M) / (4 sqrt(d_eff)) + epsilon`
    pub bound: f64,
    /// Sampled `<D_set(rho(t), Omega_k)>`.
    pub empirical_avg: f64,
    pub stderr: f64,
    /// Sampled `<D_set(rho(t), omega)>`.
    pub to_omega_avg: f64,
    pub to_omega_stderr: f64,
    /// `D_set(omega, Omega_k)`
    pub omega_to_equilibrium: f64,
    pub holds: bool,
    #[serde(with = "matrixkit::json::matrix")]
    pub omega_k: CMatrix,
}

pub fn universality_report(
    s: &MeasurementSet,
    h: &Hamiltonian,
    rho0: &DensityOperator,
    p: &SubspacePartition,
    k: usize,
    conv: &TimeAverageConvention,
) -> Result<UniversalityReport> {
    let pk = p.projector(k)?;
    matrixkit::ensure_dim(pk, h.dim())?;
    let weight = rho0.expectation(pk).re;
    if weight < 1.0 - SUPPORT_TOL {
        return Err(Error::StateOutsideSubspace {
            weight: 1.0 - weight,
        });
    }
    equilibration::require_gap_valid(h)?;
    let omega = dynamics::dephase(h, rho0)?;
    let omega_k = equilibrium_state(p, k)?;
    let basis = omega_eigenbasis(h, &omega, pk)?;
    let epsilon = eigenstate_epsilon(s, h, pk, &basis)?;
    let d_eff = dynamics::effective_dimension(h, rho0)?;
    let total_outcomes = s.total_outcomes();
    let bound = total_outcomes as f64 / (4.0 * d_eff.sqrt()) + epsilon;

    let to_k = Estimate::from_samples(&distinguish::sampled_set_distance(s, h, rho0, &omega_k, conv)?);
    let to_omega = Estimate::from_samples(&distinguish::sampled_set_distance(s, h, rho0, &omega, conv)?);
    let omega_to_equilibrium = distinguish::d_set(s, &omega, &omega_k)?;
    Ok(UniversalityReport {
        band: k,
        epsilon,
        d_eff,
        total_outcomes,
        bound,
        empirical_avg: to_k.estimate,
        stderr: to_k.stderr,
        to_omega_avg: to_omega.estimate,
        to_omega_stderr: to_omega.stderr,
        omega_to_equilibrium,
        holds: to_k.estimate <= bound + 3.0 * to_k.stderr,
        omega_k: omega_k.matrix().clone(),
    })
}
