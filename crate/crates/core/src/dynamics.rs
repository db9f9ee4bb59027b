//! Unitary evolution, the dephased (time-averaged) state and the
//! effective dimension.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrixkit::{self, c, CMatrix, CVector, C64};
use crate::random::{self, Purpose};
use crate::spectral::Hamiltonian;

pub const STATE_TOL: f64 = 1e-9;

/// Default number of sampled times for finite-time averages.
pub const DEFAULT_SAMPLES: usize = 2000;

/// Positive unit-trace operator, optionally carrying its state vector.
#[derive(Clone, Debug)]
pub struct DensityOperator {
    matrix: CMatrix,
    pure: Option<CVector>,
}

impl DensityOperator {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        matrixkit::ensure_square(&matrix)?;
        if !matrixkit::is_finite(&matrix) {
            return Err(Error::NonFinite);
        }
        let asym = matrixkit::hermitian_asymmetry(&matrix);
        if asym > STATE_TOL {
            return Err(Error::InvalidState(format!("not Hermitian ({asym:.3e})")));
        }
        let matrix = (&matrix + matrix.adjoint()).scale(0.5);
        let tr = matrix.trace().re;
        if (tr - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace {tr}")));
        }
        let min_ev = matrixkit::eigenvalues_hermitian(&matrix)?
            .first()
            .copied()
            .unwrap_or(0.0);
        if min_ev < -STATE_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min_ev:.3e}")));
        }
        Ok(DensityOperator { matrix, pure: None })
    }

    pub fn pure(psi: CVector) -> Result<Self> {
        let norm = psi.norm();
        if (norm - 1.0).abs() > STATE_TOL || !norm.is_finite() {
            return Err(Error::InvalidState(format!("state vector norm {norm}")));
        }
        Ok(DensityOperator {
            matrix: matrixkit::outer(&psi),
            pure: Some(psi),
        })
    }

    /// Skips validation; for operators that are states by construction.
    pub(crate) fn from_parts(matrix: CMatrix, pure: Option<CVector>) -> Self {
        DensityOperator { matrix, pure }
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self::from_parts(matrixkit::identity(d).unscale(d as f64), None)
    }

    pub fn haar_pure<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Self {
        let psi = random::haar_state(d, rng);
        Self::from_parts(matrixkit::outer(&psi), Some(psi))
    }

    pub fn random_mixed<R: Rng + ?Sized>(d: usize, rank: usize, rng: &mut R) -> Self {
        Self::from_parts(random::random_density(d, rank, rng), None)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn state_vector(&self) -> Option<&CVector> {
        self.pure.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn purity(&self) -> f64 {
        matrixkit::trace_product(&self.matrix, &self.matrix).re
    }

    pub fn expectation(&self, a: &CMatrix) -> C64 {
        matrixkit::trace_product(a, &self.matrix)
    }
}

/// Finite-time stand-in for the infinite-time average: `n_samples`
/// times drawn uniformly from `[0, t_max]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeAverageConvention {
    pub t_max: f64,
    pub n_samples: usize,
    pub seed: u64,
}

impl TimeAverageConvention {
    pub fn new(t_max: f64, n_samples: usize, seed: u64) -> Result<Self> {
        if !(t_max > 0.0 && t_max.is_finite()) {
            return Err(Error::config("time_average.t_max", "must be positive"));
        }
        if n_samples == 0 {
            return Err(Error::config("time_average.n_samples", "must be at least 1"));
        }
        Ok(TimeAverageConvention {
            t_max,
            n_samples,
            seed,
        })
    }

    /// `t_max = 10^3 / (smallest level spacing)`.
    pub fn default_t_max(h: &Hamiltonian) -> f64 {
        match h.min_gap() {
            Some(g) if g > 0.0 => 1e3 / g,
            _ => 1.0,
        }
    }

    pub fn for_hamiltonian(h: &Hamiltonian, n_samples: usize, seed: u64) -> Self {
        TimeAverageConvention {
            t_max: Self::default_t_max(h),
            n_samples: n_samples.max(1),
            seed,
        }
    }

    pub fn sample_times(&self) -> Vec<f64> {
        let mut rng = random::stream(self.seed, 0, Purpose::Times);
        (0..self.n_samples)
            .map(|_| rng.random_range(0.0..self.t_max))
            .collect()
    }
}

fn check_dims(h: &Hamiltonian, rho: &DensityOperator) -> Result<()> {
    if h.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            found: rho.dim(),
        });
    }
    Ok(())
}

/// `rho(t) = U rho0 U^dagger` with `U = sum_n exp(-i E_n t) P_n`.
pub fn evolve(h: &Hamiltonian, rho0: &DensityOperator, t: f64) -> Result<DensityOperator> {
    check_dims(h, rho0)?;
    let u = h.propagator(t);
    Ok(match rho0.state_vector() {
        Some(psi) => {
            let psi_t = &u * psi;
            DensityOperator::from_parts(matrixkit::outer(&psi_t), Some(psi_t))
        }
        None => DensityOperator::from_parts(&u * rho0.matrix() * u.adjoint(), None),
    })
}

/// `omega = sum_n P_n rho0 P_n`
pub fn dephase(h: &Hamiltonian, rho0: &DensityOperator) -> Result<DensityOperator> {
    check_dims(h, rho0)?;
    let d = h.dim();
    let mut omega = CMatrix::zeros(d, d);
    for l in h.levels() {
        omega += &l.projector * rho0.matrix() * &l.projector;
    }
    Ok(DensityOperator::from_parts(omega, None))
}

/// `p_n = tr(P_n rho0)`
pub fn level_occupations(h: &Hamiltonian, rho0: &DensityOperator) -> Result<Vec<f64>> {
    check_dims(h, rho0)?;
    Ok(h.levels()
        .iter()
        .map(|l| (l.basis.adjoint() * rho0.matrix() * &l.basis).trace().re)
        .collect())
}

/// `1 / sum_n tr(P_n rho0)^2`
pub fn effective_dimension(h: &Hamiltonian, rho0: &DensityOperator) -> Result<f64> {
    let p = level_occupations(h, rho0)?;
    Ok(1.0 / p.iter().map(|x| x * x).sum::<f64>())
}

/// Pure state on `H (x) H_ancilla` whose first marginal is the original state.
#[derive(Clone, Debug)]
pub struct Purification {
    pub vector: CVector,
    pub ancilla_dim: usize,
}

impl Purification {
    pub fn state(&self) -> DensityOperator {
        DensityOperator::from_parts(matrixkit::outer(&self.vector), Some(self.vector.clone()))
    }

    /// `H -> H (x) I`
    pub fn lift_hamiltonian(&self, h: &Hamiltonian) -> Hamiltonian {
        h.lift(self.ancilla_dim)
    }

    /// `A -> A (x) I`
    pub fn lift_operator(&self, a: &CMatrix) -> CMatrix {
        matrixkit::tensor(a, &matrixkit::identity(self.ancilla_dim))
    }
}

/// `sum_i sqrt(lambda_i) |v_i>|i>` with eigenvalues in descending order,
/// so a pure input maps to `|psi>|0>`.
pub fn purify(rho0: &DensityOperator) -> Result<Purification> {
    let d = rho0.dim();
    if let Some(psi) = rho0.state_vector() {
        return Ok(Purification {
            vector: matrixkit::tensor_vec(psi, &matrixkit::basis_vector(d, 0)),
            ancilla_dim: d,
        });
    }
    let eig = matrixkit::eig_hermitian(rho0.matrix())?;
    if eig.values.first().is_some_and(|&x| x < -STATE_TOL) {
        return Err(Error::InvalidState("negative eigenvalue".into()));
    }
    let mut vector = CVector::zeros(d * d);
    for (rank, col) in (0..d).rev().enumerate() {
        let weight = eig.values[col].max(0.0).sqrt();
        if weight == 0.0 {
            continue;
        }
        let v = eig.vectors.column(col);
        for s in 0..d {
            vector[s * d + rank] = v[s] * weight;
        }
    }
    let norm = vector.norm();
    Ok(Purification {
        vector: vector.unscale(norm),
        ancilla_dim: d,
    })
}

/// Precomputed evolution in the energy eigenbasis: `tr(A rho(t))` in
/// `O(d^2)` per time once `A` has been rotated with [`Trajectory::rotate`].
#[derive(Clone, Debug)]
pub struct Trajectory {
    energies: Vec<f64>,
    basis: CMatrix,
    coefficients: Coefficients,
}

#[derive(Clone, Debug)]
enum Coefficients {
    Pure(CVector),
    Mixed(CMatrix),
}

impl Trajectory {
    pub fn new(h: &Hamiltonian, rho0: &DensityOperator) -> Result<Self> {
        check_dims(h, rho0)?;
        let (energies, basis) = h.eigenbasis();
        let coefficients = match rho0.state_vector() {
            Some(psi) => Coefficients::Pure(basis.adjoint() * psi),
            None => Coefficients::Mixed(basis.adjoint() * rho0.matrix() * &basis),
        };
        Ok(Trajectory {
            energies,
            basis,
            coefficients,
        })
    }

    /// `V^dagger A V`
    pub fn rotate(&self, a: &CMatrix) -> CMatrix {
        self.basis.adjoint() * a * &self.basis
    }

    fn phases(&self, t: f64) -> Vec<C64> {
        self.energies
            .iter()
            .map(|&e| C64::from_polar(1.0, -e * t))
            .collect()
    }

    /// `tr(A rho(t))` for `rotated = V^dagger A V`.
    pub fn expectation(&self, rotated: &CMatrix, t: f64) -> C64 {
        let ph = self.phases(t);
        match &self.coefficients {
            Coefficients::Pure(coef) => {
                let psi_t = CVector::from_fn(coef.len(), |i, _| coef[i] * ph[i]);
                psi_t.dotc(&(rotated * &psi_t))
            }
            Coefficients::Mixed(rho) => {
                let n = rho.nrows();
                let mut acc = c(0.0, 0.0);
                for i in 0..n {
                    for j in 0..n {
                        acc += rotated[(j, i)] * rho[(i, j)] * ph[i] * ph[j].conj();
                    }
                }
                acc
            }
        }
    }

    pub fn state_vector(&self, t: f64) -> Option<CVector> {
        match &self.coefficients {
            Coefficients::Pure(coef) => {
                let ph = self.phases(t);
                let rotated = CVector::from_fn(coef.len(), |i, _| coef[i] * ph[i]);
                Some(&self.basis * rotated)
            }
            Coefficients::Mixed(_) => None,
        }
    }

    pub fn density(&self, t: f64) -> CMatrix {
        match &self.coefficients {
            Coefficients::Pure(_) => matrixkit::outer(&self.state_vector(t).unwrap()),
            Coefficients::Mixed(rho) => {
                let ph = self.phases(t);
                let n = rho.nrows();
                let rho_t = CMatrix::from_fn(n, n, |i, j| rho[(i, j)] * ph[i] * ph[j].conj());
                &self.basis * rho_t * self.basis.adjoint()
            }
        }
    }
}
