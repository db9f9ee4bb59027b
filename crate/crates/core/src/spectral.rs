//! Hamiltonians as lists of distinct energy levels, the non-degenerate
//! energy gaps check, and the adapted eigenbasis of a pure state.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrixkit::{self, c, CMatrix, CVector, C64};
use crate::random::{self, Purpose};

/// Levels above this count are rejected by the O(D^4) gap scan.
pub const MAX_GAP_CHECK_LEVELS: usize = 64;

/// Occupations below this are treated as empty in the adapted basis.
pub const OCCUPATION_CUTOFF: f64 = 1e-12;

const RELATIVE_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct EnergyLevel {
    pub energy: f64,
    pub projector: CMatrix,
    pub multiplicity: usize,
    /// Orthonormal columns spanning the eigenspace.
    pub basis: CMatrix,
}

/// `H = sum_n E_n P_n` with strictly increasing `E_n`. Units have hbar = 1.
#[derive(Clone, Debug)]
pub struct Hamiltonian {
    dim: usize,
    levels: Vec<EnergyLevel>,
    deg_tol: f64,
}

fn scale_of(values: &[f64]) -> f64 {
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        });
    let range = if values.is_empty() { 0.0 } else { hi - lo };
    let magnitude = values.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    // A multiple of H = cI has a float-noise range; fall back to |E| so
    // it still forms a single level.
    range.max(1e3 * f64::EPSILON * magnitude)
}

/// Default degeneracy threshold: `1e-8` times the spectral range.
pub fn default_tolerance(energies: &[f64]) -> f64 {
    RELATIVE_TOL * scale_of(energies)
}

pub fn build_hamiltonian(m: &CMatrix, deg_tol: f64) -> Result<Hamiltonian> {
    let eig = matrixkit::eig_hermitian(m)?;
    Hamiltonian::from_spectrum(&eig.values, &eig.vectors, deg_tol)
}

impl Hamiltonian {
    /// [`build_hamiltonian`] with the default relative clustering threshold.
    pub fn from_matrix(m: &CMatrix) -> Result<Self> {
        let eig = matrixkit::eig_hermitian(m)?;
        let tol = default_tolerance(&eig.values);
        Self::from_spectrum(&eig.values, &eig.vectors, tol)
    }

    /// Builds from eigenvalues and matching orthonormal eigenvector columns.
    /// Eigenvalues need not be sorted.
    pub fn from_spectrum(energies: &[f64], vectors: &CMatrix, deg_tol: f64) -> Result<Self> {
        let d = vectors.nrows();
        if energies.len() != vectors.ncols() || d != energies.len() {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: energies.len(),
            });
        }
        if d == 0 {
            return Err(Error::BadDimension(0));
        }
        let gram = vectors.adjoint() * vectors;
        let ortho = matrixkit::max_abs_diff(&gram, &matrixkit::identity(d));
        if ortho > 1e-9 {
            return Err(Error::config(
                "eigenvectors",
                format!("columns not orthonormal (deviation {ortho:.3e})"),
            ));
        }
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| energies[a].total_cmp(&energies[b]));

        let mut clusters: Vec<Vec<usize>> = Vec::new();
        for &i in &order {
            match clusters.last_mut() {
                Some(cl) if energies[i] - energies[*cl.last().unwrap()] <= deg_tol => cl.push(i),
                _ => clusters.push(vec![i]),
            }
        }

        let mut levels = Vec::with_capacity(clusters.len());
        for cl in clusters {
            let first = energies[cl[0]];
            let last = energies[*cl.last().unwrap()];
            if last - first > 10.0 * deg_tol {
                return Err(Error::AmbiguousClustering {
                    spread: last - first,
                    threshold: deg_tol,
                });
            }
            let energy = cl.iter().map(|&i| energies[i]).sum::<f64>() / cl.len() as f64;
            let basis = CMatrix::from_fn(d, cl.len(), |r, j| vectors[(r, cl[j])]);
            let projector = &basis * basis.adjoint();
            levels.push(EnergyLevel {
                energy,
                projector,
                multiplicity: cl.len(),
                basis,
            });
        }
        Ok(Hamiltonian {
            dim: d,
            levels,
            deg_tol,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn levels(&self) -> &[EnergyLevel] {
        &self.levels
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn energies(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.energy).collect()
    }

    pub fn degeneracy_tolerance(&self) -> f64 {
        self.deg_tol
    }

    pub fn spectral_range(&self) -> f64 {
        match (self.levels.first(), self.levels.last()) {
            (Some(a), Some(b)) => b.energy - a.energy,
            _ => 0.0,
        }
    }

    /// Default tolerance for [`check_nondegenerate_gaps`].
    pub fn default_gap_tolerance(&self) -> f64 {
        default_tolerance(&self.energies())
    }

    /// Smallest spacing between adjacent distinct levels.
    pub fn min_gap(&self) -> Option<f64> {
        self.levels
            .windows(2)
            .map(|w| w[1].energy - w[0].energy)
            .min_by(f64::total_cmp)
    }

    /// `sum_n E_n P_n`
    pub fn matrix(&self) -> CMatrix {
        let mut h = CMatrix::zeros(self.dim, self.dim);
        for l in &self.levels {
            h += l.projector.scale(l.energy);
        }
        h
    }

    /// All eigenvectors as columns, grouped by level in ascending energy,
    /// together with the energy of each column.
    pub fn eigenbasis(&self) -> (Vec<f64>, CMatrix) {
        let mut energies = Vec::with_capacity(self.dim);
        let mut v = CMatrix::zeros(self.dim, self.dim);
        let mut col = 0;
        for l in &self.levels {
            for j in 0..l.multiplicity {
                v.set_column(col, &l.basis.column(j));
                energies.push(l.energy);
                col += 1;
            }
        }
        (energies, v)
    }

    /// `U(t) = sum_n exp(-i E_n t) P_n`
    pub fn propagator(&self, t: f64) -> CMatrix {
        let mut u = CMatrix::zeros(self.dim, self.dim);
        for l in &self.levels {
            u += &l.projector * C64::from_polar(1.0, -l.energy * t);
        }
        u
    }

    /// `H (x) I_ancilla`: same energies, multiplicities scaled by `ancilla`.
    pub fn lift(&self, ancilla: usize) -> Hamiltonian {
        let id = matrixkit::identity(ancilla);
        let levels = self
            .levels
            .iter()
            .map(|l| EnergyLevel {
                energy: l.energy,
                projector: matrixkit::tensor(&l.projector, &id),
                multiplicity: l.multiplicity * ancilla,
                basis: matrixkit::tensor(&l.basis, &id),
            })
            .collect();
        Hamiltonian {
            dim: self.dim * ancilla,
            levels,
            deg_tol: self.deg_tol,
        }
    }

    /// `P_n v` for every level.
    pub fn project(&self, v: &CVector) -> Vec<CVector> {
        self.levels
            .iter()
            .map(|l| &l.basis * (l.basis.adjoint() * v))
            .collect()
    }
}

/// Indices refer to distinct levels (ascending energy) of the Hamiltonian.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapQuadruple {
    pub k: usize,
    pub l: usize,
    pub m: usize,
    pub n: usize,
    pub gap_kl: f64,
    pub gap_mn: f64,
    pub mismatch: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GapReport {
    pub pass: bool,
    pub tolerance: f64,
    pub violations: Vec<GapQuadruple>,
    pub near_misses: Vec<GapQuadruple>,
}

/// Scans `E_k - E_l = E_m - E_n` for every quadruple of distinct levels.
///
/// Each relation is reported once, in the canonical orientation
/// `k > l`, `m > n`, `(k, l) < (m, n)`; every non-trivial coincidence of
/// gaps maps to exactly one such quadruple.
pub fn check_nondegenerate_gaps(h: &Hamiltonian, gap_tol: f64) -> Result<GapReport> {
    let count = h.num_levels();
    if count > MAX_GAP_CHECK_LEVELS {
        return Err(Error::TooManyLevels {
            levels: count,
            limit: MAX_GAP_CHECK_LEVELS,
        });
    }
    let e = h.energies();
    let pairs: Vec<(usize, usize)> = (0..count)
        .flat_map(|k| (0..k).map(move |l| (k, l)))
        .collect();
    let mut violations = Vec::new();
    let mut near_misses = Vec::new();
    for (a, &(k, l)) in pairs.iter().enumerate() {
        let gap_kl = e[k] - e[l];
        for &(m, n) in &pairs[a + 1..] {
            let gap_mn = e[m] - e[n];
            let mismatch = (gap_kl - gap_mn).abs();
            if mismatch <= 10.0 * gap_tol {
                let q = GapQuadruple {
                    k,
                    l,
                    m,
                    n,
                    gap_kl,
                    gap_mn,
                    mismatch,
                };
                if mismatch <= gap_tol {
                    violations.push(q);
                } else {
                    near_misses.push(q);
                }
            }
        }
    }
    Ok(GapReport {
        pass: violations.is_empty(),
        tolerance: gap_tol,
        violations,
        near_misses,
    })
}

#[derive(Clone, Debug)]
pub struct AdaptedState {
    /// Index into [`Hamiltonian::levels`].
    pub level: usize,
    pub energy: f64,
    pub vector: CVector,
    /// `c_n = <n|psi0> = sqrt(<psi0|P_n|psi0>)`, real and positive.
    pub amplitude: f64,
}

/// One eigenvector per occupied level, aligned with the initial state.
#[derive(Clone, Debug)]
pub struct AdaptedBasis {
    pub states: Vec<AdaptedState>,
}

impl AdaptedBasis {
    pub fn occupations(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.amplitude * s.amplitude).collect()
    }

    /// `sum_n c_n exp(-i E_n t) |n>`
    pub fn evolve(&self, t: f64) -> CVector {
        let d = self.states.first().map_or(0, |s| s.vector.len());
        let mut out = CVector::zeros(d);
        for s in &self.states {
            out.axpy(C64::from_polar(s.amplitude, -s.energy * t), &s.vector, c(1.0, 0.0));
        }
        out
    }
}

pub fn adapted_eigenbasis(h: &Hamiltonian, psi0: &CVector) -> Result<AdaptedBasis> {
    if psi0.len() != h.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            found: psi0.len(),
        });
    }
    let states = h
        .project(psi0)
        .into_iter()
        .enumerate()
        .filter_map(|(level, proj)| {
            let occupation = proj.norm_squared();
            (occupation > OCCUPATION_CUTOFF).then(|| {
                let amplitude = occupation.sqrt();
                AdaptedState {
                    level,
                    energy: h.levels[level].energy,
                    vector: proj.unscale(amplitude),
                    amplitude,
                }
            })
        })
        .collect();
    Ok(AdaptedBasis { states })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ensemble {
    Gue,
    SpacedSpectrum,
}

const MAX_PERTURBATION_ROUNDS: usize = 100;

/// Deterministic in `seed`; draws from the `(seed, 0, Hamiltonian)` stream.
pub fn random_hamiltonian(d: usize, ensemble: Ensemble, seed: u64) -> Result<Hamiltonian> {
    let mut rng = random::stream(seed, 0, Purpose::Hamiltonian);
    random_hamiltonian_with(d, ensemble, &mut rng)
}

pub fn random_hamiltonian_with<R: Rng + ?Sized>(
    d: usize,
    ensemble: Ensemble,
    rng: &mut R,
) -> Result<Hamiltonian> {
    if d < 2 {
        return Err(Error::BadDimension(d));
    }
    match ensemble {
        Ensemble::Gue => Hamiltonian::from_matrix(&random::gue_matrix(d, rng)),
        Ensemble::SpacedSpectrum => {
            let mut energies: Vec<f64> = std::iter::once(0.0)
                .chain((1..d).map(|_| rng.random_range(0.5..1.5)))
                .scan(0.0, |acc, gap| {
                    *acc += gap;
                    Some(*acc)
                })
                .collect();
            let basis = random::haar_unitary(d, rng);
            for _ in 0..MAX_PERTURBATION_ROUNDS {
                let tol = default_tolerance(&energies);
                let h = Hamiltonian::from_spectrum(&energies, &basis, tol)?;
                if h.num_levels() == d && check_nondegenerate_gaps(&h, h.default_gap_tolerance())?.pass {
                    return Ok(h);
                }
                for e in energies.iter_mut().skip(1) {
                    *e += rng.random_range(-0.05..0.05);
                }
            }
            Err(Error::ExhaustedRetries(MAX_PERTURBATION_ROUNDS))
        }
    }
}

/// Hamiltonian JSON: a dense Hermitian matrix, or energies with eigenvector columns.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum HamiltonianJson {
    Dense(Vec<Vec<matrixkit::json::Pair>>),
    Spectral {
        energies: Vec<f64>,
        eigenvectors: Vec<Vec<matrixkit::json::Pair>>,
    },
}

impl HamiltonianJson {
    pub fn to_hamiltonian(&self) -> Result<Hamiltonian> {
        match self {
            HamiltonianJson::Dense(rows) => {
                Hamiltonian::from_matrix(&matrixkit::json::rows_to_matrix(rows)?)
            }
            HamiltonianJson::Spectral {
                energies,
                eigenvectors,
            } => {
                let v = matrixkit::json::rows_to_matrix(eigenvectors)?;
                Hamiltonian::from_spectrum(energies, &v, default_tolerance(energies))
            }
        }
    }

    pub fn spectral(h: &Hamiltonian) -> Self {
        let (energies, v) = h.eigenbasis();
        HamiltonianJson::Spectral {
            energies,
            eigenvectors: matrixkit::json::matrix_to_rows(&v),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrixkit::{
        basis_vector, from_real_diagonal, identity, max_abs_diff, pauli_x, pauli_z, tensor,
    };
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn diag_h(e: &[f64]) -> Hamiltonian {
        Hamiltonian::from_matrix(&from_real_diagonal(e)).unwrap()
    }

    fn assert_valid(h: &Hamiltonian) {
        let d = h.dim();
        let mut sum = CMatrix::zeros(d, d);
        for (i, l) in h.levels().iter().enumerate() {
            let p = &l.projector;
            assert!(max_abs_diff(&(p * p), p) <= 1e-9);
            assert!((p.trace().re - l.multiplicity as f64).abs() <= 1e-9);
            for other in &h.levels()[i + 1..] {
                assert!(matrixkit::max_abs(&(p * &other.projector)) <= 1e-9);
            }
            sum += p;
        }
        assert!(max_abs_diff(&sum, &identity(d)) <= 1e-9);
        assert!(h.levels().windows(2).all(|w| w[0].energy < w[1].energy));
    }

    #[test]
    fn counterexample_hamiltonian_levels() {
        for k in [1usize, 3, 6] {
            let h = Hamiltonian::from_matrix(&tensor(&pauli_x(), &identity(k))).unwrap();
            assert_eq!(h.num_levels(), 2);
            assert!((h.levels()[0].energy + 1.0).abs() < 1e-12);
            assert!((h.levels()[1].energy - 1.0).abs() < 1e-12);
            assert!(h.levels().iter().all(|l| l.multiplicity == k));
            assert_valid(&h);
        }
    }

    #[test]
    fn diagonal_degenerate_levels() {
        let h = diag_h(&[0.0, 0.0, 1.0]);
        assert_eq!(h.num_levels(), 2);
        assert_eq!(h.levels()[0].multiplicity, 2);
        assert_eq!(h.levels()[1].multiplicity, 1);
        assert_valid(&h);
    }

    #[test]
    fn scalar_hamiltonian_is_one_level() {
        let h = Hamiltonian::from_matrix(&identity(4).scale(3.0)).unwrap();
        assert_eq!(h.num_levels(), 1);
        assert_eq!(h.levels()[0].multiplicity, 4);
    }

    #[test]
    fn gue_levels_are_simple() {
        let mut rng = ChaCha20Rng::seed_from_u64(99);
        let h = Hamiltonian::from_matrix(&random::gue_matrix(8, &mut rng)).unwrap();
        assert_eq!(h.num_levels(), 8);
        assert_valid(&h);
        assert!(max_abs_diff(&h.propagator(0.0), &identity(8)) < 1e-12);
    }

    #[test]
    fn ambiguous_clustering_is_reported() {
        let e: Vec<f64> = (0..20).map(|i| i as f64 * 0.9e-3).collect();
        let v = identity(20);
        let r = Hamiltonian::from_spectrum(&e, &v, 1e-3);
        assert!(matches!(r, Err(Error::AmbiguousClustering { .. })));
    }

    #[test]
    fn product_hamiltonian_fails_gap_check() {
        let ha = pauli_z();
        let hb = from_real_diagonal(&[0.0, 1.0]);
        let m = tensor(&ha, &identity(2)) + tensor(&identity(2), &hb);
        let h = Hamiltonian::from_matrix(&m).unwrap();
        let report = check_nondegenerate_gaps(&h, h.default_gap_tolerance()).unwrap();
        assert!(!report.pass);
        // Product basis |00>,|01>,|10>,|11> has energies 1,2,-1,0; in
        // ascending level order (-1,0,1,2) the resonance
        // E_01 - E_00 = E_11 - E_10 is levels (3,2) vs (1,0).
        assert!(report
            .violations
            .iter()
            .any(|q| (q.k, q.l, q.m, q.n) == (1, 0, 3, 2)));
    }

    #[test]
    fn gap_check_examples() {
        let h = diag_h(&[0.0, 1.1, 2.3, 3.6]);
        let r = check_nondegenerate_gaps(&h, h.default_gap_tolerance()).unwrap();
        assert!(r.pass, "{:?}", r.violations);

        let h = diag_h(&[0.0, 1.0, 2.0]);
        let r = check_nondegenerate_gaps(&h, h.default_gap_tolerance()).unwrap();
        assert!(!r.pass);
        assert_eq!(r.violations.len(), 1);
        let q = &r.violations[0];
        assert_eq!((q.k, q.l, q.m, q.n), (1, 0, 2, 1));
    }

    /// Oracle: an arithmetic spectrum has exactly one violation per unordered
    /// pair of equal-length gaps, `sum_j C(D - j, 2)`.
    #[test]
    fn equally_spaced_reports_every_arithmetic_quadruple() {
        let levels = 6;
        let e: Vec<f64> = (0..levels).map(|i| 0.7 * i as f64).collect();
        let h = diag_h(&e);
        let r = check_nondegenerate_gaps(&h, h.default_gap_tolerance()).unwrap();
        let expected: usize = (1..levels).map(|j| (levels - j) * (levels - j - 1) / 2).sum();
        assert_eq!(r.violations.len(), expected);
        for q in &r.violations {
            assert_eq!(q.k - q.l, q.m - q.n);
        }
    }

    #[test]
    fn near_misses_are_warnings() {
        let h = Hamiltonian::from_spectrum(&[0.0, 1.0, 2.0 + 5e-8], &identity(3), 1e-12).unwrap();
        let r = check_nondegenerate_gaps(&h, 1e-8).unwrap();
        assert!(r.pass);
        assert_eq!(r.near_misses.len(), 1);
    }

    #[test]
    fn too_many_levels() {
        let e: Vec<f64> = (0..65).map(|i| (i as f64).sqrt()).collect();
        let h = diag_h(&e);
        assert!(matches!(
            check_nondegenerate_gaps(&h, 1e-8),
            Err(Error::TooManyLevels { .. })
        ));
    }

    #[test]
    fn adapted_basis_examples() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let h = Hamiltonian::from_matrix(&pauli_z()).unwrap();
        let psi = CVector::from_vec(vec![c(s, 0.0), c(s, 0.0)]);
        let ab = adapted_eigenbasis(&h, &psi).unwrap();
        assert_eq!(ab.states.len(), 2);
        assert!(ab.states.iter().all(|st| (st.amplitude - s).abs() < 1e-12));

        let ab = adapted_eigenbasis(&h, &basis_vector(2, 1)).unwrap();
        assert_eq!(ab.states.len(), 1);
        assert!((ab.states[0].amplitude - 1.0).abs() < 1e-12);

        // |0>|0> = (|+> + |->)|0> / sqrt 2
        let h = Hamiltonian::from_matrix(&tensor(&pauli_x(), &identity(2))).unwrap();
        let psi = basis_vector(4, 0);
        let ab = adapted_eigenbasis(&h, &psi).unwrap();
        assert_eq!(ab.states.len(), 2);
        let plus = CVector::from_vec(vec![c(s, 0.0), c(0.0, 0.0), c(s, 0.0), c(0.0, 0.0)]);
        let minus = CVector::from_vec(vec![c(s, 0.0), c(0.0, 0.0), c(-s, 0.0), c(0.0, 0.0)]);
        for st in &ab.states {
            assert!((st.amplitude - s).abs() < 1e-12);
            let expected = if st.energy > 0.0 { &plus } else { &minus };
            assert!((&st.vector - expected).norm() < 1e-12);
        }
    }

    #[test]
    fn adapted_basis_evolution_matches_propagator() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let m = tensor(&random::gue_matrix(3, &mut rng), &identity(2));
        let h = Hamiltonian::from_matrix(&m).unwrap();
        let psi = random::haar_state(6, &mut rng);
        let ab = adapted_eigenbasis(&h, &psi).unwrap();
        let total: f64 = ab.occupations().iter().sum();
        assert!((total - 1.0).abs() < 1e-9);
        for (i, a) in ab.states.iter().enumerate() {
            let lvl = &h.levels()[a.level];
            assert!((&lvl.projector * &a.vector - &a.vector).norm() < 1e-9);
            for b in &ab.states[i + 1..] {
                assert!(a.vector.dotc(&b.vector).norm() < 1e-9);
            }
        }
        assert!((ab.evolve(0.0) - &psi).norm() < 1e-9);
        for _ in 0..100 {
            let t: f64 = rng.random_range(0.0..50.0);
            let direct = h.propagator(t) * &psi;
            assert!((direct - ab.evolve(t)).iter().all(|z| z.norm() < 1e-9));
        }
    }

    #[test]
    fn random_hamiltonian_contracts() {
        let a = random_hamiltonian(4, Ensemble::Gue, 7).unwrap();
        let b = random_hamiltonian(4, Ensemble::Gue, 7).unwrap();
        assert_eq!(a.matrix(), b.matrix());

        for seed in 0..5 {
            let h = random_hamiltonian(8, Ensemble::SpacedSpectrum, seed).unwrap();
            assert_valid(&h);
            assert!(check_nondegenerate_gaps(&h, h.default_gap_tolerance()).unwrap().pass);
        }
        for seed in 0..100 {
            assert_eq!(random_hamiltonian(2, Ensemble::Gue, seed).unwrap().num_levels(), 2);
        }
        assert!(matches!(
            random_hamiltonian(1, Ensemble::Gue, 0),
            Err(Error::BadDimension(1))
        ));
    }

    #[test]
    fn lift_keeps_energies() {
        let h = random_hamiltonian(3, Ensemble::Gue, 1).unwrap();
        let lifted = h.lift(3);
        assert_eq!(lifted.dim(), 9);
        assert_eq!(lifted.energies(), h.energies());
        assert!(lifted.levels().iter().all(|l| l.multiplicity == 3));
        assert!(max_abs_diff(&lifted.matrix(), &tensor(&h.matrix(), &identity(3))) < 1e-12);
    }

    #[test]
    fn json_forms_agree() {
        let h = random_hamiltonian(3, Ensemble::Gue, 2).unwrap();
        let dense = HamiltonianJson::Dense(matrixkit::json::matrix_to_rows(&h.matrix()));
        let spectral = HamiltonianJson::spectral(&h);
        let text = serde_json::to_string(&spectral).unwrap();
        let back: HamiltonianJson = serde_json::from_str(&text).unwrap();
        let a = dense.to_hamiltonian().unwrap();
        let b = back.to_hamiltonian().unwrap();
        assert!(max_abs_diff(&a.matrix(), &b.matrix()) < 1e-10);
    }
}
