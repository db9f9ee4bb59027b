use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::distinguish::{self, MeasurementSet, Povm};
use crate::dynamics::{DensityOperator, TimeAverageConvention, DEFAULT_SAMPLES};
use crate::error::{Error, Result};
use crate::matrixkit::{self, json::Pair, CMatrix, CVector};
use crate::random::{self, Purpose};
use crate::spectral::{self, Ensemble, Hamiltonian, HamiltonianJson};
use crate::subsystem::BipartiteSplit;
use crate::universality::{self, SubspacePartition};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    CheckGaps,
    Theorem1,
    Corollary,
    Subsystem,
    Universality,
    Counterexample,
    Sweep,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::CheckGaps => "check-gaps",
            Mode::Theorem1 => "theorem1",
            Mode::Corollary => "corollary",
            Mode::Subsystem => "subsystem",
            Mode::Universality => "universality",
            Mode::Counterexample => "counterexample",
            Mode::Sweep => "sweep",
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum HamiltonianSource {
    File(PathBuf),
    Inline(HamiltonianJson),
    Ensemble { kind: Ensemble, dim: usize },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateJson {
    Vector(Vec<Pair>),
    Matrix(Vec<Vec<Pair>>),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSource {
    File(PathBuf),
    Inline(StateJson),
    HaarPure,
    RandomMixed { rank: usize },
    /// Coherent superposition `sum_n sqrt(w_n) |E_n>` over the lowest levels.
    Eigenmix { weights: Vec<f64> },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum MatrixSource {
    File(PathBuf),
    Inline(Vec<Vec<Pair>>),
    /// Ginibre matrix, generally not normal.
    Random,
    RandomHermitian,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasurementSource {
    File(PathBuf),
    Inline(Povm),
    Random { outcomes: usize },
    /// Projective measurement in the energy eigenbasis.
    Energy,
    /// One outcome per subspace of the partition.
    Bands,
    PerturbedBands { eta: f64, count: usize },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum PartitionSource {
    BandEdges(Vec<f64>),
    Projectors(Vec<MatrixSource>),
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitSpec {
    pub d_s: usize,
    pub d_b: usize,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeAverageSpec {
    #[serde(default)]
    pub t_max: Option<f64>,
    #[serde(default = "default_samples")]
    pub n_samples: usize,
}

impl Default for TimeAverageSpec {
    fn default() -> Self {
        TimeAverageSpec {
            t_max: None,
            n_samples: DEFAULT_SAMPLES,
        }
    }
}

fn default_samples() -> usize {
    DEFAULT_SAMPLES
}

/// Uniform time grid for the CSV series.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesSpec {
    pub n_points: usize,
    #[serde(default)]
    pub t_max: Option<f64>,
}

impl SeriesSpec {
    pub fn times(&self, default_t_max: f64) -> Vec<f64> {
        let t_max = self.t_max.unwrap_or(default_t_max);
        match self.n_points {
            0 => Vec::new(),
            1 => vec![0.0],
            n => (0..n).map(|i| t_max * i as f64 / (n - 1) as f64).collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SweepState {
    HaarPure,
    RandomMixed { rank: usize },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingSpec {
    #[serde(default = "default_d_s")]
    pub d_s: usize,
    #[serde(default = "default_d_b")]
    pub d_b: Vec<usize>,
    #[serde(default = "default_scaling_instances")]
    pub instances: usize,
    #[serde(default = "default_samples")]
    pub n_samples: usize,
}

impl Default for ScalingSpec {
    fn default() -> Self {
        ScalingSpec {
            d_s: default_d_s(),
            d_b: default_d_b(),
            instances: default_scaling_instances(),
            n_samples: DEFAULT_SAMPLES,
        }
    }
}

fn default_d_s() -> usize {
    2
}

fn default_d_b() -> Vec<usize> {
    vec![2, 4, 8, 16]
}

fn default_scaling_instances() -> usize {
    50
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default = "default_instances")]
    pub instances: usize,
    #[serde(default = "default_dims")]
    pub dims: Vec<usize>,
    #[serde(default = "default_ensemble")]
    pub ensemble: Ensemble,
    #[serde(default = "default_sweep_state")]
    pub state: SweepState,
    #[serde(default)]
    pub scaling: Option<ScalingSpec>,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            instances: default_instances(),
            dims: default_dims(),
            ensemble: default_ensemble(),
            state: default_sweep_state(),
            scaling: None,
        }
    }
}

fn default_instances() -> usize {
    100
}

fn default_dims() -> Vec<usize> {
    vec![16]
}

fn default_ensemble() -> Ensemble {
    Ensemble::Gue
}

fn default_sweep_state() -> SweepState {
    SweepState::HaarPure
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub mode: Option<Mode>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub hamiltonian: Option<HamiltonianSource>,
    #[serde(default)]
    pub state: Option<StateSource>,
    #[serde(default)]
    pub observable: Option<MatrixSource>,
    #[serde(default)]
    pub measurements: Vec<MeasurementSource>,
    #[serde(default)]
    pub partition: Option<PartitionSource>,
    #[serde(default)]
    pub band: usize,
    #[serde(default)]
    pub split: Option<SplitSpec>,
    #[serde(default)]
    pub time_average: TimeAverageSpec,
    #[serde(default)]
    pub series: Option<SeriesSpec>,
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    /// Directory relative file paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path, field: &str) -> Result<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::config(field, format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::config(field, format!("cannot parse {}: {e}", path.display())))
}

fn context(field: &str, e: Error) -> Error {
    match e {
        Error::Config { .. } => e,
        other => Error::config(field, other.to_string()),
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let mut config: ExperimentConfig = read_json(path, "config")?;
        config.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(config)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::config("config", e.to_string()))
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn require_mode(&self) -> Result<Mode> {
        self.mode.ok_or_else(|| Error::config("mode", "missing"))
    }

    pub fn build_hamiltonian(&self) -> Result<Hamiltonian> {
        let source = self
            .hamiltonian
            .as_ref()
            .ok_or_else(|| Error::config("hamiltonian", "required for this mode"))?;
        match source {
            HamiltonianSource::File(p) => {
                let json: HamiltonianJson = read_json(&self.resolve(p), "hamiltonian.file")?;
                json.to_hamiltonian().map_err(|e| context("hamiltonian.file", e))
            }
            HamiltonianSource::Inline(json) => {
                json.to_hamiltonian().map_err(|e| context("hamiltonian.inline", e))
            }
            HamiltonianSource::Ensemble { kind, dim } => {
                let mut rng = random::stream(self.seed, 0, Purpose::Hamiltonian);
                spectral::random_hamiltonian_with(*dim, *kind, &mut rng)
                    .map_err(|e| context("hamiltonian.ensemble", e))
            }
        }
    }

    pub fn build_state(&self, h: &Hamiltonian) -> Result<DensityOperator> {
        let source = self
            .state
            .as_ref()
            .ok_or_else(|| Error::config("state", "required for this mode"))?;
        let d = h.dim();
        let mut rng = random::stream(self.seed, 0, Purpose::State);
        let state = match source {
            StateSource::File(p) => {
                let json: StateJson = read_json(&self.resolve(p), "state.file")?;
                state_from_json(&json).map_err(|e| context("state.file", e))?
            }
            StateSource::Inline(json) => state_from_json(json).map_err(|e| context("state.inline", e))?,
            StateSource::HaarPure => DensityOperator::haar_pure(d, &mut rng),
            StateSource::RandomMixed { rank } => {
                if *rank == 0 || *rank > d {
                    return Err(Error::config("state.random_mixed.rank", format!("must lie in 1..={d}")));
                }
                DensityOperator::random_mixed(d, *rank, &mut rng)
            }
            StateSource::Eigenmix { weights } => eigenmix(h, weights)?,
        };
        if state.dim() != d {
            return Err(Error::config(
                "state",
                format!("dimension {} does not match the Hamiltonian ({d})", state.dim()),
            ));
        }
        Ok(state)
    }

    pub fn build_observable(&self, d: usize) -> Result<CMatrix> {
        let source = self
            .observable
            .as_ref()
            .ok_or_else(|| Error::config("observable", "required for this mode"))?;
        let mut rng = random::stream(self.seed, 0, Purpose::Observable);
        self.matrix(source, d, "observable", &mut rng)
    }

    fn matrix<R: rand::Rng + ?Sized>(
        &self,
        source: &MatrixSource,
        d: usize,
        field: &str,
        rng: &mut R,
    ) -> Result<CMatrix> {
        let m = match source {
            MatrixSource::File(p) => {
                let rows: Vec<Vec<Pair>> = read_json(&self.resolve(p), field)?;
                matrixkit::json::rows_to_matrix(&rows).map_err(|e| context(field, e))?
            }
            MatrixSource::Inline(rows) => matrixkit::json::rows_to_matrix(rows).map_err(|e| context(field, e))?,
            MatrixSource::Random => random::ginibre(d, rng),
            MatrixSource::RandomHermitian => random::random_hermitian(d, rng),
        };
        matrixkit::ensure_dim(&m, d).map_err(|e| context(field, e))?;
        Ok(m)
    }

    pub fn build_split(&self, d: usize) -> Result<BipartiteSplit> {
        let spec = self
            .split
            .ok_or_else(|| Error::config("split", "required for this mode"))?;
        let split = BipartiteSplit::new(spec.d_s, spec.d_b).map_err(|e| context("split", e))?;
        if split.dim() != d {
            return Err(Error::config(
                "split",
                format!("d_s * d_b = {} but the Hamiltonian has dimension {d}", split.dim()),
            ));
        }
        Ok(split)
    }

    pub fn build_partition(&self, h: &Hamiltonian) -> Result<SubspacePartition> {
        let source = self
            .partition
            .as_ref()
            .ok_or_else(|| Error::config("partition", "required for this mode"))?;
        match source {
            PartitionSource::BandEdges(edges) => {
                universality::microcanonical_partition(h, edges).map_err(|e| context("partition.band_edges", e))
            }
            PartitionSource::Projectors(sources) => {
                let mut rng = random::stream(self.seed, 0, Purpose::Subsystem);
                let projectors = sources
                    .iter()
                    .enumerate()
                    .map(|(i, s)| self.matrix(s, h.dim(), &format!("partition.projectors[{i}]"), &mut rng))
                    .collect::<Result<Vec<_>>>()?;
                let p = SubspacePartition::new(projectors);
                let violations = universality::validate_partition(h, &p);
                if let Some(v) = violations.first() {
                    return Err(Error::config("partition.projectors", format!("{v:?}")));
                }
                Ok(p)
            }
        }
    }

    pub fn build_measurements(
        &self,
        h: &Hamiltonian,
        partition: Option<&SubspacePartition>,
    ) -> Result<MeasurementSet> {
        if self.measurements.is_empty() {
            return Err(Error::config("measurements", "at least one measurement is required"));
        }
        let d = h.dim();
        let mut rng = random::stream(self.seed, 0, Purpose::Measurement);
        let mut out = Vec::new();
        for (i, source) in self.measurements.iter().enumerate() {
            let field = format!("measurements[{i}]");
            match source {
                MeasurementSource::File(p) => {
                    let povm: Povm = read_json(&self.resolve(p), &field)?;
                    out.push(Povm::new(povm.label, povm.outcomes).map_err(|e| context(&field, e))?);
                }
                MeasurementSource::Inline(povm) => {
                    out.push(Povm::new(povm.label.clone(), povm.outcomes.clone()).map_err(|e| context(&field, e))?);
                }
                MeasurementSource::Random { outcomes } => {
                    if *outcomes == 0 {
                        return Err(Error::config(field, "outcomes must be at least 1"));
                    }
                    out.push(distinguish::random_povm(d, *outcomes, &mut rng));
                }
                MeasurementSource::Energy => {
                    let (_, v) = h.eigenbasis();
                    out.push(Povm::projective("energy", &v)?);
                }
                MeasurementSource::Bands => {
                    let p = partition.ok_or_else(|| Error::config(&field, "needs a partition"))?;
                    out.push(p.band_measurement()?);
                }
                MeasurementSource::PerturbedBands { eta, count } => {
                    let p = partition.ok_or_else(|| Error::config(&field, "needs a partition"))?;
                    let set = universality::perturbed_band_set(p, *eta, *count, &mut rng)
                        .map_err(|e| context(&field, e))?;
                    out.extend(set.measurements);
                }
            }
            if let Some(m) = out.last() {
                if m.dim() != d {
                    return Err(Error::config(field, format!("dimension {} does not match {d}", m.dim())));
                }
            }
        }
        MeasurementSet::new(out)
    }

    pub fn convention(&self, h: &Hamiltonian) -> Result<TimeAverageConvention> {
        let t_max = self
            .time_average
            .t_max
            .unwrap_or_else(|| TimeAverageConvention::default_t_max(h));
        TimeAverageConvention::new(t_max, self.time_average.n_samples, self.seed)
    }
}

fn state_from_json(json: &StateJson) -> Result<DensityOperator> {
    match json {
        StateJson::Vector(pairs) => {
            let v = matrixkit::json::pairs_to_vector(pairs);
            let norm = v.norm();
            if (norm - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidState(format!("state vector has norm {norm}")));
            }
            DensityOperator::pure(v)
        }
        StateJson::Matrix(rows) => DensityOperator::new(matrixkit::json::rows_to_matrix(rows)?),
    }
}

fn eigenmix(h: &Hamiltonian, weights: &[f64]) -> Result<DensityOperator> {
    let field = "state.eigenmix.weights";
    if weights.is_empty() || weights.len() > h.num_levels() {
        return Err(Error::config(field, format!("needs 1..={} entries", h.num_levels())));
    }
    if weights.iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
        return Err(Error::config(field, "weights must be non-negative"));
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::config(field, "weights sum to zero"));
    }
    let mut psi = CVector::zeros(h.dim());
    for (level, w) in h.levels().iter().zip(weights) {
        psi += level.basis.column(0) * matrixkit::c((w / total).sqrt(), 0.0);
    }
    DensityOperator::pure(psi)
}
