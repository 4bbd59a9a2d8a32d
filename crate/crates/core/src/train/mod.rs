//! Initialization and batch-mode training.

mod batch;
mod hetero;
mod init;
mod model;
mod pca;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use batch::{batch_epoch, gaussian_weight, Bmu, NeighborhoodMatrix};
pub use hetero::{
    assign_ids_hybrid, assign_ids_probabilistic, assign_ids_wta, compute_weight_matrix,
    IdAssigner, IdAssignment,
};
pub use init::{data_bounds, linear_init, random_init, rotation_hazard, LinearInit, TrainWarning};
pub use model::{find_bmu, SomModel};
pub use pca::{pca, Pca};

use crate::error::{Result, SomError};
use crate::grid::{euclidean_distance, GridDims};
use crate::preprocess::{Dataset, InputVector, NormalizationParams, Vocabulary};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiusSchedule {
    pub start: f64,
    pub end: f64,
}

impl RadiusSchedule {
    /// Linear decay from half the longest side down to 0.5.
    pub fn for_grid(dims: GridDims) -> Self {
        let end = 0.5;
        let longest = dims.sides().into_iter().max().unwrap_or(1) as f64;
        Self {
            start: (longest / 2.0).max(end),
            end,
        }
    }

    pub fn radius(&self, epoch: usize, epochs: usize) -> f64 {
        if epochs <= 1 {
            return self.start;
        }
        self.start + (self.end - self.start) * epoch as f64 / (epochs - 1) as f64
    }

    fn validate(&self) -> Result<()> {
        if !(self.end > 0.0 && self.end.is_finite()) {
            return Err(SomError::InvalidRadius(self.end));
        }
        if !(self.start >= self.end && self.start.is_finite()) {
            return Err(SomError::InvalidConfig(format!(
                "radius schedule must not grow: start {} < end {}",
                self.start, self.end
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Init {
    #[default]
    Linear,
    Random {
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum AlphaSetting {
    Fixed { value: f64 },
    /// Mean numeric distance over 1,000 random input pairs.
    Estimate { seed: u64 },
}

impl Default for AlphaSetting {
    fn default() -> Self {
        AlphaSetting::Estimate { seed: 0 }
    }
}

const ALPHA_SAMPLE_PAIRS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingConfig {
    pub dims: GridDims,
    pub epochs: usize,
    pub radius: RadiusSchedule,
    pub init: Init,
    pub alpha: AlphaSetting,
    pub id_assignment: IdAssignment,
    /// How many leading numeric components encode time. Only consulted
    /// for the rotation-hazard warning.
    pub time_dims: usize,
}

impl TrainingConfig {
    pub fn new(dims: GridDims) -> Self {
        Self {
            dims,
            epochs: 100,
            radius: RadiusSchedule::for_grid(dims),
            init: Init::Linear,
            alpha: AlphaSetting::default(),
            id_assignment: IdAssignment::WinnerTakeAll,
            time_dims: 1,
        }
    }

    pub fn with_epochs(mut self, epochs: usize) -> Self {
        self.epochs = epochs;
        self
    }

    pub fn with_init(mut self, init: Init) -> Self {
        self.init = init;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(SomError::InvalidConfig("epochs must be at least 1".into()));
        }
        self.radius.validate()?;
        if let AlphaSetting::Fixed { value } = self.alpha {
            crate::grid::check_alpha(value)?;
        }
        self.id_assignment.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub radius: f64,
    /// Mean BMU distance at the start of the epoch.
    pub qe: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: SomModel,
    pub history: Vec<EpochRecord>,
    /// BMUs of the training inputs against the final model.
    pub assignments: Vec<Bmu>,
    pub warnings: Vec<TrainWarning>,
}

/// Mean numeric distance between randomly drawn input pairs.
pub fn estimate_alpha(inputs: &[InputVector], seed: u64) -> f64 {
    if inputs.len() < 2 {
        return 0.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut total = 0.0;
    for _ in 0..ALPHA_SAMPLE_PAIRS {
        let a = rng.random_range(0..inputs.len());
        let b = rng.random_range(0..inputs.len());
        total += euclidean_distance(&inputs[a].numeric, &inputs[b].numeric).unwrap_or(0.0);
    }
    total / ALPHA_SAMPLE_PAIRS as f64
}

/// Trains on an encoded dataset, keeping its normalization and vocabulary
/// in the resulting model.
pub fn train_dataset(dataset: &Dataset, config: &TrainingConfig) -> Result<TrainOutcome> {
    train_with(
        &dataset.inputs,
        config,
        dataset.norm.clone(),
        dataset.vocabulary.clone(),
    )
}

/// Trains on inputs that carry no normalization metadata.
pub fn train(inputs: &[InputVector], config: &TrainingConfig) -> Result<TrainOutcome> {
    let dim = inputs.first().ok_or(SomError::EmptyData)?.numeric.len();
    train_with(inputs, config, NormalizationParams::None { dim }, None)
}

pub fn train_with(
    inputs: &[InputVector],
    config: &TrainingConfig,
    norm: NormalizationParams,
    vocabulary: Option<Vocabulary>,
) -> Result<TrainOutcome> {
    config.validate()?;
    let dim = inputs.first().ok_or(SomError::EmptyData)?.numeric.len();
    if let Some(x) = inputs.iter().find(|x| x.numeric.len() != dim) {
        return Err(SomError::DimensionMismatch {
            expected: dim,
            found: x.numeric.len(),
        });
    }
    let k = category_count(inputs, vocabulary.as_ref())?;
    let dims = config.dims;
    let numeric: Vec<&[f64]> = inputs.iter().map(|x| x.numeric.as_slice()).collect();

    let mut warnings = Vec::new();
    let codebook = match config.init {
        Init::Linear => {
            let init = linear_init(dims, &numeric, config.time_dims)?;
            warnings.extend(init.warning);
            init.codebook
        }
        Init::Random { seed } => random_init(dims, &data_bounds(&numeric)?, seed)?,
    };

    let mut model = SomModel::new(codebook, norm);
    model.vocabulary = vocabulary;
    let ids: Option<Vec<u32>> = k.map(|_| {
        inputs
            .iter()
            .map(|x| x.category_id().expect("checked by category_count"))
            .collect()
    });
    if k.is_some() {
        model.node_ids = Some(vec![None; dims.node_count()]);
        model.alpha = match config.alpha {
            AlphaSetting::Fixed { value } => value,
            AlphaSetting::Estimate { seed } => estimate_alpha(inputs, seed),
        };
    }
    let mut assigner = IdAssigner::new(config.id_assignment);

    let mut history = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        let radius = config.radius.radius(epoch, config.epochs);
        let assignments = model.assign(inputs)?;
        let qe = assignments.iter().map(|b| b.distance).sum::<f64>() / inputs.len() as f64;
        let bmus: Vec<usize> = assignments.iter().map(|b| b.bmu).collect();
        let h = NeighborhoodMatrix::gaussian(dims, radius)?;
        model.codebook = batch::batch_update(&model.codebook, &numeric, &bmus, &h)?;
        if let Some(node) = model.codebook.first_non_finite() {
            return Err(SomError::NonFinite { node, epoch });
        }
        if let (Some(k), Some(ids)) = (k, &ids) {
            let w = hetero::weight_matrix_from_ids(&h, &bmus, ids, k)?;
            model.node_ids = Some(assigner.assign(&w));
            model.weight_matrix = Some(w);
        }
        log::debug!("epoch {epoch}: radius {radius:.4}, qe {qe:.6}");
        history.push(EpochRecord { epoch, radius, qe });
    }

    let assignments = model.assign(inputs)?;
    Ok(TrainOutcome {
        model,
        history,
        assignments,
        warnings,
    })
}

/// `Some(k)` when every input carries a category, `None` when none do.
fn category_count(inputs: &[InputVector], vocabulary: Option<&Vocabulary>) -> Result<Option<usize>> {
    let with = inputs.iter().filter(|x| x.category.is_some()).count();
    if with == 0 {
        return Ok(None);
    }
    if with != inputs.len() {
        return Err(SomError::InvalidConfig(
            "either all inputs or none must carry a category".into(),
        ));
    }
    let k = inputs[0].category.expect("nonempty").k() as usize;
    if inputs.iter().any(|x| x.category.is_some_and(|c| c.k() as usize != k)) {
        return Err(SomError::ShapeMismatch("category vectors differ in length".into()));
    }
    if let Some(v) = vocabulary {
        if v.len() != k {
            return Err(SomError::ShapeMismatch(format!(
                "vocabulary has {} labels, categories have {k}",
                v.len()
            )));
        }
    }
    Ok(Some(k))
}
