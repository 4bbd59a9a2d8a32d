//! Three-dimensional self-organizing maps for temporal-spatial point data.
//!
//! Records (time, latitude, longitude, optional category) are encoded into
//! vectors whose time part is a *time vector*: one fraction per period
//! (minute of day / 1440, day of week / 7, month / 12). A lattice of
//! `l x m x n` nodes is initialized along the principal axes of the data and
//! trained in batch mode with a Gaussian neighborhood. Mixed data is handled
//! with a per-node category ID chosen from a neighborhood-weighted
//! node-by-category matrix.
//!
//! Evaluation covers quantization and topographic error and a
//! density-based reliability check: input space is cut into cells and the
//! per-cell counts of inputs, nodes and hits are correlated.
//!
//! ```
//! use som3d::{build_dataset, synth, train_dataset, EncodingConfig, GridDims, TrainingConfig};
//!
//! let records = synth::clustered_records(&synth::three_clusters(), 500, 1);
//! let data = build_dataset(&records, &EncodingConfig::default()).unwrap();
//! let config = TrainingConfig::new(GridDims::new(4, 3, 3).unwrap()).with_epochs(10);
//! let outcome = train_dataset(&data, &config).unwrap();
//! assert_eq!(outcome.model.codebook.len(), 36);
//! ```

pub mod error;
pub mod eval;
pub mod grid;
pub mod preprocess;
pub mod synth;
pub mod train;

pub use error::{Result, SomError};
pub use eval::{
    evaluate, EvaluateOptions, EvaluationReport, FrequencyTensor, HitBinning, ProjectionSpec,
};
pub use grid::{euclidean_distance, mixed_distance, Codebook, Connectivity, GridDims};
pub use preprocess::{
    build_dataset, encode_with, CategoryVector, Dataset, EncodingConfig, IncidentRecord,
    InputVector, NormalizationKind, NormalizationParams, Period, TimeVector, Vocabulary,
};
pub use train::{
    train, train_dataset, Bmu, IdAssignment, Init, SomModel, TrainOutcome, TrainingConfig,
};
