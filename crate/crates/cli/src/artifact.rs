//! The on-disk model: a versioned JSON document.
//!
//! Floats are written in shortest round-trip form and parsed exactly, so
//! `save(load(f))` reproduces `f` byte for byte.

use std::path::Path;

use serde::{Deserialize, Serialize};
use som3d::{Codebook, EncodingConfig, GridDims, NormalizationParams, SomModel, Vocabulary};

use crate::config::RunConfig;
use crate::error::{CliError, Result};

pub const FORMAT: &str = "som3d-model";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelArtifact {
    pub format: String,
    pub format_version: u32,
    pub dims: GridDims,
    pub dim: usize,
    pub encoding: EncodingConfig,
    pub normalization: NormalizationParams,
    pub vocabulary: Option<Vocabulary>,
    pub alpha: f64,
    pub node_ids: Option<Vec<Option<u32>>>,
    /// One row per node in flat index order.
    pub codebook: Vec<Vec<f64>>,
    pub weight_matrix: Option<Vec<Vec<f64>>>,
    pub config: RunConfig,
}

impl ModelArtifact {
    pub fn new(model: &SomModel, encoding: EncodingConfig, config: RunConfig) -> Self {
        Self {
            format: FORMAT.into(),
            format_version: FORMAT_VERSION,
            dims: model.codebook.dims(),
            dim: model.codebook.dim(),
            encoding,
            normalization: model.norm.clone(),
            vocabulary: model.vocabulary.clone(),
            alpha: model.alpha,
            node_ids: model.node_ids.clone(),
            codebook: model.codebook.to_vectors(),
            weight_matrix: model.weight_matrix.clone(),
            config: RunConfig { out: None, ..config },
        }
    }

    pub fn to_model(&self) -> std::result::Result<SomModel, String> {
        if self.format != FORMAT {
            return Err(format!("format is {:?}, expected {FORMAT:?}", self.format));
        }
        if self.format_version != FORMAT_VERSION {
            return Err(format!(
                "format version {} is not supported (expected {FORMAT_VERSION})",
                self.format_version
            ));
        }
        let dims = GridDims::new(self.dims.l(), self.dims.m(), self.dims.n()).map_err(|e| e.to_string())?;
        if self.encoding.numeric_dim() != self.dim || self.normalization.dim() != self.dim {
            return Err(format!(
                "vector length {} disagrees with encoding ({}) or normalization ({})",
                self.dim,
                self.encoding.numeric_dim(),
                self.normalization.dim()
            ));
        }
        if self.codebook.iter().any(|row| row.len() != self.dim) {
            return Err(format!("codebook rows must have {} components", self.dim));
        }
        if self.encoding.use_category != self.vocabulary.is_some()
            || self.encoding.use_category != self.node_ids.is_some()
        {
            return Err("category encoding, vocabulary and node IDs must be present together".into());
        }
        let codebook = Codebook::from_vectors(dims, self.codebook.clone()).map_err(|e| e.to_string())?;
        let mut model = SomModel::new(codebook, self.normalization.clone());
        model.node_ids = self.node_ids.clone();
        model.weight_matrix = self.weight_matrix.clone();
        model.vocabulary = self.vocabulary.clone();
        model.alpha = self.alpha;
        model.validate().map_err(|e| e.to_string())?;
        if let (Some(ids), Some(vocab)) = (&model.node_ids, &model.vocabulary) {
            if let Some(bad) = ids.iter().flatten().find(|&&id| id == 0 || id as usize > vocab.len()) {
                return Err(format!("node ID {bad} outside vocabulary of {}", vocab.len()));
            }
        }
        Ok(model)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("artifact fields are serializable");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, String> {
        let artifact: Self = serde_json::from_str(text).map_err(|e| e.to_string())?;
        artifact.to_model()?;
        Ok(artifact)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|source| CliError::Write {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text).map_err(|message| CliError::Artifact {
            path: path.to_path_buf(),
            message,
        })
    }
}
