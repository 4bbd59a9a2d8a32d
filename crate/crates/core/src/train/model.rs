use rayon::prelude::*;

use super::batch::{bmu_search, Bmu};
use crate::error::{Result, SomError};
use crate::grid::{check_alpha, Codebook};
use crate::preprocess::{InputVector, NormalizationParams, Vocabulary};

/// A trained map.
#[derive(Debug, Clone, PartialEq)]
pub struct SomModel {
    pub codebook: Codebook,
    /// Per-node category ID (`None` = unassigned). Present only for mixed data.
    pub node_ids: Option<Vec<Option<u32>>>,
    /// Node-by-category weights from the final epoch.
    pub weight_matrix: Option<Vec<Vec<f64>>>,
    pub norm: NormalizationParams,
    pub vocabulary: Option<Vocabulary>,
    /// Weight of the category mismatch term in the mixed distance.
    pub alpha: f64,
}

impl SomModel {
    pub fn new(codebook: Codebook, norm: NormalizationParams) -> Self {
        Self {
            codebook,
            node_ids: None,
            weight_matrix: None,
            norm,
            vocabulary: None,
            alpha: 0.0,
        }
    }

    pub fn is_mixed(&self) -> bool {
        self.node_ids.is_some()
    }

    /// Distance from `x` to `node`: mixed when both sides carry category
    /// information, Euclidean otherwise.
    pub fn distance(&self, x: &InputVector, node: usize) -> Result<f64> {
        self.check_input(x)?;
        let dn = crate::grid::euclidean_distance(&x.numeric, self.codebook.vector(node))?;
        Ok(match (x.category_id(), &self.node_ids) {
            (Some(id), Some(ids)) => dn + self.alpha * crate::grid::category_mismatch(id, ids[node]),
            _ => dn,
        })
    }

    fn check_input(&self, x: &InputVector) -> Result<()> {
        if x.numeric.len() != self.codebook.dim() {
            return Err(SomError::DimensionMismatch {
                expected: self.codebook.dim(),
                found: x.numeric.len(),
            });
        }
        if x.category.is_some() && self.node_ids.is_none() {
            return Err(SomError::InvalidConfig(
                "input carries a category but the model has no node IDs".into(),
            ));
        }
        Ok(())
    }

    /// Checks alpha and that per-node arrays match the codebook.
    pub fn validate(&self) -> Result<()> {
        check_alpha(self.alpha)?;
        if let Some(ids) = &self.node_ids {
            if ids.len() != self.codebook.len() {
                return Err(SomError::ShapeMismatch(format!(
                    "{} node IDs for {} nodes",
                    ids.len(),
                    self.codebook.len()
                )));
            }
        }
        Ok(())
    }

    pub fn find_bmu(&self, x: &InputVector) -> Result<Bmu> {
        self.validate()?;
        self.check_input(x)?;
        Ok(bmu_search(
            &x.numeric,
            x.category_id(),
            &self.codebook,
            self.node_ids.as_deref(),
            self.alpha,
        ))
    }

    /// BMUs for every input, computed in parallel; the result does not
    /// depend on the worker count.
    pub fn assign(&self, inputs: &[InputVector]) -> Result<Vec<Bmu>> {
        self.validate()?;
        inputs.iter().try_for_each(|x| self.check_input(x))?;
        let ids = self.node_ids.as_deref();
        Ok(inputs
            .par_iter()
            .map(|x| bmu_search(&x.numeric, x.category_id(), &self.codebook, ids, self.alpha))
            .collect())
    }
}

/// `(bmu, second_bmu)` of `x`; the second is `None` on a single-node grid.
pub fn find_bmu(x: &InputVector, model: &SomModel) -> Result<(usize, Option<usize>)> {
    let b = model.find_bmu(x)?;
    Ok((b.bmu, b.second))
}
