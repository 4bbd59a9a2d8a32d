//! Category handling for mixed numeric/categorical data: the node-by-category
//! weight matrix and the rules that turn it into one ID per node.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::batch::NeighborhoodMatrix;
use crate::error::{Result, SomError};
use crate::preprocess::CategoryVector;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum IdAssignment {
    #[default]
    WinnerTakeAll,
    Probabilistic { seed: u64 },
    /// Winner-take-all when the leading category holds at least `threshold`
    /// of the row mass, otherwise a proportional draw.
    Hybrid { threshold: f64, seed: u64 },
}

impl IdAssignment {
    pub fn validate(&self) -> Result<()> {
        match self {
            IdAssignment::Hybrid { threshold, .. } if !(0.0..=1.0).contains(threshold) => Err(
                SomError::InvalidConfig(format!("hybrid threshold {threshold} outside [0, 1]")),
            ),
            _ => Ok(()),
        }
    }
}

/// `W = H · (Fᵀ · C)`: entry `(i, j)` is the neighborhood-weighted number of
/// category-`j` inputs around node `i`. `bmus[t]` is the BMU of input `t`,
/// which stands in for the one-hot row `t` of `F`.
pub fn compute_weight_matrix(
    h: &NeighborhoodMatrix,
    bmus: &[usize],
    categories: &[CategoryVector],
) -> Result<Vec<Vec<f64>>> {
    if bmus.len() != categories.len() {
        return Err(SomError::ShapeMismatch(format!(
            "{} BMUs but {} category rows",
            bmus.len(),
            categories.len()
        )));
    }
    let k = categories.first().map_or(0, |c| c.k() as usize);
    if categories.iter().any(|c| c.k() as usize != k) {
        return Err(SomError::ShapeMismatch("category vectors differ in length".into()));
    }
    let ids: Vec<u32> = categories.iter().map(CategoryVector::id).collect();
    weight_matrix_from_ids(h, bmus, &ids, k)
}

pub(crate) fn weight_matrix_from_ids(
    h: &NeighborhoodMatrix,
    bmus: &[usize],
    ids: &[u32],
    k: usize,
) -> Result<Vec<Vec<f64>>> {
    let nodes = h.nodes();
    // Fᵀ·C: per-node category counts.
    let mut counts = vec![0.0f64; nodes * k];
    for (&c, &id) in bmus.iter().zip(ids) {
        if c >= nodes {
            return Err(SomError::IndexOutOfBounds { index: c, nodes });
        }
        counts[c * k + (id as usize - 1)] += 1.0;
    }
    let occupied: Vec<usize> = (0..nodes)
        .filter(|&c| counts[c * k..(c + 1) * k].iter().any(|&v| v > 0.0))
        .collect();
    Ok((0..nodes)
        .map(|i| {
            let mut row = vec![0.0; k];
            let weights = h.row(i);
            for &c in &occupied {
                let w = weights[c];
                for (r, n) in row.iter_mut().zip(&counts[c * k..(c + 1) * k]) {
                    *r += w * n;
                }
            }
            row
        })
        .collect())
}

fn argmax_first(row: &[f64]) -> Option<u32> {
    let mut best: Option<(usize, f64)> = None;
    for (j, &w) in row.iter().enumerate() {
        if w > 0.0 && best.is_none_or(|(_, b)| w > b) {
            best = Some((j, w));
        }
    }
    best.map(|(j, _)| j as u32 + 1)
}

fn sample_row(row: &[f64], rng: &mut impl Rng) -> Option<u32> {
    let total: f64 = row.iter().sum();
    if !(total > 0.0) {
        return None;
    }
    let target = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last_positive = None;
    for (j, &w) in row.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        acc += w;
        last_positive = Some(j as u32 + 1);
        if target < acc {
            return last_positive;
        }
    }
    last_positive
}

/// Row argmax, first column on ties, `None` for all-zero rows.
pub fn assign_ids_wta(w: &[Vec<f64>]) -> Vec<Option<u32>> {
    w.iter().map(|row| argmax_first(row)).collect()
}

/// Draws each node's ID with probability proportional to its row.
pub fn assign_ids_probabilistic(w: &[Vec<f64>], seed: u64) -> Vec<Option<u32>> {
    IdAssigner::new(IdAssignment::Probabilistic { seed }).assign(w)
}

pub fn assign_ids_hybrid(w: &[Vec<f64>], threshold: f64, seed: u64) -> Vec<Option<u32>> {
    IdAssigner::new(IdAssignment::Hybrid { threshold, seed }).assign(w)
}

/// Stateful assigner: the random stream continues across calls, so the
/// per-epoch reassignment during training stays reproducible.
#[derive(Debug, Clone)]
pub struct IdAssigner {
    mode: IdAssignment,
    rng: ChaCha8Rng,
}

impl IdAssigner {
    pub fn new(mode: IdAssignment) -> Self {
        let seed = match mode {
            IdAssignment::WinnerTakeAll => 0,
            IdAssignment::Probabilistic { seed } | IdAssignment::Hybrid { seed, .. } => seed,
        };
        Self {
            mode,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn assign(&mut self, w: &[Vec<f64>]) -> Vec<Option<u32>> {
        match self.mode {
            IdAssignment::WinnerTakeAll => assign_ids_wta(w),
            IdAssignment::Probabilistic { .. } => {
                w.iter().map(|row| sample_row(row, &mut self.rng)).collect()
            }
            IdAssignment::Hybrid { threshold, .. } => w
                .iter()
                .map(|row| {
                    let total: f64 = row.iter().sum();
                    let top = row.iter().copied().fold(0.0, f64::max);
                    if total > 0.0 && top / total >= threshold {
                        argmax_first(row)
                    } else {
                        sample_row(row, &mut self.rng)
                    }
                })
                .collect(),
        }
    }
}
