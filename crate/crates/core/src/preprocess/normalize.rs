use serde::{Deserialize, Serialize};

use crate::error::{Result, SomError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormalizationKind {
    None,
    #[default]
    Rescale,
    Zscore,
}

impl std::str::FromStr for NormalizationKind {
    type Err = SomError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Self::None),
            "rescale" => Ok(Self::Rescale),
            "zscore" => Ok(Self::Zscore),
            other => Err(SomError::InvalidConfig(format!(
                "normalization must be none|rescale|zscore, got {other:?}"
            ))),
        }
    }
}

/// Fitted per-dimension normalization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum NormalizationParams {
    None { dim: usize },
    Rescale { min: Vec<f64>, max: Vec<f64> },
    Zscore { mean: Vec<f64>, std: Vec<f64> },
}

impl NormalizationParams {
    pub fn fit(kind: NormalizationKind, data: &[Vec<f64>]) -> Result<Self> {
        match kind {
            NormalizationKind::None => {
                let dim = data.first().ok_or(SomError::EmptyData)?.len();
                check_dims(data, dim)?;
                Ok(Self::None { dim })
            }
            NormalizationKind::Rescale => fit_rescale(data),
            NormalizationKind::Zscore => fit_zscore(data),
        }
    }

    pub fn kind(&self) -> NormalizationKind {
        match self {
            Self::None { .. } => NormalizationKind::None,
            Self::Rescale { .. } => NormalizationKind::Rescale,
            Self::Zscore { .. } => NormalizationKind::Zscore,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::None { dim } => *dim,
            Self::Rescale { min, .. } => min.len(),
            Self::Zscore { mean, .. } => mean.len(),
        }
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check(x)?;
        Ok(match self {
            Self::None { .. } => x.to_vec(),
            Self::Rescale { min, max } => x
                .iter()
                .zip(min.iter().zip(max))
                .map(|(v, (lo, hi))| (v - lo) / (hi - lo))
                .collect(),
            Self::Zscore { mean, std } => x
                .iter()
                .zip(mean.iter().zip(std))
                .map(|(v, (mu, sigma))| (v - mu) / sigma)
                .collect(),
        })
    }

    pub fn invert(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check(x)?;
        Ok(match self {
            Self::None { .. } => x.to_vec(),
            Self::Rescale { min, max } => x
                .iter()
                .zip(min.iter().zip(max))
                .map(|(v, (lo, hi))| v * (hi - lo) + lo)
                .collect(),
            Self::Zscore { mean, std } => x
                .iter()
                .zip(mean.iter().zip(std))
                .map(|(v, (mu, sigma))| v * sigma + mu)
                .collect(),
        })
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(SomError::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        Ok(())
    }
}

fn check_dims(data: &[Vec<f64>], dim: usize) -> Result<()> {
    for v in data {
        if v.len() != dim {
            return Err(SomError::DimensionMismatch {
                expected: dim,
                found: v.len(),
            });
        }
    }
    Ok(())
}

/// Min/max rescaling onto `[0, 1]` per dimension.
pub fn fit_rescale(data: &[Vec<f64>]) -> Result<NormalizationParams> {
    let dim = data.first().ok_or(SomError::EmptyData)?.len();
    check_dims(data, dim)?;
    let mut min = vec![f64::INFINITY; dim];
    let mut max = vec![f64::NEG_INFINITY; dim];
    for v in data {
        for (k, &x) in v.iter().enumerate() {
            min[k] = min[k].min(x);
            max[k] = max[k].max(x);
        }
    }
    if let Some(dim) = (0..dim).find(|&k| max[k] <= min[k]) {
        return Err(SomError::DegenerateDimension { dim });
    }
    Ok(NormalizationParams::Rescale { min, max })
}

/// Z-score with the population standard deviation.
pub fn fit_zscore(data: &[Vec<f64>]) -> Result<NormalizationParams> {
    let dim = data.first().ok_or(SomError::EmptyData)?.len();
    check_dims(data, dim)?;
    let n = data.len() as f64;
    let mut mean = vec![0.0; dim];
    for v in data {
        for (acc, x) in mean.iter_mut().zip(v) {
            *acc += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = vec![0.0; dim];
    for v in data {
        for k in 0..dim {
            let d = v[k] - mean[k];
            var[k] += d * d;
        }
    }
    let std: Vec<f64> = var.iter().map(|s| (s / n).sqrt()).collect();
    if let Some(dim) = std.iter().position(|&s| s <= 0.0 || !s.is_finite()) {
        return Err(SomError::DegenerateDimension { dim });
    }
    Ok(NormalizationParams::Zscore { mean, std })
}
