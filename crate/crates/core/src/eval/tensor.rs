use serde::{Deserialize, Serialize};

use crate::error::{Result, SomError};

/// Point counts per cell of a regular grid laid over a bounding box.
/// Cells are stored row-major (last axis fastest).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyTensor {
    divisions: Vec<usize>,
    bounds: Vec<(f64, f64)>,
    counts: Vec<u64>,
}

impl FrequencyTensor {
    pub fn empty(bounds: &[(f64, f64)], divisions: &[usize]) -> Result<Self> {
        if divisions.is_empty() || divisions.len() != bounds.len() {
            return Err(SomError::ShapeMismatch(format!(
                "{} divisions for {} bounded axes",
                divisions.len(),
                bounds.len()
            )));
        }
        if divisions.contains(&0) {
            return Err(SomError::InvalidConfig("divisions must be positive".into()));
        }
        if let Some(axis) = bounds
            .iter()
            .position(|(lo, hi)| !(lo.is_finite() && hi.is_finite() && hi > lo))
        {
            return Err(SomError::InvalidBounds { axis });
        }
        Ok(Self {
            divisions: divisions.to_vec(),
            bounds: bounds.to_vec(),
            counts: vec![0; divisions.iter().product()],
        })
    }

    pub fn divisions(&self) -> &[usize] {
        &self.divisions
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Cell index along `axis` of coordinate `x`, clamped into range.
    pub fn cell_along(&self, axis: usize, x: f64) -> usize {
        let (lo, hi) = self.bounds[axis];
        let d = self.divisions[axis];
        let pos = ((x - lo) / (hi - lo) * d as f64).floor();
        if pos.is_nan() || pos < 0.0 {
            0
        } else {
            (pos as usize).min(d - 1)
        }
    }

    pub fn flat_cell(&self, point: &[f64]) -> Result<usize> {
        if point.len() != self.divisions.len() {
            return Err(SomError::DimensionMismatch {
                expected: self.divisions.len(),
                found: point.len(),
            });
        }
        Ok(point
            .iter()
            .enumerate()
            .fold(0, |acc, (axis, &x)| acc * self.divisions[axis] + self.cell_along(axis, x)))
    }

    pub fn add(&mut self, point: &[f64], weight: u64) -> Result<()> {
        let cell = self.flat_cell(point)?;
        self.counts[cell] += weight;
        Ok(())
    }

    pub fn get(&self, cell: &[usize]) -> Option<u64> {
        if cell.len() != self.divisions.len() || cell.iter().zip(&self.divisions).any(|(c, d)| c >= d) {
            return None;
        }
        let idx = cell
            .iter()
            .zip(&self.divisions)
            .fold(0, |acc, (c, d)| acc * d + c);
        Some(self.counts[idx])
    }

    /// Counts of the sub-tensor at index `s` along axis 0, flattened.
    pub fn slice(&self, s: usize) -> &[u64] {
        let stride = self.counts.len() / self.divisions[0];
        &self.counts[s * stride..(s + 1) * stride]
    }

    pub fn slices(&self) -> impl Iterator<Item = &[u64]> {
        self.counts.chunks_exact(self.counts.len() / self.divisions[0])
    }

    /// Sum over every axis not in `keep`. `keep` must be strictly increasing.
    pub fn marginalize(&self, keep: &[usize]) -> Result<Self> {
        if keep.is_empty() || keep.windows(2).any(|w| w[0] >= w[1]) || *keep.last().unwrap() >= self.divisions.len() {
            return Err(SomError::InvalidAxes(format!("{keep:?}")));
        }
        let divisions: Vec<usize> = keep.iter().map(|&a| self.divisions[a]).collect();
        let bounds: Vec<(f64, f64)> = keep.iter().map(|&a| self.bounds[a]).collect();
        let mut out = Self::empty(&bounds, &divisions)?;
        let mut cell = vec![0usize; self.divisions.len()];
        for &c in &self.counts {
            let idx = keep.iter().fold(0, |acc, &a| acc * self.divisions[a] + cell[a]);
            out.counts[idx] += c;
            for axis in (0..cell.len()).rev() {
                cell[axis] += 1;
                if cell[axis] < self.divisions[axis] {
                    break;
                }
                cell[axis] = 0;
            }
        }
        Ok(out)
    }

    /// Totals per index along `axis`.
    pub fn section_sums(&self, axis: usize) -> Result<Vec<u64>> {
        if axis >= self.divisions.len() {
            return Err(SomError::InvalidAxes(format!("axis {axis}")));
        }
        Ok(self.marginalize(&[axis])?.counts)
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.divisions == other.divisions
    }
}

/// Bins points into cells; points outside `bounds` land in the edge cells.
pub fn frequency_tensor<V: AsRef<[f64]>>(
    points: &[V],
    bounds: &[(f64, f64)],
    divisions: &[usize],
) -> Result<FrequencyTensor> {
    let mut t = FrequencyTensor::empty(bounds, divisions)?;
    for p in points {
        t.add(p.as_ref(), 1)?;
    }
    Ok(t)
}

/// Pearson correlation over flattened cells. Undefined when either side
/// is constant.
pub fn correlation(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(SomError::ShapeMismatch(format!(
            "correlating {} cells with {}",
            x.len(),
            y.len()
        )));
    }
    if x.is_empty() {
        return Err(SomError::EmptyData);
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    match (sxx > 0.0, syy > 0.0) {
        (false, false) => Err(SomError::UndefinedCorrelation("both tensors are constant")),
        (false, true) | (true, false) => Err(SomError::UndefinedCorrelation("one tensor is constant")),
        (true, true) => Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0)),
    }
}

pub(crate) fn as_f64(counts: &[u64]) -> Vec<f64> {
    counts.iter().map(|&c| c as f64).collect()
}

pub fn tensor_correlation(x: &FrequencyTensor, y: &FrequencyTensor) -> Result<f64> {
    if !x.same_shape(y) {
        return Err(SomError::ShapeMismatch(format!(
            "tensor shapes {:?} and {:?}",
            x.divisions(),
            y.divisions()
        )));
    }
    correlation(&as_f64(x.counts()), &as_f64(y.counts()))
}
