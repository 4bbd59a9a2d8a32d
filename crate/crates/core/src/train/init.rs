use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::pca::{pca, Pca};
use crate::error::{Result, SomError};
use crate::grid::{Codebook, GridDims};

/// Conditions detected before training that predict a poorly organized map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrainWarning {
    /// The longest grid side is not axis 0 while the first principal axis
    /// is dominated by a time component. Such maps tend to twist during
    /// training until their longest side follows time.
    RotationHazard {
        dims: GridDims,
        dominant_dimension: usize,
    },
}

impl std::fmt::Display for TrainWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TrainWarning::RotationHazard {
                dims,
                dominant_dimension,
            } => write!(
                f,
                "grid {dims}: largest variance lies along time dimension {dominant_dimension} \
                 but axis 0 is not the longest side; the map is likely to rotate"
            ),
        }
    }
}

#[derive(Debug, Clone)]
pub struct LinearInit {
    pub codebook: Codebook,
    /// `None` when the data has a single point.
    pub pca: Option<Pca>,
    pub warning: Option<TrainWarning>,
}

/// Spreads the grid over the top three principal axes around the data mean.
///
/// Grid axis `k` runs along principal axis `k` (axis 0 along the largest
/// eigenvalue), each coordinate mapped linearly onto `[-2√λ, 2√λ]`. The
/// first `time_dims` input dimensions are the time encoding; they are only
/// used for the rotation-hazard check.
pub fn linear_init<V: AsRef<[f64]>>(
    dims: GridDims,
    data: &[V],
    time_dims: usize,
) -> Result<LinearInit> {
    let first = data.first().ok_or(SomError::EmptyData)?.as_ref();
    let dim = first.len();
    if dim < 3 {
        return Err(SomError::DimensionMismatch {
            expected: 3,
            found: dim,
        });
    }
    let (mean, spans, pca) = if data.len() == 1 {
        (first.to_vec(), vec![vec![0.0; dim]; 3], None)
    } else {
        let p = pca(data)?;
        let spans = (0..3)
            .map(|k| {
                let half = 2.0 * p.eigenvalues[k].sqrt();
                p.eigenvectors[k].iter().map(|e| e * half).collect()
            })
            .collect();
        (p.mean.clone(), spans, Some(p))
    };

    let sides = dims.sides();
    let mut flat = Vec::with_capacity(dims.node_count() * dim);
    for node in 0..dims.node_count() {
        let (a, b, c) = dims.coord_unchecked(node);
        let t = [a, b, c]
            .into_iter()
            .zip(sides)
            .map(|(x, side)| unit_position(x, side));
        let mut v = mean.clone();
        for (tk, span) in t.zip(&spans) {
            for (vi, s) in v.iter_mut().zip(span) {
                *vi += tk * s;
            }
        }
        flat.extend(v);
    }

    let warning = pca.as_ref().and_then(|p| rotation_hazard(dims, p, time_dims));
    if let Some(w) = &warning {
        log::warn!("{w}");
    }
    Ok(LinearInit {
        codebook: Codebook::from_flat(dims, dim, flat),
        pca,
        warning,
    })
}

/// Position of grid coordinate `x` on `[-1, 1]` for a side of `side` nodes.
fn unit_position(x: usize, side: usize) -> f64 {
    if side == 1 {
        0.0
    } else {
        -1.0 + 2.0 * x as f64 / (side - 1) as f64
    }
}

pub fn rotation_hazard(dims: GridDims, pca: &Pca, time_dims: usize) -> Option<TrainWarning> {
    let longest = dims.sides().into_iter().max().unwrap_or(0);
    let dominant = pca.dominant_dimension();
    (longest != dims.l() && dominant < time_dims).then_some(TrainWarning::RotationHazard {
        dims,
        dominant_dimension: dominant,
    })
}

/// Per-dimension `(min, max)` of the data.
pub fn data_bounds<V: AsRef<[f64]>>(data: &[V]) -> Result<Vec<(f64, f64)>> {
    let dim = data.first().ok_or(SomError::EmptyData)?.as_ref().len();
    let mut bounds = vec![(f64::INFINITY, f64::NEG_INFINITY); dim];
    for v in data {
        let v = v.as_ref();
        if v.len() != dim {
            return Err(SomError::DimensionMismatch {
                expected: dim,
                found: v.len(),
            });
        }
        for (b, &x) in bounds.iter_mut().zip(v) {
            b.0 = b.0.min(x);
            b.1 = b.1.max(x);
        }
    }
    Ok(bounds)
}

/// Independent uniform draws within per-dimension bounds.
pub fn random_init(dims: GridDims, bounds: &[(f64, f64)], seed: u64) -> Result<Codebook> {
    if bounds.is_empty() {
        return Err(SomError::EmptyData);
    }
    if let Some(axis) = bounds
        .iter()
        .position(|(lo, hi)| !(lo.is_finite() && hi.is_finite() && lo <= hi))
    {
        return Err(SomError::InvalidBounds { axis });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut flat = Vec::with_capacity(dims.node_count() * bounds.len());
    for _ in 0..dims.node_count() {
        for &(lo, hi) in bounds {
            flat.push(lo + (hi - lo) * rng.random::<f64>());
        }
    }
    Ok(Codebook::from_flat(dims, bounds.len(), flat))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Axis-aligned grid of points with spreads time > lat > lon.
    fn layered_data() -> Vec<Vec<f64>> {
        let mut data = Vec::new();
        for t in 0..10 {
            for y in 0..5 {
                for x in 0..4 {
                    data.push(vec![t as f64 * 1.0, y as f64 * 0.5, x as f64 * 0.2]);
                }
            }
        }
        data
    }

    #[test]
    fn single_node_sits_at_mean() {
        let data = layered_data();
        let init = linear_init(GridDims::new(1, 1, 1).unwrap(), &data, 1).unwrap();
        let p = init.pca.unwrap();
        for (a, b) in init.codebook.vector(0).iter().zip(&p.mean) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn layer_index_follows_time() {
        let dims = GridDims::new(7, 6, 6).unwrap();
        let init = linear_init(dims, &layered_data(), 1).unwrap();
        assert!(init.warning.is_none());
        let cb = &init.codebook;
        for a in 0..7 {
            for b in 0..6 {
                for c in 0..6 {
                    let v = cb.vector(dims.flat_index((a, b, c)).unwrap());
                    let base = cb.vector(dims.flat_index((0, b, c)).unwrap());
                    // Only the layer index moves the time component.
                    let moved = cb.vector(dims.flat_index((a, 0, 0)).unwrap())[0];
                    assert_abs_diff_eq!(v[0], moved, epsilon = 1e-9);
                    assert_abs_diff_eq!(v[1], base[1], epsilon = 1e-9);
                }
            }
        }
        let first = cb.vector(0)[0];
        let last = cb.vector(dims.flat_index((6, 0, 0)).unwrap())[0];
        assert!(last > first);
    }

    #[test]
    fn spans_two_standard_deviations() {
        let data = layered_data();
        let dims = GridDims::new(3, 2, 2).unwrap();
        let init = linear_init(dims, &data, 1).unwrap();
        let p = init.pca.unwrap();
        let last = init.codebook.vector(dims.flat_index((2, 0, 0)).unwrap())[0];
        let first = init.codebook.vector(0)[0];
        assert_abs_diff_eq!(last - first, 4.0 * p.eigenvalues[0].sqrt(), epsilon = 1e-9);
    }

    #[test]
    fn rotation_hazard_warning() {
        let data = layered_data();
        let init = linear_init(GridDims::new(6, 7, 6).unwrap(), &data, 1).unwrap();
        assert!(matches!(
            init.warning,
            Some(TrainWarning::RotationHazard { dominant_dimension: 0, .. })
        ));
        // Not a hazard if the dominant dimension is spatial.
        let init = linear_init(GridDims::new(6, 7, 6).unwrap(), &data, 0).unwrap();
        assert!(init.warning.is_none());
    }

    #[test]
    fn linear_init_needs_three_dims() {
        let data = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        assert!(linear_init(GridDims::new(2, 1, 1).unwrap(), &data, 1).is_err());
    }

    #[test]
    fn random_init_determinism_and_bounds() {
        let dims = GridDims::new(3, 3, 2).unwrap();
        let bounds = [(0.0, 1.0), (-5.0, -4.0), (10.0, 30.0)];
        let a = random_init(dims, &bounds, 7).unwrap();
        let b = random_init(dims, &bounds, 7).unwrap();
        let c = random_init(dims, &bounds, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        for v in a.iter() {
            for (x, (lo, hi)) in v.iter().zip(bounds) {
                assert!((lo..=hi).contains(x));
            }
        }
        assert!(random_init(dims, &[(1.0, 0.0)], 0).is_err());
    }
}
