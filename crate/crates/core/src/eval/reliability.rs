use serde::{Deserialize, Serialize};

use super::tensor::{as_f64, correlation, tensor_correlation, FrequencyTensor};
use crate::error::{Result, SomError};
use crate::preprocess::InputVector;
use crate::train::SomModel;

/// Where a node's hits are counted in the hits tensor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HitBinning {
    /// In the cell containing the node's codebook vector, weighted by its
    /// hit count.
    #[default]
    AtNode,
    /// In the cell of each input. Identical to the input tensor unless the
    /// set of inputs is filtered (per-category analysis).
    AtInput,
}

/// Keeps the listed components of each vector, in the listed order.
pub fn project<V: AsRef<[f64]>>(vectors: &[V], axes: &[usize]) -> Result<Vec<Vec<f64>>> {
    let dim = vectors.first().map(|v| v.as_ref().len());
    if let Some(dim) = dim {
        validate_axes(axes, dim)?;
    } else if axes.is_empty() {
        return Err(SomError::InvalidAxes("no axes kept".into()));
    }
    vectors
        .iter()
        .map(|v| {
            let v = v.as_ref();
            if Some(v.len()) != dim {
                return Err(SomError::DimensionMismatch {
                    expected: dim.unwrap_or(0),
                    found: v.len(),
                });
            }
            Ok(axes.iter().map(|&a| v[a]).collect())
        })
        .collect()
}

pub fn validate_axes(axes: &[usize], dim: usize) -> Result<()> {
    if axes.is_empty() {
        return Err(SomError::InvalidAxes("no axes kept".into()));
    }
    for (i, &a) in axes.iter().enumerate() {
        if a >= dim {
            return Err(SomError::InvalidAxes(format!("axis {a} outside 0..{dim}")));
        }
        if axes[..i].contains(&a) {
            return Err(SomError::InvalidAxes(format!("axis {a} repeated")));
        }
    }
    Ok(())
}

/// Per-axis `(min, max)` of already projected points.
pub fn projected_bounds(points: &[Vec<f64>]) -> Result<Vec<(f64, f64)>> {
    let dim = points.first().ok_or(SomError::EmptyData)?.len();
    let mut b = vec![(f64::INFINITY, f64::NEG_INFINITY); dim];
    for p in points {
        for (bb, &x) in b.iter_mut().zip(p) {
            bb.0 = bb.0.min(x);
            bb.1 = bb.1.max(x);
        }
    }
    if let Some(axis) = b.iter().position(|(lo, hi)| hi <= lo) {
        return Err(SomError::InvalidBounds { axis });
    }
    Ok(b)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SliceCorrelation {
    pub nodes: Option<f64>,
    pub hits: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reliability {
    pub axes: Vec<usize>,
    pub input: FrequencyTensor,
    pub nodes: FrequencyTensor,
    pub hits: FrequencyTensor,
    /// `None` when the correlation is undefined (a constant tensor).
    pub nodes_vs_input: Option<f64>,
    pub hits_vs_input: Option<f64>,
    /// One entry per index along the first projected axis.
    pub per_slice: Vec<SliceCorrelation>,
}

/// Input, node and hit tensors for a projection plus their correlations.
/// `bmus` are the BMUs of `inputs` under `model`.
pub fn reliability(
    inputs: &[InputVector],
    model: &SomModel,
    bmus: &[usize],
    axes: &[usize],
    divisions: &[usize],
    binning: HitBinning,
) -> Result<Reliability> {
    let points = project(inputs.iter().map(|x| &x.numeric).collect::<Vec<_>>().as_slice(), axes)?;
    let bounds = projected_bounds(&points)?;
    let nodes_proj = project(&model.codebook.to_vectors(), axes)?;
    let everything = vec![true; model.codebook.len()];
    let all_inputs = vec![true; inputs.len()];
    reliability_subset(
        &points,
        &nodes_proj,
        bmus,
        &bounds,
        divisions,
        binning,
        &Subset {
            inputs: &all_inputs,
            nodes: &everything,
            hits_of: &all_inputs,
        },
        axes,
    )
}

/// Masks selecting which inputs feed the input tensor, which nodes feed the
/// node tensor, and which inputs count as hits.
pub(crate) struct Subset<'a> {
    pub inputs: &'a [bool],
    pub nodes: &'a [bool],
    pub hits_of: &'a [bool],
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn reliability_subset(
    points: &[Vec<f64>],
    nodes_proj: &[Vec<f64>],
    bmus: &[usize],
    bounds: &[(f64, f64)],
    divisions: &[usize],
    binning: HitBinning,
    subset: &Subset<'_>,
    axes: &[usize],
) -> Result<Reliability> {
    if bmus.len() != points.len() {
        return Err(SomError::ShapeMismatch(format!(
            "{} inputs but {} BMUs",
            points.len(),
            bmus.len()
        )));
    }
    let mut input = FrequencyTensor::empty(bounds, divisions)?;
    let mut nodes = input.clone();
    let mut hits = input.clone();
    let mut hit_counts = vec![0u64; nodes_proj.len()];
    for (i, p) in points.iter().enumerate() {
        if subset.inputs[i] {
            input.add(p, 1)?;
        }
        if subset.hits_of[i] {
            match binning {
                HitBinning::AtNode => {
                    let b = bmus[i];
                    *hit_counts.get_mut(b).ok_or(SomError::IndexOutOfBounds {
                        index: b,
                        nodes: nodes_proj.len(),
                    })? += 1;
                }
                HitBinning::AtInput => hits.add(p, 1)?,
            }
        }
    }
    for (node, v) in nodes_proj.iter().enumerate() {
        if subset.nodes[node] {
            nodes.add(v, 1)?;
        }
        if hit_counts[node] > 0 {
            hits.add(v, hit_counts[node])?;
        }
    }

    let per_slice = input
        .slices()
        .zip(nodes.slices().zip(hits.slices()))
        .map(|(i, (n, h))| {
            let ic = as_f64(i);
            SliceCorrelation {
                nodes: correlation(&ic, &as_f64(n)).ok(),
                hits: correlation(&ic, &as_f64(h)).ok(),
            }
        })
        .collect();
    Ok(Reliability {
        axes: axes.to_vec(),
        nodes_vs_input: tensor_correlation(&nodes, &input).ok(),
        hits_vs_input: tensor_correlation(&hits, &input).ok(),
        per_slice,
        input,
        nodes,
        hits,
    })
}

/// `1 - SS_res / SS_tot` of the least-squares line `y = a + b·x`.
pub fn r_squared(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(SomError::ShapeMismatch(format!("{} vs {} samples", x.len(), y.len())));
    }
    if x.len() < 2 {
        return Err(SomError::UndefinedRegression("need at least 2 samples"));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let ss_tot: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(SomError::UndefinedRegression("regressor is constant"));
    }
    if ss_tot <= 0.0 {
        return Err(SomError::UndefinedRegression("response is constant"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    Ok(1.0 - ss_res / ss_tot)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectionSums {
    pub input: Vec<u64>,
    pub nodes: Vec<u64>,
    pub hits: Vec<u64>,
    pub r2_nodes: Option<f64>,
    pub r2_hits: Option<f64>,
}

impl SectionSums {
    /// Regresses node and hit sums on input sums.
    pub fn from_sums(input: Vec<u64>, nodes: Vec<u64>, hits: Vec<u64>) -> Result<Self> {
        if input.len() < 2 {
            return Err(SomError::InvalidConfig("need at least 2 sections".into()));
        }
        if nodes.len() != input.len() || hits.len() != input.len() {
            return Err(SomError::ShapeMismatch("section counts differ".into()));
        }
        let x = as_f64(&input);
        if x.iter().all(|&v| v == x[0]) {
            return Err(SomError::UndefinedRegression("input section sums are constant"));
        }
        Ok(Self {
            r2_nodes: r_squared(&x, &as_f64(&nodes)).ok(),
            r2_hits: r_squared(&x, &as_f64(&hits)).ok(),
            input,
            nodes,
            hits,
        })
    }
}

/// Section totals along `axis` of a reliability result, with r² of nodes
/// and hits against input.
pub fn section_sums_r2(rel: &Reliability, axis: usize) -> Result<SectionSums> {
    SectionSums::from_sums(
        rel.input.section_sums(axis)?,
        rel.nodes.section_sums(axis)?,
        rel.hits.section_sums(axis)?,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Codebook, GridDims};
    use crate::preprocess::NormalizationParams;
    use crate::eval::tensor::frequency_tensor;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    const INPUT: [u64; 8] = [976, 540, 729, 1041, 1239, 1380, 1244, 667];
    const NODES: [u64; 8] = [89, 72, 73, 103, 106, 121, 111, 43];
    const HITS: [u64; 8] = [966, 577, 663, 1121, 1201, 1387, 1280, 621];

    #[test]
    fn published_section_sums() {
        let s = SectionSums::from_sums(INPUT.to_vec(), NODES.to_vec(), HITS.to_vec()).unwrap();
        assert!((s.r2_hits.unwrap() - 0.98).abs() <= 0.005, "{:?}", s.r2_hits);
        assert!((s.r2_nodes.unwrap() - 0.81).abs() <= 0.01, "{:?}", s.r2_nodes);
    }

    #[test]
    fn proportional_sums_fit_exactly() {
        let hits: Vec<u64> = INPUT.iter().map(|v| v * 3).collect();
        let s = SectionSums::from_sums(INPUT.to_vec(), NODES.to_vec(), hits).unwrap();
        assert_abs_diff_eq!(s.r2_hits.unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn regression_errors() {
        assert!(SectionSums::from_sums(vec![5, 5, 5], vec![1, 2, 3], vec![1, 2, 3]).is_err());
        assert!(SectionSums::from_sums(vec![5], vec![1], vec![1]).is_err());
        let s = SectionSums::from_sums(vec![1, 2, 3], vec![4, 4, 4], vec![1, 2, 3]).unwrap();
        assert_eq!(s.r2_nodes, None);
        assert!(r_squared(&[1.0, 2.0], &[1.0]).is_err());
    }

    #[test]
    fn projection_examples() {
        let v = vec![vec![0.1, 0.2, 0.3, 0.4], vec![0.5, 0.6, 0.7, 0.8]];
        assert_eq!(project(&v, &[0, 1, 2, 3]).unwrap(), v);
        assert_eq!(project(&v, &[0, 2, 3]).unwrap(), vec![vec![0.1, 0.3, 0.4], vec![0.5, 0.7, 0.8]]);
        assert_eq!(project(&v, &[0, 1]).unwrap(), vec![vec![0.1, 0.2], vec![0.5, 0.6]]);
        assert!(project(&v, &[]).is_err());
        assert!(project(&v, &[1, 1]).is_err());
        assert!(project(&v, &[4]).is_err());
    }

    /// Nodes at cell centroids with hit counts equal to the cell counts.
    #[test]
    fn centroid_model_has_perfect_hit_correlation() {
        let mut inputs = Vec::new();
        let mut centroids = Vec::new();
        let mut bmus = Vec::new();
        let cells = [(0.1, 0.1, 0.1, 5), (0.6, 0.2, 0.7, 2), (0.8, 0.9, 0.3, 9), (0.3, 0.7, 0.8, 1)];
        for (node, &(a, b, c, n)) in cells.iter().enumerate() {
            for k in 0..n {
                let jitter = 0.01 * k as f64;
                inputs.push(InputVector::numeric(vec![a + jitter, b - jitter, c + jitter]));
                bmus.push(node);
            }
            centroids.push(vec![a + 0.005 * (n - 1) as f64, b - 0.005 * (n - 1) as f64, c + 0.005 * (n - 1) as f64]);
        }
        // Stretch the bounds to the unit cube.
        inputs.push(InputVector::numeric(vec![0.0, 0.0, 0.0]));
        inputs.push(InputVector::numeric(vec![1.0, 1.0, 1.0]));
        centroids.push(vec![0.0, 0.0, 0.0]);
        centroids.push(vec![1.0, 1.0, 1.0]);
        bmus.push(4);
        bmus.push(5);
        let model = SomModel::new(
            Codebook::from_vectors(GridDims::new(6, 1, 1).unwrap(), centroids).unwrap(),
            NormalizationParams::None { dim: 3 },
        );
        let rel = reliability(&inputs, &model, &bmus, &[0, 1, 2], &[2, 2, 2], HitBinning::AtNode).unwrap();
        assert_abs_diff_eq!(rel.hits_vs_input.unwrap(), 1.0, epsilon = 1e-12);
        assert_eq!(rel.hits.total(), inputs.len() as u64);
        assert_eq!(rel.per_slice.len(), 2);
    }

    proptest! {
        #[test]
        fn projection_commutes_with_marginalization(
            pts in prop::collection::vec(prop::collection::vec(0.0f64..1.0, 3), 1..60),
            d in prop::array::uniform3(1usize..5),
            keep in prop::sample::subsequence(vec![0usize, 1, 2], 1..=3),
        ) {
            let bounds = [(0.0, 1.0); 3];
            let full = frequency_tensor(&pts, &bounds, &d).unwrap();
            let sub_bounds: Vec<_> = keep.iter().map(|&a| bounds[a]).collect();
            let sub_div: Vec<_> = keep.iter().map(|&a| d[a]).collect();
            let direct = frequency_tensor(&project(&pts, &keep).unwrap(), &sub_bounds, &sub_div).unwrap();
            prop_assert_eq!(full.marginalize(&keep).unwrap(), direct);
        }
    }
}
