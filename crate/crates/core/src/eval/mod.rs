//! Map quality and reliability: QE, TE, frequency tensors, correlations,
//! section sums and the per-category breakdown.

mod metrics;
mod reliability;
mod tensor;

use serde::{Deserialize, Serialize};

pub use metrics::{
    qe_from_assignments, quantization_error, te_from_assignments, topographic_error,
    topographic_error_with,
};
pub use reliability::{
    project, projected_bounds, r_squared, reliability, section_sums_r2, validate_axes,
    HitBinning, Reliability, SectionSums, SliceCorrelation,
};
pub use tensor::{correlation, frequency_tensor, tensor_correlation, FrequencyTensor};

use reliability::{reliability_subset, Subset};

use crate::error::{Result, SomError};
use crate::grid::Connectivity;
use crate::preprocess::{InputVector, Period};
use crate::train::SomModel;

/// Default cells along time, latitude and longitude.
pub const DEFAULT_DIVISIONS: [usize; 3] = [8, 5, 5];

/// A named coordinate projection and the cell counts used on it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectionSpec {
    pub name: String,
    pub axes: Vec<usize>,
    pub divisions: Vec<usize>,
}

fn period_divisions(period: Period, time_divisions: usize) -> usize {
    match period {
        Period::Day => time_divisions,
        Period::Week => 7,
        Period::Month => 12,
    }
}

/// Projections for vectors laid out as `[periods..., lat, lon]`: one
/// `period-lat-lon` subspace per period, then every period-period plane.
/// Week and month axes get one cell per day or month.
pub fn default_projections(periods: &[Period], divisions: [usize; 3]) -> Vec<ProjectionSpec> {
    let p = periods.len();
    let mut out: Vec<ProjectionSpec> = periods
        .iter()
        .enumerate()
        .map(|(i, &period)| ProjectionSpec {
            name: format!("{}-lat-lon", period.name()),
            axes: vec![i, p, p + 1],
            divisions: vec![period_divisions(period, divisions[0]), divisions[1], divisions[2]],
        })
        .collect();
    for i in 0..p {
        for j in i + 1..p {
            out.push(ProjectionSpec {
                name: format!("{}-{}", periods[i].name(), periods[j].name()),
                axes: vec![i, j],
                divisions: vec![
                    period_divisions(periods[i], divisions[0]),
                    period_divisions(periods[j], divisions[0]),
                ],
            });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionReport {
    pub name: String,
    pub axes: Vec<usize>,
    pub divisions: Vec<usize>,
    pub nodes_vs_input: Option<f64>,
    pub hits_vs_input: Option<f64>,
    pub per_slice: Vec<SliceCorrelation>,
    /// Totals per index of the first axis; absent when undefined.
    pub sections: Option<SectionSums>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryRow {
    pub id: u32,
    pub label: Option<String>,
    pub input_count: u64,
    pub node_count: u64,
    pub hit_count: u64,
    /// No node carries this ID.
    pub absent: bool,
    /// `None` when absent.
    pub nodes_vs_input: Option<f64>,
    pub hits_vs_input: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryReport {
    pub projection: ProjectionSpec,
    pub rows: Vec<CategoryRow>,
    /// r² of per-ID node and hit counts against per-ID input counts.
    pub r2_nodes: Option<f64>,
    pub r2_hits: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub input_count: usize,
    pub qe: f64,
    /// Absent on single-node grids.
    pub te: Option<f64>,
    pub connectivity: Connectivity,
    pub hit_binning: HitBinning,
    pub projections: Vec<ProjectionReport>,
    pub per_category: Option<CategoryReport>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluateOptions {
    pub projections: Vec<ProjectionSpec>,
    pub connectivity: Connectivity,
    pub binning: HitBinning,
}

/// Per-ID reliability: inputs carrying the ID against nodes carrying it and
/// the hits of those nodes.
pub fn per_category_reliability(
    inputs: &[InputVector],
    model: &SomModel,
    bmus: &[usize],
    projection: &ProjectionSpec,
    binning: HitBinning,
) -> Result<CategoryReport> {
    let node_ids = model
        .node_ids
        .as_ref()
        .ok_or_else(|| SomError::InvalidConfig("model has no node IDs".into()))?;
    let input_ids: Vec<u32> = inputs
        .iter()
        .map(|x| x.category_id().ok_or(SomError::MissingCategory { line: None }))
        .collect::<Result<_>>()?;
    let k = inputs
        .first()
        .and_then(|x| x.category)
        .ok_or(SomError::EmptyData)?
        .k();
    if bmus.len() != inputs.len() {
        return Err(SomError::ShapeMismatch(format!(
            "{} inputs but {} BMUs",
            inputs.len(),
            bmus.len()
        )));
    }

    let points = project(
        inputs.iter().map(|x| &x.numeric).collect::<Vec<_>>().as_slice(),
        &projection.axes,
    )?;
    let bounds = projected_bounds(&points)?;
    let nodes_proj = project(&model.codebook.to_vectors(), &projection.axes)?;

    let mut rows = Vec::with_capacity(k as usize);
    for id in 1..=k {
        let in_mask: Vec<bool> = input_ids.iter().map(|&c| c == id).collect();
        let node_mask: Vec<bool> = node_ids.iter().map(|&n| n == Some(id)).collect();
        let hit_mask: Vec<bool> = bmus.iter().map(|&b| node_mask[b]).collect();
        let subset = Subset {
            inputs: &in_mask,
            nodes: &node_mask,
            hits_of: &hit_mask,
        };
        let rel = reliability_subset(
            &points,
            &nodes_proj,
            bmus,
            &bounds,
            &projection.divisions,
            binning,
            &subset,
            &projection.axes,
        )?;
        let node_count = rel.nodes.total();
        let present = node_count > 0;
        rows.push(CategoryRow {
            id,
            label: model
                .vocabulary
                .as_ref()
                .and_then(|v| v.label(id))
                .map(str::to_owned),
            input_count: rel.input.total(),
            node_count,
            hit_count: rel.hits.total(),
            absent: !present,
            nodes_vs_input: rel.nodes_vs_input.filter(|_| present),
            hits_vs_input: rel.hits_vs_input.filter(|_| present),
        });
    }
    let x: Vec<f64> = rows.iter().map(|r| r.input_count as f64).collect();
    let r2 = |f: fn(&CategoryRow) -> u64| r_squared(&x, &rows.iter().map(|r| f(r) as f64).collect::<Vec<_>>()).ok();
    Ok(CategoryReport {
        projection: projection.clone(),
        r2_nodes: r2(|r| r.node_count),
        r2_hits: r2(|r| r.hit_count),
        rows,
    })
}

/// Full evaluation of a model against a dataset.
pub fn evaluate(
    inputs: &[InputVector],
    model: &SomModel,
    options: &EvaluateOptions,
) -> Result<EvaluationReport> {
    if inputs.is_empty() {
        return Err(SomError::EmptyData);
    }
    let assignments = model.assign(inputs)?;
    let bmus: Vec<usize> = assignments.iter().map(|b| b.bmu).collect();
    let qe = qe_from_assignments(&assignments)?;
    let te = if model.codebook.len() >= 2 {
        Some(te_from_assignments(
            &assignments,
            model.codebook.dims(),
            options.connectivity,
        )?)
    } else {
        None
    };

    let mut projections = Vec::with_capacity(options.projections.len());
    for spec in &options.projections {
        let rel = reliability(inputs, model, &bmus, &spec.axes, &spec.divisions, options.binning)?;
        projections.push(ProjectionReport {
            name: spec.name.clone(),
            axes: spec.axes.clone(),
            divisions: spec.divisions.clone(),
            nodes_vs_input: rel.nodes_vs_input,
            hits_vs_input: rel.hits_vs_input,
            per_slice: rel.per_slice.clone(),
            sections: section_sums_r2(&rel, 0).ok(),
        });
    }

    let mixed = model.is_mixed() && inputs.iter().all(|x| x.category.is_some());
    let per_category = match (mixed, options.projections.iter().find(|p| p.axes.len() == 3)) {
        (true, Some(spec)) => Some(per_category_reliability(
            inputs,
            model,
            &bmus,
            spec,
            options.binning,
        )?),
        _ => None,
    };

    Ok(EvaluationReport {
        input_count: inputs.len(),
        qe,
        te,
        connectivity: options.connectivity,
        hit_binning: options.binning,
        projections,
        per_category,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Codebook, GridDims};
    use crate::preprocess::{CategoryVector, NormalizationParams};

    #[test]
    fn default_projection_layout() {
        let p = default_projections(&[Period::Day, Period::Week], [8, 5, 5]);
        let names: Vec<&str> = p.iter().map(|s| s.name.as_str()).collect();
        assert_eq!(names, ["day-lat-lon", "week-lat-lon", "day-week"]);
        assert_eq!(p[0].axes, vec![0, 2, 3]);
        assert_eq!(p[1].divisions, vec![7, 5, 5]);
        assert_eq!(p[2].axes, vec![0, 1]);
        assert_eq!(p[2].divisions, vec![8, 7]);
    }

    fn mixed_fixture() -> (Vec<InputVector>, SomModel) {
        let dims = GridDims::new(3, 1, 1).unwrap();
        let codebook = Codebook::from_vectors(
            dims,
            vec![vec![0.1, 0.1, 0.1], vec![0.5, 0.5, 0.5], vec![0.9, 0.9, 0.9]],
        )
        .unwrap();
        let mut model = SomModel::new(codebook, NormalizationParams::None { dim: 3 });
        model.node_ids = Some(vec![Some(1), Some(2), Some(1)]);
        model.alpha = 0.1;
        let c = |id| CategoryVector::new(id, 3).unwrap();
        let inputs = vec![
            InputVector::with_category(vec![0.0, 0.0, 0.0], c(1)),
            InputVector::with_category(vec![0.12, 0.1, 0.1], c(1)),
            InputVector::with_category(vec![0.5, 0.52, 0.5], c(2)),
            InputVector::with_category(vec![0.45, 0.5, 0.5], c(3)),
            InputVector::with_category(vec![1.0, 1.0, 1.0], c(1)),
        ];
        (inputs, model)
    }

    #[test]
    fn category_rows() {
        let (inputs, model) = mixed_fixture();
        let bmus: Vec<usize> = model.assign(&inputs).unwrap().iter().map(|b| b.bmu).collect();
        let spec = ProjectionSpec {
            name: "t".into(),
            axes: vec![0, 1, 2],
            divisions: vec![2, 2, 2],
        };
        let report = per_category_reliability(&inputs, &model, &bmus, &spec, HitBinning::AtNode).unwrap();
        let counts: Vec<(u64, u64)> = report.rows.iter().map(|r| (r.input_count, r.node_count)).collect();
        assert_eq!(counts, vec![(3, 2), (1, 1), (1, 0)]);
        let third = &report.rows[2];
        assert_eq!((third.nodes_vs_input, third.hits_vs_input), (None, None));
        assert_eq!(third.hit_count, 0);
        // Every node carries an ID, so the per-ID hits add up to all inputs.
        let hits: u64 = report.rows.iter().map(|r| r.hit_count).sum();
        let recount = bmus.iter().filter(|&&b| model.node_ids.as_ref().unwrap()[b].is_some()).count();
        assert_eq!(hits, recount as u64);
    }

    #[test]
    fn single_category_matches_overall() {
        let (mut inputs, mut model) = mixed_fixture();
        for x in &mut inputs {
            x.category = Some(CategoryVector::new(1, 1).unwrap());
        }
        model.node_ids = Some(vec![Some(1); 3]);
        let bmus: Vec<usize> = model.assign(&inputs).unwrap().iter().map(|b| b.bmu).collect();
        let spec = ProjectionSpec {
            name: "t".into(),
            axes: vec![0, 1, 2],
            divisions: vec![2, 2, 2],
        };
        let per = per_category_reliability(&inputs, &model, &bmus, &spec, HitBinning::AtNode).unwrap();
        let overall = reliability(&inputs, &model, &bmus, &spec.axes, &spec.divisions, HitBinning::AtNode).unwrap();
        assert_eq!(per.rows[0].nodes_vs_input, overall.nodes_vs_input);
        assert_eq!(per.rows[0].hits_vs_input, overall.hits_vs_input);
        assert_eq!(per.rows[0].hit_count, overall.hits.total());
    }

    #[test]
    fn report_conserves_hits() {
        let (inputs, model) = mixed_fixture();
        let options = EvaluateOptions {
            projections: default_projections(&[Period::Day], [2, 2, 2]),
            connectivity: Connectivity::Face,
            binning: HitBinning::AtNode,
        };
        let report = evaluate(&inputs, &model, &options).unwrap();
        let sections = report.projections[0].sections.as_ref().unwrap();
        assert_eq!(sections.hits.iter().sum::<u64>(), inputs.len() as u64);
        assert_eq!(sections.input.iter().sum::<u64>(), inputs.len() as u64);
        assert!(report.per_category.is_some());
        assert!(report.te.is_some_and(|te| (0.0..=1.0).contains(&te)));
    }
}
