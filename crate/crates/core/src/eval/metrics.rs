use crate::error::{Result, SomError};
use crate::grid::{Connectivity, GridDims};
use crate::preprocess::InputVector;
use crate::train::{Bmu, SomModel};

/// Mean distance from each input to its BMU.
pub fn quantization_error(inputs: &[InputVector], model: &SomModel) -> Result<f64> {
    if inputs.is_empty() {
        return Err(SomError::EmptyData);
    }
    qe_from_assignments(&model.assign(inputs)?)
}

pub fn qe_from_assignments(assignments: &[Bmu]) -> Result<f64> {
    if assignments.is_empty() {
        return Err(SomError::EmptyData);
    }
    Ok(assignments.iter().map(|b| b.distance).sum::<f64>() / assignments.len() as f64)
}

/// Share of inputs whose first and second BMU are not face neighbors.
pub fn topographic_error(inputs: &[InputVector], model: &SomModel) -> Result<f64> {
    topographic_error_with(inputs, model, Connectivity::Face)
}

pub fn topographic_error_with(
    inputs: &[InputVector],
    model: &SomModel,
    connectivity: Connectivity,
) -> Result<f64> {
    if model.codebook.len() < 2 {
        return Err(SomError::SingleNodeGrid);
    }
    if inputs.is_empty() {
        return Err(SomError::EmptyData);
    }
    te_from_assignments(&model.assign(inputs)?, model.codebook.dims(), connectivity)
}

pub fn te_from_assignments(
    assignments: &[Bmu],
    dims: GridDims,
    connectivity: Connectivity,
) -> Result<f64> {
    if assignments.is_empty() {
        return Err(SomError::EmptyData);
    }
    let mut errors = 0usize;
    for b in assignments {
        let second = b.second.ok_or(SomError::SingleNodeGrid)?;
        if !dims.adjacent(b.bmu, second, connectivity) {
            errors += 1;
        }
    }
    Ok(errors as f64 / assignments.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{euclidean_distance, Codebook};
    use crate::preprocess::{CategoryVector, NormalizationParams};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn model(dims: GridDims, vectors: Vec<Vec<f64>>) -> SomModel {
        let dim = vectors[0].len();
        SomModel::new(
            Codebook::from_vectors(dims, vectors).unwrap(),
            NormalizationParams::None { dim },
        )
    }

    fn inputs(rows: &[&[f64]]) -> Vec<InputVector> {
        rows.iter().map(|r| InputVector::numeric(r.to_vec())).collect()
    }

    #[test]
    fn qe_examples() {
        let m = model(GridDims::new(2, 1, 1).unwrap(), vec![vec![0.0, 0.0], vec![1.0, 1.0]]);
        assert_eq!(quantization_error(&inputs(&[&[0.0, 0.0], &[1.0, 1.0]]), &m).unwrap(), 0.0);

        let single = model(GridDims::new(1, 1, 1).unwrap(), vec![vec![0.0]]);
        assert_abs_diff_eq!(quantization_error(&inputs(&[&[0.3]]), &single).unwrap(), 0.3, epsilon = 1e-15);
        let three = inputs(&[&[0.1], &[-0.2], &[0.6]]);
        assert_abs_diff_eq!(quantization_error(&three, &single).unwrap(), 0.3, epsilon = 1e-15);
        assert_eq!(quantization_error(&[], &single), Err(SomError::EmptyData));
    }

    #[test]
    fn qe_uses_mixed_distance() {
        let mut m = model(GridDims::new(1, 1, 1).unwrap(), vec![vec![0.0]]);
        m.node_ids = Some(vec![Some(1)]);
        m.alpha = 0.25;
        let x = vec![InputVector::with_category(vec![0.5], CategoryVector::new(2, 2).unwrap())];
        assert_abs_diff_eq!(quantization_error(&x, &m).unwrap(), 0.75, epsilon = 1e-15);
    }

    #[test]
    fn two_node_grid_has_zero_te() {
        let m = model(GridDims::new(2, 1, 1).unwrap(), vec![vec![0.0], vec![1.0]]);
        let data = inputs(&[&[-4.0], &[0.3], &[0.9], &[17.0]]);
        assert_eq!(topographic_error(&data, &m).unwrap(), 0.0);
    }

    #[test]
    fn half_the_inputs_break_topology() {
        // Chain 0-1-2 with node 2 placed next to node 0 in input space.
        let m = model(GridDims::new(3, 1, 1).unwrap(), vec![vec![0.0], vec![10.0], vec![1.0]]);
        let data = inputs(&[&[0.2], &[9.0], &[0.8], &[10.5]]);
        // Brute force: inputs 0 and 2 have BMU pair {0, 2}, non-adjacent.
        assert_eq!(topographic_error(&data, &m).unwrap(), 0.5);
        assert_eq!(topographic_error_with(&data, &m, Connectivity::Vertex).unwrap(), 0.5);
    }

    #[test]
    fn single_node_te_is_an_error() {
        let m = model(GridDims::new(1, 1, 1).unwrap(), vec![vec![0.0]]);
        assert_eq!(topographic_error(&inputs(&[&[1.0]]), &m), Err(SomError::SingleNodeGrid));
    }

    fn random_model(seed: u64) -> (SomModel, Vec<InputVector>) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let dims = GridDims::new(3, 3, 2).unwrap();
        let vectors = (0..dims.node_count()).map(|_| (0..3).map(|_| rng.random()).collect()).collect();
        let data = (0..40).map(|_| InputVector::numeric((0..3).map(|_| rng.random()).collect())).collect();
        (model(dims, vectors), data)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn qe_matches_rescan(seed in any::<u64>()) {
            let (m, data) = random_model(seed);
            let oracle = data
                .iter()
                .map(|x| m.codebook.iter().map(|v| euclidean_distance(&x.numeric, v).unwrap()).fold(f64::INFINITY, f64::min))
                .sum::<f64>() / data.len() as f64;
            prop_assert!((quantization_error(&data, &m).unwrap() - oracle).abs() < 1e-12);
        }

        #[test]
        fn te_matches_full_sort(seed in any::<u64>()) {
            let (m, data) = random_model(seed);
            let dims = m.codebook.dims();
            let mut errors = 0;
            for x in &data {
                let mut order: Vec<(f64, usize)> = m
                    .codebook
                    .iter()
                    .enumerate()
                    .map(|(i, v)| (euclidean_distance(&x.numeric, v).unwrap(), i))
                    .collect();
                order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                if dims.grid_distance(order[0].1, order[1].1).unwrap() != 1.0 {
                    errors += 1;
                }
            }
            let oracle = errors as f64 / data.len() as f64;
            prop_assert_eq!(topographic_error(&data, &m).unwrap(), oracle);
        }
    }
}
