use crate::error::{Result, SomError};
use crate::grid::{category_mismatch, sq_euclidean, Codebook, GridDims};

/// Nearest and runner-up node for one input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bmu {
    pub bmu: usize,
    pub distance: f64,
    /// Absent on single-node grids.
    pub second: Option<usize>,
    pub second_distance: Option<f64>,
}

/// Scans every node in flat-index order; strict comparisons keep the lowest
/// index on ties.
pub(crate) fn bmu_search(
    x: &[f64],
    x_id: Option<u32>,
    codebook: &Codebook,
    node_ids: Option<&[Option<u32>]>,
    alpha: f64,
) -> Bmu {
    let mixed = match (x_id, node_ids) {
        (Some(id), Some(ids)) => Some((id, ids)),
        _ => None,
    };
    let mut best = (usize::MAX, f64::INFINITY);
    let mut second = (usize::MAX, f64::INFINITY);
    for (node, m) in codebook.iter().enumerate() {
        // Pure numeric search ranks on squared distance.
        let d = match mixed {
            Some((id, ids)) => sq_euclidean(x, m).sqrt() + alpha * category_mismatch(id, ids[node]),
            None => sq_euclidean(x, m),
        };
        if d < best.1 {
            second = best;
            best = (node, d);
        } else if d < second.1 {
            second = (node, d);
        }
    }
    let finish = |d: f64| if mixed.is_some() { d } else { d.sqrt() };
    let has_second = second.0 != usize::MAX;
    Bmu {
        bmu: best.0,
        distance: finish(best.1),
        second: has_second.then_some(second.0),
        second_distance: has_second.then(|| finish(second.1)),
    }
}

/// `exp(-d² / r²)`.
pub fn gaussian_weight(d: f64, r: f64) -> Result<f64> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(SomError::InvalidRadius(r));
    }
    if !(d >= 0.0) {
        return Err(SomError::InvalidConfig(format!("grid distance must be >= 0, got {d}")));
    }
    Ok((-(d * d) / (r * r)).exp())
}

/// Node-to-node neighborhood weights `H[i][j] = h(grid_distance(i, j), r)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborhoodMatrix {
    nodes: usize,
    data: Vec<f64>,
}

impl NeighborhoodMatrix {
    pub fn gaussian(dims: GridDims, r: f64) -> Result<Self> {
        gaussian_weight(0.0, r)?;
        let nodes = dims.node_count();
        let inv = 1.0 / (r * r);
        let mut data = Vec::with_capacity(nodes * nodes);
        for i in 0..nodes {
            for j in 0..nodes {
                data.push((-dims.sq_grid_distance(i, j) * inv).exp());
            }
        }
        Ok(Self { nodes, data })
    }

    /// Arbitrary square matrix, e.g. the identity as the `r → 0` limit.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let nodes = rows.len();
        if nodes == 0 {
            return Err(SomError::ShapeMismatch("empty neighborhood matrix".into()));
        }
        let mut data = Vec::with_capacity(nodes * nodes);
        for row in rows {
            if row.len() != nodes {
                return Err(SomError::ShapeMismatch(format!(
                    "neighborhood matrix must be square, row has {} of {nodes}",
                    row.len()
                )));
            }
            data.extend(row);
        }
        Ok(Self { nodes, data })
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.nodes + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.nodes..(i + 1) * self.nodes]
    }
}

/// One batch update:
/// `m_i = Σ_j n_j h(j,i) x̄_j / Σ_j n_j h(j,i)`, with `n_j x̄_j` the sum of
/// node `j`'s Voronoi set. Nodes with a zero denominator keep their vector.
pub fn batch_epoch<V: AsRef<[f64]>>(
    codebook: &Codebook,
    data: &[V],
    bmus: &[usize],
    r: f64,
) -> Result<Codebook> {
    let h = NeighborhoodMatrix::gaussian(codebook.dims(), r)?;
    batch_update(codebook, data, bmus, &h)
}

pub(crate) fn batch_update<V: AsRef<[f64]>>(
    codebook: &Codebook,
    data: &[V],
    bmus: &[usize],
    h: &NeighborhoodMatrix,
) -> Result<Codebook> {
    let nodes = codebook.len();
    let dim = codebook.dim();
    if data.len() != bmus.len() {
        return Err(SomError::ShapeMismatch(format!(
            "{} inputs but {} assignments",
            data.len(),
            bmus.len()
        )));
    }
    if h.nodes() != nodes {
        return Err(SomError::ShapeMismatch(format!(
            "neighborhood covers {} nodes, codebook has {nodes}",
            h.nodes()
        )));
    }

    let mut hits = vec![0.0f64; nodes];
    let mut sums = vec![0.0f64; nodes * dim];
    for (x, &j) in data.iter().zip(bmus) {
        let x = x.as_ref();
        if x.len() != dim {
            return Err(SomError::DimensionMismatch {
                expected: dim,
                found: x.len(),
            });
        }
        if j >= nodes {
            return Err(SomError::IndexOutOfBounds { index: j, nodes });
        }
        hits[j] += 1.0;
        for (s, v) in sums[j * dim..(j + 1) * dim].iter_mut().zip(x) {
            *s += v;
        }
    }
    let occupied: Vec<usize> = (0..nodes).filter(|&j| hits[j] > 0.0).collect();

    let mut out = Vec::with_capacity(nodes * dim);
    let mut num = vec![0.0; dim];
    for i in 0..nodes {
        num.iter_mut().for_each(|v| *v = 0.0);
        let mut den = 0.0;
        let weights = h.row(i);
        for &j in &occupied {
            let w = weights[j];
            den += w * hits[j];
            for (acc, s) in num.iter_mut().zip(&sums[j * dim..(j + 1) * dim]) {
                *acc += w * s;
            }
        }
        if den > 0.0 {
            out.extend(num.iter().map(|v| v / den));
        } else {
            out.extend_from_slice(codebook.vector(i));
        }
    }
    Ok(Codebook::from_flat(codebook.dims(), dim, out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Eq. 1 summed over every individual input, no Voronoi grouping.
    fn brute_force_update(cb: &Codebook, data: &[Vec<f64>], bmus: &[usize], r: f64) -> Vec<Vec<f64>> {
        let dims = cb.dims();
        (0..cb.len())
            .map(|i| {
                let mut num = vec![0.0; cb.dim()];
                let mut den = 0.0;
                for (x, &c) in data.iter().zip(bmus) {
                    let (a0, b0, c0) = dims.coord(c).unwrap();
                    let (a1, b1, c1) = dims.coord(i).unwrap();
                    let d2 = (a0 as f64 - a1 as f64).powi(2)
                        + (b0 as f64 - b1 as f64).powi(2)
                        + (c0 as f64 - c1 as f64).powi(2);
                    let h = (-d2 / (r * r)).exp();
                    den += h;
                    for (n, v) in num.iter_mut().zip(x) {
                        *n += h * v;
                    }
                }
                if den > 0.0 {
                    num.iter().map(|v| v / den).collect()
                } else {
                    cb.vector(i).to_vec()
                }
            })
            .collect()
    }

    fn nearest(cb: &Codebook, data: &[Vec<f64>]) -> Vec<usize> {
        data.iter().map(|x| bmu_search(x, None, cb, None, 0.0).bmu).collect()
    }

    #[test]
    fn gaussian_examples() {
        assert_eq!(gaussian_weight(0.0, 0.3).unwrap(), 1.0);
        assert_abs_diff_eq!(gaussian_weight(1.7, 1.7).unwrap(), (-1f64).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(gaussian_weight(2.0, 1.0).unwrap(), 0.018315638888734, epsilon = 1e-12);
        assert!(gaussian_weight(1.0, 0.0).is_err());
        assert!(gaussian_weight(1.0, -1.0).is_err());
    }

    #[test]
    fn bmu_examples() {
        let single = Codebook::from_vectors(GridDims::new(1, 1, 1).unwrap(), vec![vec![0.0; 3]]).unwrap();
        let b = bmu_search(&[1.0, 1.0, 1.0], None, &single, None, 0.0);
        assert_eq!((b.bmu, b.second), (0, None));

        let four = Codebook::from_vectors(
            GridDims::new(4, 1, 1).unwrap(),
            vec![vec![0.0, 0.0, 0.0], vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![1.0, 1.0, 1.0]],
        )
        .unwrap();
        let b = bmu_search(&[0.9, 0.1, 0.0], None, &four, None, 0.0);
        assert_eq!((b.bmu, b.second), (1, Some(0)));
        assert_abs_diff_eq!(b.distance, 0.02f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn bmu_tie_goes_to_lowest_index() {
        let mut vectors = vec![vec![5.0]; 8];
        vectors[3] = vec![-1.0];
        vectors[7] = vec![1.0];
        let cb = Codebook::from_vectors(GridDims::new(8, 1, 1).unwrap(), vectors).unwrap();
        let b = bmu_search(&[0.0], None, &cb, None, 0.0);
        assert_eq!((b.bmu, b.second), (3, Some(7)));
    }

    #[test]
    fn single_node_update_is_global_mean() {
        let cb = Codebook::from_vectors(GridDims::new(1, 1, 1).unwrap(), vec![vec![9.0, 9.0]]).unwrap();
        let data = vec![vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 0.0]];
        let out = batch_epoch(&cb, &data, &[0, 0, 0], 2.0).unwrap();
        assert_abs_diff_eq!(out.vector(0)[0], 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(out.vector(0)[1], 2.0, epsilon = 1e-15);
    }

    #[test]
    fn tiny_radius_moves_to_voronoi_means() {
        let dims = GridDims::new(3, 1, 1).unwrap();
        let cb = Codebook::from_vectors(dims, vec![vec![0.0], vec![5.0], vec![10.0]]).unwrap();
        let data = vec![vec![0.5], vec![1.5], vec![9.0]];
        let out = batch_epoch(&cb, &data, &[0, 0, 2], 1e-6).unwrap();
        assert_eq!(out.vector(0), &[1.0]);
        assert_eq!(out.vector(1), &[5.0]);
        assert_eq!(out.vector(2), &[9.0]);
    }

    #[test]
    fn two_node_hand_case() {
        let dims = GridDims::new(2, 1, 1).unwrap();
        let cb = Codebook::from_vectors(dims, vec![vec![0.0], vec![1.0]]).unwrap();
        let data = vec![vec![0.0], vec![0.2], vec![1.0]];
        let bmus = [0, 0, 1];
        let out = batch_epoch(&cb, &data, &bmus, 1.0).unwrap();
        let oracle = brute_force_update(&cb, &data, &bmus, 1.0);
        let e = (-1f64).exp();
        let m0 = (2.0 * 0.1 + e * 1.0) / (2.0 + e);
        let m1 = (2.0 * e * 0.1 + 1.0) / (2.0 * e + 1.0);
        // Reference values evaluated independently at 30 significant digits.
        assert_abs_diff_eq!(m0, 0.239_826_163_147_267_25, epsilon = 1e-9);
        assert_abs_diff_eq!(m1, 0.618_505_196_289_246_2, epsilon = 1e-9);
        assert_abs_diff_eq!(out.vector(0)[0], m0, epsilon = 1e-12);
        assert_abs_diff_eq!(out.vector(1)[0], m1, epsilon = 1e-12);
        assert_abs_diff_eq!(oracle[0][0], m0, epsilon = 1e-12);
        assert_abs_diff_eq!(oracle[1][0], m1, epsilon = 1e-12);
    }

    #[test]
    fn shape_errors() {
        let dims = GridDims::new(2, 1, 1).unwrap();
        let cb = Codebook::from_vectors(dims, vec![vec![0.0], vec![1.0]]).unwrap();
        assert!(batch_epoch(&cb, &[vec![0.0]], &[0, 1], 1.0).is_err());
        assert!(batch_epoch(&cb, &[vec![0.0]], &[2], 1.0).is_err());
        assert!(batch_epoch(&cb, &[vec![0.0, 1.0]], &[0], 1.0).is_err());
        assert!(batch_epoch(&cb, &[vec![0.0]], &[0], 0.0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn matches_brute_force_and_stays_convex(seed in any::<u64>(), r in 0.2f64..4.0,
                                                l in 1usize..4, m in 1usize..3, n in 1usize..3) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let dims = GridDims::new(l, m, n).unwrap();
            let cb = Codebook::from_vectors(
                dims,
                (0..dims.node_count()).map(|_| (0..3).map(|_| rng.random::<f64>()).collect()).collect(),
            ).unwrap();
            let data: Vec<Vec<f64>> = (0..30).map(|_| (0..3).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect()).collect();
            let bmus = nearest(&cb, &data);
            let out = batch_epoch(&cb, &data, &bmus, r).unwrap();
            let oracle = brute_force_update(&cb, &data, &bmus, r);
            for (i, want) in oracle.iter().enumerate() {
                for (k, w) in want.iter().enumerate() {
                    let got = out.vector(i)[k];
                    prop_assert!((got - w).abs() < 1e-10);
                    let lo = data.iter().map(|x| x[k]).fold(f64::INFINITY, f64::min);
                    let hi = data.iter().map(|x| x[k]).fold(f64::NEG_INFINITY, f64::max);
                    prop_assert!(got >= lo - 1e-12 && got <= hi + 1e-12);
                }
            }
        }
    }
}
