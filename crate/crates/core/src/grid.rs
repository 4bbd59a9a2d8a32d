//! Lattice geometry, node indexing and the distance functions shared by
//! training and evaluation.
//!
//! Nodes are stored in row-major order with axis 0 as the time-dominant
//! axis: node `(a, b, c)` lives at flat index `a*m*n + b*n + c`. Every
//! tie-break downstream uses this order.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SomError};

/// Node counts along the three lattice axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridDims {
    l: usize,
    m: usize,
    n: usize,
}

/// Integer lattice position of a node.
pub type Coord = (usize, usize, usize);

impl GridDims {
    pub fn new(l: usize, m: usize, n: usize) -> Result<Self> {
        if l == 0 || m == 0 || n == 0 {
            return Err(SomError::InvalidGrid { l, m, n });
        }
        Ok(Self { l, m, n })
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sides(&self) -> [usize; 3] {
        [self.l, self.m, self.n]
    }

    pub fn node_count(&self) -> usize {
        self.l * self.m * self.n
    }

    pub fn flat_index(&self, (a, b, c): Coord) -> Result<usize> {
        if a >= self.l || b >= self.m || c >= self.n {
            return Err(SomError::CoordOutOfBounds(a, b, c));
        }
        Ok(a * self.m * self.n + b * self.n + c)
    }

    /// Inverse of [`GridDims::flat_index`].
    pub fn coord(&self, index: usize) -> Result<Coord> {
        self.check_index(index)?;
        Ok(self.coord_unchecked(index))
    }

    pub(crate) fn coord_unchecked(&self, index: usize) -> Coord {
        let layer = self.m * self.n;
        (index / layer, (index % layer) / self.n, index % self.n)
    }

    fn check_index(&self, index: usize) -> Result<()> {
        if index >= self.node_count() {
            return Err(SomError::IndexOutOfBounds {
                index,
                nodes: self.node_count(),
            });
        }
        Ok(())
    }

    /// Euclidean distance between the lattice coordinates of two nodes.
    pub fn grid_distance(&self, i: usize, j: usize) -> Result<f64> {
        self.check_index(i)?;
        self.check_index(j)?;
        Ok(self.sq_grid_distance(i, j).sqrt())
    }

    pub(crate) fn sq_grid_distance(&self, i: usize, j: usize) -> f64 {
        let (a0, b0, c0) = self.coord_unchecked(i);
        let (a1, b1, c1) = self.coord_unchecked(j);
        let da = a0.abs_diff(a1);
        let db = b0.abs_diff(b1);
        let dc = c0.abs_diff(c1);
        (da * da + db * db + dc * dc) as f64
    }

    /// Face neighbors of node `i` (±1 along exactly one axis).
    pub fn grid_neighbors(&self, i: usize) -> Result<Vec<usize>> {
        self.neighbors(i, Connectivity::Face)
    }

    /// Neighbors of node `i` under the given connectivity, in ascending
    /// flat-index order.
    pub fn neighbors(&self, i: usize, connectivity: Connectivity) -> Result<Vec<usize>> {
        self.check_index(i)?;
        let (a, b, c) = self.coord_unchecked(i);
        let mut out = Vec::with_capacity(26);
        for da in -1i64..=1 {
            for db in -1i64..=1 {
                for dc in -1i64..=1 {
                    let changed = (da != 0) as u8 + (db != 0) as u8 + (dc != 0) as u8;
                    if changed == 0 || changed > connectivity.max_changed_axes() {
                        continue;
                    }
                    let (na, nb, nc) = (a as i64 + da, b as i64 + db, c as i64 + dc);
                    if na < 0
                        || nb < 0
                        || nc < 0
                        || na >= self.l as i64
                        || nb >= self.m as i64
                        || nc >= self.n as i64
                    {
                        continue;
                    }
                    out.push(self.flat_index((na as usize, nb as usize, nc as usize))?);
                }
            }
        }
        Ok(out)
    }

    /// Whether nodes `i` and `j` are directly connected in the lattice.
    pub fn adjacent(&self, i: usize, j: usize, connectivity: Connectivity) -> bool {
        if i == j || i >= self.node_count() || j >= self.node_count() {
            return false;
        }
        let (a0, b0, c0) = self.coord_unchecked(i);
        let (a1, b1, c1) = self.coord_unchecked(j);
        let diffs = [a0.abs_diff(a1), b0.abs_diff(b1), c0.abs_diff(c1)];
        if diffs.iter().any(|&d| d > 1) {
            return false;
        }
        let changed = diffs.iter().filter(|&&d| d == 1).count() as u8;
        changed <= connectivity.max_changed_axes()
    }
}

impl std::fmt::Display for GridDims {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}x{}", self.l, self.m, self.n)
    }
}

impl std::str::FromStr for GridDims {
    type Err = SomError;

    /// Parses `LxMxN`, e.g. `13x8x7`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(['x', 'X']).collect();
        let bad = || SomError::InvalidConfig(format!("grid must look like LxMxN, got {s:?}"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let mut sides = [0usize; 3];
        for (side, part) in sides.iter_mut().zip(&parts) {
            *side = part.trim().parse().map_err(|_| bad())?;
        }
        GridDims::new(sides[0], sides[1], sides[2])
    }
}

/// Lattice adjacency used by the topographic error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Connectivity {
    /// 6-connected: shares a face.
    #[default]
    Face,
    /// 18-connected: shares a face or an edge.
    Edge,
    /// 26-connected: shares a face, edge or corner.
    Vertex,
}

impl Connectivity {
    fn max_changed_axes(self) -> u8 {
        match self {
            Connectivity::Face => 1,
            Connectivity::Edge => 2,
            Connectivity::Vertex => 3,
        }
    }
}

/// One codebook vector per node, stored contiguously in flat-index order.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    dims: GridDims,
    dim: usize,
    data: Vec<f64>,
}

impl Codebook {
    pub fn from_vectors(dims: GridDims, vectors: Vec<Vec<f64>>) -> Result<Self> {
        if vectors.len() != dims.node_count() {
            return Err(SomError::ShapeMismatch(format!(
                "grid {dims} needs {} codebook vectors, got {}",
                dims.node_count(),
                vectors.len()
            )));
        }
        let dim = vectors[0].len();
        if dim == 0 {
            return Err(SomError::ShapeMismatch("codebook vectors are empty".into()));
        }
        let mut data = Vec::with_capacity(dim * vectors.len());
        for (node, v) in vectors.iter().enumerate() {
            if v.len() != dim {
                return Err(SomError::DimensionMismatch {
                    expected: dim,
                    found: v.len(),
                });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(SomError::NonFinite { node, epoch: 0 });
            }
            data.extend_from_slice(v);
        }
        Ok(Self { dims, dim, data })
    }

    pub(crate) fn from_flat(dims: GridDims, dim: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), dims.node_count() * dim);
        Self { dims, dim, data }
    }

    pub fn dims(&self) -> GridDims {
        self.dims
    }

    /// Dimensionality of each codebook vector.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.dims.node_count()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn vector(&self, node: usize) -> &[f64] {
        &self.data[node * self.dim..(node + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn to_vectors(&self) -> Vec<Vec<f64>> {
        self.iter().map(<[f64]>::to_vec).collect()
    }

    pub(crate) fn first_non_finite(&self) -> Option<usize> {
        self.iter().position(|v| v.iter().any(|x| !x.is_finite()))
    }
}

pub fn euclidean_distance(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(SomError::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    Ok(sq_euclidean(x, y).sqrt())
}

#[inline]
pub(crate) fn sq_euclidean(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// `Dn + alpha * Dc`, where `Dn` is the Euclidean distance of the numeric
/// parts and `Dc` is 0 when both sides carry the same category ID and 1
/// otherwise. A node without an ID never matches.
pub fn mixed_distance(
    x: &[f64],
    x_id: u32,
    node: &[f64],
    node_id: Option<u32>,
    alpha: f64,
) -> Result<f64> {
    check_alpha(alpha)?;
    let dn = euclidean_distance(x, node)?;
    Ok(dn + alpha * category_mismatch(x_id, node_id))
}

#[inline]
pub(crate) fn category_mismatch(x_id: u32, node_id: Option<u32>) -> f64 {
    if node_id == Some(x_id) {
        0.0
    } else {
        1.0
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha.is_finite() && alpha >= 0.0) {
        return Err(SomError::InvalidAlpha(alpha));
    }
    Ok(())
}
