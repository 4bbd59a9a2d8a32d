use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Result, SomError};

/// Principal axes of a point cloud.
#[derive(Debug, Clone, PartialEq)]
pub struct Pca {
    pub mean: Vec<f64>,
    /// Sample-covariance eigenvalues, descending.
    pub eigenvalues: Vec<f64>,
    /// Unit eigenvectors matching `eigenvalues`. Each is signed so that its
    /// largest-magnitude component is positive.
    pub eigenvectors: Vec<Vec<f64>>,
}

impl Pca {
    /// Index of the input dimension with the largest loading on the first
    /// principal axis.
    pub fn dominant_dimension(&self) -> usize {
        argmax_abs(&self.eigenvectors[0])
    }
}

fn argmax_abs(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    best
}

pub fn pca<V: AsRef<[f64]>>(data: &[V]) -> Result<Pca> {
    if data.len() < 2 {
        return Err(SomError::TooFewPoints(data.len()));
    }
    let dim = data[0].as_ref().len();
    if dim == 0 {
        return Err(SomError::DimensionMismatch { expected: 1, found: 0 });
    }
    let n = data.len() as f64;
    let mut mean = vec![0.0; dim];
    for v in data {
        let v = v.as_ref();
        if v.len() != dim {
            return Err(SomError::DimensionMismatch {
                expected: dim,
                found: v.len(),
            });
        }
        for (m, x) in mean.iter_mut().zip(v) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);

    let mut cov = DMatrix::<f64>::zeros(dim, dim);
    for v in data {
        let v = v.as_ref();
        for r in 0..dim {
            let dr = v[r] - mean[r];
            for c in r..dim {
                cov[(r, c)] += dr * (v[c] - mean[c]);
            }
        }
    }
    for r in 0..dim {
        for c in r..dim {
            let s = cov[(r, c)] / (n - 1.0);
            cov[(r, c)] = s;
            cov[(c, r)] = s;
        }
    }

    let eig = SymmetricEigen::try_new(cov, 1e-14, 10_000).ok_or(SomError::Decomposition)?;
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));

    let mut eigenvalues = Vec::with_capacity(dim);
    let mut eigenvectors = Vec::with_capacity(dim);
    for k in order {
        // Rounding can leave tiny negative eigenvalues on singular covariances.
        eigenvalues.push(eig.eigenvalues[k].max(0.0));
        let mut v: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
        if v[argmax_abs(&v)] < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        eigenvectors.push(v);
    }
    Ok(Pca {
        mean,
        eigenvalues,
        eigenvectors,
    })
}
