//! Principal component analysis on top of the randomized k-SVD.
//!
//! Samples are rows (`N x d`). Data is always centered; explained variances
//! use the unbiased `1 / (N - 1)` normalization.

use crate::dense::gemm::matmul;
use crate::dense::matrix::pairwise_sum;
use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::rsvd::{randomized_ksvd, RsvdConfig};

#[derive(Debug, Clone)]
pub struct PcaModel {
    /// Per-feature column means, length `d`.
    pub mean: Vec<f64>,
    /// `d x k`, orthonormal principal directions.
    pub components: DenseMatrix,
    /// Length `k`, non-increasing.
    pub explained_variance: Vec<f64>,
    /// Number of training samples.
    pub samples: usize,
}

impl PcaModel {
    pub fn dim(&self) -> usize {
        self.components.rows()
    }

    pub fn k(&self) -> usize {
        self.components.cols()
    }
}

/// Subtracts the column means. Returns the centered copy and the means.
pub fn center_columns(x: &DenseMatrix) -> Result<(DenseMatrix, Vec<f64>)> {
    let (n, d) = x.shape();
    if n < 2 {
        return Err(Error::Shape(format!("centering needs at least 2 rows, got {n}")));
    }
    let xt = x.transpose();
    let mean: Vec<f64> = (0..d)
        .map(|j| pairwise_sum(&xt.as_slice()[j * n..(j + 1) * n]) / n as f64)
        .collect();
    let mut out = x.clone();
    for i in 0..n {
        for (v, mu) in out.row_mut(i).iter_mut().zip(&mean) {
            *v -= mu;
        }
    }
    Ok((out, mean))
}

/// Fits `k` principal components with `cfg.k` overridden by `k`.
pub fn fit_pca(x: &DenseMatrix, k: usize, cfg: &RsvdConfig) -> Result<PcaModel> {
    let (centered, mean) = center_columns(x)?;
    let n = x.rows();
    let cfg = RsvdConfig { k, ..*cfg };
    let res = randomized_ksvd(&centered, &cfg)?;
    let explained_variance = res.factors.sigma.iter().map(|s| s * s / (n - 1) as f64).collect();
    Ok(PcaModel {
        mean,
        components: res.factors.v,
        explained_variance,
        samples: n,
    })
}

/// Scores `(x - mean) * components`, an `N x k` matrix.
pub fn transform(model: &PcaModel, x: &DenseMatrix) -> Result<DenseMatrix> {
    if x.cols() != model.dim() {
        return Err(Error::mismatch(
            "pca transform",
            x.shape(),
            (model.dim(), model.k()),
        ));
    }
    let mut centered = x.clone();
    for i in 0..x.rows() {
        for (v, mu) in centered.row_mut(i).iter_mut().zip(&model.mean) {
            *v -= mu;
        }
    }
    matmul(&centered, &model.components)
}

/// Maps scores back to data space: `scores * componentsᵀ + mean`.
pub fn inverse_transform(model: &PcaModel, scores: &DenseMatrix) -> Result<DenseMatrix> {
    let mut out = crate::dense::gemm::matmul_nt(scores, &model.components)?;
    for i in 0..out.rows() {
        for (v, mu) in out.row_mut(i).iter_mut().zip(&model.mean) {
            *v += mu;
        }
    }
    Ok(out)
}
