//! Randomized truncated SVD.
//!
//! For an `m x n` input with target rank `k` and sketch width `s >= k`:
//!
//! 1. draw a Gaussian `n x s` test matrix `Ω` and form `Y₀ = A Ω` (O(mns));
//! 2. run `q` rounds of subspace iteration towards `(A Aᵀ)^q A Ω`,
//!    re-orthonormalizing after every application of `A` or `Aᵀ` (O(mns) each);
//! 3. take an orthonormal basis `Q` of the range of `Y`;
//! 4. project, `B = Qᵀ A` (O(mns));
//! 5. factor the small `s x n` matrix `B = U Σ Vᵀ` (O(ns²));
//! 6. lift the left factor, `Ũ = Q U` (O(msk)).
//!
//! Steps 1 to 5 alone give the leading singular values; see
//! [`singular_values_only`]. Inputs with `m < n` are solved through their
//! transpose so every kernel works on tall matrices.

use crate::dense::gemm::{matmul, matmul_tn};
use crate::dense::qr::{householder_qr, qr_basis_dropping};
use crate::dense::rng::{gaussian_matrix, GaussianSampler};
use crate::dense::svd::{dense_singular_values, dense_svd, SvdFactors};
use crate::dense::DenseMatrix;
use crate::error::{Error, Result};

pub const DEFAULT_OVERSAMPLE: usize = 10;
pub const DEFAULT_POWER_Q: usize = 2;
pub const DEFAULT_EPSILON: f64 = 0.5;

/// Columns of the range basis whose `R` diagonal falls below this fraction of
/// `‖Y‖_F` are discarded.
pub const RANGE_DROP_TOL: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RsvdConfig {
    /// Target rank.
    pub k: usize,
    /// Extra sketch columns beyond `k`.
    pub oversample: usize,
    /// Number of subspace-iteration rounds.
    pub power_q: usize,
    pub seed: u64,
    /// Nominal accuracy parameter in `(0, 1)`. Only sizes the sketch when
    /// `epsilon_mode` is set, as `s = ⌈k / epsilon⌉`.
    pub epsilon: f64,
    pub epsilon_mode: bool,
}

impl RsvdConfig {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            oversample: DEFAULT_OVERSAMPLE,
            power_q: DEFAULT_POWER_Q,
            seed: 0,
            epsilon: DEFAULT_EPSILON,
            epsilon_mode: false,
        }
    }

    pub fn with_oversample(mut self, p: usize) -> Self {
        self.oversample = p;
        self
    }

    pub fn with_power_q(mut self, q: usize) -> Self {
        self.power_q = q;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64, epsilon_mode: bool) -> Self {
        self.epsilon = epsilon;
        self.epsilon_mode = epsilon_mode;
        self
    }

    /// Checks the configuration against an `m x n` input.
    pub fn validate(&self, m: usize, n: usize) -> Result<()> {
        let max = m.min(n);
        if self.k == 0 || self.k > max {
            return Err(Error::InvalidRank { k: self.k, max });
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "epsilon must lie in (0, 1), got {}",
                self.epsilon
            )));
        }
        Ok(())
    }

    /// Sketch width used on an `m x n` input.
    pub fn sketch_width(&self, m: usize, n: usize) -> usize {
        let wanted = if self.epsilon_mode {
            (self.k as f64 / self.epsilon).ceil() as usize
        } else {
            self.k + self.oversample
        };
        wanted.min(m.min(n))
    }
}

#[derive(Debug, Clone)]
pub struct RsvdResult {
    /// Rank-`k` factors: `u` is `m x k`, `v` is `n x k`.
    pub factors: SvdFactors,
    /// Number of range-basis columns actually used.
    pub sketch_width: usize,
}

impl RsvdResult {
    pub fn sigma(&self) -> &[f64] {
        &self.factors.sigma
    }

    /// `‖a - Ũ Σ Vᵀ‖_F`.
    pub fn residual_fro(&self, a: &DenseMatrix) -> Result<f64> {
        Ok(a.sub(&self.factors.reconstruct())?.frobenius_norm())
    }
}

/// `Y₀ = A Ω` for an `n x s` Gaussian `Ω` drawn from `sampler`.
pub fn sketch(a: &DenseMatrix, s: usize, sampler: &mut GaussianSampler) -> Result<DenseMatrix> {
    let max = a.rows().min(a.cols());
    if s == 0 || s > max {
        return Err(Error::InvalidSketchWidth { s, max });
    }
    let omega = gaussian_matrix(sampler, a.cols(), s);
    matmul(a, &omega)
}

/// Orthonormal basis for the span of `(A Aᵀ)^q y0`, computed by subspace
/// iteration with a thin QR after each multiplication by `Aᵀ` and by `A`.
/// With `q = 0` this is just the orthonormalized `y0`.
pub fn power_iterate(a: &DenseMatrix, y0: &DenseMatrix, q: usize) -> Result<DenseMatrix> {
    if y0.rows() != a.rows() {
        return Err(Error::mismatch("power_iterate", a.shape(), y0.shape()));
    }
    let mut basis = householder_qr(y0)?.q;
    for _ in 0..q {
        let z = householder_qr(&matmul_tn(a, &basis)?)?.q;
        basis = householder_qr(&matmul(a, &z)?)?.q;
    }
    Ok(basis)
}

/// Orthonormal basis for the range of `y`; columns that are numerically
/// dependent on earlier ones are dropped, so the basis may be narrower than `y`.
pub fn range_basis(y: &DenseMatrix) -> Result<DenseMatrix> {
    let tol = RANGE_DROP_TOL * y.frobenius_norm();
    Ok(qr_basis_dropping(y, tol)?.0)
}

/// Steps 4 to 6: `B = Qᵀ A`, `B = U Σ Vᵀ`, `Ũ = Q U`, truncated to rank `k`.
pub fn project_and_solve(a: &DenseMatrix, qbasis: &DenseMatrix, k: usize) -> Result<RsvdResult> {
    let b = project(a, qbasis, k)?;
    let small = dense_svd(&b)?.truncate(k);
    let u = matmul(qbasis, &small.u)?;
    let mut factors = SvdFactors {
        u,
        sigma: small.sigma,
        v: small.v,
    };
    fix_signs(&mut factors);
    Ok(RsvdResult {
        factors,
        sketch_width: qbasis.cols(),
    })
}

fn project(a: &DenseMatrix, qbasis: &DenseMatrix, k: usize) -> Result<DenseMatrix> {
    if qbasis.rows() != a.rows() {
        return Err(Error::mismatch("project_and_solve", a.shape(), qbasis.shape()));
    }
    let max = qbasis.cols().min(a.cols());
    if k == 0 || k > max {
        return Err(Error::InvalidRank { k, max });
    }
    matmul_tn(qbasis, a)
}

/// Makes the largest-magnitude entry of every left vector positive.
fn fix_signs(f: &mut SvdFactors) {
    for j in 0..f.sigma.len() {
        let col = f.u.column(j);
        let pivot = col
            .iter()
            .enumerate()
            .fold((0usize, 0.0f64), |b, (i, x)| if x.abs() > b.1 { (i, x.abs()) } else { b })
            .0;
        if col[pivot] < 0.0 {
            for i in 0..f.u.rows() {
                f.u.set(i, j, -f.u.get(i, j));
            }
            for i in 0..f.v.rows() {
                f.v.set(i, j, -f.v.get(i, j));
            }
        }
    }
}

/// Steps 1 to 3 on a tall input.
fn range_finder(a: &DenseMatrix, cfg: &RsvdConfig) -> Result<DenseMatrix> {
    let s = cfg.sketch_width(a.rows(), a.cols());
    let mut sampler = GaussianSampler::new(cfg.seed);
    let y0 = sketch(a, s, &mut sampler)?;
    let y = power_iterate(a, &y0, cfg.power_q)?;
    range_basis(&y)
}

/// Rank-`k` randomized SVD of `a`. Deterministic for a fixed `cfg.seed`.
pub fn randomized_ksvd(a: &DenseMatrix, cfg: &RsvdConfig) -> Result<RsvdResult> {
    cfg.validate(a.rows(), a.cols())?;
    if a.rows() < a.cols() {
        let at = a.transpose();
        let q = range_finder(&at, cfg)?;
        let mut res = project_and_solve(&at, &q, cfg.k)?;
        std::mem::swap(&mut res.factors.u, &mut res.factors.v);
        fix_signs(&mut res.factors);
        return Ok(res);
    }
    let q = range_finder(a, cfg)?;
    project_and_solve(a, &q, cfg.k)
}

/// The leading `k` singular values from steps 1 to 5, skipping the lift
/// `Ũ = Q U` and all singular vector work. Bit-identical to
/// `randomized_ksvd(a, cfg).factors.sigma`.
pub fn singular_values_only(a: &DenseMatrix, cfg: &RsvdConfig) -> Result<Vec<f64>> {
    cfg.validate(a.rows(), a.cols())?;
    let transposed;
    let tall = if a.rows() < a.cols() {
        transposed = a.transpose();
        &transposed
    } else {
        a
    };
    let q = range_finder(tall, cfg)?;
    let b = project(tall, &q, cfg.k)?;
    let mut sigma = dense_singular_values(&b)?;
    sigma.truncate(cfg.k);
    Ok(sigma)
}
