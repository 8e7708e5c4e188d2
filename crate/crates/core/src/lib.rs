//! Randomized truncated SVD on top of a small self-contained dense kernel set.
//!
//! - [`dense`]: matrix type, blocked GEMM, Householder QR, Jacobi SVD,
//!   seeded Gaussian sampling, DMAT files.
//! - [`rsvd`]: sketch, subspace iteration, projection and the small SVD.
//! - [`synth`]: test matrices with planted singular values.
//! - [`pca`]: principal components via the randomized solver.
//! - [`bench`]: timing statistics, speedup bands and CSV reports.
//! - [`cli`]: the `rksvd` command line.

pub mod bench;
pub mod cli;
pub mod dense;
pub mod error;
pub mod pca;
pub mod rsvd;
pub mod synth;

pub use dense::{DenseMatrix, GaussianSampler, QrFactors, SvdFactors};
pub use error::{Error, Result};
