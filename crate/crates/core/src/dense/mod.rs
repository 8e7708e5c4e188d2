//! Dense kernels: blocked GEMM, Householder QR, Jacobi SVD, seeded Gaussian
//! sampling and DMAT file I/O.

pub mod dmat;
pub mod gemm;
pub mod matrix;
pub mod qr;
pub mod rng;
pub mod svd;

pub use dmat::{read_dmat, write_dmat};
pub use gemm::{gemm, matmul, matmul_nt, matmul_tn, GEMM_BLOCK, GEMM_DEPTH};
pub use matrix::{dot, frobenius_norm, pairwise_sum, sum_squares, DenseMatrix};
pub use qr::{householder_qr, QrFactors};
pub use rng::{gaussian_matrix, GaussianSampler};
pub use svd::{dense_singular_values, dense_svd, SvdFactors, JACOBI_MAX_SWEEPS};

/// Number of worker threads the kernels may use.
pub fn kernel_threads() -> usize {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}
