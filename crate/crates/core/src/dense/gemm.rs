//! Cache-blocked general matrix multiply, `C <- alpha * op(A) * op(B) + beta * C`.
//!
//! `op(B)` is packed once into `NR`-wide column panels, split into depth blocks
//! of `GEMM_DEPTH`. The output is processed in `GEMM_BLOCK x GEMM_BLOCK` tiles;
//! each row band of `GEMM_BLOCK` rows packs its slice of `op(A)` into `MR`-tall
//! row panels and runs an `MR x NR` register kernel over every tile.
//!
//! Every output entry accumulates its depth blocks in the same order no matter
//! how row bands are scheduled, so threaded and serial runs are bit-identical.

use crate::dense::matrix::DenseMatrix;
use crate::error::{Error, Result};

/// Edge length of the square output tile (rows and columns of C per block).
pub const GEMM_BLOCK: usize = 64;
/// Depth (inner-dimension) block length.
pub const GEMM_DEPTH: usize = 256;

const MR: usize = 4;
const NR: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Transpose {
    No,
    Yes,
}

impl Transpose {
    fn from_flag(t: bool) -> Self {
        if t {
            Transpose::Yes
        } else {
            Transpose::No
        }
    }
}

fn op_shape(a: &DenseMatrix, t: Transpose) -> (usize, usize) {
    match t {
        Transpose::No => a.shape(),
        Transpose::Yes => (a.cols(), a.rows()),
    }
}

/// `alpha * op(a) * op(b) + beta * c`, consuming and returning `c`.
pub fn gemm(
    alpha: f64,
    a: &DenseMatrix,
    transpose_a: bool,
    b: &DenseMatrix,
    transpose_b: bool,
    beta: f64,
    mut c: DenseMatrix,
) -> Result<DenseMatrix> {
    let ta = Transpose::from_flag(transpose_a);
    let tb = Transpose::from_flag(transpose_b);
    let (m, ka) = op_shape(a, ta);
    let (kb, n) = op_shape(b, tb);
    if ka != kb {
        return Err(Error::mismatch("gemm", (m, ka), (kb, n)));
    }
    if c.shape() != (m, n) {
        return Err(Error::mismatch("gemm (output)", (m, n), c.shape()));
    }
    gemm_slices(alpha, a, ta, b, tb, beta, c.as_mut_slice(), m, n, ka);
    Ok(c)
}

/// `a * b`.
pub fn matmul(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    product(a, Transpose::No, b, Transpose::No)
}

/// `aᵀ * b`.
pub fn matmul_tn(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    product(a, Transpose::Yes, b, Transpose::No)
}

/// `a * bᵀ`.
pub fn matmul_nt(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    product(a, Transpose::No, b, Transpose::Yes)
}

fn product(a: &DenseMatrix, ta: Transpose, b: &DenseMatrix, tb: Transpose) -> Result<DenseMatrix> {
    let (m, ka) = op_shape(a, ta);
    let (kb, n) = op_shape(b, tb);
    if ka != kb {
        return Err(Error::mismatch("matmul", (m, ka), (kb, n)));
    }
    let mut c = DenseMatrix::zeros(m, n);
    gemm_slices(1.0, a, ta, b, tb, 0.0, c.as_mut_slice(), m, n, ka);
    Ok(c)
}

#[allow(clippy::too_many_arguments)]
fn gemm_slices(
    alpha: f64,
    a: &DenseMatrix,
    ta: Transpose,
    b: &DenseMatrix,
    tb: Transpose,
    beta: f64,
    c: &mut [f64],
    m: usize,
    n: usize,
    k: usize,
) {
    debug_assert_eq!(c.len(), m * n);
    if beta == 0.0 {
        c.fill(0.0);
    } else if beta != 1.0 {
        c.iter_mut().for_each(|x| *x *= beta);
    }
    if alpha == 0.0 {
        return;
    }

    let packed_b = pack_b(b, tb, k, n);
    let band = |(band_idx, c_band): (usize, &mut [f64])| {
        let row0 = band_idx * GEMM_BLOCK;
        let mc = c_band.len() / n;
        let packed_a = pack_a(alpha, a, ta, row0, mc, k);
        band_kernel(&packed_a, &packed_b, c_band, mc, n, k);
    };

    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        if m > GEMM_BLOCK && rayon::current_num_threads() > 1 {
            c.par_chunks_mut(GEMM_BLOCK * n).enumerate().for_each(band);
            return;
        }
    }
    c.chunks_mut(GEMM_BLOCK * n).enumerate().for_each(band);
}

#[inline]
fn panels(len: usize, width: usize) -> usize {
    len.div_ceil(width)
}

/// Packs `op(b)` (k x n) depth block by depth block; within a block, `NR`-wide
/// column panels are stored row after row, zero padded on the right edge.
fn pack_b(b: &DenseMatrix, tb: Transpose, k: usize, n: usize) -> Vec<f64> {
    let np = panels(n, NR);
    let mut out = vec![0.0; k * np * NR];
    let src = b.as_slice();
    let ld = b.cols();
    for p0 in (0..k).step_by(GEMM_DEPTH) {
        let kc = GEMM_DEPTH.min(k - p0);
        let block = &mut out[p0 * np * NR..(p0 + kc) * np * NR];
        for jp in 0..np {
            let panel = &mut block[jp * kc * NR..(jp + 1) * kc * NR];
            let j0 = jp * NR;
            let nr = NR.min(n - j0);
            for p in 0..kc {
                let dst = &mut panel[p * NR..p * NR + nr];
                match tb {
                    Transpose::No => {
                        let row = (p0 + p) * ld;
                        dst.copy_from_slice(&src[row + j0..row + j0 + nr]);
                    }
                    Transpose::Yes => {
                        for (jj, d) in dst.iter_mut().enumerate() {
                            *d = src[(j0 + jj) * ld + p0 + p];
                        }
                    }
                }
            }
        }
    }
    out
}

/// Packs rows `row0..row0+mc` of `alpha * op(a)` into `MR`-tall row panels,
/// depth block by depth block, zero padded at the bottom edge.
fn pack_a(alpha: f64, a: &DenseMatrix, ta: Transpose, row0: usize, mc: usize, k: usize) -> Vec<f64> {
    let mp = panels(mc, MR);
    let mut out = vec![0.0; k * mp * MR];
    let src = a.as_slice();
    let ld = a.cols();
    for p0 in (0..k).step_by(GEMM_DEPTH) {
        let kc = GEMM_DEPTH.min(k - p0);
        let block = &mut out[p0 * mp * MR..(p0 + kc) * mp * MR];
        for ip in 0..mp {
            let panel = &mut block[ip * kc * MR..(ip + 1) * kc * MR];
            let i0 = row0 + ip * MR;
            let mr = MR.min(row0 + mc - i0);
            match ta {
                Transpose::No => {
                    for r in 0..mr {
                        let row = &src[(i0 + r) * ld + p0..(i0 + r) * ld + p0 + kc];
                        for (p, &v) in row.iter().enumerate() {
                            panel[p * MR + r] = alpha * v;
                        }
                    }
                }
                Transpose::Yes => {
                    for p in 0..kc {
                        let row = &src[(p0 + p) * ld + i0..(p0 + p) * ld + i0 + mr];
                        for (r, &v) in row.iter().enumerate() {
                            panel[p * MR + r] = alpha * v;
                        }
                    }
                }
            }
        }
    }
    out
}

fn band_kernel(packed_a: &[f64], packed_b: &[f64], c: &mut [f64], mc: usize, n: usize, k: usize) {
    let mp = panels(mc, MR);
    let np = panels(n, NR);
    for j0 in (0..n).step_by(GEMM_BLOCK) {
        let jp_lo = j0 / NR;
        let jp_hi = panels((j0 + GEMM_BLOCK).min(n), NR);
        for p0 in (0..k).step_by(GEMM_DEPTH) {
            let kc = GEMM_DEPTH.min(k - p0);
            let a_block = &packed_a[p0 * mp * MR..(p0 + kc) * mp * MR];
            let b_block = &packed_b[p0 * np * NR..(p0 + kc) * np * NR];
            for ip in 0..mp {
                let ap = &a_block[ip * kc * MR..(ip + 1) * kc * MR];
                let i0 = ip * MR;
                let mr = MR.min(mc - i0);
                for jp in jp_lo..jp_hi {
                    let bp = &b_block[jp * kc * NR..(jp + 1) * kc * NR];
                    let acc = micro_kernel(ap, bp);
                    let jj0 = jp * NR;
                    let nr = NR.min(n - jj0);
                    for (r, acc_row) in acc.iter().enumerate().take(mr) {
                        let c_row = &mut c[(i0 + r) * n + jj0..(i0 + r) * n + jj0 + nr];
                        for (cv, av) in c_row.iter_mut().zip(acc_row) {
                            *cv += av;
                        }
                    }
                }
            }
        }
    }
}

#[inline(always)]
fn micro_kernel(ap: &[f64], bp: &[f64]) -> [[f64; NR]; MR] {
    let mut acc = [[0.0f64; NR]; MR];
    for (a, b) in ap.chunks_exact(MR).zip(bp.chunks_exact(NR)) {
        let a: &[f64; MR] = a.try_into().unwrap();
        let b: &[f64; NR] = b.try_into().unwrap();
        for r in 0..MR {
            for c in 0..NR {
                acc[r][c] += a[r] * b[c];
            }
        }
    }
    acc
}
