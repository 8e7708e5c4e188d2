//! Thin Householder QR.
//!
//! The factorization runs on a column-contiguous copy of the input so every
//! reflector touches contiguous memory. The returned `R` has a non-negative
//! diagonal; the matching columns of `Q` are flipped to compensate.

use crate::dense::matrix::{dot, sum_squares, DenseMatrix};
use crate::error::{Error, Result};

/// Thin factors of `a = q * r` for an `m x n` input with `m >= n`.
#[derive(Debug, Clone)]
pub struct QrFactors {
    /// `m x n`, orthonormal columns.
    pub q: DenseMatrix,
    /// `n x n`, upper triangular with non-negative diagonal.
    pub r: DenseMatrix,
}

/// Column-major Householder workspace: `cols[j]` is column `j` of the input,
/// overwritten by the reflector tail below the diagonal and by `R` above it.
struct Reflectors {
    m: usize,
    n: usize,
    cols: Vec<f64>,
    tau: Vec<f64>,
    beta: Vec<f64>,
}

impl Reflectors {
    fn col(&self, j: usize) -> &[f64] {
        &self.cols[j * self.m..(j + 1) * self.m]
    }

    fn factor(a: &DenseMatrix) -> Self {
        let (m, n) = a.shape();
        let cols = a.transpose().into_vec();
        let mut f = Self {
            m,
            n,
            cols,
            tau: vec![0.0; n],
            beta: vec![0.0; n],
        };
        for j in 0..n {
            let (head, tail) = f.cols.split_at_mut((j + 1) * m);
            let x = &mut head[j * m + j..];
            let (tau, beta) = make_reflector(x);
            f.tau[j] = tau;
            f.beta[j] = beta;
            if tau != 0.0 {
                let v = &x[1..];
                apply_to_columns(v, tau, j, m, tail);
            }
        }
        f
    }

    /// Upper-triangular `R` with the raw (signed) diagonal.
    fn r_raw(&self) -> DenseMatrix {
        let n = self.n;
        let mut r = DenseMatrix::zeros(n, n);
        for l in 0..n {
            let col = self.col(l);
            for i in 0..l {
                r.set(i, l, col[i]);
            }
            r.set(l, l, self.beta[l]);
        }
        r
    }

    /// Thin `Q` (m x n), returned column-major as `n` contiguous columns.
    fn q_columns(&self) -> Vec<f64> {
        let (m, n) = (self.m, self.n);
        let mut q = vec![0.0; m * n];
        for j in 0..n {
            q[j * m + j] = 1.0;
        }
        for j in (0..n).rev() {
            let tau = self.tau[j];
            if tau == 0.0 {
                continue;
            }
            let v = &self.col(j)[j + 1..];
            // Columns left of j are still unit vectors with zeros from row j down.
            apply_to_columns(v, tau, j, m, &mut q[j * m..]);
        }
        q
    }
}

/// Column-pivoted Householder QR, `a P = Q R`.
///
/// Returns `R` (raw signed diagonal, `n x n`), the pivot order (`perm[j]` is
/// the input column moved to position `j`) and, on request, the thin `Q`.
pub(crate) fn pivoted_qr(a: &DenseMatrix, want_q: bool) -> Result<(Option<DenseMatrix>, DenseMatrix, Vec<usize>)> {
    check_tall(a)?;
    let (m, n) = a.shape();
    let mut f = Reflectors {
        m,
        n,
        cols: a.transpose().into_vec(),
        tau: vec![0.0; n],
        beta: vec![0.0; n],
    };
    let mut perm: Vec<usize> = (0..n).collect();
    // Partial column norms below the current row and their last exact values.
    let mut partial: Vec<f64> = (0..n).map(|j| sum_squares(f.col(j)).sqrt()).collect();
    let mut exact = partial.clone();
    let recompute_tol = f64::EPSILON.sqrt();

    for j in 0..n {
        let pivot = (j..n).fold(j, |best, l| if partial[l] > partial[best] { l } else { best });
        if pivot != j {
            let (lo, hi) = f.cols.split_at_mut(pivot * m);
            lo[j * m..(j + 1) * m].swap_with_slice(&mut hi[..m]);
            perm.swap(j, pivot);
            partial.swap(j, pivot);
            exact.swap(j, pivot);
        }

        let (head, tail) = f.cols.split_at_mut((j + 1) * m);
        let x = &mut head[j * m + j..];
        let (tau, beta) = make_reflector(x);
        f.tau[j] = tau;
        f.beta[j] = beta;
        if tau != 0.0 {
            apply_to_columns(&x[1..], tau, j, m, tail);
        }

        for l in j + 1..n {
            if partial[l] == 0.0 {
                continue;
            }
            let col = &f.cols[l * m..(l + 1) * m];
            let ratio = col[j].abs() / partial[l];
            let shrink = (1.0 - ratio * ratio).max(0.0);
            let rel = partial[l] / exact[l];
            if shrink * rel * rel <= recompute_tol {
                let fresh = sum_squares(&col[j + 1..]).sqrt();
                partial[l] = fresh;
                exact[l] = fresh;
            } else {
                partial[l] *= shrink.sqrt();
            }
        }
    }

    let r = f.r_raw();
    let q = want_q.then(|| column_major_to_matrix(f.q_columns(), m, n));
    Ok((q, r, perm))
}

/// Turns `x` into a Householder vector in place: on return `x[1..]` holds the
/// tail of `v` (with `v[0] = 1` implied). Returns `(tau, beta)` such that
/// `(I - tau v vᵀ) x_original = beta e1`.
fn make_reflector(x: &mut [f64]) -> (f64, f64) {
    let alpha = x[0];
    let tail_sq = sum_squares(&x[1..]);
    if tail_sq == 0.0 {
        // Already a multiple of e1; no reflection needed.
        return (0.0, alpha);
    }
    let norm = (alpha * alpha + tail_sq).sqrt();
    let beta = if alpha >= 0.0 { -norm } else { norm };
    let scale = 1.0 / (alpha - beta);
    x[1..].iter_mut().for_each(|v| *v *= scale);
    x[0] = beta;
    ((beta - alpha) / beta, beta)
}

/// Applies `I - tau v vᵀ` (acting on rows `j..m`, `v[0] = 1` implied) to every
/// length-`m` column stored consecutively in `cols`.
fn apply_to_columns(v: &[f64], tau: f64, j: usize, m: usize, cols: &mut [f64]) {
    let apply = |col: &mut [f64]| {
        let y = &mut col[j..];
        let s = tau * (y[0] + dot(v, &y[1..]));
        if s != 0.0 {
            y[0] -= s;
            for (yi, vi) in y[1..].iter_mut().zip(v) {
                *yi -= s * vi;
            }
        }
    };

    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        let ncols = cols.len() / m;
        if ncols >= 64 && (m - j) * ncols >= 1 << 16 && rayon::current_num_threads() > 1 {
            cols.par_chunks_exact_mut(m).for_each(apply);
            return;
        }
    }
    cols.chunks_exact_mut(m).for_each(apply);
}

fn check_tall(a: &DenseMatrix) -> Result<()> {
    if a.rows() < a.cols() {
        return Err(Error::Shape(format!(
            "QR needs rows >= cols, got {}x{}; transpose the input first",
            a.rows(),
            a.cols()
        )));
    }
    Ok(())
}

fn column_major_to_matrix(cols: Vec<f64>, m: usize, n: usize) -> DenseMatrix {
    DenseMatrix::from_vec(n, m, cols)
        .expect("column-major buffer has n*m entries")
        .transpose()
}

/// Thin QR via Householder reflections, with the diagonal of `R` made non-negative.
pub fn householder_qr(a: &DenseMatrix) -> Result<QrFactors> {
    check_tall(a)?;
    let (m, n) = a.shape();
    let f = Reflectors::factor(a);
    let mut r = f.r_raw();
    let mut qcols = f.q_columns();
    for j in 0..n {
        if r.get(j, j) < 0.0 {
            r.row_mut(j)[j..].iter_mut().for_each(|x| *x = -*x);
            qcols[j * m..(j + 1) * m].iter_mut().for_each(|x| *x = -*x);
        }
    }
    Ok(QrFactors {
        q: column_major_to_matrix(qcols, m, n),
        r,
    })
}

/// Orthonormal basis from thin QR, keeping only the columns whose `|R_jj|`
/// exceeds `drop_tol`. Returns the basis and the kept column indices.
pub(crate) fn qr_basis_dropping(a: &DenseMatrix, drop_tol: f64) -> Result<(DenseMatrix, Vec<usize>)> {
    let qr = householder_qr(a)?;
    let kept: Vec<usize> = (0..a.cols()).filter(|&j| qr.r.get(j, j) > drop_tol).collect();
    if kept.is_empty() {
        return Err(Error::EmptyRange);
    }
    let q = if kept.len() == a.cols() {
        qr.q
    } else {
        qr.q.select_columns(&kept)
    };
    Ok((q, kept))
}
