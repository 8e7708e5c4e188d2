//! One-sided (Hestenes) Jacobi SVD with QR preconditioning.
//!
//! The input is put in its tall orientation `T` (rows >= cols) and factored
//! as `T P = Q R` with column pivoting. Plane rotations are then applied to
//! pairs of columns of `X = Rᵀ` until every pair is numerically orthogonal.
//! Pivoting makes `X` close to having orthogonal columns already, so the
//! sweep count drops sharply compared with rotating `T` directly. With
//! `X = Uₓ Σ Vₓᵀ` the factors of `T` are `Q Vₓ` on the left and `P Uₓ` on
//! the right.
//!
//! For the compact SVD `A = U Σ Vᵀ` of rank `r`, the classical square factors
//! are `[U Û] [Σ 0; 0 0] [V V̂]ᵀ`; this module returns the thin form with
//! `min(m, n)` triplets, completing the factors with orthonormal columns
//! wherever a singular value is exactly zero.

use crate::dense::gemm::{matmul, matmul_nt};
use crate::dense::matrix::{dot, sum_squares, DenseMatrix};
use crate::dense::qr::pivoted_qr;
use crate::error::{Error, Result};

/// Sweep limit for the Jacobi iteration.
pub const JACOBI_MAX_SWEEPS: usize = 30;

/// Thin SVD factors `u * diag(sigma) * vᵀ`.
#[derive(Debug, Clone)]
pub struct SvdFactors {
    /// `m x r`, orthonormal columns.
    pub u: DenseMatrix,
    /// Length `r`, non-increasing, non-negative.
    pub sigma: Vec<f64>,
    /// `n x r`, orthonormal columns.
    pub v: DenseMatrix,
}

impl SvdFactors {
    pub fn len(&self) -> usize {
        self.sigma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigma.is_empty()
    }

    /// Keeps the leading `k` triplets.
    pub fn truncate(self, k: usize) -> Self {
        assert!(k >= 1 && k <= self.sigma.len(), "truncate: k out of range");
        let mut sigma = self.sigma;
        sigma.truncate(k);
        Self {
            u: self.u.leading_columns(k),
            sigma,
            v: self.v.leading_columns(k),
        }
    }

    /// `u * diag(sigma) * vᵀ`.
    pub fn reconstruct(&self) -> DenseMatrix {
        let mut us = self.u.clone();
        us.scale_columns(&self.sigma);
        matmul_nt(&us, &self.v).expect("factor shapes agree")
    }
}

/// Full thin SVD of `a` (any shape).
pub fn dense_svd(a: &DenseMatrix) -> Result<SvdFactors> {
    let tall = a.rows() >= a.cols();
    let mut jac = Jacobi::new(a, true)?;
    jac.run()?;
    let (sigma, left, right) = jac.finish_with_vectors()?;
    let (mut u, mut v) = if tall { (left, right) } else { (right, left) };
    fix_signs(&mut u, &mut v);
    Ok(SvdFactors { u, sigma, v })
}

/// Singular values of `a` in non-increasing order, without forming vectors.
///
/// Applies exactly the same rotations as [`dense_svd`], so the values are
/// bit-identical to `dense_svd(a).sigma`.
pub fn dense_singular_values(a: &DenseMatrix) -> Result<Vec<f64>> {
    let mut jac = Jacobi::new(a, false)?;
    jac.run()?;
    Ok(jac.finish_values().0)
}

struct Jacobi {
    /// Column length of the working matrix `X` (equal to `n`).
    m: usize,
    /// Number of columns of `X`.
    n: usize,
    /// Column `j` of `X` is `w[j*m..(j+1)*m]`.
    w: Vec<f64>,
    /// Column `j` of the accumulated rotations is `v[j*n..(j+1)*n]`.
    v: Option<Vec<f64>>,
    /// Thin `Q` of the preconditioning QR, kept only when vectors are wanted.
    q: Option<DenseMatrix>,
    /// Column pivot order of the preconditioning QR.
    perm: Vec<usize>,
    norms: Vec<f64>,
    tol: f64,
}

impl Jacobi {
    fn new(a: &DenseMatrix, vectors: bool) -> Result<Self> {
        if !a.is_finite() {
            return Err(Error::InvalidArgument("SVD input contains NaN or infinity".into()));
        }
        let tall = if a.rows() >= a.cols() { a.clone() } else { a.transpose() };
        let n = tall.cols();
        let (q, r, perm) = pivoted_qr(&tall, vectors)?;
        // Row j of R (row-major) is column j of X = Rᵀ.
        let w = r.into_vec();
        let v = vectors.then(|| {
            let mut v = vec![0.0; n * n];
            for j in 0..n {
                v[j * n + j] = 1.0;
            }
            v
        });
        Ok(Self {
            m: n,
            n,
            w,
            v,
            q,
            perm,
            norms: vec![0.0; n],
            // Relative orthogonality threshold for cos(angle) between columns.
            tol: f64::EPSILON * (n.max(16) as f64),
        })
    }

    fn col(&self, j: usize) -> &[f64] {
        &self.w[j * self.m..(j + 1) * self.m]
    }

    fn refresh_norms(&mut self) {
        for j in 0..self.n {
            self.norms[j] = sum_squares(self.col(j));
        }
    }

    /// Reorders columns by decreasing norm (de Rijk pivoting).
    fn sort_columns(&mut self) {
        let n = self.n;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| self.norms[j].total_cmp(&self.norms[i]).then(i.cmp(&j)));
        if order.iter().enumerate().all(|(i, &j)| i == j) {
            return;
        }
        self.w = permute_blocks(&self.w, &order, self.m);
        if let Some(v) = &self.v {
            self.v = Some(permute_blocks(v, &order, n));
        }
        self.norms = order.iter().map(|&j| self.norms[j]).collect();
    }

    fn run(&mut self) -> Result<usize> {
        let (m, n) = (self.m, self.n);
        for sweep in 1..=JACOBI_MAX_SWEEPS {
            self.refresh_norms();
            self.sort_columns();
            let mut rotations = 0usize;
            for p in 0..n.saturating_sub(1) {
                for q in p + 1..n {
                    let (a, b) = (self.norms[p], self.norms[q]);
                    if a == 0.0 || b == 0.0 {
                        continue;
                    }
                    let g = dot(self.col(p), self.col(q));
                    if g.abs() <= self.tol * a.sqrt() * b.sqrt() {
                        continue;
                    }
                    let zeta = (b - a) / (2.0 * g);
                    let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = c * t;

                    let (head, tail) = self.w.split_at_mut(q * m);
                    rotate(&mut head[p * m..(p + 1) * m], &mut tail[..m], c, s);
                    if let Some(v) = self.v.as_mut() {
                        let (head, tail) = v.split_at_mut(q * n);
                        rotate(&mut head[p * n..(p + 1) * n], &mut tail[..n], c, s);
                    }

                    let a_new = a - t * g;
                    let b_new = b + t * g;
                    // The update formulas cancel badly when a norm collapses.
                    if a_new < 0.5 * a || b_new < 0.5 * b {
                        self.norms[p] = sum_squares(self.col(p));
                        self.norms[q] = sum_squares(self.col(q));
                    } else {
                        self.norms[p] = a_new;
                        self.norms[q] = b_new;
                    }
                    rotations += 1;
                }
            }
            if rotations == 0 {
                return Ok(sweep);
            }
        }
        Err(Error::NoConvergence {
            sweeps: JACOBI_MAX_SWEEPS,
        })
    }

    /// Singular values (sorted) and the column order that sorts them.
    fn finish_values(&self) -> (Vec<f64>, Vec<usize>) {
        let raw: Vec<f64> = (0..self.n).map(|j| sum_squares(self.col(j)).sqrt()).collect();
        let mut order: Vec<usize> = (0..self.n).collect();
        order.sort_by(|&i, &j| raw[j].total_cmp(&raw[i]).then(i.cmp(&j)));
        (order.iter().map(|&j| raw[j]).collect(), order)
    }

    /// Returns `(sigma, left, right)` for the tall orientation, signs unfixed.
    fn finish_with_vectors(self) -> Result<(Vec<f64>, DenseMatrix, DenseMatrix)> {
        let n = self.n;
        let (sigma, order) = self.finish_values();
        let vbuf = self.v.as_ref().expect("vectors requested");

        // Uₓ from the normalized columns of X, Vₓ from the rotations.
        let mut ux: Vec<f64> = Vec::with_capacity(n * n);
        let mut vx: Vec<f64> = Vec::with_capacity(n * n);
        for (&j, &s) in order.iter().zip(&sigma) {
            let col = self.col(j);
            if s > 0.0 {
                ux.extend(col.iter().map(|x| x / s));
            } else {
                ux.extend(std::iter::repeat_n(0.0, n));
            }
            vx.extend_from_slice(&vbuf[j * n..(j + 1) * n]);
        }
        let zero_from = sigma.iter().position(|&s| s == 0.0).unwrap_or(n);
        complete_orthonormal(&mut ux, n, zero_from, n);

        let mut right = DenseMatrix::zeros(n, n);
        for c in 0..n {
            for (i, &p) in self.perm.iter().enumerate() {
                right.set(p, c, ux[c * n + i]);
            }
        }
        let vx = DenseMatrix::from_vec(n, n, vx).unwrap().transpose();
        let left = matmul(self.q.as_ref().expect("vectors requested"), &vx)?;
        Ok((sigma, left, right))
    }
}

/// Flips paired columns so the largest-magnitude entry of each `u` column is positive.
fn fix_signs(u: &mut DenseMatrix, v: &mut DenseMatrix) {
    let flips: Vec<bool> = (0..u.cols())
        .map(|j| {
            let col = u.column(j);
            let big = col.iter().fold(0.0f64, |m, &x| if x.abs() > m.abs() { x } else { m });
            big < 0.0
        })
        .collect();
    if flips.iter().any(|&f| f) {
        let signs: Vec<f64> = flips.iter().map(|&f| if f { -1.0 } else { 1.0 }).collect();
        u.scale_columns(&signs);
        v.scale_columns(&signs);
    }
}

#[inline]
fn rotate(x: &mut [f64], y: &mut [f64], c: f64, s: f64) {
    for (a, b) in x.iter_mut().zip(y.iter_mut()) {
        let (xa, yb) = (*a, *b);
        *a = c * xa - s * yb;
        *b = s * xa + c * yb;
    }
}

fn permute_blocks(buf: &[f64], order: &[usize], len: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(buf.len());
    for &j in order {
        out.extend_from_slice(&buf[j * len..(j + 1) * len]);
    }
    out
}

/// Fills columns `from..n` (column-major, length `m`) with unit vectors
/// orthogonal to all preceding columns, using the best-conditioned
/// coordinate directions and two passes of Gram–Schmidt.
fn complete_orthonormal(cols: &mut [f64], m: usize, from: usize, n: usize) {
    for j in from..n {
        let mut best: Option<(f64, Vec<f64>)> = None;
        for e in 0..m {
            let mut cand = vec![0.0; m];
            cand[e] = 1.0;
            for _ in 0..2 {
                for i in 0..j {
                    let prev = &cols[i * m..(i + 1) * m];
                    let h = dot(prev, &cand);
                    cand.iter_mut().zip(prev).for_each(|(c, p)| *c -= h * p);
                }
            }
            let nrm = sum_squares(&cand).sqrt();
            if best.as_ref().is_none_or(|(b, _)| nrm > *b) {
                best = Some((nrm, cand));
            }
            if nrm > 0.7 {
                break;
            }
        }
        let (nrm, cand) = best.expect("m >= n guarantees a direction");
        for (dst, c) in cols[j * m..(j + 1) * m].iter_mut().zip(&cand) {
            *dst = c / nrm;
        }
    }
}
