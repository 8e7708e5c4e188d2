//! Reference implementations used as test oracles. Deliberately naive: plain
//! loops, no blocking, no shared code with the library kernels.
#![allow(dead_code)]

use rksvd::{DenseMatrix, GaussianSampler};

pub fn random_matrix(seed: u64, rows: usize, cols: usize) -> DenseMatrix {
    rksvd::dense::gaussian_matrix(&mut GaussianSampler::new(seed), rows, cols)
}

/// Triple-loop `alpha * op(a) * op(b) + beta * c`.
pub fn naive_gemm(alpha: f64, a: &DenseMatrix, ta: bool, b: &DenseMatrix, tb: bool, beta: f64, c: &DenseMatrix) -> DenseMatrix {
    let at = |i: usize, l: usize| if ta { a.get(l, i) } else { a.get(i, l) };
    let bt = |l: usize, j: usize| if tb { b.get(j, l) } else { b.get(l, j) };
    let (m, kk) = if ta { (a.cols(), a.rows()) } else { (a.rows(), a.cols()) };
    let n = if tb { b.rows() } else { b.cols() };
    let mut out = DenseMatrix::zeros(m, n);
    for i in 0..m {
        for j in 0..n {
            let mut s = 0.0;
            for l in 0..kk {
                s += at(i, l) * bt(l, j);
            }
            let base = if beta == 0.0 { 0.0 } else { beta * c.get(i, j) };
            out.set(i, j, alpha * s + base);
        }
    }
    out
}

pub fn naive_matmul(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    naive_gemm(1.0, a, false, b, false, 0.0, &DenseMatrix::zeros(a.rows(), b.cols()))
}

pub fn naive_fro(a: &DenseMatrix) -> f64 {
    a.as_slice().iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn rel_fro_diff(x: &DenseMatrix, y: &DenseMatrix) -> f64 {
    let mut d = 0.0;
    for (a, b) in x.as_slice().iter().zip(y.as_slice()) {
        d += (a - b) * (a - b);
    }
    d.sqrt() / naive_fro(y).max(f64::MIN_POSITIVE)
}

/// `max |qᵀq - I|`.
pub fn orthonormality_defect(q: &DenseMatrix) -> f64 {
    let g = naive_gemm(1.0, q, true, q, false, 0.0, &DenseMatrix::zeros(q.cols(), q.cols()));
    let mut worst = 0.0f64;
    for i in 0..q.cols() {
        for j in 0..q.cols() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g.get(i, j) - target).abs());
        }
    }
    worst
}

/// Eigenvalues of a symmetric matrix by cyclic two-sided Jacobi, descending.
pub fn symmetric_eigenvalues(s: &DenseMatrix) -> Vec<f64> {
    let n = s.rows();
    assert_eq!(n, s.cols());
    let mut a: Vec<Vec<f64>> = (0..n).map(|i| s.row(i).to_vec()).collect();
    for _sweep in 0..100 {
        let mut off = 0.0;
        let mut diag = 0.0;
        for i in 0..n {
            diag += a[i][i] * a[i][i];
            for j in 0..n {
                if i != j {
                    off += a[i][j] * a[i][j];
                }
            }
        }
        if off <= 1e-32 * diag || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - sn * akq;
                    a[k][q] = sn * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - sn * aqk;
                    a[q][k] = sn * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(|x, y| y.total_cmp(x));
    ev
}

/// Singular values as square roots of the eigenvalues of the smaller Gram matrix.
pub fn gram_singular_values(a: &DenseMatrix) -> Vec<f64> {
    let tall = a.rows() >= a.cols();
    let k = a.rows().min(a.cols());
    let g = naive_gemm(1.0, a, tall, a, !tall, 0.0, &DenseMatrix::zeros(k, k));
    symmetric_eigenvalues(&g).into_iter().map(|l| l.max(0.0).sqrt()).collect()
}

/// Sample covariance with divisor `N - 1`, by explicit loops.
pub fn covariance(x: &DenseMatrix) -> DenseMatrix {
    let (n, d) = x.shape();
    let mean: Vec<f64> = (0..d).map(|j| (0..n).map(|i| x.get(i, j)).sum::<f64>() / n as f64).collect();
    let mut c = DenseMatrix::zeros(d, d);
    for a in 0..d {
        for b in a..d {
            let mut s = 0.0;
            for i in 0..n {
                s += (x.get(i, a) - mean[a]) * (x.get(i, b) - mean[b]);
            }
            c.set(a, b, s / (n - 1) as f64);
            c.set(b, a, s / (n - 1) as f64);
        }
    }
    c
}

/// Sine of the largest principal angle between the spans of two
/// orthonormal bases: the 2-norm of `(I - q2 q2ᵀ) q1`.
pub fn max_principal_sine(q1: &DenseMatrix, q2: &DenseMatrix) -> f64 {
    let proj = naive_gemm(1.0, q2, true, q1, false, 0.0, &DenseMatrix::zeros(q2.cols(), q1.cols()));
    let back = naive_matmul(q2, &proj);
    let mut resid = q1.clone();
    for (r, b) in resid.as_mut_slice().iter_mut().zip(back.as_slice()) {
        *r -= b;
    }
    gram_singular_values(&resid).first().copied().unwrap_or(0.0)
}

/// Orthonormal basis by modified Gram–Schmidt with reorthogonalization.
pub fn gram_schmidt(a: &DenseMatrix) -> DenseMatrix {
    let (m, n) = a.shape();
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| a.column(j)).collect();
    for j in 0..n {
        for _ in 0..2 {
            for i in 0..j {
                let h: f64 = cols[i].iter().zip(&cols[j]).map(|(x, y)| x * y).sum();
                let prev = cols[i].clone();
                cols[j].iter_mut().zip(&prev).for_each(|(c, p)| *c -= h * p);
            }
        }
        let nrm = cols[j].iter().map(|x| x * x).sum::<f64>().sqrt();
        cols[j].iter_mut().for_each(|c| *c /= nrm);
    }
    let mut q = DenseMatrix::zeros(m, n);
    for (j, c) in cols.iter().enumerate() {
        for (i, v) in c.iter().enumerate() {
            q.set(i, j, *v);
        }
    }
    q
}

pub fn max_rel_err(got: &[f64], want: &[f64]) -> f64 {
    assert!(got.len() <= want.len());
    got.iter()
        .zip(want)
        .map(|(g, w)| ((g - w) / w).abs())
        .fold(0.0, f64::max)
}

/// Samples-as-rows data with per-feature scale `1 / j`, rotated by a random
/// orthogonal matrix so no feature axis is special.
pub fn anisotropic_data(seed: u64, n: usize, d: usize) -> DenseMatrix {
    let mut sampler = GaussianSampler::new(seed);
    let mut x = rksvd::dense::gaussian_matrix(&mut sampler, n, d);
    let scales: Vec<f64> = (1..=d).map(|j| 1.0 / j as f64).collect();
    x.scale_columns(&scales);
    let p = rksvd::synth::random_orthogonal(d, &mut sampler);
    let mut rotated = naive_matmul(&x, &p);
    // Non-zero mean so centering matters.
    for i in 0..n {
        for (j, v) in rotated.row_mut(i).iter_mut().enumerate() {
            *v += 0.5 + j as f64 * 0.01;
        }
    }
    rotated
}
